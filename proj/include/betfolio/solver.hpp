#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "betfolio/error.hpp"
#include "betfolio/linalg.hpp"

namespace betfolio {

struct SolveOptions {
  int max_iters = 10000;
  double grad_tol = 1e-7;
  double step_shrink = 0.5;
  double armijo_slope = 1e-4;
  double domain_floor = 1e-12;
};

struct SolveOutcome {
  std::vector<double> point;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
  double kkt_residual = 0.0;
};

// Objective callback: fill `value` (and `grad` when non-null) at x, or return
// false when x lies outside the objective's domain.
using Objective =
    std::function<bool(const std::vector<double>& x, double& value, std::vector<double>* grad)>;

// Euclidean projection onto {y >= 0, sum(y) <= cap}. If clamping negatives
// already satisfies the cap that clamp is the projection; otherwise the cap is
// active and the solution is max(x - tau, 0) with tau chosen so the sum hits
// the cap exactly (found by sorting).
inline std::vector<double> project_capped_simplex(std::vector<double> x, double cap) {
  if (!(cap > 0.0)) fail(ErrorCode::InvalidInput, "projection cap must be positive");
  double total = 0.0;
  for (double& v : x) {
    if (v < 0.0) v = 0.0;
    total += v;
  }
  if (total <= cap) return x;
  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - cap) / static_cast<double>(k + 1);
    if (k + 1 == sorted.size() || sorted[k + 1] <= candidate) {
      tau = candidate;
      break;
    }
  }
  for (double& v : x) v = std::max(0.0, v - tau);
  return x;
}

namespace detail {

inline double gradient_map_residual(const std::vector<double>& x, const std::vector<double>& grad,
                                    double cap) {
  std::vector<double> mapped(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mapped[i] = x[i] + grad[i];
  mapped = project_capped_simplex(std::move(mapped), cap);
  double residual = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mapped[i];
    residual += d * d;
  }
  return std::sqrt(residual);
}

}  // namespace detail

// Projected-gradient ascent over {x >= 0, sum(x) <= cap} with a safeguarded
// Barzilai-Borwein trial step and Armijo backtracking. The objective sequence
// is monotone nondecreasing; convergence is declared when the unit-step
// gradient mapping ||x - P(x + g)|| falls below grad_tol.
inline SolveOutcome maximize_concave(const Objective& objective, std::vector<double> start,
                                     double cap, const SolveOptions& opts = {}) {
  std::vector<double> x = project_capped_simplex(std::move(start), cap);
  double fx = 0.0;
  std::vector<double> grad(x.size(), 0.0);
  if (!objective(x, fx, &grad))
    fail(ErrorCode::DomainError, "objective is undefined at the start point");

  SolveOutcome out;
  double bb_step = 1.0;
  std::vector<double> prev_x, prev_grad;
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    out.kkt_residual = detail::gradient_map_residual(x, grad, cap);
    if (out.kkt_residual <= opts.grad_tol) {
      out.converged = true;
      break;
    }

    // Spectral step length from the last displacement/curvature pair.
    if (!prev_x.empty()) {
      double ss = 0.0;
      double sy = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = x[i] - prev_x[i];
        const double y = prev_grad[i] - grad[i];
        ss += s * s;
        sy += s * y;
      }
      bb_step = (sy > 1e-300) ? ss / sy : bb_step * 2.0;
      bb_step = std::clamp(bb_step, 1e-10, 1e10);
    }

    prev_x = x;
    prev_grad = grad;

    double step = bb_step;
    bool advanced = false;
    for (int attempt = 0; attempt < 80; ++attempt) {
      std::vector<double> trial(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + step * grad[i];
      trial = project_capped_simplex(std::move(trial), cap);
      double directional = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) directional += grad[i] * (trial[i] - x[i]);
      if (directional <= 0.0) break;  // projection arc exhausted: no ascent direction left
      double ft = 0.0;
      std::vector<double> gt(x.size());
      if (objective(trial, ft, &gt) && ft >= fx + opts.armijo_slope * directional) {
        x = std::move(trial);
        fx = ft;
        grad = std::move(gt);
        advanced = true;
        break;
      }
      step *= opts.step_shrink;
    }
    if (!advanced) break;  // stalled: report the best (current) iterate, flagged below
  }

  // The loop may exit after stepping past the last residual computation;
  // refresh it so the reported figure matches the reported point.
  out.kkt_residual = detail::gradient_map_residual(x, grad, cap);
  if (out.kkt_residual <= opts.grad_tol) out.converged = true;
  out.point = std::move(x);
  out.objective = fx;
  out.iterations = iter;
  return out;
}

namespace detail {

struct LuFactors {
  Matrix lu;
  std::vector<std::size_t> perm;
  bool ok = false;
};

inline LuFactors lu_factor(Matrix m) {
  const std::size_t n = m.size();
  LuFactors factors;
  factors.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) factors.perm[i] = i;
  double scale = 0.0;
  for (const auto& row : m)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return factors;  // zero matrix: singular
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(m[col][col]);
    for (std::size_t row = col + 1; row < n; ++row) {
      const double v = std::abs(m[row][col]);
      if (v > best) {
        best = v;
        pivot = row;
      }
    }
    if (best <= 1e-14 * scale) return factors;  // numerically singular
    if (pivot != col) {
      std::swap(m[pivot], m[col]);
      std::swap(factors.perm[pivot], factors.perm[col]);
    }
    for (std::size_t row = col + 1; row < n; ++row) {
      const double mult = m[row][col] / m[col][col];
      m[row][col] = mult;
      for (std::size_t k = col + 1; k < n; ++k) m[row][k] -= mult * m[col][k];
    }
  }
  factors.lu = std::move(m);
  factors.ok = true;
  return factors;
}

inline std::vector<double> lu_apply(const LuFactors& factors, const std::vector<double>& rhs) {
  const std::size_t n = factors.lu.size();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rhs[factors.perm[i]];
  for (std::size_t i = 1; i < n; ++i) {
    double sum = x[i];
    for (std::size_t k = 0; k < i; ++k) sum -= factors.lu[i][k] * x[k];
    x[i] = sum;
  }
  for (std::size_t i = n; i-- > 0;) {
    double sum = x[i];
    for (std::size_t k = i + 1; k < n; ++k) sum -= factors.lu[i][k] * x[k];
    x[i] = sum / factors.lu[i][i];
  }
  return x;
}

// Dense LU solve with a couple of rounds of iterative refinement; the
// refinement residual is accumulated in long double so the solve stays
// accurate on the ill-conditioned saddle systems a tiny ridge produces.
inline std::optional<std::vector<double>> solve_linear(const Matrix& m,
                                                       const std::vector<double>& rhs,
                                                       int refine_rounds = 2) {
  const LuFactors factors = lu_factor(m);
  if (!factors.ok) return std::nullopt;
  std::vector<double> x = lu_apply(factors, rhs);
  const std::size_t n = m.size();
  for (int round = 0; round < refine_rounds; ++round) {
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) {
      long double acc = rhs[i];
      for (std::size_t k = 0; k < n; ++k)
        acc -= static_cast<long double>(m[i][k]) * static_cast<long double>(x[k]);
      residual[i] = static_cast<double>(acc);
    }
    const std::vector<double> correction = lu_apply(factors, residual);
    for (std::size_t i = 0; i < n; ++i) x[i] += correction[i];
  }
  return x;
}

// Indices of a maximal linearly independent subset of the given rows,
// restricted to the columns in `cols` (modified Gram-Schmidt).
inline std::vector<std::size_t> independent_rows(const Matrix& a,
                                                 const std::vector<std::size_t>& cols) {
  std::vector<std::size_t> kept;
  std::vector<std::vector<double>> basis;
  for (std::size_t r = 0; r < a.size(); ++r) {
    std::vector<double> v(cols.size());
    double original = 0.0;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      v[c] = a[r][cols[c]];
      original += v[c] * v[c];
    }
    original = std::sqrt(original);
    for (const auto& q : basis) {
      double proj = 0.0;
      for (std::size_t c = 0; c < v.size(); ++c) proj += q[c] * v[c];
      for (std::size_t c = 0; c < v.size(); ++c) v[c] -= proj * q[c];
    }
    const double remaining = norm2(v);
    if (remaining > std::max(1e-12, 1e-12 * original)) {
      for (double& c : v) c /= remaining;
      basis.push_back(std::move(v));
      kept.push_back(r);
    }
  }
  return kept;
}

}  // namespace detail

// Minimize x' Q x subject to A x = b (and x >= 0 when nonneg is set) by a
// primal active-set iteration. Q must be symmetric positive semidefinite; add
// a ridge before calling when it is singular along feasible directions.
inline SolveOutcome solve_qp(const Matrix& q, const Matrix& a, const std::vector<double>& b,
                             bool nonneg = true, const SolveOptions& opts = {},
                             const std::vector<double>* feasible_start = nullptr) {
  const std::size_t n = q.size();
  if (n == 0) fail(ErrorCode::InvalidInput, "empty quadratic program");
  for (const auto& row : q)
    if (row.size() != n) fail(ErrorCode::DimensionMismatch, "Q must be square");
  if (a.size() != b.size())
    fail(ErrorCode::DimensionMismatch, "constraint matrix and right-hand side disagree");
  for (const auto& row : a)
    if (row.size() != n) fail(ErrorCode::DimensionMismatch, "constraint row has wrong length");
  const std::size_t k = a.size();

  const double b_scale = std::max(1.0, norm_inf(b));

  // Unconstrained-sign case: one saddle-point solve.
  if (!nonneg) {
    Matrix kkt(n + k, std::vector<double>(n + k, 0.0));
    std::vector<double> rhs(n + k, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) kkt[i][j] = 2.0 * q[i][j];
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t j = 0; j < n; ++j) {
        kkt[n + r][j] = a[r][j];
        kkt[j][n + r] = a[r][j];
      }
      rhs[n + r] = b[r];
    }
    const auto solution = detail::solve_linear(kkt, rhs);
    if (!solution) fail(ErrorCode::Infeasible, "singular equality-constrained system");
    SolveOutcome out;
    out.point.assign(solution->begin(), solution->begin() + n);
    out.objective = quadratic_form(q, out.point);
    std::vector<double> primal = matvec(a, out.point);
    double primal_err = 0.0;
    for (std::size_t r = 0; r < k; ++r) primal_err = std::max(primal_err, std::abs(primal[r] - b[r]));
    out.kkt_residual = primal_err;
    out.converged = primal_err <= 1e-8 * b_scale;
    out.iterations = 1;
    return out;
  }

  // Feasible start: caller's hint when it checks out, else a projected-gradient
  // phase 1 on -||Ax - b||^2 followed by a least-squares snap onto Ax = b.
  std::vector<double> x;
  const auto primal_gap = [&](const std::vector<double>& p) {
    const std::vector<double> ap = matvec(a, p);
    double gap = 0.0;
    for (std::size_t r = 0; r < k; ++r) gap = std::max(gap, std::abs(ap[r] - b[r]));
    return gap;
  };
  if (feasible_start && feasible_start->size() == n) {
    std::vector<double> candidate = *feasible_start;
    for (double& v : candidate) v = std::max(0.0, v);
    if (primal_gap(candidate) <= 1e-8 * b_scale) x = std::move(candidate);
  }
  if (x.empty()) {
    const Objective phase1 = [&](const std::vector<double>& p, double& value,
                                 std::vector<double>* grad) {
      const std::vector<double> ap = matvec(a, p);
      value = 0.0;
      for (std::size_t r = 0; r < k; ++r) {
        const double g = ap[r] - b[r];
        value -= g * g;
      }
      if (grad) {
        grad->assign(n, 0.0);
        for (std::size_t r = 0; r < k; ++r) {
          const double g = ap[r] - b[r];
          for (std::size_t j = 0; j < n; ++j) (*grad)[j] -= 2.0 * g * a[r][j];
        }
      }
      return true;
    };
    SolveOptions phase1_opts;
    phase1_opts.max_iters = 20000;
    phase1_opts.grad_tol = 1e-12 * b_scale;
    SolveOutcome feas = maximize_concave(phase1, std::vector<double>(n, 0.0), 1e9, phase1_opts);
    x = std::move(feas.point);
    // Snap onto the affine set along the minimum-norm correction.
    const std::vector<std::size_t> all_cols = [n] {
      std::vector<std::size_t> c(n);
      for (std::size_t i = 0; i < n; ++i) c[i] = i;
      return c;
    }();
    const std::vector<std::size_t> rows = detail::independent_rows(a, all_cols);
    if (!rows.empty()) {
      Matrix gram(rows.size(), std::vector<double>(rows.size(), 0.0));
      std::vector<double> gap(rows.size(), 0.0);
      const std::vector<double> ax = matvec(a, x);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        gap[i] = b[rows[i]] - ax[rows[i]];
        for (std::size_t j = 0; j < rows.size(); ++j) gram[i][j] = dot(a[rows[i]], a[rows[j]]);
      }
      if (const auto lambda = detail::solve_linear(gram, gap)) {
        for (std::size_t i = 0; i < rows.size(); ++i)
          for (std::size_t j = 0; j < n; ++j) x[j] += (*lambda)[i] * a[rows[i]][j];
        for (double& v : x) v = std::max(0.0, v);
      }
    }
    if (primal_gap(x) > 1e-8 * b_scale)
      fail(ErrorCode::Infeasible, "no nonnegative point satisfies the equality constraints");
  }

  // Active-set loop. Free variables move, bound variables sit at exactly 0.
  std::vector<bool> free_var(n);
  for (std::size_t i = 0; i < n; ++i) {
    free_var[i] = x[i] > 1e-12;
    if (!free_var[i]) x[i] = 0.0;
  }

  std::vector<double> nu;                  // multipliers of the kept equality rows
  std::vector<std::size_t> nu_rows;        // which rows they belong to
  const int max_outer = 30 * static_cast<int>(n + 1);
  int iter = 0;
  bool stalled = false;
  for (; iter < max_outer; ++iter) {
    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < n; ++i)
      if (free_var[i]) free_idx.push_back(i);

    // 2Qx, needed for both the subproblem right-hand side and the duals.
    std::vector<double> qx = matvec(q, x);
    for (double& v : qx) v *= 2.0;

    std::vector<double> direction(n, 0.0);
    nu.assign(0, 0.0);
    nu_rows.clear();

    if (!free_idx.empty()) {
      nu_rows = detail::independent_rows(a, free_idx);
      const std::size_t nf = free_idx.size();
      const std::size_t kr = nu_rows.size();
      Matrix kkt(nf + kr, std::vector<double>(nf + kr, 0.0));
      std::vector<double> rhs(nf + kr, 0.0);
      for (std::size_t i = 0; i < nf; ++i) {
        for (std::size_t j = 0; j < nf; ++j) kkt[i][j] = 2.0 * q[free_idx[i]][free_idx[j]];
        rhs[i] = -qx[free_idx[i]];
      }
      for (std::size_t r = 0; r < kr; ++r)
        for (std::size_t j = 0; j < nf; ++j) {
          kkt[nf + r][j] = a[nu_rows[r]][free_idx[j]];
          kkt[j][nf + r] = a[nu_rows[r]][free_idx[j]];
        }
      auto solution = detail::solve_linear(kkt, rhs);
      if (!solution) {
        // Singular reduced system: retry with a small ridge on the Q block.
        double diag_scale = 1.0;
        for (std::size_t i = 0; i < nf; ++i)
          diag_scale = std::max(diag_scale, std::abs(kkt[i][i]));
        for (std::size_t i = 0; i < nf; ++i) kkt[i][i] += 1e-12 * diag_scale;
        solution = detail::solve_linear(kkt, rhs);
      }
      if (!solution) {
        stalled = true;
        break;
      }
      for (std::size_t i = 0; i < nf; ++i) direction[free_idx[i]] = (*solution)[i];
      nu.assign(solution->begin() + nf, solution->end());
    }

    double step_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) step_norm = std::max(step_norm, std::abs(direction[i]));
    const double x_scale = std::max(1.0, norm_inf(x));

    if (step_norm <= 1e-12 * x_scale) {
      // Stationary on the current face: inspect the bound multipliers.
      std::vector<double> rho = qx;  // 2Qx + A' nu
      for (std::size_t r = 0; r < nu.size(); ++r)
        for (std::size_t j = 0; j < n; ++j) rho[j] += nu[r] * a[nu_rows[r]][j];
      double most_negative = 0.0;
      std::size_t release = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (free_var[i]) continue;
        if (rho[i] < most_negative) {
          most_negative = rho[i];
          release = i;
        }
      }
      if (release == n || most_negative >= -1e-9) break;  // KKT point
      free_var[release] = true;
      continue;
    }

    // Ratio test against the nonnegativity bounds.
    double alpha = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!free_var[i] || direction[i] >= -1e-13) continue;
      alpha = std::min(alpha, -x[i] / direction[i]);
    }
    alpha = std::max(alpha, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!free_var[i]) continue;
      x[i] += alpha * direction[i];
      if (x[i] <= 1e-12) {
        x[i] = 0.0;
        if (alpha < 1.0) free_var[i] = false;  // blocking bound joins the active set
      }
    }
  }

  SolveOutcome out;
  out.iterations = iter;

  // Final KKT audit against the full original system.
  std::vector<double> qx = matvec(q, x);
  for (double& v : qx) v *= 2.0;
  std::vector<double> rho = qx;
  for (std::size_t r = 0; r < nu.size(); ++r)
    for (std::size_t j = 0; j < n; ++j) rho[j] += nu[r] * a[nu_rows[r]][j];
  double stationarity = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > 1e-12)
      stationarity = std::max(stationarity, std::abs(rho[i]));
    else
      stationarity = std::max(stationarity, std::max(0.0, -rho[i]));
  }
  const double primal_err = primal_gap(x);
  out.kkt_residual = std::max(stationarity, primal_err);
  out.converged = !stalled && stationarity <= opts.grad_tol && primal_err <= 1e-8 * b_scale;
  out.objective = quadratic_form(q, x);
  out.point = std::move(x);
  return out;
}

// Central-difference audit of an analytic gradient. The per-coordinate error
// is |fd - g| / max(1e-3, |g|, |fd|): relative on O(1) entries, absolute on
// near-flat ones so differencing noise does not read as failure.
inline double check_gradient(const Objective& objective, const std::vector<double>& point,
                             double h) {
  if (!(h > 0.0)) fail(ErrorCode::InvalidInput, "step size must be positive");
  double f0 = 0.0;
  std::vector<double> grad(point.size());
  if (!objective(point, f0, &grad))
    fail(ErrorCode::DomainError, "gradient check point is outside the domain");
  double worst = 0.0;
  std::vector<double> probe = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    double fp = 0.0;
    double fm = 0.0;
    probe[i] = point[i] + h;
    const bool ok_plus = objective(probe, fp, nullptr);
    probe[i] = point[i] - h;
    const bool ok_minus = objective(probe, fm, nullptr);
    probe[i] = point[i];
    if (!ok_plus || !ok_minus)
      fail(ErrorCode::DomainError, "finite-difference stencil leaves the domain");
    const double fd = (fp - fm) / (2.0 * h);
    const double err = std::abs(fd - grad[i]) / std::max({1e-3, std::abs(grad[i]), std::abs(fd)});
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace betfolio
