#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "betfolio/market.hpp"
#include "betfolio/solver.hpp"

namespace betfolio {

// Diagonal ridge added to the covariance in every quadratic solve. The
// per-match covariance blocks are singular by construction (the inverse-odds
// direction has zero variance), so the unregularized problems are ill-posed
// exactly when a market admits arbitrage; the ridge keeps one well-posed code
// path and is small enough not to disturb regular solutions.
inline constexpr double kCovarianceRidge = 1e-10;

struct SharpeProblem {
  PortfolioMoments moments;
  double risk_free = 0.0;  // zero is the natural choice for bets settled in 90 minutes
  double fraction = 1.0;
  // When present, the result carries market-level context: the worst-case
  // return of the chosen stakes over this week's outcomes.
  std::optional<Matchweek> week{};
};

// (l'mu - R_f) / sqrt(l' Sigma l). A zero-variance book is degenerate: the
// ratio is infinite with the sign of the excess return (an arbitrage when
// positive), and 0 for an empty book with no excess.
inline double sharpe_ratio(const PortfolioMoments& moments, const std::vector<double>& stakes,
                           double risk_free = 0.0) {
  const double excess = dot(moments.mu, stakes) - risk_free;
  const double variance = quadratic_form(moments.sigma, stakes);
  if (variance <= 1e-12) {
    if (excess > 0.0) return std::numeric_limits<double>::infinity();
    if (excess < 0.0) return -std::numeric_limits<double>::infinity();
    return 0.0;
  }
  return excess / std::sqrt(variance);
}

inline double sharpe_ratio(const PortfolioMoments& moments, const Allocation& alloc,
                           double risk_free = 0.0) {
  return sharpe_ratio(moments, alloc.stakes, risk_free);
}

// Minimum-variance weights on the simplex at a prescribed expected return:
// min l' Sigma l subject to sum(l) = 1, mu'l = target, l >= 0.
inline Allocation min_variance_at_return(const PortfolioMoments& moments, double target) {
  const std::size_t dim = moments.dimension();
  if (dim == 0) fail(ErrorCode::InvalidInput, "no bets to allocate over");
  if (moments.sigma.size() != dim)
    fail(ErrorCode::DimensionMismatch, "moment dimensions disagree");

  std::size_t imin = 0;
  std::size_t imax = 0;
  for (std::size_t i = 1; i < dim; ++i) {
    if (moments.mu[i] < moments.mu[imin]) imin = i;
    if (moments.mu[i] > moments.mu[imax]) imax = i;
  }
  const double lo = moments.mu[imin];
  const double hi = moments.mu[imax];
  if (!(target >= lo - 1e-12 && target <= hi + 1e-12))
    fail(ErrorCode::Infeasible, "target return is outside the attainable range");

  Matrix q = moments.sigma;
  for (std::size_t i = 0; i < dim; ++i) q[i][i] += kCovarianceRidge;
  const Matrix a = {std::vector<double>(dim, 1.0), moments.mu};
  const std::vector<double> b = {1.0, target};

  // Feasible start: mix the two extreme-return corners to hit the target.
  std::vector<double> start(dim, 0.0);
  double theta = hi > lo ? (target - lo) / (hi - lo) : 1.0;
  theta = std::clamp(theta, 0.0, 1.0);
  start[imax] += theta;
  start[imin] += 1.0 - theta;

  const SolveOutcome out = solve_qp(q, a, b, /*nonneg=*/true, SolveOptions{}, &start);
  Allocation alloc(out.point, CriterionTag::sharpe);
  alloc.solver = SolverStats{out.converged, out.iterations, out.kkt_residual};
  return alloc;
}

// Maximize the Sharpe ratio over the simplex through the standard lift: with
// y = l / (l'mu - R_f), the problem becomes the convex QP
//   min y' Sigma y   s.t.  (mu - R_f 1)' y = 1,  y >= 0,
// and the stakes are y rescaled to sum to the fraction. Feasibility needs at
// least one bet with positive excess return: a simplex mixture can never beat
// the best single bet's mean.
inline Allocation max_sharpe(const SharpeProblem& problem) {
  const std::size_t dim = problem.moments.dimension();
  if (dim == 0) fail(ErrorCode::InvalidInput, "no bets to allocate over");
  if (problem.moments.sigma.size() != dim)
    fail(ErrorCode::DimensionMismatch, "moment dimensions disagree");
  if (!(problem.fraction > 0.0 && problem.fraction <= 1.0))
    fail(ErrorCode::InvalidInput, "fraction must lie in (0, 1]");
  if (problem.risk_free < 0.0)
    fail(ErrorCode::InvalidInput, "risk-free return must be nonnegative");

  std::vector<double> excess(dim);
  std::size_t best = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    excess[i] = problem.moments.mu[i] - problem.risk_free;
    if (excess[i] > excess[best]) best = i;
  }
  if (!(excess[best] > 0.0))
    fail(ErrorCode::NoPositiveExcess,
         "no bet's expected return exceeds the risk-free rate, so no mixture does either");

  Matrix q = problem.moments.sigma;
  for (std::size_t i = 0; i < dim; ++i) q[i][i] += kCovarianceRidge;
  const Matrix a = {excess};
  const std::vector<double> b = {1.0};
  std::vector<double> start(dim, 0.0);
  start[best] = 1.0 / excess[best];

  const SolveOutcome out = solve_qp(q, a, b, /*nonneg=*/true, SolveOptions{}, &start);

  double total = 0.0;
  for (double y : out.point) total += y;
  if (!(total > 0.0)) fail(ErrorCode::Internal, "lifted solve returned an empty portfolio");
  std::vector<double> stakes(dim);
  for (std::size_t i = 0; i < dim; ++i) stakes[i] = problem.fraction * out.point[i] / total;

  Allocation alloc(std::move(stakes), CriterionTag::sharpe);
  alloc.solver = SolverStats{out.converged, out.iterations, out.kkt_residual};
  if (problem.week) alloc.guaranteed_return = worst_case_return(*problem.week, alloc.stakes);
  return alloc;
}

}  // namespace betfolio
