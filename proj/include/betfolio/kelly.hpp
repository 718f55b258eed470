#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "betfolio/market.hpp"
#include "betfolio/solver.hpp"

namespace betfolio {

// Joint outcome space of a matchweek under independence across matches.
// Outcomes are indexed in mixed-radix little-endian order: the first match's
// outcome varies fastest. The consequence matrix W is never materialized;
// column i has exactly one nonzero per match, the winning bet's odds.
struct JointOutcomeModel {
  Matchweek week;
  std::vector<std::size_t> radices;
  std::vector<std::size_t> offsets;
  std::size_t joint_count = 1;

  explicit JointOutcomeModel(const Matchweek& week_in) : week(week_in) {
    radices.reserve(week.matches.size());
    offsets.reserve(week.matches.size());
    std::size_t off = 0;
    for (const MatchMarket& match : week.matches) {
      radices.push_back(match.size());
      offsets.push_back(off);
      off += match.size();
      if (joint_count > ((std::size_t{1} << 62) / match.size()))
        fail(ErrorCode::InvalidInput, "joint outcome space is too large to enumerate");
      joint_count *= match.size();
    }
  }

  std::size_t dimension() const { return offsets.back() + radices.back(); }

  std::vector<std::size_t> outcome_tuple(std::size_t flat) const {
    if (flat >= joint_count) fail(ErrorCode::InvalidInput, "joint outcome index out of range");
    std::vector<std::size_t> tuple(radices.size());
    for (std::size_t k = 0; k < radices.size(); ++k) {
      tuple[k] = flat % radices[k];
      flat /= radices[k];
    }
    return tuple;
  }

  std::size_t flat_index(const std::vector<std::size_t>& tuple) const {
    if (tuple.size() != radices.size())
      fail(ErrorCode::DimensionMismatch, "outcome tuple has wrong length");
    std::size_t flat = 0;
    for (std::size_t k = radices.size(); k-- > 0;) {
      if (tuple[k] >= radices[k]) fail(ErrorCode::InvalidInput, "outcome index out of range");
      flat = flat * radices[k] + tuple[k];
    }
    return flat;
  }

  // Product of per-match probabilities of the digits of `flat`.
  double joint_probability(std::size_t flat) const {
    if (flat >= joint_count) fail(ErrorCode::InvalidInput, "joint outcome index out of range");
    double p = 1.0;
    for (std::size_t k = 0; k < radices.size(); ++k) {
      p *= week.matches[k].probs[flat % radices[k]];
      flat /= radices[k];
    }
    return p;
  }
};

struct KellyProblem {
  JointOutcomeModel model;
  double fraction = 1.0;
  // Strictly below 1 so the log objective stays finite on the feasible set;
  // the optimum always has total stake below 1 anyway.
  double stake_cap = 1.0 - 1e-6;

  explicit KellyProblem(const Matchweek& week, double fraction_in = 1.0,
                        double stake_cap_in = 1.0 - 1e-6)
      : model(week), fraction(fraction_in), stake_cap(stake_cap_in) {
    if (!(fraction > 0.0 && fraction <= 1.0))
      fail(ErrorCode::InvalidInput, "fraction must lie in (0, 1]");
    if (!(stake_cap > 0.0 && stake_cap < 1.0))
      fail(ErrorCode::InvalidInput, "stake cap must lie in (0, 1)");
  }
};

// Optimal fixed fraction for a single two-outcome bet: the edge over the net
// odds, clipped at zero because short positions are not allowed.
inline double bivariate_kelly(double odds, double p) {
  if (!(odds > 1.0)) fail(ErrorCode::BadOdds, "decimal odds must exceed 1");
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidInput, "probability outside [0, 1]");
  const double edge = odds * p - 1.0;
  return edge <= 0.0 ? 0.0 : edge / (odds - 1.0);
}

// Expected log growth of wealth from staking `stake` on a two-outcome bet.
inline double log_growth(double odds, double p, double stake) {
  if (!(odds > 1.0)) fail(ErrorCode::BadOdds, "decimal odds must exceed 1");
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidInput, "probability outside [0, 1]");
  if (!(stake >= 0.0 && stake < 1.0))
    fail(ErrorCode::DomainError, "stake must lie in [0, 1): log growth diverges at a full stake");
  return p * std::log1p((odds - 1.0) * stake) + (1.0 - p) * std::log1p(-stake);
}

inline double kl_divergence_bernoulli(double p, double q) {
  if (!(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0))
    fail(ErrorCode::DomainError, "Bernoulli KL divergence needs probabilities strictly inside (0, 1)");
  return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
}

namespace detail {

// One sweep over the joint outcome space, accumulating the expected
// log-return and optionally its gradient. Returns false when some
// positive-probability outcome has total return at or below `domain_floor`
// (a near-ruin allocation). Zero-probability outcomes contribute nothing and
// are exempt from the domain check.
//
// The sweep walks a mixed-radix odometer, patching the winning-payout sum and
// the probability suffix products only for the digits that changed, so the
// cost is O(N) rather than O(N r) for the bookkeeping plus O(N r) for the
// gradient scatter.
//
// The three quantities that accumulate across every joint outcome (the
// running payout sum, the value, and the gradient's flat term) live in
// extended precision: over ~6e4 outcomes, double-precision drift in them
// reaches ~1e-12, which is larger than the objective improvements the line
// search must resolve near a tight optimum.
inline bool eval_simultaneous(const JointOutcomeModel& model, const std::vector<double>& stakes,
                              double domain_floor, double& value, std::vector<double>* grad) {
  const std::size_t r = model.radices.size();
  double staked = 0.0;
  for (double s : stakes) staked += s;
  const double base = 1.0 - staked;

  std::vector<std::size_t> digit(r, 0);
  std::vector<double> pick(r);        // odds * stake of each match's current digit
  std::vector<double> suffix(r + 1);  // suffix[k] = prod_{t >= k} p_t[digit_t]
  long double pick_sum = 0.0L;
  suffix[r] = 1.0;
  for (std::size_t k = r; k-- > 0;) {
    const MatchMarket& match = model.week.matches[k];
    pick[k] = match.odds[0] * stakes[model.offsets[k]];
    pick_sum += pick[k];
    suffix[k] = suffix[k + 1] * match.probs[0];
  }

  long double value_acc = 0.0L;
  long double weight_total = 0.0L;  // sum of P_i / r_i, the flat part of the gradient
  if (grad) grad->assign(stakes.size(), 0.0);

  for (std::size_t flat = 0;;) {
    const double prob = suffix[0];
    if (prob > 0.0) {
      const double total = static_cast<double>(base + pick_sum);
      if (total <= domain_floor) return false;
      value_acc += static_cast<long double>(prob) * std::log(total);
      if (grad) {
        const double w = prob / total;
        weight_total += w;
        for (std::size_t k = 0; k < r; ++k)
          (*grad)[model.offsets[k] + digit[k]] += w * model.week.matches[k].odds[digit[k]];
      }
    }

    if (++flat >= model.joint_count) break;

    // Odometer increment; digits below the carry position reset to 0.
    std::size_t k = 0;
    while (true) {
      const MatchMarket& match = model.week.matches[k];
      pick_sum -= pick[k];
      if (++digit[k] < model.radices[k]) {
        pick[k] = match.odds[digit[k]] * stakes[model.offsets[k] + digit[k]];
        pick_sum += pick[k];
        break;
      }
      digit[k] = 0;
      pick[k] = match.odds[0] * stakes[model.offsets[k]];
      pick_sum += pick[k];
      ++k;
    }
    for (std::size_t t = k + 1; t-- > 0;)
      suffix[t] = suffix[t + 1] * model.week.matches[t].probs[digit[t]];
  }

  value = static_cast<double>(value_acc);
  if (grad) {
    const double flat_term = static_cast<double>(weight_total);
    for (double& g : *grad) g -= flat_term;
  }
  return true;
}

inline void validate_stakes(const KellyProblem& problem, const std::vector<double>& stakes) {
  if (stakes.size() != problem.model.dimension())
    fail(ErrorCode::DimensionMismatch, "stake vector length does not match the bet dimension");
  double total = 0.0;
  for (double s : stakes) {
    if (s < 0.0) fail(ErrorCode::InvalidInput, "stakes must be nonnegative");
    total += s;
  }
  if (total > problem.stake_cap + 1e-12)
    fail(ErrorCode::InvalidInput, "total stake exceeds the cap");
}

}  // namespace detail

// Expected log total return E[ln(1 + (W'l)_i - sum l)] over the joint
// outcome distribution.
inline double simultaneous_objective(const KellyProblem& problem,
                                     const std::vector<double>& stakes) {
  detail::validate_stakes(problem, stakes);
  double value = 0.0;
  if (!detail::eval_simultaneous(problem.model, stakes, 1e-12, value, nullptr))
    fail(ErrorCode::DomainError,
         "near-ruin allocation: a possible outcome leaves no wealth to reinvest");
  return value;
}

// Analytic gradient of the simultaneous objective: entry j is
// sum_i P_i (W_ji - 1) / r_i. At zero stakes this reduces to the edge vector.
inline std::vector<double> simultaneous_gradient(const KellyProblem& problem,
                                                 const std::vector<double>& stakes) {
  detail::validate_stakes(problem, stakes);
  double value = 0.0;
  std::vector<double> grad;
  if (!detail::eval_simultaneous(problem.model, stakes, 1e-12, value, &grad))
    fail(ErrorCode::DomainError,
         "near-ruin allocation: a possible outcome leaves no wealth to reinvest");
  return grad;
}

// Maximize the expected log growth over {l >= 0, sum l <= stake_cap}, then
// scale by the problem's fraction. Starts from zero stakes (always inside the
// domain). Non-convergence is reported through the solver stats on the
// result, never thrown: the last iterate is still the best found.
inline Allocation solve_kelly(const KellyProblem& problem) {
  const std::size_t dim = problem.model.dimension();
  const SolveOptions opts;
  const Objective objective = [&problem, &opts](const std::vector<double>& x, double& value,
                                                std::vector<double>* grad) {
    return detail::eval_simultaneous(problem.model, x, opts.domain_floor, value, grad);
  };
  SolveOutcome out =
      maximize_concave(objective, std::vector<double>(dim, 0.0), problem.stake_cap, opts);
  std::vector<double> scaled = out.point;
  for (double& s : scaled) s *= problem.fraction;
  Allocation alloc(std::move(scaled), CriterionTag::kelly);
  alloc.solver = SolverStats{out.converged, out.iterations, out.kkt_residual};
  alloc.guaranteed_return = worst_case_return(problem.model.week, alloc.stakes);
  return alloc;
}

// Scale every stake by f. Applied after optimization; scaling the optimizer's
// output is not the same strategy as optimizing with a tighter cap.
inline Allocation fractionalize(const Allocation& alloc, double f) {
  if (!(f > 0.0 && f <= 1.0)) fail(ErrorCode::InvalidInput, "fraction must lie in (0, 1]");
  std::vector<double> scaled = alloc.stakes;
  for (double& s : scaled) s *= f;
  Allocation out(std::move(scaled), alloc.tag);
  out.solver = alloc.solver;
  return out;
}

}  // namespace betfolio
