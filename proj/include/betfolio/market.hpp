#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "betfolio/error.hpp"
#include "betfolio/linalg.hpp"

namespace betfolio {

// Stakes below this fraction of wealth are treated as zero when an Allocation
// is constructed; it is the reporting convention for negligible bets.
inline constexpr double kNegligibleStake = 1e-4;

enum class CriterionTag { kelly, sharpe, arbitrage, dirichlet, custom };

inline const char* criterion_tag_name(CriterionTag tag) {
  switch (tag) {
    case CriterionTag::kelly: return "kelly";
    case CriterionTag::sharpe: return "sharpe";
    case CriterionTag::arbitrage: return "arbitrage";
    case CriterionTag::dirichlet: return "dirichlet";
    case CriterionTag::custom: return "custom";
  }
  return "custom";
}

// One match's betting market: decimal odds and outcome probabilities, plus the
// observed outcome once known. Odds and probabilities are fixed at quote time.
struct MatchMarket {
  std::string match_id;
  std::vector<std::string> outcome_labels;
  std::vector<double> odds;   // decimal odds, each > 1
  std::vector<double> probs;  // sums to 1 within 1e-6
  std::optional<std::size_t> realized;

  MatchMarket(std::string id, std::vector<std::string> labels, std::vector<double> odds_in,
              std::vector<double> probs_in, std::optional<std::size_t> realized_in = std::nullopt)
      : match_id(std::move(id)),
        outcome_labels(std::move(labels)),
        odds(std::move(odds_in)),
        probs(std::move(probs_in)),
        realized(realized_in) {
    const std::size_t m = odds.size();
    if (m == 0) fail(ErrorCode::InvalidInput, match_id + ": market has no outcomes");
    if (outcome_labels.size() != m || probs.size() != m)
      fail(ErrorCode::DimensionMismatch, match_id + ": labels, odds and probs must have equal length");
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (!(odds[j] > 1.0))
        fail(ErrorCode::BadOdds,
             match_id + ": decimal odds must exceed 1, got " + std::to_string(odds[j]));
      if (!(probs[j] >= 0.0 && probs[j] <= 1.0))
        fail(ErrorCode::InvalidInput, match_id + ": probability outside [0, 1]");
      total += probs[j];
    }
    if (std::abs(total - 1.0) > 1e-6)
      fail(ErrorCode::BadProbabilitySum,
           match_id + ": probabilities sum to " + std::to_string(total) + ", expected 1");
    if (realized && *realized >= m)
      fail(ErrorCode::InvalidInput, match_id + ": realized outcome index out of range");
  }

  std::size_t size() const { return odds.size(); }
};

// A round of r simultaneous matches. Stake vectors over the week are flat,
// match blocks concatenated in order, with total dimension M = sum of m_k.
struct Matchweek {
  int week_id = 0;
  std::vector<MatchMarket> matches;

  Matchweek(int id, std::vector<MatchMarket> matches_in)
      : week_id(id), matches(std::move(matches_in)) {
    if (matches.empty())
      fail(ErrorCode::InvalidInput, "matchweek " + std::to_string(week_id) + " has no matches");
  }

  std::size_t num_matches() const { return matches.size(); }

  std::size_t dimension() const {
    std::size_t total = 0;
    for (const MatchMarket& match : matches) total += match.size();
    return total;
  }

  // First flat stake index of match k.
  std::size_t offset(std::size_t k) const {
    if (k >= matches.size())
      fail(ErrorCode::InvalidInput, "match index out of range");
    std::size_t off = 0;
    for (std::size_t i = 0; i < k; ++i) off += matches[i].size();
    return off;
  }
};

struct SolverStats {
  bool converged = true;
  int iterations = 0;
  double kkt_residual = 0.0;
};

// Stake vector over the M bets of a matchweek, as fractions of current wealth.
// Construction enforces no short selling and no borrowing, and zeroes entries
// below the negligible-stake threshold.
struct Allocation {
  std::vector<double> stakes;
  CriterionTag tag = CriterionTag::custom;
  SolverStats solver{};
  // Worst-case total return over all joint outcomes, when the producer knows
  // it; a value above 1 means the book is a locked-in profit.
  std::optional<double> guaranteed_return{};

  Allocation() = default;

  Allocation(std::vector<double> raw, CriterionTag tag_in) : stakes(std::move(raw)), tag(tag_in) {
    double total = 0.0;
    for (double& stake : stakes) {
      if (stake < -1e-9)
        fail(ErrorCode::InvalidInput, "negative stake " + std::to_string(stake));
      if (stake < kNegligibleStake) stake = 0.0;
      total += stake;
    }
    if (total > 1.0 + 1e-9)
      fail(ErrorCode::InvalidInput,
           "stakes sum to " + std::to_string(total) + ", more than the whole bankroll");
  }

  double total_stake() const {
    double total = 0.0;
    for (double stake : stakes) total += stake;
    return total;
  }

  // The 1e-12 margin keeps rounding dust (e.g. symmetric odds whose inverse
  // sum is off by one ulp) from reading as a locked-in profit.
  bool is_arbitrage() const {
    return guaranteed_return.has_value() && *guaranteed_return > 1.0 + 1e-12;
  }
};

// Expected net return vector and block-diagonal covariance of the net-return
// random vector over a matchweek.
struct PortfolioMoments {
  std::vector<double> mu;
  Matrix sigma;

  std::size_t dimension() const { return mu.size(); }
};

// Net return per unit staked on each outcome of one match, outcome by outcome:
// when outcome j lands, bet j pays odds_j - 1 and every other bet loses its stake.
inline std::vector<std::pair<std::vector<double>, double>> net_return_distribution(
    const MatchMarket& market) {
  std::vector<std::pair<std::vector<double>, double>> distribution;
  distribution.reserve(market.size());
  for (std::size_t j = 0; j < market.size(); ++j) {
    std::vector<double> rho(market.size(), -1.0);
    rho[j] = market.odds[j] - 1.0;
    distribution.emplace_back(std::move(rho), market.probs[j]);
  }
  return distribution;
}

// Total return on one unit of wealth: 1 + sum_i stake_i * rho_i at the realized
// outcomes. Equivalently 1 - total staked + winnings; never negative for
// feasible stakes because losses are bounded by the amount staked.
inline double total_return(const Matchweek& week, const std::vector<double>& stakes,
                           const std::vector<std::size_t>& realized) {
  if (stakes.size() != week.dimension())
    fail(ErrorCode::DimensionMismatch, "stake vector length does not match the week's bet dimension");
  if (realized.size() != week.num_matches())
    fail(ErrorCode::DimensionMismatch, "need one realized outcome per match");
  double staked = 0.0;
  for (double stake : stakes) staked += stake;
  double value = 1.0 - staked;
  std::size_t off = 0;
  for (std::size_t k = 0; k < week.matches.size(); ++k) {
    const MatchMarket& match = week.matches[k];
    const std::size_t j = realized[k];
    if (j >= match.size())
      fail(ErrorCode::InvalidInput, match.match_id + ": realized outcome index out of range");
    value += stakes[off + j] * match.odds[j];
    off += match.size();
  }
  if (value < 0.0) {
    if (value < -1e-9)
      fail(ErrorCode::DomainError, "stakes exceed the bankroll: total return went negative");
    value = 0.0;  // rounding dust on a total loss
  }
  return value;
}

inline double total_return(const Matchweek& week, const Allocation& alloc,
                           const std::vector<std::size_t>& realized) {
  return total_return(week, alloc.stakes, realized);
}

// Worst realized total return over the joint outcome space. Matches are
// independent, so each match contributes its own worst case.
inline double worst_case_return(const Matchweek& week, const std::vector<double>& stakes) {
  if (stakes.size() != week.dimension())
    fail(ErrorCode::DimensionMismatch, "stake vector length does not match the week's bet dimension");
  double staked = 0.0;
  for (double stake : stakes) staked += stake;
  double value = 1.0 - staked;
  std::size_t off = 0;
  for (const MatchMarket& match : week.matches) {
    double worst = match.odds[0] * stakes[off];
    for (std::size_t j = 1; j < match.size(); ++j)
      worst = std::min(worst, match.odds[j] * stakes[off + j]);
    value += worst;
    off += match.size();
  }
  return value;
}

// Bookmaker margin: sum of inverse odds minus 1. Negative values mean the
// market pays out more than it takes in, i.e. an arbitrage.
inline double track_take(const std::vector<double>& odds) {
  if (odds.empty()) fail(ErrorCode::InvalidInput, "track take of an empty market");
  double inverse_sum = 0.0;
  for (double o : odds) {
    if (!(o > 1.0)) fail(ErrorCode::BadOdds, "decimal odds must exceed 1");
    inverse_sum += 1.0 / o;
  }
  return inverse_sum - 1.0;
}

// Stakes proportional to inverse odds. The return is then the same whichever
// outcome lands, 1/(1+tt), so a negative track take locks in a profit.
inline Allocation arbitrage_strategy(const std::vector<double>& odds) {
  const double tt = track_take(odds);
  const double inverse_sum = 1.0 + tt;
  std::vector<double> stakes(odds.size());
  for (std::size_t j = 0; j < odds.size(); ++j) stakes[j] = (1.0 / odds[j]) / inverse_sum;
  Allocation alloc(std::move(stakes), CriterionTag::arbitrage);
  alloc.guaranteed_return = 1.0 / inverse_sum;
  return alloc;
}

// mu[i] = o_i p_i - 1 per bet; sigma is block diagonal with per-match blocks
// D_o (diag(p) - p p') D_o. Each block is singular: the direction of inverse
// odds (the arbitrage stakes) has zero variance.
inline PortfolioMoments portfolio_moments(const Matchweek& week) {
  const std::size_t dim = week.dimension();
  PortfolioMoments moments;
  moments.mu.assign(dim, 0.0);
  moments.sigma.assign(dim, std::vector<double>(dim, 0.0));
  std::size_t off = 0;
  for (const MatchMarket& match : week.matches) {
    const std::size_t m = match.size();
    for (std::size_t i = 0; i < m; ++i) {
      moments.mu[off + i] = match.odds[i] * match.probs[i] - 1.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double cov = (i == j ? match.probs[i] : 0.0) - match.probs[i] * match.probs[j];
        moments.sigma[off + i][off + j] = match.odds[i] * match.odds[j] * cov;
      }
    }
    off += m;
  }
  return moments;
}

inline double mean_return(const PortfolioMoments& moments, const std::vector<double>& stakes) {
  return dot(moments.mu, stakes);
}

inline double return_variance(const PortfolioMoments& moments, const std::vector<double>& stakes) {
  return quadratic_form(moments.sigma, stakes);
}

}  // namespace betfolio
