#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "betfolio/fixtures.hpp"
#include "betfolio/kelly.hpp"
#include "betfolio/market.hpp"
#include "betfolio/sharpe.hpp"
#include "betfolio/stats.hpp"

namespace betfolio {

enum class Criterion { kelly, sharpe };

inline const char* criterion_name(Criterion criterion) {
  return criterion == Criterion::kelly ? "kelly" : "sharpe";
}

struct StrategySpec {
  Criterion criterion = Criterion::kelly;
  bool restricted = false;
  double fraction = 1.0;
  std::uint64_t seed = 0;  // used by the Dirichlet baselines only
};

struct BetRecord {
  int matchweek = 0;
  std::string match;
  std::string outcome;
  double stake = 0.0;
  double odds = 0.0;
  bool won = false;
};

// Per-matchweek diagnostics. sharpe, log_growth and volatility are ex-ante
// (computed from the chosen stakes and the week's moments before results);
// pnl and wealth are ex-post.
struct WeekRecord {
  int week_id = 0;
  double stake_total = 0.0;
  double pnl = 0.0;
  double wealth = 1.0;
  double sharpe = 0.0;
  double log_growth = 0.0;
  double volatility = 0.0;
  bool solver_converged = true;
  bool no_positive_excess = false;
};

struct Metrics {
  double final_wealth = 1.0;
  std::size_t num_bets = 0;
  double avg_stake = 0.0;
  std::optional<double> hit_rate{};  // absent when no bets were placed
  double avg_sharpe = 0.0;           // ex-ante, may be infinite on arbitrage weeks
  double avg_log_growth = 0.0;       // ex-ante, -infinity when a week risks ruin
  double avg_volatility = 0.0;       // ex-ante
  std::optional<double> pval_bets{};    // absent with fewer than 2 bets
  std::optional<double> pval_wealth{};  // absent with fewer than 2 weeks
};

struct BacktestReport {
  std::vector<double> wealth_path;  // starts at 1.0, then one entry per matchweek
  std::vector<double> weekly_pnl;
  std::vector<BetRecord> bets;
  std::vector<WeekRecord> weeks;
  Metrics metrics;
};

// Collapse each match to its highest-edge outcome plus a complement
// pseudo-outcome covering everything else. The complement's odds sit just
// above 1, so a stake on it always loses (to within 1e-9): it exists to keep
// the market a valid probability space, and neither criterion funds it. Ties
// on the edge pick the lowest outcome index.
inline Matchweek restrict_week(const Matchweek& week) {
  std::vector<MatchMarket> restricted;
  restricted.reserve(week.matches.size());
  for (const MatchMarket& match : week.matches) {
    std::size_t pick = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < match.size(); ++j) {
      const double edge = match.odds[j] * match.probs[j] - 1.0;
      if (edge > best) {
        best = edge;
        pick = j;
      }
    }
    std::string complement_label;
    for (std::size_t j = 0; j < match.size(); ++j)
      if (j != pick) complement_label += match.outcome_labels[j];
    if (complement_label.empty()) complement_label = "none";
    std::optional<std::size_t> realized;
    if (match.realized) realized = (*match.realized == pick) ? 0 : 1;
    restricted.emplace_back(
        match.match_id,
        std::vector<std::string>{match.outcome_labels[pick], std::move(complement_label)},
        std::vector<double>{match.odds[pick], 1.0 + 1e-9},
        std::vector<double>{match.probs[pick], 1.0 - match.probs[pick]}, realized);
  }
  return Matchweek(week.week_id, std::move(restricted));
}

// Expected log total return of the stakes over the week's joint outcomes.
// Returns -infinity when a positive-probability outcome leaves (numerically)
// nothing, which is how a full-budget book under a losing outcome shows up.
inline double log_growth_of(const Matchweek& week, const std::vector<double>& stakes) {
  const JointOutcomeModel model(week);
  double value = 0.0;
  if (!detail::eval_simultaneous(model, stakes, 1e-12, value, nullptr))
    return -std::numeric_limits<double>::infinity();
  return value;
}

// Table metrics from a finished report. All rows are derived from the
// report's own records so the function is a pure summary.
inline Metrics compute_metrics(const BacktestReport& report) {
  if (report.weeks.empty())
    fail(ErrorCode::InvalidInput, "metrics need at least one completed matchweek");
  Metrics metrics;
  metrics.final_wealth = report.wealth_path.back();
  metrics.num_bets = report.bets.size();

  double stake_sum = 0.0;
  double sharpe_sum = 0.0;
  double growth_sum = 0.0;
  double vol_sum = 0.0;
  for (const WeekRecord& week : report.weeks) {
    stake_sum += week.stake_total;
    sharpe_sum += week.sharpe;
    growth_sum += week.log_growth;
    vol_sum += week.volatility;
  }
  const double n_weeks = static_cast<double>(report.weeks.size());
  metrics.avg_stake = stake_sum / n_weeks;
  metrics.avg_sharpe = sharpe_sum / n_weeks;
  metrics.avg_log_growth = growth_sum / n_weeks;
  metrics.avg_volatility = vol_sum / n_weeks;

  if (!report.bets.empty()) {
    std::size_t wins = 0;
    std::vector<double> bet_outcomes;
    bet_outcomes.reserve(report.bets.size());
    for (const BetRecord& bet : report.bets) {
      wins += bet.won ? 1 : 0;
      // Net outcome per bet in weekly-wealth units: the stake times the
      // realized net return per unit staked.
      bet_outcomes.push_back(bet.stake * (bet.won ? bet.odds - 1.0 : -1.0));
    }
    metrics.hit_rate = static_cast<double>(wins) / static_cast<double>(report.bets.size());
    metrics.pval_bets = t_test_mean_positive(bet_outcomes);
  }
  metrics.pval_wealth = t_test_mean_positive(report.weekly_pnl);
  return metrics;
}

// Run one strategy over a season, reinvesting gains every matchweek:
// W_n = W_{n-1} * R_n. Wealth hitting zero is absorbing. A Sharpe week with
// no positive-excess bet sits out (zero stakes) rather than aborting the
// season; solver non-convergence is recorded per week, never thrown.
inline BacktestReport run_backtest(const FixtureSet& fixtures, const StrategySpec& spec) {
  if (!(spec.fraction > 0.0 && spec.fraction <= 1.0))
    fail(ErrorCode::InvalidInput, "fraction must lie in (0, 1]");
  if (fixtures.weeks.empty()) fail(ErrorCode::InvalidInput, "no matchweeks to backtest");
  for (const Matchweek& week : fixtures.weeks)
    for (const MatchMarket& match : week.matches)
      if (!match.realized)
        fail(ErrorCode::MissingResult, match.match_id + " (matchweek " +
                                           std::to_string(week.week_id) +
                                           "): backtest needs realized results");

  BacktestReport report;
  report.wealth_path.push_back(1.0);
  double wealth = 1.0;

  for (const Matchweek& base_week : fixtures.weeks) {
    WeekRecord record;
    record.week_id = base_week.week_id;

    if (wealth <= 0.0) {
      record.wealth = 0.0;
      report.wealth_path.push_back(0.0);
      report.weekly_pnl.push_back(0.0);
      report.weeks.push_back(record);
      continue;
    }

    const Matchweek week = spec.restricted ? restrict_week(base_week) : base_week;
    const PortfolioMoments moments = portfolio_moments(week);

    Allocation alloc;
    if (spec.criterion == Criterion::kelly) {
      alloc = solve_kelly(KellyProblem(week, spec.fraction));
    } else {
      try {
        alloc = max_sharpe(SharpeProblem{moments, 0.0, spec.fraction, week});
      } catch (const Error& err) {
        if (err.code() != ErrorCode::NoPositiveExcess) throw;
        alloc = Allocation(std::vector<double>(week.dimension(), 0.0), CriterionTag::sharpe);
        record.no_positive_excess = true;
      }
    }
    record.solver_converged = alloc.solver.converged;

    std::vector<std::size_t> realized;
    realized.reserve(week.matches.size());
    for (const MatchMarket& match : week.matches) realized.push_back(*match.realized);

    double ret = total_return(week, alloc, realized);
    if (ret < 1e-12) ret = 0.0;  // ruin is absorbing

    const double new_wealth = wealth * ret;
    record.stake_total = alloc.total_stake();
    record.pnl = new_wealth - wealth;
    record.wealth = new_wealth;
    record.sharpe = sharpe_ratio(moments, alloc.stakes, 0.0);
    record.log_growth = log_growth_of(week, alloc.stakes);
    record.volatility = std::sqrt(std::max(0.0, return_variance(moments, alloc.stakes)));

    std::size_t off = 0;
    for (const MatchMarket& match : week.matches) {
      for (std::size_t j = 0; j < match.size(); ++j) {
        const double stake = alloc.stakes[off + j];
        if (stake >= kNegligibleStake) {
          const bool won = (*match.realized == j);
          report.bets.push_back(
              {week.week_id, match.match_id, match.outcome_labels[j], stake, match.odds[j], won});
        }
      }
      off += match.size();
    }

    wealth = new_wealth;
    report.wealth_path.push_back(wealth);
    report.weekly_pnl.push_back(record.pnl);
    report.weeks.push_back(record);
  }

  report.metrics = compute_metrics(report);
  return report;
}

struct DirichletBaseline {
  std::vector<double> final_wealth;            // one entry per simulation, in index order
  std::optional<double> reference_percentile;  // % of simulations strictly below the reference
};

namespace detail {

inline double simulate_dirichlet_path(const FixtureSet& fixtures, double fraction,
                                      SplitMix64& rng) {
  double wealth = 1.0;
  for (const Matchweek& week : fixtures.weeks) {
    // Draw before the ruin check so every simulation consumes the same
    // stream positions regardless of where it ruins.
    std::vector<double> stakes = dirichlet_uniform(rng, week.dimension());
    if (wealth <= 0.0) continue;
    for (double& s : stakes) s *= fraction;
    std::vector<std::size_t> realized;
    realized.reserve(week.matches.size());
    for (const MatchMarket& match : week.matches) realized.push_back(*match.realized);
    double ret = total_return(week, stakes, realized);
    if (ret < 1e-12) ret = 0.0;
    wealth *= ret;
  }
  return wealth;
}

}  // namespace detail

// Random-strategy baseline: per matchweek, stake a uniform point of the
// simplex over the complete bet set, scaled so the total stake is exactly the
// fraction. Simulation s draws from its own stream derived from (seed, s), so
// results are identical whatever the worker count, and byte-identical across
// reruns with the same seed.
inline DirichletBaseline dirichlet_baseline(const FixtureSet& fixtures, std::size_t n_sims,
                                            double fraction, std::uint64_t seed,
                                            std::optional<double> reference = std::nullopt,
                                            unsigned workers = 1) {
  if (n_sims < 1) fail(ErrorCode::InvalidInput, "need at least one simulation");
  if (!(fraction >= 0.0 && fraction <= 1.0))
    fail(ErrorCode::InvalidInput, "fraction must lie in [0, 1]");
  if (fixtures.weeks.empty()) fail(ErrorCode::InvalidInput, "no matchweeks to simulate");
  for (const Matchweek& week : fixtures.weeks)
    for (const MatchMarket& match : week.matches)
      if (!match.realized)
        fail(ErrorCode::MissingResult, match.match_id + " (matchweek " +
                                           std::to_string(week.week_id) +
                                           "): simulation needs realized results");

  DirichletBaseline out;
  out.final_wealth.assign(n_sims, 0.0);
  const auto run_strided = [&](std::size_t first, std::size_t stride) {
    for (std::size_t s = first; s < n_sims; s += stride) {
      SplitMix64 rng = stream_rng(seed, s);
      out.final_wealth[s] = detail::simulate_dirichlet_path(fixtures, fraction, rng);
    }
  };
  if (workers <= 1) {
    run_strided(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_strided, w, workers);
    for (std::thread& th : pool) th.join();
  }

  if (reference) {
    std::size_t below = 0;
    for (double w : out.final_wealth)
      if (w < *reference) ++below;
    out.reference_percentile = 100.0 * static_cast<double>(below) / static_cast<double>(n_sims);
  }
  return out;
}

struct SweepRow {
  double fraction = 0.0;
  double median_final_wealth = 0.0;
};

struct FractionSweep {
  std::vector<SweepRow> rows;
  double best_fraction = 0.0;  // argmax of median final wealth over the grid
};

// Median final wealth across a grid of fractions. With n_sims > 0 each grid
// point runs a Dirichlet baseline; with n_sims == 0 it runs the deterministic
// criterion backtest instead (its single final wealth is its own median).
inline FractionSweep fraction_sweep(const FixtureSet& fixtures, const StrategySpec& spec,
                                    const std::vector<double>& grid, std::size_t n_sims = 0) {
  if (grid.empty()) fail(ErrorCode::InvalidInput, "fraction grid is empty");
  FractionSweep sweep;
  double best = -std::numeric_limits<double>::infinity();
  for (double f : grid) {
    double median = 0.0;
    if (n_sims > 0) {
      const DirichletBaseline base = dirichlet_baseline(fixtures, n_sims, f, spec.seed);
      median = quantile(base.final_wealth, 0.5);
    } else {
      StrategySpec row_spec = spec;
      row_spec.fraction = f;
      median = run_backtest(fixtures, row_spec).metrics.final_wealth;
    }
    sweep.rows.push_back({f, median});
    if (median > best) {
      best = median;
      sweep.best_fraction = f;
    }
  }
  return sweep;
}

}  // namespace betfolio
