// Acceptance gate for the betfolio library and CLI. Each numbered check
// prints exactly one PASS/FAIL line with its runtime; the process exits
// nonzero if any check fails. Checks 1-5 reproduce pinned reference numbers
// on the shipped fixture data; 6-10 verify the optimizers against closed
// forms, finite differences, and an independent grid-search oracle; 11-12
// are Monte Carlo growth properties of fixed-fraction staking; 13-14 cover
// backtest bookkeeping and bit-level determinism of the simulation command.

#include <betfolio/betfolio.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

using namespace betfolio;

namespace {

struct Gate {
  bool ok = true;
  std::string note;

  void require(bool condition, const std::string& message) {
    if (condition) return;
    ok = false;
    if (!note.empty()) note += "; ";
    note += message;
  }
};

std::string fmt(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

std::string data_file(const std::string& name) {
  return (std::filesystem::path(BETFOLIO_DATA_DIR) / name).string();
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

// ---------------------------------------------------------------------------
// 1. A below-fair three-way book must yield the reference take, the balanced
//    stakes, and one identical locked-in return on every outcome.
Gate check_arbitrage_reproduction() {
  Gate gate;
  const std::vector<double> odds = {2.07, 3.7, 4.2};
  const std::vector<double> probs = {0.4234, 0.3208, 0.2558};
  const Matchweek week(34, {MatchMarket("Everton vs AstonVilla", {"H", "D", "A"}, odds, probs)});

  const auto t0 = std::chrono::steady_clock::now();
  const double tt = track_take(odds);
  const Allocation alloc = arbitrage_strategy(odds);
  std::vector<double> returns;
  for (std::size_t j = 0; j < 3; ++j) returns.push_back(total_return(week, alloc.stakes, {j}));
  const double ms = elapsed_ms(t0);

  gate.require(std::abs(tt - (-0.0085)) <= 5e-4, "take " + fmt(tt) + " != -0.0085 +- 5e-4");
  const std::vector<double> ref = {0.4873, 0.2726, 0.2401};
  for (std::size_t i = 0; i < 3; ++i)
    gate.require(std::abs(alloc.stakes[i] - ref[i]) <= 1e-3,
                 "stake[" + std::to_string(i) + "] " + fmt(alloc.stakes[i]) + " != " +
                     fmt(ref[i]) + " +- 1e-3");
  for (std::size_t j = 1; j < 3; ++j)
    gate.require(std::abs(returns[j] - returns[0]) <= 1e-9,
                 "returns differ across outcomes by " + fmt(std::abs(returns[j] - returns[0])));
  gate.require(std::abs(returns[0] - 1.0086) <= 1e-3,
               "locked return " + fmt(returns[0]) + " != 1.0086 +- 1e-3");
  gate.require(ms < 1.0, "took " + fmt(ms) + " ms, budget 1 ms");
  return gate;
}

// ---------------------------------------------------------------------------
// 2. On the same book the max-Sharpe allocation must land on the arbitrage
//    direction: variance can be wiped out while the mean stays positive.
Gate check_sharpe_arbitrage_direction() {
  Gate gate;
  const std::vector<double> odds = {2.07, 3.7, 4.2};
  const std::vector<double> probs = {0.4234, 0.3208, 0.2558};
  const Matchweek week(34, {MatchMarket("Everton vs AstonVilla", {"H", "D", "A"}, odds, probs)});
  const std::vector<double> direction = arbitrage_strategy(odds).stakes;

  const auto t0 = std::chrono::steady_clock::now();
  const Allocation alloc = max_sharpe(SharpeProblem{portfolio_moments(week), 0.0, 1.0, week});
  const double ms = elapsed_ms(t0);

  for (std::size_t i = 0; i < 3; ++i)
    gate.require(std::abs(alloc.stakes[i] - direction[i]) <= 1e-2,
                 "stake[" + std::to_string(i) + "] " + fmt(alloc.stakes[i]) + " vs direction " +
                     fmt(direction[i]) + " +- 1e-2");
  gate.require(ms < 1000.0, "took " + fmt(ms) + " ms, budget 1 s");
  return gate;
}

struct EventRef {
  const char* home;
  std::size_t outcome;   // 0 = home win, 1 = draw, 2 = away win
  double edge_percent;   // reference expected return, in percent
  double kelly_stake;    // reference restricted-Kelly stake, as a fraction
};

// The ten-match reference card: each match's value event, its expected
// return, and the stake the restricted Kelly book puts on it.
const std::vector<EventRef>& reference_card() {
  static const std::vector<EventRef> card = {
      {"Arsenal", 1, 17.07, 0.0323},         {"AstonVilla", 0, 121.65, 0.1789},
      {"Fulham", 2, 41.45, 0.1277},          {"Leeds", 2, 87.95, 0.1205},
      {"Leicester", 2, 10.53, 0.0265},       {"Liverpool", 2, 86.24, 0.0393},
      {"ManCity", 0, 10.82, 0.1433},         {"SheffieldUnited", 2, 18.73, 0.0856},
      {"WestHam", 2, 26.31, 0.0447},         {"Wolves", 2, 15.17, 0.0561},
  };
  return card;
}

// ---------------------------------------------------------------------------
// 3. The shipped fixture file must reproduce every reference expected return
//    within 0.05 percentage points.
Gate check_fixture_edges() {
  Gate gate;
  const FixtureSet set = parse_fixtures(data_file("final_day_2021.csv"));
  gate.require(set.rows.size() == 10, "expected 10 rows");
  for (const EventRef& ref : reference_card()) {
    const auto row = std::find_if(set.rows.begin(), set.rows.end(),
                                  [&](const FixtureRow& r) { return r.home == ref.home; });
    if (row == set.rows.end()) {
      gate.require(false, std::string(ref.home) + " missing from fixture file");
      continue;
    }
    const double edge = 100.0 * (row->odds[ref.outcome] * row->probs[ref.outcome] - 1.0);
    gate.require(std::abs(edge - ref.edge_percent) < 0.05,
                 std::string(ref.home) + " edge " + fmt(edge) + "% != " +
                     fmt(ref.edge_percent) + "% +- 0.05pp");
  }
  return gate;
}

// ---------------------------------------------------------------------------
// 4. Restricted Kelly on the ten-match card: reference totals, per-event
//    stakes, and the same top-three positions.
Gate check_restricted_kelly_card() {
  Gate gate;
  const FixtureSet set = parse_fixtures(data_file("final_day_2021.csv"));
  const Matchweek week = restrict_week(set.weeks.at(0));

  const auto t0 = std::chrono::steady_clock::now();
  const Allocation alloc = solve_kelly(KellyProblem(week, 1.0));
  const double ms = elapsed_ms(t0);

  const double total = alloc.total_stake();
  gate.require(total >= 0.83 && total <= 0.88,
               "total stake " + fmt(total) + " outside [0.83, 0.88]");

  // Restricted bet set interleaves pick and complement; picks sit at 2k.
  std::vector<std::pair<double, std::string>> by_size;
  for (std::size_t k = 0; k < 10; ++k) {
    const double stake = alloc.stakes[2 * k];
    const EventRef& ref = reference_card()[k];
    gate.require(std::abs(stake - ref.kelly_stake) <= 0.015,
                 std::string(ref.home) + " stake " + fmt(stake) + " != " +
                     fmt(ref.kelly_stake) + " +- 0.015");
    by_size.emplace_back(-stake, ref.home);
  }
  std::sort(by_size.begin(), by_size.end());
  std::vector<std::string> top3 = {by_size[0].second, by_size[1].second, by_size[2].second};
  std::sort(top3.begin(), top3.end());
  const std::vector<std::string> expected = {"AstonVilla", "Fulham", "ManCity"};
  gate.require(top3 == expected,
               "top-3 stakes are {" + top3[0] + ", " + top3[1] + ", " + top3[2] + "}");
  gate.require(ms < 5000.0, "took " + fmt(ms) + " ms, budget 5 s");
  return gate;
}

// ---------------------------------------------------------------------------
// 5. Restricted Sharpe on the same card: fully invested, largest position on
//    the shortest-priced favorite.
Gate check_restricted_sharpe_card() {
  Gate gate;
  const FixtureSet set = parse_fixtures(data_file("final_day_2021.csv"));
  const Matchweek week = restrict_week(set.weeks.at(0));
  const Allocation alloc =
      max_sharpe(SharpeProblem{portfolio_moments(week), 0.0, 1.0, week});

  gate.require(std::abs(alloc.total_stake() - 1.0) <= 1e-4,
               "total stake " + fmt(alloc.total_stake()) + " != 1 +- 1e-4");
  std::size_t largest = 0;
  for (std::size_t k = 1; k < 10; ++k)
    if (alloc.stakes[2 * k] > alloc.stakes[2 * largest]) largest = k;
  gate.require(std::string(reference_card()[largest].home) == "ManCity",
               std::string("largest stake on ") + reference_card()[largest].home);
  gate.require(std::abs(alloc.stakes[2 * largest] - 0.2705) <= 0.02,
               "largest stake " + fmt(alloc.stakes[2 * largest]) + " != 0.2705 +- 0.02");
  return gate;
}

// ---------------------------------------------------------------------------
// 6. The closed-form single-bet stake must agree with the numeric maximizer
//    of the log-growth objective across an odds/probability grid.
Gate check_bivariate_closed_form() {
  Gate gate;
  const auto t0 = std::chrono::steady_clock::now();
  int checked = 0;
  double worst = 0.0;
  for (int a = 0; a < 20; ++a) {
    const double odds = 1.1 + (10.0 - 1.1) * a / 19.0;
    for (int b = 0; b < 20; ++b) {
      const double p = 0.05 + (0.95 - 0.05) * b / 19.0;
      if (odds * p - 1.0 <= 0.0) continue;  // only positive-edge bets stake
      const double closed = bivariate_kelly(odds, p);
      const Objective growth = [odds, p](const std::vector<double>& x, double& value,
                                         std::vector<double>* grad) {
        if (!(x[0] > -1.0 / (odds - 1.0) && x[0] < 1.0)) return false;
        value = p * std::log1p((odds - 1.0) * x[0]) + (1.0 - p) * std::log1p(-x[0]);
        if (grad)
          (*grad)[0] = p * (odds - 1.0) / (1.0 + (odds - 1.0) * x[0]) - (1.0 - p) / (1.0 - x[0]);
        return true;
      };
      SolveOptions opts;
      opts.grad_tol = 1e-10;
      const SolveOutcome out = maximize_concave(growth, {0.0}, 1.0 - 1e-9, opts);
      worst = std::max(worst, std::abs(out.point[0] - closed));
      ++checked;
    }
  }
  const double ms = elapsed_ms(t0);
  gate.require(checked >= 200, "grid produced only " + std::to_string(checked) + " cases");
  gate.require(worst <= 1e-6, "worst closed-form gap " + fmt(worst) + " > 1e-6");
  gate.require(ms < 2000.0, "took " + fmt(ms) + " ms, budget 2 s");
  gate.note = gate.note.empty()
                  ? std::to_string(checked) + " cases, worst gap " + fmt(worst)
                  : gate.note;
  return gate;
}

// ---------------------------------------------------------------------------
// 7. At the optimal stake, expected log growth equals the KL divergence
//    between the believed and the odds-implied win probability.
Gate check_kl_identity() {
  Gate gate;
  int checked = 0;
  double worst = 0.0;
  for (int a = 0; a < 50; ++a) {
    const double odds = 1.1 + (10.0 - 1.1) * a / 49.0;
    for (int b = 0; b < 50; ++b) {
      const double p = 0.05 + (0.95 - 0.05) * b / 49.0;
      const double implied = 1.0 / odds;
      if (p <= implied) continue;
      const double stake = bivariate_kelly(odds, p);
      const double gap =
          std::abs(log_growth(odds, p, stake) - kl_divergence_bernoulli(p, implied));
      worst = std::max(worst, gap);
      ++checked;
    }
  }
  gate.require(checked >= 1000, "grid produced only " + std::to_string(checked) + " cases");
  gate.require(worst <= 1e-10, "worst identity gap " + fmt(worst) + " > 1e-10");
  gate.note = std::to_string(checked) + " cases, worst gap " + fmt(worst);
  return gate;
}

// Random take-positive matchweek: probabilities off a Dirichlet draw kept
// away from the corners, odds priced below fair by a random haircut.
Matchweek random_week(SplitMix64& rng, std::size_t matches, std::size_t outcomes) {
  std::vector<MatchMarket> markets;
  for (std::size_t k = 0; k < matches; ++k) {
    std::vector<double> probs;
    for (;;) {
      probs = dirichlet_uniform(rng, outcomes);
      const double lo = *std::min_element(probs.begin(), probs.end());
      const double hi = *std::max_element(probs.begin(), probs.end());
      if (lo > 0.08 && hi < 0.7) break;
    }
    std::vector<double> odds;
    std::vector<std::string> labels;
    for (std::size_t j = 0; j < outcomes; ++j) {
      const double payout = 0.82 + 0.2 * rng.uniform01();  // expected value near fair
      odds.push_back(payout / probs[j]);
      labels.push_back("O" + std::to_string(j));
    }
    markets.emplace_back("M" + std::to_string(k) + " vs N" + std::to_string(k), labels, odds,
                         probs);
  }
  return Matchweek(1, std::move(markets));
}

// ---------------------------------------------------------------------------
// 8. The analytic gradient of the joint log-growth objective must match
//    central differences at random interior points.
Gate check_gradient_suite() {
  Gate gate;
  const auto t0 = std::chrono::steady_clock::now();
  SplitMix64 rng(20210523);
  int points = 0;
  double worst = 0.0;
  for (std::size_t matches : {1, 2, 3}) {
    for (std::size_t outcomes : {2, 3}) {
      for (int rep = 0; rep < 17; ++rep) {
        const Matchweek week = random_week(rng, matches, outcomes);
        const KellyProblem problem(week, 1.0);
        std::vector<double> point(week.dimension());
        for (double& x : point) x = 0.005 + 0.045 * rng.uniform01();
        const Objective objective = [&problem](const std::vector<double>& x, double& value,
                                               std::vector<double>* grad) {
          try {
            value = simultaneous_objective(problem, x);
            if (grad) *grad = simultaneous_gradient(problem, x);
          } catch (const Error&) {
            return false;
          }
          return true;
        };
        worst = std::max(worst, check_gradient(objective, point, 1e-5));
        ++points;
      }
    }
  }
  const double ms = elapsed_ms(t0);
  gate.require(points >= 100, "only " + std::to_string(points) + " audit points");
  gate.require(worst <= 1e-5, "worst relative error " + fmt(worst) + " > 1e-5");
  gate.require(ms < 5000.0, "took " + fmt(ms) + " ms, budget 5 s");
  if (gate.ok) gate.note = std::to_string(points) + " points, worst error " + fmt(worst);
  return gate;
}

// Independent log-growth evaluator for the grid-search oracle: enumerates the
// joint outcomes directly, sharing no code with the solver under test.
double oracle_log_growth(const Matchweek& week, const std::vector<double>& stakes) {
  double staked = 0.0;
  for (double s : stakes) staked += s;
  if (staked > 1.0 - 1e-6) return -std::numeric_limits<double>::infinity();

  const std::size_t r = week.matches.size();
  std::vector<std::size_t> digit(r, 0);
  double value = 0.0;
  for (;;) {
    double probability = 1.0;
    double payout = 0.0;
    std::size_t offset = 0;
    for (std::size_t k = 0; k < r; ++k) {
      const MatchMarket& match = week.matches[k];
      probability *= match.probs[digit[k]];
      payout += match.odds[digit[k]] * stakes[offset + digit[k]];
      offset += match.size();
    }
    const double ret = 1.0 - staked + payout;
    if (ret <= 0.0 && probability > 0.0) return -std::numeric_limits<double>::infinity();
    if (probability > 0.0) value += probability * std::log(ret);

    std::size_t k = 0;
    while (k < r && ++digit[k] == week.matches[k].size()) digit[k++] = 0;
    if (k == r) break;
  }
  return value;
}

// Coarse-to-fine lattice search: 7 points per axis, box shrunk to +-2 cells
// around the incumbent each round until the cell size reaches the tolerance.
std::vector<double> oracle_grid_search(const Matchweek& week, double cell_tol) {
  const std::size_t n = week.dimension();
  const int points = 7;
  std::vector<double> lo(n, 0.0);
  std::vector<double> hi(n, 1.0);
  std::vector<double> best(n, 0.0);
  double best_value = oracle_log_growth(week, best);

  for (;;) {
    double cell = 0.0;
    for (std::size_t i = 0; i < n; ++i) cell = std::max(cell, (hi[i] - lo[i]) / (points - 1));
    if (cell <= cell_tol) break;

    std::vector<int> digit(n, 0);
    std::vector<double> x(n, 0.0);
    for (;;) {
      for (std::size_t i = 0; i < n; ++i)
        x[i] = lo[i] + (hi[i] - lo[i]) * digit[i] / (points - 1);
      const double value = oracle_log_growth(week, x);
      if (value > best_value) {
        best_value = value;
        best = x;
      }
      std::size_t i = 0;
      while (i < n && ++digit[i] == points) digit[i++] = 0;
      if (i == n) break;
    }

    for (std::size_t i = 0; i < n; ++i) {
      const double step = (hi[i] - lo[i]) / (points - 1);
      lo[i] = std::max(0.0, best[i] - 2.0 * step);
      hi[i] = std::min(1.0, best[i] + 2.0 * step);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// 9. On twenty random small instances the solver must land where exhaustive
//    refined grid search lands.
Gate check_grid_search_equivalence() {
  Gate gate;
  const auto t0 = std::chrono::steady_clock::now();
  SplitMix64 rng(987654321);
  const std::vector<std::vector<std::size_t>> shapes = {{2}, {3}, {2, 2}, {2, 3}, {3, 3}};
  int instance = 0;
  double worst = 0.0;
  for (const std::vector<std::size_t>& shape : shapes) {
    for (int rep = 0; rep < 4; ++rep) {
      std::vector<MatchMarket> markets;
      for (std::size_t k = 0; k < shape.size(); ++k) {
        const Matchweek one = random_week(rng, 1, shape[k]);
        markets.push_back(one.matches[0]);
      }
      const Matchweek week(1, std::move(markets));
      const Allocation alloc = solve_kelly(KellyProblem(week, 1.0));
      const std::vector<double> reference = oracle_grid_search(week, 1e-4);
      for (std::size_t i = 0; i < week.dimension(); ++i) {
        const double gap = std::abs(alloc.stakes[i] - reference[i]);
        worst = std::max(worst, gap);
        gate.require(gap <= 1e-3, "instance " + std::to_string(instance) + " coord " +
                                      std::to_string(i) + " gap " + fmt(gap) + " > 1e-3");
      }
      ++instance;
    }
  }
  const double ms = elapsed_ms(t0);
  gate.require(instance == 20, "ran " + std::to_string(instance) + " instances");
  gate.require(ms < 60000.0, "took " + fmt(ms) + " ms, budget 60 s");
  if (gate.ok)
    gate.note = "20 instances, worst coordinate gap " + fmt(worst);
  return gate;
}

// ---------------------------------------------------------------------------
// 10. A full ten-match three-way card (59,049 joint outcomes) must solve to
//     first-order stationarity 1e-7 inside the time budget.
Gate check_scale() {
  Gate gate;
  const FixtureSet set = parse_fixtures(data_file("final_day_2021.csv"));
  const Matchweek& week = set.weeks.at(0);
  gate.require(week.matches.size() == 10, "expected 10 matches");

  const auto t0 = std::chrono::steady_clock::now();
  const Allocation alloc = solve_kelly(KellyProblem(week, 1.0));
  const double ms = elapsed_ms(t0);

  gate.require(alloc.solver.converged, "solver did not converge");
  gate.require(alloc.solver.kkt_residual <= 1e-7,
               "stationarity residual " + fmt(alloc.solver.kkt_residual) + " > 1e-7");
  gate.require(ms < 30000.0, "took " + fmt(ms) + " ms, budget 30 s");
  if (gate.ok)
    gate.note = fmt(ms) + " ms, residual " + fmt(alloc.solver.kkt_residual) + ", " +
                std::to_string(alloc.solver.iterations) + " iterations";
  return gate;
}

// Median over seeds of terminal log wealth after repeated fixed-fraction
// bets at decimal odds `odds` won with probability p. Seed streams depend
// only on the seed index, so different stakes see the same coin flips.
double median_terminal_log_wealth(double odds, double p, double stake, int rounds, int seeds) {
  std::vector<double> terminal(static_cast<std::size_t>(seeds));
  for (int s = 0; s < seeds; ++s) {
    SplitMix64 rng = stream_rng(0x5eedbead, static_cast<std::uint64_t>(s));
    double log_wealth = 0.0;
    for (int round = 0; round < rounds; ++round) {
      const bool won = rng.uniform01() < p;
      log_wealth += won ? std::log1p((odds - 1.0) * stake) : std::log1p(-stake);
    }
    terminal[static_cast<std::size_t>(s)] = log_wealth;
  }
  return quantile(terminal, 0.5);
}

// ---------------------------------------------------------------------------
// 11. Growth properties of fractional staking at (odds 2, p 0.6): a root of
//     the growth curve above the optimum separates growth from decay.
Gate check_growth_threshold() {
  Gate gate;
  double lo = 0.2;
  double hi = 1.0 - 1e-12;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (log_growth(2.0, 0.6, mid) > 0.0 ? lo : hi) = mid;
  }
  const double root = 0.5 * (lo + hi);
  gate.require(std::abs(log_growth(2.0, 0.6, root)) <= 1e-10,
               "growth at root " + fmt(log_growth(2.0, 0.6, root)) + " not 0 +- 1e-10");
  gate.require(root > 0.2, "root " + fmt(root) + " not above the optimal stake 0.2");

  const double grow = median_terminal_log_wealth(2.0, 0.6, 0.1, 10000, 64);
  const double decay = median_terminal_log_wealth(2.0, 0.6, 0.9, 10000, 64);
  gate.require(grow > 0.0, "median log wealth at stake 0.1 is " + fmt(grow) + ", not positive");
  gate.require(decay < 0.0, "median log wealth at stake 0.9 is " + fmt(decay) + ", not negative");
  if (gate.ok)
    gate.note = "root " + fmt(root) + ", medians " + fmt(grow) + " / " + fmt(decay);
  return gate;
}

// ---------------------------------------------------------------------------
// 12. The log-optimal stake must beat both half and double stakes on median
//     terminal log wealth (odds 2, p 0.55, optimum 0.1).
Gate check_optimal_fraction_dominance() {
  Gate gate;
  const double optimal = bivariate_kelly(2.0, 0.55);
  gate.require(std::abs(optimal - 0.1) <= 1e-12, "optimal stake " + fmt(optimal) + " != 0.1");
  const double at_optimal = median_terminal_log_wealth(2.0, 0.55, optimal, 10000, 64);
  const double at_half = median_terminal_log_wealth(2.0, 0.55, 0.5 * optimal, 10000, 64);
  const double at_double =
      median_terminal_log_wealth(2.0, 0.55, std::min(2.0 * optimal, 0.99), 10000, 64);
  gate.require(at_optimal > at_half,
               "optimal " + fmt(at_optimal) + " does not beat half " + fmt(at_half));
  gate.require(at_optimal > at_double,
               "optimal " + fmt(at_optimal) + " does not beat double " + fmt(at_double));
  if (gate.ok)
    gate.note = "medians " + fmt(at_optimal) + " > " + fmt(at_half) + ", " + fmt(at_double);
  return gate;
}

// ---------------------------------------------------------------------------
// 13. Backtest bookkeeping: hand-checkable weekly returns (1.2, 0.9, 1.1)
//     chain to 1.188, and the one-sided t test reproduces its textbook value.
Gate check_backtest_bookkeeping() {
  Gate gate;
  const std::string csv =
      std::string(kFixtureHeader) +
      "\n"
      "2029-30,1,2030-01-05,Alpha,Beta,2,1.01,2,0.6,0.005,0.395,H\n"
      "2029-30,2,2030-01-12,Beta,Alpha,2,1.01,2,0.55,0.005,0.445,A\n"
      "2029-30,3,2030-01-19,Alpha,Beta,2,1.01,2,0.55,0.005,0.445,H\n";
  const FixtureSet set = parse_fixtures_text(csv);

  // Hand-set stakes: 0.2 then 0.1 then 0.1 on the home win. The realized
  // returns are 1.2, 0.9, 1.1 by direct arithmetic.
  const std::vector<double> hand_stakes = {0.2, 0.1, 0.1};
  const std::vector<std::size_t> results = {0, 2, 0};
  const std::vector<double> expected_returns = {1.2, 0.9, 1.1};
  double wealth = 1.0;
  for (std::size_t w = 0; w < 3; ++w) {
    std::vector<double> stakes(3, 0.0);
    stakes[0] = hand_stakes[w];
    const double ret = total_return(set.weeks[w], stakes, {results[w]});
    gate.require(std::abs(ret - expected_returns[w]) <= 1e-12,
                 "week " + std::to_string(w + 1) + " return " + fmt(ret) + " != " +
                     fmt(expected_returns[w]));
    wealth *= ret;
  }
  gate.require(std::abs(wealth - 1.188) <= 1e-12,
               "chained wealth " + fmt(wealth) + " != 1.188");

  // The full backtest reaches the same terminal wealth through the solver.
  const BacktestReport report = run_backtest(set, StrategySpec{Criterion::kelly, false, 1.0, 0});
  gate.require(std::abs(report.metrics.final_wealth - 1.188) <= 1e-6,
               "backtest wealth " + fmt(report.metrics.final_wealth) + " != 1.188 +- 1e-6");

  const std::optional<double> pval = t_test_mean_positive({1.0, 1.0, 1.0, -1.0});
  gate.require(pval.has_value(), "t test returned nothing");
  if (pval)
    gate.require(std::abs(*pval - 0.196) <= 0.002,
                 "p-value " + fmt(*pval) + " != 0.196 +- 0.002");
  return gate;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// ---------------------------------------------------------------------------
// 14. The simulate command must emit byte-identical JSON across three runs
//     and across single- versus four-worker execution.
Gate check_simulation_determinism() {
  Gate gate;
  const std::string base_dir = (std::filesystem::temp_directory_path() /
                                ("betfolio_acceptance_" + std::to_string(::getpid())))
                                   .string();
  std::filesystem::create_directories(base_dir);
  const std::string base_args = std::string(BETFOLIO_CLI_PATH) + " simulate --fixtures " +
                                data_file("synthetic_season.csv") +
                                " --sims 150 --fraction 0.6 --seed 42";
  std::vector<std::string> outputs;
  const std::vector<std::string> extras = {"", "", "", " --workers 4"};
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string out_path = base_dir + "/run" + std::to_string(i) + ".json";
    const std::string command = base_args + extras[i] + " > " + out_path + " 2>/dev/null";
    const int status = std::system(command.c_str());
    gate.require(WIFEXITED(status) && WEXITSTATUS(status) == 0,
                 "run " + std::to_string(i) + " exited with status " + std::to_string(status));
    outputs.push_back(slurp(out_path));
    gate.require(!outputs.back().empty(), "run " + std::to_string(i) + " produced no output");
  }
  for (std::size_t i = 1; i < outputs.size(); ++i)
    gate.require(outputs[i] == outputs[0],
                 "run " + std::to_string(i) + " differs from run 0 byte-for-byte");
  if (gate.ok) gate.note = "3 reruns and a 4-worker run, all " +
                           std::to_string(outputs[0].size()) + " bytes identical";
  return gate;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Gate()> run;
  };
  const std::vector<Criterion> criteria = {
      {"arbitrage stakes lock in one identical return", check_arbitrage_reproduction},
      {"max-Sharpe allocation lands on the arbitrage direction", check_sharpe_arbitrage_direction},
      {"fixture edges reproduce the reference expected returns", check_fixture_edges},
      {"restricted Kelly card matches the reference stakes", check_restricted_kelly_card},
      {"restricted Sharpe card is fully invested, favorite on top", check_restricted_sharpe_card},
      {"closed-form single-bet stake agrees with the numeric solver", check_bivariate_closed_form},
      {"optimal log growth equals the Bernoulli KL divergence", check_kl_identity},
      {"analytic gradients pass the finite-difference audit", check_gradient_suite},
      {"joint allocations match refined grid search", check_grid_search_equivalence},
      {"a 59,049-outcome card solves to tight stationarity in budget", check_scale},
      {"staking below the growth root grows, beyond it decays", check_growth_threshold},
      {"the log-optimal stake beats half and double staking", check_optimal_fraction_dominance},
      {"backtest chains weekly returns and scores significance", check_backtest_bookkeeping},
      {"simulation reports are byte-identical across reruns and workers",
       check_simulation_determinism},
  };

  int passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Gate gate;
    try {
      gate = criteria[i].run();
    } catch (const std::exception& e) {
      gate.ok = false;
      gate.note = std::string("exception: ") + e.what();
    }
    const double ms = elapsed_ms(t0);
    std::printf("[%s] %2zu. %s (%.1f ms)%s%s\n", gate.ok ? "PASS" : "FAIL", i + 1,
                criteria[i].name, ms, gate.note.empty() ? "" : " - ", gate.note.c_str());
    std::fflush(stdout);
    if (gate.ok) ++passed;
  }
  std::printf("acceptance: %d/%zu criteria passed\n", passed, criteria.size());
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
