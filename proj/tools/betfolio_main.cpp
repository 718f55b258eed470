// Command-line surface: fixture files in, machine-readable JSON out.
//
// Output conventions shared by every subcommand (see docs/formats.md):
//   - JSON objects with lexicographically sorted keys, two-space indent,
//     trailing newline; written to stdout unless an output path is given.
//   - Stakes (and stake aggregates) are rounded to 6 fractional digits.
//   - Non-finite statistics serialize as the strings "Infinity"/"-Infinity";
//     absent optionals serialize as null.
//   - Errors are a single stderr line: "error: <Code>: <message>".
//     Exit 0 = success, 2 = invalid input, 3 = no bet clears the hurdle,
//     1 = internal failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <betfolio/betfolio.hpp>

#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

using json = nlohmann::json;
using namespace betfolio;

namespace {

json finite_or_string(double value) {
  if (std::isinf(value)) return value > 0.0 ? json("Infinity") : json("-Infinity");
  if (std::isnan(value)) return json("NaN");
  return json(value);
}

json optional_stat(const std::optional<double>& value) {
  return value ? finite_or_string(*value) : json(nullptr);
}

double round_stake(double value) { return std::round(value * 1e6) / 1e6; }

void emit(const json& doc, const std::string& out_path) {
  std::string text = doc.dump(2);
  text += '\n';
  if (out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open output file: " + out_path);
  out << text;
}

struct OptimizeArgs {
  std::string fixtures;
  int matchweek = 0;
  std::string criterion;
  bool restricted = false;
  double fraction = 1.0;
  std::string out;
};

void run_optimize(const OptimizeArgs& args) {
  const FixtureSet set = parse_fixtures(args.fixtures);

  const Matchweek* original = nullptr;
  for (const Matchweek& week : set.weeks)
    if (week.week_id == args.matchweek) original = &week;
  if (!original)
    fail(ErrorCode::BadArgument,
         "matchweek " + std::to_string(args.matchweek) + " is not in the fixture file");
  std::vector<const FixtureRow*> rows;
  for (const FixtureRow& row : set.rows)
    if (row.matchweek == args.matchweek) rows.push_back(&row);

  const Matchweek week = args.restricted ? restrict_week(*original) : *original;
  Allocation alloc;
  if (args.criterion == "kelly") {
    alloc = solve_kelly(KellyProblem(week, args.fraction));
  } else {
    alloc = max_sharpe(SharpeProblem{portfolio_moments(week), 0.0, args.fraction, week});
  }

  json stakes = json::array();
  std::size_t offset = 0;
  for (std::size_t k = 0; k < week.matches.size(); ++k) {
    const MatchMarket& match = week.matches[k];
    // Restricted books expose only the picked outcome; the synthetic
    // complement leg is an internal device, not a placeable bet.
    const std::size_t shown = args.restricted ? 1 : match.size();
    for (std::size_t j = 0; j < shown; ++j) {
      stakes.push_back({{"home", rows[k]->home},
                        {"away", rows[k]->away},
                        {"outcome", match.outcome_labels[j]},
                        {"stake", round_stake(alloc.stakes[offset + j])},
                        {"odds", match.odds[j]},
                        {"prob", match.probs[j]},
                        {"edge", match.odds[j] * match.probs[j] - 1.0}});
    }
    offset += match.size();
  }

  // Arbitrage is flagged on the quoted markets, before any restriction.
  json flags = json::array();
  for (const MatchMarket& match : original->matches)
    if (track_take(match.odds) < -1e-12) flags.push_back(match.match_id);

  emit(json{{"matchweek", args.matchweek},
            {"criterion", args.criterion},
            {"restricted", args.restricted},
            {"fraction", args.fraction},
            {"stakes", stakes},
            {"total_stake", round_stake(alloc.total_stake())},
            {"solver",
             {{"converged", alloc.solver.converged},
              {"iterations", alloc.solver.iterations},
              {"kkt_residual", alloc.solver.kkt_residual}}},
            {"arbitrage_flags", flags}},
       args.out);
}

struct BacktestArgs {
  std::string fixtures;
  int from_week = INT_MIN;
  int to_week = INT_MIN;
  std::string criterion;
  bool restricted = false;
  double fraction = 1.0;
  std::string report;
  std::string csv;
};

void run_backtest_cmd(const BacktestArgs& args) {
  FixtureSet set = parse_fixtures(args.fixtures);
  if (set.weeks.empty()) fail(ErrorCode::InvalidInput, "no matchweeks to backtest");
  if (args.from_week != INT_MIN || args.to_week != INT_MIN) {
    const int lo = set.weeks.front().week_id;
    const int hi = set.weeks.back().week_id;
    const int from = args.from_week == INT_MIN ? lo : args.from_week;
    const int to = args.to_week == INT_MIN ? hi : args.to_week;
    if (from < lo || from > hi)
      fail(ErrorCode::BadArgument,
           "from-week " + std::to_string(from) + " is outside the fixture file's weeks");
    if (to < lo || to > hi)
      fail(ErrorCode::BadArgument,
           "to-week " + std::to_string(to) + " is outside the fixture file's weeks");
    set = slice_weeks(set, from, to);
  }

  StrategySpec spec;
  spec.criterion = args.criterion == "kelly" ? Criterion::kelly : Criterion::sharpe;
  spec.restricted = args.restricted;
  spec.fraction = args.fraction;
  const BacktestReport report = run_backtest(set, spec);

  json weekly = json::array();
  for (const WeekRecord& week : report.weeks)
    weekly.push_back({{"week", week.week_id},
                      {"stake_total", round_stake(week.stake_total)},
                      {"pnl", week.pnl},
                      {"wealth", week.wealth},
                      {"sharpe", finite_or_string(week.sharpe)},
                      {"log_growth", finite_or_string(week.log_growth)},
                      {"volatility", week.volatility},
                      {"solver_converged", week.solver_converged},
                      {"no_positive_excess", week.no_positive_excess}});
  json bets = json::array();
  for (const BetRecord& bet : report.bets)
    bets.push_back({{"matchweek", bet.matchweek},
                    {"match", bet.match},
                    {"outcome", bet.outcome},
                    {"stake", round_stake(bet.stake)},
                    {"odds", bet.odds},
                    {"won", bet.won}});
  const Metrics& m = report.metrics;
  json metrics = {{"final_wealth", m.final_wealth},
                  {"num_bets", m.num_bets},
                  {"avg_stake", round_stake(m.avg_stake)},
                  {"hit_rate", optional_stat(m.hit_rate)},
                  {"avg_sharpe", finite_or_string(m.avg_sharpe)},
                  {"avg_log_growth", finite_or_string(m.avg_log_growth)},
                  {"avg_volatility", m.avg_volatility},
                  {"pval_bets", optional_stat(m.pval_bets)},
                  {"pval_wealth", optional_stat(m.pval_wealth)}};

  if (!args.csv.empty()) {
    std::ofstream out(args.csv, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot open output file: " + args.csv);
    out << "week,stake_total,pnl,wealth\n";
    for (const WeekRecord& week : report.weeks)
      out << week.week_id << ',' << format_double(round_stake(week.stake_total)) << ','
          << format_double(week.pnl) << ',' << format_double(week.wealth) << '\n';
  }

  emit(json{{"criterion", args.criterion},
            {"restricted", args.restricted},
            {"fraction", args.fraction},
            {"wealth_path", report.wealth_path},
            {"weekly", weekly},
            {"bets", bets},
            {"metrics", metrics}},
       args.report);
}

void run_arb_scan(const std::string& fixtures_path, const std::string& out) {
  const FixtureSet set = parse_fixtures(fixtures_path);
  json listing = json::array();
  for (const FixtureRow& row : set.rows) {
    const std::vector<double> odds(row.odds.begin(), row.odds.end());
    const double tt = track_take(odds);
    // The margin keeps one-ulp rounding dust on fair odds out of the listing.
    if (tt >= -1e-12) continue;
    const Allocation alloc = arbitrage_strategy(odds);
    json stakes = json::array();
    for (double s : alloc.stakes) stakes.push_back(round_stake(s));
    listing.push_back({{"matchweek", row.matchweek},
                       {"home", row.home},
                       {"away", row.away},
                       {"track_take", tt},
                       {"stakes", stakes},
                       {"guaranteed_return", *alloc.guaranteed_return}});
  }
  emit(json{{"arbitrages", listing}, {"count", listing.size()}}, out);
}

struct SimulateArgs {
  std::string fixtures;
  std::size_t sims = 0;
  double fraction = 1.0;
  std::uint64_t seed = 0;
  std::string reference_report;
  unsigned workers = 1;
  std::string out;
};

double reference_wealth_from(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open reference report: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(ErrorCode::BadField, "reference report is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.contains("metrics") || !doc["metrics"].contains("final_wealth"))
    fail(ErrorCode::BadField, "reference report lacks metrics.final_wealth");
  const json& value = doc["metrics"]["final_wealth"];
  if (value.is_number()) return value.get<double>();
  if (value == "Infinity") return std::numeric_limits<double>::infinity();
  if (value == "-Infinity") return -std::numeric_limits<double>::infinity();
  fail(ErrorCode::BadField, "metrics.final_wealth is not a number");
}

void run_simulate(const SimulateArgs& args) {
  const FixtureSet set = parse_fixtures(args.fixtures);
  std::optional<double> reference;
  if (!args.reference_report.empty()) reference = reference_wealth_from(args.reference_report);

  const DirichletBaseline base =
      dirichlet_baseline(set, args.sims, args.fraction, args.seed, reference, args.workers);

  // The worker count shapes the computation, never the result, so it stays
  // out of the report: equal seeds must give byte-identical bytes.
  emit(json{{"sims", args.sims},
            {"seed", args.seed},
            {"fraction", args.fraction},
            {"final_wealth",
             {{"min", quantile(base.final_wealth, 0.0)},
              {"p25", quantile(base.final_wealth, 0.25)},
              {"median", quantile(base.final_wealth, 0.5)},
              {"p75", quantile(base.final_wealth, 0.75)},
              {"max", quantile(base.final_wealth, 1.0)}}},
            {"reference_percentile", optional_stat(base.reference_percentile)}},
       args.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Betting portfolio optimization toolkit"};
  app.require_subcommand(1);

  OptimizeArgs opt;
  CLI::App* optimize = app.add_subcommand(
      "optimize", "Compute stake allocations for one matchweek");
  optimize->add_option("--fixtures", opt.fixtures, "Fixture CSV file")->required();
  optimize->add_option("--matchweek", opt.matchweek, "Matchweek id to allocate")->required();
  optimize
      ->add_option("--criterion", opt.criterion, "Allocation criterion: kelly or sharpe")
      ->required()
      ->check(CLI::IsMember({"kelly", "sharpe"}));
  optimize->add_flag("--restricted", opt.restricted,
                     "Bet only each match's highest-edge outcome");
  optimize->add_option("--fraction", opt.fraction, "Budget fraction in (0, 1]");
  optimize->add_option("--out", opt.out, "Write the JSON report here instead of stdout");

  BacktestArgs bt;
  CLI::App* backtest = app.add_subcommand(
      "backtest", "Replay a season with weekly reinvestment");
  backtest->add_option("--fixtures", bt.fixtures, "Fixture CSV file")->required();
  backtest->add_option("--from-week", bt.from_week, "First matchweek (inclusive)");
  backtest->add_option("--to-week", bt.to_week, "Last matchweek (inclusive)");
  backtest
      ->add_option("--criterion", bt.criterion, "Allocation criterion: kelly or sharpe")
      ->required()
      ->check(CLI::IsMember({"kelly", "sharpe"}));
  backtest->add_flag("--restricted", bt.restricted,
                     "Bet only each match's highest-edge outcome");
  backtest->add_option("--fraction", bt.fraction, "Budget fraction in (0, 1]");
  backtest->add_option("--report", bt.report, "Write the JSON report here instead of stdout");
  backtest->add_option("--csv", bt.csv, "Also write a per-week CSV here");

  std::string arb_fixtures;
  std::string arb_out;
  CLI::App* arb = app.add_subcommand("arb-scan", "List matches priced below fair");
  arb->add_option("--fixtures", arb_fixtures, "Fixture CSV file")->required();
  arb->add_option("--out", arb_out, "Write the JSON listing here instead of stdout");

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Random-book baseline over a season");
  simulate->add_option("--fixtures", sim.fixtures, "Fixture CSV file")->required();
  simulate->add_option("--sims", sim.sims, "Number of simulations")->required();
  simulate->add_option("--fraction", sim.fraction, "Budget fraction in [0, 1]");
  simulate->add_option("--seed", sim.seed, "Simulation seed");
  simulate->add_option("--reference-report", sim.reference_report,
                       "Backtest JSON whose final wealth is ranked against the simulations");
  simulate->add_option("--workers", sim.workers,
                       "Worker threads (identical output for any value)");
  simulate->add_option("--out", sim.out, "Write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: BadArgument: %s\n", e.what());
    return 2;
  }

  try {
    if (optimize->parsed()) run_optimize(opt);
    if (backtest->parsed()) run_backtest_cmd(bt);
    if (arb->parsed()) run_arb_scan(arb_fixtures, arb_out);
    if (simulate->parsed()) run_simulate(sim);
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", error_code_name(e.code()), e.what());
    if (e.code() == ErrorCode::NoPositiveExcess) return 3;
    if (e.code() == ErrorCode::Internal) return 1;
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: Internal: %s\n", e.what());
    return 1;
  }
}
