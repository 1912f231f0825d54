#include "config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "qwalk/error.hpp"

namespace qwalk::cli {
namespace {

struct CommandDefaults {
  std::size_t n;
  std::vector<double> p;
  std::vector<std::size_t> m;
  std::size_t realizations;
};

CommandDefaults defaults_for(Command command) {
  switch (command) {
    case Command::kFig1:
      return {40, {0.11, 0.5, 0.95}, {1}, 1};
    case Command::kFig2:
      return {40, {0.11, 0.5, 0.95}, {4, 16}, 1000};
    case Command::kFig3:
      return {400, {0.05, 0.1, 0.25, 0.5, 0.75, 0.95}, {1}, 1000};
    case Command::kRun:
      break;
  }
  return {40, {0.5}, {1}, 1};
}

std::uint64_t parse_seed(const char* text) {
  const std::string_view s(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ValidationError(fmt::format("QWALK_SEED: '{}' is not an unsigned integer", s));
  }
  return value;
}

void validate(const ExperimentConfig& c) {
  if (c.n < 2) throw ValidationError(fmt::format("n: need at least 2 nodes, got {}", c.n));
  if (c.p.empty()) throw ValidationError("p: empty list");
  for (double p : c.p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(fmt::format("p: {} outside [0, 1]", p));
  }
  if (!(c.p_ref >= 0.0 && c.p_ref <= 1.0)) {
    throw ValidationError(fmt::format("p_ref: {} outside [0, 1]", c.p_ref));
  }
  if (c.m.empty()) throw ValidationError("m: empty list");
  for (std::size_t m : c.m) {
    if (m >= c.n) {
      throw TooManyTraps(fmt::format("m: {} traps leave no free node on n={} nodes", m, c.n));
    }
  }
  if (!(c.gamma >= 0.0) || !std::isfinite(c.gamma)) {
    throw ValidationError(fmt::format("gamma: must be finite and >= 0, got {}", c.gamma));
  }
  if (!(c.t_min >= 0.0) || !(c.t_max > c.t_min)) {
    throw ValidationError(fmt::format("t_min/t_max: need 0 <= t_min < t_max, got [{}, {}]",
                                      c.t_min, c.t_max));
  }
  if (c.grid == GridSpacing::kLog && !(c.t_min > 0.0)) {
    throw ValidationError("t_min: log grid needs t_min > 0");
  }
  if (c.points < 2) throw ValidationError("points: need at least 2");
  if (c.realizations == 0) throw ValidationError("realizations: need at least 1");
  if (c.max_attempts == 0) throw ValidationError("max_attempts: need at least 1");
  if (c.workers == 0) throw ValidationError("workers: need at least 1");

  std::error_code ec;
  std::filesystem::create_directories(c.out, ec);
  const auto probe = std::filesystem::path(c.out) / ".qwalk-write-probe";
  {
    std::ofstream f(probe);
    if (ec || !f) throw ValidationError(fmt::format("out: directory '{}' is not writable", c.out));
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::kFig1:
      return "fig1";
    case Command::kFig2:
      return "fig2";
    case Command::kFig3:
      return "fig3";
    case Command::kRun:
      break;
  }
  return "run";
}

std::vector<WalkKind> ExperimentConfig::walk_kinds() const {
  switch (kinds) {
    case KindSelection::kClassical:
      return {WalkKind::kClassical};
    case KindSelection::kQuantum:
      return {WalkKind::kQuantum};
    case KindSelection::kBoth:
      break;
  }
  return {WalkKind::kClassical, WalkKind::kQuantum};
}

std::vector<double> ExperimentConfig::times() const {
  return make_time_grid(t_min, t_max, points, grid);
}

std::string ExperimentConfig::canonical() const {
  constexpr std::string_view kinds_names[] = {"classical", "quantum", "both"};
  return fmt::format(
      "command={} n={} p={} m={} gamma={} t_min={} t_max={} points={} grid={} realizations={} "
      "seed={} kinds={} p_ref={} max_attempts={}",
      to_string(command), n, fmt::join(p, ","), fmt::join(m, ","), gamma, t_min, t_max, points,
      grid == GridSpacing::kLog ? "log" : "linear", realizations, seed,
      kinds_names[static_cast<int>(kinds)], p_ref, max_attempts);
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ParseResult parse_config(std::span<const std::string> args, const char* seed_env) {
  ExperimentConfig c;
  std::string grid = "log";
  std::string kinds = "both";

  CLI::App app{"Trapping of continuous-time quantum and classical walks on random graphs",
               "qwalk-trap"};
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "Flat key=value file; keys are the long flag names");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.add_option("--n", c.n, "Number of nodes [fig1/fig2: 40, fig3: 400, run: 40]");
  app.add_option("--p", c.p, "Edge probability, comma-separated list for a sweep")
      ->delimiter(',');
  app.add_option("--m", c.m, "Trap count, comma-separated list [fig2: 4,16, others: 1]")
      ->delimiter(',');
  app.add_option("--gamma", c.gamma, "Capture strength")->capture_default_str();
  app.add_option("--t-min,--t_min", c.t_min, "First time point")->capture_default_str();
  app.add_option("--t-max,--t_max", c.t_max, "Last time point")->capture_default_str();
  app.add_option("--points", c.points, "Number of time points")->capture_default_str();
  app.add_option("--grid", grid, "Time grid spacing")
      ->check(CLI::IsMember({"log", "linear"}))
      ->capture_default_str();
  app.add_option("--realizations,-R", c.realizations,
                 "Ensemble size [fig2/fig3: 1000, others: 1]");
  app.add_option("--seed", c.seed, "Base seed [QWALK_SEED, else 1]");
  app.add_option("--kinds", kinds, "Walks to simulate")
      ->check(CLI::IsMember({"classical", "quantum", "both"}))
      ->capture_default_str();
  app.add_option("--p-ref,--p_ref", c.p_ref, "Reference dilution for fig3 ratios")
      ->capture_default_str();
  app.add_option("--max-attempts,--max_attempts", c.max_attempts,
                 "Connectivity resampling budget per graph")
      ->capture_default_str();
  app.add_option("--out", c.out, "Output directory")->capture_default_str();
  app.add_option("--workers", c.workers, "Worker threads [hardware concurrency]");

  app.add_subcommand("fig1", "Single-realization survival curves, reference line and fits")
      ->fallthrough();
  app.add_subcommand("fig2", "Ensemble-mean survival curves for several trap counts")
      ->fallthrough();
  app.add_subcommand("fig3", "Ensemble ratios against the reference dilution")->fallthrough();
  app.add_subcommand("run", "Generic sweep over p, m and walk kind")->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    return {std::nullopt, app.help()};
  } catch (const CLI::CallForAllHelp&) {
    return {std::nullopt, app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw ValidationError(e.what());
  }

  const std::string name = app.get_subcommands().front()->get_name();
  c.command = name == "fig1"   ? Command::kFig1
              : name == "fig2" ? Command::kFig2
              : name == "fig3" ? Command::kFig3
                               : Command::kRun;
  const auto defaults = defaults_for(c.command);
  if (app.count("--n") == 0) c.n = defaults.n;
  if (app.count("--p") == 0) c.p = defaults.p;
  if (app.count("--m") == 0) c.m = defaults.m;
  if (app.count("--realizations") == 0) c.realizations = defaults.realizations;
  if (app.count("--seed") == 0) c.seed = seed_env != nullptr ? parse_seed(seed_env) : 1;
  if (app.count("--workers") == 0) {
    c.workers = std::max(1U, std::thread::hardware_concurrency());
  }
  c.grid = grid == "log" ? GridSpacing::kLog : GridSpacing::kLinear;
  c.kinds = kinds == "classical" ? KindSelection::kClassical
            : kinds == "quantum" ? KindSelection::kQuantum
                                 : KindSelection::kBoth;
  validate(c);
  return {c, {}};
}

}  // namespace qwalk::cli
