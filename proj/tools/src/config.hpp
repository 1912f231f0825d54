#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qwalk/dynamics.hpp"

namespace qwalk::cli {

enum class Command { kFig1, kFig2, kFig3, kRun };

std::string_view to_string(Command command);

enum class KindSelection { kClassical, kQuantum, kBoth };

struct ExperimentConfig {
  Command command = Command::kRun;
  std::size_t n = 40;
  std::vector<double> p{0.5};
  std::vector<std::size_t> m{1};
  double gamma = 0.1;
  double t_min = 0.1;
  double t_max = 1e4;
  std::size_t points = 400;
  GridSpacing grid = GridSpacing::kLog;
  std::size_t realizations = 1;
  std::uint64_t seed = 1;
  KindSelection kinds = KindSelection::kBoth;
  double p_ref = 0.5;  // fig3 reference dilution
  std::size_t max_attempts = 1000;
  std::string out = ".";
  std::size_t workers = 1;

  std::vector<WalkKind> walk_kinds() const;
  std::vector<double> times() const;
  // Every field that can change numerical output, as "key=value" pairs.
  // Output directory and worker count are excluded.
  std::string canonical() const;
  std::uint64_t hash() const;
};

struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::string help;  // non-empty when --help was requested
};

// Precedence: flags, then the --config file, then QWALK_SEED (seed only),
// then per-command defaults. Throws ValidationError naming the offending key.
ParseResult parse_config(std::span<const std::string> args, const char* seed_env);

}  // namespace qwalk::cli
