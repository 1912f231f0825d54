#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <thread>

#include <fmt/format.h>

#include "qwalk/analysis.hpp"
#include "qwalk/error.hpp"
#include "qwalk/rng.hpp"

namespace qwalk {
namespace {

void validate(const EnsembleSpec& spec) {
  if (spec.n < 2) throw ValidationError("ensemble: n must be >= 2");
  if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw ValidationError("ensemble: p outside [0, 1]");
  if (spec.m >= spec.n) {
    throw TooManyTraps(fmt::format("ensemble: m={} traps on n={} nodes", spec.m, spec.n));
  }
  if (!(spec.gamma >= 0.0)) throw ValidationError("ensemble: gamma must be >= 0");
  if (spec.realizations == 0) throw ValidationError("ensemble: need at least one realization");
  if (spec.times.empty()) throw ValidationError("ensemble: empty time grid");
}

}  // namespace

SurvivalCurve run_realization(const EnsembleSpec& spec, std::size_t index, RealizationLog* log) {
  const auto graph_seed = derive_seed(spec.base_seed, Stream::kGraph, index);
  const auto trap_seed = derive_seed(spec.base_seed, Stream::kTraps, index);
  if (log != nullptr) {
    log->index = index;
    log->graph_seed = graph_seed;
    log->trap_seed = trap_seed;
  }
  auto sample = generate_er({spec.n, spec.p, graph_seed}, true, spec.max_attempts);
  if (log != nullptr) log->attempts = sample.attempts;
  const auto traps = place_traps(sample.graph, spec.m, spec.gamma, trap_seed);
  const CurveMetadata meta{spec.n, spec.p, spec.m, spec.gamma, graph_seed, trap_seed, false};
  SurvivalCurve curve =
      spec.kind == WalkKind::kClassical
          ? ctrw_survival(build_transfer(sample.graph, traps), spec.times, meta)
          : ctqw_survival(build_hamiltonian(sample.graph, traps), spec.times, meta);
  if (log != nullptr) log->oracle_fallback = curve.meta.oracle_fallback;
  return curve;
}

EnsembleStats run_ensemble(const EnsembleSpec& spec,
                           const std::function<void(const RealizationLog&)>& on_realization) {
  validate(spec);
  const std::size_t r_total = spec.realizations;
  std::vector<std::optional<std::vector<double>>> curves(r_total);
  std::vector<RealizationLog> logs(r_total);
  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;

  auto worker = [&] {
    for (std::size_t r = next.fetch_add(1); r < r_total; r = next.fetch_add(1)) {
      auto& log = logs[r];
      try {
        curves[r] = run_realization(spec, r, &log).values;
      } catch (const NumericalError& e) {
        log.ok = false;
        log.error = e.what();
      }
      if (on_realization) {
        std::lock_guard lock(report_mutex);
        on_realization(log);
      }
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(spec.workers, r_total));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  EnsembleStats stats;
  stats.times = spec.times;
  stats.realizations = r_total;
  for (std::size_t r = 0; r < r_total; ++r) {
    stats.seeds.emplace_back(logs[r].graph_seed, logs[r].trap_seed);
    if (!logs[r].ok) stats.failures.push_back(logs[r]);
  }
  if (10 * stats.failures.size() > r_total) {
    throw EnsembleFailure(fmt::format("ensemble: {} of {} realizations failed; first error: {}",
                                      stats.failures.size(), r_total,
                                      stats.failures.front().error));
  }
  stats.effective = r_total - stats.failures.size();

  const auto k = spec.times.size();
  stats.mean.resize(k);
  stats.stderr_.resize(k);
  std::vector<double> column;
  column.reserve(stats.effective);
  const auto reff = static_cast<double>(stats.effective);
  for (std::size_t i = 0; i < k; ++i) {
    column.clear();
    for (const auto& c : curves) {
      if (c) column.push_back((*c)[i]);
    }
    const double mean = pairwise_sum(column) / reff;
    for (auto& x : column) x = (x - mean) * (x - mean);
    stats.mean[i] = mean;
    stats.stderr_[i] = std::sqrt(pairwise_sum(column) / reff) / std::sqrt(reff);
  }
  return stats;
}

}  // namespace qwalk
