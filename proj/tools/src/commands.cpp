#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "qwalk/analysis.hpp"
#include "qwalk/error.hpp"
#include "qwalk/version.hpp"

namespace qwalk::cli {
namespace {

namespace fs = std::filesystem;

std::string tag(double p) { return fmt::format("p{:g}", p); }

EnsembleSpec make_spec(const ExperimentConfig& c, std::size_t m, double p, WalkKind kind) {
  EnsembleSpec spec;
  spec.n = c.n;
  spec.p = p;
  spec.m = m;
  spec.gamma = c.gamma;
  spec.kind = kind;
  spec.times = c.times();
  spec.realizations = c.realizations;
  spec.base_seed = c.seed;
  spec.workers = c.workers;
  spec.max_attempts = c.max_attempts;
  return spec;
}

class Writer {
 public:
  explicit Writer(const ExperimentConfig& config) : dir_(config.out) {}

  template <typename Fn>
  void write(const std::string& name, Fn&& body) {
    const auto path = (dir_ / name).string();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError(fmt::format("out: cannot open '{}' for writing", path));
    body(f);
    f.flush();
    if (!f) throw ValidationError(fmt::format("out: write to '{}' failed", path));
    written_.push_back(path);
  }

  std::vector<std::string> take() { return std::move(written_); }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

void log_realization(std::ostream& log, std::string_view label, const RealizationLog& r) {
  fmt::print(log, "[{}] realization {} graph_seed={} trap_seed={} attempts={} {}{}\n", label,
             r.index, r.graph_seed, r.trap_seed, r.attempts, r.ok ? "ok" : "failed: ",
             r.ok ? (r.oracle_fallback ? " (oracle fallback)" : "") : r.error);
}

EnsembleStats ensemble(const EnsembleSpec& spec, std::ostream& log, std::string_view label) {
  return run_ensemble(spec, [&](const RealizationLog& r) { log_realization(log, label, r); });
}

std::vector<std::string> with_seeds(std::vector<std::string> lines, const SurvivalCurve& c) {
  lines.push_back(
      fmt::format("graph_seed={} trap_seed={}", c.meta.graph_seed, c.meta.trap_seed));
  return lines;
}

std::vector<std::string> with_ensemble(std::vector<std::string> lines, const EnsembleSpec& spec,
                                       const EnsembleStats& stats) {
  lines.push_back(fmt::format("kind={} n={} p={} m={} gamma={} base_seed={}", to_string(spec.kind),
                              spec.n, spec.p, spec.m, spec.gamma, spec.base_seed));
  lines.push_back(fmt::format("seeds: realization i uses graph and trap streams derived from "
                              "(base_seed, i), i < {}",
                              stats.realizations));
  return lines;
}

// Fit a single curve; a failed fit is reported, not fatal.
std::string fit_block(const SurvivalCurve& curve, double gamma, const Graph* graph) {
  try {
    auto fit = fit_decay(curve, gamma);
    if (graph != nullptr) {
      fit.predicted_gap = predicted_spectral_gap(curve.meta.n, curve.meta.p);
      const auto s = eig_symmetric(laplacian(*graph));
      if (s.values.size() > 1) fit.measured_gap = s.values(1);
    }
    return format_fit_report(fit);
  } catch (const ValidationError& e) {
    return fmt::format("fit unavailable: {}\n", e.what());
  }
}

std::string single_line(const std::string& text) {
  return text.substr(0, text.find('\n'));
}

}  // namespace

std::vector<std::string> provenance(const ExperimentConfig& config) {
  return {
      fmt::format("qwalk-trap {} {}", kVersion, to_string(config.command)),
      fmt::format("config_hash={:016x}", config.hash()),
      fmt::format("config: {}", config.canonical()),
      fmt::format("modules: core={} eigen={}.{}.{} fmt={}", kVersion, EIGEN_WORLD_VERSION,
                  EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION, FMT_VERSION),
  };
}

std::vector<std::string> cmd_fig1(const ExperimentConfig& c, std::ostream& out,
                                  std::ostream& log) {
  Writer writer(c);
  const auto head = provenance(c);
  const auto times = c.times();
  for (std::size_t m : c.m) {
    const double rate = c.gamma * static_cast<double>(m) / static_cast<double>(c.n);
    writer.write(fmt::format("fig1_m{}_reference.csv", m), [&](std::ostream& f) {
      for (const auto& line : head) f << "# " << line << '\n';
      f << fmt::format("# reference exp(-gamma m t / n), rate={:.17g}\n", rate);
      f << "t, survival\n";
      for (double t : times) f << fmt::format("{:.17g}, {:.17g}\n", t, std::exp(-rate * t));
    });
    for (double p : c.p) {
      std::string report;
      for (WalkKind kind : c.walk_kinds()) {
        auto spec = make_spec(c, m, p, kind);
        RealizationLog entry;
        const std::string label = fmt::format("fig1 m={} p={} {}", m, p, to_string(kind));
        SurvivalCurve curve;
        try {
          curve = run_realization(spec, 0, &entry);
        } catch (const NumericalError& e) {
          entry.ok = false;
          entry.error = e.what();
          log_realization(log, label, entry);
          throw;
        }
        log_realization(log, label, entry);
        writer.write(fmt::format("fig1_m{}_{}_{}.csv", m, tag(p), to_string(kind)),
                     [&](std::ostream& f) { write_survival_csv(f, curve, with_seeds(head, curve)); });
        const auto graph =
            generate_er({c.n, p, curve.meta.graph_seed}, true, c.max_attempts).graph;
        const auto block = fit_block(curve, c.gamma, &graph);
        report += fmt::format("[{}]\n{}", to_string(kind), block);
        fmt::print(out, "fig1 m={} p={} {}: {}\n", m, p, to_string(kind), single_line(block));
      }
      const auto pert = perturbative_rate(c.n, m, c.gamma);
      report += fmt::format("[perturbative]\ngamma_m_over_n={:.17g}, theta={:.17g}\n",
                            pert.classical_lambda, pert.classical_lambda / c.gamma);
      writer.write(fmt::format("fig1_m{}_{}_fit.txt", m, tag(p)), [&](std::ostream& f) {
        for (const auto& line : head) f << "# " << line << '\n';
        f << report;
      });
    }
  }
  return writer.take();
}

std::vector<std::string> cmd_fig2(const ExperimentConfig& c, std::ostream& out,
                                  std::ostream& log) {
  Writer writer(c);
  const auto head = provenance(c);
  for (std::size_t m : c.m) {
    for (double p : c.p) {
      for (WalkKind kind : c.walk_kinds()) {
        const auto spec = make_spec(c, m, p, kind);
        const auto label = fmt::format("fig2 m={} p={} {}", m, p, to_string(kind));
        const auto stats = ensemble(spec, log, label);
        writer.write(fmt::format("fig2_m{}_{}_{}.csv", m, tag(p), to_string(kind)),
                     [&](std::ostream& f) {
                       write_ensemble_csv(f, stats, with_ensemble(head, spec, stats));
                     });
        fmt::print(out, "{}: R_eff={} mean(t_max)={:.6g}\n", label, stats.effective,
                   stats.mean.back());
      }
    }
  }
  return writer.take();
}

std::vector<std::string> cmd_fig3(const ExperimentConfig& c, std::ostream& out,
                                  std::ostream& log) {
  Writer writer(c);
  const auto head = provenance(c);
  for (std::size_t m : c.m) {
    for (WalkKind kind : c.walk_kinds()) {
      // The reference ensemble is shared by every ratio; identical p values
      // reuse it so that z' = z gives a ratio of exactly one.
      std::map<double, EnsembleStats> cache;
      auto stats_for = [&](double p) -> const EnsembleStats& {
        auto it = cache.find(p);
        if (it != cache.end()) return it->second;
        const auto spec = make_spec(c, m, p, kind);
        auto stats = ensemble(spec, log, fmt::format("fig3 m={} p={} {}", m, p, to_string(kind)));
        writer.write(fmt::format("fig3_m{}_{}_{}.csv", m, tag(p), to_string(kind)),
                     [&](std::ostream& f) {
                       write_ensemble_csv(f, stats, with_ensemble(head, spec, stats));
                     });
        return cache.emplace(p, std::move(stats)).first->second;
      };
      const auto& reference = stats_for(c.p_ref);
      for (double p : c.p) {
        const auto& stats = stats_for(p);
        const auto ratio = ratio_curves(reference, stats);
        writer.write(
            fmt::format("fig3_m{}_{}_over_{}_{}.csv", m, tag(c.p_ref), tag(p), to_string(kind)),
            [&](std::ostream& f) {
              auto lines = head;
              lines.push_back(fmt::format("ratio <{}>(p={}) / <{}>(p={}), m={}, base_seed={}",
                                          to_string(kind), c.p_ref, to_string(kind), p, m, c.seed));
              write_ratio_csv(f, ratio, lines);
            });
        fmt::print(out, "fig3 m={} {} ratio p_ref={} / p={} at t_max: {:.6g}\n", m,
                   to_string(kind), c.p_ref, p, ratio.ratio.back());
      }
    }
  }
  return writer.take();
}

std::vector<std::string> cmd_run(const ExperimentConfig& c, std::ostream& out,
                                 std::ostream& log) {
  Writer writer(c);
  const auto head = provenance(c);
  for (std::size_t m : c.m) {
    for (double p : c.p) {
      for (WalkKind kind : c.walk_kinds()) {
        const auto spec = make_spec(c, m, p, kind);
        const auto label = fmt::format("run m={} p={} {}", m, p, to_string(kind));
        const auto stats = ensemble(spec, log, label);
        const auto stem = fmt::format("run_m{}_{}_{}", m, tag(p), to_string(kind));
        writer.write(stem + ".csv", [&](std::ostream& f) {
          write_ensemble_csv(f, stats, with_ensemble(head, spec, stats));
        });
        SurvivalCurve mean{kind, stats.times, stats.mean, {c.n, p, m, c.gamma, 0, 0, false}};
        const auto block = fit_block(mean, c.gamma, nullptr);
        writer.write(stem + "_fit.txt", [&](std::ostream& f) {
          for (const auto& line : head) f << "# " << line << '\n';
          f << block;
        });
        fmt::print(out, "{}: R_eff={} {}\n", label, stats.effective, single_line(block));
      }
    }
  }
  return writer.take();
}

int run_cli(std::span<const std::string> args, const char* seed_env, std::ostream& out,
            std::ostream& err) {
  try {
    const auto parsed = parse_config(args, seed_env);
    if (!parsed.config) {
      out << parsed.help;
      return 0;
    }
    const auto& c = *parsed.config;
    switch (c.command) {
      case Command::kFig1:
        cmd_fig1(c, out, err);
        break;
      case Command::kFig2:
        cmd_fig2(c, out, err);
        break;
      case Command::kFig3:
        cmd_fig3(c, out, err);
        break;
      case Command::kRun:
        cmd_run(c, out, err);
        break;
    }
    return 0;
  } catch (const ValidationError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 1;
  } catch (const NumericalError& e) {
    fmt::print(err, "numerical failure: {}\n", e.what());
    return 2;
  }
}

}  // namespace qwalk::cli
