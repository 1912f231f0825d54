#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/dynamics.hpp"
#include "qwalk/graph.hpp"
#include "qwalk/spectra.hpp"

namespace qwalk {

// First-order (non-degenerate) correction to the uniform mode: Gamma M / N,
// both as the smallest classical rate lambda_1 and as the quantum decay rate of
// the perturbed uniform mode. Valid for Gamma << 1 on connected graphs.
struct PerturbativeRate {
  double classical_lambda = 0.0;
  double quantum_gamma = 0.0;
};

PerturbativeRate perturbative_rate(std::size_t n, std::size_t m, double gamma);

// Decay rate of the eigenmode whose right eigenvector overlaps most with the
// uniform vector; this is the mode the first-order formula tracks.
double uniform_mode_decay_rate(const ComplexSpectrum& spectrum);

// Bulk-edge estimate of the spectral gap, z - 2 sigma with z = pN.
double predicted_spectral_gap(std::size_t n, double p);

struct PlateauPolicy {
  double drift_threshold = 0.01;  // relative change across the final decade
};

struct PlateauEstimate {
  bool found = false;
  double value = 0.0;   // mean over the final decade when found
  double drift = 0.0;   // |first - last| / mean over the final decade
  double spread = 0.0;  // standard deviation over the final decade
  std::size_t points = 0;
};

// Throws InsufficientHorizon unless the grid covers a full decade ending at
// its last point.
PlateauEstimate detect_plateau(const SurvivalCurve& curve, const PlateauPolicy& policy = {});

// Naive stationary fraction from n_F disjoint twin pairs, (1 - M/N)^{2 n_F}.
double twin_plateau_estimate(std::size_t n, std::size_t m, std::size_t disjoint_twins);

struct FitPolicy {
  // Explicit [t_lo, t_hi]; when absent the window is chosen automatically as
  // the longest trailing run of usable points whose local log-slopes stay
  // within slope_tolerance of each other.
  std::optional<std::pair<double, double>> window;
  double slope_tolerance = 0.1;
  std::size_t min_points = 10;
  double floor = 1e-12;
  bool subtract_plateau = true;
  PlateauPolicy plateau;
};

struct DecayFit {
  double theta = 0.0;  // |slope| / Gamma
  double slope = 0.0;
  double intercept = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::size_t points = 0;
  double residual = 0.0;  // RMS of the log-linear fit
  bool plateau_subtracted = false;
  double plateau = 0.0;
  // Spectral gap diagnostics, filled by callers that know the graph.
  std::optional<double> predicted_gap;
  std::optional<double> measured_gap;
};

// Least-squares line through (t, ln survival). Throws WindowTooSmall when
// fewer than policy.min_points are usable and NonPositiveValues when the
// window contains values <= 0.
DecayFit fit_decay(const SurvivalCurve& curve, double gamma, const FitPolicy& policy = {});

// "theta=..., window_lo=..., window_hi=..., residual=..., plateau=..." plus
// optional diagnostic lines.
std::string format_fit_report(const DecayFit& fit);

// Twin probabilities for a fixed pair in G(n, p).
struct FariaProbability {
  double literal_formula = 0.0;  // (1-p)^{2N-4} + [1 - 2(1-p)p]^{N-2}
  double per_pair = 0.0;       // [p^2 + (1-p)^2]^{N-2}
};

FariaProbability faria_probability(std::size_t n, double p);

// Text block comparing the two closed forms at (n, p), optionally against a
// Monte Carlo frequency.
std::string faria_discrepancy_report(std::size_t n, double p,
                                     std::optional<std::pair<double, double>> monte_carlo = {});

struct LocalizationReport {
  double chi_bar = 0.0;
  std::vector<double> per_node;  // chi_{j,j}
  double tolerance = 0.0;        // absolute degeneracy tolerance used
  // chi_bar recomputed at 0.1x and 10x the tolerance.
  double chi_bar_tight = 0.0;
  double chi_bar_loose = 0.0;
};

// Long-time average of the return probability for trap-free dynamics:
// chi_jj = sum over clusters c of equal eigenvalues of (sum_{l in c} |Phi_l(j)|^2)^2,
// with |E_l - E_l'| < relative_tolerance * max|E| counted as degenerate.
LocalizationReport long_time_average(const RealSpectrum& spectrum, double relative_tolerance = 1e-8);

struct EnsembleSpec {
  std::size_t n = 40;
  double p = 0.5;
  std::size_t m = 1;
  double gamma = 0.1;
  WalkKind kind = WalkKind::kClassical;
  std::vector<double> times;
  std::size_t realizations = 1;
  std::uint64_t base_seed = 1;
  std::size_t workers = 1;
  std::size_t max_attempts = 1000;
};

struct RealizationLog {
  std::size_t index = 0;
  std::uint64_t graph_seed = 0;
  std::uint64_t trap_seed = 0;
  std::size_t attempts = 0;
  bool ok = true;
  bool oracle_fallback = false;
  std::string error;
};

struct EnsembleStats {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> stderr_;  // population sd / sqrt(R_eff)
  std::size_t realizations = 0;  // requested R
  std::size_t effective = 0;     // successful realizations
  std::vector<std::pair<std::uint64_t, std::uint64_t>> seeds;  // (graph, trap) per realization
  std::vector<RealizationLog> failures;
};

// One realization: graph seed and trap seed derived from (base_seed, index).
SurvivalCurve run_realization(const EnsembleSpec& spec, std::size_t index,
                              RealizationLog* log = nullptr);

// R independent realizations on up to `workers` threads. Results depend only
// on the base seed: per-realization curves are reduced by pairwise summation
// in index order. Throws EnsembleFailure when more than 10% fail.
EnsembleStats run_ensemble(const EnsembleSpec& spec,
                           const std::function<void(const RealizationLog&)>& on_realization = {});

struct RatioCurve {
  std::vector<double> times;
  std::vector<double> ratio;
  std::vector<double> stderr_;
  std::vector<bool> near_zero;  // denominator below 1e-12
};

// Pointwise <a>/<b> with first-order error propagation. Throws GridMismatch.
RatioCurve ratio_curves(const EnsembleStats& a, const EnsembleStats& b);

// Pairwise (cascade) sum; result independent of how work was scheduled.
double pairwise_sum(std::span<const double> values);

void write_ensemble_csv(std::ostream& out, const EnsembleStats& stats,
                        std::span<const std::string> provenance = {});
void write_ratio_csv(std::ostream& out, const RatioCurve& ratio,
                     std::span<const std::string> provenance = {});

}  // namespace qwalk
