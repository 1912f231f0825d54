#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/graph.hpp"
#include "qwalk/spectra.hpp"

namespace qwalk {

// T = -L - Gamma_op: classical generator with trap losses on the diagonal.
struct TransferOperator {
  Eigen::MatrixXd matrix;
  TrapConfig traps;
};

// H = L - i Gamma_op: complex-symmetric, non-Hermitian when traps are present.
struct EffectiveHamiltonian {
  Eigen::MatrixXcd matrix;
  TrapConfig traps;
};

TransferOperator build_transfer(const Graph& g, const TrapConfig& traps);
EffectiveHamiltonian build_hamiltonian(const Graph& g, const TrapConfig& traps);

enum class WalkKind { kClassical, kQuantum };

std::string_view to_string(WalkKind kind);
WalkKind parse_walk_kind(std::string_view text);

struct CurveMetadata {
  std::size_t n = 0;
  double p = 0.0;
  std::size_t m = 0;
  double gamma = 0.0;
  std::uint64_t graph_seed = 0;
  std::uint64_t trap_seed = 0;
  bool oracle_fallback = false;  // quantum curve came from the propagation oracle
};

// Time in units of the inverse hopping rate.
struct SurvivalCurve {
  WalkKind kind = WalkKind::kClassical;
  std::vector<double> times;
  std::vector<double> values;
  CurveMetadata meta;
};

enum class GridSpacing { kLog, kLinear };

// `points` values from t_min to t_max inclusive. Log spacing needs t_min > 0.
std::vector<double> make_time_grid(double t_min, double t_max, std::size_t points,
                                   GridSpacing spacing = GridSpacing::kLog);

// Spectral propagation of the trapped CTRW, p_kj(t) = <k| e^{tT} |j>.
class ClassicalPropagator {
 public:
  explicit ClassicalPropagator(const TransferOperator& op);

  // Eigenvalues lambda_l of -T (ascending) and eigenvectors phi_l.
  const RealSpectrum& spectrum() const noexcept { return spectrum_; }

  // Probabilities p_{.,j}(t). Negatives down to -1e-12 are clipped to zero;
  // anything below that raises NumericalError.
  Eigen::VectorXd propagate(std::size_t source, double t) const;

  // P_M(t) = 1/(N-M) sum_l e^{-lambda_l t} |sum_{k not trap} phi_l(k)|^2.
  std::vector<double> survival(std::span<const double> times) const;

  struct SingleMode {
    double lambda_min = 0.0;
    double lambda_next = 0.0;
    double weight = 0.0;  // |sum_{k not trap} phi_min(k)|^2 / (N-M)
    bool separated = false;  // lambda_next - lambda_min > 10 lambda_min
  };

  // Long-time single-mode approximation weight * e^{-lambda_min t}.
  SingleMode single_mode() const;

 private:
  TrapConfig traps_;
  RealSpectrum spectrum_;
  Eigen::VectorXd overlaps_;  // |sum_{k not trap} phi_l(k)|^2
};

// Spectral propagation of the trapped CTQW, alpha_kj(t) = <k| e^{-itH} |j>.
class QuantumPropagator {
 public:
  explicit QuantumPropagator(const EffectiveHamiltonian& h, const ComplexEigOptions& options = {});

  const ComplexSpectrum& spectrum() const noexcept { return spectrum_; }

  // alpha_{.,j}(t) = sum_l e^{-(gamma_l + i eps_l) t} V_{.l} W_{jl}.
  Eigen::VectorXcd propagate(std::size_t source, double t) const;

  // Full propagator restricted to trap-free rows and columns.
  Eigen::MatrixXcd restricted_propagator(double t) const;

  // Pi_M(t) = 1/(N-M) sum_{j,k not trap} |alpha_kj(t)|^2, evaluated as the
  // Hermitian form d^H C d with d_l = e^{-i E_l t} and
  // C_ll' = (V_S^H V_S)_ll' (W_S^H W_S)_ll', which equals the squared
  // Frobenius norm of the restricted propagator.
  std::vector<double> survival(std::span<const double> times) const;

  // Same quantity computed from restricted_propagator(t) entry by entry.
  std::vector<double> survival_direct(std::span<const double> times) const;

  // Sum of decaying exponentials 1/(N-M) sum_l e^{-2 gamma_l t}.
  std::vector<double> asymptotic(std::span<const double> times) const;

 private:
  TrapConfig traps_;
  ComplexSpectrum spectrum_;
  std::vector<std::size_t> free_;
  Eigen::MatrixXcd coupling_;  // C above, Hermitian positive semi-definite
};

SurvivalCurve ctrw_survival(const TransferOperator& op, std::span<const double> times,
                            CurveMetadata meta = {});

// Falls back to the propagation oracle when the eigenbasis is defective and
// records that in meta.oracle_fallback.
SurvivalCurve ctqw_survival(const EffectiveHamiltonian& h, std::span<const double> times,
                            CurveMetadata meta = {});

Eigen::VectorXd propagate_classical(const TransferOperator& op, std::size_t source, double t);
Eigen::VectorXcd propagate_quantum(const EffectiveHamiltonian& h, std::size_t source, double t);

// Matrix exponential by scaling and squaring with a Taylor core. The argument
// is scaled so ||A/2^s||_1 <= 1/2 and the series is summed until the next
// term falls below 1e-18 relative to the partial sum, so the truncation error
// of the core is under 1e-16 (relative, in the 1-norm); the remaining error
// comes from the s squarings and stays well under the 1e-10 target for the
// operators used here. Throws StepSizeUnderflow if the scaled argument is not
// finite or needs more than 1000 squarings.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a);

// e^{tT}|j> for a real generator T (master-equation convention).
Eigen::VectorXd oracle_propagate(const Eigen::MatrixXd& generator, double t, std::size_t source);
// e^{-itH}|j> for a Hamiltonian H (Schroedinger convention).
Eigen::VectorXcd oracle_propagate(const Eigen::MatrixXcd& hamiltonian, double t,
                                  std::size_t source);

// Survival curves computed from expm, no eigendecomposition involved.
std::vector<double> oracle_ctrw_survival(const TransferOperator& op, std::span<const double> times);
std::vector<double> oracle_ctqw_survival(const EffectiveHamiltonian& h,
                                         std::span<const double> times);

// Header "# kind, n, p, m, gamma, graph_seed, trap_seed", a matching "#"
// values line, then "t, survival" rows. `provenance` lines are emitted first,
// each prefixed with "# ".
void write_survival_csv(std::ostream& out, const SurvivalCurve& curve,
                        std::span<const std::string> provenance = {});

}  // namespace qwalk
