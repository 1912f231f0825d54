#include "qwalk/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "qwalk/error.hpp"

namespace qwalk {
namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

void check_times(std::span<const double> times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0)) throw ValidationError(fmt::format("time {} is negative", times[i]));
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw ValidationError("time grid must be strictly increasing");
    }
  }
}

void check_source(std::size_t source, std::size_t n) {
  if (source >= n) throw ValidationError(fmt::format("source node {} out of range", source));
}

void fill_meta(CurveMetadata& meta, const TrapConfig& traps) {
  if (meta.n == 0) meta.n = traps.graph_size();
  meta.m = traps.count();
  meta.gamma = traps.capture_strength();
}

}  // namespace

TransferOperator build_transfer(const Graph& g, const TrapConfig& traps) {
  if (traps.graph_size() != g.size()) {
    throw ValidationError("trap configuration was built for a different graph size");
  }
  Eigen::MatrixXd t = -laplacian(g);
  for (auto m : traps.nodes()) t(idx(m), idx(m)) -= traps.capture_strength();
  return {std::move(t), traps};
}

EffectiveHamiltonian build_hamiltonian(const Graph& g, const TrapConfig& traps) {
  if (traps.graph_size() != g.size()) {
    throw ValidationError("trap configuration was built for a different graph size");
  }
  Eigen::MatrixXcd h = laplacian(g).cast<std::complex<double>>();
  for (auto m : traps.nodes()) h(idx(m), idx(m)) -= std::complex<double>(0.0, traps.capture_strength());
  return {std::move(h), traps};
}

std::string_view to_string(WalkKind kind) {
  return kind == WalkKind::kClassical ? "classical" : "quantum";
}

WalkKind parse_walk_kind(std::string_view text) {
  if (text == "classical") return WalkKind::kClassical;
  if (text == "quantum") return WalkKind::kQuantum;
  throw ValidationError(fmt::format("unknown walk kind '{}'", text));
}

std::vector<double> make_time_grid(double t_min, double t_max, std::size_t points,
                                   GridSpacing spacing) {
  if (points < 2) throw ValidationError("time grid needs at least 2 points");
  if (!(t_max > t_min) || !(t_min >= 0.0)) {
    throw ValidationError(fmt::format("invalid time range [{}, {}]", t_min, t_max));
  }
  if (spacing == GridSpacing::kLog && !(t_min > 0.0)) {
    throw ValidationError("log-spaced time grid needs t_min > 0");
  }
  std::vector<double> t(points);
  const double last = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / last;
    t[i] = spacing == GridSpacing::kLog
               ? std::exp(std::log(t_min) + f * (std::log(t_max) - std::log(t_min)))
               : t_min + f * (t_max - t_min);
  }
  t.front() = t_min;
  t.back() = t_max;
  return t;
}

ClassicalPropagator::ClassicalPropagator(const TransferOperator& op)
    : traps_(op.traps), spectrum_(eig_symmetric(-op.matrix)) {
  const auto free = traps_.free_nodes();
  const Index n = spectrum_.values.size();
  overlaps_.resize(n);
  for (Index l = 0; l < n; ++l) {
    double s = 0.0;
    for (auto k : free) s += spectrum_.vectors(idx(k), l);
    overlaps_(l) = s * s;
  }
}

Eigen::VectorXd ClassicalPropagator::propagate(std::size_t source, double t) const {
  const auto n = spectrum_.size();
  check_source(source, n);
  if (!(t >= 0.0)) throw ValidationError("propagation time must be >= 0");
  if (t == 0.0) return Eigen::VectorXd::Unit(idx(n), idx(source));
  const Eigen::VectorXd weights =
      (-spectrum_.values.array() * t).exp() * spectrum_.vectors.row(idx(source)).transpose().array();
  Eigen::VectorXd p = spectrum_.vectors * weights;
  for (Index k = 0; k < p.size(); ++k) {
    if (p(k) < 0.0) {
      if (p(k) < -1e-12) {
        throw NumericalError(fmt::format(
            "classical propagation produced p[{}] = {:.3e} < -1e-12 at t={}", k, p(k), t));
      }
      p(k) = 0.0;
    }
  }
  return p;
}

std::vector<double> ClassicalPropagator::survival(std::span<const double> times) const {
  check_times(times);
  const double norm = static_cast<double>(traps_.graph_size() - traps_.count());
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] == 0.0) {
      out[i] = 1.0;
      continue;
    }
    out[i] = ((-spectrum_.values.array() * times[i]).exp() * overlaps_.array()).sum() / norm;
  }
  return out;
}

ClassicalPropagator::SingleMode ClassicalPropagator::single_mode() const {
  SingleMode s;
  const Index n = spectrum_.values.size();
  s.lambda_min = spectrum_.values(0);
  s.lambda_next = n > 1 ? spectrum_.values(1) : s.lambda_min;
  s.weight = overlaps_(0) / static_cast<double>(traps_.graph_size() - traps_.count());
  s.separated = n > 1 && (s.lambda_next - s.lambda_min) > 10.0 * s.lambda_min;
  return s;
}

QuantumPropagator::QuantumPropagator(const EffectiveHamiltonian& h, const ComplexEigOptions& options)
    : traps_(h.traps), spectrum_(eig_complex(h.matrix, options)), free_(traps_.free_nodes()) {
  const Index n = spectrum_.values.size();
  const auto s = static_cast<Index>(free_.size());
  Eigen::MatrixXcd vs(s, n);
  Eigen::MatrixXcd ws(s, n);
  for (Index r = 0; r < s; ++r) {
    vs.row(r) = spectrum_.right.row(idx(free_[static_cast<std::size_t>(r)]));
    ws.row(r) = spectrum_.left.row(idx(free_[static_cast<std::size_t>(r)]));
  }
  const Eigen::MatrixXcd gv = vs.adjoint() * vs;
  const Eigen::MatrixXcd gw = ws.adjoint() * ws;
  coupling_ = gv.cwiseProduct(gw);
}

Eigen::VectorXcd QuantumPropagator::propagate(std::size_t source, double t) const {
  const auto n = spectrum_.size();
  check_source(source, n);
  if (!(t >= 0.0)) throw ValidationError("propagation time must be >= 0");
  if (t == 0.0) return Eigen::VectorXcd::Unit(idx(n), idx(source));
  const std::complex<double> minus_i(0.0, -1.0);
  const Eigen::VectorXcd weights = (minus_i * t * spectrum_.values.array()).exp() *
                                   spectrum_.left.row(idx(source)).transpose().array();
  return spectrum_.right * weights;
}

Eigen::MatrixXcd QuantumPropagator::restricted_propagator(double t) const {
  const Index n = spectrum_.values.size();
  const auto s = static_cast<Index>(free_.size());
  const std::complex<double> minus_i(0.0, -1.0);
  const Eigen::VectorXcd d = (minus_i * t * spectrum_.values.array()).exp();
  Eigen::MatrixXcd vs(s, n);
  Eigen::MatrixXcd ws(s, n);
  for (Index r = 0; r < s; ++r) {
    vs.row(r) = spectrum_.right.row(idx(free_[static_cast<std::size_t>(r)])).cwiseProduct(d.transpose());
    ws.row(r) = spectrum_.left.row(idx(free_[static_cast<std::size_t>(r)]));
  }
  return vs * ws.transpose();
}

std::vector<double> QuantumPropagator::survival(std::span<const double> times) const {
  check_times(times);
  const double norm = static_cast<double>(free_.size());
  const std::complex<double> minus_i(0.0, -1.0);
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] == 0.0) {
      out[i] = 1.0;
      continue;
    }
    const Eigen::VectorXcd d = (minus_i * times[i] * spectrum_.values.array()).exp();
    const double value = (d.adjoint() * coupling_ * d)(0, 0).real() / norm;
    out[i] = std::max(value, 0.0);
  }
  return out;
}

std::vector<double> QuantumPropagator::survival_direct(std::span<const double> times) const {
  check_times(times);
  const double norm = static_cast<double>(free_.size());
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    out[i] = times[i] == 0.0 ? 1.0 : restricted_propagator(times[i]).squaredNorm() / norm;
  }
  return out;
}

std::vector<double> QuantumPropagator::asymptotic(std::span<const double> times) const {
  check_times(times);
  const double norm = static_cast<double>(free_.size());
  const Eigen::ArrayXd rates = 2.0 * spectrum_.decay_rates().array();
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    out[i] = (-rates * times[i]).exp().sum() / norm;
  }
  return out;
}

SurvivalCurve ctrw_survival(const TransferOperator& op, std::span<const double> times,
                            CurveMetadata meta) {
  fill_meta(meta, op.traps);
  ClassicalPropagator prop(op);
  return {WalkKind::kClassical, {times.begin(), times.end()}, prop.survival(times), meta};
}

SurvivalCurve ctqw_survival(const EffectiveHamiltonian& h, std::span<const double> times,
                            CurveMetadata meta) {
  fill_meta(meta, h.traps);
  std::vector<double> values;
  try {
    QuantumPropagator prop(h);
    values = prop.survival(times);
  } catch (const DefectivePencil&) {
    values = oracle_ctqw_survival(h, times);
    meta.oracle_fallback = true;
  }
  return {WalkKind::kQuantum, {times.begin(), times.end()}, std::move(values), meta};
}

Eigen::VectorXd propagate_classical(const TransferOperator& op, std::size_t source, double t) {
  return ClassicalPropagator(op).propagate(source, t);
}

Eigen::VectorXcd propagate_quantum(const EffectiveHamiltonian& h, std::size_t source, double t) {
  try {
    return QuantumPropagator(h).propagate(source, t);
  } catch (const DefectivePencil&) {
    return oracle_propagate(h.matrix, t, source);
  }
}

void write_survival_csv(std::ostream& out, const SurvivalCurve& curve,
                        std::span<const std::string> provenance) {
  for (const auto& line : provenance) out << "# " << line << '\n';
  const auto& m = curve.meta;
  out << "# kind, n, p, m, gamma, graph_seed, trap_seed\n";
  out << fmt::format("# {}, {}, {}, {}, {}, {}, {}\n", to_string(curve.kind), m.n, m.p, m.m,
                     m.gamma, m.graph_seed, m.trap_seed);
  if (m.oracle_fallback) out << "# evaluated by propagation oracle (defective eigenbasis)\n";
  out << "t, survival\n";
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    out << fmt::format("{:.17g}, {:.17g}\n", curve.times[i], curve.values[i]);
  }
}

}  // namespace qwalk
