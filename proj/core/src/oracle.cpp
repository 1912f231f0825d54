#include <cmath>

#include <fmt/format.h>

#include "qwalk/dynamics.hpp"
#include "qwalk/error.hpp"

namespace qwalk {
namespace {

template <typename Mat>
Mat expm_impl(const Mat& a) {
  const auto n = a.rows();
  if (n != a.cols()) throw ValidationError("expm: matrix not square");
  if (n == 0) return a;
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  if (!a.allFinite() || !std::isfinite(norm)) throw StepSizeUnderflow("expm: non-finite argument");
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  if (squarings > 1000) {
    throw StepSizeUnderflow(fmt::format("expm: norm {:.3e} needs {} squarings", norm, squarings));
  }
  const Mat x = a * std::ldexp(1.0, -squarings);
  const Mat ident = Mat::Identity(n, n);
  Mat sum = ident;
  Mat term = ident;
  for (int k = 1; k <= 64; ++k) {
    term = (term * x) / static_cast<double>(k);
    sum += term;
    const double tn = term.cwiseAbs().colwise().sum().maxCoeff();
    if (tn <= 1e-18 * sum.cwiseAbs().colwise().sum().maxCoeff()) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

}  // namespace

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) { return expm_impl(a); }
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) { return expm_impl(a); }

Eigen::VectorXd oracle_propagate(const Eigen::MatrixXd& generator, double t, std::size_t source) {
  if (!(t >= 0.0)) throw ValidationError("oracle_propagate: t must be >= 0");
  if (source >= static_cast<std::size_t>(generator.rows())) {
    throw ValidationError("oracle_propagate: source out of range");
  }
  return expm(Eigen::MatrixXd(generator * t)).col(static_cast<Eigen::Index>(source));
}

Eigen::VectorXcd oracle_propagate(const Eigen::MatrixXcd& hamiltonian, double t,
                                  std::size_t source) {
  if (!(t >= 0.0)) throw ValidationError("oracle_propagate: t must be >= 0");
  if (source >= static_cast<std::size_t>(hamiltonian.rows())) {
    throw ValidationError("oracle_propagate: source out of range");
  }
  const std::complex<double> minus_i(0.0, -1.0);
  return expm(Eigen::MatrixXcd(hamiltonian * (minus_i * t))).col(static_cast<Eigen::Index>(source));
}

std::vector<double> oracle_ctrw_survival(const TransferOperator& op, std::span<const double> times) {
  const auto free = op.traps.free_nodes();
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    const Eigen::MatrixXd e = expm(Eigen::MatrixXd(op.matrix * t));
    double s = 0.0;
    for (auto j : free) {
      for (auto k : free) s += e(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
    }
    out.push_back(s / static_cast<double>(free.size()));
  }
  return out;
}

std::vector<double> oracle_ctqw_survival(const EffectiveHamiltonian& h,
                                         std::span<const double> times) {
  const auto free = h.traps.free_nodes();
  const std::complex<double> minus_i(0.0, -1.0);
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    const Eigen::MatrixXcd u = expm(Eigen::MatrixXcd(h.matrix * (minus_i * t)));
    double s = 0.0;
    for (auto j : free) {
      for (auto k : free) s += std::norm(u(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)));
    }
    out.push_back(s / static_cast<double>(free.size()));
  }
  return out;
}

}  // namespace qwalk
