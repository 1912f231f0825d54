#include "qwalk/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "qwalk/error.hpp"

namespace qwalk {
namespace {

using Index = Eigen::Index;

std::uint64_t fnv1a(const void* data, std::size_t bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Index of the first component whose magnitude is not negligible.
template <typename Vec>
Index leading_index(const Vec& v) {
  const double cut = 1e-10 * v.cwiseAbs().maxCoeff();
  for (Index k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) > cut) return k;
  }
  return 0;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

// Orthonormal basis of the k-dimensional (approximate) right null space of A.
Eigen::MatrixXcd null_space(const Eigen::MatrixXcd& a, Index k) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a.adjoint());
  const Eigen::MatrixXcd q = qr.householderQ();
  return q.rightCols(k);
}

void fill_residuals(ComplexSpectrum& s, const Eigen::MatrixXcd& matrix, double scale) {
  const Index n = s.values.size();
  const Eigen::MatrixXcd ident = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXd biorth = (s.left.transpose() * s.right - ident).cwiseAbs();
  constexpr double eps = std::numeric_limits<double>::epsilon();
  s.mode_residual = biorth.rowwise().maxCoeff();
  s.eigen_residual = 0.0;
  for (Index l = 0; l < n; ++l) {
    const double kappa = s.right.col(l).norm() * s.left.col(l).norm();
    s.mode_residual(l) = std::max(s.mode_residual(l), eps * kappa);
    const double vnorm = s.right.col(l).norm();
    const double r = (matrix * s.right.col(l) - s.values(l) * s.right.col(l)).norm();
    s.eigen_residual = std::max(s.eigen_residual, vnorm > 0.0 ? r / (scale * vnorm) : 1.0);
  }
  s.biorthogonality_residual = n > 0 ? s.mode_residual.maxCoeff() : 0.0;
  s.completeness_residual =
      n > 0 ? (s.right * s.left.transpose() - ident).cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

std::uint64_t matrix_hash(const Eigen::MatrixXd& m) {
  return fnv1a(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
}

std::uint64_t matrix_hash(const Eigen::MatrixXcd& m) {
  return fnv1a(m.data(), static_cast<std::size_t>(m.size()) * sizeof(std::complex<double>));
}

RealSpectrum eig_symmetric(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) throw ValidationError("eig_symmetric: matrix not square");
  const Index n = matrix.rows();
  if (n == 0) return {};
  const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) {
    throw ValidationError(fmt::format("eig_symmetric: asymmetry {:.3e} exceeds 1e-12", asym));
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NonConvergence(fmt::format(
        "eig_symmetric: QL iteration did not converge within {} sweeps (n={}, hash={:016x})",
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>::m_maxIterations * n, n,
        matrix_hash(matrix)));
  }
  RealSpectrum out{solver.eigenvalues(), solver.eigenvectors()};
  for (Index l = 0; l < n; ++l) {
    auto v = out.vectors.col(l);
    if (v(leading_index(v)) < 0.0) v = -v;
  }
  return out;
}

ComplexSpectrum eig_complex(const Eigen::MatrixXcd& matrix, const ComplexEigOptions& options) {
  if (matrix.rows() != matrix.cols()) throw ValidationError("eig_complex: matrix not square");
  const Index n = matrix.rows();
  ComplexSpectrum out;
  if (n == 0) return out;

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(matrix, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    throw NonConvergence(fmt::format(
        "eig_complex: shifted QR did not converge within {} iterations (n={}, hash={:016x})",
        Eigen::ComplexSchur<Eigen::MatrixXcd>::m_maxIterationsPerRow * n, n,
        matrix_hash(matrix)));
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const auto& raw_values = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (raw_values(a).real() != raw_values(b).real()) {
      return raw_values(a).real() < raw_values(b).real();
    }
    return raw_values(a).imag() > raw_values(b).imag();
  });
  out.values.resize(n);
  out.right.resize(n, n);
  for (Index l = 0; l < n; ++l) {
    out.values(l) = raw_values(order[static_cast<std::size_t>(l)]);
    out.right.col(l) = solver.eigenvectors().col(order[static_cast<std::size_t>(l)]);
  }

  const double scale = std::max(1.0, matrix.cwiseAbs().rowwise().sum().maxCoeff());
  const bool complex_symmetric =
      (matrix - matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;

  if (!complex_symmetric) {
    out.left = out.right.partialPivLu().inverse().transpose();
  } else {
    // Group numerically coincident eigenvalues; inside a cluster the solver's
    // vectors are arbitrary and need not be transpose-orthogonal.
    const double tol = options.cluster_tolerance * scale;
    DisjointSets sets(static_cast<std::size_t>(n));
    for (Index a = 0; a < n; ++a) {
      for (Index b = a + 1; b < n && out.values(b).real() - out.values(a).real() < tol; ++b) {
        if (std::abs(out.values(a) - out.values(b)) < tol) {
          sets.unite(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
        }
      }
    }
    std::vector<std::vector<Index>> clusters(static_cast<std::size_t>(n));
    for (Index l = 0; l < n; ++l) {
      clusters[sets.find(static_cast<std::size_t>(l))].push_back(l);
    }

    out.left.resize(n, n);
    for (const auto& members : clusters) {
      if (members.empty()) continue;
      if (members.size() == 1) {
        const Index l = members.front();
        auto v = out.right.col(l);
        const std::complex<double> norm = std::sqrt((v.transpose() * v)(0, 0));
        v /= norm;
        const auto lead = v(leading_index(v));
        if (lead.real() < 0.0 || (lead.real() == 0.0 && lead.imag() < 0.0)) v = -v;
        out.left.col(l) = v;
        continue;
      }
      ++out.degenerate_clusters;
      const auto k = static_cast<Index>(members.size());
      std::complex<double> mean{0.0, 0.0};
      for (auto l : members) mean += out.values(l);
      mean /= static_cast<double>(k);
      const Eigen::MatrixXcd shifted =
          matrix - mean * Eigen::MatrixXcd::Identity(n, n);
      const Eigen::MatrixXcd basis = null_space(shifted, k);
      const Eigen::MatrixXcd gram = basis.transpose() * basis;
      const Eigen::MatrixXcd dual = basis * gram.fullPivLu().inverse();
      for (Index c = 0; c < k; ++c) {
        const Index l = members[static_cast<std::size_t>(c)];
        out.right.col(l) = basis.col(c);
        out.left.col(l) = dual.col(c);
      }
    }
  }

  fill_residuals(out, matrix, scale);
  // A cluster whose shifted matrix has a null space smaller than its
  // multiplicity shows up here: some basis vectors are not eigenvectors.
  if (!(out.eigen_residual <= options.defect_threshold)) {
    throw DefectivePencil(
        fmt::format("eig_complex: eigenvector residual {:.3e} exceeds {:.1e} (n={}, hash={:016x})",
                    out.eigen_residual, options.defect_threshold, n, matrix_hash(matrix)),
        out.biorthogonality_residual);
  }
  if (!(out.biorthogonality_residual <= options.defect_threshold)) {
    throw DefectivePencil(
        fmt::format("eig_complex: biorthogonality residual {:.3e} exceeds {:.1e} (n={}, "
                    "hash={:016x})",
                    out.biorthogonality_residual, options.defect_threshold, n,
                    matrix_hash(matrix)),
        out.biorthogonality_residual);
  }
  return out;
}

double wigner_density(double lambda, std::size_t n, double p) {
  const double nn = static_cast<double>(n);
  const double sigma2 = nn * p * (1.0 - p);
  const double center = p * nn;
  const double arg = 4.0 * sigma2 - (lambda - center) * (lambda - center);
  if (!(sigma2 > 0.0) || arg <= 0.0) return 0.0;
  return std::sqrt(arg) / (2.0 * std::numbers::pi * sigma2);
}

Histogram empirical_density(std::span<const double> eigenvalues, std::size_t bin_count) {
  if (eigenvalues.empty()) throw ValidationError("empirical_density: empty input");
  if (bin_count < 2) throw ValidationError("empirical_density: need at least 2 bins");
  const auto [lo_it, hi_it] = std::minmax_element(eigenvalues.begin(), eigenvalues.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  h.lo = lo;
  h.width = (hi - lo) / static_cast<double>(bin_count);
  h.density.assign(bin_count, 0.0);
  for (double x : eigenvalues) {
    auto bin = static_cast<std::size_t>((x - lo) / h.width);
    h.density[std::min(bin, bin_count - 1)] += 1.0;
  }
  const double norm = static_cast<double>(eigenvalues.size()) * h.width;
  for (auto& d : h.density) d /= norm;
  return h;
}

void write_spectrum_csv(std::ostream& out, const RealSpectrum& s) {
  out << "l, lambda\n";
  for (Index l = 0; l < s.values.size(); ++l) {
    out << fmt::format("{}, {:.17g}\n", l, s.values(l));
  }
}

void write_spectrum_csv(std::ostream& out, const ComplexSpectrum& s) {
  out << "l, re_E, im_E, biorth_residual\n";
  for (Index l = 0; l < s.values.size(); ++l) {
    out << fmt::format("{}, {:.17g}, {:.17g}, {:.6e}\n", l, s.values(l).real(),
                       s.values(l).imag(), s.mode_residual(l));
  }
}

}  // namespace qwalk
