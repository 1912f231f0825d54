#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qwalk {

// Eigenpairs of a real symmetric operator. Column l of `vectors` pairs with
// values(l); values ascend. Each vector's first non-negligible component is
// positive, which makes repeated decompositions byte-identical.
struct RealSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;

  std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
};

// Eigen-decomposition of a non-Hermitian operator H = V diag(E) W^T.
//
// `right` holds |Phi_l> as columns. `left` holds the biorthogonal partners as
// columns w_l, used WITHOUT conjugation: <~Phi_l| = w_l^T, so left^T * right = 1
// and right * left^T = 1. For complex-symmetric input w_l = v_l outside
// degenerate clusters, with the pair scaled so that v_l^T v_l = 1.
//
// Eigenvalues are E_l = eps_l - i gamma_l, ordered by ascending real part then
// ascending decay rate.
struct ComplexSpectrum {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd right;
  Eigen::MatrixXcd left;

  // max |W^T V - 1|, floored by machine epsilon times the largest eigenvalue
  // condition number |v_l| |w_l| so that near-defective pairs are not hidden
  // by left vectors built from an explicit inverse.
  double biorthogonality_residual = 0.0;
  double completeness_residual = 0.0;     // max |V W^T - 1|
  Eigen::VectorXd mode_residual;          // per-mode version of the above
  double eigen_residual = 0.0;            // max |H v - E v| / (|H| |v|)
  std::size_t degenerate_clusters = 0;    // clusters re-biorthogonalized

  std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
  Eigen::VectorXd energies() const { return values.real(); }
  Eigen::VectorXd decay_rates() const { return -values.imag(); }
};

struct ComplexEigOptions {
  // Eigenvalues closer than cluster_tolerance * ||H||_inf form one cluster.
  double cluster_tolerance = 1e-9;
  // Biorthogonality residual above this raises DefectivePencil.
  double defect_threshold = 1e-6;
};

// Throws ValidationError if the input is not symmetric within 1e-12 and
// NonConvergence if the QL iteration fails.
RealSpectrum eig_symmetric(const Eigen::MatrixXd& matrix);

ComplexSpectrum eig_complex(const Eigen::MatrixXcd& matrix,
                            const ComplexEigOptions& options = {});

// Semicircle density with centre z = pN and radius 2 sigma, sigma^2 = Np(1-p).
double wigner_density(double lambda, std::size_t n, double p);

struct Histogram {
  double lo = 0.0;
  double width = 0.0;            // bin width
  std::vector<double> density;   // integrates to 1

  double center(std::size_t bin) const { return lo + (static_cast<double>(bin) + 0.5) * width; }
};

// Area-normalized histogram over [min, max] of the input. A constant input is
// binned over a unit-length interval centred on the value.
Histogram empirical_density(std::span<const double> eigenvalues, std::size_t bin_count);

// FNV-1a over the raw matrix bytes; used to identify failing inputs.
std::uint64_t matrix_hash(const Eigen::MatrixXd& m);
std::uint64_t matrix_hash(const Eigen::MatrixXcd& m);

// CSV dumps: "l, lambda" and "l, re_E, im_E, biorth_residual".
void write_spectrum_csv(std::ostream& out, const RealSpectrum& s);
void write_spectrum_csv(std::ostream& out, const ComplexSpectrum& s);

}  // namespace qwalk
