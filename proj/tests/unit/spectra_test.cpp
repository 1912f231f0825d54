#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "qwalk/dynamics.hpp"
#include "qwalk/error.hpp"
#include "qwalk/graph.hpp"
#include "qwalk/rng.hpp"
#include "qwalk/spectra.hpp"

namespace qwalk {
namespace {

using cd = std::complex<double>;
using testing::complete_graph;
using testing::make_graph;

void expect_real_contract(const Eigen::MatrixXd& m, const RealSpectrum& s) {
  const auto n = m.rows();
  for (Eigen::Index l = 1; l < n; ++l) EXPECT_LE(s.values(l - 1), s.values(l));
  const Eigen::MatrixXd gram = s.vectors.transpose() * s.vectors;
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-9);
  const Eigen::MatrixXd rec = s.vectors * s.values.asDiagonal() * s.vectors.transpose();
  EXPECT_LT((rec - m).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(EigSymmetric, CompleteGraphK3) {
  const auto s = eig_symmetric(laplacian(complete_graph(3)));
  EXPECT_NEAR(s.values(0), 0.0, 1e-12);
  EXPECT_NEAR(s.values(1), 3.0, 1e-12);
  EXPECT_NEAR(s.values(2), 3.0, 1e-12);
}

TEST(EigSymmetric, SingleEdge) {
  const auto s = eig_symmetric(laplacian(make_graph(2, {{0, 1}})));
  EXPECT_NEAR(s.values(0), 0.0, 1e-14);
  EXPECT_NEAR(s.values(1), 2.0, 1e-14);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(s.vectors(0, 0), r, 1e-14);
  EXPECT_NEAR(s.vectors(1, 0), r, 1e-14);
  EXPECT_NEAR(s.vectors(0, 1), r, 1e-14);
  EXPECT_NEAR(s.vectors(1, 1), -r, 1e-14);
}

TEST(EigSymmetric, NullModeIsUniformOnConnectedGraph) {
  const auto l = laplacian(generate_er({50, 0.4, 11}).graph);
  const auto s = eig_symmetric(l);
  expect_real_contract(l, s);
  EXPECT_NEAR(s.values(0), 0.0, 1e-9);
  EXPECT_GT(s.values(1), 1e-6);
  const Eigen::VectorXd e = Eigen::VectorXd::Constant(50, 1.0 / std::sqrt(50.0));
  EXPECT_LT((s.vectors.col(0) - e).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((l * e).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EigSymmetric, ContractOnRandomLaplacians) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto l = laplacian(generate_er({30, 0.2 + 0.03 * static_cast<double>(seed % 10), seed}, false).graph);
    const auto s = eig_symmetric(l);
    expect_real_contract(l, s);
    EXPECT_GE(s.values(0), -1e-9);
  }
}

TEST(EigSymmetric, DeterministicSigns) {
  const auto l = laplacian(generate_er({25, 0.3, 5}).graph);
  const auto a = eig_symmetric(l);
  const auto b = eig_symmetric(l);
  EXPECT_EQ(a.vectors, b.vectors);
  for (Eigen::Index c = 0; c < a.vectors.cols(); ++c) {
    for (Eigen::Index k = 0; k < a.vectors.rows(); ++k) {
      if (std::abs(a.vectors(k, c)) > 1e-10 * a.vectors.col(c).cwiseAbs().maxCoeff()) {
        EXPECT_GT(a.vectors(k, c), 0.0);
        break;
      }
    }
  }
}

TEST(EigSymmetric, RejectsAsymmetric) {
  Eigen::Matrix2d m;
  m << 1, 2, 3, 4;
  EXPECT_THROW(eig_symmetric(m), ValidationError);
}

void expect_complex_contract(const Eigen::MatrixXcd& h, const ComplexSpectrum& s, double tol = 1e-8) {
  const auto n = h.rows();
  EXPECT_LT(s.biorthogonality_residual, tol);
  EXPECT_LT(s.completeness_residual, tol);
  const Eigen::MatrixXcd rec = s.right * s.values.asDiagonal() * s.left.transpose();
  EXPECT_LT((rec - h).cwiseAbs().maxCoeff(), tol);
  for (Eigen::Index l = 0; l < n; ++l) {
    EXPECT_LT((h * s.right.col(l) - s.values(l) * s.right.col(l)).cwiseAbs().maxCoeff(),
              tol * std::max(1.0, s.right.col(l).cwiseAbs().maxCoeff()));
  }
}

TEST(EigComplex, TwoByTwoTrappedEdge) {
  Eigen::Matrix2cd h;
  h << cd(1, 0), cd(-1, 0), cd(-1, 0), cd(1, -0.1);
  const auto s = eig_complex(h);
  expect_complex_contract(h, s);
  // lambda^2 - (2 - 0.1i) lambda + (-0.1i) = 0
  const auto [r1, r2] = testing::quadratic_roots(cd(-2.0, 0.1), cd(0.0, -0.1));
  const bool direct = std::abs(s.values(0) - r2) < 1e-12 && std::abs(s.values(1) - r1) < 1e-12;
  const bool swapped = std::abs(s.values(0) - r1) < 1e-12 && std::abs(s.values(1) - r2) < 1e-12;
  EXPECT_TRUE(direct || swapped) << s.values.transpose();
  EXPECT_LE(s.values(0).real(), s.values(1).real());
}

TEST(EigComplex, CharacteristicPolynomialSmallCases) {
  Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 2;
    Eigen::MatrixXcd h(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        h(i, j) = h(j, i) = cd(rng.uniform() * 2 - 1, rng.uniform() * 2 - 1);
      }
    }
    const auto s = eig_complex(h);
    for (int l = 0; l < n; ++l) {
      // det(H - lambda) via the explicit 2x2 / 3x3 expansion.
      const Eigen::MatrixXcd a = h - s.values(l) * Eigen::MatrixXcd::Identity(n, n);
      cd det;
      if (n == 2) {
        det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
      } else {
        det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
              a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
              a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
      }
      EXPECT_LT(std::abs(det), 1e-10) << "trial " << trial;
    }
    if (n == 2) {
      const auto [r1, r2] = testing::quadratic_roots(-h.trace(), h.determinant());
      const double d1 = std::min(std::abs(s.values(0) - r1), std::abs(s.values(0) - r2));
      const double d2 = std::min(std::abs(s.values(1) - r1), std::abs(s.values(1) - r2));
      EXPECT_LT(std::max(d1, d2), 1e-10);
    }
  }
}

TEST(EigComplex, HermitianLimitMatchesSymmetric) {
  const auto g = generate_er({20, 0.3, 8}).graph;
  const auto traps = TrapConfig(20, {}, 0.0);
  const auto h = build_hamiltonian(g, traps);
  const auto s = eig_complex(h.matrix);
  const auto r = eig_symmetric(laplacian(g));
  expect_complex_contract(h.matrix, s);
  for (Eigen::Index l = 0; l < 20; ++l) {
    EXPECT_LT(std::abs(s.values(l).imag()), 1e-9);
    EXPECT_NEAR(s.values(l).real(), r.values(l), 1e-9);
  }
}

TEST(EigComplex, DegenerateClustersAreBiorthonormal) {
  // K_8 with one trap keeps a 6-fold degenerate eigenvalue 8 untouched by it.
  const auto g = complete_graph(8);
  const auto h = build_hamiltonian(g, TrapConfig(8, {2}, 0.3));
  const auto s = eig_complex(h.matrix);
  expect_complex_contract(h.matrix, s);
  EXPECT_GE(s.degenerate_clusters, 1U);
}

TEST(EigComplex, TraceIdentitiesOnRandomInstances) {
  Rng pick(17);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t n = 4 + pick.below(27);
    const double p = 0.15 + 0.8 * pick.uniform();
    const std::size_t m = 1 + pick.below(n / 2);
    const double gamma = 0.01 + pick.uniform();
    const auto g = generate_er({n, p, seed}, false).graph;
    const auto traps = place_traps(g, m, gamma, seed + 1000);
    const auto h = build_hamiltonian(g, traps);
    const auto s = eig_complex(h.matrix);
    expect_complex_contract(h.matrix, s);
    double degree_sum = 0.0;
    for (auto z : g.degrees()) degree_sum += static_cast<double>(z);
    EXPECT_NEAR(s.energies().sum(), degree_sum, 1e-8);
    EXPECT_NEAR(s.decay_rates().sum(), gamma * static_cast<double>(m), 1e-8);
    EXPECT_GE(s.decay_rates().minCoeff(), -1e-9);
  }
}

TEST(EigComplex, DecayRatesBoundedByCaptureStrength) {
  for (double gamma : {0.5, 0.1, 0.01}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto g = generate_er({20, 0.4, seed}).graph;
      const auto s = eig_complex(build_hamiltonian(g, place_traps(g, 3, gamma, seed)).matrix);
      EXPECT_LE(s.decay_rates().maxCoeff(), gamma + 1e-12);
    }
  }
}

TEST(EigComplex, GeneralMatrixUsesInverse) {
  Eigen::Matrix3cd a;
  a << cd(1, 0), cd(2, 1), cd(0, 0), cd(0, 0), cd(3, -1), cd(1, 0), cd(1, 1), cd(0, 0), cd(-2, 0);
  const auto s = eig_complex(a);
  expect_complex_contract(a, s, 1e-10);
}

TEST(EigComplex, DefectiveJordanBlockIsReported) {
  Eigen::Matrix2cd j;
  j << cd(1, 0), cd(1, 0), cd(0, 0), cd(1, 0);
  EXPECT_THROW(eig_complex(j), DefectivePencil);
}

TEST(EigComplex, ComplexSymmetricExceptionalPoint) {
  // [[1, i], [i, -1]] is complex symmetric and nilpotent-shifted: defective.
  Eigen::Matrix2cd j;
  j << cd(1, 0), cd(0, 1), cd(0, 1), cd(-1, 0);
  EXPECT_THROW(eig_complex(j), DefectivePencil);
}

TEST(Wigner, CentreEdgeAndNormalization) {
  const std::size_t n = 1000;
  const double p = 0.1;
  const double sigma = std::sqrt(n * p * (1 - p));
  const double z = p * n;
  EXPECT_NEAR(wigner_density(z, n, p), 1.0 / (std::numbers::pi * sigma), 1e-15);
  EXPECT_EQ(wigner_density(z + 2 * sigma, n, p), 0.0);
  EXPECT_EQ(wigner_density(z - 3 * sigma, n, p), 0.0);
  const double area = testing::simpson([&](double x) { return wigner_density(x, n, p); },
                                       z - 2 * sigma, z + 2 * sigma, 200000);
  EXPECT_NEAR(area, 1.0, 1e-6);
}

TEST(EmpiricalDensity, ConstantAndUniformInputs) {
  const std::vector<double> constant(10, 3.0);
  const auto h = empirical_density(constant, 4);
  int occupied = 0;
  for (double d : h.density) {
    if (d > 0) {
      ++occupied;
      EXPECT_DOUBLE_EQ(d, 1.0 / h.width);
    }
  }
  EXPECT_EQ(occupied, 1);

  std::vector<double> grid(100001);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = static_cast<double>(i) / 100000.0;
  const auto u = empirical_density(grid, 50);
  double area = 0.0;
  for (double d : u.density) {
    EXPECT_NEAR(d, 1.0, 1e-3);
    area += d * u.width;
  }
  EXPECT_NEAR(area, 1.0, 1e-12);
  EXPECT_THROW(empirical_density(grid, 1), ValidationError);
  EXPECT_THROW(empirical_density(std::vector<double>{}, 5), ValidationError);
}

TEST(SpectrumCsv, Columns) {
  const auto g = complete_graph(3);
  std::ostringstream real, cplx;
  write_spectrum_csv(real, eig_symmetric(laplacian(g)));
  EXPECT_EQ(real.str().substr(0, 10), "l, lambda\n");
  write_spectrum_csv(cplx, eig_complex(build_hamiltonian(g, TrapConfig(3, {0}, 0.1)).matrix));
  EXPECT_EQ(cplx.str().substr(0, cplx.str().find('\n')), "l, re_E, im_E, biorth_residual");
}

}  // namespace
}  // namespace qwalk
