#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qwalk/analysis.hpp"
#include "qwalk/error.hpp"
#include "qwalk/rng.hpp"

namespace qwalk {
namespace {

SurvivalCurve synthetic(const std::vector<double>& times, const std::function<double(double)>& f) {
  SurvivalCurve c;
  c.kind = WalkKind::kClassical;
  c.times = times;
  for (double t : times) c.values.push_back(f(t));
  return c;
}

TEST(PerturbativeRate, Values) {
  const auto r = perturbative_rate(40, 1, 0.1);
  EXPECT_DOUBLE_EQ(r.classical_lambda, 0.0025);
  EXPECT_DOUBLE_EQ(r.quantum_gamma, 0.0025);
  EXPECT_EQ(perturbative_rate(17, 0, 0.3).quantum_gamma, 0.0);
  EXPECT_THROW(perturbative_rate(5, 5, 0.1), TooManyTraps);
}

TEST(PerturbativeRate, FirstOrderConvergenceOfUniformMode) {
  const auto g = generate_er({60, 0.5, 4}).graph;
  const auto traps0 = place_traps(g, 3, 1.0, 9);
  double prev = std::numeric_limits<double>::infinity();
  for (double gamma : {1e-1, 1e-2, 1e-3}) {
    const TrapConfig traps(60, {traps0.nodes().begin(), traps0.nodes().end()}, gamma);
    const auto s = eig_complex(build_hamiltonian(g, traps).matrix);
    const double predicted = perturbative_rate(60, 3, gamma).quantum_gamma;
    const double err = std::abs(uniform_mode_decay_rate(s) - predicted) / gamma;
    EXPECT_LT(err, prev);
    prev = err;
    // Classical lambda_min follows the same first-order law.
    const auto c = eig_symmetric(-build_transfer(g, traps).matrix);
    EXPECT_LT(std::abs(c.values(0) - predicted) / gamma, 10.0 * gamma);
  }
}

TEST(FitDecay, ExactOnSingleExponential) {
  const auto times = make_time_grid(0.1, 1e4, 400);
  const auto c = synthetic(times, [](double t) { return std::exp(-0.005 * t); });
  const auto fit = fit_decay(c, 0.1);
  EXPECT_NEAR(fit.theta, 0.05, 1e-6);
  EXPECT_LT(fit.residual, 1e-10);
  EXPECT_FALSE(fit.plateau_subtracted);
}

TEST(FitDecay, ExactOverThetaRange) {
  const auto times = make_time_grid(0.1, 1e4, 400);
  for (double theta : {1e-6, 1e-4, 1e-2, 1.0, 10.0}) {
    const double gamma = 0.1;
    // Keep enough of the curve above the floor: for large rates use an early grid.
    const auto grid = theta * gamma > 1e-2 ? make_time_grid(0.01, 20.0 / (theta * gamma), 200) : times;
    const auto c = synthetic(grid, [&](double t) { return 0.7 * std::exp(-gamma * theta * t); });
    FitPolicy policy;
    policy.subtract_plateau = false;
    const auto fit = fit_decay(c, gamma, policy);
    EXPECT_NEAR(fit.theta / theta, 1.0, 1e-8) << theta;
    EXPECT_LT(fit.residual, 1e-10) << theta;
  }
}

TEST(FitDecay, PlateauSubtraction) {
  const auto times = make_time_grid(0.1, 1e5, 400);
  const auto c = synthetic(times, [](double t) { return 0.2 + 0.8 * std::exp(-1e-3 * t); });
  const auto fit = fit_decay(c, 0.1);
  EXPECT_TRUE(fit.plateau_subtracted);
  EXPECT_NEAR(fit.plateau, 0.2, 1e-5);
  EXPECT_NEAR(fit.theta, 1e-2, 1e-4);
}

TEST(FitDecay, WindowErrors) {
  const auto times = make_time_grid(1.0, 100.0, 50);
  const auto c = synthetic(times, [](double t) { return std::exp(-0.01 * t); });
  FitPolicy narrow;
  narrow.window = std::pair{10.0, 11.0};
  EXPECT_THROW(fit_decay(c, 0.1, narrow), WindowTooSmall);
  auto zeros = c;
  for (std::size_t i = 30; i < zeros.values.size(); ++i) zeros.values[i] = 0.0;
  FitPolicy tail;
  tail.window = std::pair{20.0, 100.0};
  EXPECT_THROW(fit_decay(zeros, 0.1, tail), NonPositiveValues);
  auto all_zero = c;
  std::fill(all_zero.values.begin(), all_zero.values.end(), 0.0);
  EXPECT_THROW(fit_decay(all_zero, 0.1), NonPositiveValues);
}

TEST(FitDecay, ExplicitWindow) {
  const auto times = make_time_grid(0.1, 1e3, 300);
  const auto c = synthetic(times, [](double t) { return t < 10 ? 1.0 : std::exp(-0.02 * (t - 10)); });
  FitPolicy policy;
  policy.window = std::pair{20.0, 500.0};
  const auto fit = fit_decay(c, 0.1, policy);
  EXPECT_NEAR(fit.theta, 0.2, 1e-9);
  EXPECT_GE(fit.window_lo, 20.0);
  EXPECT_LE(fit.window_hi, 500.0);
}

TEST(FitDecay, ReportFormat) {
  DecayFit fit;
  fit.theta = 0.025;
  fit.window_lo = 10;
  fit.window_hi = 1e4;
  fit.residual = 1e-12;
  const auto text = format_fit_report(fit);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "theta=0.025, window_lo=10, window_hi=10000, residual=1.000000e-12, plateau=0");
}

TEST(Plateau, Detection) {
  const auto times = make_time_grid(0.1, 1e4, 400);
  EXPECT_FALSE(detect_plateau(synthetic(times, [](double t) { return std::exp(-1e-3 * t); })).found);
  const auto flat = detect_plateau(synthetic(times, [](double) { return 0.3; }));
  EXPECT_TRUE(flat.found);
  EXPECT_DOUBLE_EQ(flat.value, 0.3);
  EXPECT_THROW(detect_plateau(synthetic(make_time_grid(5.0, 20.0, 10), [](double) { return 1.0; })),
               InsufficientHorizon);
}

TEST(Plateau, TwinEstimate) {
  EXPECT_DOUBLE_EQ(twin_plateau_estimate(40, 1, 0), 1.0);
  EXPECT_NEAR(twin_plateau_estimate(40, 1, 2), std::pow(39.0 / 40.0, 4), 1e-15);
}

TEST(Faria, LimitsAndDiscrepancy) {
  const auto one = faria_probability(10, 1.0);
  EXPECT_DOUBLE_EQ(one.per_pair, 1.0);
  const auto zero = faria_probability(10, 0.0);
  EXPECT_DOUBLE_EQ(zero.literal_formula, 2.0);
  EXPECT_DOUBLE_EQ(zero.per_pair, 1.0);
  EXPECT_THROW(faria_probability(2, 0.5), ValidationError);
  const auto text = faria_discrepancy_report(10, 0.0);
  EXPECT_NE(text.find("literal closed form"), std::string::npos);
  EXPECT_NE(text.find("= 2\n"), std::string::npos);
}

class FariaMonteCarlo : public ::testing::TestWithParam<std::pair<std::size_t, double>> {};

TEST_P(FariaMonteCarlo, PerPairWithinThreeSigma) {
  const auto [n, p] = GetParam();
  const auto [freq, se] = testing::faria_monte_carlo(n, p, 1'000'000, 77 + n);
  const auto f = faria_probability(n, p);
  EXPECT_LT(std::abs(f.per_pair - freq), 3.0 * se) << "freq=" << freq << " se=" << se;
}

INSTANTIATE_TEST_SUITE_P(Grid, FariaMonteCarlo,
                         ::testing::Values(std::pair<std::size_t, double>{10, 0.2},
                                           std::pair<std::size_t, double>{8, 0.1},
                                           std::pair<std::size_t, double>{8, 0.5},
                                           std::pair<std::size_t, double>{12, 0.3}));

TEST(LongTimeAverage, CompleteGraphK4) {
  const auto r = long_time_average(eig_symmetric(laplacian(testing::complete_graph(4))));
  for (double chi : r.per_node) EXPECT_NEAR(chi, 0.625, 1e-10);
  EXPECT_NEAR(r.chi_bar, 0.625, 1e-10);
  EXPECT_NEAR(r.chi_bar_tight, 0.625, 1e-10);
  EXPECT_NEAR(r.chi_bar_loose, 0.625, 1e-10);
}

TEST(LongTimeAverage, CompleteGraphsIncreaseTowardOne) {
  double prev = 0.0;
  for (std::size_t n : {4, 8, 16, 32}) {
    const double chi = long_time_average(eig_symmetric(laplacian(testing::complete_graph(n)))).chi_bar;
    const double expect = std::pow(1.0 / n, 2) + std::pow(1.0 - 1.0 / n, 2);
    EXPECT_NEAR(chi, expect, 1e-10);
    EXPECT_GT(chi, prev);
    prev = chi;
  }
}

TEST(LongTimeAverage, NondegenerateSpectrumIsFourthMoment) {
  Eigen::MatrixXd m(3, 3);
  m << 2, -1, 0, -1, 3, -1, 0, -1, 5;  // distinct eigenvalues
  const auto s = eig_symmetric(m);
  const auto r = long_time_average(s);
  for (Eigen::Index j = 0; j < 3; ++j) {
    double want = 0.0;
    for (Eigen::Index l = 0; l < 3; ++l) want += std::pow(s.vectors(j, l), 4);
    EXPECT_NEAR(r.per_node[static_cast<std::size_t>(j)], want, 1e-14);
  }
}

TEST(LongTimeAverage, BoundsOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = generate_er({30, 0.1 + 0.08 * static_cast<double>(seed), seed}).graph;
    const auto r = long_time_average(eig_symmetric(laplacian(g)));
    for (double chi : r.per_node) {
      EXPECT_GE(chi, 1.0 / 30.0 - 1e-12);
      EXPECT_LE(chi, 1.0 + 1e-12);
    }
  }
}

EnsembleSpec small_spec(WalkKind kind) {
  EnsembleSpec spec;
  spec.n = 14;
  spec.p = 0.4;
  spec.m = 2;
  spec.gamma = 0.2;
  spec.kind = kind;
  spec.times = make_time_grid(0.1, 1e3, 30);
  spec.realizations = 12;
  spec.base_seed = 2024;
  return spec;
}

TEST(Ensemble, SingleRealizationEqualsCurve) {
  auto spec = small_spec(WalkKind::kQuantum);
  spec.realizations = 1;
  const auto stats = run_ensemble(spec);
  const auto curve = run_realization(spec, 0);
  EXPECT_EQ(stats.mean, curve.values);
  for (double se : stats.stderr_) EXPECT_EQ(se, 0.0);
  EXPECT_EQ(stats.effective, 1U);
}

TEST(Ensemble, DeterministicAcrossThreadCounts) {
  for (auto kind : {WalkKind::kClassical, WalkKind::kQuantum}) {
    auto spec = small_spec(kind);
    const auto a = run_ensemble(spec);
    const auto b = run_ensemble(spec);
    spec.workers = 4;
    const auto c = run_ensemble(spec);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.mean, c.mean);
    EXPECT_EQ(a.stderr_, c.stderr_);
    EXPECT_EQ(a.seeds, c.seeds);
  }
}

TEST(Ensemble, MeanAndStderrMatchManualReduction) {
  const auto spec = small_spec(WalkKind::kClassical);
  const auto stats = run_ensemble(spec);
  std::vector<std::vector<double>> curves;
  for (std::size_t r = 0; r < spec.realizations; ++r) curves.push_back(run_realization(spec, r).values);
  for (std::size_t i = 0; i < spec.times.size(); ++i) {
    double s = 0.0, ss = 0.0;
    for (const auto& c : curves) s += c[i];
    const double mean = s / curves.size();
    for (const auto& c : curves) ss += (c[i] - mean) * (c[i] - mean);
    EXPECT_NEAR(stats.mean[i], mean, 1e-14);
    EXPECT_NEAR(stats.stderr_[i], std::sqrt(ss / curves.size()) / std::sqrt(curves.size()), 1e-14);
    EXPECT_GE(stats.mean[i], 0.0);
    EXPECT_LE(stats.mean[i], 1.0 + 1e-9);
  }
}

TEST(Ensemble, FailsWhenMostRealizationsFail) {
  auto spec = small_spec(WalkKind::kClassical);
  spec.p = 0.0;  // never connected
  spec.max_attempts = 2;
  std::size_t logged = 0;
  EXPECT_THROW(run_ensemble(spec, [&](const RealizationLog& log) {
                 EXPECT_FALSE(log.ok);
                 ++logged;
               }),
               EnsembleFailure);
  EXPECT_EQ(logged, spec.realizations);
}

TEST(Ensemble, ToleratesRareFailures) {
  // With one connectivity attempt per realization a few of these draws fail.
  auto spec = small_spec(WalkKind::kClassical);
  spec.p = 0.35;
  spec.max_attempts = 1;
  spec.realizations = 40;
  const auto stats = run_ensemble(spec);
  ASSERT_FALSE(stats.failures.empty());
  EXPECT_LE(stats.failures.size(), 4U);
  EXPECT_EQ(stats.effective + stats.failures.size(), 40U);
  auto survivors = spec;
  survivors.max_attempts = 1000;
  EXPECT_NE(run_ensemble(survivors).mean, stats.mean);
}

TEST(Ensemble, ValidatesSpec) {
  auto spec = small_spec(WalkKind::kClassical);
  spec.m = spec.n;
  EXPECT_THROW(run_ensemble(spec), TooManyTraps);
  spec = small_spec(WalkKind::kClassical);
  spec.realizations = 0;
  EXPECT_THROW(run_ensemble(spec), ValidationError);
}

TEST(Ratio, IdentityAndScaling) {
  EnsembleStats a;
  a.times = {1, 2, 3};
  a.mean = {0.5, 0.25, 0.125};
  a.stderr_ = {0.01, 0.01, 0.01};
  auto b = a;
  const auto same = ratio_curves(a, a);
  for (double r : same.ratio) EXPECT_EQ(r, 1.0);
  for (auto& m : b.mean) m *= 0.5;
  for (auto& s : b.stderr_) s *= 0.5;
  const auto two = ratio_curves(a, b);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(two.ratio[i], 2.0);
    EXPECT_NEAR(two.stderr_[i], 2.0 * std::sqrt(2.0) * a.stderr_[i] / a.mean[i], 1e-12);
  }
  b.mean[1] = 0.0;
  EXPECT_TRUE(ratio_curves(a, b).near_zero[1]);
  b.times = {1, 2, 4};
  EXPECT_THROW(ratio_curves(a, b), GridMismatch);
}

TEST(PairwiseSum, MatchesNaiveSum) {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / static_cast<double>(i + 1);
  double naive = 0.0;
  for (double x : v) naive += x;
  EXPECT_NEAR(pairwise_sum(v), naive, 1e-12);
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
}

TEST(Csv, EnsembleColumns) {
  EnsembleStats s;
  s.times = {1.0};
  s.mean = {0.5};
  s.stderr_ = {0.25};
  s.realizations = 4;
  s.effective = 4;
  std::ostringstream out;
  write_ensemble_csv(out, s);
  EXPECT_EQ(out.str(), "# realizations=4 effective=4 failures=0\nt, mean, stderr, r_effective\n1, 0.5, 0.25, 4\n");
}

}  // namespace
}  // namespace qwalk
