#include "qwalk/analysis.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "qwalk/error.hpp"

namespace qwalk {

PerturbativeRate perturbative_rate(std::size_t n, std::size_t m, double gamma) {
  if (n == 0 || m >= n) throw TooManyTraps(fmt::format("m={} traps on n={} nodes", m, n));
  if (!(gamma >= 0.0)) throw ValidationError("capture strength must be >= 0");
  const double rate = gamma * static_cast<double>(m) / static_cast<double>(n);
  return {rate, rate};
}

double uniform_mode_decay_rate(const ComplexSpectrum& spectrum) {
  const auto n = spectrum.right.rows();
  if (n == 0) throw ValidationError("empty spectrum");
  const Eigen::VectorXcd uniform =
      Eigen::VectorXcd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  Eigen::Index best = 0;
  double best_overlap = -1.0;
  for (Eigen::Index l = 0; l < n; ++l) {
    const auto v = spectrum.right.col(l);
    const double overlap = std::abs(uniform.dot(v)) / v.norm();
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = l;
    }
  }
  return -spectrum.values(best).imag();
}

double predicted_spectral_gap(std::size_t n, double p) {
  const double nn = static_cast<double>(n);
  return p * nn - 2.0 * std::sqrt(nn * p * (1.0 - p));
}

PlateauEstimate detect_plateau(const SurvivalCurve& curve, const PlateauPolicy& policy) {
  const auto& t = curve.times;
  const auto& v = curve.values;
  if (t.size() < 2 || t.size() != v.size()) {
    throw InsufficientHorizon("plateau detection needs at least two samples");
  }
  const double start = t.back() / 10.0;
  if (!(t.front() <= start) || !(start > 0.0)) {
    throw InsufficientHorizon(fmt::format(
        "curve spans [{}, {}], less than the final decade needed for plateau detection",
        t.front(), t.back()));
  }
  const auto first = static_cast<std::size_t>(
      std::lower_bound(t.begin(), t.end(), start) - t.begin());
  const std::span<const double> tail(v.data() + first, v.size() - first);
  PlateauEstimate est;
  est.points = tail.size();
  if (tail.size() < 2) throw InsufficientHorizon("final decade holds fewer than two samples");
  const double mean = pairwise_sum(tail) / static_cast<double>(tail.size());
  double ss = 0.0;
  for (double x : tail) ss += (x - mean) * (x - mean);
  est.spread = std::sqrt(ss / static_cast<double>(tail.size()));
  if (!(mean > 0.0)) {
    est.drift = std::numeric_limits<double>::infinity();
    return est;
  }
  est.drift = std::abs(tail.front() - tail.back()) / mean;
  if (est.drift < policy.drift_threshold) {
    est.found = true;
    est.value = mean;
  }
  return est;
}

double twin_plateau_estimate(std::size_t n, std::size_t m, std::size_t disjoint_twins) {
  if (m >= n) throw TooManyTraps(fmt::format("m={} traps on n={} nodes", m, n));
  return std::pow(1.0 - static_cast<double>(m) / static_cast<double>(n),
                  2.0 * static_cast<double>(disjoint_twins));
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const auto k = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / k);
  return f;
}

}  // namespace

DecayFit fit_decay(const SurvivalCurve& curve, double gamma, const FitPolicy& policy) {
  if (!(gamma > 0.0)) throw ValidationError("fit_decay: capture strength must be positive");
  const auto& t = curve.times;
  if (t.size() != curve.values.size()) throw ValidationError("fit_decay: ragged curve");

  DecayFit fit;
  std::vector<double> work = curve.values;
  if (policy.subtract_plateau) {
    try {
      const auto plateau = detect_plateau(curve, policy.plateau);
      if (plateau.found) {
        fit.plateau_subtracted = true;
        fit.plateau = plateau.value;
        for (auto& w : work) w -= plateau.value;
      }
    } catch (const InsufficientHorizon&) {
      // Too short to judge; fit the raw curve.
    }
  }

  std::size_t lo = 0;
  std::size_t hi = 0;  // exclusive
  if (policy.window) {
    const auto [a, b] = *policy.window;
    if (!(b > a)) throw ValidationError("fit_decay: empty window");
    lo = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), a) - t.begin());
    hi = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), b) - t.begin());
    if (hi < lo + policy.min_points) {
      throw WindowTooSmall(fmt::format("fit window [{}, {}] holds {} points, need {}", a, b,
                                       hi > lo ? hi - lo : 0, policy.min_points));
    }
    for (std::size_t i = lo; i < hi; ++i) {
      if (!(work[i] > 0.0)) {
        throw NonPositiveValues(fmt::format("fit window contains value {} at t={}", work[i], t[i]));
      }
    }
  } else {
    const double cut = std::max(1.5 * fit.plateau, policy.floor);
    auto usable = [&](std::size_t i) { return curve.values[i] > cut && work[i] > 0.0; };
    std::size_t end = t.size();
    while (end > 0 && !usable(end - 1)) --end;
    if (end == 0) throw NonPositiveValues("fit_decay: no usable values above the floor");
    std::size_t begin = end - 1;
    double smin = std::numeric_limits<double>::infinity();
    double smax = -std::numeric_limits<double>::infinity();
    while (begin > 0 && usable(begin - 1)) {
      const double s = (std::log(work[begin]) - std::log(work[begin - 1])) / (t[begin] - t[begin - 1]);
      const double nmin = std::min(smin, s);
      const double nmax = std::max(smax, s);
      const double scale = std::max(std::abs(nmin), std::abs(nmax));
      if (nmax - nmin > policy.slope_tolerance * scale) break;
      smin = nmin;
      smax = nmax;
      --begin;
    }
    lo = begin;
    hi = end;
    if (hi - lo < policy.min_points) {
      throw WindowTooSmall(fmt::format(
          "automatic fit window [{}, {}] holds {} points, need {}", t[lo], t[hi - 1], hi - lo,
          policy.min_points));
    }
  }

  std::vector<double> x(t.begin() + static_cast<std::ptrdiff_t>(lo),
                        t.begin() + static_cast<std::ptrdiff_t>(hi));
  std::vector<double> y;
  y.reserve(x.size());
  for (std::size_t i = lo; i < hi; ++i) y.push_back(std::log(work[i]));
  const auto line = least_squares(x, y);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.residual = line.rms;
  fit.theta = std::abs(line.slope) / gamma;
  fit.window_lo = x.front();
  fit.window_hi = x.back();
  fit.points = x.size();
  return fit;
}

std::string format_fit_report(const DecayFit& fit) {
  std::string out = fmt::format(
      "theta={:.10g}, window_lo={:.10g}, window_hi={:.10g}, residual={:.6e}, plateau={:.10g}\n",
      fit.theta, fit.window_lo, fit.window_hi, fit.residual,
      fit.plateau_subtracted ? fit.plateau : 0.0);
  out += fmt::format("slope={:.10g}, points={}, plateau_subtracted={}\n", fit.slope, fit.points,
                     fit.plateau_subtracted ? "true" : "false");
  if (fit.predicted_gap || fit.measured_gap) {
    out += fmt::format("predicted_gap={:.10g}, measured_gap={:.10g}\n",
                       fit.predicted_gap.value_or(std::nan("")),
                       fit.measured_gap.value_or(std::nan("")));
  }
  return out;
}

FariaProbability faria_probability(std::size_t n, double p) {
  if (n < 3) throw ValidationError("faria_probability: need n >= 3");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("faria_probability: p outside [0, 1]");
  const double q = 1.0 - p;
  const double others = static_cast<double>(n - 2);
  FariaProbability f;
  f.literal_formula = std::pow(q, 2.0 * others) + std::pow(1.0 - 2.0 * q * p, others);
  f.per_pair = std::pow(p * p + q * q, others);
  return f;
}

std::string faria_discrepancy_report(std::size_t n, double p,
                                     std::optional<std::pair<double, double>> monte_carlo) {
  const auto f = faria_probability(n, p);
  const double q = 1.0 - p;
  const double all_absent = std::pow(q, 2.0 * static_cast<double>(n - 2));
  std::ostringstream out;
  out << fmt::format("faria twin probability, n={} p={}\n", n, p);
  out << fmt::format("  literal closed form (1-p)^(2N-4) + [1-2(1-p)p]^(N-2) = {:.12g}\n",
                     f.literal_formula);
  out << fmt::format("  per-pair twin probability [p^2+(1-p)^2]^(N-2)     = {:.12g}\n", f.per_pair);
  out << fmt::format("  difference (1-p)^(2N-4)                            = {:.12g}\n",
                     f.literal_formula - f.per_pair);
  out << fmt::format("  binomial sum from k=1 (both neighbours present >= 1) = {:.12g}\n",
                     f.per_pair - all_absent);
  out << "  note: the binomial sum over k = 0..N-2 equals the per-pair value; the literal closed\n"
         "  form adds (1-p)^(2N-4) on top of it and reaches 2 at p = 0.\n";
  if (monte_carlo) {
    const auto [freq, se] = *monte_carlo;
    out << fmt::format("  monte carlo frequency = {:.12g} +/- {:.3g}\n", freq, se);
    const auto z = [&](double v) { return se > 0.0 ? (v - freq) / se : std::nan(""); };
    out << fmt::format("  z(per_pair) = {:.3f}, z(literal) = {:.3f}\n", z(f.per_pair),
                       z(f.literal_formula));
  }
  return out.str();
}

namespace {

double chi_bar_at(const RealSpectrum& s, double tol, std::vector<double>* per_node) {
  const auto n = s.values.size();
  std::vector<double> chi(static_cast<std::size_t>(n), 0.0);
  Eigen::Index begin = 0;
  while (begin < n) {
    Eigen::Index end = begin + 1;
    while (end < n && s.values(end) - s.values(end - 1) < tol) ++end;
    for (Eigen::Index j = 0; j < n; ++j) {
      double w = 0.0;
      for (Eigen::Index l = begin; l < end; ++l) w += s.vectors(j, l) * s.vectors(j, l);
      chi[static_cast<std::size_t>(j)] += w * w;
    }
    begin = end;
  }
  const double bar = pairwise_sum(chi) / static_cast<double>(n);
  if (per_node != nullptr) *per_node = std::move(chi);
  return bar;
}

}  // namespace

LocalizationReport long_time_average(const RealSpectrum& spectrum, double relative_tolerance) {
  if (spectrum.size() == 0) throw ValidationError("long_time_average: empty spectrum");
  LocalizationReport r;
  const double scale = spectrum.values.cwiseAbs().maxCoeff();
  r.tolerance = relative_tolerance * (scale > 0.0 ? scale : 1.0);
  r.chi_bar = chi_bar_at(spectrum, r.tolerance, &r.per_node);
  r.chi_bar_tight = chi_bar_at(spectrum, 0.1 * r.tolerance, nullptr);
  r.chi_bar_loose = chi_bar_at(spectrum, 10.0 * r.tolerance, nullptr);
  return r;
}

RatioCurve ratio_curves(const EnsembleStats& a, const EnsembleStats& b) {
  if (a.times != b.times) throw GridMismatch("ratio_curves: time grids differ");
  RatioCurve r;
  r.times = a.times;
  const auto k = a.times.size();
  r.ratio.resize(k);
  r.stderr_.resize(k);
  r.near_zero.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double num = a.mean[i];
    const double den = b.mean[i];
    if (std::abs(den) < 1e-12) {
      r.near_zero[i] = true;
      r.ratio[i] = std::nan("");
      r.stderr_[i] = std::nan("");
      continue;
    }
    r.ratio[i] = num / den;
    const double ra = num != 0.0 ? a.stderr_[i] / num : 0.0;
    const double rb = b.stderr_[i] / den;
    r.stderr_[i] = std::abs(r.ratio[i]) * std::sqrt(ra * ra + rb * rb);
  }
  return r;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const auto half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void write_ensemble_csv(std::ostream& out, const EnsembleStats& stats,
                        std::span<const std::string> provenance) {
  for (const auto& line : provenance) out << "# " << line << '\n';
  out << fmt::format("# realizations={} effective={} failures={}\n", stats.realizations,
                     stats.effective, stats.failures.size());
  out << "t, mean, stderr, r_effective\n";
  for (std::size_t i = 0; i < stats.times.size(); ++i) {
    out << fmt::format("{:.17g}, {:.17g}, {:.17g}, {}\n", stats.times[i], stats.mean[i],
                       stats.stderr_[i], stats.effective);
  }
}

void write_ratio_csv(std::ostream& out, const RatioCurve& ratio,
                     std::span<const std::string> provenance) {
  for (const auto& line : provenance) out << "# " << line << '\n';
  out << "t, ratio, stderr, near_zero\n";
  for (std::size_t i = 0; i < ratio.times.size(); ++i) {
    out << fmt::format("{:.17g}, {:.17g}, {:.17g}, {}\n", ratio.times[i], ratio.ratio[i],
                       ratio.stderr_[i], ratio.near_zero[i] ? 1 : 0);
  }
}

}  // namespace qwalk
