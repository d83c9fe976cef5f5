#include "sk/diststat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sk/error.hpp"
#include "sk/kernels.hpp"
#include "sk/preprocess.hpp"
#include "sk/special.hpp"

namespace sk {

namespace {

void check_samples(std::span<const double> samples) {
  if (samples.size() < 2) throw InsufficientData("density curve needs at least 2 samples");
  for (double v : samples) {
    if (!std::isfinite(v)) throw DegenerateData("samples contain NaN or Inf");
  }
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t g) {
  std::vector<double> xs(g);
  const double step = (hi - lo) / static_cast<double>(g - 1);
  for (std::size_t i = 0; i < g; ++i) xs[i] = lo + step * static_cast<double>(i);
  xs.back() = hi;
  return xs;
}

void evaluate(std::span<const double> samples, double h, std::span<const double> xs, std::span<double> ys,
              Exec exec) {
  if (exec == Exec::parallel) {
    kernels::omp::gaussian_grid(samples, h, xs, ys);
  } else {
    kernels::serial::gaussian_grid(samples, h, xs, ys);
  }
}

double trapezoid(std::span<const double> xs, std::span<const double> ys) {
  double area = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) area += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
  return area;
}

}  // namespace

double scott_bandwidth_1d(std::span<const double> samples) {
  check_samples(samples);
  const double sd = std::sqrt(sample_variance(samples));
  if (!(sd > 0.0)) throw DegenerateData("samples have zero standard deviation");
  return std::pow(static_cast<double>(samples.size()), -0.2) * sd;
}

DensityCurve kde_curve_1d(std::span<const double> samples, std::size_t grid_size, Exec exec) {
  if (grid_size < kMinGridSize) throw InvalidArgument("grid_size must be >= " + std::to_string(kMinGridSize));
  const double h = scott_bandwidth_1d(samples);
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  DensityCurve curve;
  curve.xs = uniform_grid(*lo - 3.0 * h, *hi + 3.0 * h, grid_size);
  curve.ys.resize(grid_size);
  evaluate(samples, h, curve.xs, curve.ys, exec);
  const double area = trapezoid(curve.xs, curve.ys);
  for (double& y : curve.ys) y /= area;
  return curve;
}

CurvePair shared_grid_curves(std::span<const double> a, std::span<const double> b, std::size_t grid_size,
                             Exec exec) {
  if (grid_size < kMinGridSize) throw InvalidArgument("grid_size must be >= " + std::to_string(kMinGridSize));
  const double ha = scott_bandwidth_1d(a);
  const double hb = scott_bandwidth_1d(b);
  const double pad = 3.0 * std::max(ha, hb);
  const double lo = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end())) - pad;
  const double hi = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end())) + pad;
  CurvePair out;
  out.xs = uniform_grid(lo, hi, grid_size);
  out.a.resize(grid_size);
  out.b.resize(grid_size);
  evaluate(a, ha, out.xs, out.a, exec);
  evaluate(b, hb, out.xs, out.b, exec);
  return out;
}

DivergenceResult js_divergence(std::span<const double> a, std::span<const double> b, bool standardized,
                               std::size_t grid_size, Exec exec) {
  std::vector<double> za, zb;
  if (standardized) {
    za = zscore(a);
    zb = zscore(b);
    a = za;
    b = zb;
  }
  const CurvePair curves = shared_grid_curves(a, b, grid_size, exec);
  const double sa = std::accumulate(curves.a.begin(), curves.a.end(), 0.0);
  const double sb = std::accumulate(curves.b.begin(), curves.b.end(), 0.0);
  double kl_p = 0.0;
  double kl_q = 0.0;
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double p = curves.a[i] / sa;
    const double q = curves.b[i] / sb;
    const double m = 0.5 * (p + q);
    if (p > 0.0) kl_p += p * std::log2(p / m);
    if (q > 0.0) kl_q += q * std::log2(q / m);
  }
  DivergenceResult r;
  r.jsd = std::clamp(0.5 * kl_p + 0.5 * kl_q, 0.0, 1.0);
  r.grid_size = grid_size;
  r.standardized = standardized;
  return r;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of positions i+1 .. j
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

namespace {

struct CenteredRanks {
  std::vector<double> a;
  std::vector<double> b;
  double norm_product = 0.0;
};

CenteredRanks centered_ranks(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("spearman inputs differ in length: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  if (a.size() < 3) throw InsufficientData("spearman needs at least 3 pairs");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) throw DegenerateData("spearman inputs contain NaN or Inf");
  }
  CenteredRanks out{average_ranks(a), average_ranks(b), 0.0};
  // mean rank is exactly (n + 1) / 2 whatever the ties
  const double mid = 0.5 * static_cast<double>(a.size() + 1);
  double na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.a[i] -= mid;
    out.b[i] -= mid;
    na += out.a[i] * out.a[i];
    nb += out.b[i] * out.b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DegenerateData("spearman input is constant");
  out.norm_product = std::sqrt(na * nb);
  return out;
}

}  // namespace

CorrelationResult spearman(std::span<const double> a, std::span<const double> b) {
  const CenteredRanks r = centered_ranks(a, b);
  CorrelationResult out;
  out.n = a.size();
  out.rho = std::clamp(kernels::centered_correlation(r.a, r.b, r.norm_product), -1.0, 1.0);
  const double df = static_cast<double>(out.n) - 2.0;
  if (std::fabs(out.rho) >= 1.0) {
    out.p_parametric = 0.0;
  } else {
    const double t = out.rho * std::sqrt(df / ((1.0 - out.rho) * (1.0 + out.rho)));
    out.p_parametric = std::clamp(special::student_t_two_sided(t, df), 0.0, 1.0);
  }
  return out;
}

double permutation_pvalue(std::span<const double> a, std::span<const double> b, std::size_t n_perm,
                          std::uint64_t seed, Exec exec) {
  if (n_perm < 1) throw InvalidArgument("n_perm must be >= 1");
  const CenteredRanks r = centered_ranks(a, b);
  kernels::PermutationTask task;
  task.centered_a = r.a;
  task.centered_b = r.b;
  task.norm_product = r.norm_product;
  task.observed = std::fabs(kernels::centered_correlation(r.a, r.b, r.norm_product));
  task.n_perm = n_perm;
  task.seed = seed;
  const std::size_t hits = exec == Exec::parallel ? kernels::omp::permutation_exceed_count(task)
                                                  : kernels::serial::permutation_exceed_count(task);
  return static_cast<double>(1 + hits) / static_cast<double>(n_perm + 1);
}

CorrelationResult spearman_test(std::span<const double> a, std::span<const double> b, std::size_t n_perm,
                                std::uint64_t seed, Exec exec) {
  CorrelationResult r = spearman(a, b);
  r.p_permutation = permutation_pvalue(a, b, n_perm, seed, exec);
  return r;
}

Strength strength_label(const CorrelationResult& r) {
  double p = r.p_parametric;
  if (r.p_permutation) p = std::min(p, *r.p_permutation);
  return r.rho > 0.7 && p < 0.05 ? Strength::Strong : Strength::NotStrong;
}

const char* to_string(Strength s) noexcept { return s == Strength::Strong ? "strong" : "not_strong"; }

void to_json(nlohmann::json& j, const CorrelationResult& r) {
  j = nlohmann::json{{"rho", r.rho}, {"p_parametric", r.p_parametric}, {"n", r.n},
                     {"strength", to_string(strength_label(r))}};
  j["p_permutation"] = r.p_permutation ? nlohmann::json(*r.p_permutation) : nlohmann::json(nullptr);
}

void to_json(nlohmann::json& j, const DivergenceResult& r) {
  j = nlohmann::json{{"jsd", r.jsd}, {"grid_size", r.grid_size}, {"standardized", r.standardized}};
}

}  // namespace sk
