#include "gfmap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gfmap/rng.hpp"

namespace gfmap {

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  out.n = xs.size();
  if (xs.empty()) return out;
  KahanSum s;
  for (double x : xs) s.add(x);
  out.mean = s.value() / static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  KahanSum sq;
  for (double x : xs) sq.add((x - out.mean) * (x - out.mean));
  double var = sq.value() / static_cast<double>(xs.size() - 1);
  out.se = std::sqrt(var / static_cast<double>(xs.size()));
  return out;
}

double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  double idx = p * static_cast<double>(xs.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(idx));
  auto hi = static_cast<std::size_t>(std::ceil(idx));
  double frac = idx - static_cast<double>(lo);
  return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

namespace {

// Asymptotic Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_pvalue(double lambda) {
  if (lambda < 1e-10) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct WeightedPoint {
  double x;
  double w;
};

}  // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b,
                       std::vector<double> wa, std::vector<double> wb) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_two_sample: empty sample");
  auto build = [](std::vector<double>& xs, std::vector<double>& ws) {
    std::vector<WeightedPoint> pts(xs.size());
    double total = 0.0, total_sq = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double w = ws.empty() ? 1.0 : ws[i];
      pts[i] = {xs[i], w};
      total += w;
      total_sq += w * w;
    }
    std::sort(pts.begin(), pts.end(),
              [](const WeightedPoint& p, const WeightedPoint& q) { return p.x < q.x; });
    double n_eff = total * total / total_sq;
    return std::pair(pts, std::pair(total, n_eff));
  };
  auto [pa, meta_a] = build(a, wa);
  auto [pb, meta_b] = build(b, wb);
  double ta = meta_a.first, tb = meta_b.first;

  // Sweep the merged order statistics tracking both weighted ECDFs.
  double ca = 0.0, cb = 0.0, d = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < pa.size() || ib < pb.size()) {
    double x = (ia < pa.size() && (ib >= pb.size() || pa[ia].x <= pb[ib].x))
                   ? pa[ia].x
                   : pb[ib].x;
    while (ia < pa.size() && pa[ia].x <= x) ca += pa[ia++].w;
    while (ib < pb.size() && pb[ib].x <= x) cb += pb[ib++].w;
    d = std::max(d, std::abs(ca / ta - cb / tb));
  }

  KsResult out;
  out.statistic = d;
  out.n_eff_a = meta_a.second;
  out.n_eff_b = meta_b.second;
  double ne = out.n_eff_a * out.n_eff_b / (out.n_eff_a + out.n_eff_b);
  double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  out.p_value = kolmogorov_pvalue(lambda);
  return out;
}

namespace {

double hill_point(const std::vector<double>& sorted_desc, std::size_t k) {
  // sorted_desc must be in descending order; uses the top k+1 statistics.
  double acc = 0.0;
  double xk = sorted_desc[k];
  for (std::size_t i = 0; i < k; ++i) acc += std::log(sorted_desc[i] / xk);
  double mean_log_excess = acc / static_cast<double>(k);
  return 1.0 / mean_log_excess;
}

}  // namespace

std::vector<HillEstimate> hill_estimator(const std::vector<double>& samples,
                                         const std::vector<double>& k_fracs,
                                         RngStream& rng, int n_boot) {
  if (samples.size() < 100)
    throw std::invalid_argument("hill_estimator: too few samples");
  std::vector<double> sorted(samples);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::vector<HillEstimate> out;
  for (double frac : k_fracs) {
    auto k = static_cast<std::size_t>(frac * static_cast<double>(sorted.size()));
    if (k < 10 || k >= sorted.size())
      throw std::invalid_argument("hill_estimator: top fraction leaves too few exceedances");
    HillEstimate est;
    est.k_frac = frac;
    est.k = k;
    est.alpha = hill_point(sorted, k);

    std::vector<double> boot(static_cast<std::size_t>(n_boot));
    std::vector<double> resample(sorted.size());
    for (int b = 0; b < n_boot; ++b) {
      RngStream sub = rng.child(static_cast<std::uint64_t>(b));
      for (auto& x : resample) {
        auto idx = static_cast<std::size_t>(sub.uniform() * static_cast<double>(sorted.size()));
        if (idx >= sorted.size()) idx = sorted.size() - 1;
        x = sorted[idx];
      }
      std::sort(resample.begin(), resample.end(), std::greater<>());
      boot[static_cast<std::size_t>(b)] = hill_point(resample, k);
    }
    std::sort(boot.begin(), boot.end());
    est.ci_lo = quantile(boot, 0.025);
    est.ci_hi = quantile(boot, 0.975);
    out.push_back(est);
  }
  return out;
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("ols_slope: need matched samples of size >= 2");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double rank_regression_slope(const std::vector<double>& samples,
                             double top_frac) {
  std::vector<double> sorted(samples);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  auto k = static_cast<std::size_t>(top_frac * static_cast<double>(sorted.size()));
  if (k < 10) throw std::invalid_argument("rank_regression_slope: too few exceedances");
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    lx[i] = std::log(sorted[i]);
    ly[i] = std::log(static_cast<double>(i + 1));
  }
  return ols_slope(lx, ly);
}

}  // namespace gfmap
