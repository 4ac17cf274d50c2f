// Small statistics toolbox: compensated summation, mean/SE reduction,
// two-sample Kolmogorov-Smirnov tests (plain and weighted), empirical
// quantiles, Hill tail-index estimation with bootstrap confidence intervals,
// and log-log rank regression.
#pragma once

#include <cstddef>
#include <vector>

namespace gfmap {

class RngStream;

// Kahan-compensated accumulator; used for all estimator reductions so that
// results are deterministic for a fixed seed and independent of chunking.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

MeanSe mean_se(const std::vector<double>& xs);

double quantile(std::vector<double> xs, double p);  // empirical, sorted copy

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double n_eff_a = 0.0;  // effective sample sizes entering the p-value
  double n_eff_b = 0.0;
};

// Two-sample KS test. Weights are optional (pass empty vectors for uniform
// weights); weighted arms use Kish effective sample sizes in the asymptotic
// p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b,
                       std::vector<double> wa = {}, std::vector<double> wb = {});

struct HillEstimate {
  double k_frac = 0.0;       // top fraction used
  std::size_t k = 0;         // number of order statistics
  double alpha = 0.0;        // tail exponent (1 / mean log-excess)
  double ci_lo = 0.0;        // bootstrap 95% CI on alpha
  double ci_hi = 0.0;
};

// Hill estimator of a power-law tail exponent over the top-k order
// statistics, for each fraction in k_fracs, with a bootstrap CI
// (n_boot resamples of the full sample).
std::vector<HillEstimate> hill_estimator(const std::vector<double>& samples,
                                         const std::vector<double>& k_fracs,
                                         RngStream& rng, int n_boot = 500);

// Least-squares slope of log(rank) against log(value) over the top fraction
// of the sample; for a t^{-alpha} tail the slope approaches -alpha.
double rank_regression_slope(const std::vector<double>& samples,
                             double top_frac);

// Ordinary least squares slope of y against x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gfmap
