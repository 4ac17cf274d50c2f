#include "gfmap/lamperti.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gfmap {

namespace {

// (e^y - 1)/y, stable at y -> 0.
double phi(double y) {
  if (std::abs(y) < 1e-8) return 1.0 + 0.5 * y;
  return std::expm1(y) / y;
}

// int_0^dt e^{alpha (x0 + g s)} ds.
double segment_clock(double alpha, double x0, double g, double dt) {
  return std::exp(alpha * x0) * dt * phi(alpha * g * dt);
}

// Solve int_0^u e^{alpha (x0 + g s)} ds = target for u in [0, dt].
double segment_clock_inverse(double alpha, double x0, double g, double dt,
                             double target) {
  double ag = alpha * g;
  double e0 = std::exp(alpha * x0);
  double u;
  if (std::abs(ag) < 1e-12) {
    u = target / e0;
  } else {
    u = std::log1p(ag * target / e0) / ag;
  }
  return std::clamp(u, 0.0, dt);
}

}  // namespace

SsmpPath::SsmpPath(MapPath path, double x0, double alpha)
    : path_(std::move(path)), x0_(x0), alpha_(alpha) {
  if (x0_ <= 0.0) throw std::invalid_argument("SsmpPath: x0 must be positive");
  cum_.reserve(path_.segments.size() + 1);  // starts as {0.0}
  double acc = 0.0;
  for (const auto& s : path_.segments) {
    double dt = s.t1 - s.t0;
    double g = dt > 0.0 ? (s.x1 - s.x0) / dt : 0.0;
    acc += segment_clock(alpha_, s.x0, g, dt);
    cum_.push_back(acc);
  }
}

double SsmpPath::clock_at(double s) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < path_.segments.size(); ++k) {
    const auto& seg = path_.segments[k];
    if (s >= seg.t1) {
      acc = cum_[k + 1];
      continue;
    }
    if (s > seg.t0) {
      double dt = seg.t1 - seg.t0;
      double g = dt > 0.0 ? (seg.x1 - seg.x0) / dt : 0.0;
      acc = cum_[k] + segment_clock(alpha_, seg.x0, g, s - seg.t0);
    }
    break;
  }
  return acc;
}

double SsmpPath::invert_clock(double u) const {
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  if (it == cum_.begin()) return 0.0;
  auto k = static_cast<std::size_t>(it - cum_.begin()) - 1;
  if (k >= path_.segments.size()) return path_.end_time();
  const auto& seg = path_.segments[k];
  double dt = seg.t1 - seg.t0;
  double g = dt > 0.0 ? (seg.x1 - seg.x0) / dt : 0.0;
  return seg.t0 + segment_clock_inverse(alpha_, seg.x0, g, dt, u - cum_[k]);
}

double SsmpPath::covered_time() const {
  return std::pow(x0_, alpha_) * cum_.back();
}

std::optional<std::pair<double, TypeIndex>> SsmpPath::query(double t) const {
  double u = t * std::pow(x0_, -alpha_);
  if (u > cum_.back()) return std::nullopt;
  double s = invert_clock(u);
  return std::pair(x0_ * std::exp(path_.value(s)), path_.type_at(s));
}

std::vector<SsmpJump> SsmpPath::jumps() const {
  std::vector<SsmpJump> out;
  out.reserve(path_.jumps.size());
  double scale = std::pow(x0_, alpha_);
  for (const auto& j : path_.jumps) {
    SsmpJump s;
    s.time = scale * clock_at(j.time);
    s.pre_value = x0_ * std::exp(j.pre_value);
    s.delta = s.pre_value * std::expm1(j.size);
    s.type_mark = j.type_mark;
    s.transition = j.transition;
    out.push_back(s);
  }
  return out;
}

namespace {

// Parameters of the remainder estimate for exponential-functional sampling.
struct TailGuard {
  double gamma_star = 1.0;
  double w_factor = 1.0;    // max_j w_j / min_j w_j at alpha*gamma_star
  double denom = 1.0;       // -chi(alpha gamma_star) > 0
};

TailGuard make_tail_guard(const MapSpec& spec, double alpha) {
  double d = (chi(spec, alpha * 1e-5) - chi(spec, -alpha * 1e-5)) / 2e-5;
  if (d >= 0.0)
    throw std::runtime_error("infinite exponential functional: alpha*xi does not drift to -infinity");
  TailGuard g;
  double chi_a = chi(spec, alpha);
  if (chi_a < 0.0) {
    g.gamma_star = 1.0;
  } else {
    // chi(alpha q) starts at 0 with negative slope and is >= 0 at q=1:
    // bracket the positive root and sit halfway inside the negative region.
    double root = find_root([&](double q) { return chi(spec, alpha * q); }, 1e-4, 1.0);
    g.gamma_star = 0.5 * root;
  }
  Spectral sd = spectral_data(spec, alpha * g.gamma_star);
  g.w_factor = sd.w.maxCoeff() / sd.w.minCoeff();
  g.denom = -sd.chi;
  if (g.denom <= 0.0)
    throw std::runtime_error("exp functional tail guard: could not find negative chi");
  return g;
}

double remainder_estimate(const TailGuard& g, double alpha, double x_cur) {
  // E[(remainder)^{gamma*}] <= e^{gamma* alpha x} w_factor / denom; report on
  // the value scale via the 1/gamma* power.
  double raw = std::exp(g.gamma_star * alpha * x_cur) * g.w_factor / g.denom;
  return std::pow(raw, 1.0 / g.gamma_star);
}

}  // namespace

ExpFunctionalSample sample_exp_functional(const MapSpec& spec, TypeIndex start_type,
                                          double alpha, double eps_tail,
                                          RngStream& rng, double grid_step) {
  if (eps_tail <= 0.0) throw std::invalid_argument("eps_tail must be > 0");
  TailGuard guard = make_tail_guard(spec, alpha);

  // Chunk length scaled to the drift so a handful of chunks usually suffices.
  double d = std::abs((chi(spec, alpha * 1e-5) - chi(spec, -alpha * 1e-5)) / 2e-5);
  double chunk = std::clamp(10.0 / d, 1.0, 200.0);

  ExpFunctionalSample out;
  double x_base = 0.0;
  TypeIndex type = start_type;
  double t_base = 0.0;
  KahanSum acc;
  for (int iter = 0; iter < 100000; ++iter) {
    RngStream sub = rng.child(static_cast<std::uint64_t>(iter));
    MapPath p = sample_map_path(spec, type, chunk, sub, grid_step);
    SsmpPath sp(p, 1.0, alpha);
    acc.add(std::exp(alpha * x_base) * sp.clock_at(p.end_time()));
    t_base += p.end_time();
    x_base += p.end_value();
    type = p.end_type();
    if (p.killed) {
      out.tail_bound = 0.0;
      break;
    }
    out.tail_bound = remainder_estimate(guard, alpha, x_base);
    if (out.tail_bound < eps_tail * acc.value()) break;
  }
  out.value = acc.value();
  out.trunc_time = t_base;
  out.end_type = type;
  return out;
}

MeanSe exp_functional_moment(const MapSpec& spec, TypeIndex start_type,
                             double alpha, double gamma, std::size_t reps,
                             RngStream& rng) {
  if (chi(spec, alpha * gamma) >= 0.0)
    throw std::runtime_error("moment not guaranteed finite: chi(alpha*gamma) >= 0");
  std::vector<double> vals(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    RngStream sub = rng.child(r);
    vals[r] = std::pow(sample_exp_functional(spec, start_type, alpha, 1e-8, sub).value,
                       gamma);
  }
  return mean_se(vals);
}

double sample_weighted_exp_functional(const MapSpec& spec, TypeIndex start_type,
                                      double cramer, const Vector& w_cramer,
                                      double eps_tail, RngStream& rng,
                                      double grid_step) {
  // J = int (w_{Theta(s)}(Y)/w_i(Y)) e^{xi(s)} ds. Its mean may be infinite
  // (tail exponent Y can sit below 1), so the stopping rule is pathwise: stop
  // once the local scale e^{xi(T)} is negligible against the accumulated
  // integral. Tail estimation only needs the large values, which are driven
  // by early excursions, so the truncation does not bias the exponent.
  (void)cramer;
  KahanSum acc;
  double x_base = 0.0;
  TypeIndex type = start_type;
  double w_i = w_cramer(start_type);
  for (int iter = 0; iter < 100000; ++iter) {
    RngStream sub = rng.child(static_cast<std::uint64_t>(iter));
    MapPath p = sample_map_path(spec, type, 10.0, sub, grid_step);
    SsmpPath sp(p, 1.0, 1.0);
    // Per-segment weights are constant in type, so reuse the segment clock.
    double prev = 0.0;
    for (std::size_t k = 0; k < p.segments.size(); ++k) {
      double here = sp.clock_at(p.segments[k].t1);
      acc.add(w_cramer(p.segments[k].type) / w_i * std::exp(x_base) * (here - prev));
      prev = here;
    }
    x_base += p.end_value();
    type = p.end_type();
    if (p.killed) break;
    if (std::exp(x_base) < eps_tail * std::max(acc.value(), 1e-300) && iter >= 2) break;
  }
  return acc.value();
}

TailCrossSample sample_weighted_exp_functional_crossing(
    const MapSpec& spec, const MapSpec& tilted, TypeIndex start_type,
    double cramer, const Vector& w_cramer, double level, double eps_tail,
    RngStream& rng, double grid_step) {
  const double w_i = w_cramer(start_type);
  KahanSum acc;
  double x_base = 0.0;
  TypeIndex type = start_type;
  double cross_x = 0.0;
  TypeIndex cross_type = start_type;
  bool crossed = false;
  // Phase 1: under the tilt the ordinator drifts upward, so first passage
  // above the level happens in O(level) MAP time.
  for (int iter = 0; iter < 100000 && !crossed; ++iter) {
    RngStream sub = rng.child(static_cast<std::uint64_t>(iter));
    MapPath p = sample_map_path(tilted, type, 10.0, sub, grid_step);
    for (const auto& s : p.segments) {
      const double dt = s.t1 - s.t0;
      const double g = dt > 0.0 ? (s.x1 - s.x0) / dt : 0.0;
      const bool hit = std::max(s.x0, s.x1) + x_base >= level;
      double span = dt;
      if (hit)
        span = g != 0.0 ? std::clamp((level - x_base - s.x0) / g, 0.0, dt)
                        : 0.0;
      acc.add(w_cramer(s.type) / w_i * std::exp(x_base + s.x0) *
              segment_clock(1.0, 0.0, g, span));
      if (hit) {
        cross_x = std::max(s.x0 + x_base, level);  // jump overshoot kept
        cross_type = s.type;
        crossed = true;
        break;
      }
    }
    if (!crossed) {
      x_base += p.end_value();
      type = p.end_type();
      if (p.killed)
        throw std::logic_error("crossing sampler: tilted path was killed");
    }
  }
  if (!crossed)
    throw std::logic_error("crossing sampler: no first passage above level");
  TailCrossSample out;
  out.weight = w_i / w_cramer(cross_type) * std::exp(-cramer * cross_x);
  // Phase 2: finish the integral under the original law from the crossing
  // state; by the Markov additive property the remainder is a fresh copy of
  // J_{cross_type} scaled by e^{xi(T)}.
  RngStream cont = rng.child(1000001);
  const double rest = sample_weighted_exp_functional(spec, cross_type, cramer,
                                                     w_cramer, eps_tail, cont,
                                                     grid_step);
  out.value =
      acc.value() + w_cramer(cross_type) / w_i * std::exp(cross_x) * rest;
  return out;
}

std::vector<EntranceSample> entrance_law_sample(const MapSpec& spec, double alpha,
                                                double t, std::size_t reps,
                                                RngStream& rng, double eps_tail) {
  if (alpha <= 0.0) throw std::invalid_argument("entrance_law_sample: alpha must be > 0");
  double m = chi_prime(spec, 0.0);
  if (m <= 0.0) throw std::runtime_error("entrance law requires chi'(0) > 0");
  Vector pi = stationary_distribution(spec);
  MapSpec dual = dual_spec(spec);

  std::vector<EntranceSample> out(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    RngStream sub = rng.child(r);
    // Start type from pi.
    std::vector<double> probs(static_cast<std::size_t>(spec.n_types));
    for (int k = 0; k < spec.n_types; ++k) probs[static_cast<std::size_t>(k)] = pi(k);
    auto i = static_cast<TypeIndex>(sub.categorical(probs));
    RngStream path_rng = sub.child(0);
    double I = sample_exp_functional(dual, i, alpha, eps_tail, path_rng).value;
    EntranceSample s;
    s.type = i;
    s.value = std::pow(t / I, 1.0 / alpha);
    s.weight = 1.0 / (alpha * m * I * static_cast<double>(reps));
    out[r] = s;
  }
  return out;
}

std::optional<std::pair<double, TypeIndex>> simulate_ssmp_value(
    const MapSpec& spec, double x, TypeIndex i, double alpha, double t,
    RngStream& rng, double grid_step) {
  double target = t * std::pow(x, -alpha);
  double covered = 0.0;
  double x_base = 0.0;
  TypeIndex type = i;
  for (int iter = 0; iter < 100000; ++iter) {
    RngStream sub = rng.child(static_cast<std::uint64_t>(iter));
    MapPath p = sample_map_path(spec, type, 5.0, sub, grid_step);
    SsmpPath sp(p, 1.0, alpha);
    double gain = std::exp(alpha * x_base) * sp.clock_at(p.end_time());
    if (covered + gain >= target) {
      double u = (target - covered) * std::exp(-alpha * x_base);
      double s = sp.invert_clock(u);
      return std::pair(x * std::exp(x_base + p.value(s)), p.type_at(s));
    }
    covered += gain;
    x_base += p.end_value();
    type = p.end_type();
    if (p.killed) return std::nullopt;  // died before t
  }
  return std::nullopt;  // lifetime (clock limit) reached within budget
}

ScalingCheckResult scaling_check(const MapSpec& spec, double x, TypeIndex i,
                                 double c, double alpha, double t,
                                 std::size_t reps, RngStream& rng,
                                 double grid_step) {
  ScalingCheckResult out;
  RngStream arm_a = rng.child(1);
  RngStream arm_b = rng.child(2);
  for (std::size_t r = 0; r < reps; ++r) {
    RngStream sa = arm_a.child(r);
    auto a = simulate_ssmp_value(spec, x, i, alpha, std::pow(c, -alpha) * t, sa, grid_step);
    if (a) {
      out.rescaled.push_back(c * a->first);
      out.rescaled_type.push_back(a->second);
    }
    RngStream sb = arm_b.child(r);
    auto b = simulate_ssmp_value(spec, c * x, i, alpha, t, sb, grid_step);
    if (b) {
      out.direct.push_back(b->first);
      out.direct_type.push_back(b->second);
    }
  }
  out.ks = ks_two_sample(out.rescaled, out.direct);
  return out;
}

}  // namespace gfmap
