#include "gfmap/map_path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gfmap/stats.hpp"

namespace gfmap {

double MapPath::end_time() const {
  if (segments.empty()) return 0.0;
  return segments.back().t1;
}

double MapPath::end_value() const {
  if (segments.empty()) return 0.0;
  double v = segments.back().x1;
  // A jump stored exactly at the final segment boundary (e.g. a transition
  // at the kill/horizon instant) applies after the segment.
  if (!jumps.empty() && jumps.back().time == segments.back().t1)
    v = jumps.back().pre_value + jumps.back().size;
  return v;
}

TypeIndex MapPath::end_type() const {
  if (!jumps.empty() && !segments.empty() && jumps.back().time == segments.back().t1)
    return jumps.back().type_after;
  return segments.empty() ? start_type : segments.back().type;
}

double MapPath::value(double t) const {
  for (const auto& s : segments) {
    if (t <= s.t1) {
      if (t <= s.t0) return s.x0;
      double frac = (t - s.t0) / (s.t1 - s.t0);
      return s.x0 + frac * (s.x1 - s.x0);
    }
  }
  return end_value();
}

TypeIndex MapPath::type_at(double t) const {
  for (const auto& s : segments) {
    if (t < s.t1) return s.type;
  }
  return end_type();
}

double MapPath::reconstruct_end() const {
  double x = segments.empty() ? 0.0 : segments.front().x0;
  std::size_t j = 0;
  for (const auto& s : segments) {
    x += s.incr;
    while (j < jumps.size() && jumps[j].time == s.t1) x += jumps[j++].size;
  }
  return x;
}

MapPath sample_map_path(const MapSpec& spec, TypeIndex start_type, double horizon,
                        RngStream& rng, double grid_step) {
  if (horizon <= 0.0) throw std::invalid_argument("sample_map_path: horizon <= 0");
  MapPath path;
  path.start_type = start_type;
  path.horizon = horizon;

  double t = 0.0;
  double x = 0.0;
  TypeIndex i = start_type;

  while (t < horizon) {
    const auto& l = spec.levy[static_cast<std::size_t>(i)];
    double trans_rate = -spec.q(i, i);
    double atom_rate = l.total_rate();

    // Memorylessness lets us redraw all clocks after every stored node.
    double dt_trans = rng.exponential(trans_rate);
    double dt_atom = rng.exponential(atom_rate);
    double dt_kill = rng.exponential(l.kill_rate);
    double dt_grid = (l.gauss_var > 0.0) ? grid_step
                                         : std::numeric_limits<double>::infinity();
    double dt_horizon = horizon - t;

    double dt = std::min({dt_trans, dt_atom, dt_kill, dt_grid, dt_horizon});
    enum class Event { Trans, Atom, Kill, Node } ev;
    if (dt == dt_trans) ev = Event::Trans;
    else if (dt == dt_atom) ev = Event::Atom;
    else if (dt == dt_kill) ev = Event::Kill;
    else ev = Event::Node;  // grid node or horizon

    PathSegment seg;
    seg.t0 = t;
    seg.t1 = t + dt;
    seg.x0 = x;
    seg.type = i;
    double incr = l.drift * dt;
    if (l.gauss_var > 0.0 && dt > 0.0)
      incr += std::sqrt(l.gauss_var * dt) * rng.normal();
    seg.incr = incr;
    seg.x1 = x + incr;
    path.segments.push_back(seg);
    t = seg.t1;
    x = seg.x1;

    if (ev == Event::Kill) {
      path.killed = true;
      path.kill_time = t;
      break;
    }
    if (ev == Event::Atom) {
      std::vector<double> weights(l.atoms.size());
      for (std::size_t k = 0; k < l.atoms.size(); ++k) weights[k] = l.atoms[k].weight;
      const auto& a = l.atoms[rng.categorical(weights)];
      PathJump j;
      j.time = t;
      j.pre_value = x;
      j.size = a.size;
      j.type_mark = a.type_mark;
      j.type_after = i;
      j.transition = false;
      path.jumps.push_back(j);
      x += a.size;
    } else if (ev == Event::Trans) {
      std::vector<double> weights(static_cast<std::size_t>(spec.n_types), 0.0);
      for (int j2 = 0; j2 < spec.n_types; ++j2)
        if (j2 != i) weights[static_cast<std::size_t>(j2)] = spec.q(i, j2);
      auto j_next = static_cast<TypeIndex>(rng.categorical(weights));
      PathJump j;
      j.time = t;
      j.pre_value = x;
      j.size = 0.0;
      j.type_mark = j_next;
      const auto& u = spec.trans[static_cast<std::size_t>(i)][static_cast<std::size_t>(j_next)];
      if (!u.trivial()) {
        std::vector<double> probs(u.atoms.size());
        for (std::size_t k = 0; k < u.atoms.size(); ++k) probs[k] = u.atoms[k].weight;
        const auto& a = u.atoms[rng.categorical(probs)];
        j.size = a.size;
        j.type_mark = a.type_mark;
      }
      j.type_after = j_next;
      j.transition = true;
      path.jumps.push_back(j);
      x += j.size;
      i = j_next;
    }
    // Event::Node: nothing extra — the stored segment boundary is the node.
  }
  return path;
}

LaplaceMatrixEstimate empirical_laplace_matrix(const MapSpec& spec, double z,
                                               double t, std::size_t reps,
                                               RngStream& rng) {
  if (reps < 1000) throw std::invalid_argument("empirical_laplace_matrix: reps < 1000");
  const int n = spec.n_types;
  LaplaceMatrixEstimate out;
  out.mean = Matrix::Zero(n, n);
  out.se = Matrix::Zero(n, n);
  out.exact = expm(matrix_exponent(spec, z) * t);

  for (int i = 0; i < n; ++i) {
    RngStream type_stream = rng.child(static_cast<std::uint64_t>(i));
    std::vector<KahanSum> sums(static_cast<std::size_t>(n));
    std::vector<KahanSum> sq(static_cast<std::size_t>(n));
    for (std::size_t r = 0; r < reps; ++r) {
      RngStream path_rng = type_stream.child(r);
      MapPath p = sample_map_path(spec, i, t, path_rng);
      if (p.killed) continue;  // killed paths contribute zero to every entry
      double val = std::exp(z * p.end_value());
      auto j = static_cast<std::size_t>(p.end_type());
      sums[j].add(val);
      sq[j].add(val * val);
    }
    for (int j = 0; j < n; ++j) {
      double m = sums[static_cast<std::size_t>(j)].value() / static_cast<double>(reps);
      double m2 = sq[static_cast<std::size_t>(j)].value() / static_cast<double>(reps);
      out.mean(i, j) = m;
      double var = std::max(0.0, m2 - m * m);
      out.se(i, j) = std::sqrt(var / static_cast<double>(reps));
    }
  }
  return out;
}

WaldCheck wald_martingale_check(const MapSpec& spec, TypeIndex start_type,
                                double gamma, double t, std::size_t reps,
                                RngStream& rng) {
  Spectral sd = spectral_data(spec, gamma);
  KahanSum sum, sq;
  for (std::size_t r = 0; r < reps; ++r) {
    RngStream path_rng = rng.child(r);
    MapPath p = sample_map_path(spec, start_type, t, path_rng);
    double val = 0.0;
    if (!p.killed) {
      val = sd.w(p.end_type()) / sd.w(start_type) *
            std::exp(gamma * p.end_value() - t * sd.chi);
    }
    sum.add(val);
    sq.add(val * val);
  }
  WaldCheck out;
  out.mean = sum.value() / static_cast<double>(reps);
  double m2 = sq.value() / static_cast<double>(reps);
  double var = std::max(0.0, m2 - out.mean * out.mean);
  out.se = std::sqrt(var / static_cast<double>(reps));
  return out;
}

}  // namespace gfmap
