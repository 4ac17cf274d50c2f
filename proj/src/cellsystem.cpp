#include "gfmap/cellsystem.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace gfmap {

namespace {

// Stream-label namespaces inside one cell's stream: path chunks use small
// labels, child cells use an offset so the two never collide.
constexpr std::uint64_t kChildLabelBase = 1u << 20;

struct ChildSeed {
  double size = 0.0;
  TypeIndex type = 0;
  double birth = 0.0;  // absolute time; unused by the genealogy simulator
};

}  // namespace

double GenealogyStats::martingale(std::size_t p, int n) const {
  auto g = static_cast<std::size_t>(n + 1);
  return g < mass[p].size() ? mass[p][g] : 0.0;
}

double GenealogyStats::martingale_corrected(std::size_t p, int n) const {
  double out = martingale(p, n);
  for (std::size_t g = 0; g <= static_cast<std::size_t>(n + 1) && g < stub[p].size(); ++g)
    out += stub[p][g];
  return out;
}

GenealogyStats simulate_genealogy(const MapSpec& spec, double x, TypeIndex i,
                                  const SimControls& controls,
                                  const std::vector<WeightPair>& pairs,
                                  RngStream rng) {
  const auto np = pairs.size();
  const auto ngen = static_cast<std::size_t>(controls.max_generation) + 1;
  GenealogyStats stats;
  stats.mass.assign(np, std::vector<double>(ngen, 0.0));
  stats.stub.assign(np, std::vector<double>(ngen, 0.0));
  stats.cells_per_generation.assign(ngen, 0);

  struct Item {
    int gen;
    double size;
    TypeIndex type;
    RngStream rng;
  };
  std::deque<Item> queue;
  queue.push_back({0, x, i, rng});
  std::size_t processed = 0;

  auto add_mass = [&](std::vector<std::vector<double>>& dst, int gen, double size,
                      TypeIndex type) {
    for (std::size_t p = 0; p < np; ++p)
      dst[p][static_cast<std::size_t>(gen)] +=
          pairs[p].v(type) * std::pow(size, pairs[p].omega);
  };

  while (!queue.empty()) {
    Item cell = queue.front();
    queue.pop_front();
    ++processed;
    stats.cells_per_generation[static_cast<std::size_t>(cell.gen)] += 1;
    add_mass(stats.mass, cell.gen, cell.size, cell.type);
    if (cell.gen >= controls.max_generation) continue;

    if (processed > controls.max_cells) {
      // Budget: stop expanding; the cell's whole future is a stub.
      stats.budget_exhausted = true;
      add_mass(stats.stub, cell.gen + 1, cell.size, cell.type);
      continue;
    }

    // Walk the cell's MAP until its size leaves [min_size, inf).
    double log_floor = std::log(controls.min_size / cell.size);
    double xi = 0.0;
    TypeIndex type = cell.type;
    std::uint64_t child_count = 0;
    bool stopped_clean = false;  // killed => mass legitimately disappears
    for (int it = 0; it < controls.max_chunks; ++it) {
      RngStream chunk_rng = cell.rng.child(static_cast<std::uint64_t>(it));
      MapPath p = sample_map_path(spec, type, controls.chunk, chunk_rng);
      for (const auto& j : p.jumps) {
        if (j.size >= 0.0) continue;
        double child = cell.size * std::exp(xi + j.pre_value) * -std::expm1(j.size);
        if (child >= controls.min_size) {
          if (cell.gen + 1 < controls.max_generation) {
            queue.push_back({cell.gen + 1, child, j.type_mark,
                             cell.rng.child(kChildLabelBase + child_count)});
          } else {
            // Terminal generation: counts in mass but is not expanded.
            stats.cells_per_generation[static_cast<std::size_t>(cell.gen + 1)] += 1;
            add_mass(stats.mass, cell.gen + 1, child, j.type_mark);
          }
        } else {
          add_mass(stats.stub, cell.gen + 1, child, j.type_mark);
        }
        ++child_count;
      }
      xi += p.end_value();
      type = p.end_type();
      if (p.killed) {
        stopped_clean = true;
        break;
      }
      if (xi < log_floor) break;
    }
    if (!stopped_clean) {
      // Stopped by size cutoff (or chunk budget): the expected weighted mass
      // of all future descendants at any later generation equals the current
      // weighted size, so it goes into the ledger at gen+1.
      add_mass(stats.stub, cell.gen + 1, cell.size * std::exp(xi), type);
    }
  }
  return stats;
}

MeanSe assumption_h_estimate(const MapSpec& spec, double x, TypeIndex i,
                             const SimControls& controls, const WeightPair& pair,
                             std::size_t reps, RngStream& rng) {
  std::vector<double> vals(reps, 0.0);
  SimControls c = controls;
  c.max_generation = 1;  // only the first generation matters
  for (std::size_t r = 0; r < reps; ++r) {
    // Like simulate_genealogy but weighting each first-generation child by
    // v size^omega log(size).
    RngStream cell_rng = rng.child(r);
    double log_floor = std::log(c.min_size / x);
    double xi = 0.0;
    TypeIndex type = i;
    double acc = 0.0;
    for (int it = 0; it < c.max_chunks; ++it) {
      RngStream chunk_rng = cell_rng.child(static_cast<std::uint64_t>(it));
      MapPath p = sample_map_path(spec, type, c.chunk, chunk_rng);
      for (const auto& j : p.jumps) {
        if (j.size >= 0.0) continue;
        double child = x * std::exp(xi + j.pre_value) * -std::expm1(j.size);
        acc += pair.v(j.type_mark) * std::pow(child, pair.omega) * std::log(child);
      }
      xi += p.end_value();
      type = p.end_type();
      if (p.killed || xi < log_floor) break;
    }
    vals[r] = acc;
  }
  return mean_se(vals);
}

MartingaleLimitSamples martingale_limit_samples(const MapSpec& spec, double x,
                                                TypeIndex i, const WeightPair& pair,
                                                const SimControls& controls,
                                                std::size_t reps, RngStream& rng) {
  MartingaleLimitSamples out;
  out.values.resize(reps);
  out.stub_share.resize(reps);
  const int n = controls.max_generation - 1;
  for (std::size_t r = 0; r < reps; ++r) {
    GenealogyStats stats = simulate_genealogy(spec, x, i, controls, {pair}, rng.child(r));
    double raw = stats.martingale(0, n);
    double corrected = stats.martingale_corrected(0, n);
    out.values[r] = corrected;
    out.stub_share[r] = corrected > 0.0 ? (corrected - raw) / corrected : 0.0;
  }
  return out;
}

namespace {

void append_chunk(MapPath& dst, const MapPath& chunk, double t_off, double x_off) {
  for (auto s : chunk.segments) {
    s.t0 += t_off;
    s.t1 += t_off;
    s.x0 += x_off;
    s.x1 += x_off;
    dst.segments.push_back(s);
  }
  for (auto j : chunk.jumps) {
    j.time += t_off;
    j.pre_value += x_off;
    dst.jumps.push_back(j);
  }
  dst.killed = chunk.killed;
  if (chunk.killed) dst.kill_time = chunk.kill_time + t_off;
}

}  // namespace

CellTree simulate_tree(const MapSpec& spec, double x, TypeIndex i, double alpha,
                       const SimControls& controls, RngStream rng) {
  CellTree tree;
  tree.x0 = x;
  tree.root_type = i;
  tree.alpha = alpha;
  tree.controls = controls;

  struct Item {
    int parent;
    int gen;
    int rank;
    double birth;
    double size;
    TypeIndex type;
    RngStream rng;
  };
  std::deque<Item> queue;
  queue.push_back({-1, 0, 0, 0.0, x, i, rng});

  while (!queue.empty()) {
    Item item = queue.front();
    queue.pop_front();
    if (tree.cells.size() >= controls.max_cells) {
      tree.budget_exhausted = true;
      tree.stubs.push_back({item.gen + 1, item.size, item.type});
      continue;
    }

    CellRecord cell;
    cell.parent = item.parent;
    cell.generation = item.gen;
    cell.child_rank = item.rank;
    cell.birth = item.birth;
    cell.size0 = item.size;
    cell.type0 = item.type;

    // Assemble the cell's MAP path chunk by chunk until a stop condition.
    MapPath combined;
    combined.start_type = item.type;
    double t_off = 0.0, x_off = 0.0;
    TypeIndex type = item.type;
    double log_floor = std::log(controls.min_size / item.size);
    double clock_target =
        std::isfinite(controls.horizon)
            ? (controls.horizon - item.birth) * std::pow(item.size, -alpha)
            : std::numeric_limits<double>::infinity();
    double clock_acc = 0.0;
    cell.end = CellEnd::Budget;
    for (int it = 0; it < controls.max_chunks; ++it) {
      RngStream chunk_rng = item.rng.child(static_cast<std::uint64_t>(it));
      MapPath p = sample_map_path(spec, type, controls.chunk, chunk_rng, controls.grid_step);
      append_chunk(combined, p, t_off, x_off);
      SsmpPath sp(p, 1.0, alpha);
      clock_acc += std::exp(alpha * x_off) * sp.clock_at(p.end_time());
      t_off += p.end_time();
      x_off += p.end_value();
      type = p.end_type();
      if (p.killed) {
        cell.end = CellEnd::Killed;
        break;
      }
      if (x_off < log_floor) {
        cell.end = CellEnd::MinSize;
        break;
      }
      if (clock_acc >= clock_target) {
        cell.end = CellEnd::Horizon;
        break;
      }
    }
    combined.horizon = t_off;
    cell.path = SsmpPath(combined, item.size, alpha);
    cell.end_time = item.birth + cell.path.covered_time();
    cell.end_value = item.size * std::exp(x_off);
    cell.end_type = type;
    if (cell.end == CellEnd::MinSize || cell.end == CellEnd::Budget) {
      // Ledger entry for the cell's unsimulated descendants (see the
      // genealogy simulator for the unbiasedness argument).
      tree.stubs.push_back({item.gen + 1, cell.end_value, cell.end_type});
    }

    // Children: negative jumps of the size process.
    std::vector<ChildSeed> seeds;
    for (const auto& j : cell.path.jumps()) {
      if (j.delta >= 0.0) continue;
      ChildSeed s;
      s.size = -j.delta;
      s.type = j.type_mark;
      s.birth = item.birth + j.time;
      seeds.push_back(s);
    }
    // Rank by descending initial size (ties: earlier birth first; the jump
    // enumeration order is already deterministic from the seed).
    std::stable_sort(seeds.begin(), seeds.end(), [](const ChildSeed& a, const ChildSeed& b) {
      if (a.size != b.size) return a.size > b.size;
      return a.birth < b.birth;
    });

    int my_index = static_cast<int>(tree.cells.size());
    tree.cells.push_back(std::move(cell));

    int rank = 0;
    for (const auto& s : seeds) {
      ++rank;
      if (s.birth > controls.horizon) continue;  // never visible below the horizon
      if (s.size < controls.min_size) {
        tree.stubs.push_back({item.gen + 1, s.size, s.type});
        continue;
      }
      if (item.gen + 1 > controls.max_generation) {
        tree.stubs.push_back({item.gen + 1, s.size, s.type});
        continue;
      }
      queue.push_back({my_index, item.gen + 1, rank, s.birth, s.size, s.type,
                       item.rng.child(kChildLabelBase + static_cast<std::uint64_t>(rank))});
    }
  }

  // Children indices.
  for (int c = 0; c < static_cast<int>(tree.cells.size()); ++c) {
    int p = tree.cells[static_cast<std::size_t>(c)].parent;
    if (p >= 0) tree.cells[static_cast<std::size_t>(p)].children.push_back(c);
  }
  return tree;
}

double genealogical_martingale(const CellTree& tree, const WeightPair& pair, int n,
                               bool corrected) {
  double acc = 0.0;
  for (const auto& c : tree.cells) {
    if (c.generation == n + 1)
      acc += pair.v(c.type0) * std::pow(c.size0, pair.omega);
  }
  if (corrected) {
    for (const auto& s : tree.stubs) {
      if (s.gen_min <= n + 1) acc += pair.v(s.type) * std::pow(s.size, pair.omega);
    }
  }
  return acc;
}

std::vector<Particle> snapshot(const CellTree& tree, double t) {
  if (t > tree.controls.horizon)
    throw std::invalid_argument("snapshot: t beyond the simulated horizon");
  std::vector<Particle> out;
  for (int idx = 0; idx < static_cast<int>(tree.cells.size()); ++idx) {
    const auto& c = tree.cells[static_cast<std::size_t>(idx)];
    if (t < c.birth) continue;
    double t_rel = t - c.birth;
    auto q = c.path.query(t_rel);
    if (q) {
      out.push_back({q->first, q->second, c.generation, idx});
      continue;
    }
    // Beyond the stored trajectory.
    if (c.end == CellEnd::Killed) continue;  // dead
    if (c.end == CellEnd::MinSize || c.end == CellEnd::Budget) {
      // alpha <= 0: a tiny cell's clock runs ever slower, freeze it at the
      // stopped value (contributes O(min_size^omega)); alpha > 0: the cell
      // dies within O(min_size^alpha) of the stop, treat it as dead.
      if (tree.alpha <= 0.0)
        out.push_back({c.end_value, c.end_type, c.generation, idx});
      continue;
    }
    // CellEnd::Horizon with t <= horizon can only miss by clock rounding;
    // report the end state.
    out.push_back({c.end_value, c.end_type, c.generation, idx});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Particle& a, const Particle& b) { return a.size > b.size; });
  return out;
}

double temporal_martingale(const std::vector<Particle>& snap, const WeightPair& pair) {
  KahanSum acc;
  for (const auto& p : snap) acc.add(pair.v(p.type) * std::pow(p.size, pair.omega));
  return acc.value();
}

double empirical_measure(const std::vector<Particle>& snap, double t, double alpha,
                         const WeightPair& pair_minus,
                         const std::function<double(double, TypeIndex)>& f) {
  KahanSum acc;
  double scale = std::pow(t, -1.0 / alpha);
  for (const auto& p : snap)
    acc.add(pair_minus.v(p.type) * std::pow(p.size, pair_minus.omega) *
            f(scale * p.size, p.type));
  return acc.value();
}

}  // namespace gfmap
