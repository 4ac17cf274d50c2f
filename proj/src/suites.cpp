#include "gfmap/suites.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gfmap/cellsystem.hpp"
#include "gfmap/cumulants.hpp"
#include "gfmap/fixtures.hpp"
#include "gfmap/lamperti.hpp"
#include "gfmap/map_path.hpp"
#include "gfmap/parallel.hpp"
#include "gfmap/renewal.hpp"
#include "gfmap/spectral.hpp"
#include "gfmap/spine.hpp"

namespace gfmap {

namespace {

using nlohmann::json;

// Calibrated constants for the shipped M2 fixture, frozen from a calibration
// run of this library's own oracles (regression-tested in the unit suite).
namespace baseline {
constexpr int kDegeneracyGeneration = 10;  // pilot generation for the upper-martingale median
// Decade of t for the decay fit: calibrated against the spine survival curve
// P(I(alpha xihat) > t), whose local slope only settles near the asymptotic
// value for t beyond ~5; earlier decades are visibly pre-asymptotic.
constexpr double kTemporalTLo = 5.623;
constexpr double kTemporalTHi = 56.23;
// Homogeneity index for the rho_t suite. With alpha = -1 typical fragment
// sizes scale like 1/t, so the min-size cutoff stays far below the bulk of
// the mass throughout [t1, t2]; steeper negative alphas freeze too slowly
// and shallower ones push the bulk into the cutoff before convergence.
constexpr double kEmpiricalAlpha = -1.0;
constexpr double kEmpiricalT1 = 60.0;      // "largest feasible" comparison times
constexpr double kEmpiricalT2 = 120.0;
}  // namespace baseline

std::size_t scaled(const SuiteParams& p, double base) {
  const double n = base * p.scale;
  return static_cast<std::size_t>(std::max(50.0, n));
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

void write_text(const SuiteParams& p, const std::string& file, const std::string& body) {
  if (p.out_dir.empty()) return;
  std::filesystem::create_directories(p.out_dir);
  std::ofstream out(std::filesystem::path(p.out_dir) / file, std::ios::binary);
  out << body;
}

struct Series {
  std::string color;
  std::vector<std::pair<double, double>> pts;
};

// Minimal static SVG scatter/line plot; log axes applied by the caller.
std::string svg_plot(const std::string& title, const std::vector<Series>& series,
                     const std::string& x_label, const std::string& y_label) {
  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& s : series) {
    for (auto [x, y] : s.pts) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  const double w = 640, h = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  auto sx = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * (w - ml - mr); };
  auto sy = [&](double y) { return h - mb - (y - y_lo) / (y_hi - y_lo) * (h - mt - mb); };
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\">\n"
      << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n"
      << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
      << "</text>\n"
      << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(h - mb) << "\" x2=\"" << fmt(w - mr)
      << "\" y2=\"" << fmt(h - mb) << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(ml)
      << "\" y2=\"" << fmt(h - mb) << "\" stroke=\"black\"/>\n"
      << "<text x=\"320\" y=\"470\" text-anchor=\"middle\" font-size=\"12\">" << x_label
      << " [" << fmt(x_lo) << ", " << fmt(x_hi) << "]</text>\n"
      << "<text x=\"16\" y=\"240\" font-size=\"12\" transform=\"rotate(-90 16 240)\" "
         "text-anchor=\"middle\">"
      << y_label << " [" << fmt(y_lo) << ", " << fmt(y_hi) << "]</text>\n";
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" points=\"";
    for (auto [x, y] : s.pts) out << fmt(sx(x)) << "," << fmt(sy(y)) << " ";
    out << "\"/>\n";
    for (auto [x, y] : s.pts)
      out << "<circle cx=\"" << fmt(sx(x)) << "\" cy=\"" << fmt(sy(y))
          << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

struct M2Env {
  MapSpec spec;
  AdmissiblePair lower, upper;
};

M2Env m2_env() {
  M2Env env;
  env.spec = fixtures::m2();
  auto pairs = find_admissible(env.spec);
  if (pairs.size() != 2) throw std::runtime_error("M2: expected two admissible roots");
  env.lower = pairs[0];
  env.upper = pairs[1];
  return env;
}

json pair_json(const AdmissiblePair& p) {
  json v = json::array();
  for (int k = 0; k < p.v.size(); ++k) v.push_back(p.v[k]);
  return json{{"omega", p.omega}, {"v", v}, {"residual", p.residual}};
}

}  // namespace

bool SuiteResult::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

json SuiteResult::to_json() const {
  json out;
  out["suite"] = name;
  out["pass"] = pass();
  out["checks"] = json::array();
  for (const auto& c : checks)
    out["checks"].push_back(json{{"name", c.name}, {"pass", c.pass}, {"details", c.details}});
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 1 — spectral identities.
SuiteResult suite_spectral(const SuiteParams& p) {
  SuiteResult out{"spectral", {}};
  const auto t_start = std::chrono::steady_clock::now();

  std::vector<std::pair<std::string, MapSpec>> specs;
  specs.emplace_back("m2", fixtures::m2());
  RngStream rng(p.seed);
  RngStream spec_rng = rng.child(1);
  for (int k = 0; k < 3; ++k)
    specs.emplace_back("random" + std::to_string(k),
                       [&] { RngStream r = spec_rng.child(static_cast<std::uint64_t>(k)); return fixtures::random_spec(r); }());

  for (const auto& [name, spec] : specs) {
    double worst_resid = 0.0, chi_zero = std::abs(chi(spec, 0.0));
    double worst_convex = 0.0;
    std::vector<double> grid;
    std::vector<double> chis;
    for (int k = 0; k < 20; ++k) grid.push_back(-1.0 + 3.0 * k / 19.0);
    for (double z : grid) {
      const Matrix f = matrix_exponent(spec, z);
      const Spectral s = leading_eigenvalue(f);
      const double resid = (f * s.w - s.chi * s.w).lpNorm<Eigen::Infinity>();
      const double fnorm = f.lpNorm<Eigen::Infinity>();
      worst_resid = std::max(worst_resid, resid / std::max(1.0, fnorm));
      chis.push_back(s.chi);
    }
    for (std::size_t k = 1; k + 1 < chis.size(); ++k)
      worst_convex = std::min(worst_convex, chis[k + 1] - 2.0 * chis[k] + chis[k - 1]);

    const MapSpec dual = dual_spec(spec);
    const Vector pi = stationary_distribution(spec);
    double worst_dual = 0.0;
    for (double z : {-0.7, 0.3, 1.1}) {
      const Matrix lhs = matrix_exponent(dual, z);
      const Matrix f = matrix_exponent(spec, -z);
      Matrix rhs = f.transpose();
      for (int i = 0; i < rhs.rows(); ++i)
        for (int j = 0; j < rhs.cols(); ++j) rhs(i, j) *= pi(j) / pi(i);
      const double scale = std::max(1.0, f.lpNorm<Eigen::Infinity>());
      worst_dual = std::max(worst_dual, (lhs - rhs).lpNorm<Eigen::Infinity>() / scale);
    }

    double worst_tilt = 0.0;
    for (double gamma : {0.4, 1.0}) {
      const MapSpec tilted = tilt_spec(spec, gamma);
      const double chi_g = chi(spec, gamma);
      for (double z : {-0.5, 0.25, 0.8})
        worst_tilt = std::max(worst_tilt,
                              std::abs(chi(tilted, z) - (chi(spec, gamma + z) - chi_g)));
    }

    json d{{"eig_residual", worst_resid},
           {"chi_zero", chi_zero},
           {"convexity_min_second_diff", worst_convex},
           {"duality", worst_dual},
           {"tilt", worst_tilt}};
    out.checks.push_back({"eigen_residual_" + name, worst_resid < 1e-10, d});
    out.checks.push_back({"chi_zero_" + name, chi_zero < 1e-10, d});
    out.checks.push_back({"convexity_" + name, worst_convex > -1e-8, d});
    out.checks.push_back({"duality_" + name, worst_dual < 1e-12, d});
    out.checks.push_back({"tilt_" + name, worst_tilt < 1e-9, d});
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  // Wall-clock numbers are kept out of the details so artifacts stay
  // byte-identical across reruns.
  out.checks.push_back({"runtime_under_1s", secs < 1.0, json{{"budget_seconds", 1.0}}});

  if (!p.out_dir.empty()) {
    json art = out.to_json();
    write_text(p, "spectral.json", art.dump(2) + "\n");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Criteria 2-3 — Laplace-matrix MC and the Wald martingale.
SuiteResult suite_simulate_map(const SuiteParams& p) {
  SuiteResult out{"simulate-map", {}};
  const M2Env env = m2_env();
  const std::size_t reps = scaled(p, 1e5);
  RngStream rng(p.seed);

  struct LapTask {
    double z, t;
    LaplaceMatrixEstimate est;
  };
  std::vector<LapTask> lap;
  for (double z : {0.0, 0.5})
    for (double t : {0.5, 1.0}) lap.push_back({z, t, {}});
  RngStream lap_rng = rng.child(1);
  parallel_for(lap.size(), p.workers, [&](std::size_t k) {
    RngStream task_rng = lap_rng.child(k);
    lap[k].est = empirical_laplace_matrix(env.spec, lap[k].z, lap[k].t, reps, task_rng);
  });
  std::ostringstream csv;
  csv << "z,t,i,j,empirical,se,exact\n";
  for (const auto& task : lap) {
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double gap = std::abs(task.est.mean(i, j) - task.est.exact(i, j));
        worst = std::max(worst, gap / std::max(task.est.se(i, j), 1e-12));
        csv << fmt(task.z) << "," << fmt(task.t) << "," << i << "," << j << ","
            << fmt(task.est.mean(i, j)) << "," << fmt(task.est.se(i, j)) << ","
            << fmt(task.est.exact(i, j)) << "\n";
      }
    }
    out.checks.push_back({"laplace_z" + fmt(task.z) + "_t" + fmt(task.t), worst < 3.0,
                          json{{"worst_gap_in_se", worst}, {"reps", reps}}});
  }
  write_text(p, "laplace.csv", csv.str());

  struct WaldTask {
    double gamma, t;
    TypeIndex start;
    WaldCheck res;
  };
  std::vector<WaldTask> wald;
  for (double gamma : {env.lower.omega, env.upper.omega})
    for (double t : {0.5, 1.0, 2.0})
      for (TypeIndex i = 0; i < 2; ++i) wald.push_back({gamma, t, i, {}});
  RngStream wald_rng = rng.child(2);
  parallel_for(wald.size(), p.workers, [&](std::size_t k) {
    RngStream task_rng = wald_rng.child(k);
    wald[k].res =
        wald_martingale_check(env.spec, wald[k].start, wald[k].gamma, wald[k].t, reps, task_rng);
  });
  std::ostringstream wcsv;
  wcsv << "gamma,t,start,mean,se\n";
  for (const auto& task : wald) {
    const double gap = std::abs(task.res.mean - 1.0) / std::max(task.res.se, 1e-12);
    out.checks.push_back({"wald_g" + fmt(task.gamma) + "_t" + fmt(task.t) + "_i" +
                              std::to_string(task.start),
                          gap < 3.0,
                          json{{"mean", task.res.mean}, {"se", task.res.se}}});
    wcsv << fmt(task.gamma) << "," << fmt(task.t) << "," << task.start << ","
         << fmt(task.res.mean) << "," << fmt(task.res.se) << "\n";
  }
  write_text(p, "wald.csv", wcsv.str());
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 5 — admissibility and the spine exponent identities.
SuiteResult suite_exponents(const SuiteParams& p) {
  SuiteResult out{"exponents", {}};
  const M2Env env = m2_env();

  out.checks.push_back({"m2_residual_lower", env.lower.residual < 1e-9, pair_json(env.lower)});
  out.checks.push_back({"m2_residual_upper", env.upper.residual < 1e-9, pair_json(env.upper)});

  const auto binary = find_admissible(fixtures::binary_conservative());
  const bool binary_ok =
      binary.size() == 1 && std::abs(binary[0].omega - 1.0) < 1e-9 && binary[0].v.size() == 1;
  out.checks.push_back(
      {"binary_exact_root", binary_ok,
       binary.empty() ? json{{"roots", 0}} : pair_json(binary[0])});

  SpineExponent spine(env.spec, env.lower);
  const double gap = env.upper.omega - env.lower.omega;
  const double chi_at_gap = spine.chi_hat(gap);
  const double chi_at_zero = spine.chi_hat(0.0);
  out.checks.push_back({"two_exponent_identity", std::abs(chi_at_gap) < 1e-8,
                        json{{"chi_hat_at_gap", chi_at_gap},
                             {"chi_hat_at_zero", chi_at_zero},
                             {"gap", gap}}});

  // Mean identity for the martingale stopped at the root's first type change:
  // E_i[M(H)] = v_i, with children from negative jumps up to and including the
  // transition, plus the value right after the type change.
  const std::size_t reps = scaled(p, 1e5);
  RngStream rng(p.seed);
  int task = 0;
  for (const auto* pr : {&env.lower, &env.upper}) {
    const double omega = pr->omega;
    const Vector v = pr->v;
    for (TypeIndex i = 0; i < 2; ++i, ++task) {
      RngStream task_rng = rng.child(static_cast<std::uint64_t>(task));
      std::vector<double> vals(reps);
      parallel_for(reps, p.workers, [&](std::size_t r) {
        RngStream rr = task_rng.child(r);
        // Horizon long enough that missing the first transition has
        // probability below e^{-40}.
        const MapPath path = sample_map_path(env.spec, i, 40.0, rr);
        KahanSum m;
        bool stopped = false;
        for (const PathJump& jump : path.jumps) {
          if (jump.size < 0.0)
            m.add(v[jump.type_mark] *
                  std::pow(std::exp(jump.pre_value) * (-std::expm1(jump.size)), omega));
          if (jump.transition) {
            m.add(v[jump.type_after] * std::exp(omega * (jump.pre_value + jump.size)));
            stopped = true;
            break;
          }
        }
        if (!stopped && !path.killed)
          m.add(v[path.end_type()] * std::exp(omega * path.end_value()));
        vals[r] = m.value();
      });
      const MeanSe ms = mean_se(vals);
      const double gap_se = std::abs(ms.mean - v[i]) / std::max(ms.se, 1e-14);
      out.checks.push_back({"stopped_mean_omega" + fmt(omega) + "_i" + std::to_string(i),
                            gap_se < 3.0,
                            json{{"mean", ms.mean}, {"se", ms.se}, {"target", v[i]}}});
    }
  }

  if (!p.out_dir.empty()) write_text(p, "exponents.json", out.to_json().dump(2) + "\n");
  return out;
}

// ---------------------------------------------------------------------------
// Criteria 6-7 — genealogical martingale constancy and upper degeneracy.
SuiteResult suite_simulate_gf(const SuiteParams& p) {
  SuiteResult out{"simulate-gf", {}};
  const M2Env env = m2_env();
  const std::size_t trees = scaled(p, 1e4);
  const int n_max = 10;
  SimControls controls;
  controls.max_generation = n_max + 2;
  controls.min_size = 1e-3;
  const std::vector<WeightPair> pairs{{env.lower.omega, env.lower.v},
                                      {env.upper.omega, env.upper.v}};

  RngStream rng(p.seed);
  std::vector<std::vector<std::vector<double>>> m(
      2, std::vector<std::vector<double>>(static_cast<std::size_t>(n_max + 1)));
  for (auto& per_pair : m)
    for (auto& per_n : per_pair) per_n.resize(trees);
  std::vector<std::vector<double>> upper_raw(static_cast<std::size_t>(n_max + 1),
                                             std::vector<double>(trees));
  parallel_for(trees, p.workers, [&](std::size_t r) {
    GenealogyStats stats = simulate_genealogy(env.spec, 1.0, 0, controls, pairs, rng.child(r));
    for (int n = 0; n <= n_max; ++n) {
      m[0][static_cast<std::size_t>(n)][r] = stats.martingale_corrected(0, n);
      m[1][static_cast<std::size_t>(n)][r] = stats.martingale_corrected(1, n);
      upper_raw[static_cast<std::size_t>(n)][r] = stats.martingale(1, n);
    }
  });

  std::ostringstream csv;
  csv << "omega,n,mean,se,paired_diff,paired_se\n";
  std::vector<Series> trace{{"#1f77b4", {}}, {"#d62728", {}}};
  for (int pr = 0; pr < 2; ++pr) {
    const double target = pr == 0 ? env.lower.v[0] : env.upper.v[0];
    double worst_abs = 0.0, worst_paired = 0.0;
    for (int n = 0; n <= n_max; ++n) {
      const auto& mn = m[static_cast<std::size_t>(pr)][static_cast<std::size_t>(n)];
      const auto& m0 = m[static_cast<std::size_t>(pr)][0];
      const MeanSe ms = mean_se(mn);
      std::vector<double> diff(trees);
      for (std::size_t r = 0; r < trees; ++r) diff[r] = mn[r] - m0[r];
      const MeanSe ds = mean_se(diff);
      worst_abs = std::max(worst_abs, std::abs(ms.mean - target) / std::max(ms.se, 1e-14));
      if (n > 0)
        worst_paired = std::max(worst_paired, std::abs(ds.mean) / std::max(ds.se, 1e-14));
      csv << fmt(pr == 0 ? env.lower.omega : env.upper.omega) << "," << n << ","
          << fmt(ms.mean) << "," << fmt(ms.se) << "," << fmt(ds.mean) << "," << fmt(ds.se)
          << "\n";
      trace[static_cast<std::size_t>(pr)].pts.emplace_back(n, ms.mean / target);
    }
    if (pr == 0) {
      // The lower martingale is uniformly integrable: gate on the absolute
      // level E[M(n)] = v_i as well as on constancy.
      out.checks.push_back({"constancy_lower", worst_abs < 3.0 && worst_paired < 3.0,
                            json{{"worst_abs_gap_in_se", worst_abs},
                                 {"worst_paired_gap_in_se", worst_paired},
                                 {"trees", trees}}});
    } else {
      // The upper martingale has tail index Cramer/omega_+ barely above 1, so
      // its mean is carried by astronomically rare paths and no unbiased
      // simulation can resolve the absolute level; constancy in n is tested
      // through the paired increments, which have mean zero.
      out.checks.push_back({"constancy_upper", worst_paired < 3.0,
                            json{{"worst_paired_gap_in_se", worst_paired},
                                 {"worst_abs_gap_in_se", worst_abs},
                                 {"trees", trees}}});
    }
  }
  write_text(p, "genealogy_trace.csv", csv.str());
  write_text(p, "genealogy_trace.svg",
             svg_plot("Genealogical martingale mean / target vs generation", trace, "n",
                      "normalized mean"));

  const int pilot = std::min(baseline::kDegeneracyGeneration, n_max);
  const double med = quantile(upper_raw[static_cast<std::size_t>(pilot)], 0.5);
  const double bound = 0.1 * env.upper.v[0];
  out.checks.push_back({"upper_martingale_degeneracy", med < bound,
                        json{{"median", med}, {"bound", bound}, {"generation", pilot}}});
  std::ostringstream dcsv;
  dcsv << "n,median_over_target\n";
  for (int n = 0; n <= n_max; ++n)
    dcsv << n << ","
         << fmt(quantile(upper_raw[static_cast<std::size_t>(n)], 0.5) / env.upper.v[0]) << "\n";
  write_text(p, "degeneracy.csv", dcsv.str());
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 9 — spine equivalence.
SuiteResult suite_spine_check(const SuiteParams& p) {
  SuiteResult out{"spine-check", {}};
  const M2Env env = m2_env();
  const std::size_t reps = scaled(p, 1e4);
  const double alpha = 0.5, t = 1.0;
  SimControls controls;
  controls.horizon = t;
  controls.min_size = 1e-3;
  controls.max_generation = 60;

  RngStream rng(p.seed);
  RngStream eq_rng = rng.child(1);
  const SpineEquivalence eq = spine_equivalence_test(env.spec, env.lower, 1.0, 0, alpha, t,
                                                     reps, controls, eq_rng, p.workers);
  for (std::size_t j = 0; j < eq.ks_per_type.size(); ++j) {
    const KsResult& ks = eq.ks_per_type[j];
    out.checks.push_back({"spine_ks_type" + std::to_string(j), ks.p_value > 0.01,
                          json{{"statistic", ks.statistic},
                               {"p_value", ks.p_value},
                               {"n_eff_a", ks.n_eff_a},
                               {"n_eff_b", ks.n_eff_b}}});
  }
  for (std::size_t k = 0; k < eq.moment_checks.size(); ++k) {
    const auto& mc = eq.moment_checks[k];
    const double gap = std::abs(mc[0] - mc[1]) / std::max(mc[2], 1e-14);
    out.checks.push_back({"many_to_one_f" + std::to_string(k), gap < 3.0,
                          json{{"tree_side", mc[0]}, {"spine_side", mc[1]}, {"se", mc[2]}}});
  }
  out.checks.push_back({"flagged_weight_share", eq.flagged_weight_share < 0.01,
                        json{{"share", eq.flagged_weight_share},
                             {"arm_a_alive", eq.arm_a_alive},
                             {"arm_b_alive", eq.arm_b_alive}}});

  RngStream rb_rng = rng.child(2);
  const RebuildCheck rb =
      rebuild_check(env.spec, env.lower, 1.0, 0, scaled(p, 4000), controls, rb_rng);
  for (std::size_t j = 0; j < rb.ks_per_type.size(); ++j) {
    const KsResult& ks = rb.ks_per_type[j];
    out.checks.push_back({"rebuild_ks_type" + std::to_string(j), ks.p_value > 0.01,
                          json{{"statistic", ks.statistic},
                               {"p_value", ks.p_value},
                               {"pooled", rb.pooled}}});
  }
  if (!p.out_dir.empty()) {
    // Histogram of the spine log-size at time t, per terminal type.
    const SpineExponent spine(env.spec, env.lower);
    const std::size_t hist_reps = scaled(p, 4000);
    RngStream hist_rng = rng.child(3);
    std::vector<std::vector<double>> logs(2);
    for (std::size_t r = 0; r < hist_reps; ++r) {
      RngStream rr = hist_rng.child(r);
      const auto val = direct_spine_value(spine, 1.0, 0, alpha, t, rr);
      if (val) logs[static_cast<std::size_t>(val->second)].push_back(std::log(val->first));
    }
    double lo = 0.0, hi = 0.0;
    for (const auto& v : logs)
      for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    const int bins = 40;
    const double width = (hi > lo) ? (hi - lo) / bins : 1.0;
    std::vector<Series> hist = {{"#1f77b4", {}}, {"#d62728", {}}};
    std::ostringstream hcsv;
    hcsv << "bin_left,count_type0,count_type1\n";
    for (int b = 0; b < bins; ++b) {
      const double left = lo + b * width;
      std::array<int, 2> cnt{0, 0};
      for (int j = 0; j < 2; ++j)
        for (double x : logs[static_cast<std::size_t>(j)])
          if (x >= left && x < left + width) ++cnt[static_cast<std::size_t>(j)];
      for (int j = 0; j < 2; ++j)
        hist[static_cast<std::size_t>(j)].pts.emplace_back(left + width / 2.0, cnt[j]);
      hcsv << fmt(left) << "," << cnt[0] << "," << cnt[1] << "\n";
    }
    write_text(p, "spine_hist.csv", hcsv.str());
    write_text(p, "spine_hist.svg",
               svg_plot("Spine log-size histogram at t=1 (by terminal type)", hist,
                        "log size", "count"));
    write_text(p, "spine.json", out.to_json().dump(2) + "\n");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Criteria 4 and 8 — exponential-functional oracles and the limit tail.
SuiteResult suite_tails(const SuiteParams& p) {
  SuiteResult out{"tails", {}};
  const M2Env env = m2_env();
  RngStream rng(p.seed);

  {
    // Dufresne: I(2 xi) for xi a Brownian motion with drift -mu has mean
    // 1/(2(mu-1)).
    const double mu = 1.5;
    const MapSpec dspec = fixtures::brownian_drift(mu);
    const std::size_t reps = scaled(p, 1e6);
    RngStream arm = rng.child(1);
    std::vector<double> vals(reps);
    parallel_for(reps, p.workers, [&](std::size_t r) {
      RngStream rr = arm.child(r);
      vals[r] = sample_exp_functional(dspec, 0, 2.0, 1e-6, rr, 0.01).value;
    });
    const MeanSe ms = mean_se(vals);
    const double target = 1.0 / (2.0 * (mu - 1.0));
    const double rel = std::abs(ms.mean - target) / target;
    // I(2 xi) here sits in the alpha = mu = 1.5 stable domain, so the sample
    // mean converges like n^{-1/3}: the 2% budget is calibrated to the full
    // 1e6 replicas and widens accordingly on reduced-scale runs.
    const double tol = 0.02 * std::pow(1e6 / static_cast<double>(reps), 1.0 / 3.0);
    out.checks.push_back({"dufresne_mean", rel < tol,
                          json{{"mean", ms.mean}, {"se", ms.se}, {"target", target},
                               {"rel_error", rel}, {"tolerance", tol}, {"reps", reps}}});
  }

  {
    // The Cramér tail of J sets in only at probabilities far below plain
    // Monte Carlo reach on this fixture (the body of J hides the polynomial
    // regime until ~1e-12), so each tail point P(J > t_m) is importance
    // sampled with a first-passage tilt at level y_m = log t_m - 1.5 and the
    // exponent is the log-log regression slope across the level ladder.
    const double cramer = cramer_number(env.spec, 0.1, 32.0);
    const Vector w = spectral_data(env.spec, cramer).w;
    const MapSpec tilted = tilt_spec(env.spec, cramer);
    const std::size_t per_level = scaled(p, 14000);
    const int n_levels = 7;
    RngStream arm = rng.child(2);
    std::vector<double> log_t, log_p;
    json levels = json::array();
    std::ostringstream csv;
    csv << "level,t,prob,se\n";
    for (int m = 0; m < n_levels; ++m) {
      const double y = 2.0 + m;
      const double t = std::exp(y + 1.5);
      RngStream lvl = arm.child(static_cast<std::uint64_t>(m));
      std::vector<double> contrib(per_level);
      parallel_for(per_level, p.workers, [&](std::size_t r) {
        RngStream rr = lvl.child(r);
        const TailCrossSample s = sample_weighted_exp_functional_crossing(
            env.spec, tilted, 0, cramer, w, y, 1e-6, rr);
        contrib[r] = s.value > t ? s.weight : 0.0;
      });
      const MeanSe ms = mean_se(contrib);
      levels.push_back(json{{"level", y}, {"t", t}, {"prob", ms.mean}, {"se", ms.se}});
      csv << fmt(y) << "," << fmt(t) << "," << fmt(ms.mean) << "," << fmt(ms.se) << "\n";
      log_t.push_back(std::log(t));
      log_p.push_back(std::log(std::max(ms.mean, 1e-300)));
    }
    const double slope = ols_slope(log_t, log_p);
    const bool ok = std::abs(-slope - cramer) < 0.15 * cramer;
    out.checks.push_back({"weighted_functional_cramer_tail", ok,
                          json{{"cramer", cramer}, {"slope", slope},
                               {"levels", levels},
                               {"samples", per_level * n_levels}}});
    write_text(p, "cramer_tail.csv", csv.str());
  }

  {
    const std::size_t trees = scaled(p, 1e5);
    SimControls controls;
    controls.max_generation = 25;
    controls.min_size = 1e-3;
    const WeightPair wp{env.lower.omega, env.lower.v};
    RngStream arm = rng.child(4);
    std::vector<double> vals(trees);
    parallel_for(trees, p.workers, [&](std::size_t r) {
      GenealogyStats stats = simulate_genealogy(env.spec, 1.0, 0, controls, {wp}, arm.child(r));
      vals[r] = stats.martingale_corrected(0, controls.max_generation - 1);
    });
    const double ratio = env.upper.omega / env.lower.omega;
    RngStream hill_rng = rng.child(5);
    const TailVerdict verdict = tail_verify(vals, ratio, hill_rng);
    json hills = json::array();
    for (const auto& h : verdict.hill)
      hills.push_back(json{{"k_frac", h.k_frac}, {"alpha", h.alpha},
                           {"ci_lo", h.ci_lo}, {"ci_hi", h.ci_hi}});
    out.checks.push_back({"limit_martingale_tail", verdict.within_15pct,
                          json{{"expected", ratio}, {"hill", hills},
                               {"rank_slope", verdict.rank_slope},
                               {"in_ci", verdict.in_ci}, {"trees", trees}}});

    // Moment probes: beta-moments stable below omega_+/omega_-, blow-up above
    // (half-sample vs full-sample growth and max-term dominance).
    auto probe = [&](double beta) {
      KahanSum half, full;
      double top = 0.0;
      for (std::size_t r = 0; r < vals.size(); ++r) {
        const double term = std::pow(vals[r], beta);
        full.add(term);
        if (r < vals.size() / 2) half.add(term);
        top = std::max(top, term);
      }
      const double mean_half = half.value() / static_cast<double>(vals.size() / 2);
      const double mean_full = full.value() / static_cast<double>(vals.size());
      return json{{"beta", beta},
                  {"growth", mean_full / mean_half},
                  {"top_share", top / full.value()}};
    };
    // Stable probes sit below ratio/2 so the sampled beta-moments have
    // finite variance; closer to the critical exponent the half-vs-full
    // comparison is dominated by single extreme terms even when the moment
    // itself is finite.
    const json low1 = probe(0.3 * ratio), low2 = probe(0.45 * ratio),
               high = probe(1.2 * ratio);
    const bool stable = std::abs(std::log(low1["growth"].get<double>())) < std::log(1.4) &&
                        std::abs(std::log(low2["growth"].get<double>())) < std::log(1.4);
    // Above the critical exponent the term distribution has tail index
    // ratio/beta < 1, so max/sum converges to a nondegenerate law with mean
    // about 1 - ratio/beta ~ 0.17; the finite-variance probes sit at ~1e-3.
    // A 0.05 cut separates the two regimes with wide margin on both sides.
    const bool blowup = high["top_share"].get<double>() > 0.05 ||
                        high["growth"].get<double>() > 1.5 ||
                        high["growth"].get<double>() < 1.0 / 1.5;
    out.checks.push_back({"beta_moment_stability", stable, json{{"low1", low1}, {"low2", low2}}});
    out.checks.push_back({"beta_moment_blowup", blowup, json{{"high", high}}});

    if (!p.out_dir.empty()) {
      std::vector<double> sorted = vals;
      std::sort(sorted.begin(), sorted.end(), std::greater<>());
      const std::size_t top_n = std::min<std::size_t>(sorted.size(), 2000);
      Series rankplot{"#1f77b4", {}};
      std::ostringstream csv;
      csv << "rank,value\n";
      for (std::size_t k = 0; k < top_n; ++k) {
        csv << (k + 1) << "," << fmt(sorted[k]) << "\n";
        rankplot.pts.emplace_back(std::log10(sorted[k]),
                                  std::log10(static_cast<double>(k + 1)));
      }
      write_text(p, "mtail.csv", csv.str());
      write_text(p, "mtail_loglog.svg",
                 svg_plot("Limit martingale tail (log10 rank vs log10 value)", {rankplot},
                          "log10 value", "log10 rank"));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Criteria 10-11 — temporal decay and the empirical measure.
SuiteResult suite_empirical(const SuiteParams& p) {
  SuiteResult out{"empirical", {}};
  const M2Env env = m2_env();
  const WeightPair lower{env.lower.omega, env.lower.v};
  RngStream rng(p.seed);

  {
    // Decay of E[M^-_t] for alpha > 0; alpha chosen so the expected log-log
    // slope is -2.
    const double gap = env.upper.omega - env.lower.omega;
    const double alpha = gap / 2.0;
    const std::size_t trees = scaled(p, 10000);
    std::vector<double> ts;
    for (int k = 0; k < 6; ++k)
      ts.push_back(baseline::kTemporalTLo *
                   std::pow(baseline::kTemporalTHi / baseline::kTemporalTLo, k / 5.0));
    SimControls controls;
    controls.horizon = ts.back();
    controls.min_size = 1e-3;
    controls.max_generation = 300;
    RngStream arm = rng.child(1);
    std::vector<std::vector<double>> mt(ts.size(), std::vector<double>(trees));
    parallel_for(trees, p.workers, [&](std::size_t r) {
      const CellTree tree = simulate_tree(env.spec, 1.0, 0, alpha, controls, arm.child(r));
      for (std::size_t k = 0; k < ts.size(); ++k)
        mt[k][r] = temporal_martingale(snapshot(tree, ts[k]), lower);
    });
    std::vector<double> log_t, log_mean;
    std::ostringstream csv;
    csv << "t,mean,se\n";
    Series decay{"#1f77b4", {}};
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const MeanSe ms = mean_se(mt[k]);
      csv << fmt(ts[k]) << "," << fmt(ms.mean) << "," << fmt(ms.se) << "\n";
      if (ms.mean > 0.0) {  // at reduced scale the last points can be empty
        log_t.push_back(std::log(ts[k]));
        log_mean.push_back(std::log(ms.mean));
        decay.pts.emplace_back(std::log10(ts[k]), std::log10(ms.mean));
      }
    }
    const double slope = log_t.size() >= 4 ? ols_slope(log_t, log_mean) : 0.0;
    const double expected = -gap / alpha;
    out.checks.push_back({"temporal_decay_slope",
                          std::abs(slope - expected) < 0.2 * std::abs(expected),
                          json{{"slope", slope}, {"expected", expected},
                               {"alpha", alpha}, {"trees", trees}}});
    write_text(p, "temporal.csv", csv.str());
    write_text(p, "temporal_decay.svg",
               svg_plot("Mean temporal martingale decay (log10-log10)", {decay}, "log10 t",
                        "log10 mean"));
  }

  {
    // rho_t for alpha < 0: per-tree mass convergence and type marginals
    // against the dual-spine prediction.
    const double alpha = baseline::kEmpiricalAlpha;
    const double t1 = baseline::kEmpiricalT1, t2 = baseline::kEmpiricalT2;
    const std::size_t trees = scaled(p, 300);
    SimControls controls;
    controls.horizon = t2;
    controls.min_size = 3e-3;
    controls.max_generation = 200;
    controls.max_cells = 2'000'000;
    RngStream arm = rng.child(2);
    std::vector<double> mass1(trees), mass2(trees);
    std::vector<std::array<double, 2>> marg(trees);
    parallel_for(trees, p.workers, [&](std::size_t r) {
      const CellTree tree = simulate_tree(env.spec, 1.0, 0, alpha, controls, arm.child(r));
      const auto s1 = snapshot(tree, t1);
      const auto s2 = snapshot(tree, t2);
      mass1[r] = temporal_martingale(s1, lower);
      mass2[r] = temporal_martingale(s2, lower);
      for (TypeIndex j = 0; j < 2; ++j)
        marg[r][static_cast<std::size_t>(j)] = empirical_measure(
            s1, t1, alpha, lower, [j](double, TypeIndex jt) { return jt == j ? 1.0 : 0.0; });
    });
    KahanSum abs_gap, mean2;
    for (std::size_t r = 0; r < trees; ++r) {
      abs_gap.add(std::abs(mass1[r] - mass2[r]));
      mean2.add(mass2[r]);
    }
    const double mae = abs_gap.value() / static_cast<double>(trees);
    const double mean_limit = mean2.value() / static_cast<double>(trees);
    out.checks.push_back({"rho_mass_convergence", mae < 0.05 * mean_limit,
                          json{{"mae", mae}, {"mean_limit", mean_limit},
                               {"t1", t1}, {"t2", t2}, {"trees", trees}}});

    // Dual prediction of the type marginal: for the lower spine's dual MAP,
    // marginal_j is proportional to pihat_j E_j[1 / I(alpha xihat_dual)].
    SpineExponent spine(env.spec, env.lower);
    const MapSpec sdual = dual_spec(spine.spine_spec());
    const Vector pihat = stationary_distribution(spine.spine_spec());
    const std::size_t dual_reps = scaled(p, 4000);
    RngStream dual_rng = rng.child(3);
    std::array<double, 2> dual_marg{};
    for (TypeIndex j = 0; j < 2; ++j) {
      RngStream type_rng = dual_rng.child(static_cast<std::uint64_t>(j));
      std::vector<double> inv(dual_reps);
      parallel_for(dual_reps, p.workers, [&](std::size_t r) {
        RngStream rr = type_rng.child(r);
        inv[r] = 1.0 / sample_exp_functional(sdual, j, alpha, 1e-6, rr).value;
      });
      dual_marg[static_cast<std::size_t>(j)] = pihat[j] * mean_se(inv).mean;
    }
    const double dual_total = dual_marg[0] + dual_marg[1];
    std::array<double, 2> tree_marg{};
    for (std::size_t r = 0; r < trees; ++r) {
      tree_marg[0] += marg[r][0];
      tree_marg[1] += marg[r][1];
    }
    const double tree_total = tree_marg[0] + tree_marg[1];
    json detail = json::array();
    bool marg_ok = true;
    for (std::size_t j = 0; j < 2; ++j) {
      const double a = tree_marg[j] / tree_total;
      const double b = dual_marg[j] / dual_total;
      if (std::abs(a - b) > 0.15 * b) marg_ok = false;
      detail.push_back(json{{"type", j}, {"tree_share", a}, {"dual_share", b}});
    }
    out.checks.push_back({"rho_type_marginals", marg_ok, json{{"shares", detail}}});
    if (!p.out_dir.empty()) write_text(p, "empirical.json", out.to_json().dump(2) + "\n");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 12 — entrance law on the upward-drifting dual fixture.
SuiteResult suite_entrance(const SuiteParams& p) {
  SuiteResult out{"entrance", {}};
  const MapSpec spec = dual_spec(fixtures::m2());
  const double alpha = 1.0, t = 1.0, x_small = 1e-3;
  const std::size_t reps = scaled(p, 1e4);
  RngStream rng(p.seed);

  RngStream is_rng = rng.child(1);
  const std::vector<EntranceSample> eta = entrance_law_sample(spec, alpha, t, reps, is_rng);

  RngStream direct_rng = rng.child(2);
  std::vector<double> direct_val(reps);
  std::vector<TypeIndex> direct_type(reps);
  std::vector<char> direct_alive(reps, 0);
  parallel_for(reps, p.workers, [&](std::size_t r) {
    RngStream rr = direct_rng.child(r);
    const auto got = simulate_ssmp_value(spec, x_small, 0, alpha, t, rr);
    if (got) {
      direct_val[r] = got->first;
      direct_type[r] = got->second;
      direct_alive[r] = 1;
    }
  });

  for (TypeIndex j = 0; j < spec.n_types; ++j) {
    std::vector<double> a, wa, b;
    for (const auto& s : eta)
      if (s.type == j) {
        a.push_back(s.value);
        wa.push_back(s.weight);
      }
    for (std::size_t r = 0; r < reps; ++r)
      if (direct_alive[r] && direct_type[r] == j) b.push_back(direct_val[r]);
    const KsResult ks = ks_two_sample(a, b, wa, {});
    out.checks.push_back({"entrance_ks_type" + std::to_string(j), ks.p_value > 0.01,
                          json{{"statistic", ks.statistic}, {"p_value", ks.p_value},
                               {"n_eff_a", ks.n_eff_a}, {"n_eff_b", ks.n_eff_b}}});
  }

  std::vector<double> mass_terms;
  mass_terms.reserve(eta.size());
  for (const auto& s : eta) mass_terms.push_back(s.weight * static_cast<double>(reps));
  const MeanSe mass = mean_se(mass_terms);
  const double gap = std::abs(mass.mean - 1.0) / std::max(mass.se, 1e-14);
  out.checks.push_back({"entrance_total_mass", gap < 3.0,
                        json{{"mean", mass.mean}, {"se", mass.se}}});

  if (!p.out_dir.empty()) {
    std::ostringstream csv;
    csv << "arm,value,type,weight\n";
    for (const auto& s : eta)
      csv << "eta," << fmt(s.value) << "," << s.type << "," << fmt(s.weight) << "\n";
    for (std::size_t r = 0; r < reps; ++r)
      if (direct_alive[r])
        csv << "direct," << fmt(direct_val[r]) << "," << direct_type[r] << ",1\n";
    write_text(p, "entrance.csv", csv.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 13 — cascade machinery.
SuiteResult suite_renewal(const SuiteParams& p) {
  SuiteResult out{"renewal", {}};
  const M2Env env = m2_env();
  RngStream rng(p.seed);

  {
    // Pareto(2) synthetic by inverse CDF.
    const std::size_t n = scaled(p, 1e5);
    RngStream arm = rng.child(1);
    std::vector<double> vals(n);
    for (std::size_t r = 0; r < n; ++r) vals[r] = 1.0 / std::sqrt(1.0 - arm.uniform());
    RngStream hill_rng = rng.child(2);
    const TailVerdict verdict = tail_verify(vals, 2.0, hill_rng);
    out.checks.push_back({"pareto_synthetic", verdict.in_ci,
                          json{{"hill_alpha", verdict.hill.front().alpha},
                               {"ci_lo", verdict.hill.front().ci_lo},
                               {"ci_hi", verdict.hill.front().ci_hi},
                               {"rank_slope", verdict.rank_slope}}});
  }

  {
    // Kesten fixture: single type, A atomic with E[A^2] = 1, B = 1.
    AffineSpec kesten;
    kesten.n_types = 1;
    kesten.v = Vector::Ones(1);
    kesten.law = {{{0.5, 0.3, 1.0, 0}, {0.5, std::sqrt(1.91), 1.0, 0}}};
    const std::size_t n = scaled(p, 1e5);
    RngStream arm = rng.child(3);
    std::vector<double> vals(n);
    parallel_for(n, p.workers, [&](std::size_t r) {
      RngStream rr = arm.child(r);
      vals[r] = affine_perpetuity_sample(kesten, 0, 1e-6, rr);
    });
    RngStream hill_rng = rng.child(4);
    const TailVerdict verdict = tail_verify(vals, 2.0, hill_rng);
    out.checks.push_back({"kesten_affine_tail", verdict.within_15pct,
                          json{{"expected", 2.0}, {"in_ci", verdict.in_ci},
                               {"rank_slope", verdict.rank_slope},
                               {"hill_alpha", verdict.hill.front().alpha}}});
  }

  {
    // Cascade vs cell tree: offspring law bridged from one-generation trees,
    // fixed point by population dynamics, compared against direct
    // martingale-limit samples.
    const WeightPair lower{env.lower.omega, env.lower.v};
    SimControls controls;
    controls.min_size = 1e-3;
    RngStream bridge_rng = rng.child(5);
    const SmoothingSpec bridged =
        bridge_from_genealogy(env.spec, lower, controls, scaled(p, 2000), bridge_rng);

    const double ratio = env.upper.omega / env.lower.omega;
    json root_detail;
    try {
      const CharacteristicRoot root = find_alpha(bridged, 1.2, 2.0 * ratio);
      root_detail = json{{"alpha", root.alpha}, {"derivative", root.derivative},
                         {"expected", ratio}};
    } catch (const std::exception& e) {
      root_detail = json{{"error", e.what()}};
    }

    RngStream pd_rng = rng.child(6);
    PopulationDynamics pd = population_dynamics(bridged, scaled(p, 1e4), 40, pd_rng);
    out.checks.push_back({"population_dynamics_stabilized", pd.stabilized,
                          json{{"iterations", pd.iterations},
                               {"pool_means", pd.pool_means},
                               {"characteristic_root", root_detail}}});

    SimControls deep = controls;
    deep.max_generation = 20;
    RngStream tree_rng = rng.child(7);
    MartingaleLimitSamples direct =
        martingale_limit_samples(env.spec, 1.0, 0, lower, deep, scaled(p, 1e4), tree_rng);
    std::vector<double> tree_vals = direct.values;
    const double tree_mean = mean_se(tree_vals).mean;
    for (double& v : tree_vals) v /= tree_mean;
    const KsResult ks = ks_two_sample(pd.pools[0], tree_vals);
    out.checks.push_back({"cascade_vs_tree_ks", ks.p_value > 0.01,
                          json{{"statistic", ks.statistic}, {"p_value", ks.p_value}}});

    if (!p.out_dir.empty()) {
      std::ostringstream csv;
      csv << "source,value\n";
      for (double v : pd.pools[0]) csv << "cascade," << fmt(v) << "\n";
      for (double v : tree_vals) csv << "tree," << fmt(v) << "\n";
      write_text(p, "cascade_pools.csv", csv.str());
    }
  }
  if (!p.out_dir.empty()) write_text(p, "renewal.json", out.to_json().dump(2) + "\n");
  return out;
}

std::vector<SuiteResult> run_all(const SuiteParams& p) {
  std::vector<SuiteResult> results;
  results.push_back(suite_spectral(p));
  results.push_back(suite_simulate_map(p));
  results.push_back(suite_exponents(p));
  results.push_back(suite_simulate_gf(p));
  results.push_back(suite_spine_check(p));
  results.push_back(suite_tails(p));
  results.push_back(suite_empirical(p));
  results.push_back(suite_entrance(p));
  results.push_back(suite_renewal(p));
  return results;
}

void write_summary(const std::vector<SuiteResult>& results, const SuiteParams& p) {
  json out;
  out["seed"] = p.seed;
  out["scale"] = p.scale;
  bool all_pass = true;
  out["suites"] = json::array();
  for (const auto& r : results) {
    out["suites"].push_back(r.to_json());
    all_pass = all_pass && r.pass();
  }
  out["pass"] = all_pass;
  write_text(p, "summary.json", out.dump(2) + "\n");
}

}  // namespace gfmap
