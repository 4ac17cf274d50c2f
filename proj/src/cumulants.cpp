#include "gfmap/cumulants.hpp"

#include <cmath>
#include <stdexcept>

namespace gfmap {

PiMeasure::PiMeasure(const MapSpec& spec) {
  const auto n = static_cast<std::size_t>(spec.n_types);
  atoms_.assign(n, std::vector<std::vector<PiAtom>>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& a : spec.levy[i].atoms) {
      if (a.size < 0.0)
        atoms_[i][static_cast<std::size_t>(a.type_mark)].push_back({a.size, a.weight});
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double qij = spec.q_matrix[i][j];
      if (qij <= 0.0) continue;
      for (const auto& a : spec.trans[i][j].atoms) {
        if (a.size < 0.0)
          atoms_[i][static_cast<std::size_t>(a.type_mark)].push_back(
              {a.size, qij * a.weight});
      }
    }
  }
}

double PiMeasure::frag_integral(int i, int k, double q) const {
  double acc = 0.0;
  for (const auto& a : atoms(i, k))
    acc += a.weight * std::pow(-std::expm1(a.size), q);
  return acc;
}

double kappa(const MapSpec& spec, int i, double q) {
  PiMeasure pi(spec);
  return spec.psi(i, q) + spec.q(i, i) + pi.frag_integral(i, i, q);
}

double multitype_cumulant(const MapSpec& spec, int i, double q, const Vector& v) {
  PiMeasure pi(spec);
  double acc = kappa(spec, i, q);
  for (int j = 0; j < spec.n_types; ++j) {
    if (j == i) continue;
    acc += v(j) / v(i) * (pi.frag_integral(i, j, q) + spec.q(i, j) * spec.g(i, j, q));
  }
  return acc;
}

Matrix cumulant_matrix(const MapSpec& spec, double q) {
  PiMeasure pi(spec);
  const int n = spec.n_types;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        a(i, j) = spec.psi(i, q) + spec.q(i, i) + pi.frag_integral(i, i, q);
      } else {
        a(i, j) = pi.frag_integral(i, j, q) + spec.q(i, j) * spec.g(i, j, q);
      }
    }
  }
  return a;
}

std::vector<AdmissiblePair> find_admissible(const MapSpec& spec, double q_lo,
                                            double q_hi, AdmissibleWhich which) {
  auto lam = [&](double q) { return leading_eigenvalue(cumulant_matrix(spec, q)).chi; };

  // Geometric scan for sign changes.
  std::vector<double> grid;
  for (double q = q_lo; q <= q_hi * (1.0 + 1e-12); q *= std::pow(2.0, 0.25))
    grid.push_back(q);
  std::vector<std::pair<double, double>> brackets;
  double prev_q = grid.front(), prev_f = lam(prev_q);
  std::vector<double> exact_roots;
  if (prev_f == 0.0) exact_roots.push_back(prev_q);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    double f = lam(grid[k]);
    if (f == 0.0) {
      exact_roots.push_back(grid[k]);
    } else if (prev_f != 0.0 && prev_f * f < 0.0) {
      brackets.emplace_back(prev_q, grid[k]);
    }
    prev_q = grid[k];
    prev_f = f;
  }
  if (brackets.size() + exact_roots.size() > 2)
    throw std::runtime_error("find_admissible: more than two sign changes (numerical pathology)");

  std::vector<double> roots = exact_roots;
  for (auto [lo, hi] : brackets) roots.push_back(find_root(lam, lo, hi));
  std::sort(roots.begin(), roots.end());

  std::vector<AdmissiblePair> out;
  for (double omega : roots) {
    AdmissiblePair p;
    p.omega = omega;
    p.v = leading_eigenvalue(cumulant_matrix(spec, omega)).w;
    double res = 0.0;
    for (int i = 0; i < spec.n_types; ++i)
      res = std::max(res, std::abs(multitype_cumulant(spec, i, omega, p.v)));
    p.residual = res;
    out.push_back(p);
  }
  if (which == AdmissibleWhich::Lower && !out.empty()) out.resize(1);
  if (which == AdmissibleWhich::Upper && out.size() > 1) out.erase(out.begin());
  if (out.empty()) throw std::runtime_error("find_admissible: no root in bracket");
  return out;
}

SpineExponent::SpineExponent(const MapSpec& spec, const AdmissiblePair& pair)
    : base_(spec), pair_(pair), pi_(spec) {
  const auto n = static_cast<std::size_t>(spec.n_types);
  const double omega = pair_.omega;
  const Vector& v = pair_.v;

  MapSpec s;
  s.n_types = spec.n_types;
  s.q_matrix.assign(n, std::vector<double>(n, 0.0));
  s.trans.assign(n, std::vector<TransitionJump>(n));
  s.levy.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = spec.levy[i];
    LevyComponent lh;
    lh.drift = l.drift + l.gauss_var * omega;
    lh.gauss_var = l.gauss_var;
    lh.kill_rate = 0.0;
    // Esscher part: every original atom reweighted by e^{omega size}.
    for (const auto& a : l.atoms) {
      JumpAtom b = a;
      b.weight = a.weight * std::exp(omega * a.size);
      lh.atoms.push_back(b);
    }
    // Split remainders: a same-type child of relative size 1-e^x leaves the
    // spine at log(1 - e^x) below its pre-split value.
    for (const auto& a : pi_.atoms(static_cast<int>(i), static_cast<int>(i))) {
      JumpAtom b;
      b.size = std::log1p(-std::exp(a.size));
      b.weight = a.weight * std::pow(-std::expm1(a.size), omega);
      b.type_mark = static_cast<TypeIndex>(i);
      lh.atoms.push_back(b);
    }
    s.levy[i] = lh;
  }

  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double u_part = spec.q_matrix[i][j] *
                      spec.g(static_cast<int>(i), static_cast<int>(j), omega);
      double pi_part = pi_.frag_integral(static_cast<int>(i), static_cast<int>(j), omega);
      double rate = v(static_cast<Eigen::Index>(j)) / v(static_cast<Eigen::Index>(i)) *
                    (u_part + pi_part);
      s.q_matrix[i][j] = rate;
      row += rate;
      if (rate <= 0.0) continue;
      // Mixture of (a) the modulator switching with a tilted U_{i,j} jump and
      // (b) the spine following a type-j child of a split; weights are the
      // unnormalized contributions to qhat_{i,j}.
      TransitionJump tj;
      double total = u_part + pi_part;
      if (!spec.trans[i][j].trivial()) {
        for (const auto& a : spec.trans[i][j].atoms) {
          JumpAtom b = a;
          b.weight = spec.q_matrix[i][j] * a.weight * std::exp(omega * a.size) / total;
          tj.atoms.push_back(b);
        }
      } else if (u_part > 0.0) {
        JumpAtom b;
        b.size = 0.0;
        b.weight = u_part / total;
        b.type_mark = static_cast<TypeIndex>(j);
        tj.atoms.push_back(b);
      }
      for (const auto& a : pi_.atoms(static_cast<int>(i), static_cast<int>(j))) {
        JumpAtom b;
        b.size = std::log1p(-std::exp(a.size));
        b.weight = a.weight * std::pow(-std::expm1(a.size), omega) / total;
        b.type_mark = static_cast<TypeIndex>(j);
        tj.atoms.push_back(b);
      }
      s.trans[i][j] = tj;
    }
    s.q_matrix[i][i] = -row;
  }
  spine_spec_ = s;
}

Matrix SpineExponent::fhat(double q) const {
  const int n = base_.n_types;
  const double omega = pair_.omega;
  const Vector& v = pair_.v;
  Matrix f(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        f(i, j) = kappa(base_, i, q + omega);
      } else {
        f(i, j) = v(j) / v(i) *
                  (pi_.frag_integral(i, j, q + omega) +
                   base_.q(i, j) * base_.g(i, j, q + omega));
      }
    }
  }
  return f;
}

double SpineExponent::chi_hat(double q) const {
  return leading_eigenvalue(fhat(q)).chi;
}

double SpineExponent::chi_hat_prime(double q, double step) const {
  return (chi_hat(q + step) - chi_hat(q - step)) / (2.0 * step);
}

double SpineExponent::mu_ii(int i) const {
  double denom = base_.q(i, i) + base_.psi(i, pair_.omega);
  return -pi_.frag_integral(i, i, pair_.omega) / denom;
}

}  // namespace gfmap
