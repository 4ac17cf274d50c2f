#include "gfmap/spectral.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace gfmap {

Matrix matrix_exponent(const MapSpec& spec, double z) {
  const int n = spec.n_types;
  Matrix f(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        f(i, j) = spec.psi(i, z) + spec.q(i, i);
      } else {
        f(i, j) = spec.q(i, j) * spec.g(i, j, z);
      }
    }
  }
  return f;
}

Spectral leading_eigenvalue(const Matrix& m) {
  const auto n = m.rows();
  if (n == 1) {
    Spectral s;
    s.chi = m(0, 0);
    s.w = Vector::Ones(1);
    return s;
  }
  // Shift so the matrix is entrywise nonnegative with a positive diagonal.
  double shift = m.diagonal().cwiseAbs().maxCoeff() + 1.0;
  Matrix a = m + shift * Matrix::Identity(n, n);

  Vector x = Vector::Ones(n);
  double lambda = 0.0;
  bool converged = false;
  for (int it = 0; it < 100000; ++it) {
    Vector y = a * x;
    double norm = y.norm();
    if (norm == 0.0) throw std::runtime_error("leading_eigenvalue: matrix annihilates iterate");
    y /= norm;
    double rayleigh = y.dot(a * y);
    if (it > 0 && std::abs(rayleigh - lambda) <= 1e-12 * std::max(1.0, std::abs(rayleigh))) {
      lambda = rayleigh;
      x = y;
      converged = true;
      break;
    }
    lambda = rayleigh;
    x = y;
  }
  if (!converged)
    throw std::runtime_error("leading_eigenvalue: power iteration did not converge (reducible or defective input?)");

  // Inverse-iteration polish sharpens the eigenvector when the spectral gap
  // is small; the tiny regularization keeps the solve well-posed at the
  // eigenvalue itself.
  for (int round = 0; round < 3; ++round) {
    Matrix shifted = a - (lambda + 1e-11) * Matrix::Identity(n, n);
    Eigen::PartialPivLU<Matrix> lu(shifted);
    Vector y = lu.solve(x);
    double norm = y.norm();
    if (!std::isfinite(norm) || norm == 0.0) break;
    y /= norm;
    if (y(0) < 0.0) y = -y;
    x = y;
    lambda = x.dot(a * x);
  }

  if (x(0) <= 0.0) x = -x;
  for (Eigen::Index i = 0; i < n; ++i)
    if (x(i) <= 0.0)
      throw std::runtime_error("leading_eigenvalue: eigenvector not strictly positive");
  Spectral s;
  s.chi = lambda - shift;
  s.w = x / x(0);
  return s;
}

Spectral spectral_data(const MapSpec& spec, double z) {
  return leading_eigenvalue(matrix_exponent(spec, z));
}

double chi(const MapSpec& spec, double z) { return spectral_data(spec, z).chi; }

double chi_prime(const MapSpec& spec, double z, double step) {
  return (chi(spec, z + step) - chi(spec, z - step)) / (2.0 * step);
}

Vector stationary_distribution(const MapSpec& spec) {
  const int n = spec.n_types;
  Matrix q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q(i, j) = spec.q(i, j);
  Spectral left = leading_eigenvalue(q.transpose());
  Vector pi = left.w / left.w.sum();
  return pi;
}

MapSpec dual_spec(const MapSpec& spec) {
  Vector pi = stationary_distribution(spec);
  MapSpec d;
  d.n_types = spec.n_types;
  const auto n = static_cast<std::size_t>(spec.n_types);
  d.q_matrix.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      d.q_matrix[i][j] = pi(static_cast<Eigen::Index>(j)) / pi(static_cast<Eigen::Index>(i)) *
                         spec.q_matrix[j][i];
      row += d.q_matrix[i][j];
    }
    d.q_matrix[i][i] = -row;
  }
  d.levy = spec.levy;
  for (auto& l : d.levy) {
    l.drift = -l.drift;
    for (auto& a : l.atoms) a.size = -a.size;
  }
  d.trans.assign(n, std::vector<TransitionJump>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      TransitionJump t = spec.trans[j][i];
      for (auto& a : t.atoms) a.size = -a.size;
      d.trans[i][j] = t;
    }
  }
  return d;
}

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0)
    throw std::invalid_argument("find_root: no sign change in bracket");
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    // Secant proposal, accepted only when it lands inside the bracket;
    // otherwise plain bisection. Keeps the bisection convergence guarantee.
    double secant = hi - fhi * (hi - lo) / (fhi - flo);
    mid = (secant > lo && secant < hi) ? secant : 0.5 * (lo + hi);
    double fm = f(mid);
    if (std::abs(fm) < tol || hi - lo < 1e-15 * std::max(1.0, std::abs(mid))) return mid;
    if (flo * fm < 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return mid;
}

double cramer_number(const MapSpec& spec, double lo, double hi) {
  if (lo <= 0.0) throw std::invalid_argument("cramer_number: bracket must have lo > 0");
  return find_root([&](double q) { return chi(spec, q); }, lo, hi);
}

MapSpec tilt_spec(const MapSpec& spec, double gamma) {
  Spectral sd = spectral_data(spec, gamma);
  const double chi_g = sd.chi;
  const auto n = static_cast<std::size_t>(spec.n_types);

  MapSpec t;
  t.n_types = spec.n_types;
  t.q_matrix.assign(n, std::vector<double>(n, 0.0));
  t.trans.assign(n, std::vector<TransitionJump>(n));
  t.levy.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = spec.levy[static_cast<std::size_t>(i)];
    LevyComponent lt;
    lt.drift = l.drift + l.gauss_var * gamma;
    lt.gauss_var = l.gauss_var;
    for (const auto& a : l.atoms) {
      JumpAtom b = a;
      b.weight = a.weight * std::exp(gamma * a.size);
      lt.atoms.push_back(b);
    }
    lt.kill_rate = 0.0;  // set below once the tilted intensities are known
    t.levy[i] = lt;
  }

  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double gij = spec.g(static_cast<int>(i), static_cast<int>(j), gamma);
      double rate = spec.q_matrix[i][j] * gij * sd.w(static_cast<Eigen::Index>(j)) /
                    sd.w(static_cast<Eigen::Index>(i));
      t.q_matrix[i][j] = rate;
      row += rate;
      if (rate > 0.0 && !spec.trans[i][j].trivial()) {
        TransitionJump tj;
        for (const auto& a : spec.trans[i][j].atoms) {
          JumpAtom b = a;
          b.weight = a.weight * std::exp(gamma * a.size) / gij;
          tj.atoms.push_back(b);
        }
        t.trans[i][j] = tj;
      }
    }
    t.q_matrix[i][i] = -row;
    // Match the diagonal exactly. The target is
    //   F_tilt(i,i)(q) = psi_i(gamma+q) + q_{i,i} - chi(gamma),
    // and the reweighted Lévy part above contributes
    // psi_i(gamma+q) - psi_i(gamma), so the residual constant goes into the
    // kill rate. The eigenvalue equation makes that residual exactly zero in
    // real arithmetic (chi(gamma) - psi_i(gamma) - q_{i,i} equals the tilted
    // total transition rate); the clamp only removes rounding noise.
    double residual = t.q_matrix[i][i] -
                      (spec.psi(static_cast<int>(i), gamma) + spec.q_matrix[i][i] - chi_g);
    t.levy[i].kill_rate = std::max(0.0, residual);
  }
  return t;
}

Matrix expm(const Matrix& m) { return m.exp(); }

}  // namespace gfmap
