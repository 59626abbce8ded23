#pragma once

// Per-shot Fisher information of a qubit POVM, the Fisher error parameter
// Delta = Tr(F^{-1}) and its Haar average over pure states (the quantum
// tomographic transfer function, qTTF).

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcore.hpp"
#include "tomo.hpp"

namespace qsic {

enum class QuadratureRule { midpoint, gauss_legendre };
enum class SingularPolicy { abort, skip };

/// Tensor-product rule over alpha1 in [0, pi/2] and alpha2 in [0, pi].
/// Both rules use interior nodes only.
struct QuadratureSpec {
  int n_alpha1 = 64;
  int n_alpha2 = 64;
  QuadratureRule rule = QuadratureRule::gauss_legendre;
  SingularPolicy on_singular = SingularPolicy::abort;

  void validate() const {
    if (n_alpha1 < 4 || n_alpha2 < 4) throw std::invalid_argument("QuadratureSpec: node counts must be >= 4");
  }
};

/// 3x3 symmetric per-shot Fisher matrix over (sx, sy, sz).
struct FisherMatrix {
  std::array<std::array<double, 3>, 3> f{};

  double operator()(std::size_t i, std::size_t j) const { return f[i][j]; }
};

struct QuadratureNodes {
  std::vector<double> x;
  std::vector<double> w;
};

/// Gauss-Legendre nodes and weights on [-1, 1] via Newton iteration on P_n.
inline QuadratureNodes gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  QuadratureNodes q;
  q.x.assign(static_cast<std::size_t>(n), 0.0);
  q.w.assign(static_cast<std::size_t>(n), 0.0);
  // Returns (P_n(z), P_n'(z)) by the three-term recurrence.
  const auto legendre = [n](double z) {
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    return std::array<double, 2>{p1, n * (z * p1 - p0) / (z * z - 1.0)};
  };
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [pn, dpn] = legendre(z);
      const double dz = pn / dpn;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double dp = legendre(z)[1];
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    const auto lo = static_cast<std::size_t>(i), hi = static_cast<std::size_t>(n - 1 - i);
    q.x[lo] = -z;
    q.x[hi] = z;
    q.w[lo] = w;
    q.w[hi] = w;
  }
  return q;
}

/// Nodes and weights of a rule on [a, b].
inline QuadratureNodes quadrature_nodes(QuadratureRule rule, int n, double a, double b) {
  QuadratureNodes q;
  if (rule == QuadratureRule::midpoint) {
    const double h = (b - a) / n;
    for (int i = 0; i < n; ++i) {
      q.x.push_back(a + (i + 0.5) * h);
      q.w.push_back(h);
    }
    return q;
  }
  q = gauss_legendre(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (b + a);
  for (std::size_t i = 0; i < q.x.size(); ++i) {
    q.x[i] = mid + half * q.x[i];
    q.w[i] *= half;
  }
  return q;
}

/// F = [T^T P^{-1} T] restricted to mu, nu in {1,2,3}. Throws NumericalError
/// when some outcome probability is at or below `p_floor`.
inline FisherMatrix fisher_matrix(const MeasurementMatrix& t, const BlochVec& s, double p_floor = 1e-10) {
  const Probs p = detail::apply(t, s);
  FisherMatrix fm;
  for (std::size_t nu = 0; nu < 4; ++nu) {
    bool informative = false;
    for (std::size_t mu = 1; mu < 4; ++mu) informative = informative || t.t[nu][mu] != 0.0;
    // Outcomes that never fire and carry no state dependence add nothing.
    if (!informative && std::abs(p[nu]) <= p_floor) continue;
    if (!(p[nu] > p_floor))
      throw NumericalError("fisher_matrix: outcome probability " + std::to_string(nu) + " is at or below the floor");
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) fm.f[i][j] += t.t[nu][i + 1] * t.t[nu][j + 1] / p[nu];
  }
  return fm;
}

namespace detail {

inline double max_abs(const std::array<std::array<double, 3>, 3>& a) {
  double m = 0.0;
  for (const auto& row : a)
    for (double v : row) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace detail

/// Delta = Tr(F^{-1}). Throws NumericalError when F is singular (condition
/// number above 1e12), i.e. the measurement is not informationally complete
/// at this state.
inline double fisher_error(const MeasurementMatrix& t, const BlochVec& s, double p_floor = 1e-10) {
  const auto f = fisher_matrix(t, s, p_floor).f;
  // Cofactor inverse of the symmetric 3x3.
  std::array<std::array<double, 3>, 3> c{};
  c[0][0] = f[1][1] * f[2][2] - f[1][2] * f[2][1];
  c[0][1] = f[0][2] * f[2][1] - f[0][1] * f[2][2];
  c[0][2] = f[0][1] * f[1][2] - f[0][2] * f[1][1];
  c[1][0] = f[1][2] * f[2][0] - f[1][0] * f[2][2];
  c[1][1] = f[0][0] * f[2][2] - f[0][2] * f[2][0];
  c[1][2] = f[0][2] * f[1][0] - f[0][0] * f[1][2];
  c[2][0] = f[1][0] * f[2][1] - f[1][1] * f[2][0];
  c[2][1] = f[0][1] * f[2][0] - f[0][0] * f[2][1];
  c[2][2] = f[0][0] * f[1][1] - f[0][1] * f[1][0];
  const double det = f[0][0] * c[0][0] + f[0][1] * c[1][0] + f[0][2] * c[2][0];
  const double norm_f = detail::max_abs(f);
  if (!(det > 0.0) || norm_f == 0.0) throw NumericalError("fisher_error: Fisher matrix is singular");
  // Condition estimate in the max-norm: ||F|| * ||F^{-1}||.
  const double cond = norm_f * detail::max_abs(c) / det;
  if (!(cond < 1e12)) throw NumericalError("fisher_error: Fisher matrix is ill-conditioned");
  return (c[0][0] + c[1][1] + c[2][2]) / det;
}

struct QttfResult {
  double value = 0.0;
  int skipped_nodes = 0;
};

/// Pure-state nodes of a QuadratureSpec with their Haar weights
/// w1_i * w2_j * sin(2 alpha1_i), stored row-major (alpha1 outer).
struct QttfGrid {
  std::size_t rows = 0, cols = 0;
  std::vector<BlochVec> states;
  std::vector<double> weights;
  SingularPolicy on_singular = SingularPolicy::abort;

  explicit QttfGrid(const QuadratureSpec& q) : on_singular(q.on_singular) {
    q.validate();
    const auto n1 = quadrature_nodes(q.rule, q.n_alpha1, 0.0, kPi / 2.0);
    const auto n2 = quadrature_nodes(q.rule, q.n_alpha2, 0.0, kPi);
    rows = n1.x.size();
    cols = n2.x.size();
    for (std::size_t i = 0; i < rows; ++i) {
      const double st = std::sin(2.0 * n1.x[i]), ct = std::cos(2.0 * n1.x[i]);
      for (std::size_t j = 0; j < cols; ++j) {
        const double a2 = n2.x[j];
        states.emplace_back(st * std::cos(2.0 * a2), -st * std::sin(2.0 * a2), ct);
        weights.push_back(n1.w[i] * n2.w[j] * st);
      }
    }
  }
};

/// Haar average of Delta over pure states:
///   qTTF = (1/pi) int_0^{pi/2} int_0^{pi} Delta(s(a1, a2)) sin(2 a1) da2 da1.
/// With SingularPolicy::skip, failing nodes are dropped and the remaining
/// weights renormalized.
inline QttfResult qttf_detailed(const MeasurementMatrix& t, const QttfGrid& grid) {
  QttfResult res;
  double kept_weight = 0.0, total_weight = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < grid.rows; ++i) {
    // Row sums first, in a fixed order, so results are bit-stable.
    double row = 0.0;
    for (std::size_t j = 0; j < grid.cols; ++j) {
      const std::size_t k = i * grid.cols + j;
      total_weight += grid.weights[k];
      try {
        row += grid.weights[k] * fisher_error(t, grid.states[k]);
        kept_weight += grid.weights[k];
      } catch (const NumericalError&) {
        if (grid.on_singular == SingularPolicy::abort) throw;
        ++res.skipped_nodes;
      }
    }
    acc += row;
  }
  if (res.skipped_nodes > 0) {
    if (kept_weight <= 0.0) throw NumericalError("qttf: every quadrature node is singular");
    acc *= total_weight / kept_weight;
  }
  res.value = acc / kPi;
  return res;
}

inline QttfResult qttf_detailed(const MeasurementMatrix& t, const QuadratureSpec& q) {
  return qttf_detailed(t, QttfGrid(q));
}

inline double qttf(const MeasurementMatrix& t, const QuadratureSpec& q = {}) { return qttf_detailed(t, q).value; }

}  // namespace qsic
