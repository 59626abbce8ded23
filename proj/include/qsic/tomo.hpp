#pragma once

// Measurement matrix, linear-inversion and RrhoR maximum-likelihood
// estimators for a four-outcome qubit POVM.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "circuit.hpp"
#include "qcore.hpp"

namespace qsic {

using Probs = std::array<double, 4>;

/// T[nu][mu] = 1/2 Tr(E_nu sigma_mu). Outcome probabilities are p = T s.
struct MeasurementMatrix {
  std::array<std::array<double, 4>, 4> t{};

  double operator()(std::size_t nu, std::size_t mu) const { return t[nu][mu]; }
  double& operator()(std::size_t nu, std::size_t mu) { return t[nu][mu]; }
};

/// Shot counts per outcome.
struct CountVector {
  std::array<std::uint64_t, 4> n{};

  std::uint64_t total() const { return n[0] + n[1] + n[2] + n[3]; }

  Probs frequencies() const {
    const auto tot = total();
    if (tot == 0) throw std::invalid_argument("CountVector: no shots recorded");
    Probs p;
    for (std::size_t i = 0; i < 4; ++i) p[i] = static_cast<double>(n[i]) / static_cast<double>(tot);
    return p;
  }
};

struct RprOptions {
  int max_iter = 10000;
  double tol = 1e-10;       // on the Euclidean change of the Bloch 3-vector
  double p_floor = 1e-12;   // model probabilities are clamped from below
  bool record_trace = false;

  void validate() const {
    if (max_iter < 1 || !(tol > 0.0) || !(p_floor >= 0.0))
      throw std::invalid_argument("RprOptions: need max_iter >= 1, tol > 0, p_floor >= 0");
  }
};

struct RprResult {
  BlochVec s;
  int iterations = 0;
  bool converged = false;
  int diluted_steps = 0;                // steps that needed a damped R to keep the likelihood rising
  std::vector<double> log_likelihood;   // per iterate, only when RprOptions::record_trace
};

inline MeasurementMatrix measurement_matrix(const PovmSet& povm) {
  validate_povm(povm);
  MeasurementMatrix m;
  for (std::size_t nu = 0; nu < 4; ++nu)
    for (int mu = 0; mu < 4; ++mu) m.t[nu][mu] = 0.5 * (povm[nu] * pauli(mu)).trace().real();
  return m;
}

namespace detail {

inline Probs apply(const MeasurementMatrix& t, const BlochVec& s) {
  Probs p{};
  for (std::size_t nu = 0; nu < 4; ++nu)
    for (std::size_t mu = 0; mu < 4; ++mu) p[nu] += t.t[nu][mu] * s[mu];
  return p;
}

inline void require_distribution(const Probs& p, double tol, const char* who) {
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < -tol) throw std::invalid_argument(std::string(who) + ": invalid probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) throw std::invalid_argument(std::string(who) + ": probabilities must sum to 1");
}

// LU with partial pivoting on a 4x4 system. Returns the determinant and
// overwrites `b` with the solution when the matrix is non-singular.
inline double solve4(std::array<std::array<double, 4>, 4> a, std::array<double, 4>* b) {
  double det = 1.0;
  for (std::size_t c = 0; c < 4; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < 4; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      if (b) std::swap((*b)[piv], (*b)[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < 4; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < 4; ++k) a[r][k] -= f * a[c][k];
      if (b) (*b)[r] -= f * (*b)[c];
    }
  }
  if (b) {
    for (std::size_t c = 4; c-- > 0;) {
      double acc = (*b)[c];
      for (std::size_t k = c + 1; k < 4; ++k) acc -= a[c][k] * (*b)[k];
      (*b)[c] = acc / a[c][c];
    }
  }
  return det;
}

}  // namespace detail

inline double determinant(const MeasurementMatrix& t) { return detail::solve4(t.t, nullptr); }

/// p = T s with tiny negative round-off clamped to zero.
inline Probs probabilities(const MeasurementMatrix& t, const BlochVec& s) {
  Probs p = detail::apply(t, s);
  for (double& v : p)
    if (v < 0.0 && v > -1e-12) v = 0.0;
  return p;
}

/// Linear inversion s = T^{-1} p. The result is not projected onto the Bloch
/// ball; check BlochVec::is_physical().
inline BlochVec li_estimate(const MeasurementMatrix& t, const Probs& p_hat) {
  detail::require_distribution(p_hat, 1e-9, "li_estimate");
  std::array<double, 4> s = p_hat;
  const double det = detail::solve4(t.t, &s);
  if (!(std::abs(det) > 1e-12))
    throw NumericalError("li_estimate: measurement matrix is singular (POVM not informationally complete)");
  if (std::abs(s[0] - 1.0) > 1e-9) throw NumericalError("li_estimate: inverted s0 differs from 1");
  s[0] = 1.0;
  return BlochVec(s);
}

/// Multinomial log-likelihood sum_nu p_hat_nu ln p_nu(s), up to a constant and
/// the factor N. Model probabilities are clamped at `p_floor`.
inline double log_likelihood(const MeasurementMatrix& t, const Probs& p_hat, const BlochVec& s,
                             double p_floor = 1e-12) {
  const Probs p = detail::apply(t, s);
  double acc = 0.0;
  for (std::size_t nu = 0; nu < 4; ++nu)
    if (p_hat[nu] > 0.0) acc += p_hat[nu] * std::log(std::max(p[nu], p_floor));
  return acc;
}

namespace detail {

// r_mu = sum_nu (p_hat_nu / p_nu) T[nu][mu], the Bloch coefficients of R.
inline std::array<double, 4> rpr_r(const MeasurementMatrix& t, const Probs& p_hat, const BlochVec& s,
                                   double p_floor) {
  const Probs p = apply(t, s);
  std::array<double, 4> r{};
  for (std::size_t nu = 0; nu < 4; ++nu) {
    const double ratio = p_hat[nu] / std::max(p[nu], p_floor);
    for (std::size_t mu = 0; mu < 4; ++mu) r[mu] += ratio * t.t[nu][mu];
  }
  return r;
}

// Bloch form of rho <- N[R rho R]:
//   s'_mu = (2 r_mu - s_mu g) / (2 r_0 + g),  g = |r_vec|^2 - r_0^2.
inline BlochVec rpr_step(const std::array<double, 4>& r, const BlochVec& s) {
  const double g = r[1] * r[1] + r[2] * r[2] + r[3] * r[3] - r[0] * r[0];
  const double den = 2.0 * r[0] + g;
  BlochVec out;
  for (std::size_t mu = 1; mu < 4; ++mu) out[mu] = (2.0 * r[mu] - s[mu] * g) / den;
  return out;
}

}  // namespace detail

/// Iterative maximum-likelihood estimate starting from the maximally mixed
/// state. If a plain RrhoR step lowers the likelihood, R is damped towards
/// the identity, (I + eps R)/(1 + eps), halving eps until it does not.
inline RprResult rpr_estimate(const MeasurementMatrix& t, const Probs& p_hat, const RprOptions& opts = {}) {
  opts.validate();
  detail::require_distribution(p_hat, 1e-9, "rpr_estimate");

  RprResult res;
  BlochVec s;  // (1, 0, 0, 0)
  double ll = log_likelihood(t, p_hat, s, opts.p_floor);
  if (opts.record_trace) res.log_likelihood.push_back(ll);

  for (int it = 0; it < opts.max_iter; ++it) {
    const auto r = detail::rpr_r(t, p_hat, s, opts.p_floor);
    BlochVec next = detail::rpr_step(r, s);
    double next_ll = log_likelihood(t, p_hat, next, opts.p_floor);

    if (next_ll < ll) {
      bool improved = false;
      for (double eps = 1.0; eps > 1e-8; eps *= 0.5) {
        std::array<double, 4> rd;
        for (std::size_t mu = 0; mu < 4; ++mu) rd[mu] = (eps * r[mu] + (mu == 0 ? 1.0 : 0.0)) / (1.0 + eps);
        const BlochVec trial = detail::rpr_step(rd, s);
        const double trial_ll = log_likelihood(t, p_hat, trial, opts.p_floor);
        if (trial_ll >= ll) {
          next = trial;
          next_ll = trial_ll;
          improved = true;
          break;
        }
      }
      ++res.diluted_steps;
      if (!improved) {
        // Likelihood is flat to round-off around s.
        res.s = s;
        res.iterations = it;
        res.converged = true;
        return res;
      }
    }

    double dx = 0.0;
    for (std::size_t mu = 1; mu < 4; ++mu) dx += (next[mu] - s[mu]) * (next[mu] - s[mu]);
    s = next;
    ll = next_ll;
    if (opts.record_trace) res.log_likelihood.push_back(ll);
    if (std::sqrt(dx) < opts.tol) {
      res.s = s;
      res.iterations = it + 1;
      res.converged = true;
      return res;
    }
  }
  res.s = s;
  res.iterations = opts.max_iter;
  res.converged = false;
  return res;
}

}  // namespace qsic
