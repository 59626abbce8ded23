#pragma once

// Derivative-free minimization of the qTTF over circuit angles, and the
// SIC-POVM verifier.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "circuit.hpp"
#include "fisher.hpp"
#include "tomo.hpp"

namespace qsic {

struct NmOptions {
  int max_evals = 20000;
  double x_tol = 1e-8;      // max coordinate distance of any vertex from the best
  double f_tol = 1e-12;     // spread of function values across the simplex
  double reflection = 1.0;  // rho
  double expansion = 2.0;   // chi
  double contraction = 0.5; // gamma
  double shrink = 0.5;      // sigma
  double init_simplex_scale = 0.5;
  // Iterations without improving the best by more than f_tol before the
  // simplex is rebuilt around it. A second such stall in a row ends the run.
  int stagnation_iters = 50;

  void validate() const {
    if (max_evals < 1 || !(x_tol > 0.0) || !(f_tol >= 0.0) || !(reflection > 0.0) || !(expansion > 1.0) ||
        !(contraction > 0.0 && contraction < 1.0) || !(shrink > 0.0 && shrink < 1.0) ||
        !(init_simplex_scale > 0.0) || stagnation_iters < 1)
      throw std::invalid_argument("NmOptions: coefficients outside their admissible ranges");
  }
};

enum class NmStatus { converged, max_evals };

struct NmResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
  int reseeds = 0;
  NmStatus status = NmStatus::max_evals;
};

using Objective = std::function<double(std::span<const double>)>;

/// Nelder-Mead simplex search. NaN values are treated as +inf. The best
/// vertex never gets worse, so f <= objective(x0) on return.
inline NmResult nelder_mead(const Objective& objective, std::vector<double> x0, const NmOptions& opts = {}) {
  opts.validate();
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: empty starting point");

  NmResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evals;
    const double v = objective(std::span<const double>(x));
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> fv(n + 1);
  fv[0] = eval(x0);
  if (!std::isfinite(fv[0])) throw std::invalid_argument("nelder_mead: objective is not finite at x0");

  auto build_simplex = [&](double scale) {
    for (std::size_t i = 1; i <= n; ++i) {
      pts[i] = pts[0];
      pts[i][i - 1] += scale;
      fv[i] = eval(pts[i]);
    }
  };
  build_simplex(opts.init_simplex_scale);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  auto along = [&](std::vector<double>& out, const std::vector<double>& from, double t) {
    for (std::size_t d = 0; d < n; ++d) out[d] = centroid[d] + t * (from[d] - centroid[d]);
  };

  double best_seen = fv[0];
  int since_improvement = 0;
  bool reseeded_without_gain = false;

  while (true) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    {
      std::vector<std::vector<double>> p2(n + 1);
      std::vector<double> f2(n + 1);
      for (std::size_t i = 0; i <= n; ++i) {
        p2[i] = std::move(pts[order[i]]);
        f2[i] = fv[order[i]];
      }
      pts.swap(p2);
      fv.swap(f2);
    }

    double spread_x = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t d = 0; d < n; ++d) spread_x = std::max(spread_x, std::abs(pts[i][d] - pts[0][d]));
    const double spread_f = fv[n] - fv[0];
    if (spread_x <= opts.x_tol && spread_f <= opts.f_tol) {
      res.status = NmStatus::converged;
      break;
    }
    if (res.evals >= opts.max_evals) {
      res.status = NmStatus::max_evals;
      break;
    }

    if (fv[0] < best_seen - opts.f_tol) {
      best_seen = fv[0];
      since_improvement = 0;
      reseeded_without_gain = false;
    } else if (++since_improvement >= opts.stagnation_iters) {
      // A rebuilt simplex that still cannot beat the incumbent confirms it.
      if (reseeded_without_gain) {
        res.status = NmStatus::converged;
        break;
      }
      build_simplex(std::max(spread_x, 100.0 * opts.x_tol));
      ++res.reseeds;
      since_improvement = 0;
      reseeded_without_gain = true;
      continue;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d] / static_cast<double>(n);

    along(xr, pts[n], -opts.reflection);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      along(xe, pts[n], -opts.reflection * opts.expansion);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[n] = xe;
        fv[n] = fe;
      } else {
        pts[n] = xr;
        fv[n] = fr;
      }
      continue;
    }
    if (fr < fv[n - 1]) {
      pts[n] = xr;
      fv[n] = fr;
      continue;
    }
    if (fr < fv[n]) {
      along(xc, pts[n], -opts.reflection * opts.contraction);  // outside
      const double fc = eval(xc);
      if (fc <= fr) {
        pts[n] = xc;
        fv[n] = fc;
        continue;
      }
    } else {
      along(xc, pts[n], opts.contraction);  // inside
      const double fc = eval(xc);
      if (fc < fv[n]) {
        pts[n] = xc;
        fv[n] = fc;
        continue;
      }
    }
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t d = 0; d < n; ++d) pts[i][d] = pts[0][d] + opts.shrink * (pts[i][d] - pts[0][d]);
      fv[i] = eval(pts[i]);
    }
  }

  res.x = pts[0];
  res.f = fv[0];
  return res;
}

/// Traces and pairwise overlaps Tr(Pi_i Pi_j) with Pi = 2 E.
struct SicReport {
  std::array<double, 4> traces{};
  std::array<std::array<double, 4>, 4> overlaps{};
  double max_trace_dev = 0.0;
  double max_overlap_dev = 0.0;  // distinct pairs, against 1/3
  bool is_sic = false;
};

inline SicReport sic_check(const PovmSet& povm, double tol = 1e-10) {
  validate_povm(povm);
  SicReport rep;
  for (std::size_t i = 0; i < 4; ++i) {
    rep.traces[i] = povm[i].trace().real();
    rep.max_trace_dev = std::max(rep.max_trace_dev, std::abs(rep.traces[i] - 0.5));
    for (std::size_t j = 0; j < 4; ++j) {
      rep.overlaps[i][j] = 4.0 * (povm[i] * povm[j]).trace().real();
      if (i != j) rep.max_overlap_dev = std::max(rep.max_overlap_dev, std::abs(rep.overlaps[i][j] - 1.0 / 3.0));
    }
  }
  rep.is_sic = rep.max_trace_dev <= tol && rep.max_overlap_dev <= tol;
  return rep;
}

enum class CircuitKind { full, simplified };

inline std::size_t parameter_count(CircuitKind kind) { return kind == CircuitKind::full ? 12 : 6; }

/// POVM of a circuit from its flattened angles (12 for full, 6 for simplified).
inline PovmSet povm_from_angles(CircuitKind kind, std::span<const double> x) {
  if (x.size() != parameter_count(kind)) throw std::invalid_argument("povm_from_angles: wrong parameter count");
  if (kind == CircuitKind::full) return full_circuit_povm(CircuitParams::from_flat(x));
  return simplified_circuit_povm({x[0], x[1], x[2]}, {x[3], x[4], x[5]});
}

/// qTTF as a minimization objective; failures map to +inf.
inline Objective qttf_objective(CircuitKind kind, const QuadratureSpec& q) {
  auto grid = std::make_shared<const QttfGrid>(q);
  return [kind, grid](std::span<const double> x) {
    try {
      return qttf_detailed(measurement_matrix(povm_from_angles(kind, x)), *grid).value;
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
}

struct RestartRecord {
  int index = 0;
  std::vector<double> start;
  std::vector<double> end;
  double value = 0.0;  // search-quadrature qTTF at `end`
  int evals = 0;
  NmStatus status = NmStatus::max_evals;
};

struct OptimizeOptions {
  int restarts = 20;
  std::uint64_t seed = 42;
  CircuitKind kind = CircuitKind::full;
  QuadratureSpec search{16, 16};
  QuadratureSpec report{64, 64};
  NmOptions nm;
  // Re-run the search from the best restart on the report quadrature.
  bool polish = true;
};

struct OptimizeResult {
  std::vector<double> angles;  // 12 (full) or 6 (simplified)
  double qttf_value = 0.0;     // on the report quadrature
  double search_value = 0.0;
  std::vector<RestartRecord> history;

  CircuitParams params() const {
    if (angles.size() == 12) return CircuitParams::from_flat(angles);
    CircuitParams p;
    p.a1 = {angles[0], angles[1], angles[2]};
    p.a2 = {angles[3], angles[4], angles[5]};
    return p;
  }
};

/// SplitMix64 finalizer; derives independent stream seeds from a base seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw. Unlike
/// std::uniform_real_distribution this is identical across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Refines a single starting point; the result's history has one record.
inline OptimizeResult refine_circuit(CircuitKind kind, std::vector<double> start, const OptimizeOptions& opts) {
  const auto search = qttf_objective(kind, opts.search);
  auto nm = nelder_mead(search, start, opts.nm);
  OptimizeResult out;
  out.history.push_back({0, start, nm.x, nm.f, nm.evals, nm.status});
  out.search_value = nm.f;
  if (opts.polish) {
    const auto fine = nelder_mead(qttf_objective(kind, opts.report), nm.x, opts.nm);
    nm.x = fine.x;
  }
  out.angles = nm.x;
  out.qttf_value = qttf_objective(kind, opts.report)(out.angles);
  return out;
}

/// Random-restart minimization of the qTTF. Starting angles are uniform in
/// [0, 2 pi); restart i draws from its own stream seeded by mix(seed, i), so
/// the result is reproducible and independent of execution order.
inline OptimizeResult optimize_circuit(const OptimizeOptions& opts) {
  if (opts.restarts < 1) throw std::invalid_argument("optimize_circuit: restarts must be >= 1");
  const std::size_t n = parameter_count(opts.kind);
  const auto search = qttf_objective(opts.kind, opts.search);

  OptimizeResult out;
  std::size_t best = 0;
  for (int r = 0; r < opts.restarts; ++r) {
    std::mt19937_64 rng(mix_seed(opts.seed ^ mix_seed(static_cast<std::uint64_t>(r))));
    std::vector<double> start(n);
    // Redraw until the objective is finite at the start.
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (double& v : start) v = 2.0 * kPi * unit_uniform(rng);
      if (std::isfinite(search(start))) break;
    }
    RestartRecord rec;
    rec.index = r;
    rec.start = start;
    try {
      const auto nm = nelder_mead(search, start, opts.nm);
      rec.end = nm.x;
      rec.value = nm.f;
      rec.evals = nm.evals;
      rec.status = nm.status;
    } catch (const std::invalid_argument&) {
      rec.end = start;
      rec.value = std::numeric_limits<double>::infinity();
    }
    out.history.push_back(std::move(rec));
    if (out.history.back().value < out.history[best].value) best = out.history.size() - 1;
  }

  out.search_value = out.history[best].value;
  out.angles = out.history[best].end;
  if (opts.polish && std::isfinite(out.search_value))
    out.angles = nelder_mead(qttf_objective(opts.kind, opts.report), out.angles, opts.nm).x;
  out.qttf_value = qttf_objective(opts.kind, opts.report)(out.angles);
  return out;
}

inline OptimizeResult optimize_circuit(int restarts, std::uint64_t seed, const QuadratureSpec& q,
                                       const NmOptions& nm = {}) {
  OptimizeOptions opts;
  opts.restarts = restarts;
  opts.seed = seed;
  opts.search = q;
  opts.nm = nm;
  return optimize_circuit(opts);
}

}  // namespace qsic
