#pragma once

// Shot-noise tomography experiments: multinomial sampling of circuit
// outcomes, estimation with LI and/or RrhoR, and per-state aggregation.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "optim.hpp"
#include "qcore.hpp"
#include "tomo.hpp"

namespace qsic {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kPrngName = "mt19937_64 (splitmix64-derived per-cell seeds), inverse-CDF multinomial";

/// Draws `shots` outcomes from `p` by inverse-CDF sampling.
inline CountVector sample_counts(const Probs& p, std::uint64_t shots, std::mt19937_64& rng) {
  detail::require_distribution(p, 1e-9, "sample_counts");
  if (shots < 1) throw std::invalid_argument("sample_counts: shots must be >= 1");
  std::array<double, 4> cdf{};
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    acc += std::max(p[i], 0.0);
    cdf[i] = acc;
    if (p[i] > 0.0) last = i;
  }
  CountVector c;
  for (std::uint64_t k = 0; k < shots; ++k) {
    const double u = unit_uniform(rng) * acc;
    std::size_t i = 0;
    while (i < last && u >= cdf[i]) ++i;
    ++c.n[i];
  }
  return c;
}

inline CountVector sample_counts(const Probs& p, std::uint64_t shots, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed));
  return sample_counts(p, shots, rng);
}

struct NamedState {
  std::string label;
  StateAngles angles;
};

/// |0>, |1>, |+>, |->, |+i>, |-i> as labels z0, z1, x0, x1, y0, y1.
inline std::array<NamedState, 6> pauli_eigenstate_suite() {
  return {{{"z0", {0.0, 0.0}},
           {"z1", {kPi / 2, 0.0}},
           {"x0", {kPi / 4, 0.0}},
           {"x1", {kPi / 4, kPi / 2}},
           {"y0", {kPi / 4, 3 * kPi / 4}},
           {"y1", {kPi / 4, kPi / 4}}}};
}

enum class CircuitChoice { full, simplified, canonical_sic };
enum class EstimatorChoice { li, rpr, both };

/// A state to estimate: either pure (from angles) or any Bloch vector.
struct StateSpec {
  std::string label;
  BlochVec bloch;
  std::optional<StateAngles> angles;

  static StateSpec pure(std::string label, const StateAngles& a) { return {std::move(label), a.bloch(), a}; }
};

struct ExperimentConfig {
  CircuitChoice circuit = CircuitChoice::canonical_sic;
  std::optional<CircuitParams> theta;  // defaults to the tetrahedral optimum
  std::vector<StateSpec> states;       // empty means the Pauli suite
  std::uint64_t shots = 1024;
  int repetitions = 5;
  EstimatorChoice estimator = EstimatorChoice::both;
  bool project_pure = false;
  std::uint64_t seed = 42;
  RprOptions rpr;

  void validate() const {
    if (shots < 1 || repetitions < 1) throw std::invalid_argument("ExperimentConfig: shots and repetitions must be >= 1");
    rpr.validate();
  }

  std::vector<StateSpec> resolved_states() const {
    if (!states.empty()) return states;
    std::vector<StateSpec> out;
    for (const auto& s : pauli_eigenstate_suite()) out.push_back(StateSpec::pure(s.label, s.angles));
    return out;
  }
};

inline PovmSet povm_for(CircuitChoice circuit, const std::optional<CircuitParams>& theta) {
  const CircuitParams p = theta.value_or(optimal_circuit_params());
  switch (circuit) {
    case CircuitChoice::full: return full_circuit_povm(p);
    case CircuitChoice::simplified: return simplified_circuit_povm(p.a1, p.a2);
    case CircuitChoice::canonical_sic: return canonical_sic_povm();
  }
  throw std::invalid_argument("povm_for: unknown circuit");
}

struct EstimateCell {
  bool ok = false;
  std::string error;
  BlochVec s;
  bool physical = false;
  double purity = std::numeric_limits<double>::quiet_NaN();
  double fidelity = std::numeric_limits<double>::quiet_NaN();  // NaN for non-PSD estimates
  int iterations = 0;  // RrhoR only
  bool converged = true;
};

struct SeriesStats {
  int n_ok = 0;
  std::array<double, 3> mean{};
  std::array<double, 3> std{};  // sample std, n-1 denominator
  std::array<double, 3> sem{};  // std / sqrt(n)
  double mean_purity = std::numeric_limits<double>::quiet_NaN();
  double mean_fidelity = std::numeric_limits<double>::quiet_NaN();
  double purity_of_mean = std::numeric_limits<double>::quiet_NaN();
  double fidelity_of_mean = std::numeric_limits<double>::quiet_NaN();
};

struct EstimatorSeries {
  std::string name;  // li, rpr, li-pure, rpr-pure
  std::vector<EstimateCell> cells;
  SeriesStats stats;
};

struct ExperimentRecord {
  std::string state_label;
  BlochVec true_bloch;
  std::vector<CountVector> counts;
  std::vector<EstimatorSeries> estimators;

  const EstimatorSeries* series(const std::string& name) const {
    for (const auto& e : estimators)
      if (e.name == name) return &e;
    return nullptr;
  }
};

inline std::uint64_t cell_seed(std::uint64_t seed, std::size_t state, std::size_t rep) {
  return mix_seed(mix_seed(mix_seed(seed) ^ static_cast<std::uint64_t>(state)) ^ static_cast<std::uint64_t>(rep));
}

/// Purity of a Bloch vector, (1 + |s|^2)/2; exceeds 1 outside the ball.
inline double bloch_purity(const BlochVec& s) { return purity(bloch_to_density(s)); }

inline double bloch_fidelity(const BlochVec& truth, const BlochVec& est) {
  if (!est.is_physical() || !truth.is_physical()) return std::numeric_limits<double>::quiet_NaN();
  return std::min(1.0, fidelity(bloch_to_density(truth), bloch_to_density(est)));
}

inline SeriesStats summarize(const std::vector<EstimateCell>& cells, const BlochVec& truth) {
  SeriesStats st;
  double pur = 0.0, fid = 0.0;
  int n_fid = 0;
  for (const auto& c : cells) {
    if (!c.ok) continue;
    ++st.n_ok;
    for (std::size_t k = 0; k < 3; ++k) st.mean[k] += c.s[k + 1];
    pur += c.purity;
    if (std::isfinite(c.fidelity)) {
      fid += c.fidelity;
      ++n_fid;
    }
  }
  if (st.n_ok == 0) return st;
  const double n = st.n_ok;
  for (double& m : st.mean) m /= n;
  st.mean_purity = pur / n;
  if (n_fid > 0) st.mean_fidelity = fid / n_fid;
  for (std::size_t k = 0; k < 3; ++k) {
    double ss = 0.0;
    for (const auto& c : cells)
      if (c.ok) ss += (c.s[k + 1] - st.mean[k]) * (c.s[k + 1] - st.mean[k]);
    st.std[k] = st.n_ok > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    st.sem[k] = st.std[k] / std::sqrt(n);
  }
  const BlochVec mean_vec(st.mean[0], st.mean[1], st.mean[2]);
  st.purity_of_mean = bloch_purity(mean_vec);
  st.fidelity_of_mean = bloch_fidelity(truth, mean_vec);
  return st;
}

namespace detail {

inline EstimateCell make_cell(const BlochVec& truth, const BlochVec& s) {
  EstimateCell c;
  c.ok = true;
  c.s = s;
  c.physical = s.is_physical();
  c.purity = bloch_purity(s);
  c.fidelity = bloch_fidelity(truth, s);
  return c;
}

inline EstimateCell project_cell(const BlochVec& truth, const EstimateCell& in) {
  if (!in.ok) return in;
  try {
    EstimateCell c = make_cell(truth, density_to_bloch(dominant_eigenstate(bloch_to_density(in.s))));
    c.iterations = in.iterations;
    c.converged = in.converged;
    return c;
  } catch (const NumericalError& e) {
    EstimateCell c;
    c.error = e.what();
    return c;
  }
}

}  // namespace detail

/// For each state and repetition: exact probabilities, sampled counts,
/// estimates and metrics. Cells are independent; each draws from its own
/// PRNG stream, so the output depends only on the config.
inline std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const MeasurementMatrix t = measurement_matrix(povm_for(cfg.circuit, cfg.theta));
  const bool want_li = cfg.estimator != EstimatorChoice::rpr;
  const bool want_rpr = cfg.estimator != EstimatorChoice::li;
  const auto states = cfg.resolved_states();

  std::vector<ExperimentRecord> out;
  for (std::size_t si = 0; si < states.size(); ++si) {
    const auto& st = states[si];
    ExperimentRecord rec;
    rec.state_label = st.label;
    rec.true_bloch = st.bloch;
    EstimatorSeries li{"li", {}, {}}, rpr{"rpr", {}, {}};
    const Probs p = probabilities(t, st.bloch);

    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      std::mt19937_64 rng(cell_seed(cfg.seed, si, static_cast<std::size_t>(rep)));
      const CountVector counts = sample_counts(p, cfg.shots, rng);
      rec.counts.push_back(counts);
      const Probs p_hat = counts.frequencies();

      if (want_li) {
        try {
          li.cells.push_back(detail::make_cell(st.bloch, li_estimate(t, p_hat)));
        } catch (const NumericalError& e) {
          EstimateCell c;
          c.error = e.what();
          li.cells.push_back(c);
        }
      }
      if (want_rpr) {
        try {
          const RprResult r = rpr_estimate(t, p_hat, cfg.rpr);
          EstimateCell c = detail::make_cell(st.bloch, r.s);
          c.iterations = r.iterations;
          c.converged = r.converged;
          rpr.cells.push_back(c);
        } catch (const NumericalError& e) {
          EstimateCell c;
          c.error = e.what();
          rpr.cells.push_back(c);
        }
      }
    }

    std::vector<EstimatorSeries> series;
    if (want_li) series.push_back(std::move(li));
    if (want_rpr) series.push_back(std::move(rpr));
    if (cfg.project_pure) {
      const std::size_t base = series.size();
      for (std::size_t k = 0; k < base; ++k) {
        EstimatorSeries proj{series[k].name + "-pure", {}, {}};
        for (const auto& c : series[k].cells) proj.cells.push_back(detail::project_cell(st.bloch, c));
        series.push_back(std::move(proj));
      }
    }
    for (auto& s : series) s.stats = summarize(s.cells, st.bloch);
    rec.estimators = std::move(series);
    out.push_back(std::move(rec));
  }
  return out;
}

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

/// One row per (state, repetition, estimator).
inline void write_csv(std::ostream& os, const std::vector<ExperimentRecord>& records) {
  using detail::fmt_double;
  os << "state,rep,estimator,sx,sy,sz,purity,fidelity\n";
  for (const auto& rec : records) {
    const std::size_t reps = rec.counts.size();
    for (std::size_t r = 0; r < reps; ++r)
      for (const auto& series : rec.estimators) {
        const auto& c = series.cells[r];
        const double nan = std::numeric_limits<double>::quiet_NaN();
        os << rec.state_label << ',' << r << ',' << series.name << ',' << fmt_double(c.ok ? c.s.x() : nan) << ','
           << fmt_double(c.ok ? c.s.y() : nan) << ',' << fmt_double(c.ok ? c.s.z() : nan) << ','
           << fmt_double(c.purity) << ',' << fmt_double(c.fidelity) << '\n';
      }
  }
}

}  // namespace qsic
