#pragma once

// JSON file formats: theta files, counts files, experiment configs and
// result documents.

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "circuit.hpp"
#include "harness.hpp"
#include "optim.hpp"

namespace qsic::io {

using nlohmann::json;

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

inline json to_json(const GateAngles& g) { return {{"theta", g.theta}, {"phi", g.phi}, {"lambda", g.lambda}}; }

inline GateAngles gate_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("gate angles must be an object {theta, phi, lambda}");
  GateAngles g{j.value("theta", 0.0), j.value("phi", 0.0), j.value("lambda", 0.0)};
  if (!g.finite()) throw std::invalid_argument("gate angles must be finite");
  return g;
}

/// Theta file: array of 4 gate objects (full circuit) or 2 (simplified).
struct ThetaFile {
  CircuitKind kind = CircuitKind::full;
  CircuitParams params;
};

inline ThetaFile theta_from_json(const json& j) {
  const json& arr = j.is_object() && j.contains("theta") ? j.at("theta") : j;
  if (!arr.is_array() || (arr.size() != 4 && arr.size() != 2))
    throw std::invalid_argument("theta must be an array of 4 (full) or 2 (simplified) gate objects");
  ThetaFile tf;
  tf.kind = arr.size() == 4 ? CircuitKind::full : CircuitKind::simplified;
  tf.params.a1 = gate_from_json(arr[0]);
  tf.params.a2 = gate_from_json(arr[1]);
  if (arr.size() == 4) {
    tf.params.b1 = gate_from_json(arr[2]);
    tf.params.b2 = gate_from_json(arr[3]);
  }
  return tf;
}

inline json theta_to_json(CircuitKind kind, const CircuitParams& p) {
  json arr = json::array({to_json(p.a1), to_json(p.a2)});
  if (kind == CircuitKind::full) {
    arr.push_back(to_json(p.b1));
    arr.push_back(to_json(p.b2));
  }
  return arr;
}

inline PovmSet povm_from_theta(const ThetaFile& tf) {
  return tf.kind == CircuitKind::full ? full_circuit_povm(tf.params)
                                      : simplified_circuit_povm(tf.params.a1, tf.params.a2);
}

/// Counts file: {"counts": [n00, n01, n10, n11]}.
inline CountVector counts_from_json(const json& j) {
  if (!j.is_object() || !j.contains("counts") || !j.at("counts").is_array() || j.at("counts").size() != 4)
    throw std::invalid_argument("counts file must be {\"counts\": [n00, n01, n10, n11]}");
  CountVector c;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& v = j.at("counts")[i];
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw std::invalid_argument("counts must be non-negative integers");
    c.n[i] = v.get<std::uint64_t>();
  }
  if (c.total() == 0) throw std::invalid_argument("counts must contain at least one shot");
  return c;
}

inline json to_json(const BlochVec& s) { return json::array({s[0], s[1], s[2], s[3]}); }

inline json to_json(const SicReport& r) {
  json overlaps = json::array();
  for (const auto& row : r.overlaps) overlaps.push_back(row);
  return {{"traces", r.traces},
          {"overlaps", overlaps},
          {"max_trace_dev", r.max_trace_dev},
          {"max_overlap_dev", r.max_overlap_dev},
          {"is_sic", r.is_sic}};
}

inline const char* to_string(CircuitChoice c) {
  switch (c) {
    case CircuitChoice::full: return "full";
    case CircuitChoice::simplified: return "simplified";
    case CircuitChoice::canonical_sic: return "canonical-sic";
  }
  return "?";
}

inline const char* to_string(EstimatorChoice e) {
  switch (e) {
    case EstimatorChoice::li: return "li";
    case EstimatorChoice::rpr: return "rpr";
    case EstimatorChoice::both: return "both";
  }
  return "?";
}

inline CircuitChoice circuit_from_string(const std::string& s) {
  if (s == "full") return CircuitChoice::full;
  if (s == "simplified") return CircuitChoice::simplified;
  if (s == "canonical-sic") return CircuitChoice::canonical_sic;
  throw std::invalid_argument("unknown circuit '" + s + "' (full | simplified | canonical-sic)");
}

inline EstimatorChoice estimator_from_string(const std::string& s) {
  if (s == "li") return EstimatorChoice::li;
  if (s == "rpr") return EstimatorChoice::rpr;
  if (s == "both") return EstimatorChoice::both;
  throw std::invalid_argument("unknown estimator '" + s + "' (li | rpr | both)");
}

inline StateSpec state_from_json(const json& j) {
  if (j.is_string()) {
    for (const auto& s : pauli_eigenstate_suite())
      if (s.label == j.get<std::string>()) return StateSpec::pure(s.label, s.angles);
    throw std::invalid_argument("unknown named state '" + j.get<std::string>() + "' (z0 z1 x0 x1 y0 y1)");
  }
  if (!j.is_object()) throw std::invalid_argument("state entries must be names or objects");
  if (j.contains("bloch")) {
    const auto& b = j.at("bloch");
    if (!b.is_array() || b.size() != 3) throw std::invalid_argument("state bloch must be [sx, sy, sz]");
    StateSpec s{j.value("label", std::string("custom")), BlochVec(b[0].get<double>(), b[1].get<double>(), b[2].get<double>()), {}};
    if (!s.bloch.is_physical()) throw std::invalid_argument("state bloch vector lies outside the unit ball");
    return s;
  }
  if (!j.contains("alpha1") || !j.contains("alpha2")) throw std::invalid_argument("state needs alpha1/alpha2 or bloch");
  return StateSpec::pure(j.value("label", std::string("custom")),
                         StateAngles(j.at("alpha1").get<double>(), j.at("alpha2").get<double>()));
}

inline json state_to_json(const StateSpec& s) {
  if (s.angles) return {{"label", s.label}, {"alpha1", s.angles->alpha1}, {"alpha2", s.angles->alpha2}};
  return {{"label", s.label}, {"bloch", {s.bloch.x(), s.bloch.y(), s.bloch.z()}}};
}

inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  ExperimentConfig cfg;
  try {
    if (j.contains("circuit")) cfg.circuit = circuit_from_string(j.at("circuit").get<std::string>());
    if (j.contains("theta") && !j.at("theta").is_null()) {
      const ThetaFile tf = theta_from_json(j.at("theta"));
      if ((cfg.circuit == CircuitChoice::full) != (tf.kind == CircuitKind::full) && cfg.circuit != CircuitChoice::canonical_sic)
        throw std::invalid_argument("theta size does not match the circuit");
      cfg.theta = tf.params;
    }
    if (j.contains("states"))
      for (const auto& s : j.at("states")) cfg.states.push_back(state_from_json(s));
    if (j.contains("shots")) cfg.shots = j.at("shots").get<std::uint64_t>();
    if (j.contains("repetitions")) cfg.repetitions = j.at("repetitions").get<int>();
    if (j.contains("estimator")) cfg.estimator = estimator_from_string(j.at("estimator").get<std::string>());
    if (j.contains("project_pure")) cfg.project_pure = j.at("project_pure").get<bool>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("rpr")) {
      const auto& r = j.at("rpr");
      cfg.rpr.max_iter = r.value("max_iter", cfg.rpr.max_iter);
      cfg.rpr.tol = r.value("tol", cfg.rpr.tol);
      cfg.rpr.p_floor = r.value("p_floor", cfg.rpr.p_floor);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline json config_to_json(const ExperimentConfig& cfg) {
  json states = json::array();
  for (const auto& s : cfg.resolved_states()) states.push_back(state_to_json(s));
  const CircuitKind kind = cfg.circuit == CircuitChoice::simplified ? CircuitKind::simplified : CircuitKind::full;
  return {{"circuit", to_string(cfg.circuit)},
          {"theta", cfg.circuit == CircuitChoice::canonical_sic
                        ? json(nullptr)
                        : theta_to_json(kind, cfg.theta.value_or(optimal_circuit_params()))},
          {"states", states},
          {"shots", cfg.shots},
          {"repetitions", cfg.repetitions},
          {"estimator", to_string(cfg.estimator)},
          {"project_pure", cfg.project_pure},
          {"seed", cfg.seed},
          {"rpr", {{"max_iter", cfg.rpr.max_iter}, {"tol", cfg.rpr.tol}, {"p_floor", cfg.rpr.p_floor}}}};
}

inline json stats_to_json(const SeriesStats& s) {
  return {{"n_ok", s.n_ok},
          {"mean", s.mean},
          {"std", s.std},
          {"sem", s.sem},
          {"mean_purity", s.mean_purity},
          {"mean_fidelity", s.mean_fidelity},
          {"purity_of_mean", s.purity_of_mean},
          {"fidelity_of_mean", s.fidelity_of_mean}};
}

/// Results document. Non-finite numbers serialize as null.
inline json results_to_json(const ExperimentConfig& cfg, const std::vector<ExperimentRecord>& records) {
  json recs = json::array();
  for (const auto& rec : records) {
    json counts = json::array();
    for (const auto& c : rec.counts) counts.push_back(c.n);
    json est = json::object();
    for (const auto& series : rec.estimators) {
      json cells = json::array();
      for (const auto& c : series.cells) {
        json cell = {{"ok", c.ok}, {"purity", c.purity}, {"fidelity", c.fidelity}};
        if (c.ok) {
          cell["s"] = {c.s.x(), c.s.y(), c.s.z()};
          cell["physical"] = c.physical;
        } else {
          cell["error"] = c.error;
        }
        if (series.name.rfind("rpr", 0) == 0) {
          cell["iterations"] = c.iterations;
          cell["converged"] = c.converged;
        }
        cells.push_back(cell);
      }
      est[series.name] = {{"cells", cells}, {"summary", stats_to_json(series.stats)}};
    }
    recs.push_back({{"state", rec.state_label},
                    {"true_bloch", {rec.true_bloch.x(), rec.true_bloch.y(), rec.true_bloch.z()}},
                    {"counts", counts},
                    {"estimators", est}});
  }
  return {{"version", kVersion}, {"prng", kPrngName}, {"config", config_to_json(cfg)}, {"records", recs}};
}

}  // namespace qsic::io
