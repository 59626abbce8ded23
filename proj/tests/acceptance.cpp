// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "oracles.hpp"
#include "qsic/circuit.hpp"
#include "qsic/fisher.hpp"
#include "qsic/harness.hpp"
#include "qsic/optim.hpp"
#include "qsic/tomo.hpp"

using namespace qsic;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double povm_distance(const PovmSet& a, const PovmSet& b) {
  double d = 0.0;
  for (std::size_t nu = 0; nu < 4; ++nu) d = std::max(d, max_abs_diff(a[nu], b[nu]));
  return d;
}

// 1. Traces 1/2 and pairwise Tr(E E') = 1/12 at the optimal angles.
Outcome sic_fingerprint() {
  const PovmSet povm = full_circuit_povm(optimal_circuit_params());
  double tr_dev = 0.0, ov_dev = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    tr_dev = std::max(tr_dev, std::abs(povm[i].trace().real() - 0.5));
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) ov_dev = std::max(ov_dev, std::abs((povm[i] * povm[j]).trace().real() - 1.0 / 12.0));
  }
  const SicReport rep = sic_check(povm, 1e-10);
  return {tr_dev <= 1e-10 && ov_dev <= 1e-10 && rep.is_sic,
          fmt("max|Tr E - 1/2| = %.2e, max|Tr EE' - 1/12| = %.2e", tr_dev, ov_dev)};
}

// 2. qTTF of the SIC on 64x64 Gauss-Legendre, and flatness of Delta.
Outcome qttf_optimum() {
  const auto t = measurement_matrix(canonical_sic_povm());
  const double v = qttf(t, QuadratureSpec{64, 64});
  double lo = 1e300, hi = -1e300, sum = 0.0;
  const int n = 32;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const StateAngles xi((i + 0.5) * (kPi / 2) / n, (j + 0.5) * kPi / n);
      const double d = fisher_error(t, xi.bloch());
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      sum += d;
    }
  const double flat = (hi - lo) / (sum / (n * n));
  return {std::abs(v - 8.0) <= 1e-3 && flat < 1e-8,
          fmt("qTTF = %.15f (|dev| = %.2e), flatness = %.2e", v, std::abs(v - 8.0), flat)};
}

// 3. Closed form vs circuit on 1000 random angle pairs.
Outcome analytic_equivalence() {
  std::mt19937_64 rng(20240301);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  double worst = 0.0, worst_free = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const GateAngles a1 = oracle::random_gate(rng), a2 = oracle::random_gate(rng);
    const PovmSet analytic = analytic_simplified_povm(a1, a2);
    worst = std::max(worst, povm_distance(analytic, simplified_circuit_povm(a1, a2)));
    GateAngles b1 = a1, b2 = a2;
    b1.lambda = u(rng);
    b2.phi = u(rng);
    worst_free = std::max(worst_free, povm_distance(analytic, simplified_circuit_povm(b1, b2)));
    worst_free = std::max(worst_free, povm_distance(analytic, analytic_simplified_povm(b1, b2)));
  }
  return {worst <= 1e-10 && worst_free <= 1e-10,
          fmt("max entry diff = %.2e, with lambda1/phi2 redrawn = %.2e", worst, worst_free)};
}

// 4. Explicit tetrahedral form of E_kl at the optimal angles, both paths.
Outcome final_form() {
  const CircuitParams p = optimal_circuit_params();
  const PovmSet full = full_circuit_povm(p);
  const PovmSet simp = simplified_circuit_povm(p.a1, p.a2);
  const PovmSet closed = analytic_simplified_povm(p.a1, p.a2);
  const double r = 1.0 / std::sqrt(3.0);
  double worst = 0.0;
  for (int kb = 0; kb < 2; ++kb)
    for (int lb = 0; lb < 2; ++lb) {
      const double k = kb ? -1.0 : 1.0, l = lb ? -1.0 : 1.0;
      ComplexMat e(2);
      e(0, 0) = 0.25 * (1.0 + k * r);
      e(1, 1) = 0.25 * (1.0 - k * r);
      e(0, 1) = 0.25 * cplx{-l * r, k * l * r};   // -(l X + k l Y)/sqrt3, upper entry
      e(1, 0) = std::conj(e(0, 1));
      for (const PovmSet* s : {&full, &simp, &closed}) worst = std::max(worst, max_abs_diff(s->at(kb, lb), e));
    }
  return {worst <= 1e-12, fmt("max entry diff over full, simplified and closed form = %.2e", worst)};
}

// 5. Seeded random-restart optimization over the full circuit.
Outcome optimization() {
  OptimizeOptions opts;
  opts.restarts = 20;
  opts.seed = 42;
  opts.kind = CircuitKind::full;
  const OptimizeResult r = optimize_circuit(opts);
  const SicReport rep = sic_check(povm_from_angles(CircuitKind::full, r.angles), 1e-4);
  int at_bound = 0;
  for (const auto& h : r.history) at_bound += h.value <= 8.0 + 1e-2 ? 1 : 0;
  return {r.qttf_value <= 8.0 + 1e-2 && rep.is_sic,
          fmt("best qTTF = %.12f, %d/20 restarts <= 8.01, SIC dev traces %.1e overlaps %.1e", r.qttf_value, at_bound,
              rep.max_trace_dev, rep.max_overlap_dev)};
}

// 6. Pauli-eigenstate suite, 5 x 1024 shots, seed 42.
Outcome estimator_suite() {
  ExperimentConfig cfg;  // canonical SIC, Pauli suite, 1024 shots, 5 reps, seed 42
  const auto recs = run_experiment(cfg);
  bool ok = true;
  double worst_z = 0.0, fid_sum = 0.0, min_state_fid = 1.0;
  int n_fid = 0;
  std::string rows;
  for (const auto& rec : recs) {
    const auto* rpr = rec.series("rpr");
    if (rpr == nullptr || rpr->stats.n_ok != cfg.repetitions) return {false, "missing RrhoR estimates"};
    for (std::size_t k = 0; k < 3; ++k) {
      const double dev = std::abs(rpr->stats.mean[k] - rec.true_bloch[k + 1]);
      const double band = 3.0 * rpr->stats.std[k];
      if (!(dev <= band)) ok = false;
      if (rpr->stats.std[k] > 0.0) worst_z = std::max(worst_z, dev / rpr->stats.std[k]);
      else if (dev > 0.0) worst_z = std::numeric_limits<double>::infinity();
    }
    for (const auto& c : rpr->cells) {
      fid_sum += c.fidelity;
      ++n_fid;
    }
    min_state_fid = std::min(min_state_fid, rpr->stats.mean_fidelity);
    const int axis = rec.state_label[0] == 'x' ? 0 : rec.state_label[0] == 'y' ? 1 : 2;
    rows += fmt(" %s:s%c=%.3f+-%.3f", rec.state_label.c_str(), "xyz"[axis], rpr->stats.mean[axis], rpr->stats.std[axis]);
  }
  const double avg_fid = fid_sum / n_fid;
  ok = ok && avg_fid >= 0.95 && min_state_fid >= 0.95;
  return {ok, fmt("worst |mean-true|/std = %.2f, avg fidelity = %.4f, min per-state = %.4f;", worst_z, avg_fid,
                  min_state_fid) +
                  rows};
}

// 7. Purity dichotomy on pure states; LI and RrhoR agreement on mixed states.
Outcome purity_dichotomy() {
  const auto t = measurement_matrix(canonical_sic_povm());
  const double over = 1.0 + BlochVec::kPhysicalTol;
  int li_over = 0, rpr_over = 0;
  for (int run = 0; run < 100; ++run) {
    std::mt19937_64 rng(cell_seed(7, 0, static_cast<std::size_t>(run)));
    const BlochVec truth(oracle::random_pure_bloch(rng));
    const Probs f = sample_counts(probabilities(t, truth), 1024, rng).frequencies();
    li_over += bloch_purity(li_estimate(t, f)) > over ? 1 : 0;
    rpr_over += bloch_purity(rpr_estimate(t, f).s) > over ? 1 : 0;
  }

  // Mixed inputs: counts pooled from a pure state and its antipode with
  // weights w and 1 - w, w in [0.3, 0.7].
  double worst = 0.0, max_pur = 0.0;
  int li_unphysical = 0;
  for (int run = 0; run < 100; ++run) {
    std::mt19937_64 rng(cell_seed(8, 0, static_cast<std::size_t>(run)));
    const BlochVec a(oracle::random_pure_bloch(rng));
    const BlochVec b(-a.x(), -a.y(), -a.z());
    const double w = 0.3 + 0.4 * unit_uniform(rng);
    const auto na = static_cast<std::uint64_t>(std::lround(w * 1024));
    const CountVector ca = sample_counts(probabilities(t, a), na, rng);
    const CountVector cb = sample_counts(probabilities(t, b), 1024 - na, rng);
    CountVector c;
    for (std::size_t i = 0; i < 4; ++i) c.n[i] = ca.n[i] + cb.n[i];
    const Probs f = c.frequencies();
    const BlochVec li = li_estimate(t, f);
    const BlochVec ml = rpr_estimate(t, f).s;
    li_unphysical += li.is_physical() ? 0 : 1;
    max_pur = std::max(max_pur, bloch_purity(li));
    for (std::size_t mu = 1; mu < 4; ++mu) worst = std::max(worst, std::abs(li[mu] - ml[mu]));
  }
  return {li_over >= 1 && rpr_over == 0 && worst <= 1e-3 && li_unphysical == 0,
          fmt("pure: LI purity>1 in %d/100, RrhoR in %d/100; mixed (max purity %.3f): max |LI-RrhoR| = %.2e", li_over,
              rpr_over, max_pur, worst)};
}

// 8. Oracle checks for Fisher, LI and RrhoR monotonicity.
Outcome oracle_checks() {
  std::mt19937_64 rng(99);
  double fisher_rel = 0.0;
  for (int done = 0; done < 100;) {
    const PovmSet povm = full_circuit_povm(oracle::random_params(rng));
    const auto s = oracle::random_bloch(rng, 0.95);
    const auto p = oracle::probs(povm, s);
    if (*std::min_element(p.begin(), p.end()) < 1e-3) continue;
    const auto f = fisher_matrix(measurement_matrix(povm), BlochVec(s));
    const auto ref = oracle::fisher_fd(povm, s);
    double num = 0.0, den = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        num += (f(a, b) - ref[a][b]) * (f(a, b) - ref[a][b]);
        den += ref[a][b] * ref[a][b];
      }
    fisher_rel = std::max(fisher_rel, std::sqrt(num / den));
    ++done;
  }

  double li_err = 0.0;
  int redraws = 0;
  for (int done = 0; done < 1000;) {
    const PovmSet povm = full_circuit_povm(oracle::random_params(rng));
    const auto t = measurement_matrix(povm);
    if (std::abs(determinant(t)) < 1e-4) {
      ++redraws;
      continue;
    }
    const auto s = oracle::random_bloch(rng);
    const auto p = oracle::probs(povm, s);
    const BlochVec e = li_estimate(t, Probs{p[0], p[1], p[2], p[3]});
    for (std::size_t mu = 1; mu < 4; ++mu) li_err = std::max(li_err, std::abs(e[mu] - s[mu]));
    ++done;
  }

  const auto t = measurement_matrix(canonical_sic_povm());
  RprOptions opts;
  opts.record_trace = true;
  int violations = 0, total_iters = 0;
  std::uniform_int_distribution<int> cnt(0, 600);
  for (int trial = 0; trial < 100; ++trial) {
    CountVector c;
    do {
      for (auto& n : c.n) n = static_cast<std::uint64_t>(cnt(rng));
    } while (c.total() == 0);
    const RprResult r = rpr_estimate(t, c.frequencies(), opts);
    total_iters += r.iterations;
    for (std::size_t i = 1; i < r.log_likelihood.size(); ++i)
      violations += r.log_likelihood[i] < r.log_likelihood[i - 1] ? 1 : 0;
  }
  return {fisher_rel <= 1e-5 && li_err <= 1e-10 && violations == 0,
          fmt("Fisher rel err %.2e; LI round trip %.2e (%d near-singular redraws); likelihood decreases %d over %d "
              "iterations",
              fisher_rel, li_err, redraws, violations, total_iters)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_s;
  };
  const Criterion criteria[] = {
      {"sic-fingerprint", sic_fingerprint, 1.0},
      {"qttf-optimum", qttf_optimum, 10.0},
      {"analytic-circuit-equivalence", analytic_equivalence, 5.0},
      {"final-sic-form", final_form, 1.0},
      {"optimization-reproduction", optimization, 600.0},
      {"estimator-suite", estimator_suite, 30.0},
      {"purity-dichotomy", purity_dichotomy, 60.0},
      {"oracle-checks", oracle_checks, 60.0},
  };
  int failed = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s [%d] %s (%.2fs%s): %s\n", pass ? "PASS" : "FAIL", index, c.name, secs,
                in_time ? "" : ", over budget", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed;
}
