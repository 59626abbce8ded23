#pragma once

// Parametrized measurement circuits and their POVMs.
//
// Full circuit, register (A, S, B), S is the estimated qubit, A and B are
// meters prepared in |0>:
//
//   A: ─U_A1─X─U_A2──────────────────M(k)
//   S: ──────●──────H──────●─────────
//   B: ─────────────────U_B1─X─U_B2──M(l)
//
// Simplified circuit, register (A, S), with S measured directly:
//
//   A: ─U_A1─X─U_A2──M(k)
//   S: ──────●──H────M(l)
//
// Outcomes are indexed nu = 2*k + l with bits k, l in {0, 1}. The closed
// form of the simplified POVM uses signed labels (-1)^bit.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qcore.hpp"

namespace qsic {

/// Angles (theta, phi, lambda) of a general single-qubit rotation.
struct GateAngles {
  double theta = 0.0;
  double phi = 0.0;
  double lambda = 0.0;

  bool finite() const { return std::isfinite(theta) && std::isfinite(phi) && std::isfinite(lambda); }
  friend bool operator==(const GateAngles&, const GateAngles&) = default;
};

/// The four gate triples of the full circuit. The simplified circuit uses
/// only a1 and a2.
struct CircuitParams {
  GateAngles a1, a2, b1, b2;

  static constexpr std::size_t kSize = 12;

  std::array<double, kSize> flatten() const {
    return {a1.theta, a1.phi, a1.lambda, a2.theta, a2.phi, a2.lambda,
            b1.theta, b1.phi, b1.lambda, b2.theta, b2.phi, b2.lambda};
  }

  template <class Range>
  static CircuitParams from_flat(const Range& x) {
    if (std::size(x) != kSize) throw std::invalid_argument("CircuitParams: expected 12 angles");
    auto it = std::begin(x);
    auto next = [&it]() { return static_cast<double>(*it++); };
    CircuitParams p;
    for (GateAngles* g : {&p.a1, &p.a2, &p.b1, &p.b2}) {
      g->theta = next();
      g->phi = next();
      g->lambda = next();
    }
    return p;
  }

  bool finite() const { return a1.finite() && a2.finite() && b1.finite() && b2.finite(); }
  friend bool operator==(const CircuitParams&, const CircuitParams&) = default;
};

/// Four 2x2 effects indexed by outcome nu = 2*k + l.
struct PovmSet {
  std::array<ComplexMat, 4> elements;

  const ComplexMat& operator[](std::size_t nu) const { return elements[nu]; }
  const ComplexMat& at(int k, int l) const { return elements[static_cast<std::size_t>(2 * k + l)]; }
};

inline void validate_povm(const PovmSet& povm, double tol = 1e-10) {
  ComplexMat sum(2);
  for (const auto& e : povm.elements) {
    if (e.dim() != 2) throw std::invalid_argument("PovmSet: elements must be 2x2");
    if (!e.all_finite()) throw std::invalid_argument("PovmSet: non-finite element");
    if (!e.is_hermitian(tol)) throw NumericalError("PovmSet: element is not Hermitian");
    if (hermitian_eigenvalues(e)[0] < -tol) throw NumericalError("PovmSet: element is not PSD");
    sum += e;
  }
  if (max_abs_diff(sum, ComplexMat::identity(2)) > tol)
    throw NumericalError("PovmSet: elements do not sum to the identity");
}

inline ComplexMat u_gate(const GateAngles& g) {
  const cplx i{0.0, 1.0};
  const double c = std::cos(g.theta / 2.0), s = std::sin(g.theta / 2.0);
  return ComplexMat{c, -std::exp(i * g.lambda) * s, std::exp(i * g.phi) * s,
                    std::exp(i * (g.phi + g.lambda)) * c};
}

inline ComplexMat hadamard() {
  const double h = 1.0 / std::sqrt(2.0);
  return ComplexMat{h, h, h, -h};
}

namespace detail {

inline ComplexMat projector(int bit) {
  return bit == 0 ? ComplexMat{1.0, 0.0, 0.0, 0.0} : ComplexMat{0.0, 0.0, 0.0, 1.0};
}

// Tensor product of per-qubit operators, first entry most significant.
template <std::size_t N>
ComplexMat kron_all(const std::array<ComplexMat, N>& ops) {
  ComplexMat out = ops[0];
  for (std::size_t q = 1; q < N; ++q) out = tensor(out, ops[q]);
  return out;
}

template <std::size_t N>
ComplexMat on_qubit(const ComplexMat& g, std::size_t q) {
  std::array<ComplexMat, N> ops;
  ops.fill(ComplexMat::identity(2));
  ops[q] = g;
  return kron_all(ops);
}

template <std::size_t N>
ComplexMat controlled_not(std::size_t control, std::size_t target) {
  std::array<ComplexMat, N> idle, flip;
  idle.fill(ComplexMat::identity(2));
  flip.fill(ComplexMat::identity(2));
  idle[control] = projector(0);
  flip[control] = projector(1);
  flip[target] = pauli(1);
  return kron_all(idle) + kron_all(flip);
}

}  // namespace detail

inline ComplexMat full_circuit_unitary(const CircuitParams& p) {
  if (!p.finite()) throw std::invalid_argument("full_circuit_unitary: non-finite angle");
  using detail::controlled_not;
  using detail::on_qubit;
  constexpr std::size_t A = 0, S = 1, B = 2;
  // Later gates multiply from the left.
  ComplexMat u = on_qubit<3>(u_gate(p.a1), A);
  u = controlled_not<3>(S, A) * u;
  u = on_qubit<3>(u_gate(p.a2), A) * u;
  u = on_qubit<3>(hadamard(), S) * u;
  u = on_qubit<3>(u_gate(p.b1), B) * u;
  u = controlled_not<3>(S, B) * u;
  u = on_qubit<3>(u_gate(p.b2), B) * u;
  return u;
}

inline ComplexMat simplified_circuit_unitary(const GateAngles& a1, const GateAngles& a2) {
  if (!a1.finite() || !a2.finite()) throw std::invalid_argument("simplified_circuit_unitary: non-finite angle");
  using detail::controlled_not;
  using detail::on_qubit;
  constexpr std::size_t A = 0, S = 1;
  ComplexMat u = on_qubit<2>(u_gate(a1), A);
  u = controlled_not<2>(S, A) * u;
  u = on_qubit<2>(u_gate(a2), A) * u;
  u = on_qubit<2>(hadamard(), S) * u;
  return u;
}

/// Kraus operators M_kl acting on S, indexed nu = 2*k + l.
///
/// 8x8 input (A, S, B): M_kl = <k_A l_B| U |0_A 0_B>.
/// 4x4 input (A, S), S measured directly: M_kl = |l><l|_S <k_A| U |0_A>.
inline std::array<ComplexMat, 4> kraus_from_unitary(const ComplexMat& u) {
  if (u.dim() != 4 && u.dim() != 8)
    throw std::invalid_argument("kraus_from_unitary: expected a 4x4 or 8x8 unitary");
  if (!u.is_unitary(1e-10)) throw NumericalError("kraus_from_unitary: input is not unitary");

  std::array<ComplexMat, 4> m;
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) {
      ComplexMat op(2);
      for (int out = 0; out < 2; ++out)
        for (int in = 0; in < 2; ++in) {
          if (u.dim() == 8) {
            op(out, in) = u(4 * k + 2 * out + l, 2 * in);
          } else if (out == l) {
            op(out, in) = u(2 * k + l, in);
          }
        }
      m[2 * k + l] = op;
    }
  return m;
}

inline PovmSet povm_from_kraus(const std::array<ComplexMat, 4>& m) {
  PovmSet povm;
  ComplexMat completeness(2);
  for (std::size_t nu = 0; nu < 4; ++nu) {
    if (m[nu].dim() != 2) throw std::invalid_argument("povm_from_kraus: Kraus operators must be 2x2");
    povm.elements[nu] = m[nu].adjoint() * m[nu];
    completeness += povm.elements[nu];
  }
  if (max_abs_diff(completeness, ComplexMat::identity(2)) > 1e-10)
    throw NumericalError("povm_from_kraus: Kraus set is not complete");
  validate_povm(povm);
  return povm;
}

inline PovmSet full_circuit_povm(const CircuitParams& p) {
  return povm_from_kraus(kraus_from_unitary(full_circuit_unitary(p)));
}

inline PovmSet simplified_circuit_povm(const GateAngles& a1, const GateAngles& a2) {
  return povm_from_kraus(kraus_from_unitary(simplified_circuit_unitary(a1, a2)));
}

/// Closed-form POVM of the simplified circuit:
///   E_kl = 1/4 [ (1 - k b) I + (l x1 - k l x2) X + k l y Y + k z Z ]
/// with signed k, l. Independent of a1.lambda and a2.phi.
inline PovmSet analytic_simplified_povm(const GateAngles& a1, const GateAngles& a2) {
  using std::cos;
  using std::sin;
  const double t1 = a1.theta, p1 = a1.phi, t2 = a2.theta, l2 = a2.lambda;
  const double x1 = sin(t1) * cos(p1);
  const double x2 = sin(t2) * cos(l2);
  const double b = x1 * x2;
  const double y = cos(t1) * sin(t2) * sin(l2) - sin(t1) * sin(p1) * cos(t2);
  const double z = cos(t1) * cos(t2) + sin(t1) * sin(p1) * sin(t2) * sin(l2);

  PovmSet povm;
  for (int kb = 0; kb < 2; ++kb)
    for (int lb = 0; lb < 2; ++lb) {
      const double k = kb == 0 ? 1.0 : -1.0;
      const double l = lb == 0 ? 1.0 : -1.0;
      povm.elements[2 * kb + lb] = 0.25 * ((1.0 - k * b) * pauli(0) + (l * x1 - k * l * x2) * pauli(1) +
                                           (k * l * y) * pauli(2) + (k * z) * pauli(3));
    }
  return povm;
}

/// Regular-tetrahedron SIC: E_kl = 1/4 [I + a.sigma], a = (-l, -kl, k)/sqrt(3).
inline PovmSet canonical_sic_povm() {
  const double r = 1.0 / std::sqrt(3.0);
  PovmSet povm;
  for (int kb = 0; kb < 2; ++kb)
    for (int lb = 0; lb < 2; ++lb) {
      const double k = kb == 0 ? 1.0 : -1.0;
      const double l = lb == 0 ? 1.0 : -1.0;
      povm.elements[2 * kb + lb] =
          0.25 * (pauli(0) + (-l * r) * pauli(1) + (-k * l * r) * pauli(2) + (k * r) * pauli(3));
    }
  return povm;
}

/// Gate angles of the tetrahedral optimum: a1 = (-acos(1/sqrt 3), -pi/4, 0),
/// every other gate the identity.
inline CircuitParams optimal_circuit_params() {
  CircuitParams p;
  p.a1 = {-std::acos(1.0 / std::sqrt(3.0)), -kPi / 4.0, 0.0};
  return p;
}

/// {|0><0|, |1><1|, 0, 0}: a complete but informationally incomplete POVM.
inline PovmSet padded_z_povm() {
  PovmSet povm;
  povm.elements = {detail::projector(0), detail::projector(1), ComplexMat(2), ComplexMat(2)};
  return povm;
}

}  // namespace qsic
