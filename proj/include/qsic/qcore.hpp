#pragma once

// Small fixed-size complex linear algebra and single-qubit state utilities.
//
// Qubit ordering convention used everywhere in this library: in a tensor
// product the first factor is the most significant qubit. Three-qubit
// registers are ordered (A, S, B), two-qubit registers (A, S).

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace qsic {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Raised when a numerical precondition fails (singular matrix, degenerate
/// spectrum, non-PSD input...). Usage errors throw std::invalid_argument.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Dense square complex matrix of dimension 2, 4 or 8 (up to three qubits).
/// Storage is inline and row-major.
class ComplexMat {
public:
  static constexpr std::size_t kMaxDim = 8;

  ComplexMat() : ComplexMat(2) {}

  explicit ComplexMat(std::size_t dim) : dim_(dim) {
    if (dim != 2 && dim != 4 && dim != 8)
      throw std::invalid_argument("ComplexMat: dimension must be 2, 4 or 8, got " +
                                  std::to_string(dim));
    data_.fill(cplx{0.0, 0.0});
  }

  /// Row-major construction; the number of entries must be a valid dim^2.
  ComplexMat(std::initializer_list<cplx> entries) : ComplexMat(dim_from_count(entries.size())) {
    std::size_t i = 0;
    for (const auto& e : entries) {
      if (!std::isfinite(e.real()) || !std::isfinite(e.imag()))
        throw std::invalid_argument("ComplexMat: non-finite entry");
      data_[i++] = e;
    }
  }

  static ComplexMat identity(std::size_t dim) {
    ComplexMat m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMat zero(std::size_t dim) { return ComplexMat(dim); }

  std::size_t dim() const { return dim_; }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }

  ComplexMat adjoint() const {
    ComplexMat out(dim_);
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
  }

  cplx trace() const {
    cplx t{0.0, 0.0};
    for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  bool all_finite() const {
    for (std::size_t i = 0; i < dim_ * dim_; ++i)
      if (!std::isfinite(data_[i].real()) || !std::isfinite(data_[i].imag())) return false;
    return true;
  }

  ComplexMat& operator+=(const ComplexMat& o) {
    require_same_dim(o);
    for (std::size_t i = 0; i < dim_ * dim_; ++i) data_[i] += o.data_[i];
    return *this;
  }
  ComplexMat& operator-=(const ComplexMat& o) {
    require_same_dim(o);
    for (std::size_t i = 0; i < dim_ * dim_; ++i) data_[i] -= o.data_[i];
    return *this;
  }
  ComplexMat& operator*=(cplx a) {
    for (std::size_t i = 0; i < dim_ * dim_; ++i) data_[i] *= a;
    return *this;
  }

  friend ComplexMat operator+(ComplexMat a, const ComplexMat& b) { return a += b; }
  friend ComplexMat operator-(ComplexMat a, const ComplexMat& b) { return a -= b; }
  friend ComplexMat operator*(ComplexMat a, cplx s) { return a *= s; }
  friend ComplexMat operator*(cplx s, ComplexMat a) { return a *= s; }
  friend ComplexMat operator*(ComplexMat a, double s) { return a *= cplx{s, 0.0}; }
  friend ComplexMat operator*(double s, ComplexMat a) { return a *= cplx{s, 0.0}; }

  friend ComplexMat operator*(const ComplexMat& a, const ComplexMat& b) {
    a.require_same_dim(b);
    const std::size_t n = a.dim_;
    ComplexMat out(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < n; ++k) {
        const cplx ark = a(r, k);
        if (ark == cplx{0.0, 0.0}) continue;
        for (std::size_t c = 0; c < n; ++c) out(r, c) += ark * b(k, c);
      }
    return out;
  }

  /// Largest entrywise modulus of (a - b).
  friend double max_abs_diff(const ComplexMat& a, const ComplexMat& b) {
    a.require_same_dim(b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim_ * a.dim_; ++i) m = std::max(m, std::abs(a.data_[i] - b.data_[i]));
    return m;
  }

  bool is_hermitian(double tol = 1e-12) const { return max_abs_diff(*this, adjoint()) < tol; }

  bool is_unitary(double tol = 1e-12) const {
    return max_abs_diff(adjoint() * (*this), identity(dim_)) < tol;
  }

private:
  static std::size_t dim_from_count(std::size_t n) {
    switch (n) {
      case 4: return 2;
      case 16: return 4;
      case 64: return 8;
      default:
        throw std::invalid_argument("ComplexMat: initializer must hold 4, 16 or 64 entries");
    }
  }

  void require_same_dim(const ComplexMat& o) const {
    if (o.dim_ != dim_) throw std::invalid_argument("ComplexMat: dimension mismatch");
  }

  std::size_t dim_;
  std::array<cplx, kMaxDim * kMaxDim> data_{};
};

/// Returns `u` after checking ||U^dagger U - I||_max < tol.
inline ComplexMat checked_unitary(ComplexMat u, double tol = 1e-12) {
  if (!u.all_finite()) throw std::invalid_argument("checked_unitary: non-finite entries");
  if (!u.is_unitary(tol)) throw NumericalError("checked_unitary: matrix is not unitary");
  return u;
}

/// Returns `h` after checking ||H - H^dagger||_max < tol.
inline ComplexMat checked_hermitian(ComplexMat h, double tol = 1e-12) {
  if (!h.all_finite()) throw std::invalid_argument("checked_hermitian: non-finite entries");
  if (!h.is_hermitian(tol)) throw NumericalError("checked_hermitian: matrix is not Hermitian");
  return h;
}

/// Pauli basis sigma_0 = I, sigma_1 = X, sigma_2 = Y, sigma_3 = Z.
inline ComplexMat pauli(int mu) {
  const cplx i{0.0, 1.0};
  switch (mu) {
    case 0: return ComplexMat{1.0, 0.0, 0.0, 1.0};
    case 1: return ComplexMat{0.0, 1.0, 1.0, 0.0};
    case 2: return ComplexMat{0.0, -i, i, 0.0};
    case 3: return ComplexMat{1.0, 0.0, 0.0, -1.0};
    default: throw std::invalid_argument("pauli: index must be 0..3");
  }
}

/// Kronecker product; `a` is the more significant factor.
inline ComplexMat tensor(const ComplexMat& a, const ComplexMat& b) {
  const std::size_t da = a.dim(), db = b.dim();
  if (da * db > ComplexMat::kMaxDim)
    throw std::invalid_argument("tensor: result dimension " + std::to_string(da * db) +
                                " exceeds 8");
  ComplexMat out(da * db);
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < da; ++j) {
      const cplx aij = a(i, j);
      for (std::size_t k = 0; k < db; ++k)
        for (std::size_t l = 0; l < db; ++l) out(i * db + k, j * db + l) = aij * b(k, l);
    }
  return out;
}

/// Bloch 4-vector (s0, sx, sy, sz). s0 is 1 for normalized states.
struct BlochVec {
  static constexpr double kPhysicalTol = 1e-9;

  std::array<double, 4> s{1.0, 0.0, 0.0, 0.0};

  BlochVec() = default;
  BlochVec(double x, double y, double z) : s{1.0, x, y, z} {}
  explicit BlochVec(const std::array<double, 4>& v) : s(v) {}

  double operator[](std::size_t mu) const { return s[mu]; }
  double& operator[](std::size_t mu) { return s[mu]; }

  double x() const { return s[1]; }
  double y() const { return s[2]; }
  double z() const { return s[3]; }

  double norm_sq() const { return s[1] * s[1] + s[2] * s[2] + s[3] * s[3]; }
  double norm() const { return std::sqrt(norm_sq()); }

  /// Inside the unit ball (up to kPhysicalTol). Linear inversion may
  /// legitimately produce vectors for which this is false.
  bool is_physical() const { return norm_sq() <= 1.0 + kPhysicalTol; }

  friend bool operator==(const BlochVec&, const BlochVec&) = default;
};

/// Pure-state angles: |psi> = e^{i a2} cos(a1)|0> + e^{-i a2} sin(a1)|1>.
struct StateAngles {
  double alpha1 = 0.0;  // [0, pi/2]
  double alpha2 = 0.0;  // [0, pi]

  StateAngles() = default;
  StateAngles(double a1, double a2) : alpha1(a1), alpha2(a2) {
    constexpr double eps = 1e-12;
    if (!(a1 >= -eps && a1 <= kPi / 2 + eps) || !(a2 >= -eps && a2 <= kPi + eps))
      throw std::invalid_argument("StateAngles: alpha1 must lie in [0, pi/2] and alpha2 in [0, pi]");
  }

  /// Bloch vector of the pure state; polar angle 2*alpha1, azimuth -2*alpha2.
  BlochVec bloch() const {
    const double st = std::sin(2.0 * alpha1);
    return {st * std::cos(2.0 * alpha2), -st * std::sin(2.0 * alpha2), std::cos(2.0 * alpha1)};
  }
};

inline ComplexMat bloch_to_density(const BlochVec& s) {
  ComplexMat rho(2);
  for (int mu = 0; mu < 4; ++mu) rho += pauli(mu) * (0.5 * s[mu]);
  return rho;
}

namespace detail {

inline void require_density_like(const ComplexMat& rho, const char* who) {
  if (rho.dim() != 2) throw std::invalid_argument(std::string(who) + ": expected a 2x2 matrix");
  if (!rho.all_finite()) throw std::invalid_argument(std::string(who) + ": non-finite entries");
  if (!rho.is_hermitian(1e-10)) throw std::invalid_argument(std::string(who) + ": matrix is not Hermitian");
  const cplx tr = rho.trace();
  if (std::abs(tr.real() - 1.0) > 1e-9 || std::abs(tr.imag()) > 1e-9)
    throw std::invalid_argument(std::string(who) + ": trace is not 1");
}

// Bloch coefficients of an arbitrary Hermitian 2x2 (no trace requirement).
inline std::array<double, 4> pauli_coefficients(const ComplexMat& h) {
  return {(h(0, 0) + h(1, 1)).real(), 2.0 * h(1, 0).real(), 2.0 * h(1, 0).imag(),
          (h(0, 0) - h(1, 1)).real()};
}

}  // namespace detail

inline BlochVec density_to_bloch(const ComplexMat& rho) {
  detail::require_density_like(rho, "density_to_bloch");
  BlochVec out(detail::pauli_coefficients(rho));
  out[0] = 1.0;
  return out;
}

inline ComplexMat pure_state_from_angles(const StateAngles& xi) {
  const cplx i{0.0, 1.0};
  const cplx c0 = std::exp(i * xi.alpha2) * std::cos(xi.alpha1);
  const cplx c1 = std::exp(-i * xi.alpha2) * std::sin(xi.alpha1);
  ComplexMat rho(2);
  rho(0, 0) = c0 * std::conj(c0);
  rho(0, 1) = c0 * std::conj(c1);
  rho(1, 0) = c1 * std::conj(c0);
  rho(1, 1) = c1 * std::conj(c1);
  return rho;
}

/// Tr(rho^2). Non-physical unit-trace Hermitian inputs give values above 1.
inline double purity(const ComplexMat& rho) {
  detail::require_density_like(rho, "purity");
  double acc = 0.0;
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) acc += std::norm(rho(r, c));
  return acc;
}

/// Eigenvalues (ascending) of a 2x2 Hermitian matrix, closed form.
inline std::array<double, 2> hermitian_eigenvalues(const ComplexMat& h) {
  const auto c = detail::pauli_coefficients(h);
  const double r = std::sqrt(c[1] * c[1] + c[2] * c[2] + c[3] * c[3]);
  return {0.5 * (c[0] - r), 0.5 * (c[0] + r)};
}

/// Uhlmann fidelity [Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2 through the qubit
/// identity F = Tr(rho sigma) + 2 sqrt(det rho det sigma).
inline double fidelity(const ComplexMat& rho, const ComplexMat& sigma) {
  detail::require_density_like(rho, "fidelity");
  detail::require_density_like(sigma, "fidelity");
  constexpr double psd_tol = 1e-9;
  if (hermitian_eigenvalues(rho)[0] < -psd_tol || hermitian_eigenvalues(sigma)[0] < -psd_tol)
    throw NumericalError("fidelity: input is not positive semidefinite");
  const double overlap = (rho * sigma).trace().real();
  const double det_r = std::max(0.0, (rho(0, 0) * rho(1, 1) - rho(0, 1) * rho(1, 0)).real());
  const double det_s = std::max(0.0, (sigma(0, 0) * sigma(1, 1) - sigma(0, 1) * sigma(1, 0)).real());
  return overlap + 2.0 * std::sqrt(det_r * det_s);
}

/// Projector onto the eigenvector of the largest eigenvalue. Throws
/// NumericalError when the two eigenvalues coincide to 1e-12.
inline ComplexMat dominant_eigenstate(const ComplexMat& rho) {
  detail::require_density_like(rho, "dominant_eigenstate");
  const auto c = detail::pauli_coefficients(rho);
  const double r = std::sqrt(c[1] * c[1] + c[2] * c[2] + c[3] * c[3]);
  if (r < 1e-12) throw NumericalError("dominant_eigenstate: degenerate spectrum");
  return bloch_to_density(BlochVec(c[1] / r, c[2] / r, c[3] / r));
}

}  // namespace qsic
