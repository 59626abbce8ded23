#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qsic/qcore.hpp"

using namespace qsic;

namespace {

ComplexMat random_mat(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMat m(dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) m(r, c) = cplx{n(rng), n(rng)};
  return m;
}

ComplexMat random_density(std::mt19937_64& rng, double rmax = 1.0) {
  const auto s = oracle::random_bloch(rng, rmax);
  return bloch_to_density(BlochVec(s));
}

}  // namespace

TEST(ComplexMat, RejectsUnsupportedDimensions) {
  EXPECT_THROW(ComplexMat(3), std::invalid_argument);
  EXPECT_THROW(ComplexMat(16), std::invalid_argument);
  EXPECT_THROW((ComplexMat{1.0, 2.0, 3.0}), std::invalid_argument);
  EXPECT_THROW((ComplexMat{1.0, std::nan(""), 0.0, 1.0}), std::invalid_argument);
}

TEST(ComplexMat, MismatchedDimensionsThrow) {
  EXPECT_THROW(ComplexMat::identity(2) * ComplexMat::identity(4), std::invalid_argument);
  EXPECT_THROW(ComplexMat::identity(2) + ComplexMat::identity(4), std::invalid_argument);
}

TEST(ComplexMat, ProductMatchesHandSum) {
  std::mt19937_64 rng(1);
  for (std::size_t dim : {2u, 4u, 8u}) {
    const ComplexMat a = random_mat(rng, dim), b = random_mat(rng, dim);
    const ComplexMat c = a * b;
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) {
        cplx acc = 0.0;
        for (std::size_t k = 0; k < dim; ++k) acc += a(i, k) * b(k, j);
        EXPECT_LT(std::abs(c(i, j) - acc), 1e-12);
      }
  }
}

TEST(ComplexMat, AdjointAndTrace) {
  std::mt19937_64 rng(2);
  const ComplexMat a = random_mat(rng, 4);
  const ComplexMat ad = a.adjoint();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(ad(i, j), std::conj(a(j, i)));
  EXPECT_LT(std::abs((a * ad).trace() - (ad * a).trace()), 1e-12);
}

TEST(Tensor, MatchesIndexFormula) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMat a = random_mat(rng, 2), b = random_mat(rng, 4);
    EXPECT_LT(max_abs_diff(tensor(a, b), oracle::kron(a, b)), 1e-14);
    EXPECT_LT(max_abs_diff(tensor(b, a), oracle::kron(b, a)), 1e-14);
  }
  EXPECT_THROW(tensor(ComplexMat::identity(4), ComplexMat::identity(4)), std::invalid_argument);
}

TEST(Pauli, AlgebraRelations) {
  const cplx i{0.0, 1.0};
  EXPECT_LT(max_abs_diff(pauli(1) * pauli(2), pauli(3) * i), 1e-15);
  for (int mu = 0; mu < 4; ++mu) {
    EXPECT_TRUE(pauli(mu).is_hermitian());
    EXPECT_TRUE(pauli(mu).is_unitary());
  }
  EXPECT_THROW(pauli(4), std::invalid_argument);
}

TEST(CheckedWrappers, RejectInvalidInput) {
  ComplexMat m = ComplexMat::identity(2);
  m(0, 1) = 0.5;
  EXPECT_THROW(checked_unitary(m), NumericalError);
  EXPECT_THROW(checked_hermitian(m), NumericalError);
  EXPECT_NO_THROW(checked_unitary(pauli(2)));
}

TEST(Bloch, DensityRoundTrip) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const BlochVec s(oracle::random_bloch(rng));
    const BlochVec back = density_to_bloch(bloch_to_density(s));
    for (std::size_t mu = 0; mu < 4; ++mu) EXPECT_NEAR(back[mu], s[mu], 1e-14);
  }
}

TEST(Bloch, DensityToBlochValidates) {
  ComplexMat m = ComplexMat::identity(2);  // trace 2
  EXPECT_THROW(density_to_bloch(m), std::invalid_argument);
  ComplexMat h(2);
  h(0, 0) = 1.0;
  h(0, 1) = cplx{0.0, 0.3};
  EXPECT_THROW(density_to_bloch(h), std::invalid_argument);
  EXPECT_THROW(density_to_bloch(ComplexMat::identity(4) * 0.25), std::invalid_argument);
}

TEST(Bloch, PhysicalityBoundary) {
  EXPECT_TRUE(BlochVec(0, 0, 1).is_physical());
  EXPECT_TRUE(BlochVec(0, 0, 1.0 + 1e-10).is_physical());
  EXPECT_FALSE(BlochVec(0, 0, 1.0 + 1e-6).is_physical());
}

TEST(StateAngles, RangesAreEnforced) {
  EXPECT_THROW(StateAngles(-0.1, 0.0), std::invalid_argument);
  EXPECT_THROW(StateAngles(0.0, 4.0), std::invalid_argument);
  EXPECT_NO_THROW(StateAngles(kPi / 2, kPi));
}

TEST(StateAngles, PureStateMatchesBlochVector) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a1(0.0, kPi / 2), a2(0.0, kPi);
  for (int trial = 0; trial < 200; ++trial) {
    const StateAngles xi(a1(rng), a2(rng));
    const ComplexMat rho = pure_state_from_angles(xi);
    EXPECT_LT(max_abs_diff(rho, bloch_to_density(xi.bloch())), 1e-14);
    EXPECT_NEAR(purity(rho), 1.0, 1e-14);
    EXPECT_NEAR(xi.bloch().norm(), 1.0, 1e-14);
  }
}

TEST(Eigen, ClosedFormMatchesCharacteristicPolynomial) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    ComplexMat h(2);
    h(0, 0) = n(rng);
    h(1, 1) = n(rng);
    h(0, 1) = cplx{n(rng), n(rng)};
    h(1, 0) = std::conj(h(0, 1));
    const auto ev = hermitian_eigenvalues(h);
    const auto ref = oracle::eig2(h);
    EXPECT_NEAR(ev[0], ref.values[0], 1e-12);
    EXPECT_NEAR(ev[1], ref.values[1], 1e-12);
  }
}

TEST(Fidelity, MatchesMatrixSquareRootRoute) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const ComplexMat rho = random_density(rng), sigma = random_density(rng);
    EXPECT_NEAR(fidelity(rho, sigma), oracle::fidelity(rho, sigma), 1e-9);
  }
}

TEST(Fidelity, PureStatesAndIdentity) {
  const ComplexMat z0 = bloch_to_density(BlochVec(0, 0, 1));
  const ComplexMat z1 = bloch_to_density(BlochVec(0, 0, -1));
  const ComplexMat x0 = bloch_to_density(BlochVec(1, 0, 0));
  EXPECT_NEAR(fidelity(z0, z0), 1.0, 1e-15);
  EXPECT_NEAR(fidelity(z0, z1), 0.0, 1e-15);
  EXPECT_NEAR(fidelity(z0, x0), 0.5, 1e-15);
}

TEST(Fidelity, RejectsNonPsd) {
  const ComplexMat bad = bloch_to_density(BlochVec(0, 0, 1.2));
  const ComplexMat ok = bloch_to_density(BlochVec(0, 0, 0.5));
  EXPECT_THROW(fidelity(bad, ok), NumericalError);
}

TEST(Purity, ExceedsOneOutsideTheBall) {
  EXPECT_NEAR(purity(bloch_to_density(BlochVec(0, 0, 1.2))), (1.0 + 1.44) / 2.0, 1e-15);
  EXPECT_NEAR(purity(bloch_to_density(BlochVec())), 0.5, 1e-15);
}

TEST(DominantEigenstate, ProjectsOntoLargestEigenvector) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const ComplexMat rho = random_density(rng);
    const ComplexMat p = dominant_eigenstate(rho);
    const auto ref = oracle::eig2(rho);
    const auto& v = ref.vectors[1];
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) EXPECT_LT(std::abs(p(r, c) - v[r] * std::conj(v[c])), 1e-9);
  }
  EXPECT_THROW(dominant_eigenstate(bloch_to_density(BlochVec())), NumericalError);
}
