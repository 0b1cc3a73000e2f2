#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tcsim/numkit.hpp"

using namespace tcsim;
using numkit::Complex;
using numkit::ComplexMatrix;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_SUITE("numkit") {

TEST_CASE("kron of identities is the identity") {
  const ComplexMatrix i2 = numkit::identity(2);
  CHECK((numkit::kron(i2, i2) - numkit::identity(4)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kron of X and Z places Z blocks on the antidiagonal") {
  const ComplexMatrix xz = numkit::kron(numkit::pauli('X'), numkit::pauli('Z'));
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected.block(0, 2, 2, 2) = numkit::pauli('Z');
  expected.block(2, 0, 2, 2) = numkit::pauli('Z');
  CHECK((xz - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kron matches the index-formula reference on random factors") {
  std::mt19937_64 rng(11);
  const ComplexMatrix a = refcalc::random_matrix(2, 2, rng);
  const ComplexMatrix b = refcalc::random_matrix(4, 4, rng);
  CHECK((numkit::kron(a, b) - refcalc::kron_index_formula(a, b)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("kron is associative entrywise") {
  std::mt19937_64 rng(12);
  const ComplexMatrix a = refcalc::random_matrix(2, 2, rng);
  const ComplexMatrix b = refcalc::random_matrix(3, 3, rng);
  const ComplexMatrix c = refcalc::random_matrix(2, 2, rng);
  const ComplexMatrix left = numkit::kron(numkit::kron(a, b), c);
  const ComplexMatrix right = numkit::kron(a, numkit::kron(b, c));
  CHECK((left - right).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("kron on operators concatenates qubit labels") {
  const numkit::Operator a(numkit::pauli('X'), {2});
  const numkit::Operator b(numkit::pauli('Z'), {0});
  const auto ab = numkit::kron(a, b);
  CHECK(ab.qubit_labels == std::vector<int>{2, 0});
  CHECK(ab.dim() == 4);
}

TEST_CASE("operator construction rejects bad shapes and duplicate labels") {
  CHECK_THROWS_AS(numkit::Operator(numkit::identity(3), {0, 1}), DimensionMismatch);
  CHECK_THROWS_AS(numkit::Operator(numkit::identity(4), {1, 1}), LabelOutOfRange);
}

TEST_CASE("expm_hermitian of Z through a half turn gives minus identity") {
  const ComplexMatrix u = numkit::expm_hermitian(numkit::pauli('Z'), kPi);
  CHECK((u + numkit::identity(2)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("expm_hermitian of X through a quarter turn gives -iX") {
  const ComplexMatrix u = numkit::expm_hermitian(numkit::pauli('X'), kPi / 2);
  const ComplexMatrix expected = Complex(0, -1) * numkit::pauli('X');
  CHECK((u - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("expm_hermitian matches a truncated Taylor series on a random generator") {
  std::mt19937_64 rng(13);
  const ComplexMatrix h = refcalc::random_hermitian(8, rng);
  const double theta = 0.3;
  const ComplexMatrix u = numkit::expm_hermitian(h, theta);
  const ComplexMatrix ref = refcalc::expm_taylor(Complex(0, -1) * h, theta, 40);
  CHECK((u - ref).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("expm_hermitian forward then backward returns the identity") {
  std::mt19937_64 rng(14);
  const ComplexMatrix h = refcalc::random_hermitian(6, rng);
  const ComplexMatrix round_trip = numkit::expm_hermitian(h, 0.7) * numkit::expm_hermitian(h, -0.7);
  CHECK((round_trip - numkit::identity(6)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("expm_hermitian rejects a non-Hermitian generator") {
  ComplexMatrix m(2, 2);
  m << 0, 1, 0, 0;
  CHECK_THROWS_AS(numkit::expm_hermitian(m, 1.0), NotHermitian);
}

TEST_CASE("expm_general of the zero generator is the identity") {
  const ComplexMatrix z = ComplexMatrix::Zero(5, 5);
  CHECK((numkit::expm_general(z, 5.0) - numkit::identity(5)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("expm_general exponentiates a diagonal generator entrywise") {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = -1.0;
  d(1, 1) = -2.0;
  const ComplexMatrix e = numkit::expm_general(d, 1.0);
  CHECK(std::abs(e(0, 0) - std::exp(-1.0)) <= 1e-14);
  CHECK(std::abs(e(1, 1) - std::exp(-2.0)) <= 1e-14);
  CHECK(std::abs(e(0, 1)) <= 1e-15);
}

TEST_CASE("expm_general matches the scaled Taylor reference on a random generator") {
  std::mt19937_64 rng(15);
  const ComplexMatrix m = refcalc::random_matrix(6, 6, rng);
  const ComplexMatrix e = numkit::expm_general(m, 0.7);
  const ComplexMatrix ref = refcalc::expm_taylor(m, 0.7, 60);
  CHECK((e - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("partial trace of a product state returns the kept factor") {
  std::mt19937_64 rng(16);
  const ComplexMatrix rho_a = refcalc::random_density_matrix(2, rng);
  const ComplexMatrix rho_b = refcalc::random_density_matrix(4, rng);
  const ComplexMatrix joint = numkit::kron(rho_a, rho_b);
  const ComplexMatrix reduced = numkit::partial_trace(joint, {2, 4}, {0});
  CHECK((reduced - rho_a).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("partial trace of a maximally entangled pair is maximally mixed") {
  ComplexMatrix gamma = ComplexMatrix::Zero(4, 4);
  // |Gamma> = |00> + |11>, normalized as a state here.
  for (int i : {0, 3})
    for (int j : {0, 3}) gamma(i, j) = 0.5;
  const ComplexMatrix reduced = numkit::partial_trace(gamma, {2, 2}, {0});
  CHECK((reduced - 0.5 * numkit::identity(2)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("partial trace matches the brute-force scan on a random three-qubit state") {
  std::mt19937_64 rng(17);
  const ComplexMatrix rho = refcalc::random_density_matrix(8, rng);
  const ComplexMatrix got = numkit::partial_trace(rho, {2, 2, 2}, {0, 2});
  const ComplexMatrix ref = refcalc::partial_trace_scan(rho, {2, 2, 2}, {0, 2});
  CHECK((got - ref).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(std::abs(got.trace() - rho.trace()) <= 1e-13);
}

TEST_CASE("partial trace over disjoint discard sets is order independent") {
  std::mt19937_64 rng(18);
  const ComplexMatrix rho = refcalc::random_density_matrix(16, rng);
  // Drop factor 1 then factor 3, in either order.
  const ComplexMatrix a1 = numkit::partial_trace(rho, {2, 2, 2, 2}, {0, 2, 3});
  const ComplexMatrix a2 = numkit::partial_trace(a1, {2, 2, 2}, {0, 1});
  const ComplexMatrix b1 = numkit::partial_trace(rho, {2, 2, 2, 2}, {0, 1, 2});
  const ComplexMatrix b2 = numkit::partial_trace(b1, {2, 2, 2}, {0, 2});
  CHECK((a2 - b2).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("partial trace rejects mismatched factor dimensions") {
  CHECK_THROWS_AS(numkit::partial_trace(numkit::identity(6), {2, 2}, {0}), DimensionMismatch);
}

TEST_CASE("schatten norms of simple operators") {
  CHECK(numkit::schatten_norm(numkit::identity(5), 1.0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(numkit::schatten_norm(numkit::pauli('X'), INFINITY) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("schatten norm ordering holds on random matrices") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix x = refcalc::random_matrix(6, 6, rng);
    const double n_inf = numkit::schatten_norm(x, INFINITY);
    const double n_2 = numkit::schatten_norm(x, 2.0);
    const double n_1 = numkit::schatten_norm(x, 1.0);
    CHECK(n_inf <= n_2 + 1e-10);
    CHECK(n_2 <= n_1 + 1e-10);
  }
}

TEST_CASE("trace distance basics and the eigenvalue-sum reference") {
  std::mt19937_64 rng(20);
  const ComplexMatrix rho = refcalc::random_density_matrix(6, rng);
  const ComplexMatrix sigma = refcalc::random_density_matrix(6, rng);

  CHECK(numkit::trace_distance(rho, rho) <= 1e-14);

  ComplexMatrix p0 = ComplexMatrix::Zero(2, 2), p1 = ComplexMatrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  CHECK(numkit::trace_distance(p0, p1) == doctest::Approx(1.0).epsilon(1e-12));

  const double ref = refcalc::trace_distance_eigensum(rho, sigma);
  CHECK(numkit::trace_distance(rho, sigma) == doctest::Approx(ref).epsilon(1e-12));

  CHECK_THROWS_AS(numkit::trace_distance(p0, numkit::identity(4)), DimensionMismatch);
}

TEST_CASE("embed matches the dense reference embedding") {
  std::mt19937_64 rng(22);
  const ComplexMatrix gate = refcalc::random_matrix(4, 4, rng);
  const std::vector<int> labels = {3, 1};
  const ComplexMatrix got = numkit::embed(numkit::Operator(gate, labels), 4);
  const ComplexMatrix ref = refcalc::embed_gate_dense(gate, labels, 4);
  CHECK((got - ref).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("hermiticity test is symmetric between a matrix and its adjoint") {
  std::mt19937_64 rng(21);
  const ComplexMatrix m = refcalc::random_matrix(4, 4, rng);
  CHECK(numkit::is_hermitian(m, 1e-10) == numkit::is_hermitian(ComplexMatrix(m.adjoint()), 1e-10));
  CHECK(numkit::is_hermitian(refcalc::random_hermitian(4, rng), 1e-10));
}

}  // TEST_SUITE
