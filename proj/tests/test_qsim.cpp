#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tcsim/qsim.hpp"

using namespace tcsim;
using numkit::Complex;
using numkit::ComplexMatrix;
using numkit::ComplexVector;

namespace {

numkit::Operator swap_gate(int a, int b) {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = m(3, 3) = m(1, 2) = m(2, 1) = 1.0;
  return numkit::Operator(m, {a, b});
}

// Dilation generator for a lowering-type operator: maps |psi>|0> to (L|psi>)|1>.
ComplexMatrix lowering_dilation_generator(const ComplexMatrix& l) {
  ComplexMatrix ket01 = ComplexMatrix::Zero(2, 2), ket10 = ComplexMatrix::Zero(2, 2);
  ket01(0, 1) = 1.0;
  ket10(1, 0) = 1.0;
  return numkit::kron(ComplexMatrix(l.adjoint()), ket01) + numkit::kron(l, ket10);
}

}  // namespace

TEST_SUITE("qsim") {

TEST_CASE("X on qubit 0 flips the leftmost bit") {
  auto state = qsim::RegisterState::statevector(2);
  qsim::apply_unitary(state, numkit::Operator(numkit::pauli('X'), {0}));
  CHECK(std::abs(state.vector[2] - Complex(1.0, 0.0)) <= 1e-15);  // |10>
}

TEST_CASE("SWAP exchanges |01> and |10>") {
  ComplexVector amp = ComplexVector::Zero(4);
  amp[1] = 1.0;  // |01>
  auto state = qsim::RegisterState::statevector_from(amp);
  qsim::apply_unitary(state, swap_gate(0, 1));
  CHECK(std::abs(state.vector[2] - Complex(1.0, 0.0)) <= 1e-15);  // |10>
}

TEST_CASE("random two-qubit gate on a random three-qubit state matches dense embedding") {
  std::mt19937_64 rng(31);
  const ComplexMatrix gate = refcalc::random_unitary(4, rng);
  const ComplexVector psi = refcalc::random_state(8, rng);

  auto state = qsim::RegisterState::statevector_from(psi);
  const std::vector<int> labels = {2, 0};
  qsim::apply_unitary(state, numkit::Operator(gate, labels));

  const ComplexMatrix dense = refcalc::embed_gate_dense(gate, labels, 3);
  CHECK((state.vector - dense * psi).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("exact mode conjugates the density matrix") {
  std::mt19937_64 rng(32);
  const ComplexMatrix gate = refcalc::random_unitary(4, rng);
  const ComplexMatrix rho = refcalc::random_density_matrix(8, rng);

  auto state = qsim::RegisterState::density_matrix_from(rho);
  const std::vector<int> labels = {1, 2};
  qsim::apply_unitary(state, numkit::Operator(gate, labels));

  const ComplexMatrix dense = refcalc::embed_gate_dense(gate, labels, 3);
  CHECK((state.dm - dense * rho * dense.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gates reject non-unitary matrices and bad labels") {
  auto state = qsim::RegisterState::statevector(2);
  ComplexMatrix bad = numkit::identity(2);
  bad(0, 0) = 2.0;
  CHECK_THROWS_AS(qsim::apply_unitary(state, numkit::Operator(bad, {0})), NotUnitary);
  CHECK_THROWS_AS(qsim::apply_unitary(state, numkit::Operator(numkit::pauli('X'), {5})),
                  LabelOutOfRange);
}

TEST_CASE("dilated identity leaves the state unchanged") {
  std::mt19937_64 eng(33);
  const ComplexVector psi = refcalc::random_state(4, eng);
  auto state = qsim::RegisterState::statevector_from(psi);
  qsim::RandomSource rng(7);
  qsim::apply_dilated_channel(state, numkit::Operator(numkit::identity(4), {0, 2}), 1, rng);
  CHECK((state.vector - psi).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(state.ancilla_outcomes == std::vector<int>{0});
}

TEST_CASE("swapping a qubit with a fresh ancilla resets it to |0>") {
  ComplexVector amp = ComplexVector::Zero(2);
  amp[1] = 1.0;  // |1>
  auto state = qsim::RegisterState::statevector_from(amp);
  qsim::RandomSource rng(8);
  qsim::apply_dilated_channel(state, swap_gate(0, 1), 1, rng);
  CHECK(std::abs(state.vector[0] - Complex(1.0, 0.0)) <= 1e-12);
  CHECK(state.ancilla_outcomes == std::vector<int>{1});
}

TEST_CASE("a short dilation reproduces the first-order dissipator on |1><1|") {
  ComplexMatrix sigma_minus = ComplexMatrix::Zero(2, 2);
  sigma_minus(0, 1) = 1.0;
  const double tau = 0.04;
  const ComplexMatrix u = numkit::expm_hermitian(lowering_dilation_generator(sigma_minus),
                                                 std::sqrt(tau));

  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  rho(1, 1) = 1.0;
  auto state = qsim::RegisterState::density_matrix_from(rho);
  qsim::RandomSource rng(9);
  qsim::apply_dilated_channel(state, numkit::Operator(u, {0, 1}), 1, rng);

  const ComplexMatrix ldag_l = sigma_minus.adjoint() * sigma_minus;
  const ComplexMatrix expected =
      rho + tau * (sigma_minus * rho * sigma_minus.adjoint() -
                   0.5 * (ldag_l * rho + rho * ldag_l));
  CHECK(numkit::trace_distance(state.dm, expected) <= 5 * tau * tau);
}

TEST_CASE("dilated channels respect the register cap") {
  auto state = qsim::RegisterState::density_matrix(numkit::kMaxDensityMatrixQubits - 1);
  qsim::RandomSource rng(10);
  CHECK_THROWS_AS(
      qsim::apply_dilated_channel(
          state, numkit::Operator(numkit::identity(4), {0, numkit::kMaxDensityMatrixQubits - 1}),
          2, rng),
      AncillaBudgetExceeded);
}

TEST_CASE("a block gate that ignores its ancilla acts like a plain unitary") {
  std::mt19937_64 eng(34);
  const ComplexMatrix v = refcalc::random_unitary(4, eng);
  const ComplexMatrix block = numkit::kron(v, numkit::identity(2));

  auto with_ancilla = qsim::RegisterState::density_matrix_from(refcalc::random_density_matrix(4, eng));
  auto plain = with_ancilla;
  qsim::RandomSource rng(11);
  qsim::apply_dilated_channel(with_ancilla, numkit::Operator(block, {0, 1, 2}), 1, rng);
  qsim::apply_unitary(plain, numkit::Operator(v, {0, 1}));
  CHECK((with_ancilla.dm - plain.dm).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("measure_all on a basis state is deterministic") {
  ComplexVector amp = ComplexVector::Zero(4);
  amp[3] = 1.0;  // |11>
  auto state = qsim::RegisterState::statevector_from(amp);
  qsim::RandomSource rng(12);
  const auto record = qsim::measure_all(state, rng);
  CHECK(record.bitstring == std::vector<int>{1, 1});
  CHECK(record.seed == 12);
}

TEST_CASE("measure_all requires Shot mode") {
  auto state = qsim::RegisterState::density_matrix(1);
  qsim::RandomSource rng(13);
  CHECK_THROWS_AS(qsim::measure_all(state, rng), WrongMode);
}

TEST_CASE("Bell-state shots split evenly within binomial noise") {
  const int shots = 10000;
  ComplexVector bell = ComplexVector::Zero(4);
  bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
  qsim::RandomSource master(14);
  int count00 = 0;
  for (int s = 0; s < shots; ++s) {
    auto state = qsim::RegisterState::statevector_from(bell);
    auto rng = master.split(static_cast<std::uint64_t>(s));
    const auto record = qsim::measure_all(state, rng);
    CHECK(record.bitstring[0] == record.bitstring[1]);
    if (record.bitstring[0] == 0) ++count00;
  }
  const double fraction = static_cast<double>(count00) / shots;
  CHECK(std::abs(fraction - 0.5) <= 3.0 / std::sqrt(static_cast<double>(shots)));
}

TEST_CASE("three-qubit shot histogram passes a chi-squared test against Born probabilities") {
  std::mt19937_64 eng(35);
  const ComplexVector psi = refcalc::random_state(8, eng);
  const int shots = 20000;
  qsim::RandomSource master(15);
  std::vector<int> counts(8, 0);
  for (int s = 0; s < shots; ++s) {
    auto state = qsim::RegisterState::statevector_from(psi);
    auto rng = master.split(static_cast<std::uint64_t>(s));
    const auto record = qsim::measure_all(state, rng);
    int index = 0;
    for (int bit : record.bitstring) index = (index << 1) | bit;
    ++counts[static_cast<std::size_t>(index)];
  }
  double chi2 = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double expected = shots * std::norm(psi[i]);
    chi2 += (counts[static_cast<std::size_t>(i)] - expected) *
            (counts[static_cast<std::size_t>(i)] - expected) / expected;
  }
  CHECK(chi2 <= 18.475);  // 99% quantile of chi-squared with 7 degrees of freedom
}

TEST_CASE("shot-averaged projectors converge to the exact density matrix") {
  // Two-qubit circuit with a unitary, a dissipative dilation, and another unitary.
  std::mt19937_64 eng(36);
  const ComplexMatrix u1 = refcalc::random_unitary(4, eng);
  const ComplexMatrix u2 = refcalc::random_unitary(2, eng);
  ComplexMatrix sigma_minus = ComplexMatrix::Zero(2, 2);
  sigma_minus(0, 1) = 1.0;
  const ComplexMatrix dilation =
      numkit::expm_hermitian(lowering_dilation_generator(sigma_minus), std::sqrt(0.3));

  auto run = [&](qsim::RegisterState state, qsim::RandomSource rng) {
    qsim::apply_unitary(state, numkit::Operator(u1, {0, 1}));
    qsim::apply_dilated_channel(state, numkit::Operator(dilation, {1, 2}), 1, rng);
    qsim::apply_unitary(state, numkit::Operator(u2, {0}));
    return state;
  };

  qsim::RandomSource master(16);
  auto exact = run(qsim::RegisterState::density_matrix(2), master);

  const int shots = 100000;
  ComplexMatrix averaged = ComplexMatrix::Zero(4, 4);
  for (int s = 0; s < shots; ++s) {
    auto final_state = run(qsim::RegisterState::statevector(2),
                           master.split(static_cast<std::uint64_t>(s)));
    averaged += qsim::state_density_matrix(final_state);
  }
  averaged /= static_cast<double>(shots);
  CHECK(numkit::trace_distance(averaged, exact.dm) <= 5.0 * std::sqrt(16.0 / shots));
}

TEST_CASE("exact-mode circuits preserve trace and Hermiticity") {
  std::mt19937_64 eng(37);
  auto state = qsim::RegisterState::density_matrix_from(refcalc::random_density_matrix(8, eng));
  qsim::RandomSource rng(17);
  ComplexMatrix sigma_minus = ComplexMatrix::Zero(2, 2);
  sigma_minus(0, 1) = 1.0;
  const ComplexMatrix dilation =
      numkit::expm_hermitian(lowering_dilation_generator(sigma_minus), 0.4);
  for (int round = 0; round < 4; ++round) {
    qsim::apply_unitary(state, numkit::Operator(refcalc::random_unitary(4, eng), {0, 2}));
    qsim::apply_dilated_channel(state, numkit::Operator(dilation, {1, 3}), 1, rng);
  }
  CHECK(std::abs(state.dm.trace() - Complex(1.0, 0.0)) <= 1e-8);
  CHECK((state.dm - state.dm.adjoint()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("channel_superoperator of the identity channel is the identity matrix") {
  auto identity_channel = [](const qsim::RegisterState& in) { return in; };
  const ComplexMatrix s = qsim::channel_superoperator(identity_channel, 2);
  CHECK((s - numkit::identity(16)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("channel_superoperator of X conjugation is X kron X") {
  auto conjugate_x = [](const qsim::RegisterState& in) {
    auto out = in;
    out.dm = numkit::pauli('X') * in.dm * numkit::pauli('X');
    return out;
  };
  const ComplexMatrix s = qsim::channel_superoperator(conjugate_x, 1);
  CHECK((s - numkit::kron(numkit::pauli('X'), numkit::pauli('X'))).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("channel_superoperator matches the Kraus-sum reference for a reset channel") {
  ComplexMatrix k0 = ComplexMatrix::Zero(2, 2), k1 = ComplexMatrix::Zero(2, 2);
  k0(0, 0) = 1.0;
  k1(0, 1) = 1.0;
  auto reset = [&](const qsim::RegisterState& in) {
    auto out = in;
    out.dm = k0 * in.dm * k0.adjoint() + k1 * in.dm * k1.adjoint();
    return out;
  };
  const ComplexMatrix s = qsim::channel_superoperator(reset, 1);
  CHECK((s - refcalc::kraus_superoperator({k0, k1})).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("random sources are reproducible and split streams decorrelate") {
  qsim::RandomSource a(42), b(42);
  for (int i = 0; i < 16; ++i) CHECK(a.uniform() == b.uniform());

  auto s1 = qsim::RandomSource(42).split(1);
  auto s2 = qsim::RandomSource(42).split(2);
  bool any_different = false;
  for (int i = 0; i < 16; ++i)
    if (s1.uniform() != s2.uniform()) any_different = true;
  CHECK(any_different);
}

}  // TEST_SUITE
