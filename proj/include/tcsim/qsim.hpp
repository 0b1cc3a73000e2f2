#pragma once

// Minimal register simulator: statevector (Shot) and density-matrix (Exact)
// modes, unitary gates on labeled qubits, ancilla-dilated channels, and
// measurement. Qubit 0 is the leftmost bit of a bitstring and the most
// significant tensor factor; ancillas are appended at the least significant
// end for the duration of one dilated-channel call.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "tcsim/errors.hpp"
#include "tcsim/numkit.hpp"

namespace tcsim::qsim {

enum class Mode { Shot, Exact };

/// A quantum register in one of two representations.
///
/// Shot mode holds a normalized statevector of length 2^n; Exact mode holds
/// a density matrix. `ancilla_outcomes` accumulates the mid-circuit results
/// produced by apply_dilated_channel in Shot mode, in the order measured.
struct RegisterState {
  Mode mode = Mode::Shot;
  int num_qubits = 0;
  numkit::ComplexVector vector;  // Shot mode amplitudes.
  numkit::ComplexMatrix dm;      // Exact mode density matrix.
  std::vector<int> ancilla_outcomes;

  /// |0...0> on n qubits in Shot mode.
  static RegisterState statevector(int num_qubits);

  /// Adopts an amplitude vector (must have power-of-two length and unit norm).
  static RegisterState statevector_from(numkit::ComplexVector amplitudes);

  /// |0...0><0...0| on n qubits in Exact mode.
  static RegisterState density_matrix(int num_qubits);

  /// Adopts a density matrix; `validate` enforces Hermiticity, unit trace,
  /// and (for moderate dimensions) positivity. Pass false for raw operators
  /// such as matrix units fed through channel_superoperator.
  static RegisterState density_matrix_from(numkit::ComplexMatrix rho,
                                           bool validate = true);

  Eigen::Index dim() const { return Eigen::Index{1} << num_qubits; }
};

/// One measured shot: outcome bit per system qubit (qubit 0 first), the seed
/// of the RandomSource that produced it, and any mid-circuit ancilla results.
struct ShotRecord {
  std::vector<int> bitstring;
  std::uint64_t seed = 0;
  std::vector<int> ancilla_outcomes;
};

/// Seedable, splittable 64-bit PRNG. Every stochastic result records the
/// seed it was drawn from, so runs are reproducible bit for bit.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Uniform double in [0, 1).
  double uniform();

  /// Derives an independent stream (e.g. one per shot) deterministically.
  RandomSource split(std::uint64_t stream) const;

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Applies a unitary on the labeled qubits: |psi> -> U|psi> or rho -> U rho U+.
/// Throws NotUnitary / LabelOutOfRange. `verify` rechecks unitarity on every
/// call; pass false only when re-applying a cached gate that was already
/// checked once, so hot loops skip the O(dim^3) test.
void apply_unitary(RegisterState& state, const numkit::Operator& u, bool verify = true);

/// Applies the channel obtained by adjoining `num_ancillas` fresh |0> qubits,
/// acting with `u` (whose labels are the listed system qubits followed by the
/// ancillas), and removing the ancillas again. Exact mode traces them out;
/// Shot mode measures each one (recording the outcome) and discards it,
/// which samples the same channel without bias. `verify` as in apply_unitary.
void apply_dilated_channel(RegisterState& state, const numkit::Operator& u,
                           int num_ancillas, RandomSource& rng, bool verify = true);

/// Samples a computational-basis bitstring from a Shot-mode register.
/// The state collapses and should not be reused.
ShotRecord measure_all(RegisterState& state, RandomSource& rng);

/// The register's density matrix: |psi><psi| in Shot mode, dm in Exact mode.
numkit::ComplexMatrix state_density_matrix(const RegisterState& state);

/// Column-stacks the action of a linear Exact-mode channel on every matrix
/// unit into the 4^n x 4^n superoperator (vec(M)[c*d + r] = M(r, c)).
numkit::ComplexMatrix channel_superoperator(
    const std::function<RegisterState(const RegisterState&)>& channel,
    int num_qubits);

}  // namespace tcsim::qsim
