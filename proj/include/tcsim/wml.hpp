#pragma once

// Sampling-based mixture evolution: the Lindblad generator is encoded as a
// weighted ensemble of small "program" states, and one evolution step is the
// average (or a sampled draw) of fixed system-program interactions — a swap
// exponential for Hamiltonian terms, a fixed dissipative interaction M for
// jump terms — each acting for an angle delta = c * t / n set by the total
// ensemble weight c. Program qubits are adjoined per step and discarded.
//
// Register convention for the fixed interaction on q system qubits: qubits
// [0, q) are the system slot, [q, 3q) the two program slots; ancillas used
// by a concrete realization are appended after those.

#include <cstdint>
#include <string>
#include <vector>

#include "tcsim/qsim.hpp"
#include "tcsim/tcmodel.hpp"

namespace tcsim::wml {

enum class TermKind { Hamiltonian, Lindblad };

/// One Hamiltonian ensemble entry: a signed weight and a pure program state
/// sigma = |state><state| such that sum_j coefficient_j sigma_j reproduces
/// the target Hamiltonian on the listed support qubits. Pump entries carry
/// a phase that rotates with the slice midpoint time.
struct HamiltonianTerm {
  double coefficient = 0.0;
  numkit::ComplexVector state;
  numkit::ComplexMatrix sigma;
  std::vector<int> support;
  bool pump = false;
};

/// One jump ensemble entry: weight = rate * ||L||_F^2 and the normalized
/// program state psi = (sqrt(rate) L (x) I) |Gamma> / ||...|| on 2q qubits,
/// where |Gamma> = sum_i |ii> is the unnormalized maximally entangled pair.
struct LindbladProgramTerm {
  double weight = 0.0;
  numkit::ComplexVector psi;
  std::vector<int> support;
};

/// The full program ensemble. c = sum |coefficients| + sum weights is the
/// sampling normalization; step angle delta = c * t / n.
struct ProgramEnsemble {
  std::vector<HamiltonianTerm> hamiltonian_terms;
  std::vector<LindbladProgramTerm> lindblad_terms;
  double c = 0.0;
};

/// Builds the ensemble for a two-cavity-qubit system (throws
/// UnsupportedCavitySize otherwise): cavity/emitter number projectors,
/// six interaction states per emitter, six pump states at the phase
/// (pump_freq - frame_shift) * slice_time, and one jump state per nonzero
/// decay rate. Zero-weight entries are dropped.
ProgramEnsemble tc_program_ensemble(const tcmodel::TcSystem& sys,
                                    double slice_time);

/// Closed-form upper bound on the ensemble weight c for any slice time,
/// in terms of the cavity excitation cap R = max_excitations:
/// (kappa + |w_c|) R^2 + (gamma + max_j |w_j|) N + 2 (max_j g_j N + E_P) R^1.5
/// with all frequencies taken in the rotating frame.
double c_bound(const tcmodel::TcSystem& sys, int max_excitations);

/// Which entry a sampled step uses.
struct SampledTerm {
  TermKind kind = TermKind::Hamiltonian;
  std::size_t index = 0;
};

/// Draws one entry with probability |coefficient|/c or weight/c.
/// Throws EmptyEnsemble when the ensemble has no entries.
SampledTerm sample_step(const ProgramEnsemble& ensemble, qsim::RandomSource& rng);

/// e^{-i sign S delta} on 2q qubits, where S swaps the two q-qubit halves;
/// equals cos(delta) I - i sign sin(delta) S. sign must be +1 or -1.
numkit::Operator swap_exponential(double sign, double delta, int q);

/// The fixed dissipative interaction on 3q qubits (system, program pair):
/// M = 2^{-q/2} (I (x) |Gamma><Gamma|) (SWAP_{12} (x) I).
numkit::ComplexMatrix fixed_interaction_m(int q);

/// Concrete realizations of the two-outcome map {A0 = I - (delta/2) M†M,
/// A1 = sqrt(delta) M}:
///  - ExactKraus: apply the pair directly (Exact mode only).
///  - Protocol1:  gate-level circuit from the 16-term Pauli expansion of M,
///                4q select ancillas + 2 flags (Exact mode only).
///  - Protocol2:  gate-level circuit from the four-unitary grouping,
///                2q select ancillas + 2 flags (Exact mode only).
///  - HybridJ:    one-ancilla dilation e^{-i J sqrt(delta)} with the
///                off-diagonal blocks of J set to M and M† (both modes;
///                agrees with the exact pair to O(delta^{3/2})).
enum class FixedInteractionKind { ExactKraus, Protocol1, Protocol2, HybridJ };

struct FixedInteractionImpl {
  FixedInteractionKind kind = FixedInteractionKind::HybridJ;
  int q = 1;
};

/// The realized channel on a 3q-qubit register. The one-argument form serves
/// Exact-mode registers (and plugs into channel_superoperator); the
/// two-argument form additionally supports Shot-mode registers for HybridJ,
/// which adjoins, measures, and discards its ancilla.
class FixedInteractionChannel {
 public:
  FixedInteractionChannel(const FixedInteractionImpl& impl, double delta);

  qsim::RegisterState operator()(const qsim::RegisterState& in) const;
  qsim::RegisterState operator()(const qsim::RegisterState& in,
                                 qsim::RandomSource& rng) const;

  int num_qubits() const { return 3 * impl_.q; }
  const FixedInteractionImpl& impl() const { return impl_; }
  double delta() const { return delta_; }

 private:
  FixedInteractionImpl impl_;
  double delta_ = 0.0;
  std::vector<numkit::ComplexMatrix> kraus_;  // ExactKraus and the protocols
  numkit::ComplexMatrix dilation_;            // HybridJ unitary on 3q+1 qubits
};

/// Builds the channel for one step angle. The gate-level realizations
/// (Protocol1, Protocol2) cover q = 1 and q = 2 (UnsupportedQ otherwise);
/// ExactKraus and HybridJ take any q that fits the register caps. delta
/// must be nonnegative (ConfigInvalid).
FixedInteractionChannel fixed_interaction(const FixedInteractionImpl& impl,
                                          double delta);

/// One term of a Pauli-string expansion; `letters` has one character per
/// qubit ('I', 'X', 'Y', 'Z'), first letter most significant.
struct PauliTerm {
  numkit::Complex coefficient;
  std::string letters;
};

/// M as a sum of equal-magnitude Pauli strings on 3q qubits: 16 terms of
/// magnitude 1/(4 sqrt 2) for q = 1, and their 16^q interleaved products
/// in general (factor f occupies positions f, q+f, 2q+f).
std::vector<PauliTerm> pauli_decomposition_m(int q);

/// The q = 1 Pauli expansion regrouped into four unitaries U_i on 3 qubits
/// with (1 / (2 sqrt 2)) sum_i U_i = M and (1/2) sum_i (SWAP_{12} (x) I) U_i
/// = M†M. Protocol2 selects among these.
std::vector<numkit::Operator> four_unitary_grouping();

/// Runs n steps of the ensemble-averaged (deterministic) evolution on a
/// density matrix and returns the final Exact-mode register. Statevector
/// input is promoted to a density matrix first.
qsim::RegisterState evolve_wml_averaged(const tcmodel::TcSystem& sys,
                                        const qsim::RegisterState& initial,
                                        double t, int n,
                                        const FixedInteractionImpl& impl);

/// Runs n sampled steps per shot on copies of a Shot-mode register (one term
/// drawn per step, realized as a single dilated gate whose program qubits
/// are measured and discarded), measuring all system qubits at the end.
/// Shot s uses the RNG stream split(s) of the master seed. Requires a
/// HybridJ realization, the only Shot-capable one.
std::vector<qsim::ShotRecord> evolve_wml_shots(const tcmodel::TcSystem& sys,
                                               const qsim::RegisterState& initial,
                                               double t, int n,
                                               const FixedInteractionImpl& impl,
                                               int shots, std::uint64_t seed);

}  // namespace tcsim::wml
