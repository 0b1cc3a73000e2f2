#pragma once

// Split J-matrix time evolution: each Lindblad operator is dilated into a
// small unitary e^{-i J sqrt(tau)} on its support plus one fresh ancilla
// (applied sequentially and traced out immediately), and the Hamiltonian is
// Trotterized into commuting single-site number terms and non-commuting
// cavity-emitter exchange terms (plus the pump).

#include <cstdint>
#include <variant>
#include <vector>

#include "tcsim/qsim.hpp"
#include "tcsim/tcmodel.hpp"

namespace tcsim::splitj {

/// Everything one evolution needs: term lists, step count, and pump data.
/// The pump exponential is rebuilt per slice at the slice-midpoint phase, so
/// it is stored as parameters rather than as a fixed Operator.
struct SplitJPlan {
  int n_steps = 1;
  double total_time = 0.0;
  std::vector<numkit::Operator> coherent_commuting;     // number terms
  std::vector<numkit::Operator> coherent_noncommuting;  // exchange terms
  std::vector<tcmodel::LindbladTerm> dissipative;
  int trotter_order = 2;

  bool has_pump = false;
  double pump_amp = 0.0;
  double pump_phase_freq = 0.0;  // pump frequency minus frame shift
  int cavity_qubits = 2;
  int num_system_qubits = 0;

  double tau() const { return total_time / n_steps; }
};

/// One dilation gate: the unitary on (support of L_k) + 1 ancilla, which
/// Lindblad term it came from, and the rotation angle sqrt(tau).
struct DilationUnitary {
  numkit::Operator u;
  int source = 0;
  double sqrt_tau = 0.0;
};

/// A step is an ordered list of dilation gates and plain unitaries.
using StepElement = std::variant<DilationUnitary, numkit::Operator>;

/// Builds the plan for a system, validating that the commuting-term lists
/// actually commute. Throws ConfigInvalid for a bad order or step count.
SplitJPlan make_plan(const tcmodel::TcSystem& sys, double total_time,
                     int n_steps, int trotter_order);

/// max over ||H_p||, ||H'_q|| (pump included) and rate ||L_k||^2.
double lambda_max(const SplitJPlan& plan);

/// Advisory step count ceil((K^2 + Q^2) lambda^2 t^2 / epsilon), clamped to
/// at least 1. Callers may override.
int suggest_steps(const SplitJPlan& plan, double epsilon);

/// The gate sequence of one slice: all dilations, then the Trotter pass
/// (order 1: single passes; order 2: the palindrome H_p, H'_q ascending,
/// H'_q descending, H_p at half angles). Pump phases use the slice midpoint.
std::vector<StepElement> build_step(const SplitJPlan& plan, int slice_index);

/// Runs `plan` on an Exact-mode register and returns the final state.
qsim::RegisterState evolve_exact(const SplitJPlan& plan,
                                 const qsim::RegisterState& initial);

/// Runs `plan` once per shot on copies of a Shot-mode register, measuring
/// at the end; shot s uses the RNG stream split(s) of the master seed.
std::vector<qsim::ShotRecord> evolve_shots(const SplitJPlan& plan,
                                           const qsim::RegisterState& initial,
                                           int shots, std::uint64_t seed);

}  // namespace tcsim::splitj
