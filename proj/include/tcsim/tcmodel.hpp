#pragma once

// The open Tavis-Cummings model: N two-level emitters exchanging excitations
// with one lossy cavity mode, optionally driven by a classical pump. The
// cavity holds up to R = 2^m - 1 excitations encoded in m qubits whose
// bitstring value is the excitation count. Register layout:
// [cavity qubits 0..m-1 | emitter qubits m..m+N-1].
//
// Unit convention: frequencies and rates are angular, in GHz (rad/ns with
// hbar = 1); times are in ns. Phases are omega * t with no extra 2*pi.

#include <vector>

#include "tcsim/errors.hpp"
#include "tcsim/numkit.hpp"

namespace tcsim::tcmodel {

/// Parameters of one cavity-plus-emitters system.
///
/// `frame_shift` moves to a rotating frame: it is subtracted from omega_c,
/// every omega_e entry, and pump_freq. Excitation-number observables are
/// invariant under this shift.
struct TcSystem {
  int n_emitters = 0;
  int cavity_qubits = 2;
  double omega_c = 0.0;
  std::vector<double> omega_e;
  std::vector<double> g;
  double kappa = 0.0;
  double gamma = 0.0;
  double pump_amp = 0.0;
  double pump_freq = 0.0;
  double frame_shift = 0.0;

  int num_qubits() const { return cavity_qubits + n_emitters; }
  Eigen::Index dim() const { return Eigen::Index{1} << num_qubits(); }

  /// Throws ConfigInvalid when rates are negative or list lengths disagree.
  void validate() const;
};

/// A jump operator together with its decay rate.
struct LindbladTerm {
  numkit::Operator op;
  double rate = 0.0;
};

/// Lowering operator on an m-qubit cavity: a|b> = sqrt(val(b)) |val(b)-1>
/// where val is the integer value of the bitstring. Labels 0..m-1.
numkit::Operator cavity_annihilation(int m);

/// Number operator a†a on the cavity qubits (diagonal 0..2^m-1).
numkit::Operator cavity_number(int m);

/// sigma_j^- on emitter j (label m + j).
numkit::Operator emitter_lowering(const TcSystem& sys, int j);

/// Frame-shifted number terms, coefficients folded in: one cavity term
/// (omega_c - frame_shift) a†a and one (omega_j - frame_shift) sigma+sigma-
/// per emitter. These all commute (disjoint or diagonal supports).
std::vector<numkit::Operator> number_terms(const TcSystem& sys);

/// Excitation-exchange terms g_j (a sigma_j^+ + a† sigma_j^-), one per
/// emitter, on the cavity qubits plus emitter j.
std::vector<numkit::Operator> interaction_terms(const TcSystem& sys);

bool has_pump(const TcSystem& sys);

/// Pump term E_P (a e^{i(omega_p - frame_shift) t} + h.c.) on the cavity.
numkit::Operator pump_term(const TcSystem& sys, double t);

/// Full Hamiltonian on all m+N qubits at time t (Hermitian).
numkit::Operator hamiltonian(const TcSystem& sys, double t);

/// The 1+N jump operators: (a, kappa) and (sigma_j^-, gamma) for each j.
std::vector<LindbladTerm> lindblad_terms(const TcSystem& sys);

/// Right-hand side of the master equation:
/// -i[H(t), rho] + sum_k rate_k (L rho L† - (1/2){L†L, rho}).
numkit::ComplexMatrix lindblad_rhs(const TcSystem& sys,
                                   const numkit::ComplexMatrix& rho, double t);

}  // namespace tcsim::tcmodel
