#pragma once

// Reference solvers for the open Tavis-Cummings model: dense propagation of
// the vectorized master equation (column-stacking convention) and a
// Monte-Carlo wavefunction / quantum-jump integrator. These are the ground
// truth every quantum algorithm in this codebase is validated against.

#include "tcsim/numkit.hpp"
#include "tcsim/qsim.hpp"
#include "tcsim/tcmodel.hpp"

namespace tcsim::oracle {

/// The master-equation generator as a d^2 x d^2 matrix acting on
/// column-stacked density matrices: vec(M)[c*d + r] = M(r, c).
struct Superoperator {
  numkit::ComplexMatrix matrix;
  Eigen::Index dim = 0;  // d, the Hilbert-space dimension
};

/// Generator at time t:
/// -i[(I kron H) - (H^T kron I)]
/// + sum_k rate_k [(L* kron L) - 1/2 (I kron L†L) - 1/2 (L^T L* kron I)].
Superoperator liouville_matrix(const tcmodel::TcSystem& sys, double t);

/// True when the generator does not depend on time: no pump, or a pump that
/// is resonant with the rotating frame.
bool generator_is_static(const tcmodel::TcSystem& sys);

/// Propagates rho0 to time t. A static generator uses a single matrix
/// exponential; a time-dependent one takes piecewise-constant midpoint steps,
/// at least `time_steps_for_pump` of them and enough that ||L|| dt <= 0.1.
numkit::ComplexMatrix evolve_liouville(const tcmodel::TcSystem& sys,
                                       const numkit::ComplexMatrix& rho0,
                                       double t, int time_steps_for_pump);

/// Cached fixed-step propagator for equally spaced time series: one matrix
/// exponential up front, then one matrix-vector product per step.
/// Requires a static generator.
class LiouvilleStepper {
 public:
  LiouvilleStepper(const tcmodel::TcSystem& sys, double dt);

  /// Advances by one dt.
  void step();

  /// Density matrix at the current time.
  numkit::ComplexMatrix density_matrix() const;

  void reset(const numkit::ComplexMatrix& rho0);

 private:
  Eigen::Index dim_;
  numkit::ComplexMatrix propagator_;
  numkit::ComplexVector state_;
};

/// Monte-Carlo wavefunction average of |psi><psi| over `trajectories` runs.
/// Per step: jump k with probability rate_k dt ||L_k psi||^2, applying
/// L_k psi normalized; otherwise drift under e^{-i H_eff dt} with
/// H_eff = H - (i/2) sum_k rate_k L_k†L_k, renormalizing.
/// Throws StepTooLarge unless dt ||H_eff|| <= 0.1.
numkit::ComplexMatrix mcwf_evolve(const tcmodel::TcSystem& sys,
                                  const numkit::ComplexVector& psi0, double t,
                                  double dt, int trajectories,
                                  qsim::RandomSource& rng);

}  // namespace tcsim::oracle
