#include "tcsim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace tcsim::oracle {

namespace {

using numkit::Complex;
using numkit::ComplexMatrix;
using numkit::ComplexVector;

Eigen::Map<const ComplexVector> vec_view(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

ComplexMatrix unvec(const ComplexVector& v, Eigen::Index dim) {
  return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
}

// Number of midpoint slices that keeps ||L|| dt at or below 0.1, using the
// Frobenius norm as a safe upper bound on the operator norm.
int pump_slice_count(const Superoperator& probe, double t, int requested) {
  const double norm = probe.matrix.norm();
  const int needed = static_cast<int>(std::ceil(norm * std::abs(t) / 0.1));
  return std::max({requested, needed, 1});
}

}  // namespace

Superoperator liouville_matrix(const tcmodel::TcSystem& sys, double t) {
  const Eigen::Index d = sys.dim();
  const ComplexMatrix h = tcmodel::hamiltonian(sys, t).matrix;
  const ComplexMatrix eye = numkit::identity(d);

  ComplexMatrix gen =
      Complex(0.0, -1.0) *
      (numkit::kron(eye, h) - numkit::kron(ComplexMatrix(h.transpose()), eye));
  for (const auto& term : tcmodel::lindblad_terms(sys)) {
    const ComplexMatrix l = numkit::embed(term.op, sys.num_qubits());
    const ComplexMatrix ldag_l = l.adjoint() * l;
    gen += term.rate *
           (numkit::kron(ComplexMatrix(l.conjugate()), l) -
            0.5 * numkit::kron(eye, ldag_l) -
            0.5 * numkit::kron(ComplexMatrix(ldag_l.transpose()), eye));
  }
  return {std::move(gen), d};
}

bool generator_is_static(const tcmodel::TcSystem& sys) {
  return !tcmodel::has_pump(sys) || sys.pump_freq == sys.frame_shift;
}

ComplexMatrix evolve_liouville(const tcmodel::TcSystem& sys,
                               const ComplexMatrix& rho0, double t,
                               int time_steps_for_pump) {
  if (rho0.rows() != sys.dim() || rho0.cols() != sys.dim())
    throw DimensionMismatch("initial state does not match the register dimension");
  if (t == 0.0) return rho0;

  if (generator_is_static(sys)) {
    const Superoperator gen = liouville_matrix(sys, 0.0);
    const ComplexMatrix propagator = numkit::expm_general(gen.matrix, t);
    return unvec(propagator * vec_view(rho0), gen.dim);
  }

  const int slices = pump_slice_count(liouville_matrix(sys, 0.0), t, time_steps_for_pump);
  const double dt = t / slices;
  ComplexVector state = vec_view(rho0);
  for (int s = 0; s < slices; ++s) {
    const double t_mid = (s + 0.5) * dt;
    const Superoperator gen = liouville_matrix(sys, t_mid);
    state = numkit::expm_general(gen.matrix, dt) * state;
  }
  return unvec(state, sys.dim());
}

LiouvilleStepper::LiouvilleStepper(const tcmodel::TcSystem& sys, double dt)
    : dim_(sys.dim()) {
  if (!generator_is_static(sys))
    throw ConfigInvalid("fixed-step propagation needs a time-independent generator");
  const Superoperator gen = liouville_matrix(sys, 0.0);
  propagator_ = numkit::expm_general(gen.matrix, dt);
  state_ = ComplexVector::Zero(dim_ * dim_);
  state_[0] = 1.0;  // vacuum until reset
}

void LiouvilleStepper::step() { state_ = propagator_ * state_; }

ComplexMatrix LiouvilleStepper::density_matrix() const { return unvec(state_, dim_); }

void LiouvilleStepper::reset(const ComplexMatrix& rho0) {
  if (rho0.rows() != dim_ || rho0.cols() != dim_)
    throw DimensionMismatch("initial state does not match the register dimension");
  state_ = vec_view(rho0);
}

ComplexMatrix mcwf_evolve(const tcmodel::TcSystem& sys, const ComplexVector& psi0,
                          double t, double dt, int trajectories,
                          qsim::RandomSource& rng) {
  const Eigen::Index d = sys.dim();
  if (psi0.size() != d)
    throw DimensionMismatch("initial state does not match the register dimension");
  if (trajectories < 1) throw ConfigInvalid("need at least one trajectory");

  const auto terms = tcmodel::lindblad_terms(sys);
  std::vector<ComplexMatrix> jump_ops;
  jump_ops.reserve(terms.size());
  ComplexMatrix decay = ComplexMatrix::Zero(d, d);
  for (const auto& term : terms) {
    ComplexMatrix l = numkit::embed(term.op, sys.num_qubits());
    decay += term.rate * (l.adjoint() * l);
    jump_ops.push_back(std::move(l));
  }

  auto effective_hamiltonian = [&](double at) {
    return ComplexMatrix(tcmodel::hamiltonian(sys, at).matrix -
                         Complex(0.0, 0.5) * decay);
  };

  const ComplexMatrix h_eff0 = effective_hamiltonian(0.0);
  const double inf = std::numeric_limits<double>::infinity();
  if (dt * numkit::schatten_norm(h_eff0, inf) > 0.1)
    throw StepTooLarge("dt too large for the effective Hamiltonian");

  const int n_steps = std::max(1, static_cast<int>(std::llround(t / dt)));
  const double step_dt = t / n_steps;

  const bool is_static = generator_is_static(sys);
  ComplexMatrix drift;
  if (is_static) drift = numkit::expm_general(Complex(0.0, -1.0) * h_eff0, step_dt);

  ComplexMatrix averaged = ComplexMatrix::Zero(d, d);
  for (int traj = 0; traj < trajectories; ++traj) {
    auto stream = rng.split(static_cast<std::uint64_t>(traj));
    ComplexVector psi = psi0;
    for (int s = 0; s < n_steps; ++s) {
      std::vector<double> dp(terms.size());
      double dp_total = 0.0;
      std::vector<ComplexVector> jumped(terms.size());
      for (std::size_t k = 0; k < terms.size(); ++k) {
        jumped[k] = jump_ops[k] * psi;
        dp[k] = terms[k].rate * step_dt * jumped[k].squaredNorm();
        dp_total += dp[k];
      }
      const double draw = stream.uniform();
      if (draw < dp_total) {
        double acc = 0.0;
        std::size_t chosen = terms.size() - 1;
        for (std::size_t k = 0; k < terms.size(); ++k) {
          acc += dp[k];
          if (draw < acc) {
            chosen = k;
            break;
          }
        }
        psi = jumped[chosen] / jumped[chosen].norm();
      } else {
        if (is_static) {
          psi = drift * psi;
        } else {
          const ComplexMatrix h_mid = effective_hamiltonian((s + 0.5) * step_dt);
          psi = numkit::expm_general(Complex(0.0, -1.0) * h_mid, step_dt) * psi;
        }
        psi /= psi.norm();
      }
    }
    averaged.noalias() += psi * psi.adjoint();
  }
  return averaged / static_cast<double>(trajectories);
}

}  // namespace tcsim::oracle
