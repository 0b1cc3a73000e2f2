#include "tcsim/wml.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace tcsim::wml {

namespace {

using numkit::Complex;
using numkit::ComplexMatrix;
using numkit::ComplexVector;
using qsim::Mode;
using qsim::RegisterState;

constexpr Complex kImag{0.0, 1.0};

// Unnormalized pair state |Gamma> = sum_i |i>|i> on two q-qubit slots.
ComplexVector gamma_pair(int q) {
  const Eigen::Index d = Eigen::Index{1} << q;
  ComplexVector v = ComplexVector::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) v[i * d + i] = 1.0;
  return v;
}

// Permutation swapping two q-qubit halves: |i>|j> -> |j>|i>.
ComplexMatrix half_swap(int q) {
  const Eigen::Index d = Eigen::Index{1} << q;
  ComplexMatrix s = ComplexMatrix::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) s(j * d + i, i * d + j) = 1.0;
  return s;
}

// Unitary sending |0...0> to the given unit vector (QR completion with the
// first column's phase aligned to psi).
ComplexMatrix preparation_unitary(const ComplexVector& psi) {
  const Eigen::Index d = psi.size();
  ComplexMatrix seed = ComplexMatrix::Identity(d, d);
  seed.col(0) = psi;
  Eigen::HouseholderQR<ComplexMatrix> qr(seed);
  ComplexMatrix q = qr.householderQ();
  const Complex overlap = q.col(0).dot(psi);
  if (std::abs(overlap) < 0.99)
    throw NumericalCheckFailed("program-state preparation lost norm");
  q.col(0) *= overlap / std::abs(overlap);
  return q;
}

// e^{-i J sqrt(delta)} on (3q system/program qubits) + 1 ancilla appended at
// the least significant end, where J's off-diagonal ancilla blocks hold M
// and M+: J[(s,1),(s',0)] = M(s,s') and J[(s,0),(s',1)] = M+(s,s').
ComplexMatrix hybrid_dilation_matrix(const ComplexMatrix& m, double delta) {
  const Eigen::Index d = m.rows();
  ComplexMatrix j = ComplexMatrix::Zero(2 * d, 2 * d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) {
      j(2 * r + 1, 2 * c) = m(r, c);
      j(2 * r, 2 * c + 1) = std::conj(m(c, r));
    }
  return numkit::expm_hermitian(j, std::sqrt(delta));
}

// ---------------------------------------------------------------------------
// Gate-level realizations: a tiny circuit representation on raw statevectors
// (system and program qubits most significant, realization ancillas after).

struct ControlledGate {
  std::vector<std::pair<int, int>> controls;  // (qubit, required bit)
  std::vector<int> targets;                   // first target = high sub-bit
  ComplexMatrix matrix;
};

void apply_controlled(ComplexVector& v, int num_qubits, const ControlledGate& g) {
  Eigen::Index ctrl_mask = 0, ctrl_val = 0;
  for (const auto& [qubit, bit] : g.controls) {
    const Eigen::Index m = Eigen::Index{1} << (num_qubits - 1 - qubit);
    ctrl_mask |= m;
    if (bit != 0) ctrl_val |= m;
  }
  const int k = static_cast<int>(g.targets.size());
  const Eigen::Index sub_dim = Eigen::Index{1} << k;
  Eigen::Index tgt_mask = 0;
  std::vector<Eigen::Index> offsets(static_cast<std::size_t>(sub_dim), 0);
  for (int j = 0; j < k; ++j) {
    const int shift = num_qubits - 1 - g.targets[static_cast<std::size_t>(j)];
    tgt_mask |= Eigen::Index{1} << shift;
    for (Eigen::Index s = 0; s < sub_dim; ++s)
      if ((s >> (k - 1 - j)) & 1) offsets[static_cast<std::size_t>(s)] |= Eigen::Index{1} << shift;
  }
  ComplexVector gathered(sub_dim);
  for (Eigen::Index base = 0; base < v.size(); ++base) {
    if ((base & ctrl_mask) != ctrl_val || (base & tgt_mask) != 0) continue;
    for (Eigen::Index s = 0; s < sub_dim; ++s)
      gathered[s] = v[base + offsets[static_cast<std::size_t>(s)]];
    const ComplexVector mixed = g.matrix * gathered;
    for (Eigen::Index s = 0; s < sub_dim; ++s)
      v[base + offsets[static_cast<std::size_t>(s)]] = mixed[s];
  }
}

// A full realization circuit: prep + controlled gates, per-ancilla success
// amplitudes (the branch flag excluded), and the normalization that restores
// the two-outcome map from the projected branches.
struct ProtocolCircuit {
  int num_system = 0;
  int num_ancillas = 0;
  int flag_position = 0;  // index (within the ancillas) of the branch flag
  std::vector<ControlledGate> gates;
  std::vector<std::array<double, 2>> success;  // per-ancilla bra components
  double rescale = 1.0;
};

ComplexMatrix hadamard() {
  ComplexMatrix h(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  h << r, r, r, -r;
  return h;
}

// Rotation sending |0> to (|0> - x|1>)/sqrt(1+x^2).
ComplexMatrix minus_tilt(double x) {
  ComplexMatrix m(2, 2);
  const double norm = std::sqrt(1.0 + x * x);
  m << 1.0 / norm, x / norm, -x / norm, 1.0 / norm;
  return m;
}

// Rotation sending |0> to (alpha|0> + beta|1>)/sqrt(alpha^2+beta^2).
ComplexMatrix branch_tilt(double alpha, double beta) {
  ComplexMatrix m(2, 2);
  const double norm = std::sqrt(alpha * alpha + beta * beta);
  m << alpha / norm, -beta / norm, beta / norm, alpha / norm;
  return m;
}

// Shared parameterization of both gate-level realizations. Projecting the
// select ancillas onto |+> leaves M scaled by select_factor^{-1} on the
// branch-flag=1 branch and M+M / 2^q on the flag=0 branch; the tilt angles
// solve x^2/2^q = delta/2 and beta * select_factor / (1+x^2) = alpha
// sqrt(delta), which reproduces {I - (delta/2) M+M, sqrt(delta) M} exactly
// after rescaling by (alpha^2+beta^2)(1+x^2)^2 / alpha^2.
struct TiltParameters {
  double alpha = 0.0, beta = 0.0, x = 0.0, rescale = 1.0;
};

TiltParameters tilt_parameters(int q, double delta, double select_factor) {
  TiltParameters p;
  p.alpha = 1.0 + delta;
  p.x = std::sqrt(std::exp2(q - 1) * delta);
  p.beta = p.alpha * std::sqrt(delta) * select_factor / (1.0 + p.x * p.x);
  const double ab = p.alpha * p.alpha + p.beta * p.beta;
  const double onex = 1.0 + p.x * p.x;
  p.rescale = ab * onex * onex / (p.alpha * p.alpha);
  return p;
}

void add_preparation(ProtocolCircuit& circuit, int num_select,
                     const TiltParameters& p) {
  const int ns = circuit.num_system;
  for (int s = 0; s < num_select; ++s) {
    circuit.gates.push_back({{}, {ns + s}, hadamard()});
    circuit.success.push_back({1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)});
  }
  const double norm = std::sqrt(1.0 + p.x * p.x);
  circuit.gates.push_back({{}, {ns + num_select}, minus_tilt(p.x)});
  circuit.success.push_back({1.0 / norm, p.x / norm});
  circuit.gates.push_back({{}, {ns + num_select + 1}, branch_tilt(p.alpha, p.beta)});
  circuit.success.push_back({1.0, 1.0});  // branch flag: kept per Kraus index
  circuit.flag_position = num_select + 1;
  circuit.num_ancillas = num_select + 2;
  circuit.rescale = p.rescale;
}

// Pauli-pair circuit: per tensor factor f, four select ancillas control the
// pairs XX/ZZ on (A,C) in the flag=0 branch and on (A,B)/(B,C) in the
// flag=1 branch (with a select-select phase correction), which reconstructs
// M+M/2^q and M / (2 sqrt 2)^q respectively under the |+> projection.
ProtocolCircuit build_protocol1(int q, double delta) {
  ProtocolCircuit circuit;
  circuit.num_system = 3 * q;
  const int ns = circuit.num_system;
  const int num_select = 4 * q;
  const TiltParameters p = tilt_parameters(q, delta, std::exp2(1.5 * q));
  add_preparation(circuit, num_select, p);
  const int flag_a = ns + num_select;      // success-projected tilt
  const int flag_b = ns + num_select + 1;  // Kraus branch
  const ComplexMatrix xx = numkit::pauli_string("XX");
  const ComplexMatrix zz = numkit::pauli_string("ZZ");
  const ComplexMatrix z = numkit::pauli('Z');
  for (int f = 0; f < q; ++f) {
    const int s1 = ns + 4 * f, s2 = s1 + 1, s3 = s1 + 2, s4 = s1 + 3;
    const int a = f, b = q + f, c = 2 * q + f;
    circuit.gates.push_back({{{s4, 1}, {flag_a, 1}, {flag_b, 0}}, {a, c}, xx});
    circuit.gates.push_back({{{s3, 1}, {flag_a, 1}, {flag_b, 0}}, {a, c}, zz});
    circuit.gates.push_back({{{s4, 1}, {flag_b, 1}}, {s3}, z});
    circuit.gates.push_back({{{s4, 1}, {flag_b, 1}}, {a, b}, xx});
    circuit.gates.push_back({{{s3, 1}, {flag_b, 1}}, {a, b}, zz});
    circuit.gates.push_back({{{s2, 1}, {flag_b, 1}}, {b, c}, xx});
    circuit.gates.push_back({{{s1, 1}, {flag_b, 1}}, {b, c}, zz});
  }
  circuit.gates.push_back({{{flag_b, 1}}, {flag_a}, z});
  return circuit;
}

// Four-unitary circuit: per tensor factor f, two select ancillas choose one
// of the grouped unitaries U_i (flag=1 branch) or its swapped partner
// (SWAP_AB (x) I) U_i (flag=0 branch).
ProtocolCircuit build_protocol2(int q, double delta) {
  ProtocolCircuit circuit;
  circuit.num_system = 3 * q;
  const int ns = circuit.num_system;
  const int num_select = 2 * q;
  const TiltParameters p = tilt_parameters(q, delta, std::exp2(0.5 * q));
  add_preparation(circuit, num_select, p);
  const int flag_a = ns + num_select;
  const int flag_b = ns + num_select + 1;
  const auto grouped = four_unitary_grouping();
  const ComplexMatrix swap_ab = numkit::kron(half_swap(1), numkit::identity(2));
  for (int f = 0; f < q; ++f) {
    const int s_hi = ns + 2 * f, s_lo = s_hi + 1;
    const std::vector<int> triple{f, q + f, 2 * q + f};
    for (int i = 0; i < 4; ++i) {
      const int hi = (i >> 1) & 1, lo = i & 1;
      circuit.gates.push_back(
          {{{s_hi, hi}, {s_lo, lo}, {flag_b, 1}}, triple, grouped[static_cast<std::size_t>(i)].matrix});
      circuit.gates.push_back({{{s_hi, hi}, {s_lo, lo}, {flag_a, 1}, {flag_b, 0}},
                               triple,
                               swap_ab * grouped[static_cast<std::size_t>(i)].matrix});
    }
  }
  circuit.gates.push_back({{{flag_b, 1}}, {flag_a}, numkit::pauli('Z')});
  return circuit;
}

// Runs the circuit on each system basis column, projects every non-flag
// ancilla onto its success state, and reads off the two Kraus operators
// (flag = 0 and flag = 1), restoring normalization via rescale.
std::vector<ComplexMatrix> extract_kraus(const ProtocolCircuit& circuit) {
  const Eigen::Index ds = Eigen::Index{1} << circuit.num_system;
  const Eigen::Index da = Eigen::Index{1} << circuit.num_ancillas;
  const int total = circuit.num_system + circuit.num_ancillas;
  std::vector<ComplexMatrix> kraus(2, ComplexMatrix::Zero(ds, ds));
  for (Eigen::Index col = 0; col < ds; ++col) {
    ComplexVector v = ComplexVector::Zero(ds * da);
    v[col * da] = 1.0;
    for (const auto& gate : circuit.gates) apply_controlled(v, total, gate);
    for (Eigen::Index idx = 0; idx < v.size(); ++idx) {
      if (v[idx] == Complex{0.0, 0.0}) continue;
      const Eigen::Index sys = idx / da, anc = idx % da;
      double weight = 1.0;
      int branch = 0;
      for (int a = 0; a < circuit.num_ancillas; ++a) {
        const int bit = static_cast<int>((anc >> (circuit.num_ancillas - 1 - a)) & 1);
        if (a == circuit.flag_position)
          branch = bit;
        else
          weight *= circuit.success[static_cast<std::size_t>(a)][static_cast<std::size_t>(bit)];
      }
      kraus[static_cast<std::size_t>(branch)](sys, col) += weight * v[idx];
    }
  }
  const double scale = std::sqrt(circuit.rescale);
  for (auto& k : kraus) k *= scale;
  return kraus;
}

// ---------------------------------------------------------------------------
// Ensemble pieces.

// The six pump program states on the cavity pair with their signed
// coefficients (amp-scaled), at pump phase theta.
std::vector<std::pair<double, ComplexVector>> pump_program_states(double amp,
                                                                  double theta) {
  std::vector<std::pair<double, ComplexVector>> out;
  const Complex phase = std::polar(1.0, -theta);
  const double root2 = std::sqrt(2.0);
  const std::array<std::pair<Eigen::Index, Eigen::Index>, 3> rungs{
      {{0, 1}, {1, 2}, {2, 3}}};
  const std::array<double, 3> scales{1.0, std::sqrt(2.0), std::sqrt(3.0)};
  for (int r = 0; r < 3; ++r) {
    const ComplexVector lo = numkit::basis_ket(4, rungs[static_cast<std::size_t>(r)].first);
    const ComplexVector hi = numkit::basis_ket(4, rungs[static_cast<std::size_t>(r)].second);
    out.emplace_back(amp * scales[static_cast<std::size_t>(r)], (lo + phase * hi) / root2);
    out.emplace_back(-amp * scales[static_cast<std::size_t>(r)], (lo - phase * hi) / root2);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Averaged-evolution engine: every term acts on a handful of system qubits,
// so its one-step superoperator is built on that support alone and applied
// to the full register through an index permutation (support qubits first).

ComplexVector vec_of(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

// Superoperator (column-stacked) of rho -> Tr_2[e^{-i s S delta} (rho (x)
// sigma) e^{+i s S delta}] = cos^2 rho - i s cos sin [sigma, rho] + sin^2
// sigma Tr[rho], exact because the half-swap squares to the identity.
ComplexMatrix swap_average_superop(double sign, const ComplexMatrix& sigma,
                                   double delta) {
  const Eigen::Index d = sigma.rows();
  const double cd = std::cos(delta), sd = std::sin(delta);
  ComplexMatrix w = cd * cd * numkit::identity(d * d);
  w += (-kImag * sign * cd * sd) *
       (numkit::kron(numkit::identity(d), sigma) -
        numkit::kron(sigma.transpose(), numkit::identity(d)));
  w += (sd * sd) * vec_of(sigma) * vec_of(numkit::identity(d)).transpose();
  return w;
}

// Superoperator of one jump term: extend each matrix unit with the program
// state, push it through the realized fixed interaction, and trace the
// program qubits back out.
ComplexMatrix jump_term_superop(const ComplexVector& psi,
                                const FixedInteractionChannel& channel, int q) {
  const Eigen::Index dsup = Eigen::Index{1} << q;
  const ComplexMatrix proj = psi * psi.adjoint();
  std::vector<int> dims(static_cast<std::size_t>(3 * q), 2);
  std::vector<int> keep(static_cast<std::size_t>(q));
  std::iota(keep.begin(), keep.end(), 0);
  ComplexMatrix w(dsup * dsup, dsup * dsup);
  for (Eigen::Index col = 0; col < dsup; ++col)
    for (Eigen::Index row = 0; row < dsup; ++row) {
      ComplexMatrix unit = ComplexMatrix::Zero(dsup, dsup);
      unit(row, col) = 1.0;
      const RegisterState out = channel(
          RegisterState::density_matrix_from(numkit::kron(unit, proj), false));
      w.col(col * dsup + row) = vec_of(numkit::partial_trace(out.dm, dims, keep));
    }
  return w;
}

// vmap[col*d + row]: position of the density-matrix entry (row, col) after
// reordering both indices so the support qubits come first.
std::vector<Eigen::Index> make_vmap(int num_qubits, const std::vector<int>& support) {
  const Eigen::Index d = Eigen::Index{1} << num_qubits;
  std::vector<int> order = support;
  for (int qb = 0; qb < num_qubits; ++qb)
    if (std::find(support.begin(), support.end(), qb) == support.end())
      order.push_back(qb);
  std::vector<Eigen::Index> pidx(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::Index p = 0;
    for (int qb : order) p = (p << 1) | ((i >> (num_qubits - 1 - qb)) & 1);
    pidx[static_cast<std::size_t>(i)] = p;
  }
  const Eigen::Index dsup = Eigen::Index{1} << support.size();
  const Eigen::Index drest = d / dsup;
  std::vector<Eigen::Index> vmap(static_cast<std::size_t>(d * d));
  for (Eigen::Index col = 0; col < d; ++col) {
    const Eigen::Index cs = pidx[static_cast<std::size_t>(col)] / drest;
    const Eigen::Index cr = pidx[static_cast<std::size_t>(col)] % drest;
    for (Eigen::Index row = 0; row < d; ++row) {
      const Eigen::Index rs = pidx[static_cast<std::size_t>(row)] / drest;
      const Eigen::Index rr = pidx[static_cast<std::size_t>(row)] % drest;
      vmap[static_cast<std::size_t>(col * d + row)] =
          (cs * dsup + rs) * drest * drest + (cr * drest + rr);
    }
  }
  return vmap;
}

struct SupportBlock {
  std::vector<int> support;
  Eigen::Index dsup2 = 0, drest2 = 0;
  ComplexMatrix w_static;
  bool pump_slot = false;
  std::vector<Eigen::Index> vmap;
};

double coefficient_sign(double value) { return value >= 0.0 ? 1.0 : -1.0; }

// ---------------------------------------------------------------------------
// Shot-mode gate composition: one dilated gate per sampled term.

struct ComposedGate {
  numkit::Operator op;
  int num_ancillas = 0;

  ComposedGate(ComplexMatrix matrix, std::vector<int> labels, int ancillas)
      : op(std::move(matrix), std::move(labels)), num_ancillas(ancillas) {}
};

void check_composed_unitary(const ComplexMatrix& u) {
  const double err =
      (u.adjoint() * u - numkit::identity(u.rows())).cwiseAbs().maxCoeff();
  if (err > 1e-9)
    throw NumericalCheckFailed("composed step gate deviates from unitarity by " +
                               std::to_string(err));
}

std::vector<int> appended_labels(const std::vector<int>& support, int num_qubits,
                                 int count) {
  std::vector<int> labels = support;
  for (int a = 0; a < count; ++a) labels.push_back(num_qubits + a);
  return labels;
}

ComposedGate compose_swap_gate(const std::vector<int>& support,
                               const ComplexVector& state, double sign,
                               double delta, int num_qubits) {
  const int q = static_cast<int>(support.size());
  const Eigen::Index d = Eigen::Index{1} << q;
  ComplexMatrix u = swap_exponential(sign, delta, q).matrix *
                    numkit::kron(numkit::identity(d), preparation_unitary(state));
  check_composed_unitary(u);
  return {std::move(u), appended_labels(support, num_qubits, q), q};
}

ComposedGate compose_jump_gate(const std::vector<int>& support,
                               const ComplexVector& psi, double delta,
                               int num_qubits) {
  const int q = static_cast<int>(support.size());
  const Eigen::Index d = Eigen::Index{1} << q;
  ComplexMatrix u =
      hybrid_dilation_matrix(fixed_interaction_m(q), delta) *
      numkit::kron(numkit::kron(numkit::identity(d), preparation_unitary(psi)),
                   numkit::identity(2));
  check_composed_unitary(u);
  return {std::move(u), appended_labels(support, num_qubits, 2 * q + 1), 2 * q + 1};
}

}  // namespace

// ---------------------------------------------------------------------------

ProgramEnsemble tc_program_ensemble(const tcmodel::TcSystem& sys,
                                    double slice_time) {
  sys.validate();
  if (sys.cavity_qubits != 2)
    throw UnsupportedCavitySize("the program ensemble is built for a two-qubit cavity, got " +
                                std::to_string(sys.cavity_qubits) + " qubits");
  const int m = sys.cavity_qubits;
  ProgramEnsemble ens;

  auto add_ham = [&ens](double coefficient, ComplexVector state,
                        std::vector<int> support, bool pump = false) {
    if (coefficient == 0.0) return;
    HamiltonianTerm term;
    term.coefficient = coefficient;
    term.sigma = state * state.adjoint();
    term.state = std::move(state);
    term.support = std::move(support);
    term.pump = pump;
    ens.hamiltonian_terms.push_back(std::move(term));
  };

  // Cavity number ladder: |v><v| with coefficient w_c * v.
  const double wc = sys.omega_c - sys.frame_shift;
  for (Eigen::Index v = 1; v <= 3; ++v)
    add_ham(wc * static_cast<double>(v), numkit::basis_ket(4, v), {0, 1});

  // Emitter number terms.
  for (int j = 0; j < sys.n_emitters; ++j)
    add_ham(sys.omega_e[static_cast<std::size_t>(j)] - sys.frame_shift,
            numkit::basis_ket(2, 1), {m + j});

  // Exchange terms: three (plus, minus) state pairs per emitter, one per
  // cavity rung, with weights g_j (1, sqrt 2, sqrt 3).
  const double root2 = std::sqrt(2.0);
  const std::array<std::pair<Eigen::Index, Eigen::Index>, 3> rungs{
      {{1, 2}, {3, 4}, {5, 6}}};
  const std::array<double, 3> scales{1.0, std::sqrt(2.0), std::sqrt(3.0)};
  for (int j = 0; j < sys.n_emitters; ++j) {
    const double gj = sys.g[static_cast<std::size_t>(j)];
    if (gj == 0.0) continue;
    const std::vector<int> support{0, 1, m + j};
    for (int r = 0; r < 3; ++r) {
      const ComplexVector lo = numkit::basis_ket(8, rungs[static_cast<std::size_t>(r)].first);
      const ComplexVector hi = numkit::basis_ket(8, rungs[static_cast<std::size_t>(r)].second);
      add_ham(gj * scales[static_cast<std::size_t>(r)], (lo + hi) / root2, support);
      add_ham(-gj * scales[static_cast<std::size_t>(r)], (lo - hi) / root2, support);
    }
  }

  // Pump terms at the requested slice time's phase.
  if (sys.pump_amp != 0.0) {
    const double theta = (sys.pump_freq - sys.frame_shift) * slice_time;
    for (auto& [coefficient, state] : pump_program_states(sys.pump_amp, theta))
      add_ham(coefficient, std::move(state), {0, 1}, true);
  }

  // Jump program states: psi = (sqrt(rate) L (x) I)|Gamma>, normalized, with
  // the squared Frobenius norm carried as the sampling weight.
  if (sys.kappa > 0.0) {
    const ComplexMatrix a = tcmodel::cavity_annihilation(m).matrix;
    ComplexVector psi =
        numkit::kron(std::sqrt(sys.kappa) * a, numkit::identity(4)) * gamma_pair(2);
    const double weight = sys.kappa * a.squaredNorm();
    psi /= psi.norm();
    ens.lindblad_terms.push_back({weight, std::move(psi), {0, 1}});
  }
  if (sys.gamma > 0.0) {
    ComplexMatrix lower = ComplexMatrix::Zero(2, 2);
    lower(0, 1) = 1.0;
    for (int j = 0; j < sys.n_emitters; ++j) {
      ComplexVector psi =
          numkit::kron(std::sqrt(sys.gamma) * lower, numkit::identity(2)) * gamma_pair(1);
      psi /= psi.norm();
      ens.lindblad_terms.push_back({sys.gamma, std::move(psi), {m + j}});
    }
  }

  for (const auto& term : ens.hamiltonian_terms) ens.c += std::abs(term.coefficient);
  for (const auto& term : ens.lindblad_terms) ens.c += term.weight;
  return ens;
}

double c_bound(const tcmodel::TcSystem& sys, int max_excitations) {
  sys.validate();
  if (max_excitations < 0)
    throw ConfigInvalid("the excitation cap cannot be negative");
  const double r = max_excitations;
  const double wc = std::abs(sys.omega_c - sys.frame_shift);
  double wmax = 0.0, gmax = 0.0;
  for (int j = 0; j < sys.n_emitters; ++j) {
    wmax = std::max(wmax, std::abs(sys.omega_e[static_cast<std::size_t>(j)] - sys.frame_shift));
    gmax = std::max(gmax, std::abs(sys.g[static_cast<std::size_t>(j)]));
  }
  const double n = sys.n_emitters;
  return (sys.kappa + wc) * r * r + (sys.gamma + wmax) * n +
         2.0 * (gmax * n + std::abs(sys.pump_amp)) * r * std::sqrt(r);
}

SampledTerm sample_step(const ProgramEnsemble& ensemble, qsim::RandomSource& rng) {
  const std::size_t total =
      ensemble.hamiltonian_terms.size() + ensemble.lindblad_terms.size();
  if (total == 0 || ensemble.c <= 0.0)
    throw EmptyEnsemble("cannot sample from an empty program ensemble");
  double draw = rng.uniform() * ensemble.c;
  for (std::size_t j = 0; j < ensemble.hamiltonian_terms.size(); ++j) {
    draw -= std::abs(ensemble.hamiltonian_terms[j].coefficient);
    if (draw < 0.0) return {TermKind::Hamiltonian, j};
  }
  for (std::size_t k = 0; k < ensemble.lindblad_terms.size(); ++k) {
    draw -= ensemble.lindblad_terms[k].weight;
    if (draw < 0.0) return {TermKind::Lindblad, k};
  }
  if (!ensemble.lindblad_terms.empty())
    return {TermKind::Lindblad, ensemble.lindblad_terms.size() - 1};
  return {TermKind::Hamiltonian, ensemble.hamiltonian_terms.size() - 1};
}

numkit::Operator swap_exponential(double sign, double delta, int q) {
  if (sign != 1.0 && sign != -1.0)
    throw ConfigInvalid("swap exponential sign must be +1 or -1");
  if (delta < 0.0) throw ConfigInvalid("swap exponential angle must be nonnegative");
  if (q < 1 || q > numkit::kMaxStatevectorQubits / 2)
    throw ConfigInvalid("swap exponential needs 1 <= q <= " +
                        std::to_string(numkit::kMaxStatevectorQubits / 2));
  const Eigen::Index d = Eigen::Index{1} << q;
  ComplexMatrix u = std::cos(delta) * numkit::identity(d * d) -
                    (kImag * sign * std::sin(delta)) * half_swap(q);
  std::vector<int> labels(static_cast<std::size_t>(2 * q));
  std::iota(labels.begin(), labels.end(), 0);
  return numkit::Operator(std::move(u), std::move(labels));
}

numkit::ComplexMatrix fixed_interaction_m(int q) {
  if (q < 1) throw UnsupportedQ("the fixed interaction needs q >= 1");
  if (q > 4) throw RegisterTooLarge("the fixed interaction map on " +
                                    std::to_string(3 * q) + " qubits is too large");
  const Eigen::Index d = Eigen::Index{1} << q;
  const ComplexVector gamma = gamma_pair(q);
  return std::exp2(-0.5 * q) *
         numkit::kron(numkit::identity(d), ComplexMatrix(gamma * gamma.adjoint())) *
         numkit::kron(half_swap(q), numkit::identity(d));
}

FixedInteractionChannel::FixedInteractionChannel(const FixedInteractionImpl& impl,
                                                 double delta)
    : impl_(impl), delta_(delta) {
  if (delta < 0.0) throw ConfigInvalid("fixed interaction needs delta >= 0");
  if (impl.q < 1) throw UnsupportedQ("the fixed interaction needs q >= 1");
  const bool protocol = impl.kind == FixedInteractionKind::Protocol1 ||
                        impl.kind == FixedInteractionKind::Protocol2;
  if (protocol && impl.q > 2)
    throw UnsupportedQ("gate-level realizations cover q = 1 and q = 2, got q = " +
                       std::to_string(impl.q));
  if (3 * impl.q > numkit::kMaxDensityMatrixQubits)
    throw RegisterTooLarge("fixed interaction register of " +
                           std::to_string(3 * impl.q) + " qubits exceeds the cap");
  switch (impl.kind) {
    case FixedInteractionKind::ExactKraus: {
      const ComplexMatrix m = fixed_interaction_m(impl.q);
      kraus_.push_back(numkit::identity(m.rows()) - 0.5 * delta * (m.adjoint() * m));
      kraus_.push_back(std::sqrt(delta) * m);
      break;
    }
    case FixedInteractionKind::Protocol1:
      kraus_ = extract_kraus(build_protocol1(impl.q, delta));
      break;
    case FixedInteractionKind::Protocol2:
      kraus_ = extract_kraus(build_protocol2(impl.q, delta));
      break;
    case FixedInteractionKind::HybridJ: {
      dilation_ = hybrid_dilation_matrix(fixed_interaction_m(impl.q), delta);
      // The ancilla blocks E_b(s, s') = U(2s + b, 2s') are the channel's
      // Kraus operators; keeping them lets the exact form skip the dilation.
      const Eigen::Index d = dilation_.rows() / 2;
      for (int b = 0; b < 2; ++b) {
        ComplexMatrix block(d, d);
        for (Eigen::Index r = 0; r < d; ++r)
          for (Eigen::Index c = 0; c < d; ++c) block(r, c) = dilation_(2 * r + b, 2 * c);
        kraus_.push_back(std::move(block));
      }
      break;
    }
  }
}

qsim::RegisterState FixedInteractionChannel::operator()(
    const qsim::RegisterState& in) const {
  if (in.num_qubits != num_qubits())
    throw DimensionMismatch("fixed interaction expects a register of " +
                            std::to_string(num_qubits()) + " qubits");
  if (in.mode != Mode::Exact)
    throw WrongMode("this form acts on density matrices; pass a random source "
                    "for shot-mode registers");
  RegisterState out = in;
  ComplexMatrix next = ComplexMatrix::Zero(in.dm.rows(), in.dm.cols());
  for (const auto& k : kraus_) next += k * in.dm * k.adjoint();
  out.dm = std::move(next);
  return out;
}

qsim::RegisterState FixedInteractionChannel::operator()(
    const qsim::RegisterState& in, qsim::RandomSource& rng) const {
  if (in.mode == Mode::Exact) return (*this)(in);
  if (impl_.kind != FixedInteractionKind::HybridJ)
    throw WrongMode("only the HybridJ realization can act on shot-mode registers");
  if (in.num_qubits != num_qubits())
    throw DimensionMismatch("fixed interaction expects a register of " +
                            std::to_string(num_qubits()) + " qubits");
  RegisterState out = in;
  std::vector<int> labels(static_cast<std::size_t>(num_qubits()) + 1);
  std::iota(labels.begin(), labels.end(), 0);
  qsim::apply_dilated_channel(out, numkit::Operator(dilation_, std::move(labels)),
                              1, rng);
  return out;
}

FixedInteractionChannel fixed_interaction(const FixedInteractionImpl& impl,
                                          double delta) {
  return FixedInteractionChannel(impl, delta);
}

std::vector<PauliTerm> pauli_decomposition_m(int q) {
  if (q < 1) throw ConfigInvalid("the expansion needs q >= 1");
  static const std::array<std::pair<const char*, Complex>, 16> base{{
      {"III", {1, 0}},  {"XXI", {1, 0}},  {"YYI", {1, 0}},  {"ZZI", {1, 0}},
      {"IXX", {1, 0}},  {"XIX", {1, 0}},  {"YZX", {0, 1}},  {"ZYX", {0, -1}},
      {"IYY", {-1, 0}}, {"XZY", {0, 1}},  {"YIY", {-1, 0}}, {"ZXY", {0, -1}},
      {"IZZ", {1, 0}},  {"XYZ", {0, 1}},  {"YXZ", {0, -1}}, {"ZIZ", {1, 0}},
  }};
  const double unit = 1.0 / (4.0 * std::sqrt(2.0));
  std::vector<PauliTerm> terms;
  terms.reserve(static_cast<std::size_t>(std::pow(16.0, q)));
  // One factor per q; factor f occupies positions (f, q+f, 2q+f) so that the
  // three q-qubit slots stay contiguous in the combined register.
  std::vector<std::size_t> pick(static_cast<std::size_t>(q), 0);
  while (true) {
    PauliTerm term;
    term.coefficient = 1.0;
    term.letters.assign(static_cast<std::size_t>(3 * q), 'I');
    for (int f = 0; f < q; ++f) {
      const auto& [letters, sign] = base[pick[static_cast<std::size_t>(f)]];
      term.coefficient *= unit * sign;
      for (int t = 0; t < 3; ++t)
        term.letters[static_cast<std::size_t>(t * q + f)] = letters[t];
    }
    terms.push_back(std::move(term));
    int f = q - 1;
    while (f >= 0 && ++pick[static_cast<std::size_t>(f)] == base.size()) {
      pick[static_cast<std::size_t>(f)] = 0;
      --f;
    }
    if (f < 0) break;
  }
  return terms;
}

std::vector<numkit::Operator> four_unitary_grouping() {
  const ComplexMatrix i2 = numkit::pauli('I');
  const ComplexMatrix x = numkit::pauli('X');
  const ComplexMatrix y = numkit::pauli('Y');
  const ComplexMatrix z = numkit::pauli('Z');
  auto k3 = [](const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& c) {
    return numkit::kron(numkit::kron(a, b), c);
  };
  const std::vector<int> labels{0, 1, 2};
  std::vector<numkit::Operator> grouped;
  grouped.emplace_back(
      ComplexMatrix(0.5 * (k3(x, x, i2) - k3(i2, y, y) + k3(z, z, i2) - k3(y, i2, y))),
      labels);
  grouped.emplace_back(
      ComplexMatrix(0.5 * (k3(i2, x, x) + k3(y, x * y, x) + k3(x, i2, x) + k3(z, x * z, x))),
      labels);
  grouped.emplace_back(
      ComplexMatrix(0.5 * (k3(y, z * y, z) + k3(z, i2, z) + k3(i2, z, z) + k3(x, z * x, z))),
      labels);
  grouped.emplace_back(
      ComplexMatrix(0.5 * (k3(i2, i2, i2) + k3(y, y, i2) - k3(x, y * x, y) - k3(z, y * z, y))),
      labels);
  return grouped;
}

qsim::RegisterState evolve_wml_averaged(const tcmodel::TcSystem& sys,
                                        const qsim::RegisterState& initial,
                                        double t, int n,
                                        const FixedInteractionImpl& impl) {
  sys.validate();
  if (initial.num_qubits != sys.num_qubits())
    throw DimensionMismatch("register size does not match the system");
  if (t < 0.0) throw ConfigInvalid("evolution time must be nonnegative");
  ComplexMatrix rho = qsim::state_density_matrix(initial);
  if (t == 0.0) return RegisterState::density_matrix_from(std::move(rho), false);
  if (n < 1) throw ConfigInvalid("step count must be positive");

  const ProgramEnsemble ens = tc_program_ensemble(sys, 0.0);
  if (ens.c <= 0.0) return RegisterState::density_matrix_from(std::move(rho), false);
  const double tau = t / n;
  const double delta = ens.c * tau;
  const bool pump_rotates =
      tcmodel::has_pump(sys) && sys.pump_freq != sys.frame_shift;

  const int nq = sys.num_qubits();
  const Eigen::Index d = Eigen::Index{1} << nq;

  std::map<std::vector<int>, SupportBlock> blocks;
  auto block_for = [&](const std::vector<int>& support) -> SupportBlock& {
    auto [it, fresh] = blocks.try_emplace(support);
    if (fresh) {
      SupportBlock& block = it->second;
      block.support = support;
      block.dsup2 = Eigen::Index{1} << (2 * support.size());
      block.drest2 = (d * d) / block.dsup2;
      block.w_static = ComplexMatrix::Zero(block.dsup2, block.dsup2);
      block.vmap = make_vmap(nq, support);
    }
    return it->second;
  };

  for (const auto& term : ens.hamiltonian_terms) {
    if (term.pump && pump_rotates) continue;
    SupportBlock& block = block_for(term.support);
    block.w_static += (std::abs(term.coefficient) / ens.c) *
                      swap_average_superop(coefficient_sign(term.coefficient),
                                           term.sigma, delta);
  }
  // Jump superoperators are reused across terms sharing a program state
  // (every emitter carries the same one).
  std::vector<std::pair<ComplexVector, ComplexMatrix>> jump_cache;
  for (const auto& term : ens.lindblad_terms) {
    const int q = static_cast<int>(term.support.size());
    const ComplexMatrix* w = nullptr;
    for (const auto& [psi, cached] : jump_cache)
      if (psi.size() == term.psi.size() && (psi - term.psi).squaredNorm() == 0.0) {
        w = &cached;
        break;
      }
    if (w == nullptr) {
      const FixedInteractionChannel channel({impl.kind, q}, delta);
      jump_cache.emplace_back(term.psi, jump_term_superop(term.psi, channel, q));
      w = &jump_cache.back().second;
    }
    SupportBlock& block = block_for(term.support);
    block.w_static += (term.weight / ens.c) * (*w);
  }
  if (pump_rotates) block_for({0, 1}).pump_slot = true;

  ComplexVector v = vec_of(rho);
  ComplexVector permuted(d * d), mixed(d * d), accum(d * d);
  ComplexMatrix w_step;
  for (int step = 0; step < n; ++step) {
    accum.setZero();
    for (auto& [support, block] : blocks) {
      const ComplexMatrix* w = &block.w_static;
      if (block.pump_slot) {
        w_step = block.w_static;
        const double theta =
            (sys.pump_freq - sys.frame_shift) * (step + 0.5) * tau;
        for (const auto& [coefficient, state] :
             pump_program_states(sys.pump_amp, theta))
          w_step += (std::abs(coefficient) / ens.c) *
                    swap_average_superop(coefficient_sign(coefficient),
                                         ComplexMatrix(state * state.adjoint()), delta);
        w = &w_step;
      }
      for (Eigen::Index i = 0; i < d * d; ++i)
        permuted[block.vmap[static_cast<std::size_t>(i)]] = v[i];
      Eigen::Map<const ComplexMatrix> in_mat(permuted.data(), block.drest2, block.dsup2);
      Eigen::Map<ComplexMatrix> out_mat(mixed.data(), block.drest2, block.dsup2);
      out_mat.noalias() = in_mat * w->transpose();
      for (Eigen::Index i = 0; i < d * d; ++i)
        accum[i] += mixed[block.vmap[static_cast<std::size_t>(i)]];
    }
    v.swap(accum);
  }
  return RegisterState::density_matrix_from(
      Eigen::Map<const ComplexMatrix>(v.data(), d, d), false);
}

std::vector<qsim::ShotRecord> evolve_wml_shots(const tcmodel::TcSystem& sys,
                                               const qsim::RegisterState& initial,
                                               double t, int n,
                                               const FixedInteractionImpl& impl,
                                               int shots, std::uint64_t seed) {
  sys.validate();
  if (initial.mode != Mode::Shot)
    throw WrongMode("shot evolution needs a Shot-mode register");
  if (initial.num_qubits != sys.num_qubits())
    throw DimensionMismatch("register size does not match the system");
  if (impl.kind != FixedInteractionKind::HybridJ)
    throw WrongMode("only the HybridJ realization runs in shot mode");
  if (t < 0.0) throw ConfigInvalid("evolution time must be nonnegative");
  if (shots < 1) throw ConfigInvalid("needs at least one shot");
  if (t > 0.0 && n < 1) throw ConfigInvalid("step count must be positive");

  const ProgramEnsemble ens = tc_program_ensemble(sys, 0.0);
  const int nq = sys.num_qubits();
  const int steps = (t > 0.0 && ens.c > 0.0) ? n : 0;
  const double tau = steps > 0 ? t / n : 0.0;
  const double delta = steps > 0 ? ens.c * tau : 0.0;
  const double pump_freq = sys.pump_freq - sys.frame_shift;

  // Compose each term's dilated gate once; pump gates are rebuilt per draw
  // because their phase tracks the slice midpoint.
  std::vector<ComposedGate> ham_gates;
  ham_gates.reserve(ens.hamiltonian_terms.size());
  for (const auto& term : ens.hamiltonian_terms)
    ham_gates.push_back(compose_swap_gate(term.support, term.state,
                                          coefficient_sign(term.coefficient),
                                          delta, nq));
  std::vector<ComposedGate> jump_gates;
  jump_gates.reserve(ens.lindblad_terms.size());
  for (const auto& term : ens.lindblad_terms)
    jump_gates.push_back(compose_jump_gate(term.support, term.psi, delta, nq));

  qsim::RandomSource master(seed);
  std::vector<qsim::ShotRecord> records;
  records.reserve(static_cast<std::size_t>(shots));
  for (int s = 0; s < shots; ++s) {
    RegisterState state = initial;
    qsim::RandomSource rng = master.split(static_cast<std::uint64_t>(s));
    for (int step = 0; step < steps; ++step) {
      const SampledTerm pick = sample_step(ens, rng);
      if (pick.kind == TermKind::Hamiltonian) {
        const auto& term = ens.hamiltonian_terms[pick.index];
        if (term.pump && pump_freq != 0.0) {
          // Recover this entry's signed coefficient at the midpoint phase by
          // its position among the pump entries (their order is fixed).
          std::size_t ordinal = 0;
          for (std::size_t j = 0; j < pick.index; ++j)
            if (ens.hamiltonian_terms[j].pump) ++ordinal;
          const double theta = pump_freq * (step + 0.5) * tau;
          const auto rotated = pump_program_states(sys.pump_amp, theta);
          const auto& [coefficient, rotated_state] = rotated[ordinal];
          const ComposedGate gate = compose_swap_gate(
              term.support, rotated_state, coefficient_sign(coefficient), delta, nq);
          qsim::apply_dilated_channel(state, gate.op, gate.num_ancillas, rng, false);
        } else {
          const ComposedGate& gate = ham_gates[pick.index];
          qsim::apply_dilated_channel(state, gate.op, gate.num_ancillas, rng, false);
        }
      } else {
        const ComposedGate& gate = jump_gates[pick.index];
        qsim::apply_dilated_channel(state, gate.op, gate.num_ancillas, rng, false);
      }
    }
    records.push_back(qsim::measure_all(state, rng));
  }
  return records;
}

}  // namespace tcsim::wml
