#include "tcsim/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace tcsim::qsim {

namespace {

using numkit::Complex;
using numkit::ComplexMatrix;
using numkit::ComplexVector;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_qubit_count(int num_qubits, int cap, const char* what) {
  if (num_qubits < 1) throw DimensionMismatch(std::string(what) + ": register needs at least one qubit");
  if (num_qubits > cap)
    throw RegisterTooLarge(std::string(what) + ": " + std::to_string(num_qubits) +
                           " qubits exceeds the cap of " + std::to_string(cap));
}

void check_unitary(const ComplexMatrix& u) {
  const ComplexMatrix gram = u.adjoint() * u;
  const double err =
      (gram - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
  if (err > 1e-9)
    throw NotUnitary("gate deviates from unitarity by " + std::to_string(err));
}

// Bit shift (from the least significant end) of each labeled qubit;
// qubit 0 is the most significant bit of the register index.
std::vector<int> label_shifts(const std::vector<int>& labels, int num_qubits) {
  std::vector<int> shifts;
  shifts.reserve(labels.size());
  for (int label : labels) {
    if (label < 0 || label >= num_qubits)
      throw LabelOutOfRange("qubit label " + std::to_string(label) +
                            " outside register of " + std::to_string(num_qubits) + " qubits");
    shifts.push_back(num_qubits - 1 - label);
  }
  return shifts;
}

// offsets[s] = register-index bits contributed by gate sub-index s, where
// the gate's first label is the most significant bit of s.
std::vector<Eigen::Index> gate_offsets(const std::vector<int>& shifts) {
  const int k = static_cast<int>(shifts.size());
  std::vector<Eigen::Index> offsets(std::size_t{1} << k, 0);
  for (std::size_t s = 0; s < offsets.size(); ++s)
    for (int j = 0; j < k; ++j)
      if ((s >> (k - 1 - j)) & 1u) offsets[s] |= Eigen::Index{1} << shifts[j];
  return offsets;
}

// All register indices whose labeled bits are zero (one per residual index).
std::vector<Eigen::Index> base_indices(int num_qubits, const std::vector<int>& shifts) {
  Eigen::Index mask = 0;
  for (int s : shifts) mask |= Eigen::Index{1} << s;
  const Eigen::Index dim = Eigen::Index{1} << num_qubits;
  std::vector<Eigen::Index> bases;
  bases.reserve(static_cast<std::size_t>(dim >> shifts.size()));
  for (Eigen::Index i = 0; i < dim; ++i)
    if ((i & mask) == 0) bases.push_back(i);
  return bases;
}

struct GatePlan {
  std::vector<Eigen::Index> offsets;
  std::vector<Eigen::Index> bases;
};

GatePlan make_plan(const std::vector<int>& labels, int num_qubits) {
  const auto shifts = label_shifts(labels, num_qubits);
  return {gate_offsets(shifts), base_indices(num_qubits, shifts)};
}

// In-place v -> (U embedded on the labeled qubits) v, gather/scatter style.
void transform_vector(ComplexVector& v, const ComplexMatrix& gate, const GatePlan& plan) {
  const auto sub_dim = static_cast<Eigen::Index>(plan.offsets.size());
  ComplexVector gathered(sub_dim);
  for (Eigen::Index base : plan.bases) {
    for (Eigen::Index s = 0; s < sub_dim; ++s) gathered[s] = v[base + plan.offsets[s]];
    const ComplexVector mixed = gate * gathered;
    for (Eigen::Index s = 0; s < sub_dim; ++s) v[base + plan.offsets[s]] = mixed[s];
  }
}

// rho -> U rho U+ by transforming every column with U and every row with U*.
void transform_density(ComplexMatrix& rho, const ComplexMatrix& gate, const GatePlan& plan) {
  const auto sub_dim = static_cast<Eigen::Index>(plan.offsets.size());
  const ComplexMatrix conj_gate = gate.conjugate();
  ComplexVector gathered(sub_dim);
  for (Eigen::Index col = 0; col < rho.cols(); ++col) {
    for (Eigen::Index base : plan.bases) {
      for (Eigen::Index s = 0; s < sub_dim; ++s)
        gathered[s] = rho(base + plan.offsets[s], col);
      const ComplexVector mixed = gate * gathered;
      for (Eigen::Index s = 0; s < sub_dim; ++s)
        rho(base + plan.offsets[s], col) = mixed[s];
    }
  }
  for (Eigen::Index row = 0; row < rho.rows(); ++row) {
    for (Eigen::Index base : plan.bases) {
      for (Eigen::Index s = 0; s < sub_dim; ++s)
        gathered[s] = rho(row, base + plan.offsets[s]);
      const ComplexVector mixed = conj_gate * gathered;
      for (Eigen::Index s = 0; s < sub_dim; ++s)
        rho(row, base + plan.offsets[s]) = mixed[s];
    }
  }
}

void validate_density(const ComplexMatrix& rho) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw DimensionMismatch("density matrix is not Hermitian");
  if (std::abs(rho.trace() - Complex(1.0, 0.0)) > 1e-9)
    throw DimensionMismatch("density matrix trace differs from 1");
  if (rho.rows() <= 1024) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-8)
      throw DimensionMismatch("density matrix has a negative eigenvalue");
  }
}

int qubits_for_dim(Eigen::Index dim, const char* what) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim)
    throw DimensionMismatch(std::string(what) + ": dimension is not a power of two");
  return n;
}

}  // namespace

RegisterState RegisterState::statevector(int num_qubits) {
  check_qubit_count(num_qubits, numkit::kMaxStatevectorQubits, "statevector");
  RegisterState state;
  state.mode = Mode::Shot;
  state.num_qubits = num_qubits;
  state.vector = ComplexVector::Zero(Eigen::Index{1} << num_qubits);
  state.vector[0] = 1.0;
  return state;
}

RegisterState RegisterState::statevector_from(ComplexVector amplitudes) {
  const int n = qubits_for_dim(amplitudes.size(), "statevector");
  check_qubit_count(n, numkit::kMaxStatevectorQubits, "statevector");
  if (std::abs(amplitudes.norm() - 1.0) > 1e-9)
    throw DimensionMismatch("statevector norm differs from 1");
  RegisterState state;
  state.mode = Mode::Shot;
  state.num_qubits = n;
  state.vector = std::move(amplitudes);
  return state;
}

RegisterState RegisterState::density_matrix(int num_qubits) {
  check_qubit_count(num_qubits, numkit::kMaxDensityMatrixQubits, "density matrix");
  RegisterState state;
  state.mode = Mode::Exact;
  state.num_qubits = num_qubits;
  state.dm = ComplexMatrix::Zero(Eigen::Index{1} << num_qubits, Eigen::Index{1} << num_qubits);
  state.dm(0, 0) = 1.0;
  return state;
}

RegisterState RegisterState::density_matrix_from(ComplexMatrix rho, bool validate) {
  if (rho.rows() != rho.cols()) throw DimensionMismatch("density matrix must be square");
  const int n = qubits_for_dim(rho.rows(), "density matrix");
  check_qubit_count(n, numkit::kMaxDensityMatrixQubits, "density matrix");
  if (validate) validate_density(rho);
  RegisterState state;
  state.mode = Mode::Exact;
  state.num_qubits = n;
  state.dm = std::move(rho);
  return state;
}

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

double RandomSource::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

RandomSource RandomSource::split(std::uint64_t stream) const {
  return RandomSource(splitmix64(seed_ + 0x9e3779b97f4a7c15ULL * (stream + 1)));
}

void apply_unitary(RegisterState& state, const numkit::Operator& u, bool verify) {
  if (verify) check_unitary(u.matrix);
  const GatePlan plan = make_plan(u.qubit_labels, state.num_qubits);
  if (state.mode == Mode::Shot)
    transform_vector(state.vector, u.matrix, plan);
  else
    transform_density(state.dm, u.matrix, plan);
}

void apply_dilated_channel(RegisterState& state, const numkit::Operator& u,
                           int num_ancillas, RandomSource& rng, bool verify) {
  if (num_ancillas < 1) throw DimensionMismatch("dilated channel needs at least one ancilla");
  const int total = state.num_qubits + num_ancillas;
  const int cap = state.mode == Mode::Shot ? numkit::kMaxStatevectorQubits
                                           : numkit::kMaxDensityMatrixQubits;
  if (total > cap)
    throw AncillaBudgetExceeded("register of " + std::to_string(state.num_qubits) +
                                " qubits cannot adjoin " + std::to_string(num_ancillas) +
                                " ancillas under the cap of " + std::to_string(cap));
  if (verify) check_unitary(u.matrix);

  const Eigen::Index anc_dim = Eigen::Index{1} << num_ancillas;
  const GatePlan plan = make_plan(u.qubit_labels, total);

  if (state.mode == Mode::Shot) {
    // Adjoin ancillas in |0> at the least significant end.
    ComplexVector extended = ComplexVector::Zero(state.dim() * anc_dim);
    for (Eigen::Index i = 0; i < state.dim(); ++i) extended[i * anc_dim] = state.vector[i];
    transform_vector(extended, u.matrix, plan);

    // Measure the joint ancilla outcome, then collapse and drop the ancillas.
    double draw = rng.uniform();
    Eigen::Index outcome = anc_dim - 1;
    double prob = 0.0;
    for (Eigen::Index m = 0; m < anc_dim; ++m) {
      double pm = 0.0;
      for (Eigen::Index i = 0; i < state.dim(); ++i) pm += std::norm(extended[i * anc_dim + m]);
      draw -= pm;
      if (draw < 0.0) {
        outcome = m;
        prob = pm;
        break;
      }
      prob = pm;
    }
    for (Eigen::Index i = 0; i < state.dim(); ++i)
      state.vector[i] = extended[i * anc_dim + outcome] / std::sqrt(prob);
    for (int j = 0; j < num_ancillas; ++j)
      state.ancilla_outcomes.push_back(static_cast<int>((outcome >> (num_ancillas - 1 - j)) & 1));
  } else {
    ComplexMatrix anc = ComplexMatrix::Zero(anc_dim, anc_dim);
    anc(0, 0) = 1.0;
    ComplexMatrix extended = numkit::kron(state.dm, anc);
    transform_density(extended, u.matrix, plan);
    std::vector<int> dims(static_cast<std::size_t>(total), 2);
    std::vector<int> keep(static_cast<std::size_t>(state.num_qubits));
    for (int i = 0; i < state.num_qubits; ++i) keep[static_cast<std::size_t>(i)] = i;
    state.dm = numkit::partial_trace(extended, dims, keep);
  }
}

ShotRecord measure_all(RegisterState& state, RandomSource& rng) {
  if (state.mode != Mode::Shot)
    throw WrongMode("measure_all requires a Shot-mode register");
  double draw = rng.uniform();
  Eigen::Index outcome = state.dim() - 1;
  for (Eigen::Index i = 0; i < state.dim(); ++i) {
    draw -= std::norm(state.vector[i]);
    if (draw < 0.0) {
      outcome = i;
      break;
    }
  }
  ShotRecord record;
  record.seed = rng.seed();
  record.ancilla_outcomes = state.ancilla_outcomes;
  record.bitstring.resize(static_cast<std::size_t>(state.num_qubits));
  for (int q = 0; q < state.num_qubits; ++q)
    record.bitstring[static_cast<std::size_t>(q)] =
        static_cast<int>((outcome >> (state.num_qubits - 1 - q)) & 1);
  state.vector.setZero();
  state.vector[outcome] = 1.0;
  return record;
}

ComplexMatrix state_density_matrix(const RegisterState& state) {
  if (state.mode == Mode::Shot) return state.vector * state.vector.adjoint();
  return state.dm;
}

ComplexMatrix channel_superoperator(
    const std::function<RegisterState(const RegisterState&)>& channel, int num_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << num_qubits;
  ComplexMatrix super(dim * dim, dim * dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    for (Eigen::Index row = 0; row < dim; ++row) {
      ComplexMatrix unit = ComplexMatrix::Zero(dim, dim);
      unit(row, col) = 1.0;
      const RegisterState out = channel(RegisterState::density_matrix_from(std::move(unit), false));
      super.col(col * dim + row) =
          Eigen::Map<const ComplexVector>(out.dm.data(), dim * dim);
    }
  }
  return super;
}

}  // namespace tcsim::qsim
