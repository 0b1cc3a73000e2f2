#include "tcsim/tcmodel.hpp"

#include <cmath>
#include <string>

namespace tcsim::tcmodel {

namespace {

using numkit::Complex;
using numkit::ComplexMatrix;

std::vector<int> cavity_labels(int m) {
  std::vector<int> labels(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) labels[static_cast<std::size_t>(i)] = i;
  return labels;
}

void check_emitter(const TcSystem& sys, int j) {
  if (j < 0 || j >= sys.n_emitters)
    throw LabelOutOfRange("emitter index " + std::to_string(j) + " out of range");
}

}  // namespace

void TcSystem::validate() const {
  if (n_emitters < 0) throw ConfigInvalid("n_emitters must be non-negative");
  if (cavity_qubits < 1) throw ConfigInvalid("cavity_qubits must be at least 1");
  if (static_cast<int>(omega_e.size()) != n_emitters)
    throw ConfigInvalid("omega_e must list one frequency per emitter");
  if (static_cast<int>(g.size()) != n_emitters)
    throw ConfigInvalid("g must list one coupling per emitter");
  if (kappa < 0 || gamma < 0) throw ConfigInvalid("decay rates must be non-negative");
  if (pump_amp < 0) throw ConfigInvalid("pump amplitude must be non-negative");
  for (double gj : g)
    if (gj < 0) throw ConfigInvalid("couplings must be non-negative");
}

numkit::Operator cavity_annihilation(int m) {
  if (m < 1) throw ConfigInvalid("cavity needs at least one qubit");
  const Eigen::Index dim = Eigen::Index{1} << m;
  ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index value = 1; value < dim; ++value)
    a(value - 1, value) = std::sqrt(static_cast<double>(value));
  return numkit::Operator(std::move(a), cavity_labels(m));
}

numkit::Operator cavity_number(int m) {
  if (m < 1) throw ConfigInvalid("cavity needs at least one qubit");
  const Eigen::Index dim = Eigen::Index{1} << m;
  ComplexMatrix n = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index value = 0; value < dim; ++value)
    n(value, value) = static_cast<double>(value);
  return numkit::Operator(std::move(n), cavity_labels(m));
}

numkit::Operator emitter_lowering(const TcSystem& sys, int j) {
  check_emitter(sys, j);
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  s(0, 1) = 1.0;
  return numkit::Operator(std::move(s), {sys.cavity_qubits + j});
}

std::vector<numkit::Operator> number_terms(const TcSystem& sys) {
  std::vector<numkit::Operator> terms;
  terms.reserve(static_cast<std::size_t>(1 + sys.n_emitters));

  auto n_cavity = cavity_number(sys.cavity_qubits);
  n_cavity.matrix *= (sys.omega_c - sys.frame_shift);
  terms.push_back(std::move(n_cavity));

  for (int j = 0; j < sys.n_emitters; ++j) {
    ComplexMatrix n = ComplexMatrix::Zero(2, 2);
    n(1, 1) = sys.omega_e[static_cast<std::size_t>(j)] - sys.frame_shift;
    terms.emplace_back(std::move(n), std::vector<int>{sys.cavity_qubits + j});
  }
  return terms;
}

std::vector<numkit::Operator> interaction_terms(const TcSystem& sys) {
  const auto a = cavity_annihilation(sys.cavity_qubits);
  ComplexMatrix raise = ComplexMatrix::Zero(2, 2);
  raise(1, 0) = 1.0;
  ComplexMatrix lower = ComplexMatrix::Zero(2, 2);
  lower(0, 1) = 1.0;

  std::vector<numkit::Operator> terms;
  terms.reserve(static_cast<std::size_t>(sys.n_emitters));
  for (int j = 0; j < sys.n_emitters; ++j) {
    ComplexMatrix m = numkit::kron(a.matrix, raise) +
                      numkit::kron(ComplexMatrix(a.matrix.adjoint()), lower);
    m *= sys.g[static_cast<std::size_t>(j)];
    std::vector<int> labels = cavity_labels(sys.cavity_qubits);
    labels.push_back(sys.cavity_qubits + j);
    terms.emplace_back(std::move(m), std::move(labels));
  }
  return terms;
}

bool has_pump(const TcSystem& sys) { return sys.pump_amp != 0.0; }

numkit::Operator pump_term(const TcSystem& sys, double t) {
  const auto a = cavity_annihilation(sys.cavity_qubits);
  const double phase = (sys.pump_freq - sys.frame_shift) * t;
  const Complex forward = std::polar(sys.pump_amp, phase);
  ComplexMatrix m = forward * a.matrix +
                    std::conj(forward) * ComplexMatrix(a.matrix.adjoint());
  return numkit::Operator(std::move(m), cavity_labels(sys.cavity_qubits));
}

numkit::Operator hamiltonian(const TcSystem& sys, double t) {
  sys.validate();
  const int n = sys.num_qubits();
  ComplexMatrix h = ComplexMatrix::Zero(sys.dim(), sys.dim());
  for (const auto& term : number_terms(sys)) h += numkit::embed(term, n);
  for (const auto& term : interaction_terms(sys)) h += numkit::embed(term, n);
  if (has_pump(sys)) h += numkit::embed(pump_term(sys, t), n);

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i;
  return numkit::Operator(std::move(h), std::move(labels));
}

std::vector<LindbladTerm> lindblad_terms(const TcSystem& sys) {
  std::vector<LindbladTerm> terms;
  terms.reserve(static_cast<std::size_t>(1 + sys.n_emitters));
  terms.push_back({cavity_annihilation(sys.cavity_qubits), sys.kappa});
  for (int j = 0; j < sys.n_emitters; ++j)
    terms.push_back({emitter_lowering(sys, j), sys.gamma});
  return terms;
}

ComplexMatrix lindblad_rhs(const TcSystem& sys, const ComplexMatrix& rho, double t) {
  if (rho.rows() != sys.dim() || rho.cols() != sys.dim())
    throw DimensionMismatch("density matrix does not match the register dimension");
  const ComplexMatrix h = hamiltonian(sys, t).matrix;
  ComplexMatrix rhs = Complex(0.0, -1.0) * (h * rho - rho * h);
  for (const auto& term : lindblad_terms(sys)) {
    const ComplexMatrix l = numkit::embed(term.op, sys.num_qubits());
    const ComplexMatrix ldag_l = l.adjoint() * l;
    rhs += term.rate * (l * rho * l.adjoint() - 0.5 * (ldag_l * rho + rho * ldag_l));
  }
  return rhs;
}

}  // namespace tcsim::tcmodel
