#include "tcsim/splitj.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace tcsim::splitj {

namespace {

using numkit::Complex;
using numkit::ComplexMatrix;

double operator_norm(const ComplexMatrix& m) {
  return numkit::schatten_norm(m, std::numeric_limits<double>::infinity());
}

// Checks [A, B] = 0 on the union of the two supports. Disjoint supports
// commute trivially and are skipped by the caller.
bool commute_on_union(const numkit::Operator& a, const numkit::Operator& b) {
  std::map<int, int> position;  // register label -> union index
  for (int label : a.qubit_labels) position.emplace(label, 0);
  for (int label : b.qubit_labels) position.emplace(label, 0);
  int next = 0;
  for (auto& [label, pos] : position) pos = next++;

  auto relabel = [&](const numkit::Operator& op) {
    std::vector<int> labels;
    labels.reserve(op.qubit_labels.size());
    for (int label : op.qubit_labels) labels.push_back(position.at(label));
    return numkit::embed(numkit::Operator(op.matrix, std::move(labels)), next);
  };
  const ComplexMatrix fa = relabel(a), fb = relabel(b);
  const double scale = std::max({1.0, fa.cwiseAbs().maxCoeff(), fb.cwiseAbs().maxCoeff()});
  return (fa * fb - fb * fa).cwiseAbs().maxCoeff() <= 1e-12 * scale * scale;
}

bool supports_overlap(const numkit::Operator& a, const numkit::Operator& b) {
  for (int la : a.qubit_labels)
    for (int lb : b.qubit_labels)
      if (la == lb) return true;
  return false;
}

template <typename Getter, typename Range>
void check_pairwise_commuting(const Range& ops, Getter get, const char* what) {
  for (std::size_t i = 0; i < ops.size(); ++i) {
    for (std::size_t j = i + 1; j < ops.size(); ++j) {
      const numkit::Operator& a = get(ops[i]);
      const numkit::Operator& b = get(ops[j]);
      if (supports_overlap(a, b) && !commute_on_union(a, b))
        throw ConfigInvalid(std::string(what) + " terms do not commute");
    }
  }
}

// Dilation generator on support + one ancilla (appended least significant):
// maps |psi>|0> to (L|psi>)|1> and back.
ComplexMatrix dilation_generator(const ComplexMatrix& l) {
  ComplexMatrix ket01 = ComplexMatrix::Zero(2, 2), ket10 = ComplexMatrix::Zero(2, 2);
  ket01(0, 1) = 1.0;
  ket10(1, 0) = 1.0;
  return numkit::kron(ComplexMatrix(l.adjoint()), ket01) + numkit::kron(l, ket10);
}

numkit::Operator pump_exponential(const SplitJPlan& plan, double t_mid, double angle) {
  const auto a = tcmodel::cavity_annihilation(plan.cavity_qubits);
  const Complex forward = std::polar(plan.pump_amp, plan.pump_phase_freq * t_mid);
  ComplexMatrix h = forward * a.matrix +
                    std::conj(forward) * ComplexMatrix(a.matrix.adjoint());
  return numkit::Operator(numkit::expm_hermitian(h, angle), a.qubit_labels);
}

void apply_elements(qsim::RegisterState& state, const std::vector<StepElement>& elements,
                    qsim::RandomSource& rng) {
  for (const auto& element : elements) {
    if (const auto* dilation = std::get_if<DilationUnitary>(&element))
      qsim::apply_dilated_channel(state, dilation->u, 1, rng);
    else
      qsim::apply_unitary(state, std::get<numkit::Operator>(element));
  }
}

}  // namespace

SplitJPlan make_plan(const tcmodel::TcSystem& sys, double total_time, int n_steps,
                     int trotter_order) {
  sys.validate();
  if (n_steps < 1) throw ConfigInvalid("need at least one step");
  if (trotter_order != 1 && trotter_order != 2)
    throw ConfigInvalid("trotter_order must be 1 or 2");
  if (total_time < 0) throw ConfigInvalid("total_time must be non-negative");

  SplitJPlan plan;
  plan.n_steps = n_steps;
  plan.total_time = total_time;
  plan.trotter_order = trotter_order;
  plan.coherent_commuting = tcmodel::number_terms(sys);
  plan.coherent_noncommuting = tcmodel::interaction_terms(sys);
  plan.dissipative = tcmodel::lindblad_terms(sys);
  plan.has_pump = tcmodel::has_pump(sys);
  plan.pump_amp = sys.pump_amp;
  plan.pump_phase_freq = sys.pump_freq - sys.frame_shift;
  plan.cavity_qubits = sys.cavity_qubits;
  plan.num_system_qubits = sys.num_qubits();

  check_pairwise_commuting(
      plan.coherent_commuting, [](const numkit::Operator& op) -> const numkit::Operator& { return op; },
      "commuting coherent");
  check_pairwise_commuting(
      plan.dissipative,
      [](const tcmodel::LindbladTerm& term) -> const numkit::Operator& { return term.op; },
      "Lindblad");
  return plan;
}

double lambda_max(const SplitJPlan& plan) {
  double best = 0.0;
  for (const auto& h : plan.coherent_commuting) best = std::max(best, operator_norm(h.matrix));
  for (const auto& h : plan.coherent_noncommuting)
    best = std::max(best, operator_norm(h.matrix));
  if (plan.has_pump) {
    // The pump norm is phase-independent; evaluate at zero phase.
    const auto a = tcmodel::cavity_annihilation(plan.cavity_qubits);
    best = std::max(best, plan.pump_amp *
                              operator_norm(a.matrix + ComplexMatrix(a.matrix.adjoint())));
  }
  for (const auto& term : plan.dissipative) {
    const double norm = operator_norm(term.op.matrix);
    best = std::max(best, term.rate * norm * norm);
  }
  return best;
}

int suggest_steps(const SplitJPlan& plan, double epsilon) {
  if (epsilon <= 0.0 || epsilon >= 1.0)
    throw ConfigInvalid("epsilon must lie in (0, 1)");
  const double k = static_cast<double>(plan.dissipative.size());
  const double q = static_cast<double>(plan.coherent_commuting.size() +
                                       plan.coherent_noncommuting.size() +
                                       (plan.has_pump ? 1 : 0));
  const double lambda = lambda_max(plan);
  const double value =
      (k * k + q * q) * lambda * lambda * plan.total_time * plan.total_time / epsilon;
  return std::max(1, static_cast<int>(std::ceil(value)));
}

std::vector<StepElement> build_step(const SplitJPlan& plan, int slice_index) {
  if (slice_index < 0 || slice_index >= plan.n_steps)
    throw ConfigInvalid("slice index out of range");
  const double tau = plan.tau();
  const double sqrt_tau = std::sqrt(tau);
  const double t_mid = (slice_index + 0.5) * tau;

  std::vector<StepElement> elements;

  // Dissipative dilations, one fresh ancilla each (label = register size).
  for (std::size_t k = 0; k < plan.dissipative.size(); ++k) {
    const auto& term = plan.dissipative[k];
    const ComplexMatrix scaled = std::sqrt(term.rate) * term.op.matrix;
    std::vector<int> labels = term.op.qubit_labels;
    labels.push_back(plan.num_system_qubits);
    DilationUnitary dilation{
        numkit::Operator(numkit::expm_hermitian(dilation_generator(scaled), sqrt_tau),
                         std::move(labels)),
        static_cast<int>(k), sqrt_tau};
    elements.emplace_back(std::move(dilation));
  }

  const double angle = plan.trotter_order == 2 ? tau / 2.0 : tau;
  auto push_exponential = [&](const numkit::Operator& h, double theta) {
    elements.emplace_back(
        numkit::Operator(numkit::expm_hermitian(h.matrix, theta), h.qubit_labels));
  };

  for (const auto& h : plan.coherent_commuting) push_exponential(h, angle);
  for (const auto& h : plan.coherent_noncommuting) push_exponential(h, angle);
  if (plan.has_pump) elements.emplace_back(pump_exponential(plan, t_mid, angle));

  if (plan.trotter_order == 2) {
    // Mirror pass: the same exponentials in strictly reversed order.
    if (plan.has_pump) elements.emplace_back(pump_exponential(plan, t_mid, angle));
    for (auto it = plan.coherent_noncommuting.rbegin();
         it != plan.coherent_noncommuting.rend(); ++it)
      push_exponential(*it, angle);
    for (auto it = plan.coherent_commuting.rbegin(); it != plan.coherent_commuting.rend();
         ++it)
      push_exponential(*it, angle);
  }
  return elements;
}

qsim::RegisterState evolve_exact(const SplitJPlan& plan, const qsim::RegisterState& initial) {
  if (initial.mode != qsim::Mode::Exact)
    throw WrongMode("evolve_exact needs an Exact-mode register");
  if (initial.num_qubits != plan.num_system_qubits)
    throw DimensionMismatch("register does not match the plan");
  qsim::RegisterState state = initial;
  qsim::RandomSource unused(0);
  for (int s = 0; s < plan.n_steps; ++s)
    apply_elements(state, build_step(plan, s), unused);
  return state;
}

std::vector<qsim::ShotRecord> evolve_shots(const SplitJPlan& plan,
                                           const qsim::RegisterState& initial, int shots,
                                           std::uint64_t seed) {
  if (initial.mode != qsim::Mode::Shot)
    throw WrongMode("evolve_shots needs a Shot-mode register");
  if (initial.num_qubits != plan.num_system_qubits)
    throw DimensionMismatch("register does not match the plan");
  if (shots < 1) throw ConfigInvalid("need at least one shot");

  // Gate construction is shot-independent; build all slices once.
  std::vector<std::vector<StepElement>> slices;
  slices.reserve(static_cast<std::size_t>(plan.n_steps));
  for (int s = 0; s < plan.n_steps; ++s) slices.push_back(build_step(plan, s));

  qsim::RandomSource master(seed);
  std::vector<qsim::ShotRecord> records;
  records.reserve(static_cast<std::size_t>(shots));
  for (int shot = 0; shot < shots; ++shot) {
    qsim::RegisterState state = initial;
    auto rng = master.split(static_cast<std::uint64_t>(shot));
    for (const auto& slice : slices) apply_elements(state, slice, rng);
    records.push_back(qsim::measure_all(state, rng));
  }
  return records;
}

}  // namespace tcsim::splitj
