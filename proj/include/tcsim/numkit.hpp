#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "tcsim/errors.hpp"

// Dense complex linear-algebra primitives shared by every other module.
// All operations are pure functions on immutable inputs; none keep state.
namespace tcsim::numkit {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// Desk-scale caps: statevectors up to 14 qubits, density matrices up to 12.
inline constexpr int kMaxStatevectorQubits = 14;
inline constexpr int kMaxDensityMatrixQubits = 12;

// Max-entry Hermiticity test; symmetric in A vs A† by construction.
bool is_hermitian(const ComplexMatrix& m, double tol);

// Square matrix of dimension 2^q tied to specific register qubits.
// Qubit 0 is the leftmost bit of a bitstring and the most significant
// tensor factor everywhere in this codebase.
struct Operator {
  ComplexMatrix matrix;
  std::vector<int> qubit_labels;

  Operator(ComplexMatrix m, std::vector<int> labels);

  int num_qubits() const { return static_cast<int>(qubit_labels.size()); }
  Eigen::Index dim() const { return matrix.rows(); }
};

// Kronecker products. The Operator overload concatenates the label lists.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
Operator kron(const Operator& a, const Operator& b);

// U = e^{-i h theta} by eigendecomposition; requires h Hermitian (tol 1e-10).
ComplexMatrix expm_hermitian(const ComplexMatrix& h, double theta);
Operator expm_hermitian(const Operator& h, double theta);

// e^{m t} for general square m (scaling-and-squaring, degree-13 Pade).
ComplexMatrix expm_general(const ComplexMatrix& m, double t);

// Trace over the tensor factors not listed in `keep`. `dims` are the factor
// dimensions in register order (most significant first); `keep` lists the
// factor indices to retain, in ascending order of their original position.
ComplexMatrix partial_trace(const ComplexMatrix& rho,
                            const std::vector<int>& dims,
                            const std::vector<int>& keep);

// Dense 2^n x 2^n matrix acting as `op` on its labeled qubits and as the
// identity elsewhere (register order, qubit 0 most significant).
ComplexMatrix embed(const Operator& op, int num_qubits);

// Schatten p-norm from singular values; p must be 1, 2, or infinity.
double schatten_norm(const ComplexMatrix& x, double p);

// (1/2) || rho - sigma ||_1.
double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& sigma);

// --- small constructors used throughout ---

ComplexMatrix identity(Eigen::Index dim);

// Single-qubit Pauli matrix for 'I', 'X', 'Y', or 'Z'.
ComplexMatrix pauli(char which);

// Tensor product of single-qubit Paulis, first letter most significant.
ComplexMatrix pauli_string(const std::string& letters);

// Computational-basis column vector |index> in the given dimension.
ComplexVector basis_ket(Eigen::Index dim, Eigen::Index index);

}  // namespace tcsim::numkit
