#pragma once

// Independent reference implementations used only by the test suites.
// Each one recomputes a quantity through a different algorithm or index
// convention than the library, so agreement is meaningful evidence.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace refcalc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Kronecker product by the raw double-loop index formula
// (a ⊗ b)[i*rb + k][j*cb + l] = a[i][j] * b[k][l].
Matrix kron_index_formula(const Matrix& a, const Matrix& b);

// e^{m t} by scaled-and-squared truncated Taylor series.
Matrix expm_taylor(const Matrix& m, double t, int terms);

// Partial trace by brute-force scan of all (row, col) pairs of the full
// space, accumulating entries whose discarded factor indices coincide.
Matrix partial_trace_scan(const Matrix& rho, const std::vector<int>& dims,
                          const std::vector<int>& keep);

// Dense embedding of a k-qubit gate into an n-qubit register by the
// entrywise delta formula; returns the full 2^n x 2^n matrix.
Matrix embed_gate_dense(const Matrix& u, const std::vector<int>& labels, int num_qubits);

// Column-stacking superoperator of a Kraus map: sum_k conj(K_k) ⊗ K_k.
Matrix kraus_superoperator(const std::vector<Matrix>& kraus);

// (1/2) sum |eigenvalues| of (rho - sigma), via the general (non-selfadjoint)
// eigensolver — a different code path than the library's.
double trace_distance_eigensum(const Matrix& rho, const Matrix& sigma);

// Single-channel reference for the block dilation of a whole Lindblad-operator
// list: one ancilla level per operator plus one marker level, exponentiated
// densely, applied to rho ⊗ |0><0|, ancilla traced out.
Matrix block_dilation_channel(const Matrix& rho, const std::vector<Matrix>& lindblad_ops,
                              double tau);

// Ordinary-least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

// --- random inputs (deterministic engines seeded by the caller) ---

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng);
Matrix random_hermitian(int dim, std::mt19937_64& rng);
Matrix random_density_matrix(int dim, std::mt19937_64& rng);
Matrix random_unitary(int dim, std::mt19937_64& rng);
Vector random_state(int dim, std::mt19937_64& rng);

}  // namespace refcalc
