#include "tcsim/numkit.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

namespace tcsim::numkit {

namespace {

// Singular values via the eigenvalues of x†x (or a direct Hermitian
// eigendecomposition when x is Hermitian, which is exact for our operators).
Eigen::VectorXd singular_values(const ComplexMatrix& x) {
  if (x.rows() == x.cols() && is_hermitian(x, 1e-10)) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(x);
    return es.eigenvalues().cwiseAbs();
  }
  if (x.rows() >= x.cols()) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(x.adjoint() * x);
    return es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(x * x.adjoint());
  return es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
}

}  // namespace

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Operator::Operator(ComplexMatrix m, std::vector<int> labels)
    : matrix(std::move(m)), qubit_labels(std::move(labels)) {
  if (matrix.rows() != matrix.cols()) {
    throw DimensionMismatch("Operator matrix must be square");
  }
  const auto expected = Eigen::Index{1} << qubit_labels.size();
  if (matrix.rows() != expected) {
    throw DimensionMismatch("Operator dimension does not match 2^(label count)");
  }
  auto sorted = qubit_labels;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw LabelOutOfRange("Operator qubit labels must be distinct");
  }
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Operator kron(const Operator& a, const Operator& b) {
  std::vector<int> labels = a.qubit_labels;
  labels.insert(labels.end(), b.qubit_labels.begin(), b.qubit_labels.end());
  return Operator(kron(a.matrix, b.matrix), std::move(labels));
}

ComplexMatrix expm_hermitian(const ComplexMatrix& h, double theta) {
  if (!is_hermitian(h, 1e-10)) {
    throw NotHermitian("expm_hermitian requires a Hermitian generator");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  const Eigen::VectorXd& lam = es.eigenvalues();
  ComplexVector phases(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    phases(i) = std::exp(Complex(0.0, -lam(i) * theta));
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Operator expm_hermitian(const Operator& h, double theta) {
  return Operator(expm_hermitian(h.matrix, theta), h.qubit_labels);
}

ComplexMatrix expm_general(const ComplexMatrix& m, double t) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("expm_general requires a square matrix");
  }
  ComplexMatrix result = (m * t).exp();
  if (!result.allFinite()) {
    throw Singular("matrix exponential did not converge to finite entries");
  }
  return result;
}

ComplexMatrix partial_trace(const ComplexMatrix& rho,
                            const std::vector<int>& dims,
                            const std::vector<int>& keep) {
  Eigen::Index total = 1;
  for (int d : dims) total *= d;
  if (rho.rows() != total || rho.cols() != total) {
    throw DimensionMismatch("partial_trace: factor dimensions do not multiply to the matrix dimension");
  }
  const int nf = static_cast<int>(dims.size());
  std::vector<char> kept(nf, 0);
  for (int k : keep) {
    if (k < 0 || k >= nf) throw DimensionMismatch("partial_trace: keep index out of range");
    kept[k] = 1;
  }

  // Strides of each factor in the flattened index (most significant first).
  std::vector<Eigen::Index> stride(nf, 1);
  for (int f = nf - 2; f >= 0; --f) stride[f] = stride[f + 1] * dims[f + 1];

  std::vector<int> keep_f, drop_f;
  for (int f = 0; f < nf; ++f) (kept[f] ? keep_f : drop_f).push_back(f);

  Eigen::Index dk = 1, dd = 1;
  for (int f : keep_f) dk *= dims[f];
  for (int f : drop_f) dd *= dims[f];

  // Flattened offsets of every kept multi-index and every dropped multi-index.
  auto offsets = [&](const std::vector<int>& facs, Eigen::Index count) {
    std::vector<Eigen::Index> out(count, 0);
    for (Eigen::Index v = 0; v < count; ++v) {
      Eigen::Index rem = v;
      for (int i = static_cast<int>(facs.size()) - 1; i >= 0; --i) {
        const int f = facs[i];
        out[v] += (rem % dims[f]) * stride[f];
        rem /= dims[f];
      }
    }
    return out;
  };
  const auto keep_off = offsets(keep_f, dk);
  const auto drop_off = offsets(drop_f, dd);

  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (Eigen::Index i = 0; i < dk; ++i) {
    for (Eigen::Index j = 0; j < dk; ++j) {
      Complex acc = 0.0;
      for (Eigen::Index s = 0; s < dd; ++s) {
        acc += rho(keep_off[i] + drop_off[s], keep_off[j] + drop_off[s]);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

ComplexMatrix embed(const Operator& op, int num_qubits) {
  const int k = op.num_qubits();
  if (num_qubits < k) throw LabelOutOfRange("embed: register smaller than operator support");
  Eigen::Index labeled_mask = 0;
  std::vector<Eigen::Index> offsets(std::size_t{1} << k, 0);
  for (int j = 0; j < k; ++j) {
    const int label = op.qubit_labels[static_cast<std::size_t>(j)];
    if (label < 0 || label >= num_qubits) {
      throw LabelOutOfRange("embed: qubit label outside register");
    }
    labeled_mask |= Eigen::Index{1} << (num_qubits - 1 - label);
  }
  for (std::size_t s = 0; s < offsets.size(); ++s) {
    for (int j = 0; j < k; ++j) {
      if ((s >> (k - 1 - j)) & 1u) {
        offsets[s] |= Eigen::Index{1}
                      << (num_qubits - 1 - op.qubit_labels[static_cast<std::size_t>(j)]);
      }
    }
  }
  const Eigen::Index dim = Eigen::Index{1} << num_qubits;
  ComplexMatrix full = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index base = 0; base < dim; ++base) {
    if ((base & labeled_mask) != 0) continue;
    for (Eigen::Index si = 0; si < op.dim(); ++si) {
      for (Eigen::Index sj = 0; sj < op.dim(); ++sj) {
        full(base + offsets[static_cast<std::size_t>(si)],
             base + offsets[static_cast<std::size_t>(sj)]) = op.matrix(si, sj);
      }
    }
  }
  return full;
}

double schatten_norm(const ComplexMatrix& x, double p) {
  if (x.size() == 0) return 0.0;
  if (p == 2.0) return x.norm();
  const Eigen::VectorXd sv = singular_values(x);
  if (p == 1.0) return sv.sum();
  if (std::isinf(p)) return sv.maxCoeff();
  throw std::invalid_argument("schatten_norm supports p = 1, 2, or infinity");
}

double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw DimensionMismatch("trace_distance requires equal dimensions");
  }
  return 0.5 * schatten_norm(rho - sigma, 1.0);
}

ComplexMatrix identity(Eigen::Index dim) { return ComplexMatrix::Identity(dim, dim); }

ComplexMatrix pauli(char which) {
  ComplexMatrix m(2, 2);
  switch (which) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("pauli expects one of I, X, Y, Z");
  }
  return m;
}

ComplexMatrix pauli_string(const std::string& letters) {
  if (letters.empty()) throw std::invalid_argument("pauli_string needs at least one letter");
  ComplexMatrix out = pauli(letters[0]);
  for (size_t i = 1; i < letters.size(); ++i) out = kron(out, pauli(letters[i]));
  return out;
}

ComplexVector basis_ket(Eigen::Index dim, Eigen::Index index) {
  if (index < 0 || index >= dim) throw DimensionMismatch("basis_ket index out of range");
  ComplexVector v = ComplexVector::Zero(dim);
  v(index) = 1.0;
  return v;
}

}  // namespace tcsim::numkit
