#include "oracles.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace refcalc {

Matrix kron_index_formula(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

Matrix expm_taylor(const Matrix& m, double t, int terms) {
  Matrix a = m * t;
  // Scale until the 1-norm is comfortably inside the Taylor radius.
  int squarings = 0;
  double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  while (norm1 > 0.25 && squarings < 60) {
    a *= 0.5;
    norm1 *= 0.5;
    ++squarings;
  }
  Matrix sum = Matrix::Identity(a.rows(), a.cols());
  Matrix term = Matrix::Identity(a.rows(), a.cols());
  for (int k = 1; k <= terms; ++k) {
    term = (term * a) / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

Matrix partial_trace_scan(const Matrix& rho, const std::vector<int>& dims,
                          const std::vector<int>& keep) {
  const int nf = static_cast<int>(dims.size());
  std::vector<char> kept(nf, 0);
  for (int k : keep) kept[k] = 1;

  Eigen::Index dk = 1;
  for (int f = 0; f < nf; ++f)
    if (kept[f]) dk *= dims[f];

  // Decompose a flat index into per-factor digits, most significant first.
  auto digits = [&](Eigen::Index flat) {
    std::vector<Eigen::Index> d(nf);
    for (int f = nf - 1; f >= 0; --f) {
      d[f] = flat % dims[f];
      flat /= dims[f];
    }
    return d;
  };
  // Re-compose only the kept digits into the reduced flat index.
  auto kept_flat = [&](const std::vector<Eigen::Index>& d) {
    Eigen::Index flat = 0;
    for (int f = 0; f < nf; ++f)
      if (kept[f]) flat = flat * dims[f] + d[f];
    return flat;
  };

  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    const auto dr = digits(r);
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
      const auto dc = digits(c);
      bool diagonal_in_dropped = true;
      for (int f = 0; f < nf; ++f) {
        if (!kept[f] && dr[f] != dc[f]) {
          diagonal_in_dropped = false;
          break;
        }
      }
      if (diagonal_in_dropped) out(kept_flat(dr), kept_flat(dc)) += rho(r, c);
    }
  }
  return out;
}

Matrix embed_gate_dense(const Matrix& u, const std::vector<int>& labels, int num_qubits) {
  const int k = static_cast<int>(labels.size());
  const Eigen::Index dim = Eigen::Index{1} << num_qubits;

  // Extract the sub-index formed by the labeled qubits (label order gives
  // significance inside u, qubit 0 of the register is the leftmost bit).
  auto sub_index = [&](Eigen::Index full) {
    Eigen::Index s = 0;
    for (int i = 0; i < k; ++i) {
      const int bit = (full >> (num_qubits - 1 - labels[i])) & 1;
      s = (s << 1) | bit;
    }
    return s;
  };
  auto rest_mask = [&](Eigen::Index full) {
    Eigen::Index masked = full;
    for (int i = 0; i < k; ++i) {
      masked &= ~(Eigen::Index{1} << (num_qubits - 1 - labels[i]));
    }
    return masked;
  };

  Matrix out = Matrix::Zero(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      if (rest_mask(r) != rest_mask(c)) continue;
      out(r, c) = u(sub_index(r), sub_index(c));
    }
  }
  return out;
}

Matrix kraus_superoperator(const std::vector<Matrix>& kraus) {
  const Eigen::Index d = kraus.at(0).rows();
  Matrix s = Matrix::Zero(d * d, d * d);
  for (const auto& k : kraus) s += kron_index_formula(k.conjugate(), k);
  return s;
}

double trace_distance_eigensum(const Matrix& rho, const Matrix& sigma) {
  Eigen::ComplexEigenSolver<Matrix> es(rho - sigma);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Matrix block_dilation_channel(const Matrix& rho, const std::vector<Matrix>& lindblad_ops,
                              double tau) {
  const Eigen::Index d = rho.rows();
  const int levels = static_cast<int>(lindblad_ops.size()) + 1;

  // J = sum_k L_k† ⊗ |0><k| + L_k ⊗ |k><0| on system ⊗ C^levels.
  Matrix j = Matrix::Zero(d * levels, d * levels);
  for (int k = 1; k < levels; ++k) {
    const Matrix& l = lindblad_ops[k - 1];
    Matrix e0k = Matrix::Zero(levels, levels);
    e0k(0, k) = 1.0;
    Matrix ek0 = Matrix::Zero(levels, levels);
    ek0(k, 0) = 1.0;
    j += kron_index_formula(l.adjoint(), e0k) + kron_index_formula(l, ek0);
  }

  const Matrix u = expm_taylor(Complex(0, -1) * j, std::sqrt(tau), 40);
  Matrix anc0 = Matrix::Zero(levels, levels);
  anc0(0, 0) = 1.0;
  const Matrix big = u * kron_index_formula(rho, anc0) * u.adjoint();
  return partial_trace_scan(big, {static_cast<int>(d), levels}, {0});
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_slope needs matched samples");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(gauss(rng), gauss(rng));
  return m;
}

Matrix random_hermitian(int dim, std::mt19937_64& rng) {
  Matrix m = random_matrix(dim, dim, rng);
  return (m + m.adjoint()) / 2.0;
}

Matrix random_density_matrix(int dim, std::mt19937_64& rng) {
  Matrix m = random_matrix(dim, dim, rng);
  Matrix rho = m * m.adjoint();
  return rho / rho.trace();
}

Matrix random_unitary(int dim, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(dim, dim, rng));
  Matrix q = qr.householderQ();
  // Fix the phase convention so the result is Haar-like, not QR-biased.
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Complex d = r(i, i);
    q.col(i) *= d / std::abs(d);
  }
  return q;
}

Vector random_state(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  return v / v.norm();
}

}  // namespace refcalc
