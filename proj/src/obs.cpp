#include "tcsim/obs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tcsim::obs {

namespace {

using numkit::ComplexMatrix;

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Unbiased sample standard error of the mean; zero for a single sample.
double standard_error(double sum, double sum_sq, double count) {
  if (count < 2) return 0.0;
  const double mean = sum / count;
  const double variance = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
  return std::sqrt(variance / count);
}

// Batch g2 from an excitation-count histogram; false when the denominator
// vanishes (no excitation observed).
bool histogram_g2(const std::vector<long long>& counts, double& numerator,
                  double& denominator) {
  long long total = 0;
  for (long long c : counts) total += c;
  if (total <= 0) return false;
  double mean_n = 0.0, mean_nn = 0.0;
  for (std::size_t n = 0; n < counts.size(); ++n) {
    const double p = static_cast<double>(counts[n]) / static_cast<double>(total);
    mean_n += static_cast<double>(n) * p;
    mean_nn += static_cast<double>(n) * (static_cast<double>(n) - 1.0) * p;
  }
  numerator = mean_nn;
  denominator = mean_n * mean_n;
  return denominator > 0.0;
}

}  // namespace

int cavity_value(const std::vector<int>& bitstring, int cavity_qubits) {
  int value = 0;
  for (int q = 0; q < cavity_qubits; ++q)
    value = (value << 1) | bitstring[static_cast<std::size_t>(q)];
  return value;
}

PopulationSample populations_exact(const ComplexMatrix& rho, const tcmodel::TcSystem& sys) {
  if (rho.rows() != sys.dim())
    throw DimensionMismatch("state does not match the register dimension");
  PopulationSample sample;
  sample.emitters.assign(static_cast<std::size_t>(sys.n_emitters), 0.0);
  sample.emitter_stderr.assign(static_cast<std::size_t>(sys.n_emitters), 0.0);
  const int n_em = sys.n_emitters;
  for (Eigen::Index idx = 0; idx < rho.rows(); ++idx) {
    const double p = rho(idx, idx).real();
    sample.cavity += static_cast<double>(idx >> n_em) * p;
    for (int j = 0; j < n_em; ++j)
      if ((idx >> (n_em - 1 - j)) & 1) sample.emitters[static_cast<std::size_t>(j)] += p;
  }
  return sample;
}

PopulationSample populations_from_shots(const std::vector<qsim::ShotRecord>& records,
                                        const tcmodel::TcSystem& sys) {
  if (records.empty()) throw DimensionMismatch("no shots to average");
  PopulationSample sample;
  sample.emitters.assign(static_cast<std::size_t>(sys.n_emitters), 0.0);
  sample.emitter_stderr.assign(static_cast<std::size_t>(sys.n_emitters), 0.0);

  const double count = static_cast<double>(records.size());
  double cavity_sum = 0.0, cavity_sum_sq = 0.0;
  std::vector<double> emitter_sum(static_cast<std::size_t>(sys.n_emitters), 0.0);
  for (const auto& record : records) {
    if (static_cast<int>(record.bitstring.size()) != sys.num_qubits())
      throw DimensionMismatch("shot bitstring does not match the register");
    const double v = cavity_value(record.bitstring, sys.cavity_qubits);
    cavity_sum += v;
    cavity_sum_sq += v * v;
    for (int j = 0; j < sys.n_emitters; ++j)
      emitter_sum[static_cast<std::size_t>(j)] +=
          record.bitstring[static_cast<std::size_t>(sys.cavity_qubits + j)];
  }
  sample.cavity = cavity_sum / count;
  sample.cavity_stderr = standard_error(cavity_sum, cavity_sum_sq, count);
  for (int j = 0; j < sys.n_emitters; ++j) {
    const double sum = emitter_sum[static_cast<std::size_t>(j)];
    sample.emitters[static_cast<std::size_t>(j)] = sum / count;
    // For 0/1 outcomes the sum of squares equals the sum.
    sample.emitter_stderr[static_cast<std::size_t>(j)] = standard_error(sum, sum, count);
  }
  return sample;
}

double g2_exact(const ComplexMatrix& rho, int cavity_qubits) {
  const Eigen::Index d = rho.rows();
  if ((Eigen::Index{1} << cavity_qubits) > d)
    throw DimensionMismatch("cavity does not fit in the state");
  Eigen::Index rest = d >> cavity_qubits;
  double mean_n = 0.0, mean_nn = 0.0;
  for (Eigen::Index idx = 0; idx < d; ++idx) {
    const double p = rho(idx, idx).real();
    const double n = static_cast<double>(idx / rest);
    mean_n += n * p;
    mean_nn += n * (n - 1.0) * p;
  }
  if (mean_n * mean_n <= 0.0) throw ZeroDenominator("cavity population vanishes");
  return mean_nn / (mean_n * mean_n);
}

G2Estimate g2_median_of_means(const std::vector<std::vector<long long>>& batch_counts) {
  if (batch_counts.empty()) throw AllBatchesDegenerate("no batches supplied");

  G2Estimate est;
  std::vector<long long> pooled;
  for (const auto& counts : batch_counts) {
    if (counts.size() > pooled.size()) pooled.resize(counts.size(), 0);
    for (std::size_t n = 0; n < counts.size(); ++n) pooled[n] += counts[n];

    double num = 0.0, den = 0.0;
    if (histogram_g2(counts, num, den)) {
      est.batches.push_back(num / den);
      est.running_median.push_back(median_of(est.batches));
    } else {
      ++est.degenerate_batches;
    }
  }
  if (est.batches.empty())
    throw AllBatchesDegenerate("every batch measured an empty cavity");

  double pooled_num = 0.0, pooled_den = 0.0;
  histogram_g2(pooled, pooled_num, pooled_den);
  est.numerator = pooled_num;
  est.denominator = pooled_den;
  est.ratio = pooled_den > 0.0 ? pooled_num / pooled_den : 0.0;
  return est;
}

}  // namespace tcsim::obs
