#pragma once

// Observables: cavity/emitter populations from exact states or measured
// shots, the zero-delay second-order photon correlation g2(0), and its
// median-of-means batch estimator.

#include <vector>

#include "tcsim/numkit.hpp"
#include "tcsim/qsim.hpp"
#include "tcsim/tcmodel.hpp"

namespace tcsim::obs {

/// Populations at one time: expected cavity excitation count (0 .. 2^m - 1)
/// and per-emitter excited-state probability, with shot-noise standard
/// errors (zero for exact states).
struct PopulationSample {
  double time = 0.0;
  double cavity = 0.0;
  double cavity_stderr = 0.0;
  std::vector<double> emitters;
  std::vector<double> emitter_stderr;
};

/// Median-of-means estimate of g2(0). `numerator`, `denominator`, and
/// `ratio` pool every batch's shots; `batches` holds the per-batch ratios
/// (zero-denominator batches are dropped and counted separately);
/// `running_median` is the median of the batch ratios after each batch.
struct G2Estimate {
  double numerator = 0.0;
  double denominator = 0.0;
  double ratio = 0.0;
  std::vector<double> batches;
  std::vector<double> running_median;
  int degenerate_batches = 0;

  double estimate() const { return running_median.back(); }
};

/// Cavity excitation count encoded in the bitstring (cavity bits first).
int cavity_value(const std::vector<int>& bitstring, int cavity_qubits);

/// Exact traces Tr[a†a rho] and Tr[sigma+ sigma- rho] from the diagonal.
PopulationSample populations_exact(const numkit::ComplexMatrix& rho,
                                   const tcmodel::TcSystem& sys);

/// Sample means and standard errors over measured bitstrings.
PopulationSample populations_from_shots(const std::vector<qsim::ShotRecord>& records,
                                        const tcmodel::TcSystem& sys);

/// Tr[a†a†aa rho] / Tr[a†a rho]^2 via the excitation-number distribution
/// p_n: sum n(n-1) p_n over (sum n p_n)^2. Throws ZeroDenominator when the
/// cavity holds no excitation.
double g2_exact(const numkit::ComplexMatrix& rho, int cavity_qubits);

/// Median-of-means over per-batch histograms: batch_counts[b][n] is the
/// number of shots in batch b that measured n cavity excitations.
/// Throws AllBatchesDegenerate when every batch has an empty cavity.
G2Estimate g2_median_of_means(const std::vector<std::vector<long long>>& batch_counts);

}  // namespace tcsim::obs
