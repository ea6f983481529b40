// SPDX-License-Identifier: Apache-2.0
//
// Level-1 (use-and-then-forget) and Level-2 spectral efficiency.
//
// Level 1 takes expectations inside D and Sigma, so the SE is a deterministic
// function of averaged moments. Level 2 averages the per-realization log-det.

#pragma once

#include <vector>

#include "starcf/channel.hpp"
#include "starcf/combining.hpp"
#include "starcf/estimation.hpp"
#include "starcf/linalg.hpp"
#include "starcf/scenario.hpp"

namespace starcf {

/// Streaming mean and complex variance E|x - mu|^2 of a vector, mergeable in a fixed order.
class Welford {
 public:
  Welford() = default;
  explicit Welford(Eigen::Index n) : mean_(CVec::Zero(n)), m2_(RVec::Zero(n)) {}

  void add(const CVec& x);
  void merge(const Welford& other);

  long count() const { return n_; }
  const CVec& mean() const { return mean_; }
  RVec variance() const;
  /// Standard error of the mean.
  RVec std_error() const;

 private:
  long n_ = 0;
  CVec mean_;
  RVec m2_;
};

/// Level-1 expectations for every user. U[k*K+k'] = E{F_kk' P_k' F_kk'^H};
/// H[k] = E{H_kk}; Gamma and Lambda are block diagonal.
struct Level1Moments {
  int M = 0, K = 0, N_u = 0;
  std::vector<CMat> H;
  std::vector<CMat> U;
  std::vector<CMat> Gamma;
  std::vector<CMat> Lambda;

  static Level1Moments zeros(int M, int K, int N_u);
  const CMat& u(int k, int kp) const { return U[static_cast<std::size_t>(k * K + kp)]; }
  CMat& u(int k, int kp) { return U[static_cast<std::size_t>(k * K + kp)]; }

  Eigen::Index packed_size() const;
  CVec pack() const;
  void unpack(const CVec& v);
};

/// Packed per-trial sample of the Level-1 moments for combiners V[m*K+k].
CVec level1_sample(const std::vector<CMat>& V, const ChannelRealization& ch, const EstimationStatistics& stats,
                   const Scenario& scn);

/// Combiner-specific Level-1 accumulator.
class Level1Accumulator {
 public:
  Level1Accumulator() = default;
  Level1Accumulator(int M, int K, int N_u);
  void add(const std::vector<CMat>& V, const ChannelRealization& ch, const EstimationStatistics& stats,
           const Scenario& scn);
  void merge(const Level1Accumulator& other) { acc_.merge(other.acc_); }
  long count() const { return acc_.count(); }
  Level1Moments mean() const;
  /// Per-entry standard error, in the same layout as the moments (real-valued, stored as complex).
  Level1Moments std_error() const;
  const Welford& raw() const { return acc_; }

 private:
  Level1Moments shape_;
  Welford acc_;
};

/// Fraction of the interference covariance attributed to each impairment.
struct TermTraces {
  double DS = 0, BU = 0, IU = 0, TD = 0, RD = 0, NS = 0;
};

struct Level1Result {
  RVec se;
  std::vector<TermTraces> terms;
};

/// Second-layer weights for every user from a moment set.
std::vector<CMat> lsfd_from_moments(const Level1Moments& mom, const Scenario& scn);
std::vector<CMat> mf_from_moments(const Level1Moments& mom);

/// SE_k = prelog * log2|I + D^H Sigma^{-1} D| with D = sqrt(p) A^H H_kk P^{1/2}.
Level1Result se_level1(const Level1Moments& mom, const std::vector<CMat>& A, const Scenario& scn);

/// Jackknife standard error of the Level-1 SE over contiguous trial blocks.
/// Entries 0..K-1 are per user; entry K is the sum SE.
RVec jackknife_se_stderr(const std::vector<Level1Accumulator>& blocks, const std::vector<CMat>& A,
                         const Scenario& scn);

/// Per-trial Level-2 log-det for combiner V_k (generic form).
double level2_logdet(const CMat& V, const ChannelEstimate& est, const EstimationStatistics& stats,
                     const Scenario& scn, int k);
/// Per-trial Level-2 log-det at the optimum (global MMSE), log2|I + b^H S^{-1} b|.
double level2_logdet_optimal(const ChannelEstimate& est, const EstimationStatistics& stats, const Scenario& scn,
                             int k);
/// Per-trial Level-2 log-det of every user for the given combiner. For global
/// MMSE the optimal closed expression is used.
RVec level2_trial(Combiner c, const ChannelEstimate& est, const EstimationStatistics& stats, const Scenario& scn);

}  // namespace starcf
