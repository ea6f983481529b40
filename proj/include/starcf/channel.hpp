// SPDX-License-Identifier: Apache-2.0
//
// Per-coherence-block channel and hardware-distortion sampling.

#pragma once

#include <vector>

#include "starcf/correlation.hpp"
#include "starcf/linalg.hpp"
#include "starcf/rng.hpp"
#include "starcf/scenario.hpp"

namespace starcf {

struct ChannelRealization {
  int M = 0, K = 0;
  std::vector<CMat> G_direct;    // [m*K + k], N_ap x N_u
  std::vector<CMat> G_ris_ap;    // [m], N_ap x L
  std::vector<CMat> G_user_ris;  // [k], L x N_u
  std::vector<CMat> G;           // [m*K + k], aggregate

  const CMat& at(int m, int k) const { return G[static_cast<std::size_t>(m * K + k)]; }
  /// Stacked [sqrt(kappa_1) G_1k; ...; sqrt(kappa_M) G_Mk].
  CMat collective(int k, const RVec& kappa_r) const;
};

/// Draws every channel of one coherence block. All Gaussian draws happen
/// regardless of which gains are zero so the stream layout is fixed.
ChannelRealization sample_channels(const Scenario& scn, const CorrelationSet& corr, RandomStream& rng);

/// n_symbols x N_u transmit distortion; column n has variance (1-kappa) power xi_n.
CMat sample_tx_distortion(const RVec& xi, double kappa, double power, int n_symbols, RandomStream& rng);

/// Diagonal of the channel-conditional receiver-distortion covariance
/// (1-kappa) power sum_k diag(G_k P_k G_k^H).
RVec rx_distortion_variance(const std::vector<CMat>& G_at_m, const std::vector<RVec>& xi, double kappa,
                            double power);

/// N_ap x n_symbols receiver distortion with the given per-antenna variances.
CMat sample_rx_distortion(const RVec& variance, int n_symbols, RandomStream& rng);

/// Convenience: conditional receiver distortion at AP m for a realization.
CMat sample_rx_distortion(const ChannelRealization& ch, const Scenario& scn, int m, double power, int n_symbols,
                          RandomStream& rng);

}  // namespace starcf
