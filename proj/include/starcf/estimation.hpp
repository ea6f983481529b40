// SPDX-License-Identifier: Apache-2.0
//
// Impaired pilot observation, MMSE estimator statistics and per-trial estimates.

#pragma once

#include <vector>

#include "starcf/channel.hpp"
#include "starcf/correlation.hpp"
#include "starcf/linalg.hpp"
#include "starcf/rng.hpp"
#include "starcf/scenario.hpp"

namespace starcf {

/// The four additive parts of the observation covariance.
struct PsiTerms {
  CMat V1;  // coherent pilot-sharing users
  CMat V2;  // transmit distortion
  CMat V3;  // receiver distortion, statistical form
  CMat V4;  // noise
  CMat sum() const { return V1 + V2 + V3 + V4; }
};

/// Realization-independent estimator statistics of one setup. Per-pair
/// entries are stored at [m*K + k].
struct EstimationStatistics {
  int M = 0, K = 0, N_ap = 0, N_u = 0;
  std::vector<CMat> Q, Psi, Z, Delta_hat;
  std::vector<CMat> C_tilde;  // sum_n xi_n (Delta^{n,n} - Delta_hat^{n,n})
  std::vector<CMat> C_pilot;  // [m] statistical pilot-phase receiver distortion
  std::vector<CMat> C_bar;    // [m] statistical data-phase receiver distortion

  std::size_t idx(int m, int k) const { return static_cast<std::size_t>(m * K + k); }
  KronIndex kron_index() const { return {N_ap, N_u}; }
  /// blkdiag(kappa_m * C_tilde_mk).
  CMat collective_c_tilde(int k, const RVec& kappa_r) const;
  /// blkdiag(C_bar_m).
  CMat collective_c_r() const;
};

/// Statistical receiver-distortion covariance (1-kappa) power sum_k Delta_bar tr(P_k R_k) diag(R_ap).
CMat statistical_rx_distortion(const Scenario& scn, const CorrelationSet& corr, int m, double power);

PsiTerms psi_terms(const Scenario& scn, const CorrelationSet& corr, int m, int k);
CMat q_matrix(const Scenario& scn, const CorrelationSet& corr, int m, int k);

EstimationStatistics build_statistics(const Scenario& scn, const CorrelationSet& corr);

/// N_ap x tau_p pilot observation at every AP. Transmit distortions are
/// common to all APs; receiver distortion is conditioned on the channels.
std::vector<CMat> pilot_observation(const ChannelRealization& ch, const Scenario& scn, RandomStream& rng);

/// vec(Y Phi).
CVec project_pilot(const CMat& Y, const CMat& phi);

struct ChannelEstimate {
  int M = 0, K = 0;
  std::vector<CMat> G_hat;  // [m*K + k], N_ap x N_u

  const CMat& at(int m, int k) const { return G_hat[static_cast<std::size_t>(m * K + k)]; }
  /// [sqrt(kappa_1) G_hat_1k; ...].
  CMat collective(int k, const RVec& kappa_r) const;
  /// [G_hat_1k; ...] without the receiver scaling.
  CMat stacked(int k) const;
};

/// vec(G_hat_mk) = Z_mk vec(Y_m Phi_k).
ChannelEstimate estimate_channels(const EstimationStatistics& stats, const std::vector<CMat>& Y,
                                  const Scenario& scn);

}  // namespace starcf
