// SPDX-License-Identifier: Apache-2.0
//
// Receive combiners (MR, local MMSE, global MMSE) and second-layer weights.

#pragma once

#include <string>
#include <vector>

#include "starcf/estimation.hpp"
#include "starcf/linalg.hpp"
#include "starcf/scenario.hpp"

namespace starcf {

enum class Combiner { kMR, kLocalMMSE, kGlobalMMSE };
enum class Decoder { kLSFD, kMF, kNone };

std::string to_string(Combiner c);
std::string to_string(Decoder d);

/// V_mk = G_hat_mk.
CMat mr_combiner(const ChannelEstimate& est, int m, int k);
/// Level-2 MR: [G_hat_1k; ...; G_hat_Mk] without receiver scaling.
CMat mr_collective(const ChannelEstimate& est, int k);

/// Local MMSE combiners of every user at AP m (one factorization shared by all users).
std::vector<CMat> local_mmse_combiners(const ChannelEstimate& est, const EstimationStatistics& stats,
                                       const Scenario& scn, int m);
CMat local_mmse_combiner(const ChannelEstimate& est, const EstimationStatistics& stats, const Scenario& scn,
                         int m, int k);

/// Interference-plus-noise matrix seen by user k at the CPU:
/// sum_k' p G_k' P G_k'^H - p kappa_t G_k P G_k^H + sum_k' p C~_k' + C_r + sigma^2 I.
CMat level2_interference(const ChannelEstimate& est, const EstimationStatistics& stats, const Scenario& scn,
                         int k);
/// sqrt(p kappa_t) G_k P^{1/2}, the useful-signal factor of user k at the CPU.
CMat level2_signal(const ChannelEstimate& est, const Scenario& scn, int k);

/// Global MMSE combiners for all users.
std::vector<CMat> global_mmse_combiners(const ChannelEstimate& est, const EstimationStatistics& stats,
                                        const Scenario& scn);
CMat global_mmse_combiner(const ChannelEstimate& est, const EstimationStatistics& stats, const Scenario& scn,
                          int k);

/// A_k = (p sum_k' U_kk' + Gamma_k + sigma^2 Lambda_k)^{-1} H_bar_kk P_k^{1/2}.
CMat lsfd_weights(const std::vector<CMat>& U_k, const CMat& Gamma_k, const CMat& Lambda_k, const CMat& H_bar_kk,
                  const CMat& P_sqrt_k, double p_u, double sigma2);

/// Blocks (1/M) I.
CMat mf_weights(int M, int N_u);

}  // namespace starcf
