// SPDX-License-Identifier: Apache-2.0

#include "starcf/combining.hpp"

#include <stdexcept>

namespace starcf {

std::string to_string(Combiner c) {
  switch (c) {
    case Combiner::kMR: return "MR";
    case Combiner::kLocalMMSE: return "MMSE";
    case Combiner::kGlobalMMSE: return "MMSE";
  }
  return "MR";
}

std::string to_string(Decoder d) {
  switch (d) {
    case Decoder::kLSFD: return "LSFD";
    case Decoder::kMF: return "MF";
    case Decoder::kNone: return "none";
  }
  return "none";
}

CMat mr_combiner(const ChannelEstimate& est, int m, int k) { return est.at(m, k); }

CMat mr_collective(const ChannelEstimate& est, int k) { return est.stacked(k); }

std::vector<CMat> local_mmse_combiners(const ChannelEstimate& est, const EstimationStatistics& stats,
                                       const Scenario& scn, int m) {
  const double p = scn.cfg.p_u;
  const double kr = scn.kappa_r(m);
  CMat inner = stats.C_bar[m] + scn.cfg.sigma2 * CMat::Identity(scn.N_ap, scn.N_ap);
  for (int kp = 0; kp < scn.K; ++kp) {
    const CMat& g = est.at(m, kp);
    inner += kr * p * (g * scn.xi[kp].asDiagonal() * g.adjoint() + stats.C_tilde[stats.idx(m, kp)]);
  }
  auto llt = hpd_factor(inner, "local MMSE");
  std::vector<CMat> out(scn.K);
  for (int k = 0; k < scn.K; ++k)
    out[k] = llt.solve(CMat(std::sqrt(kr * p * scn.kappa_t(k)) * est.at(m, k) * scn.power_ctrl_sqrt(k)));
  return out;
}

CMat local_mmse_combiner(const ChannelEstimate& est, const EstimationStatistics& stats, const Scenario& scn,
                         int m, int k) {
  return local_mmse_combiners(est, stats, scn, m)[k];
}

namespace {

CMat level2_common(const EstimationStatistics& stats, const Scenario& scn, const std::vector<CMat>& g_coll) {
  const double p = scn.cfg.p_u;
  const int n = scn.M * scn.N_ap;
  CMat s = stats.collective_c_r() + scn.cfg.sigma2 * CMat::Identity(n, n);
  for (int kp = 0; kp < scn.K; ++kp)
    s += p * (g_coll[kp] * scn.xi[kp].asDiagonal() * g_coll[kp].adjoint() +
              stats.collective_c_tilde(kp, scn.kappa_r));
  return s;
}

std::vector<CMat> collectives(const ChannelEstimate& est, const Scenario& scn) {
  std::vector<CMat> g(scn.K);
  for (int k = 0; k < scn.K; ++k) g[k] = est.collective(k, scn.kappa_r);
  return g;
}

}  // namespace

CMat level2_signal(const ChannelEstimate& est, const Scenario& scn, int k) {
  return std::sqrt(scn.cfg.p_u * scn.kappa_t(k)) * est.collective(k, scn.kappa_r) * scn.power_ctrl_sqrt(k);
}

CMat level2_interference(const ChannelEstimate& est, const EstimationStatistics& stats, const Scenario& scn,
                         int k) {
  const auto g = collectives(est, scn);
  const CMat b = level2_signal(est, scn, k);
  return hermitian_part(CMat(level2_common(stats, scn, g) - b * b.adjoint()));
}

std::vector<CMat> global_mmse_combiners(const ChannelEstimate& est, const EstimationStatistics& stats,
                                        const Scenario& scn) {
  const auto g = collectives(est, scn);
  auto llt = hpd_factor(level2_common(stats, scn, g), "global MMSE");
  std::vector<CMat> out(scn.K);
  for (int k = 0; k < scn.K; ++k) out[k] = llt.solve(level2_signal(est, scn, k));
  return out;
}

CMat global_mmse_combiner(const ChannelEstimate& est, const EstimationStatistics& stats, const Scenario& scn,
                          int k) {
  return global_mmse_combiners(est, stats, scn)[k];
}

CMat lsfd_weights(const std::vector<CMat>& U_k, const CMat& Gamma_k, const CMat& Lambda_k, const CMat& H_bar_kk,
                  const CMat& P_sqrt_k, double p_u, double sigma2) {
  if (U_k.empty()) throw std::invalid_argument("lsfd_weights: no interference moments");
  CMat norm = Gamma_k + sigma2 * Lambda_k;
  for (const auto& u : U_k) norm += p_u * u;
  auto llt = hpd_factor(norm, "LSFD normalization");
  return llt.solve(CMat(H_bar_kk * P_sqrt_k));
}

CMat mf_weights(int M, int N_u) {
  CMat a(M * N_u, N_u);
  for (int m = 0; m < M; ++m) a.middleRows(m * N_u, N_u) = CMat::Identity(N_u, N_u) / double(M);
  return a;
}

}  // namespace starcf
