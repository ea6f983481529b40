// SPDX-License-Identifier: Apache-2.0

#include "starcf/channel.hpp"

#include <stdexcept>

namespace starcf {

CMat ChannelRealization::collective(int k, const RVec& kappa_r) const {
  const CMat& g0 = at(0, k);
  CMat out(M * g0.rows(), g0.cols());
  for (int m = 0; m < M; ++m) out.middleRows(m * g0.rows(), g0.rows()) = std::sqrt(kappa_r(m)) * at(m, k);
  return out;
}

ChannelRealization sample_channels(const Scenario& scn, const CorrelationSet& corr, RandomStream& rng) {
  if (corr.M != scn.M || corr.K != scn.K || corr.N_ap != scn.N_ap || corr.N_u != scn.N_u)
    throw std::invalid_argument("sample_channels: scenario and correlation set disagree on dimensions");
  const int M = scn.M, K = scn.K, N_ap = scn.N_ap, N_u = scn.N_u, L = corr.L;
  ChannelRealization ch;
  ch.M = M;
  ch.K = K;
  ch.G_direct.resize(static_cast<std::size_t>(M * K));
  ch.G.resize(static_cast<std::size_t>(M * K));
  ch.G_ris_ap.resize(M);
  ch.G_user_ris.resize(K);

  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k) {
      const CMat v = rng.cnormal(N_ap, N_u);
      ch.G_direct[m * K + k] = std::sqrt(scn.beta_mk(m, k)) * corr.R_ap_sqrt[m] * v * corr.R_user_sqrt[k];
    }
  for (int m = 0; m < M; ++m) {
    const CMat v = rng.cnormal(N_ap, L);
    ch.G_ris_ap[m] = std::sqrt(scn.beta_m(m)) * corr.R_ap_sqrt[m] * v * corr.ris_sqrt_scaled;
  }
  for (int k = 0; k < K; ++k) {
    const CMat v = rng.cnormal(L, N_u);
    ch.G_user_ris[k] = std::sqrt(scn.beta_k(k)) * corr.ris_sqrt_scaled * v * corr.R_user_sqrt[k];
  }
  for (int k = 0; k < K; ++k) {
    const CMat tail = corr.theta_of(k) * ch.G_user_ris[k];
    for (int m = 0; m < M; ++m) ch.G[m * K + k] = ch.G_direct[m * K + k] + ch.G_ris_ap[m] * tail;
  }
  return ch;
}

CMat sample_tx_distortion(const RVec& xi, double kappa, double power, int n_symbols, RandomStream& rng) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("sample_tx_distortion: kappa outside [0,1]");
  if (!(power > 0.0)) throw std::invalid_argument("sample_tx_distortion: power must be positive");
  CMat w = rng.cnormal(n_symbols, xi.size());
  for (Eigen::Index n = 0; n < xi.size(); ++n) w.col(n) *= std::sqrt((1.0 - kappa) * power * xi(n));
  return w;
}

RVec rx_distortion_variance(const std::vector<CMat>& G_at_m, const std::vector<RVec>& xi, double kappa,
                            double power) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("rx_distortion_variance: kappa outside [0,1]");
  if (G_at_m.empty() || G_at_m.size() != xi.size())
    throw std::invalid_argument("rx_distortion_variance: need one power-control vector per channel");
  RVec var = RVec::Zero(G_at_m.front().rows());
  for (std::size_t k = 0; k < G_at_m.size(); ++k) var += G_at_m[k].cwiseAbs2() * xi[k];
  return (1.0 - kappa) * power * var;
}

CMat sample_rx_distortion(const RVec& variance, int n_symbols, RandomStream& rng) {
  CMat w = rng.cnormal(variance.size(), n_symbols);
  for (Eigen::Index i = 0; i < variance.size(); ++i) w.row(i) *= std::sqrt(std::max(0.0, variance(i)));
  return w;
}

CMat sample_rx_distortion(const ChannelRealization& ch, const Scenario& scn, int m, double power, int n_symbols,
                          RandomStream& rng) {
  std::vector<CMat> g(scn.K);
  for (int k = 0; k < scn.K; ++k) g[k] = ch.at(m, k);
  return sample_rx_distortion(rx_distortion_variance(g, scn.xi, scn.kappa_r(m), power), n_symbols, rng);
}

}  // namespace starcf
