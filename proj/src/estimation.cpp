// SPDX-License-Identifier: Apache-2.0

#include "starcf/estimation.hpp"

#include <stdexcept>

namespace starcf {

namespace {

CMat block_diag(const std::vector<CMat>& blocks) {
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  CMat out = CMat::Zero(n, n);
  Eigen::Index o = 0;
  for (const auto& b : blocks) {
    out.block(o, o, b.rows(), b.cols()) = b;
    o += b.rows();
  }
  return out;
}

double trace_pr(const Scenario& scn, const CorrelationSet& corr, int k) {
  return (scn.xi[k].asDiagonal() * corr.R_user[k].real()).trace();
}

}  // namespace

CMat EstimationStatistics::collective_c_tilde(int k, const RVec& kappa_r) const {
  std::vector<CMat> b(M);
  for (int m = 0; m < M; ++m) b[m] = kappa_r(m) * C_tilde[idx(m, k)];
  return block_diag(b);
}

CMat EstimationStatistics::collective_c_r() const { return block_diag(C_bar); }

CMat statistical_rx_distortion(const Scenario& scn, const CorrelationSet& corr, int m, double power) {
  double load = 0.0;
  for (int k = 0; k < scn.K; ++k) load += corr.delta_bar(m, k) * trace_pr(scn, corr, k);
  CMat c = CMat::Zero(scn.N_ap, scn.N_ap);
  c.diagonal() = (1.0 - scn.kappa_r(m)) * power * load * corr.R_ap[m].diagonal();
  return c;
}

CMat q_matrix(const Scenario& scn, const CorrelationSet& corr, int m, int k) {
  const double p_p = scn.cfg.p_p;
  const double c = std::sqrt(scn.tau_p * p_p * scn.kappa_r(m) * scn.kappa_t(k));
  return c * corr.delta_bar(m, k) * kron(CMat(corr.R_user[k] * scn.power_ctrl_sqrt(k)), corr.R_ap[m]);
}

PsiTerms psi_terms(const Scenario& scn, const CorrelationSet& corr, int m, int k) {
  const double p_p = scn.cfg.p_p;
  const int n = scn.N_ap * scn.N_u;
  const double kr = scn.kappa_r(m);
  const CMat eye_u = CMat::Identity(scn.N_u, scn.N_u);
  PsiTerms t;
  t.V1 = CMat::Zero(n, n);
  for (int kp : scn.pilot_set(k)) {
    const CMat ps = scn.power_ctrl_sqrt(kp);
    t.V1 += kr * scn.tau_p * p_p * scn.kappa_t(kp) * corr.delta_bar(m, kp) *
            kron(CMat(ps * corr.R_user[kp] * ps), corr.R_ap[m]);
  }
  double dist = 0.0;
  for (int kp = 0; kp < scn.K; ++kp)
    dist += (1.0 - scn.kappa_t(kp)) * p_p * corr.delta_bar(m, kp) * trace_pr(scn, corr, kp);
  t.V2 = kr * dist * kron(eye_u, corr.R_ap[m]);
  t.V3 = kron(eye_u, statistical_rx_distortion(scn, corr, m, p_p));
  t.V4 = scn.cfg.sigma2 * CMat::Identity(n, n);
  return t;
}

EstimationStatistics build_statistics(const Scenario& scn, const CorrelationSet& corr) {
  EstimationStatistics s;
  s.M = scn.M;
  s.K = scn.K;
  s.N_ap = scn.N_ap;
  s.N_u = scn.N_u;
  const std::size_t n_pairs = static_cast<std::size_t>(scn.M * scn.K);
  s.Q.resize(n_pairs);
  s.Psi.resize(n_pairs);
  s.Z.resize(n_pairs);
  s.Delta_hat.resize(n_pairs);
  s.C_tilde.resize(n_pairs);
  const KronIndex ix = s.kron_index();
  for (int m = 0; m < scn.M; ++m) {
    s.C_pilot.push_back(statistical_rx_distortion(scn, corr, m, scn.cfg.p_p));
    s.C_bar.push_back(statistical_rx_distortion(scn, corr, m, scn.cfg.p_u));
    for (int k = 0; k < scn.K; ++k) {
      const std::size_t i = s.idx(m, k);
      s.Q[i] = q_matrix(scn, corr, m, k);
      s.Psi[i] = hermitian_part(psi_terms(scn, corr, m, k).sum());
      auto llt = hpd_factor(s.Psi[i], "observation covariance");
      s.Z[i] = llt.solve(CMat(s.Q[i].adjoint())).adjoint();
      s.Delta_hat[i] = hermitian_part(CMat(s.Q[i] * s.Z[i].adjoint()));
      CMat ct = CMat::Zero(scn.N_ap, scn.N_ap);
      const CMat delta = corr.delta(m, k);
      for (int n = 0; n < scn.N_u; ++n)
        ct += scn.xi[k](n) * (ix.block(delta, n, n) - ix.block(s.Delta_hat[i], n, n));
      s.C_tilde[i] = hermitian_part(ct);
    }
  }
  return s;
}

std::vector<CMat> pilot_observation(const ChannelRealization& ch, const Scenario& scn, RandomStream& rng) {
  const double p_p = scn.cfg.p_p;
  std::vector<CMat> tx_sum(scn.K);  // sqrt(tau_p p_p kappa_t) P^{1/2} Phi^H + W^H, N_u x tau_p
  for (int k = 0; k < scn.K; ++k) {
    const CMat w = sample_tx_distortion(scn.xi[k], scn.kappa_t(k), p_p, scn.tau_p, rng);
    tx_sum[k] = std::sqrt(scn.tau_p * p_p * scn.kappa_t(k)) * scn.power_ctrl_sqrt(k) * scn.pilot[k].adjoint() +
                w.adjoint();
  }
  std::vector<CMat> Y(scn.M);
  std::vector<CMat> g(scn.K);
  for (int m = 0; m < scn.M; ++m) {
    CMat y = CMat::Zero(scn.N_ap, scn.tau_p);
    for (int k = 0; k < scn.K; ++k) {
      g[k] = ch.at(m, k);
      y += g[k] * tx_sum[k];
    }
    y *= std::sqrt(scn.kappa_r(m));
    y += sample_rx_distortion(rx_distortion_variance(g, scn.xi, scn.kappa_r(m), p_p), scn.tau_p, rng);
    y += std::sqrt(scn.cfg.sigma2) * rng.cnormal(scn.N_ap, scn.tau_p);
    Y[m] = std::move(y);
  }
  return Y;
}

CVec project_pilot(const CMat& Y, const CMat& phi) {
  if (Y.cols() != phi.rows()) throw std::invalid_argument("project_pilot: shape mismatch");
  return vec(CMat(Y * phi));
}

CMat ChannelEstimate::collective(int k, const RVec& kappa_r) const {
  const CMat& g0 = at(0, k);
  CMat out(M * g0.rows(), g0.cols());
  for (int m = 0; m < M; ++m) out.middleRows(m * g0.rows(), g0.rows()) = std::sqrt(kappa_r(m)) * at(m, k);
  return out;
}

CMat ChannelEstimate::stacked(int k) const {
  const CMat& g0 = at(0, k);
  CMat out(M * g0.rows(), g0.cols());
  for (int m = 0; m < M; ++m) out.middleRows(m * g0.rows(), g0.rows()) = at(m, k);
  return out;
}

ChannelEstimate estimate_channels(const EstimationStatistics& stats, const std::vector<CMat>& Y,
                                  const Scenario& scn) {
  if (static_cast<int>(Y.size()) != scn.M) throw std::invalid_argument("estimate_channels: need one Y per AP");
  ChannelEstimate e;
  e.M = scn.M;
  e.K = scn.K;
  e.G_hat.resize(static_cast<std::size_t>(scn.M * scn.K));
  for (int m = 0; m < scn.M; ++m) {
    // users in one pilot group share the projection
    std::vector<CVec> proj(scn.K);
    for (int k = 0; k < scn.K; ++k) {
      int rep = k;
      for (int kp = 0; kp < k; ++kp)
        if (scn.shares_pilot(k, kp)) {
          rep = kp;
          break;
        }
      proj[k] = rep == k ? project_pilot(Y[m], scn.pilot[k]) : proj[rep];
      e.G_hat[stats.idx(m, k)] = unvec(CVec(stats.Z[stats.idx(m, k)] * proj[k]), scn.N_ap, scn.N_u);
    }
  }
  return e;
}

}  // namespace starcf
