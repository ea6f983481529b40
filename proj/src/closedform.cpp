// SPDX-License-Identifier: Apache-2.0

#include "starcf/closedform.hpp"

#include <stdexcept>

namespace starcf {

// Per-AP operands for one (k, k') pair, indexed by [x * N_u + n]. The
// quadratic forms are g_a^H X g_b with X = (P_j^{1/2} kron I) Omega for the
// pilot part and X = (E_ab kron I) Omega for the transmit-distortion part.
struct ClosedForm::Side {
  int m = 0;
  bool full = false;
  std::vector<CMat> omega;
  std::vector<cdouble> d1;               // tr(X_det(k') Delta_mk')
  std::vector<std::vector<CMat>> d3;     // [j in P_k] ptr_ap(K_j^H X_det(j) K_k')
  std::vector<CMat> d4;                  // contraction operand of X_det(k')
  std::vector<std::vector<CMat>> xdet;   // [j in P_k] X_det(j)
  std::vector<std::vector<cdouble>> e1;  // [ab] tr(X_ab Delta_mk')
  std::vector<std::vector<CMat>> e3;     // [j*N_u^2 + ab] ptr_ap(K_j^H X_ab K_k')
  std::vector<std::vector<CMat>> e4;     // [ab]
  std::vector<std::vector<CMat>> xab;    // [ab]
};

ClosedForm::ClosedForm(const Scenario& scn, const CorrelationSet& corr, const EstimationStatistics& stats,
                       ClosedFormOptions opt)
    : scn_(scn), corr_(corr), stats_(stats), opt_(opt) {
  whiten_.resize(static_cast<std::size_t>(scn.M * scn.K));
  delta_.resize(static_cast<std::size_t>(scn.M * scn.K));
  for (int m = 0; m < scn.M; ++m)
    for (int j = 0; j < scn.K; ++j) {
      whiten_[m * scn.K + j] = kron(corr.R_user_sqrt[j], corr.R_ap_sqrt[m]);
      delta_[m * scn.K + j] = corr.delta(m, j);
    }
}

CMat ClosedForm::omega(int m, int k, int x, int n) const {
  const int na = scn_.N_ap, nt = scn_.N_ap * scn_.N_u;
  const CMat& Z = stats_.Z[stats_.idx(m, k)];
  CMat o = CMat::Zero(nt, nt);
  o.middleCols(n * na, na) = Z.middleRows(x * na, na).adjoint();
  return o;
}

ClosedForm::Side ClosedForm::side(int m, int k, int kp) const {
  const int K = scn_.K, Nu = scn_.N_u, na = scn_.N_ap, nt = na * Nu;
  const KronIndex ix{na, Nu};
  const std::vector<int> pset = scn_.pilot_set(k);
  const CMat& Kk = whiten_[m * K + kp];
  const CMat& Dk = delta_[m * K + kp];
  const CMat eye_ap = CMat::Identity(na, na);

  auto contract_operand = [&](const CMat& x) -> CMat {
    const CMat w = Kk.adjoint() * x * Kk;
    if (opt_.contraction == CumulantContraction::kPartialTrace) return partial_trace_outer(w, ix);
    return w;
  };

  Side s;
  s.m = m;
  s.full = true;
  const int n_slot = Nu * Nu;
  s.omega.resize(n_slot);
  s.d1.resize(n_slot);
  s.d3.resize(n_slot);
  s.d4.resize(n_slot);
  s.xdet.resize(n_slot);
  s.e1.resize(n_slot);
  s.e3.resize(n_slot);
  s.e4.resize(n_slot);
  s.xab.resize(n_slot);

  for (int x = 0; x < Nu; ++x)
    for (int n = 0; n < Nu; ++n) {
      const int i = x * Nu + n;
      const CMat om = omega(m, k, x, n);
      s.omega[i] = om;
      for (int j : pset) {
        const CMat xd = kron(scn_.power_ctrl_sqrt(j), eye_ap) * om;
        s.xdet[i].push_back(xd);
        s.d3[i].push_back(partial_trace_inner(CMat(whiten_[m * K + j].adjoint() * xd * Kk), ix));
        if (j == kp) {
          s.d1[i] = trace_of_product(xd, Dk);
          s.d4[i] = contract_operand(xd);
        }
      }
      s.e1[i].resize(n_slot);
      s.e4[i].resize(n_slot);
      s.xab[i].resize(n_slot);
      s.e3[i].resize(static_cast<std::size_t>(K * n_slot));
      for (int a = 0; a < Nu; ++a)
        for (int b = 0; b < Nu; ++b) {
          const int ab = a * Nu + b;
          CMat xe = CMat::Zero(nt, nt);
          xe.middleRows(a * na, na) = om.middleRows(b * na, na);
          s.e1[i][ab] = trace_of_product(xe, Dk);
          s.e4[i][ab] = contract_operand(xe);
          for (int j = 0; j < K; ++j)
            s.e3[i][j * n_slot + ab] = partial_trace_inner(CMat(whiten_[m * K + j].adjoint() * xe * Kk), ix);
          s.xab[i][ab] = std::move(xe);
        }
    }
  return s;
}

std::array<CMat, 6> ClosedForm::combine(const Side& l, const Side& r, int k, int kp) const {
  const int K = scn_.K, Nu = scn_.N_u;
  const int m = l.m, mp = r.m;
  const bool same = m == mp;
  const std::vector<int> pset = scn_.pilot_set(k);
  const bool shares = scn_.shares_pilot(k, kp);
  const RVec& xi_kp = scn_.xi[kp];
  const double p_p = scn_.cfg.p_p;
  const double kk = scn_.kappa_r(m) * scn_.kappa_r(mp);
  const double bm = scn_.beta_m(m), bmp = scn_.beta_m(mp);
  const double bkp = scn_.beta_k(kp);
  const int n_slot = Nu * Nu;

  std::array<CMat, 6> g;
  for (auto& x : g) x = CMat::Zero(Nu, Nu);

  for (int x = 0; x < Nu; ++x)
    for (int y = 0; y < Nu; ++y)
      for (int n = 0; n < Nu; ++n) {
        const int il = x * Nu + n, ir = y * Nu + n;
        const double w = xi_kp(n) * kk;
        // pilot-sharing users
        for (std::size_t jj = 0; jj < pset.size(); ++jj) {
          const int j = pset[jj];
          const double c2 = scn_.tau_p * p_p * scn_.kappa_t(j);
          const double cum3 = bm * bmp * scn_.beta_k(j) * bkp * corr_.trTT_of(j, kp);
          cdouble v = cum3 * trace_of_product(l.d3[il][jj], CMat(r.d3[ir][jj].adjoint()));
          if (same)
            v += trace_of_product(CMat(l.xdet[il][jj] * delta_[m * K + kp]),
                                  CMat(r.xdet[ir][jj].adjoint() * delta_[m * K + j]));
          g[kPilotShare](x, y) += w * c2 * v;
        }
        if (shares) {
          const double c2 = scn_.tau_p * p_p * scn_.kappa_t(kp);
          cdouble v = l.d1[il] * std::conj(r.d1[ir]);
          if (same)
            v += bm * bm * bkp * bkp * corr_.trTT_of(kp, kp) *
                 trace_of_product(l.d4[il], CMat(r.d4[ir].adjoint()));
          g[kCoherent](x, y) += w * c2 * v;
        }
        // transmit distortion
        for (int j = 0; j < K; ++j) {
          const double s = (1.0 - scn_.kappa_t(j)) * p_p;
          if (s == 0.0) continue;
          const double cum3 = bm * bmp * scn_.beta_k(j) * bkp * corr_.trTT_of(j, kp);
          cdouble spread = 0.0, coherent = 0.0;
          for (int a = 0; a < Nu; ++a)
            for (int b = 0; b < Nu; ++b) {
              const int ab = a * Nu + b;
              const double wa = s * scn_.xi[j](a);
              cdouble v = cum3 * trace_of_product(l.e3[il][j * n_slot + ab], CMat(r.e3[ir][j * n_slot + ab].adjoint()));
              if (same)
                v += trace_of_product(CMat(l.xab[il][ab] * delta_[m * K + kp]),
                                      CMat(r.xab[ir][ab].adjoint() * delta_[m * K + j]));
              spread += wa * v;
              if (j == kp) {
                cdouble c = l.e1[il][ab] * std::conj(r.e1[ir][ab]);
                if (same)
                  c += bm * bm * bkp * bkp * corr_.trTT_of(kp, kp) *
                       trace_of_product(l.e4[il][ab], CMat(r.e4[ir][ab].adjoint()));
                coherent += wa * c;
              }
            }
          g[kTxSpread](x, y) += w * spread;
          g[kTxCoherent](x, y) += w * coherent;
        }
        if (same) {
          const double kr = scn_.kappa_r(m);
          const int nt = scn_.N_ap * Nu;
          const CMat core = l.omega[il] * delta_[m * K + kp] * r.omega[ir].adjoint();
          const CMat c_rx = kron(CMat(CMat::Identity(Nu, Nu)), stats_.C_pilot[m]);
          g[kRxDistortion](x, y) += xi_kp(n) * kr * trace_of_product(core, c_rx);
          g[kNoise](x, y) += xi_kp(n) * kr * scn_.cfg.sigma2 * core.trace();
          (void)nt;
        }
      }
  return g;
}

std::array<CMat, 6> ClosedForm::u_groups(int m, int mp, int k, int kp) const {
  const Side l = side(m, k, kp);
  if (m == mp) return combine(l, l, k, kp);
  return combine(l, side(mp, k, kp), k, kp);
}

CMat ClosedForm::rx_correction(int m, int k, int kp) const {
  const int K = scn_.K, Nu = scn_.N_u, na = scn_.N_ap;
  const KronIndex ix{na, Nu};
  CMat out = CMat::Zero(Nu, Nu);
  const double kr = scn_.kappa_r(m);
  const double sr = (1.0 - kr) * scn_.cfg.p_p;
  if (sr == 0.0) return out;
  const CMat& Kk = whiten_[m * K + kp];
  const CMat& Dk = delta_[m * K + kp];
  const double bm = scn_.beta_m(m), bkp = scn_.beta_k(kp);
  const CMat eye_u = CMat::Identity(Nu, Nu);
  for (int p = 0; p < na; ++p) {
    CMat epp = CMat::Zero(na, na);
    epp(p, p) = 1.0;
    const CMat sel = kron(eye_u, epp);
    // ptr_user(K_j^H D_jp K_j) for every user j
    std::vector<CMat> dj(K);
    for (int j = 0; j < K; ++j) {
      const CMat& Kj = whiten_[m * K + j];
      dj[j] = partial_trace_outer(CMat(Kj.adjoint() * kron(scn_.power_ctrl(j), epp) * Kj), ix);
    }
    const CMat dkp_full = kron(scn_.power_ctrl(kp), epp);
    const CMat dkp_ap = partial_trace_inner(CMat(Kk.adjoint() * dkp_full * Kk), ix);
    for (int x = 0; x < Nu; ++x)
      for (int y = 0; y < Nu; ++y)
        for (int n = 0; n < Nu; ++n) {
          const CMat wp = omega(m, k, y, n).adjoint() * sel * omega(m, k, x, n);
          const CMat wk = Kk.adjoint() * wp * Kk;
          cdouble v = trace_of_product(CMat(dkp_full * Dk), CMat(wp * Dk));
          v += bm * bm * bkp * bkp * corr_.trTT_of(kp, kp) *
               trace_of_product(dkp_ap, partial_trace_inner(wk, ix));
          const CMat wk_u = partial_trace_outer(wk, ix);
          for (int j = 0; j < K; ++j)
            v += bm * bm * scn_.beta_k(j) * bkp * corr_.trTT_of(j, kp) * trace_of_product(dj[j], wk_u);
          out(x, y) += kr * sr * scn_.xi[kp](n) * v;
        }
  }
  return out;
}

CMat ClosedForm::u_block(int m, int mp, int k, int kp) const {
  const auto g = u_groups(m, mp, k, kp);
  CMat out = g[0] + g[1] + g[2] + g[3] + g[4] + g[5];
  if (m == mp && opt_.conditional_rx) out += rx_correction(m, k, kp);
  return out;
}

CMat ClosedForm::u(int k, int kp) const {
  const int M = scn_.M, Nu = scn_.N_u;
  std::vector<Side> sides;
  sides.reserve(M);
  for (int m = 0; m < M; ++m) sides.push_back(side(m, k, kp));
  CMat out(M * Nu, M * Nu);
  for (int m = 0; m < M; ++m)
    for (int mp = m; mp < M; ++mp) {
      const auto g = combine(sides[m], sides[mp], k, kp);
      CMat b = g[0] + g[1] + g[2] + g[3] + g[4] + g[5];
      if (m == mp && opt_.conditional_rx) b += rx_correction(m, k, kp);
      out.block(m * Nu, mp * Nu, Nu, Nu) = b;
      if (mp != m) out.block(mp * Nu, m * Nu, Nu, Nu) = b.adjoint();
    }
  return hermitian_part(out);
}

CMat ClosedForm::h_bar(int k) const {
  const int M = scn_.M, Nu = scn_.N_u;
  const KronIndex ix = stats_.kron_index();
  CMat h(M * Nu, Nu);
  for (int m = 0; m < M; ++m) {
    const CMat& dh = stats_.Delta_hat[stats_.idx(m, k)];
    const double c = std::sqrt(scn_.kappa_r(m) * scn_.kappa_t(k)) * opt_.delta_hat_scale;
    for (int x = 0; x < Nu; ++x)
      for (int y = 0; y < Nu; ++y) h(m * Nu + x, y) = c * ix.block(dh, y, x).trace();
  }
  return h;
}

CMat ClosedForm::gamma_bar(int k) const {
  const int M = scn_.M, Nu = scn_.N_u;
  const KronIndex ix = stats_.kron_index();
  CMat g = CMat::Zero(M * Nu, M * Nu);
  for (int m = 0; m < M; ++m) {
    const CMat& dh = stats_.Delta_hat[stats_.idx(m, k)];
    for (int x = 0; x < Nu; ++x)
      for (int y = 0; y < Nu; ++y)
        g(m * Nu + x, m * Nu + y) =
            opt_.delta_hat_scale * trace_of_product(stats_.C_bar[m], CMat(ix.block(dh, y, x)));
  }
  return g;
}

CMat ClosedForm::lambda_bar(int k) const {
  const int M = scn_.M, Nu = scn_.N_u;
  const KronIndex ix = stats_.kron_index();
  CMat g = CMat::Zero(M * Nu, M * Nu);
  for (int m = 0; m < M; ++m) {
    const CMat& dh = stats_.Delta_hat[stats_.idx(m, k)];
    for (int x = 0; x < Nu; ++x)
      for (int y = 0; y < Nu; ++y) g(m * Nu + x, m * Nu + y) = opt_.delta_hat_scale * ix.block(dh, y, x).trace();
  }
  return g;
}

Level1Moments ClosedForm::moments() const {
  Level1Moments mom = Level1Moments::zeros(scn_.M, scn_.K, scn_.N_u);
  for (int k = 0; k < scn_.K; ++k) {
    mom.H[k] = h_bar(k);
    mom.Gamma[k] = gamma_bar(k);
    mom.Lambda[k] = lambda_bar(k);
    for (int kp = 0; kp < scn_.K; ++kp) mom.u(k, kp) = u(k, kp);
  }
  return mom;
}

CMat closed_h_bar(const Scenario& scn, const CorrelationSet& corr, const EstimationStatistics& stats, int k) {
  return ClosedForm(scn, corr, stats).h_bar(k);
}

CMat closed_u_diag(const Scenario& scn, const CorrelationSet& corr, const EstimationStatistics& stats, int m,
                   int k, int kp, ClosedFormOptions opt) {
  return ClosedForm(scn, corr, stats, opt).u_block(m, m, k, kp);
}

CMat closed_u_cross(const Scenario& scn, const CorrelationSet& corr, const EstimationStatistics& stats, int m,
                    int mp, int k, int kp, ClosedFormOptions opt) {
  if (m == mp) throw std::invalid_argument("closed_u_cross: needs two different APs");
  return ClosedForm(scn, corr, stats, opt).u_block(m, mp, k, kp);
}

CMat closed_gamma_bar(const Scenario& scn, const CorrelationSet& corr, const EstimationStatistics& stats, int k) {
  return ClosedForm(scn, corr, stats).gamma_bar(k);
}

CMat closed_lambda_bar(const CMat& h_bar, const Scenario& scn, int k) {
  const int M = scn.M, Nu = scn.N_u;
  CMat g = CMat::Zero(M * Nu, M * Nu);
  for (int m = 0; m < M; ++m)
    g.block(m * Nu, m * Nu, Nu, Nu) =
        h_bar.middleRows(m * Nu, Nu) / std::sqrt(scn.kappa_r(m) * scn.kappa_t(k));
  return g;
}

ClosedFormSe se_level1_closed(const Scenario& scn, const CorrelationSet& corr, const EstimationStatistics& stats,
                              Decoder decoder, ClosedFormOptions opt) {
  ClosedFormSe out;
  out.moments = ClosedForm(scn, corr, stats, opt).moments();
  if (decoder == Decoder::kLSFD)
    out.A = lsfd_from_moments(out.moments, scn);
  else if (decoder == Decoder::kMF)
    out.A = mf_from_moments(out.moments);
  else
    throw std::invalid_argument("se_level1_closed: Level 1 needs LSFD or MF decoding");
  out.result = se_level1(out.moments, out.A, scn);
  return out;
}

}  // namespace starcf
