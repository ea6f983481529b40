// SPDX-License-Identifier: Apache-2.0

#include "starcf/correlation.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace starcf {

CMat StarConfig::theta(UserMode mode) const {
  const RVec& a = mode == UserMode::kReflect ? amp_r : amp_t;
  const RVec& p = mode == UserMode::kReflect ? phase_r : phase_t;
  CVec d(a.size());
  for (Eigen::Index l = 0; l < a.size(); ++l) d(l) = std::polar(a(l), p(l));
  return d.asDiagonal();
}

void StarConfig::validate(double tol) const {
  if (amp_t.size() != amp_r.size() || phase_t.size() != amp_t.size() || phase_r.size() != amp_t.size())
    throw std::invalid_argument("StarConfig: inconsistent element counts");
  for (Eigen::Index l = 0; l < amp_t.size(); ++l) {
    if (amp_t(l) < 0 || amp_t(l) > 1 || amp_r(l) < 0 || amp_r(l) > 1)
      throw std::invalid_argument("StarConfig: amplitude outside [0,1]");
    if (std::abs(amp_t(l) * amp_t(l) + amp_r(l) * amp_r(l) - 1.0) > tol)
      throw std::invalid_argument("StarConfig: element energy not conserved");
  }
}

bool StarConfig::is_mode_switching() const {
  auto binary = [](double a) { return a == 0.0 || a == 1.0; };
  for (Eigen::Index l = 0; l < amp_t.size(); ++l)
    if (!binary(amp_t(l)) || !binary(amp_r(l))) return false;
  return true;
}

StarConfig make_star_config(const SystemConfig& cfg, RandomStream& rng) {
  const int L = cfg.L();
  StarConfig s;
  s.amp_t.resize(L);
  s.amp_r.resize(L);
  s.phase_t.resize(L);
  s.phase_r.resize(L);
  for (int l = 0; l < L; ++l) {
    const double pt = rng.uniform(0.0, 2.0 * M_PI);
    const double pr = rng.uniform(0.0, 2.0 * M_PI);
    s.phase_t(l) = cfg.star_phase == PhaseProfile::kRandom ? pt : 0.0;
    s.phase_r(l) = cfg.star_phase == PhaseProfile::kRandom ? pr : 0.0;
    if (cfg.ris_mode == RisMode::kCrisSplit) {
      const bool reflect = l < L / 2;
      s.amp_r(l) = reflect ? 1.0 : 0.0;
      s.amp_t(l) = reflect ? 0.0 : 1.0;
    } else {
      s.amp_t(l) = cfg.star_amp_t;
      s.amp_r(l) = std::sqrt(std::max(0.0, 1.0 - cfg.star_amp_t * cfg.star_amp_t));
    }
  }
  s.validate(1e-12);
  return s;
}

CMat ap_correlation(int N_ap, double r_ap) {
  if (N_ap < 1) throw std::invalid_argument("ap_correlation: N_ap must be >= 1");
  if (!(r_ap >= 0.0 && r_ap < 1.0)) throw std::invalid_argument("ap_correlation: r_ap must lie in [0,1)");
  CMat r(N_ap, N_ap);
  for (int i = 0; i < N_ap; ++i)
    for (int j = 0; j < N_ap; ++j) r(i, j) = std::pow(r_ap, std::abs(i - j));
  return r;
}

CMat user_correlation(int N_u, double spacing_m, double lambda) {
  if (N_u < 1) throw std::invalid_argument("user_correlation: N_u must be >= 1");
  if (!(spacing_m > 0) || !(lambda > 0)) throw std::invalid_argument("user_correlation: spacing must be positive");
  CMat r(N_u, N_u);
  for (int i = 0; i < N_u; ++i)
    for (int j = 0; j < N_u; ++j)
      r(i, j) = std::cyl_bessel_j(0.0, 2.0 * M_PI * spacing_m * std::abs(i - j) / lambda);
  return r;
}

namespace {
double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(M_PI * x) / (M_PI * x);
}
}  // namespace

CMat ris_correlation(int L_h, int L_v, double d_h_m, double d_v_m, double lambda) {
  if (L_h < 1 || L_v < 1) throw std::invalid_argument("ris_correlation: grid dimensions must be >= 1");
  if (!(d_h_m > 0) || !(d_v_m > 0) || !(lambda > 0))
    throw std::invalid_argument("ris_correlation: spacings must be positive");
  const int L = L_h * L_v;
  CMat r(L, L);
  for (int x = 0; x < L; ++x)
    for (int y = 0; y < L; ++y) {
      const double dh = double(x % L_h - y % L_h) * d_h_m;
      const double dv = double(x / L_h - y / L_h) * d_v_m;
      r(x, y) = sinc(2.0 * std::sqrt(dh * dh + dv * dv) / lambda);
    }
  return r;
}

CMat t_matrix(const CMat& R_ris, double element_area, const CMat& theta) {
  if (theta.rows() != theta.cols() || theta.rows() != R_ris.rows())
    throw std::invalid_argument("t_matrix: dimension mismatch");
  const CMat off = theta - CMat(theta.diagonal().asDiagonal());
  if (off.norm() > 0.0) throw std::invalid_argument("t_matrix: Theta must be diagonal");
  const CMat root = psd_sqrt(R_ris);
  CMat t = element_area * element_area * root * theta * R_ris * theta.adjoint() * root;
  return hermitian_part(t);
}

JointCovariance joint_covariance(double beta_mk, double beta_m, double beta_k, const CMat& T_mode,
                                 const CMat& R_user, const CMat& R_ap) {
  const double tr = T_mode.trace().real();
  const double db = beta_mk + beta_m * beta_k * tr;
  if (!(db >= 0.0)) throw std::invalid_argument("joint_covariance: negative or invalid Delta_bar");
  return {db, R_user, R_ap};
}

CorrelationSet build_correlation(const Scenario& scn, const StarConfig& star) {
  const SystemConfig& cfg = scn.cfg;
  CorrelationSet c;
  c.M = scn.M;
  c.K = scn.K;
  c.N_ap = scn.N_ap;
  c.N_u = scn.N_u;
  c.L = cfg.L();
  if (star.size() != c.L) throw std::invalid_argument("build_correlation: StarConfig size differs from L");

  auto root = [&c](const CMat& r) {
    auto f = psd_factor(r);
    c.n_clipped += f.n_clipped;
    return f.root;
  };

  const CMat r_ap = ap_correlation(c.N_ap, cfg.r_ap);
  const CMat r_ap_sqrt = root(r_ap);
  c.R_ap.assign(c.M, r_ap);
  c.R_ap_sqrt.assign(c.M, r_ap_sqrt);
  const CMat r_u = user_correlation(c.N_u, cfg.d_user * cfg.lambda, cfg.lambda);
  const CMat r_u_sqrt = root(r_u);
  c.R_user.assign(c.K, r_u);
  c.R_user_sqrt.assign(c.K, r_u_sqrt);

  c.R_ris = ris_correlation(cfg.L_h, cfg.L_v, cfg.d_h * cfg.lambda, cfg.d_v * cfg.lambda, cfg.lambda);
  c.element_area = (cfg.d_h * cfg.lambda) * (cfg.d_v * cfg.lambda);
  auto rf = psd_factor(c.R_ris);
  c.n_clipped += rf.n_clipped;
  if (rf.n_clipped > 0)
    std::cerr << "warning: clipped " << rf.n_clipped << " negative eigenvalue(s) of the surface correlation\n";
  c.ris_sqrt_scaled = std::sqrt(c.element_area) * rf.root;

  const bool active = cfg.ris_mode != RisMode::kNone;
  for (UserMode md : {UserMode::kReflect, UserMode::kTransmit}) {
    const int i = static_cast<int>(md);
    c.theta[i] = active ? star.theta(md) : CMat::Zero(c.L, c.L);
    c.T[i] = t_matrix(rf.clipped, c.element_area, c.theta[i]);
    c.trT[i] = c.T[i].trace().real();
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) c.trTT[a][b] = trace_of_product(c.T[a], c.T[b]).real();

  c.mode = scn.mode;
  c.delta_bar.resize(c.M, c.K);
  for (int m = 0; m < c.M; ++m)
    for (int k = 0; k < c.K; ++k)
      c.delta_bar(m, k) =
          joint_covariance(scn.beta_mk(m, k), scn.beta_m(m), scn.beta_k(k), c.T_of(k), c.R_user[k], c.R_ap[m])
              .delta_bar;
  return c;
}

}  // namespace starcf
