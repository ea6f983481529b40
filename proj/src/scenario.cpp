// SPDX-License-Identifier: Apache-2.0

#include "starcf/scenario.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace starcf {

double distance(const Position& a, const Position& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.h - b.h) * (a.h - b.h));
}

std::vector<int> Scenario::pilot_set(int k) const {
  std::vector<int> out;
  for (int kp = 0; kp < K; ++kp)
    if (pilot_group[kp] == pilot_group[k]) out.push_back(kp);
  return out;
}

std::vector<int> assign_pilots(const SystemConfig& cfg, int K) {
  const int tau_p = cfg.effective_tau_p();
  if (tau_p < cfg.N_u) throw std::invalid_argument("assign_pilots: tau_p < N_u leaves no pilot matrix");
  if (K < 1) throw std::invalid_argument("assign_pilots: K must be >= 1");
  const int groups = tau_p / cfg.N_u;
  std::vector<int> out(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) out[k] = k % groups;
  return out;
}

CMat build_pilot_matrix(int group, int tau_p, int N_u) {
  if (group < 0 || N_u < 1 || N_u * (group + 1) > tau_p)
    throw std::invalid_argument("build_pilot_matrix: group out of range");
  CMat phi(tau_p, N_u);
  const double scale = 1.0 / std::sqrt(double(tau_p));
  for (int t = 0; t < tau_p; ++t)
    for (int c = 0; c < N_u; ++c) {
      const int col = N_u * group + c;
      // reduce the product mod tau_p so large indices keep full phase accuracy
      const double ang = -2.0 * M_PI * double((static_cast<long>(t) * col) % tau_p) / double(tau_p);
      phi(t, c) = std::polar(scale, ang);
    }
  return phi;
}

namespace {

double link_gain(const PathLossModel& pl, double d, RandomStream& rng) {
  // shadowing is drawn for every link so the stream layout does not depend on distance
  const double z = rng.normal();
  double db = pl.path_loss_db(d);
  if (d > pl.d1) db += pl.shadow_sigma_db * z;
  return db_to_linear(db);
}

}  // namespace

Scenario generate_scenario(const SystemConfig& cfg, RandomStream& rng) {
  if (cfg.M < 1 || cfg.K < 1) throw std::invalid_argument("generate_scenario: M and K must be >= 1");
  cfg.validate();
  Scenario s;
  s.cfg = cfg;
  s.M = cfg.M;
  s.K = cfg.K;
  s.N_ap = cfg.N_ap;
  s.N_u = cfg.N_u;
  s.tau_p = cfg.effective_tau_p();
  s.ris_pos = {cfg.ris_x, cfg.ris_y, cfg.h_ris};

  s.ap_pos.resize(cfg.M);
  for (auto& p : s.ap_pos) {
    p.x = rng.uniform(-100.0, 100.0);
    p.y = rng.uniform(-100.0, 100.0);
    p.h = cfg.h_ap;
  }

  const int K_r = (cfg.K + 1) / 2;
  s.user_pos.resize(cfg.K);
  s.mode.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    auto& p = s.user_pos[k];
    p.x = rng.uniform(cfg.ris_x - 100.0, cfg.ris_x + 100.0);
    const double off = rng.uniform(0.0, 100.0);
    if (k < K_r) {
      p.y = cfg.ris_y - 100.0 + off;  // [ris_y-100, ris_y)
      s.mode[k] = UserMode::kReflect;
    } else {
      p.y = cfg.ris_y + 100.0 - off;  // (ris_y, ris_y+100]
      s.mode[k] = UserMode::kTransmit;
    }
    p.h = cfg.h_user;
  }

  PathLossModel ris_pl = cfg.pathloss;
  ris_pl.const_db = cfg.ris_pl_const_db;

  s.beta_mk = RMat::Zero(cfg.M, cfg.K);
  for (int m = 0; m < cfg.M; ++m)
    for (int k = 0; k < cfg.K; ++k) {
      const double g = link_gain(cfg.pathloss, distance(s.ap_pos[m], s.user_pos[k]), rng);
      s.beta_mk(m, k) = cfg.direct_blocked ? 0.0 : g;
    }
  s.beta_m.resize(cfg.M);
  for (int m = 0; m < cfg.M; ++m) s.beta_m(m) = link_gain(ris_pl, distance(s.ap_pos[m], s.ris_pos), rng);
  s.beta_k.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) s.beta_k(k) = link_gain(ris_pl, distance(s.user_pos[k], s.ris_pos), rng);

  s.xi.assign(cfg.K, RVec::Constant(cfg.N_u, 1.0 / cfg.N_u));
  s.pilot_group = assign_pilots(cfg, cfg.K);
  s.pilot.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) s.pilot[k] = build_pilot_matrix(s.pilot_group[k], s.tau_p, cfg.N_u);

  s.kappa_r.resize(cfg.M);
  for (int m = 0; m < cfg.M; ++m) s.kappa_r(m) = cfg.kappa_r(m);
  s.kappa_t.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) s.kappa_t(k) = cfg.kappa_t(k);
  return s;
}

}  // namespace starcf
