// SPDX-License-Identifier: Apache-2.0
//
// Experiment geometry, large-scale fading, pilot assignment and power control.

#pragma once

#include <vector>

#include "starcf/config.hpp"
#include "starcf/linalg.hpp"
#include "starcf/rng.hpp"

namespace starcf {

enum class UserMode { kReflect = 0, kTransmit = 1 };

struct Position {
  double x = 0;
  double y = 0;
  double h = 0;
};

double distance(const Position& a, const Position& b);

/// One drawn setup. Immutable after generation; shared read-only by trial workers.
struct Scenario {
  SystemConfig cfg;  // copy of the config the setup was drawn from
  int M = 0;
  int K = 0;
  int N_ap = 0;
  int N_u = 0;
  int tau_p = 0;

  std::vector<Position> ap_pos;
  std::vector<Position> user_pos;
  Position ris_pos;

  RMat beta_mk;  // M x K direct gains (linear)
  RVec beta_m;   // AP-RIS gains
  RVec beta_k;   // user-RIS gains

  std::vector<UserMode> mode;
  std::vector<int> pilot_group;
  std::vector<RVec> xi;  // diagonal of P_k
  std::vector<CMat> pilot;  // Phi_k, tau_p x N_u

  RVec kappa_r;  // per AP
  RVec kappa_t;  // per user

  bool shares_pilot(int k, int kp) const { return pilot_group[k] == pilot_group[kp]; }
  std::vector<int> pilot_set(int k) const;
  CMat power_ctrl(int k) const { return xi[k].cast<cdouble>().asDiagonal(); }
  CMat power_ctrl_sqrt(int k) const { return xi[k].cwiseSqrt().cast<cdouble>().asDiagonal(); }
  double prelog() const { return double(cfg.tau_c - tau_p) / double(cfg.tau_c); }
};

/// Draws AP and user positions and shadowing from setup_rng. Users with index
/// below ceil(K/2) sit on the reflect side.
Scenario generate_scenario(const SystemConfig& cfg, RandomStream& setup_rng);

/// Round-robin pilot groups: k mod floor(tau_p / N_u).
std::vector<int> assign_pilots(const SystemConfig& cfg, int K);

/// Columns N_u*group .. N_u*(group+1)-1 of the tau_p-point unitary DFT matrix.
CMat build_pilot_matrix(int group, int tau_p, int N_u);

}  // namespace starcf
