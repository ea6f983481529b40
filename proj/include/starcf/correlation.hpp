// SPDX-License-Identifier: Apache-2.0
//
// Spatial correlation, STAR-RIS coefficients, T-matrices and the factored
// joint covariances of the aggregate channels.

#pragma once

#include <array>
#include <vector>

#include "starcf/config.hpp"
#include "starcf/linalg.hpp"
#include "starcf/rng.hpp"
#include "starcf/scenario.hpp"

namespace starcf {

/// Per-element energy-splitting amplitudes and phases.
struct StarConfig {
  RVec amp_t, amp_r;
  RVec phase_t, phase_r;

  int size() const { return static_cast<int>(amp_t.size()); }
  /// Diagonal coefficient matrix for the given side.
  CMat theta(UserMode mode) const;
  /// Throws unless (u_t)^2 + (u_r)^2 = 1 per element and all amplitudes lie in [0,1].
  void validate(double tol = 1e-12) const;
  /// True when every amplitude is 0 or 1 (mode switching).
  bool is_mode_switching() const;
};

/// Builds the surface for the configured mode. Phases come from rng when the
/// phase profile is random; the stream is consumed either way.
StarConfig make_star_config(const SystemConfig& cfg, RandomStream& rng);

/// r^{|i-j|}.
CMat ap_correlation(int N_ap, double r_ap);
/// J0(2 pi d |n-m| / lambda), spacing d in metres.
CMat user_correlation(int N_u, double spacing_m, double lambda);
/// sinc(2 ||u_x - u_y|| / lambda) over an L_h x L_v grid, spacings in metres.
CMat ris_correlation(int L_h, int L_v, double d_h_m, double d_v_m, double lambda);
/// A^2 R^{1/2} Theta R Theta^H R^{1/2}. Theta must be diagonal.
CMat t_matrix(const CMat& R_ris, double element_area, const CMat& theta);

/// Delta = delta_bar * (R_user kron R_ap), kept factored.
struct JointCovariance {
  double delta_bar = 0;
  CMat R_user;
  CMat R_ap;
  CMat expand() const { return delta_bar * kron(R_user, R_ap); }
};

JointCovariance joint_covariance(double beta_mk, double beta_m, double beta_k, const CMat& T_mode,
                                 const CMat& R_user, const CMat& R_ap);

/// Every second-order quantity of one setup.
struct CorrelationSet {
  int M = 0, K = 0, N_ap = 0, N_u = 0, L = 0;
  std::vector<CMat> R_ap, R_ap_sqrt;      // per AP
  std::vector<CMat> R_user, R_user_sqrt;  // per user
  CMat R_ris;
  double element_area = 0;
  CMat ris_sqrt_scaled;  // (A R)^{1/2}
  int n_clipped = 0;     // negative eigenvalues zeroed while taking roots

  std::array<CMat, 2> theta;  // indexed by UserMode
  std::array<CMat, 2> T;
  std::array<double, 2> trT{};
  std::array<std::array<double, 2>, 2> trTT{};  // tr(T_a T_b)

  std::vector<UserMode> mode;
  RMat delta_bar;  // M x K

  const CMat& T_of(int k) const { return T[static_cast<int>(mode[k])]; }
  double trT_of(int k) const { return trT[static_cast<int>(mode[k])]; }
  double trTT_of(int j, int k) const { return trTT[static_cast<int>(mode[j])][static_cast<int>(mode[k])]; }
  const CMat& theta_of(int k) const { return theta[static_cast<int>(mode[k])]; }
  JointCovariance joint(int m, int k) const { return {delta_bar(m, k), R_user[k], R_ap[m]}; }
  CMat delta(int m, int k) const { return joint(m, k).expand(); }
};

/// Assembles the correlation set for a scenario. With ris_mode none the
/// surface contributes nothing (Theta = 0).
CorrelationSet build_correlation(const Scenario& scn, const StarConfig& star);

}  // namespace starcf
