// SPDX-License-Identifier: Apache-2.0
//
// Realization-free Level-1 moments under MR combining.
//
// U blocks are built from fourth moments of the aggregate channel. The
// cascaded part is a product of two independent Gaussian matrices, so beyond
// the Gaussian pairings there are two cumulant contractions: one through the
// user-side surface channel (shared by all APs, partial trace over AP
// antennas) and one through the AP-side surface channel (shared by all users,
// partial trace over user antennas).

#pragma once

#include <array>
#include <vector>

#include "starcf/combining.hpp"
#include "starcf/correlation.hpp"
#include "starcf/estimation.hpp"
#include "starcf/scenario.hpp"
#include "starcf/spectral.hpp"

namespace starcf {

/// How the AP-side cumulant term contracts its two operands.
enum class CumulantContraction {
  kPartialTrace,  // tr(ptr_user X  ptr_user Y): exact for any N_u
  kFullTrace,     // tr(X Y): coincides with the exact form only for N_u = 1
};

struct ClosedFormOptions {
  CumulantContraction contraction = CumulantContraction::kPartialTrace;
  /// Add the exact contribution of the channel-conditional receiver distortion
  /// during the pilot phase (diagonal blocks only).
  bool conditional_rx = true;
  /// Multiplies every estimate covariance entering H, Gamma, Lambda (negative control).
  double delta_hat_scale = 1.0;
};

/// Indices of the six additive groups of a same-AP block and four of a cross-AP block.
enum UGroup {
  kCoherent = 0,       // pilot-sharing mean term, k' in P_k only
  kPilotShare = 1,     // pilot-set second-order terms
  kTxCoherent = 2,     // transmit distortion, j = k'
  kTxSpread = 3,       // transmit distortion summed over all users
  kRxDistortion = 4,   // receiver distortion (same AP only)
  kNoise = 5,          // noise (same AP only)
};

class ClosedForm {
 public:
  ClosedForm(const Scenario& scn, const CorrelationSet& corr, const EstimationStatistics& stats,
             ClosedFormOptions opt = {});

  /// E{H_kk}, M N_u x N_u.
  CMat h_bar(int k) const;
  CMat gamma_bar(int k) const;
  CMat lambda_bar(int k) const;

  /// Additive groups of U_kk'^{m,m'}. For m != m' the last two entries are zero.
  std::array<CMat, 6> u_groups(int m, int mp, int k, int kp) const;
  CMat u_block(int m, int mp, int k, int kp) const;
  /// Exact conditional receiver-distortion correction of block (m,m) (zero unless m = m').
  CMat rx_correction(int m, int k, int kp) const;
  /// U_kk', M N_u square.
  CMat u(int k, int kp) const;

  Level1Moments moments() const;

 private:
  struct Side;
  Side side(int m, int k, int kp) const;
  std::array<CMat, 6> combine(const Side& l, const Side& r, int k, int kp) const;
  CMat omega(int m, int k, int x, int n) const;

  const Scenario& scn_;
  const CorrelationSet& corr_;
  const EstimationStatistics& stats_;
  ClosedFormOptions opt_;
  std::vector<CMat> whiten_;  // [m*K + j] R_user^{1/2} kron R_ap^{1/2}
  std::vector<CMat> delta_;   // [m*K + j] expanded Delta
};

/// Free-function forms.
CMat closed_h_bar(const Scenario& scn, const CorrelationSet& corr, const EstimationStatistics& stats, int k);
CMat closed_u_diag(const Scenario& scn, const CorrelationSet& corr, const EstimationStatistics& stats, int m,
                   int k, int kp, ClosedFormOptions opt = {});
CMat closed_u_cross(const Scenario& scn, const CorrelationSet& corr, const EstimationStatistics& stats, int m,
                    int mp, int k, int kp, ClosedFormOptions opt = {});
CMat closed_gamma_bar(const Scenario& scn, const CorrelationSet& corr, const EstimationStatistics& stats, int k);
CMat closed_lambda_bar(const CMat& h_bar, const Scenario& scn, int k);

struct ClosedFormSe {
  Level1Result result;
  std::vector<CMat> A;
  Level1Moments moments;
};

/// Closed-form Level-1 SE under MR combining with LSFD or MF decoding.
ClosedFormSe se_level1_closed(const Scenario& scn, const CorrelationSet& corr, const EstimationStatistics& stats,
                              Decoder decoder, ClosedFormOptions opt = {});

}  // namespace starcf
