// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace starcf {

enum class RisMode { kStar, kCrisSplit, kNone };
enum class PhaseProfile { kRandom, kZero };

std::string to_string(RisMode mode);
RisMode parse_ris_mode(const std::string& s);

/// Three-slope path loss with log-normal shadowing. Distances in metres.
struct PathLossModel {
  double d0 = 10.0;               // first breakpoint (m)
  double d1 = 50.0;               // second breakpoint (m)
  double const_db = 140.7;        // attenuation at 1 km (dB)
  double exponent_far = 3.5;      // beyond d1
  double exponent_mid = 2.0;      // between d0 and d1
  double shadow_sigma_db = 8.0;   // applied only beyond d1

  /// Path loss in dB (negative number) at 3-D distance d.
  double path_loss_db(double d_m) const;
};

/// Every knob of one experiment. Powers are stored linear (W); the INI
/// file carries dBm and is converted once on load.
struct SystemConfig {
  // [system]
  int M = 4;
  int K = 2;
  int N_ap = 2;
  int N_u = 2;
  int L_h = 4;
  int L_v = 2;
  int tau_c = 200;
  int tau_p = 0;  // 0 = N_u * ceil(K/2)
  double p_p = 0.1;
  double p_u = 0.1;
  double sigma2 = 7.943282347242789e-13;  // -91 dBm

  // [geometry]
  double d_user = 0.25;   // wavelengths
  double d_h = 0.25;      // wavelengths
  double d_v = 0.25;      // wavelengths
  double lambda = 0.15;   // m
  double r_ap = 0.5;
  double h_ap = 15.0;
  double h_user = 1.65;
  double h_ris = 30.0;
  double ris_x = 500.0;
  double ris_y = 100.0;
  bool direct_blocked = false;
  RisMode ris_mode = RisMode::kStar;
  PathLossModel pathloss{};
  double ris_pl_const_db = 140.7;  // attenuation constant used for the two RIS hops
  double star_amp_t = 0.7071067811865476;
  PhaseProfile star_phase = PhaseProfile::kRandom;

  // [hardware]
  std::vector<double> kappa_ap{0.9};  // one entry broadcasts to all APs
  std::vector<double> kappa_u{0.95};  // one entry broadcasts to all users

  // [mc]
  std::uint64_t seed = 1;
  int n_trials = 1000;
  int n_setups = 1;
  int warmup_trials = 2000;
  int jackknife_blocks = 20;
  std::vector<std::string> schemes{"L1-MR-LSFD", "L1-MR-MF", "L1-MMSE-LSFD", "L1-MMSE-MF", "L2-MR", "L2-MMSE"};
  bool analytic = true;

  int L() const { return L_h * L_v; }
  int effective_tau_p() const;
  double kappa_r(int m) const;
  double kappa_t(int k) const;

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;

  /// Stable textual form of every field (used for the digest and the manifest).
  std::map<std::string, std::string> to_map() const;
  std::string digest() const;
};

/// Parses an INI file with sections [system], [geometry], [hardware], [mc].
/// Unknown sections or keys are errors.
SystemConfig load_config(const std::string& path);
SystemConfig parse_config(const std::string& text);

/// Applies one "key=value" (or "section.key=value") override in place.
void apply_override(SystemConfig& cfg, const std::string& assignment);

/// Renders a config back to INI text that parse_config accepts.
std::string to_ini(const SystemConfig& cfg);

/// Named experiment profiles shipped with the tool.
std::map<std::string, SystemConfig> builtin_profiles();

}  // namespace starcf
