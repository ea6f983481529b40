// SPDX-License-Identifier: Apache-2.0
//
// Setup/trial orchestration, sweeps, closed-form validation and result files.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "starcf/closedform.hpp"
#include "starcf/combining.hpp"
#include "starcf/config.hpp"
#include "starcf/correlation.hpp"
#include "starcf/estimation.hpp"
#include "starcf/scenario.hpp"
#include "starcf/spectral.hpp"

namespace starcf {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kThreadsEnv = "STARCF_THREADS";

/// Worker count: $STARCF_THREADS if set and positive, else the hardware concurrency.
int worker_threads();

/// Runs fn(i) for i in [0, n) on worker_threads() threads.
void parallel_for(int n, const std::function<void(int)>& fn);

/// "L1-MR-LSFD", "L1-MMSE-MF", "L2-MR", "L2-MMSE".
struct Scheme {
  int level = 1;
  Combiner combiner = Combiner::kMR;
  Decoder decoder = Decoder::kLSFD;
};
Scheme parse_scheme(const std::string& s);
std::string to_string(const Scheme& s);

/// Everything fixed for one setup (geometry, surface, statistics).
struct Setup {
  Scenario scn;
  StarConfig star;
  CorrelationSet corr;
  EstimationStatistics stats;
};
Setup make_setup(const SystemConfig& cfg, int setup_index);

/// Channel, pilot observation and estimate of one trial.
struct Trial {
  ChannelRealization ch;
  ChannelEstimate est;
};
Trial draw_trial(const Setup& s, RandomStream& rng);

/// V[m*K+k] for a Level-1 combiner.
std::vector<CMat> level1_combiners(Combiner c, const ChannelEstimate& est, const Setup& s);

/// Per-trial accumulators of one contiguous block of trials.
struct TrialBlock {
  Level1Accumulator l1_mr, l1_mmse;
  Welford l2_mr, l2_mmse;
};

struct TrialNeeds {
  bool l1_mr = false, l1_mmse = false, l2_mr = false, l2_mmse = false;
};

/// Evaluates trials [first, last) of a setup on the given stream purpose.
TrialBlock run_trials(const Setup& s, int setup_index, long first, long last, StreamPurpose purpose,
                      const TrialNeeds& needs);

/// Splits n trials into contiguous blocks evaluated in parallel; block order is fixed.
std::vector<TrialBlock> run_trial_blocks(const Setup& s, int setup_index, long n, int n_blocks,
                                         StreamPurpose purpose, const TrialNeeds& needs);

struct SchemeResult {
  Scheme scheme;
  RVec se_mean;        // per user
  RVec se_stderr;      // per user
  double sum_mean = 0;
  double sum_stderr = 0;
  int n_setups = 0;
  long n_trials = 0;   // per setup; 0 on the closed-form path
  bool closed_form = false;
  RVec setup_sum;         // sum SE of each setup
  RVec setup_sum_stderr;  // its Monte Carlo standard error within the setup
};

/// Evaluates every scheme in cfg.schemes, averaged over cfg.n_setups setups.
std::vector<SchemeResult> run_point(const SystemConfig& cfg);

struct ResultRow {
  std::string sweep_param;
  std::string sweep_value;
  int level = 1;
  std::string combiner;
  std::string decoder;
  std::string user;  // index or "sum"
  double se_mean = 0;
  double se_stderr = 0;
  int n_setups = 0;
  long n_trials = 0;

  bool operator==(const ResultRow&) const = default;
};

std::vector<ResultRow> to_rows(const std::vector<SchemeResult>& results, const std::string& param,
                               const std::string& value);

/// Sweepable parameters: N_u, K, M, N_ap, L, kappa_ap, kappa_u, direct_blocked, ris_mode.
bool is_sweep_param(const std::string& name);
SystemConfig apply_sweep_value(const SystemConfig& base, const std::string& param, const std::string& value);
std::vector<ResultRow> run_sweep(const SystemConfig& base, const std::string& param,
                                 const std::vector<std::string>& values);

/// Closed-form versus Monte Carlo comparison under MR combining.
struct SeGap {
  Decoder decoder;
  int user;
  double closed, mc, abs_gap, rel_gap;
};
struct MomentCheck {
  std::string name;  // e.g. "U[0][1]"
  double max_z;
};
struct ValidationReport {
  int setup_index = 0;
  long n_trials = 0;
  std::vector<SeGap> gaps;
  std::vector<MomentCheck> moments;
  double max_rel_gap = 0;
  double max_z = 0;
  bool pass = false;
};

inline constexpr double kMaxRelGap = 0.02;
inline constexpr double kMaxZ = 4.0;

/// Largest |closed - mc| / stderr over the entries; an entry with zero stderr
/// counts as infinite unless it also agrees to 1e-9 of the matrix norm.
double max_z_score(const CMat& closed, const CMat& mc, const CMat& stderr_);

ValidationReport validate(const SystemConfig& cfg, long n_trials, int setup_index = 0,
                          const ClosedFormOptions& opt = {});

/// CSV with a fixed header; values round-trip exactly.
inline constexpr const char* kCsvHeader =
    "sweep_param,sweep_value,level,combiner,decoder,user,se_mean,se_stderr,n_setups,n_trials";
std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> rows_from_csv(const std::string& text);
void write_csv(const std::vector<ResultRow>& rows, const std::string& path);

/// JSON manifest: config, digest, seed, version, wall time and the command.
std::string manifest_json(const SystemConfig& cfg, const std::string& command, double wall_seconds);
void write_manifest(const SystemConfig& cfg, const std::string& command, double wall_seconds,
                    const std::string& path);

/// Gnuplot data: one file per (scheme, sweep value), columns "user se_mean se_stderr".
/// Returns the written paths.
std::vector<std::string> write_curves(const std::vector<ResultRow>& rows, const std::string& dir);

}  // namespace starcf
