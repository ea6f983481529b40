// SPDX-License-Identifier: Apache-2.0

#include "starcf/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "starcf/rng.hpp"

namespace starcf {

int worker_threads() {
  if (const char* env = std::getenv(kThreadsEnv)) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int n_threads = std::min(worker_threads(), n);
  if (n_threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

Scheme parse_scheme(const std::string& s) {
  static const std::map<std::string, Scheme> table = {
      {"L1-MR-LSFD", {1, Combiner::kMR, Decoder::kLSFD}},
      {"L1-MR-MF", {1, Combiner::kMR, Decoder::kMF}},
      {"L1-MMSE-LSFD", {1, Combiner::kLocalMMSE, Decoder::kLSFD}},
      {"L1-MMSE-MF", {1, Combiner::kLocalMMSE, Decoder::kMF}},
      {"L2-MR", {2, Combiner::kMR, Decoder::kNone}},
      {"L2-MMSE", {2, Combiner::kGlobalMMSE, Decoder::kNone}},
  };
  const auto it = table.find(s);
  if (it == table.end()) throw std::invalid_argument("unknown scheme '" + s + "'");
  return it->second;
}

std::string to_string(const Scheme& s) {
  std::string out = "L" + std::to_string(s.level) + "-" + to_string(s.combiner);
  if (s.level == 1) out += "-" + to_string(s.decoder);
  return out;
}

Setup make_setup(const SystemConfig& cfg, int setup_index) {
  const auto idx = static_cast<std::uint64_t>(setup_index);
  RandomStream geo(cfg.seed, idx, kSetupLevel, StreamPurpose::kGeometry);
  Scenario scn = generate_scenario(cfg, geo);
  RandomStream phases(cfg.seed, idx, kSetupLevel, StreamPurpose::kStarPhases);
  StarConfig star = make_star_config(cfg, phases);
  CorrelationSet corr = build_correlation(scn, star);
  EstimationStatistics stats = build_statistics(scn, corr);
  return Setup{std::move(scn), std::move(star), std::move(corr), std::move(stats)};
}

Trial draw_trial(const Setup& s, RandomStream& rng) {
  ChannelRealization ch = sample_channels(s.scn, s.corr, rng);
  const std::vector<CMat> Y = pilot_observation(ch, s.scn, rng);
  ChannelEstimate est = estimate_channels(s.stats, Y, s.scn);
  return Trial{std::move(ch), std::move(est)};
}

std::vector<CMat> level1_combiners(Combiner c, const ChannelEstimate& est, const Setup& s) {
  const int M = s.scn.M, K = s.scn.K;
  std::vector<CMat> V(static_cast<std::size_t>(M * K));
  for (int m = 0; m < M; ++m) {
    if (c == Combiner::kMR) {
      for (int k = 0; k < K; ++k) V[m * K + k] = mr_combiner(est, m, k);
    } else if (c == Combiner::kLocalMMSE) {
      std::vector<CMat> vm = local_mmse_combiners(est, s.stats, s.scn, m);
      for (int k = 0; k < K; ++k) V[m * K + k] = std::move(vm[k]);
    } else {
      throw std::invalid_argument("level1_combiners: global MMSE is a Level-2 combiner");
    }
  }
  return V;
}

namespace {

CVec with_sum(const RVec& per_user) {
  CVec out(per_user.size() + 1);
  out.head(per_user.size()) = per_user.cast<cdouble>();
  out(per_user.size()) = per_user.sum();
  return out;
}

}  // namespace

TrialBlock run_trials(const Setup& s, int setup_index, long first, long last, StreamPurpose purpose,
                      const TrialNeeds& needs) {
  const Scenario& scn = s.scn;
  TrialBlock b{Level1Accumulator(scn.M, scn.K, scn.N_u), Level1Accumulator(scn.M, scn.K, scn.N_u),
               Welford(scn.K + 1), Welford(scn.K + 1)};
  for (long t = first; t < last; ++t) {
    RandomStream rng(scn.cfg.seed, static_cast<std::uint64_t>(setup_index), static_cast<std::uint64_t>(t),
                     purpose);
    const Trial tr = draw_trial(s, rng);
    if (needs.l1_mr) b.l1_mr.add(level1_combiners(Combiner::kMR, tr.est, s), tr.ch, s.stats, scn);
    if (needs.l1_mmse) b.l1_mmse.add(level1_combiners(Combiner::kLocalMMSE, tr.est, s), tr.ch, s.stats, scn);
    if (needs.l2_mr) b.l2_mr.add(with_sum(level2_trial(Combiner::kMR, tr.est, s.stats, scn)));
    if (needs.l2_mmse) b.l2_mmse.add(with_sum(level2_trial(Combiner::kGlobalMMSE, tr.est, s.stats, scn)));
  }
  return b;
}

std::vector<TrialBlock> run_trial_blocks(const Setup& s, int setup_index, long n, int n_blocks,
                                         StreamPurpose purpose, const TrialNeeds& needs) {
  n_blocks = static_cast<int>(std::max<long>(1, std::min<long>(n_blocks, n)));
  std::vector<TrialBlock> blocks(static_cast<std::size_t>(n_blocks));
  parallel_for(n_blocks, [&](int i) {
    const long first = n * i / n_blocks, last = n * (i + 1) / n_blocks;
    blocks[i] = run_trials(s, setup_index, first, last, purpose, needs);
  });
  return blocks;
}

namespace {

TrialBlock merge_blocks(const std::vector<TrialBlock>& blocks) {
  TrialBlock total = blocks.front();
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    total.l1_mr.merge(blocks[i].l1_mr);
    total.l1_mmse.merge(blocks[i].l1_mmse);
    total.l2_mr.merge(blocks[i].l2_mr);
    total.l2_mmse.merge(blocks[i].l2_mmse);
  }
  return total;
}

std::vector<CMat> decoder_weights(Decoder d, const Level1Moments& mom, const Scenario& scn) {
  return d == Decoder::kLSFD ? lsfd_from_moments(mom, scn) : mf_from_moments(mom);
}

// Per-setup estimate: entries 0..K-1 per user, entry K the sum.
struct SetupEstimate {
  RVec mean;
  RVec stderr_;
};

}  // namespace

std::vector<SchemeResult> run_point(const SystemConfig& cfg) {
  cfg.validate();
  std::vector<Scheme> schemes;
  for (const auto& name : cfg.schemes) schemes.push_back(parse_scheme(name));

  auto closed_path = [&](const Scheme& sc) {
    return cfg.analytic && sc.level == 1 && sc.combiner == Combiner::kMR;
  };
  TrialNeeds eval, warm;
  for (const auto& sc : schemes) {
    if (closed_path(sc)) continue;
    if (sc.level == 1) {
      bool& flag = sc.combiner == Combiner::kMR ? eval.l1_mr : eval.l1_mmse;
      flag = true;
      if (sc.decoder == Decoder::kLSFD) (sc.combiner == Combiner::kMR ? warm.l1_mr : warm.l1_mmse) = true;
    } else {
      (sc.combiner == Combiner::kMR ? eval.l2_mr : eval.l2_mmse) = true;
    }
  }
  const bool need_eval = eval.l1_mr || eval.l1_mmse || eval.l2_mr || eval.l2_mmse;
  const bool need_warm = warm.l1_mr || warm.l1_mmse;
  const int K = cfg.K;

  std::vector<std::vector<SetupEstimate>> per_setup(schemes.size());
  for (int si = 0; si < cfg.n_setups; ++si) {
    const Setup s = make_setup(cfg, si);
    const Scenario& scn = s.scn;

    Level1Moments closed;
    bool have_closed = false;
    std::vector<TrialBlock> blocks;
    TrialBlock total, warm_total;
    if (need_eval) {
      blocks = run_trial_blocks(s, si, cfg.n_trials, cfg.jackknife_blocks, StreamPurpose::kEvaluation, eval);
      total = merge_blocks(blocks);
    }
    if (need_warm)
      warm_total = merge_blocks(
          run_trial_blocks(s, si, cfg.warmup_trials, cfg.jackknife_blocks, StreamPurpose::kWarmup, warm));

    for (std::size_t i = 0; i < schemes.size(); ++i) {
      const Scheme& sc = schemes[i];
      SetupEstimate e{RVec::Zero(K + 1), RVec::Zero(K + 1)};
      if (closed_path(sc)) {
        if (!have_closed) {
          closed = ClosedForm(scn, s.corr, s.stats).moments();
          have_closed = true;
        }
        const RVec se = se_level1(closed, decoder_weights(sc.decoder, closed, scn), scn).se;
        e.mean << se, se.sum();
      } else if (sc.level == 1) {
        const bool mr = sc.combiner == Combiner::kMR;
        const Level1Accumulator& acc = mr ? total.l1_mr : total.l1_mmse;
        const Level1Moments mom = acc.mean();
        std::vector<CMat> A;
        if (sc.decoder == Decoder::kLSFD)
          A = lsfd_from_moments((mr ? warm_total.l1_mr : warm_total.l1_mmse).mean(), scn);
        else
          A = mf_from_moments(mom);
        const RVec se = se_level1(mom, A, scn).se;
        e.mean << se, se.sum();
        std::vector<Level1Accumulator> jb;
        for (const auto& b : blocks) jb.push_back(mr ? b.l1_mr : b.l1_mmse);
        e.stderr_ = jackknife_se_stderr(jb, A, scn);
      } else {
        const Welford& w = sc.combiner == Combiner::kMR ? total.l2_mr : total.l2_mmse;
        e.mean = w.mean().real() * scn.prelog();
        e.stderr_ = w.std_error() * scn.prelog();
      }
      per_setup[i].push_back(std::move(e));
    }
  }

  std::vector<SchemeResult> out;
  const int S = cfg.n_setups;
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    RVec mean = RVec::Zero(K + 1);
    for (const auto& e : per_setup[i]) mean += e.mean / double(S);
    RVec err;
    if (S > 1) {
      RVec var = RVec::Zero(K + 1);
      for (const auto& e : per_setup[i]) var += (e.mean - mean).cwiseAbs2();
      err = (var / double(S - 1) / double(S)).cwiseSqrt();
    } else {
      err = per_setup[i].front().stderr_;
    }
    SchemeResult r;
    r.scheme = schemes[i];
    r.se_mean = mean.head(K);
    r.se_stderr = err.head(K);
    r.sum_mean = mean(K);
    r.sum_stderr = err(K);
    r.n_setups = S;
    r.closed_form = closed_path(schemes[i]);
    r.n_trials = r.closed_form ? 0 : cfg.n_trials;
    r.setup_sum.resize(S);
    r.setup_sum_stderr.resize(S);
    for (int si = 0; si < S; ++si) {
      r.setup_sum(si) = per_setup[i][si].mean(K);
      r.setup_sum_stderr(si) = per_setup[i][si].stderr_(K);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ResultRow> to_rows(const std::vector<SchemeResult>& results, const std::string& param,
                               const std::string& value) {
  std::vector<ResultRow> rows;
  for (const auto& r : results) {
    ResultRow base;
    base.sweep_param = param;
    base.sweep_value = value;
    base.level = r.scheme.level;
    base.combiner = to_string(r.scheme.combiner);
    base.decoder = to_string(r.scheme.decoder);
    base.n_setups = r.n_setups;
    base.n_trials = r.n_trials;
    for (Eigen::Index k = 0; k < r.se_mean.size(); ++k) {
      ResultRow row = base;
      row.user = std::to_string(k);
      row.se_mean = r.se_mean(k);
      row.se_stderr = r.se_stderr(k);
      rows.push_back(row);
    }
    ResultRow sum = base;
    sum.user = "sum";
    sum.se_mean = r.sum_mean;
    sum.se_stderr = r.sum_stderr;
    rows.push_back(sum);
  }
  return rows;
}

bool is_sweep_param(const std::string& name) {
  static const std::vector<std::string> names = {"N_u",     "K",       "M",              "N_ap",    "L",
                                                 "kappa_ap", "kappa_u", "direct_blocked", "ris_mode"};
  return std::find(names.begin(), names.end(), name) != names.end();
}

SystemConfig apply_sweep_value(const SystemConfig& base, const std::string& param, const std::string& value) {
  if (!is_sweep_param(param)) throw std::invalid_argument("parameter '" + param + "' cannot be swept");
  SystemConfig cfg = base;
  if (param == "L") {
    int L = 0;
    try {
      std::size_t pos = 0;
      L = std::stoi(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("sweep value for L is not an integer: '" + value + "'");
    }
    if (L < 1) throw std::invalid_argument("sweep value for L must be >= 1");
    // keep the vertical extent when it divides L, else use a single row
    if (L % base.L_v == 0) {
      cfg.L_h = L / base.L_v;
    } else {
      cfg.L_h = L;
      cfg.L_v = 1;
    }
  } else {
    apply_override(cfg, param + "=" + value);
  }
  cfg.validate();
  return cfg;
}

std::vector<ResultRow> run_sweep(const SystemConfig& base, const std::string& param,
                                 const std::vector<std::string>& values) {
  std::vector<ResultRow> rows;
  for (const auto& v : values) {
    try {
      const auto r = to_rows(run_point(apply_sweep_value(base, param, v)), param, v);
      rows.insert(rows.end(), r.begin(), r.end());
    } catch (const std::exception& e) {
      throw std::runtime_error("sweep point " + param + "=" + v + ": " + e.what());
    }
  }
  return rows;
}

double max_z_score(const CMat& closed, const CMat& mc, const CMat& stderr_) {
  const double scale = std::max(closed.norm(), mc.norm());
  double z = 0.0;
  for (Eigen::Index i = 0; i < closed.size(); ++i) {
    const double d = std::abs(closed(i) - mc(i));
    const double s = std::abs(stderr_(i));
    if (s > 0)
      z = std::max(z, d / s);
    else if (d > 1e-9 * scale)
      z = std::numeric_limits<double>::infinity();
  }
  return z;
}

ValidationReport validate(const SystemConfig& cfg, long n_trials, int setup_index, const ClosedFormOptions& opt) {
  cfg.validate();
  const Setup s = make_setup(cfg, setup_index);
  const Scenario& scn = s.scn;
  TrialNeeds needs;
  needs.l1_mr = true;
  const TrialBlock total = merge_blocks(
      run_trial_blocks(s, setup_index, n_trials, cfg.jackknife_blocks, StreamPurpose::kEvaluation, needs));
  const Level1Moments mc = total.l1_mr.mean();
  const Level1Moments se = total.l1_mr.std_error();
  const Level1Moments cf = ClosedForm(scn, s.corr, s.stats, opt).moments();

  ValidationReport rep;
  rep.setup_index = setup_index;
  rep.n_trials = n_trials;
  auto check = [&](const std::string& name, const CMat& c, const CMat& m, const CMat& e) {
    const double z = max_z_score(c, m, e);
    rep.moments.push_back({name, z});
    rep.max_z = std::max(rep.max_z, z);
  };
  for (int k = 0; k < scn.K; ++k) {
    const std::string tag = "[" + std::to_string(k) + "]";
    check("H" + tag, cf.H[k], mc.H[k], se.H[k]);
    for (int kp = 0; kp < scn.K; ++kp)
      check("U" + tag + "[" + std::to_string(kp) + "]", cf.u(k, kp), mc.u(k, kp), se.u(k, kp));
    check("Gamma" + tag, cf.Gamma[k], mc.Gamma[k], se.Gamma[k]);
    check("Lambda" + tag, cf.Lambda[k], mc.Lambda[k], se.Lambda[k]);
  }
  for (Decoder d : {Decoder::kLSFD, Decoder::kMF}) {
    const RVec se_cf = se_level1(cf, decoder_weights(d, cf, scn), scn).se;
    const RVec se_mc = se_level1(mc, decoder_weights(d, mc, scn), scn).se;
    for (int k = 0; k < scn.K; ++k) {
      const double gap = std::abs(se_cf(k) - se_mc(k));
      const double rel = se_mc(k) > 0 ? gap / se_mc(k) : (gap > 0 ? std::numeric_limits<double>::infinity() : 0.0);
      rep.gaps.push_back({d, k, se_cf(k), se_mc(k), gap, rel});
      rep.max_rel_gap = std::max(rep.max_rel_gap, rel);
    }
  }
  rep.pass = rep.max_rel_gap <= kMaxRelGap && rep.max_z <= kMaxZ;
  return rep;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

void write_text(const std::string& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string file_token(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
  return out;
}

}  // namespace

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << kCsvHeader << "\n";
  for (const auto& r : rows)
    os << csv_field(r.sweep_param) << ',' << csv_field(r.sweep_value) << ',' << r.level << ','
       << csv_field(r.combiner) << ',' << csv_field(r.decoder) << ',' << csv_field(r.user) << ','
       << fmt_double(r.se_mean) << ',' << fmt_double(r.se_stderr) << ',' << r.n_setups << ',' << r.n_trials
       << "\n";
  return os.str();
}

std::vector<ResultRow> rows_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("CSV header mismatch");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10) throw std::invalid_argument("CSV row has " + std::to_string(f.size()) + " fields");
    ResultRow r;
    r.sweep_param = f[0];
    r.sweep_value = f[1];
    r.level = std::stoi(f[2]);
    r.combiner = f[3];
    r.decoder = f[4];
    r.user = f[5];
    r.se_mean = std::stod(f[6]);
    r.se_stderr = std::stod(f[7]);
    r.n_setups = std::stoi(f[8]);
    r.n_trials = std::stol(f[9]);
    rows.push_back(r);
  }
  return rows;
}

void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("write_csv: no rows");
  write_text(path, rows_to_csv(rows));
}

std::string manifest_json(const SystemConfig& cfg, const std::string& command, double wall_seconds) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["seed"] = cfg.seed;
  j["config_digest"] = cfg.digest();
  j["config"] = cfg.to_map();
  j["wall_time_s"] = wall_seconds;
  j["threads"] = worker_threads();
  return j.dump(2) + "\n";
}

void write_manifest(const SystemConfig& cfg, const std::string& command, double wall_seconds,
                    const std::string& path) {
  write_text(path, manifest_json(cfg, command, wall_seconds));
}

std::vector<std::string> write_curves(const std::vector<ResultRow>& rows, const std::string& dir) {
  std::map<std::string, std::ostringstream> files;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (r.user == "sum") continue;
    std::string scheme = "L" + std::to_string(r.level) + "-" + r.combiner;
    if (r.level == 1) scheme += "-" + r.decoder;
    const std::string name = "curve_" + file_token(scheme) + "_" + file_token(r.sweep_param) + "_" +
                             file_token(r.sweep_value) + ".dat";
    auto [it, fresh] = files.try_emplace(name);
    if (fresh) {
      order.push_back(name);
      it->second << "# " << scheme << " " << r.sweep_param << "=" << r.sweep_value << "\n"
                 << "# user se_mean se_stderr\n";
    }
    it->second << r.user << ' ' << fmt_double(r.se_mean) << ' ' << fmt_double(r.se_stderr) << "\n";
  }
  std::vector<std::string> paths;
  for (const auto& name : order) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    write_text(path, files[name].str());
    paths.push_back(path);
  }
  return paths;
}

}  // namespace starcf
