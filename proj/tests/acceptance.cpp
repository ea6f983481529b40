// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion; details go to
// indented lines above it. Run with criterion numbers as arguments to select
// a subset, e.g. `acceptance 1 4`.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "starcf/experiment.hpp"

using namespace starcf;

namespace {

class Criterion {
 public:
  explicit Criterion(int id) : id_(id) {}

  void check(bool ok, const std::string& what) {
    std::printf("    [%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
    if (!ok) ++failures_;
  }
  void note(const std::string& what) { std::printf("    %s\n", what.c_str()); }
  bool passed() const { return failures_ == 0; }
  int id() const { return id_; }

 private:
  int id_;
  int failures_ = 0;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

SystemConfig profile(const std::string& name) { return builtin_profiles().at(name); }

const SchemeResult& find(const std::vector<SchemeResult>& r, const std::string& scheme) {
  for (const auto& x : r)
    if (to_string(x.scheme) == scheme) return x;
  throw std::runtime_error("missing scheme " + scheme);
}

double min_eig(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_abs_eig(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

void closed_form_gate(Criterion& c) {
  const SystemConfig cfg = profile("acceptance");
  const auto rep = validate(cfg, cfg.n_trials);
  for (const auto& g : rep.gaps)
    c.note(fmt("user %d %-4s closed %.6f  mc %.6f  rel gap %.4f%%", g.user, to_string(g.decoder).c_str(),
               g.closed, g.mc, 100.0 * g.rel_gap));
  double worst = 0;
  std::string worst_name;
  for (const auto& m : rep.moments)
    if (m.max_z > worst) {
      worst = m.max_z;
      worst_name = m.name;
    }
  c.check(rep.max_rel_gap <= kMaxRelGap,
          fmt("max relative SE gap %.4f%% <= %.1f%% (%ld trials)", 100 * rep.max_rel_gap, 100 * kMaxRelGap,
              rep.n_trials));
  c.check(rep.max_z <= kMaxZ,
          fmt("%zu moments, max z %.2f (%s) <= %.0f", rep.moments.size(), worst, worst_name.c_str(), kMaxZ));

  ClosedFormOptions bad;
  bad.delta_hat_scale = 1.05;
  const auto ctrl = validate(cfg, cfg.n_trials, 0, bad);
  c.check(!ctrl.pass, fmt("negative control (estimate covariance x1.05) rejected: gap %.3f%%, max z %.1f",
                          100 * ctrl.max_rel_gap, ctrl.max_z));
}

// ---------------------------------------------------------------------------

void estimator(Criterion& c) {
  const SystemConfig cfg = profile("acceptance");
  const Setup s = make_setup(cfg, 0);
  const Scenario& scn = s.scn;
  const long n = 200000;
  const int P = scn.M * scn.K;
  const int d = scn.N_ap * scn.N_u;
  std::vector<CMat> est(P, CMat::Zero(d, d)), err(P, CMat::Zero(d, d));
  std::vector<double> mse[3];
  for (auto& v : mse) v.assign(P, 0.0);
  const double scales[3] = {0.9, 1.0, 1.1};
  for (long t = 0; t < n; ++t) {
    RandomStream rng(cfg.seed, 0, t, StreamPurpose::kTest);
    const Trial tr = draw_trial(s, rng);
    for (int i = 0; i < P; ++i) {
      const CVec g = vec(tr.ch.G[i]);
      const CVec gh = vec(tr.est.G_hat[i]);
      const CVec e = g - gh;
      est[i].noalias() += gh * gh.adjoint();
      err[i].noalias() += e * e.adjoint();
      for (int j = 0; j < 3; ++j) mse[j][i] += (g - scales[j] * gh).squaredNorm();
    }
  }
  const double tol = 3.0 / std::sqrt(double(n));
  double worst_est = 0, worst_err = 0;
  int beaten = 0;
  double tot[3] = {0, 0, 0};
  for (int m = 0; m < scn.M; ++m)
    for (int k = 0; k < scn.K; ++k) {
      const int i = m * scn.K + k;
      const CMat& dh = s.stats.Delta_hat[i];
      const CMat de = s.corr.delta(m, k) - dh;
      worst_est = std::max(worst_est, (est[i] / double(n) - dh).norm() / dh.norm());
      worst_err = std::max(worst_err, (err[i] / double(n) - de).norm() / de.norm());
      if (mse[1][i] < mse[0][i] && mse[1][i] < mse[2][i]) ++beaten;
      for (int j = 0; j < 3; ++j) tot[j] += mse[j][i];
      c.note(fmt("AP %d user %d: MSE x0.9 %.6e  x1.0 %.6e  x1.1 %.6e", m, k, mse[0][i] / n, mse[1][i] / n,
                 mse[2][i] / n));
    }
  c.check(worst_est <= tol, fmt("cov(G_hat) vs Delta_hat: max rel Frobenius %.5f <= %.5f", worst_est, tol));
  c.check(worst_err <= tol,
          fmt("cov(G - G_hat) vs Delta - Delta_hat: max rel Frobenius %.5f <= %.5f", worst_err, tol));
  c.check(beaten == P, fmt("MMSE beats both scaled estimates for %d/%d AP-user pairs", beaten, P));
  c.check(tot[1] < tot[0] && tot[1] < tot[2], "MMSE beats both scaled estimates in total MSE");
}

// ---------------------------------------------------------------------------

// a >= b within 2 combined Monte Carlo standard errors, per setup and on average
void ordering(Criterion& c, const SchemeResult& a, const SchemeResult& b) {
  const auto S = a.setup_sum.size();
  int held = 0;
  double var = 0;
  for (Eigen::Index si = 0; si < S; ++si) {
    const double sa = a.setup_sum_stderr(si), sb = b.setup_sum_stderr(si);
    if (a.setup_sum(si) >= b.setup_sum(si) - 2.0 * std::hypot(sa, sb)) ++held;
    var += sa * sa + sb * sb;
  }
  const double tol = 2.0 * std::sqrt(var) / double(S);
  const bool ok = held == S && a.sum_mean >= b.sum_mean - tol;
  c.check(ok, fmt("%s >= %s: held in %d/%ld setups; mean sum %.4f vs %.4f (2 MC stderr %.4f)",
                  to_string(a.scheme).c_str(), to_string(b.scheme).c_str(), held, long(S), a.sum_mean,
                  b.sum_mean, tol));
}

void orderings(Criterion& c) {
  SystemConfig cfg = profile("desk");
  cfg.analytic = false;
  const auto r = run_point(cfg);
  ordering(c, find(r, "L1-MMSE-LSFD"), find(r, "L1-MR-LSFD"));
  ordering(c, find(r, "L1-MMSE-MF"), find(r, "L1-MR-MF"));
  ordering(c, find(r, "L1-MR-LSFD"), find(r, "L1-MR-MF"));
  ordering(c, find(r, "L1-MMSE-LSFD"), find(r, "L1-MMSE-MF"));
  ordering(c, find(r, "L2-MMSE"), find(r, "L2-MR"));

  double worst = 0;
  long n = 0;
  for (int si = 0; si < 3; ++si) {
    const Setup s = make_setup(cfg, si);
    for (int t = 0; t < 50; ++t) {
      RandomStream rng(cfg.seed, si, t, StreamPurpose::kTest);
      const Trial tr = draw_trial(s, rng);
      const auto V = global_mmse_combiners(tr.est, s.stats, s.scn);
      for (int k = 0; k < s.scn.K; ++k) {
        const double gen = level2_logdet(V[k], tr.est, s.stats, s.scn, k);
        const double opt = level2_logdet_optimal(tr.est, s.stats, s.scn, k);
        worst = std::max(worst, std::abs(gen - opt) / std::abs(opt));
        ++n;
      }
    }
  }
  c.check(worst <= 1e-9, fmt("optimal Level-2 expression equals the generic pipeline: max rel diff %.2e over %ld",
                             worst, n));
}

// ---------------------------------------------------------------------------

std::vector<SchemeResult> trend_point(SystemConfig cfg, const std::string& param, const std::string& value,
                                      const std::string& label = "") {
  cfg.analytic = false;
  cfg = apply_sweep_value(cfg, param, value);
  const auto t0 = std::chrono::steady_clock::now();
  auto r = run_point(cfg);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string line = label + param + "=" + value + ":";
  for (const auto& x : r) line += fmt(" %s %.4f", to_string(x.scheme).c_str(), x.sum_mean);
  std::printf("    %s (%.0f s)\n", line.c_str(), dt);
  return r;
}

void trends(Criterion& c) {
  const SystemConfig desk = profile("desk");
  const SystemConfig blocked = profile("desk-blocked");
  const auto& schemes = desk.schemes;
  c.note(fmt("%d setups x %d trials per point, fixed seed %llu", desk.n_setups, desk.n_trials,
             static_cast<unsigned long long>(desk.seed)));

  // (a) antennas per user
  const std::vector<int> nu{1, 2, 4, 6};
  std::vector<std::vector<SchemeResult>> a;
  for (int v : nu) a.push_back(trend_point(desk, "N_u", std::to_string(v)));
  for (const auto& sc : schemes) {
    std::vector<double> y;
    for (const auto& r : a) y.push_back(find(r, sc).sum_mean);
    bool inc = true, dim = true;
    std::string slopes;
    for (std::size_t i = 1; i < y.size(); ++i) {
      inc = inc && y[i] > y[i - 1];
      const double slope = (y[i] - y[i - 1]) / double(nu[i] - nu[i - 1]);
      slopes += fmt(" %.4f", slope);
      if (i >= 2) dim = dim && slope < (y[i - 1] - y[i - 2]) / double(nu[i - 1] - nu[i - 2]);
    }
    c.check(inc && dim, fmt("(a) %s: sum SE strictly increasing in N_u, gain per added antenna%s decreasing",
                            sc.c_str(), slopes.c_str()));
  }

  // (b) hardware quality
  struct Hw {
    const char *ap, *u;
  };
  const Hw hw[4] = {{"1", "1"}, {"0.95", "1"}, {"1", "0.95"}, {"0.9", "0.95"}};
  std::vector<std::vector<SchemeResult>> b;
  for (const auto& h : hw) {
    SystemConfig cfg = apply_sweep_value(desk, "kappa_ap", h.ap);
    b.push_back(trend_point(cfg, "kappa_u", h.u, std::string("kappa_ap=") + h.ap + " "));
  }
  for (const auto& sc : schemes) {
    double y[4];
    for (int i = 0; i < 4; ++i) y[i] = find(b[i], sc).sum_mean;
    c.check(y[0] >= y[1] && y[1] >= y[2] && y[2] >= y[3],
            fmt("(b) %s: (1,1) %.4f >= AP-only (0.95,1) %.4f >= user-only (1,0.95) %.4f >= (0.9,0.95) %.4f",
                sc.c_str(), y[0], y[1], y[2], y[3]));
  }

  // (c) blocked direct links: Level 2 over Level 1, growth in L
  const std::vector<int> Ls{4, 8, 16, 32};
  std::vector<std::vector<SchemeResult>> cl;
  for (int L : Ls) cl.push_back(trend_point(blocked, "L", std::to_string(L)));
  for (std::size_t i = 0; i < Ls.size(); ++i) {
    const auto& r = cl[i];
    const double l2mr = find(r, "L2-MR").sum_mean, l2mmse = find(r, "L2-MMSE").sum_mean;
    const double l1mr = std::max(find(r, "L1-MR-LSFD").sum_mean, find(r, "L1-MR-MF").sum_mean);
    const double l1mmse = std::max(find(r, "L1-MMSE-LSFD").sum_mean, find(r, "L1-MMSE-MF").sum_mean);
    c.check(l2mr >= l1mr && l2mmse >= l1mmse,
            fmt("(c) L=%d: L2-MR %.4f >= best L1-MR %.4f, L2-MMSE %.4f >= best L1-MMSE %.4f", Ls[i], l2mr, l1mr,
                l2mmse, l1mmse));
  }
  for (const auto& sc : schemes) {
    bool inc = true;
    for (std::size_t i = 1; i < cl.size(); ++i) inc = inc && find(cl[i], sc).sum_mean > find(cl[i - 1], sc).sum_mean;
    c.check(inc, fmt("(c) %s: sum SE increasing in L over {4,8,16,32}", sc.c_str()));
  }

  // (d) STAR against the split baseline, same L
  const auto star = trend_point(blocked, "ris_mode", "star");
  const auto split = trend_point(blocked, "ris_mode", "cris-split");
  for (const auto& sc : schemes)
    c.check(find(star, sc).sum_mean >= find(split, sc).sum_mean,
            fmt("(d) %s: STAR %.4f >= split baseline %.4f", sc.c_str(), find(star, sc).sum_mean,
                find(split, sc).sum_mean));
}

// ---------------------------------------------------------------------------

void invariants(Criterion& c) {
  SystemConfig cfg = profile("desk");
  double energy = 0;
  for (const auto mode : {RisMode::kStar, RisMode::kCrisSplit})
    for (const double amp : {0.3, 0.7071067811865476, 0.95}) {
      cfg.ris_mode = mode;
      cfg.star_amp_t = amp;
      for (int si = 0; si < 3; ++si) {
        const StarConfig st = make_setup(cfg, si).star;
        const RVec e = st.amp_t.cwiseAbs2() + st.amp_r.cwiseAbs2();
        energy = std::max(energy, (e.array() - 1.0).abs().maxCoeff());
        const CMat tt = st.theta(UserMode::kTransmit), tr = st.theta(UserMode::kReflect);
        const RVec e2 = tt.diagonal().cwiseAbs2() + tr.diagonal().cwiseAbs2();
        energy = std::max(energy, (e2.array() - 1.0).abs().maxCoeff());
      }
    }
  c.check(energy <= 1e-12, fmt("surface element energy |t|^2 + |r|^2 = 1: max deviation %.1e", energy));

  cfg = profile("desk");
  {
    RVec xi = RVec::Constant(cfg.N_u, 1.0 / cfg.N_u);
    const double kappa = 0.9, p = cfg.p_u;
    const int n = 400000;
    RandomStream rng(cfg.seed, 0, 0, StreamPurpose::kTest);
    const CMat eta = sample_tx_distortion(xi, kappa, p, n, rng);
    double worst = 0, exact = 0;
    for (int col = 0; col < cfg.N_u; ++col) {
      const double var = eta.col(col).squaredNorm() / n;
      worst = std::max(worst, std::abs(var / ((1 - kappa) * p * xi(col)) - 1.0));
      exact = std::max(exact, std::abs(kappa * p * xi(col) + (1 - kappa) * p * xi(col) - p * xi(col)));
    }
    c.check(exact <= 1e-15 && worst <= 0.02,
            fmt("transmit power conservation: split error %.1e, distortion variance within %.2f%%", exact,
                100 * worst));
  }

  double herm = 0, pd = 1, order = 1;
  for (const auto& name : {"desk", "desk-blocked", "acceptance"}) {
    const SystemConfig pc = profile(name);
    for (int si = 0; si < 3; ++si) {
      const Setup s = make_setup(pc, si);
      for (int m = 0; m < s.scn.M; ++m)
        for (int k = 0; k < s.scn.K; ++k) {
          const auto i = s.stats.idx(m, k);
          const CMat& psi = s.stats.Psi[i];
          herm = std::max(herm, hermitian_asymmetry(psi));
          pd = std::min(pd, min_eig(psi) / max_abs_eig(psi));
          const CMat& d = s.corr.delta(m, k);
          order = std::min(order, min_eig(CMat(d - s.stats.Delta_hat[i])) / max_abs_eig(d));
        }
    }
  }
  c.check(herm <= 1e-12 && pd > 0,
          fmt("Psi Hermitian (asymmetry %.1e) and positive definite (min eig / max eig %.2e)", herm, pd));
  c.check(order >= -1e-10, fmt("Delta - Delta_hat PSD: min eig / max eig %.1e", order));

  SystemConfig z = profile("acceptance");
  z.tau_c = z.effective_tau_p();
  z.n_setups = 2;
  z.n_trials = 20;
  z.warmup_trials = 20;
  z.jackknife_blocks = 2;
  bool all_zero = true;
  for (const bool analytic : {true, false}) {
    z.analytic = analytic;
    for (const auto& r : run_point(z)) all_zero = all_zero && r.se_mean.isZero(0.0) && r.sum_mean == 0.0;
  }
  c.check(all_zero, "tau_p = tau_c gives zero SE for every scheme (closed form and Monte Carlo)");
}

// ---------------------------------------------------------------------------

class ThreadsEnv {
 public:
  explicit ThreadsEnv(const char* v) {
    if (const char* old = std::getenv(kThreadsEnv)) old_ = old, had_ = true;
    ::setenv(kThreadsEnv, v, 1);
  }
  ~ThreadsEnv() {
    if (had_)
      ::setenv(kThreadsEnv, old_.c_str(), 1);
    else
      ::unsetenv(kThreadsEnv);
  }

 private:
  std::string old_;
  bool had_ = false;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void determinism(Criterion& c) {
  SystemConfig cfg = profile("acceptance");
  cfg.n_setups = 3;
  cfg.n_trials = 400;
  cfg.warmup_trials = 400;
  cfg.schemes = {"L1-MR-LSFD", "L1-MR-MF", "L1-MMSE-LSFD", "L1-MMSE-MF", "L2-MR", "L2-MMSE"};
  const auto dir = std::filesystem::temp_directory_path() / fmt("starcf_acceptance_%d", ::getpid());
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  for (const char* t : {"1", "4", "1"}) {
    ThreadsEnv env(t);
    const auto path = (dir / fmt("threads_%s_%zu.csv", t, files.size())).string();
    write_csv(run_sweep(cfg, "kappa_u", {"0.95", "1"}), path);
    files.push_back(path);
  }
  const std::string a = slurp(files[0]), b = slurp(files[1]), r = slurp(files[2]);
  c.check(!a.empty() && a == b, fmt("CSV with 1 and 4 threads byte-identical (%zu bytes)", a.size()));
  c.check(a == r, "repeat run with the same seed byte-identical");
  cfg.seed += 1;
  c.check(rows_to_csv(run_sweep(cfg, "kappa_u", {"0.95", "1"})) != a, "a different seed changes the output");
  std::filesystem::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<void(Criterion&)>>> all{
      {"closed-form oracle gate", closed_form_gate},
      {"estimator correctness", estimator},
      {"optimality orderings", orderings},
      {"trend reproduction", trends},
      {"conservation and structure invariants", invariants},
      {"determinism", determinism},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));

  int failed = 0;
  std::vector<std::string> summary;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    Criterion c(id);
    std::printf("criterion %d: %s\n", id, all[i].first);
    std::fflush(stdout);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      all[i].second(c);
    } catch (const std::exception& e) {
      c.check(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string line = fmt("criterion %d %s: %s (%.0f s)", id, all[i].first, c.passed() ? "PASS" : "FAIL", dt);
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    summary.push_back(line);
    if (!c.passed()) ++failed;
  }
  std::printf("\nsummary\n");
  for (const auto& s : summary) std::printf("  %s\n", s.c_str());
  return failed == 0 ? 0 : 1;
}
