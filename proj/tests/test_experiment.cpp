// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "starcf/experiment.hpp"
#include "support.hpp"

using namespace starcf;

namespace {

SystemConfig quick_config() {
  SystemConfig c = test::small_config();
  c.n_setups = 2;
  c.n_trials = 60;
  c.warmup_trials = 60;
  c.jackknife_blocks = 3;
  c.analytic = false;
  return c;
}

struct ThreadsEnv {
  explicit ThreadsEnv(const char* v) { setenv(kThreadsEnv, v, 1); }
  ~ThreadsEnv() { unsetenv(kThreadsEnv); }
};

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("starcf_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("scheme names round trip") {
    for (const char* n : {"L1-MR-LSFD", "L1-MR-MF", "L1-MMSE-LSFD", "L1-MMSE-MF", "L2-MR", "L2-MMSE"})
      CHECK(to_string(parse_scheme(n)) == n);
    CHECK_THROWS_AS(parse_scheme("L3-MR"), std::invalid_argument);
  }

  TEST_CASE("thread count from the environment") {
    {
      ThreadsEnv env("3");
      CHECK(worker_threads() == 3);
    }
    {
      ThreadsEnv env("zero");
      CHECK(worker_threads() >= 1);
    }
  }

  TEST_CASE("results do not depend on the thread count") {
    const SystemConfig c = quick_config();
    std::string one, four;
    {
      ThreadsEnv env("1");
      one = rows_to_csv(to_rows(run_point(c), "none", "-"));
    }
    {
      ThreadsEnv env("4");
      four = rows_to_csv(to_rows(run_point(c), "none", "-"));
    }
    CHECK(one == four);
    CHECK(rows_to_csv(to_rows(run_point(c), "none", "-")) == one);
  }

  TEST_CASE("closed-form path gives zero stderr") {
    SystemConfig c = quick_config();
    c.analytic = true;
    c.n_setups = 1;
    c.schemes = {"L1-MR-LSFD", "L1-MR-MF", "L2-MR"};
    const auto r = run_point(c);
    REQUIRE(r.size() == 3);
    CHECK(r[0].closed_form);
    CHECK(r[0].n_trials == 0);
    CHECK(r[0].se_stderr.isZero(0.0));
    CHECK(r[0].sum_stderr == 0.0);
    CHECK_FALSE(r[2].closed_form);
    CHECK(r[2].se_stderr.minCoeff() > 0.0);
    CHECK(r[0].sum_mean == doctest::Approx(r[0].se_mean.sum()));
    const auto s = make_setup(c, 0);
    CHECK(r[0].se_mean == se_level1_closed(s.scn, s.corr, s.stats, Decoder::kLSFD).result.se);
  }

  TEST_CASE("per-setup sums and their Monte Carlo errors") {
    SystemConfig c = quick_config();
    c.n_setups = 3;
    for (const auto& r : run_point(c)) {
      REQUIRE(r.setup_sum.size() == 3);
      REQUIRE(r.setup_sum_stderr.size() == 3);
      CHECK(r.setup_sum.mean() == doctest::Approx(r.sum_mean).epsilon(1e-12));
      if (r.closed_form)
        CHECK(r.setup_sum_stderr.isZero(0.0));
      else
        CHECK(r.setup_sum_stderr.minCoeff() > 0.0);
    }
  }

  TEST_CASE("CSV round trip") {
    ResultRow r{"N_u", "2", 1, "MR", "LSFD", "sum", 1.0 / 3.0, 1e-17, 10, 400};
    const std::string text = rows_to_csv({r});
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
    const auto back = rows_from_csv(text);
    REQUIRE(back.size() == 1);
    CHECK(back[0] == r);
    ResultRow q = r;
    q.sweep_value = "0.9,0.95";
    CHECK(rows_from_csv(rows_to_csv({q}))[0] == q);
    CHECK_THROWS(rows_from_csv("a,b\n"));
    CHECK_THROWS(write_csv({}, "/tmp/never.csv"));
  }

  TEST_CASE("manifest carries the config digest") {
    const SystemConfig c = quick_config();
    const auto dir = scratch_dir("manifest");
    write_manifest(c, "run", 1.5, (dir / "manifest.json").string());
    std::ifstream in(dir / "manifest.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j["config_digest"] == c.digest());
    CHECK(j["seed"] == c.seed);
    CHECK(j["version"] == kVersion);
    CHECK(j["wall_time_s"] == 1.5);
    CHECK(j["config"]["system.M"] == "2");
  }

  TEST_CASE("sweep emits one curve file per scheme and value") {
    SystemConfig c = quick_config();
    c.n_setups = 1;
    c.n_trials = 20;
    c.schemes = {"L1-MR-MF", "L2-MR"};
    const auto rows = run_sweep(c, "N_u", {"1", "2"});
    CHECK(rows.size() == 2 * 2 * (c.K + 1));
    const auto dir = scratch_dir("curves");
    const auto files = write_curves(rows, dir.string());
    CHECK(files.size() == 4);
    for (const auto& f : files) CHECK(std::filesystem::exists(f));
    CHECK(rows.front().sweep_param == "N_u");
    CHECK_THROWS(run_sweep(c, "sigma2", {"1"}));
    CHECK_THROWS(run_sweep(c, "ris_mode", {"mirror"}));
  }

  TEST_CASE("sweep values map onto the config") {
    const SystemConfig c = quick_config();
    CHECK(apply_sweep_value(c, "L", "8").L() == 8);
    CHECK(apply_sweep_value(c, "L", "8").L_v == c.L_v);
    CHECK(apply_sweep_value(c, "L", "5").L() == 5);
    CHECK(apply_sweep_value(c, "kappa_u", "0.5").kappa_t(0) == 0.5);
    CHECK(apply_sweep_value(c, "ris_mode", "cris-split").ris_mode == RisMode::kCrisSplit);
    CHECK(apply_sweep_value(c, "direct_blocked", "true").direct_blocked);
    CHECK_THROWS(apply_sweep_value(c, "L", "x"));
    CHECK_THROWS(apply_sweep_value(apply_sweep_value(c, "L", "5"), "ris_mode", "cris-split"));
  }

  TEST_CASE("validation gate and its negative control") {
    // 2% on the SE needs a usable SNR at this trial count
    SystemConfig c = test::small_config();
    c.sigma2 = dbm_to_watt(-110.0);
    const auto good = validate(c, 20000);
    CHECK(good.pass);
    CHECK(good.gaps.size() == 2 * static_cast<std::size_t>(c.K));
    CHECK(good.moments.size() == static_cast<std::size_t>(c.K * (3 + c.K)));
    ClosedFormOptions bad;
    bad.delta_hat_scale = 1.05;
    const auto perturbed = validate(c, 20000, 0, bad);
    CHECK_FALSE(perturbed.pass);
    CHECK(perturbed.max_z > kMaxZ);
  }

  TEST_CASE("max z-score") {
    CMat a(1, 2), b(1, 2), e(1, 2);
    a << 1.0, 2.0;
    b << 1.1, 2.0;
    e << 0.05, 0.0;
    CHECK(max_z_score(a, b, e) == doctest::Approx(2.0));
    b(0, 1) = 2.5;
    CHECK(std::isinf(max_z_score(a, b, e)));
  }
}
