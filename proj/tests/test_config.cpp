// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "starcf/config.hpp"

using namespace starcf;

TEST_SUITE("config") {
  TEST_CASE("ini parsing converts dBm and lists") {
    const auto cfg = parse_config(
        "[system]\nM = 3\nK = 4\np_p_dbm = 20\nsigma2_dbm = -91\n"
        "[hardware]\nkappa_ap = 0.9\nkappa_u = 1, 0.95, 0.9, 1\n"
        "[mc]\nschemes = L1-MR-LSFD, L2-MMSE\n");
    CHECK(cfg.M == 3);
    CHECK(cfg.K == 4);
    CHECK(cfg.p_p == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(cfg.sigma2 == doctest::Approx(std::pow(10.0, -12.1)).epsilon(1e-12));
    CHECK(cfg.kappa_t(1) == 0.95);
    CHECK(cfg.kappa_r(2) == 0.9);
    REQUIRE(cfg.schemes.size() == 2);
    CHECK(cfg.schemes[1] == "L2-MMSE");
  }

  TEST_CASE("unknown keys and sections are errors") {
    CHECK_THROWS_AS(parse_config("[system]\nMM = 3\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("[radio]\nM = 3\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("[system]\nM = three\n"), std::invalid_argument);
    SystemConfig c;
    CHECK_THROWS_AS(apply_override(c, "nonsense=1"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(c, "M"), std::invalid_argument);
  }

  TEST_CASE("overrides accept bare and qualified keys") {
    SystemConfig c;
    apply_override(c, "M=7");
    apply_override(c, "geometry.ris_mode=cris-split");
    apply_override(c, "direct_blocked=true");
    CHECK(c.M == 7);
    CHECK(c.ris_mode == RisMode::kCrisSplit);
    CHECK(c.direct_blocked);
    CHECK_THROWS_AS(apply_override(c, "system.ris_mode=star"), std::invalid_argument);
  }

  TEST_CASE("ini round trip preserves the digest") {
    for (const auto& [name, cfg] : builtin_profiles()) {
      const auto back = parse_config(to_ini(cfg));
      CHECK_MESSAGE(back.digest() == cfg.digest(), name);
      CHECK(back.to_map() == cfg.to_map());
    }
    SystemConfig a, b;
    b.seed = 2;
    CHECK(a.digest() != b.digest());
  }

  TEST_CASE("pilot length rule and invariants") {
    SystemConfig c;
    c.K = 5;
    c.N_u = 2;
    CHECK(c.effective_tau_p() == 6);
    c.tau_p = 5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.tau_p = 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.tau_p = 0;
    c.ris_mode = RisMode::kCrisSplit;
    c.L_h = 3;
    c.L_v = 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.L_h = 4;
    CHECK_NOTHROW(c.validate());
    c.kappa_ap = {0.9, 0.8};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.kappa_ap = {1.2};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }

  TEST_CASE("acceptance profile matches the gate configuration") {
    const auto c = builtin_profiles().at("acceptance");
    CHECK(c.M == 4);
    CHECK(c.K == 2);
    CHECK(c.N_ap == 2);
    CHECK(c.N_u == 2);
    CHECK(c.L() == 8);
    CHECK(c.tau_c == 200);
    CHECK(c.effective_tau_p() == c.K * c.N_u / 2);
    CHECK(c.kappa_r(0) == 0.9);
    CHECK(c.kappa_t(0) == 0.95);
    CHECK(10.0 * std::log10(c.p_p * 1e3) == doctest::Approx(20.0));
    CHECK(10.0 * std::log10(c.p_u * 1e3) == doctest::Approx(20.0));
    CHECK(10.0 * std::log10(c.sigma2 * 1e3) == doctest::Approx(-91.0));
    CHECK(c.n_trials == 100000);
  }

  TEST_CASE("three-slope path loss") {
    PathLossModel pl;
    // hand-evaluated: far region -140.7 - 35 log10(d_km)
    CHECK(pl.path_loss_db(200.0) == doctest::Approx(-140.7 - 35.0 * std::log10(0.2)));
    CHECK(pl.path_loss_db(30.0) ==
          doctest::Approx(-140.7 - 15.0 * std::log10(0.05) - 20.0 * std::log10(0.03)));
    CHECK(pl.path_loss_db(5.0) == pl.path_loss_db(10.0));
    // continuous at both breakpoints
    CHECK(pl.path_loss_db(50.0 + 1e-9) == doctest::Approx(pl.path_loss_db(50.0)).epsilon(1e-9));
    CHECK(pl.path_loss_db(10.0 + 1e-9) == doctest::Approx(pl.path_loss_db(10.0)).epsilon(1e-9));
    double prev = pl.path_loss_db(10.0);
    for (double d = 11.0; d < 2000.0; d *= 1.3) {
      const double v = pl.path_loss_db(d);
      CHECK(v < prev);
      prev = v;
    }
  }
}
