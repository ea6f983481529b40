// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures and Monte Carlo helpers for the unit tests.

#pragma once

#include <vector>

#include "starcf/experiment.hpp"
#include "starcf/rng.hpp"

namespace starcf::test {

/// Two APs, two users, 2x2 antennas, 2x2 surface.
inline SystemConfig small_config() {
  SystemConfig c;
  c.M = 2;
  c.K = 2;
  c.N_ap = 2;
  c.N_u = 2;
  c.L_h = 2;
  c.L_v = 2;
  c.lambda = 299792458.0 / 1.9e9;
  c.seed = 7;
  c.n_trials = 200;
  c.warmup_trials = 200;
  c.jackknife_blocks = 4;
  return c;
}

/// The cascaded link carries most of the energy and impairments are strong.
inline SystemConfig stressed_config() {
  SystemConfig c = small_config();
  c.direct_blocked = false;
  c.ris_pl_const_db = 60.0;
  c.kappa_ap = {0.6};
  c.kappa_u = {0.7};
  return c;
}

/// Running mean of x x^H and of y x^H.
struct CovAccumulator {
  CMat sum;
  long n = 0;
  void add(const CVec& x, const CVec& y) {
    if (n == 0) sum = CMat::Zero(x.size(), y.size());
    sum += x * y.adjoint();
    ++n;
  }
  void add(const CVec& x) { add(x, x); }
  CMat mean() const { return sum / double(n); }
};

inline double rel_frobenius(const CMat& a, const CMat& ref) { return (a - ref).norm() / ref.norm(); }

inline double min_eigenvalue(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double max_abs_eigenvalue(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace starcf::test
