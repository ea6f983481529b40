// SPDX-License-Identifier: Apache-2.0

#include "starcf/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace starcf {

void Welford::add(const CVec& x) {
  if (mean_.size() != x.size()) throw std::invalid_argument("Welford::add: size mismatch");
  ++n_;
  const double inv = 1.0 / double(n_);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const cdouble d = x[i] - mean_[i];
    mean_[i] += d * inv;
    m2_[i] += (std::conj(d) * (x[i] - mean_[i])).real();
  }
}

void Welford::merge(const Welford& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  if (mean_.size() != other.mean_.size()) throw std::invalid_argument("Welford::merge: size mismatch");
  const long n = n_ + other.n_;
  const CVec delta = other.mean_ - mean_;
  mean_ += delta * (double(other.n_) / double(n));
  m2_ += other.m2_ + delta.cwiseAbs2() * (double(n_) * double(other.n_) / double(n));
  n_ = n;
}

RVec Welford::variance() const {
  if (n_ < 2) return RVec::Zero(m2_.size());
  return m2_ / double(n_ - 1);
}

RVec Welford::std_error() const {
  if (n_ < 2) return RVec::Zero(m2_.size());
  return (variance() / double(n_)).cwiseSqrt();
}

Level1Moments Level1Moments::zeros(int M, int K, int N_u) {
  Level1Moments m;
  m.M = M;
  m.K = K;
  m.N_u = N_u;
  const int n = M * N_u;
  m.H.assign(K, CMat::Zero(n, N_u));
  m.U.assign(static_cast<std::size_t>(K * K), CMat::Zero(n, n));
  m.Gamma.assign(K, CMat::Zero(n, n));
  m.Lambda.assign(K, CMat::Zero(n, n));
  return m;
}

Eigen::Index Level1Moments::packed_size() const {
  const Eigen::Index n = Eigen::Index(M) * N_u;
  return K * n * N_u + Eigen::Index(K) * K * n * n + 2 * K * n * n;
}

namespace {

template <typename Fn>
void visit(const Level1Moments& m, Fn&& fn) {
  for (const auto& x : m.H) fn(x);
  for (const auto& x : m.U) fn(x);
  for (const auto& x : m.Gamma) fn(x);
  for (const auto& x : m.Lambda) fn(x);
}

template <typename Fn>
void visit_mut(Level1Moments& m, Fn&& fn) {
  for (auto& x : m.H) fn(x);
  for (auto& x : m.U) fn(x);
  for (auto& x : m.Gamma) fn(x);
  for (auto& x : m.Lambda) fn(x);
}

}  // namespace

CVec Level1Moments::pack() const {
  CVec out(packed_size());
  Eigen::Index o = 0;
  visit(*this, [&](const CMat& x) {
    out.segment(o, x.size()) = Eigen::Map<const CVec>(x.data(), x.size());
    o += x.size();
  });
  return out;
}

void Level1Moments::unpack(const CVec& v) {
  if (v.size() != packed_size()) throw std::invalid_argument("Level1Moments::unpack: size mismatch");
  Eigen::Index o = 0;
  visit_mut(*this, [&](CMat& x) {
    Eigen::Map<CVec>(x.data(), x.size()) = v.segment(o, x.size());
    o += x.size();
  });
}

CVec level1_sample(const std::vector<CMat>& V, const ChannelRealization& ch, const EstimationStatistics& stats,
                   const Scenario& scn) {
  const int M = scn.M, K = scn.K, N_u = scn.N_u;
  const Eigen::Index n = Eigen::Index(M) * N_u;
  // written straight into the packed layout: H, U, Gamma, Lambda
  CVec out = CVec::Zero(K * n * N_u + Eigen::Index(K) * K * n * n + 2 * K * n * n);
  const Eigen::Index oU = K * n * N_u;
  const Eigen::Index oG = oU + Eigen::Index(K) * K * n * n;
  const Eigen::Index oL = oG + K * n * n;
  CMat f(n, N_u);
  for (int k = 0; k < K; ++k) {
    for (int kp = 0; kp < K; ++kp) {
      for (int m = 0; m < M; ++m)
        f.middleRows(m * N_u, N_u).noalias() = std::sqrt(scn.kappa_r(m)) * V[m * K + k].adjoint() * ch.at(m, kp);
      Eigen::Map<CMat> u(out.data() + oU + (Eigen::Index(k) * K + kp) * n * n, n, n);
      u.noalias() = f * scn.xi[kp].asDiagonal() * f.adjoint();
      if (kp == k) Eigen::Map<CMat>(out.data() + k * n * N_u, n, N_u) = std::sqrt(scn.kappa_t(k)) * f;
    }
    Eigen::Map<CMat> g(out.data() + oG + k * n * n, n, n);
    Eigen::Map<CMat> l(out.data() + oL + k * n * n, n, n);
    for (int m = 0; m < M; ++m) {
      const CMat& v = V[m * K + k];
      g.block(m * N_u, m * N_u, N_u, N_u).noalias() = v.adjoint() * stats.C_bar[m] * v;
      l.block(m * N_u, m * N_u, N_u, N_u).noalias() = v.adjoint() * v;
    }
  }
  return out;
}

Level1Accumulator::Level1Accumulator(int M, int K, int N_u)
    : shape_(Level1Moments::zeros(M, K, N_u)), acc_(shape_.packed_size()) {}

void Level1Accumulator::add(const std::vector<CMat>& V, const ChannelRealization& ch,
                            const EstimationStatistics& stats, const Scenario& scn) {
  acc_.add(level1_sample(V, ch, stats, scn));
}

Level1Moments Level1Accumulator::mean() const {
  Level1Moments m = shape_;
  m.unpack(acc_.mean());
  return m;
}

Level1Moments Level1Accumulator::std_error() const {
  Level1Moments m = shape_;
  m.unpack(acc_.std_error().cast<cdouble>());
  return m;
}

std::vector<CMat> lsfd_from_moments(const Level1Moments& mom, const Scenario& scn) {
  std::vector<CMat> A(mom.K);
  for (int k = 0; k < mom.K; ++k) {
    std::vector<CMat> u(mom.K);
    for (int kp = 0; kp < mom.K; ++kp) u[kp] = mom.u(k, kp);
    A[k] = lsfd_weights(u, mom.Gamma[k], mom.Lambda[k], mom.H[k], scn.power_ctrl_sqrt(k), scn.cfg.p_u,
                        scn.cfg.sigma2);
  }
  return A;
}

std::vector<CMat> mf_from_moments(const Level1Moments& mom) {
  return std::vector<CMat>(mom.K, mf_weights(mom.M, mom.N_u));
}

Level1Result se_level1(const Level1Moments& mom, const std::vector<CMat>& A, const Scenario& scn) {
  const double p = scn.cfg.p_u;
  const double s2 = scn.cfg.sigma2;
  Level1Result r;
  r.se = RVec::Zero(mom.K);
  r.terms.resize(mom.K);
  for (int k = 0; k < mom.K; ++k) {
    const CMat& a = A[k];
    const CMat d = std::sqrt(p) * a.adjoint() * mom.H[k] * scn.power_ctrl_sqrt(k);
    const CMat ddh = d * d.adjoint();
    CMat sigma = -ddh + a.adjoint() * mom.Gamma[k] * a + s2 * a.adjoint() * mom.Lambda[k] * a;
    TermTraces& t = r.terms[k];
    for (int kp = 0; kp < mom.K; ++kp) {
      const CMat au = p * a.adjoint() * mom.u(k, kp) * a;
      sigma += au;
      const double tr = au.trace().real();
      const double kt = scn.kappa_t(kp);
      if (kp == k)
        t.BU = kt * tr - ddh.trace().real();
      else
        t.IU += kt * tr;
      t.TD += (1.0 - kt) * tr;
    }
    t.DS = ddh.trace().real();
    t.RD = (a.adjoint() * mom.Gamma[k] * a).trace().real();
    t.NS = s2 * (a.adjoint() * mom.Lambda[k] * a).trace().real();
    // Sigma is PSD up to rounding; the relative tolerance is generous because
    // -DD^H cancels against the k'=k interference term
    r.se(k) = scn.prelog() * log2det_sinr(d, sigma, 1e-8);
  }
  return r;
}

RVec jackknife_se_stderr(const std::vector<Level1Accumulator>& blocks, const std::vector<CMat>& A,
                         const Scenario& scn) {
  const int B = static_cast<int>(blocks.size());
  if (B < 2) return RVec::Zero(scn.K + 1);
  Level1Accumulator total = blocks.front();
  for (int b = 1; b < B; ++b) total.merge(blocks[b]);
  const double n = double(total.count());
  const CVec sum = total.raw().mean() * n;
  std::vector<RVec> loo(B);
  RVec avg = RVec::Zero(scn.K + 1);
  for (int b = 0; b < B; ++b) {
    const double nb = double(blocks[b].count());
    Level1Moments m = Level1Moments::zeros(scn.M, scn.K, scn.N_u);
    m.unpack((sum - blocks[b].raw().mean() * nb) / (n - nb));
    const RVec se = se_level1(m, A, scn).se;
    loo[b].resize(scn.K + 1);
    loo[b] << se, se.sum();
    avg += loo[b] / double(B);
  }
  RVec acc = RVec::Zero(scn.K + 1);
  for (int b = 0; b < B; ++b) acc += (loo[b] - avg).cwiseAbs2();
  return (acc * (double(B - 1) / double(B))).cwiseSqrt();
}

double level2_logdet(const CMat& V, const ChannelEstimate& est, const EstimationStatistics& stats,
                     const Scenario& scn, int k) {
  const CMat b = level2_signal(est, scn, k);
  const CMat s_in = level2_interference(est, stats, scn, k);
  const CMat d = V.adjoint() * b;
  const CMat sigma = V.adjoint() * s_in * V;
  return log2det_sinr(d, sigma);
}

double level2_logdet_optimal(const ChannelEstimate& est, const EstimationStatistics& stats, const Scenario& scn,
                             int k) {
  const CMat b = level2_signal(est, scn, k);
  return log2det_sinr(b, level2_interference(est, stats, scn, k));
}

RVec level2_trial(Combiner c, const ChannelEstimate& est, const EstimationStatistics& stats,
                  const Scenario& scn) {
  RVec out(scn.K);
  for (int k = 0; k < scn.K; ++k) {
    if (c == Combiner::kGlobalMMSE)
      out(k) = level2_logdet_optimal(est, stats, scn, k);
    else if (c == Combiner::kMR)
      out(k) = level2_logdet(mr_collective(est, k), est, stats, scn, k);
    else
      throw std::invalid_argument("level2_trial: local MMSE is a Level-1 combiner");
  }
  return out;
}

}  // namespace starcf
