// SPDX-License-Identifier: Apache-2.0
//
// Dense complex linear-algebra helpers shared by every module. Everything is
// templated on the Eigen expression type so the helpers compose with Eigen
// expressions; the simulation itself instantiates them with double.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace starcf {

template <typename Scalar>
using CMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

using cdouble = std::complex<double>;
using CMat = CMatrix<double>;
using CVec = CVector<double>;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

/// (A + A^H) / 2.
template <typename Derived>
auto hermitian_part(const Eigen::MatrixBase<Derived>& a) {
  using Plain = typename Derived::PlainObject;
  Plain out = (a + a.adjoint()) / typename Derived::RealScalar(2);
  return out;
}

/// Relative Hermitian asymmetry ||A - A^H||_F / max(||A||_F, tiny).
template <typename Derived>
typename Derived::RealScalar hermitian_asymmetry(const Eigen::MatrixBase<Derived>& a) {
  using Real = typename Derived::RealScalar;
  const Real nrm = a.norm();
  if (nrm == Real(0)) return Real(0);
  return (a - a.adjoint()).norm() / nrm;
}

/// Kronecker product A (x) B.
template <typename DA, typename DB>
auto kron(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  using Scalar = typename DA::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Column-stacking vectorization.
template <typename Derived>
auto vec(const Eigen::MatrixBase<Derived>& m) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out(m.size());
  Eigen::Index idx = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) out(idx++) = m(i, j);
  return out;
}

template <typename Derived>
auto unvec(const Eigen::MatrixBase<Derived>& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw std::invalid_argument("unvec: size mismatch");
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(rows, cols);
  Eigen::Index idx = 0;
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = v(idx++);
  return out;
}

/// Index helper for matrices acting on vec(G), G of size inner x outer.
/// Block (a, b) is the inner x inner sub-matrix at rows a*inner.., cols b*inner..
/// This is the single place the sub-block convention lives.
struct KronIndex {
  Eigen::Index inner = 1;
  Eigen::Index outer = 1;

  template <typename Derived>
  auto block(const Eigen::MatrixBase<Derived>& x, Eigen::Index a, Eigen::Index b) const {
    return x.block(a * inner, b * inner, inner, inner);
  }
  /// Rows of block-row a (inner x inner*outer).
  template <typename Derived>
  auto block_row(const Eigen::MatrixBase<Derived>& x, Eigen::Index a) const {
    return x.middleRows(a * inner, inner);
  }
};

/// Partial trace over the inner (fast) index: outer x outer, entry (a,b) = tr(X^{a,b}).
template <typename Derived>
auto partial_trace_inner(const Eigen::MatrixBase<Derived>& x, const KronIndex& ix) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(ix.outer, ix.outer);
  for (Eigen::Index a = 0; a < ix.outer; ++a)
    for (Eigen::Index b = 0; b < ix.outer; ++b) out(a, b) = ix.block(x, a, b).trace();
  return out;
}

/// Partial trace over the outer (slow) index: inner x inner, sum_a X^{a,a}.
template <typename Derived>
auto partial_trace_outer(const Eigen::MatrixBase<Derived>& x, const KronIndex& ix) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(ix.inner, ix.inner);
  for (Eigen::Index a = 0; a < ix.outer; ++a) out += ix.block(x, a, a);
  return out;
}

/// tr(X Y) without forming the product.
template <typename DX, typename DY>
typename DX::Scalar trace_of_product(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y) {
  return (x.array() * y.transpose().array()).sum();
}

/// Eigenvalue floor used when clipping numerically rank-deficient PSD matrices.
inline constexpr double kPsdClipRelTol = 1e-10;

/// Result of projecting a Hermitian matrix onto the PSD cone.
template <typename Scalar>
struct PsdFactor {
  CMatrix<Scalar> root;      // principal square root
  CMatrix<Scalar> clipped;   // V max(D,0) V^H
  int n_clipped = 0;         // eigenvalues below the floor that were zeroed
  Scalar min_eigenvalue = 0;
};

/// Principal PSD square root via Hermitian eigendecomposition. Eigenvalues
/// below rel_tol * max-eigenvalue are zeroed; anything more negative than
/// -1e-10 * max is counted in n_clipped.
template <typename Derived>
PsdFactor<typename Derived::RealScalar> psd_factor(const Eigen::MatrixBase<Derived>& h,
                                                  double rel_tol = kPsdClipRelTol) {
  using Real = typename Derived::RealScalar;
  using Mat = CMatrix<Real>;
  if (h.rows() != h.cols()) throw std::invalid_argument("psd_factor: matrix not square");
  PsdFactor<Real> out;
  if (h.rows() == 0) {
    out.root = Mat(0, 0);
    out.clipped = Mat(0, 0);
    return out;
  }
  Mat herm = hermitian_part(h.template cast<std::complex<Real>>());
  Eigen::SelfAdjointEigenSolver<Mat> es(herm);
  if (es.info() != Eigen::Success) throw std::runtime_error("psd_factor: eigendecomposition failed");
  auto ev = es.eigenvalues();
  const Real top = std::max(ev.cwiseAbs().maxCoeff(), Real(0));
  const Real floor = Real(rel_tol) * top;
  out.min_eigenvalue = ev.minCoeff();
  Eigen::Matrix<Real, Eigen::Dynamic, 1> lam(ev.size()), sq(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    Real e = ev(i);
    if (e < -floor) ++out.n_clipped;
    if (e < floor) e = Real(0);
    lam(i) = e;
    sq(i) = std::sqrt(e);
  }
  const Mat& v = es.eigenvectors();
  out.root = v * sq.template cast<std::complex<Real>>().asDiagonal() * v.adjoint();
  out.clipped = v * lam.template cast<std::complex<Real>>().asDiagonal() * v.adjoint();
  return out;
}

template <typename Derived>
auto psd_sqrt(const Eigen::MatrixBase<Derived>& h) {
  return psd_factor(h).root;
}

/// Cholesky factorization of a Hermitian positive-definite matrix; throws on failure.
template <typename Derived>
auto hpd_factor(const Eigen::MatrixBase<Derived>& a, const char* what) {
  using Mat = typename Derived::PlainObject;
  Eigen::LLT<Mat> llt(hermitian_part(a));
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": matrix is not Hermitian positive definite");
  return llt;
}

/// log2 |I + D^H S^{-1} D| for Hermitian PSD S. S is symmetrized first; an
/// asymmetry beyond asym_tol is an error. Eigenvalues of the argument are
/// floored at zero before taking the log.
template <typename DD, typename DS>
double log2det_sinr(const Eigen::MatrixBase<DD>& d, const Eigen::MatrixBase<DS>& s,
                    double asym_tol = 1e-8) {
  using Mat = CMatrix<double>;
  if (hermitian_asymmetry(s) > asym_tol)
    throw std::runtime_error("log2det_sinr: interference covariance is not Hermitian");
  Mat sh = hermitian_part(s);
  Eigen::LDLT<Mat> ldlt(sh);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("log2det_sinr: factorization failed");
  Mat arg = d.adjoint() * ldlt.solve(Mat(d));
  arg = hermitian_part(arg);
  Eigen::SelfAdjointEigenSolver<Mat> es(arg, Eigen::EigenvaluesOnly);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    acc += std::log2(1.0 + std::max(0.0, es.eigenvalues()(i)));
  return acc;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace starcf
