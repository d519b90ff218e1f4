#include "igpk/structmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <spdlog/spdlog.h>

#include "igpk/error.hpp"
#include "igpk/log.hpp"

namespace igpk {

namespace {

constexpr Eigen::Index kBlock = 96;
constexpr int kMaxDeltaDoublings = 6;

double inf_norm(const Eigen::MatrixXd& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
}

struct Givens {
  double c = 1.0;
  double s = 0.0;
  double h = 0.0;
};

// Rotation with [c s; -s c] [a; b] = [h; 0].
Givens make_givens(double a, double b) {
  if (b == 0.0) return {1.0, 0.0, a};
  const double h = std::hypot(a, b);
  return {a / h, b / h, h};
}

// Two contiguous rows, entries [c0, end).
void rotate(double* __restrict rp, double* __restrict rq, Eigen::Index c0, Eigen::Index end,
            const Givens& g) {
  for (Eigen::Index j = c0; j < end; ++j) {
    const double x = rp[j];
    const double y = rq[j];
    rp[j] = g.c * x + g.s * y;
    rq[j] = -g.s * x + g.c * y;
  }
}

// rotate() with the first row read from src instead of rp.
void rotate_from(const double* __restrict src, double* __restrict rp, double* __restrict rq,
                 Eigen::Index c0, Eigen::Index end, const Givens& g) {
  for (Eigen::Index j = c0; j < end; ++j) {
    const double x = src[j];
    const double y = rq[j];
    rp[j] = g.c * x + g.s * y;
    rq[j] = -g.s * x + g.c * y;
  }
}

// Unblocked bumped factorization of the lower triangle of a (in place).
void bumped_panel(Eigen::Ref<Eigen::MatrixXd> a, Eigen::Ref<Eigen::VectorXd> bump, double tol) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j) - a.row(j).head(j).squaredNorm();
    if (d <= tol) {
      // Near-zero pivots go to tol; clearly negative ones are reflected, since
      // raising them only to tol blows up the rest of the column.
      const double raised = std::max(tol, -d);
      bump[j] = raised - d;
      d = raised;
    }
    const double ljj = std::sqrt(d);
    a(j, j) = ljj;
    const Eigen::Index m = n - j - 1;
    if (m > 0) {
      a.col(j).tail(m).noalias() -= a.bottomLeftCorner(m, j) * a.row(j).head(j).transpose();
      a.col(j).tail(m) /= ljj;
    }
  }
}

}  // namespace

VariogramMatrix build_gamma(const VariogramModel& model, const LocationSet& locs) {
  const auto n = static_cast<Eigen::Index>(locs.size());
  const Eigen::MatrixXd& p = locs.matrix();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = model.eval_rows(p.row(i), p.row(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return {std::move(g), locs};
}

Eigen::VectorXd gamma_vector(const VariogramModel& model, const LocationSet& locs,
                             const Location& t) {
  const auto n = static_cast<Eigen::Index>(locs.size());
  if (n > 0 && t.dim() != locs.dim()) throw DomainError("target dimension differs from locations");
  Eigen::VectorXd g(n);
  const Eigen::RowVectorXd tr = t.coords().transpose();
  for (Eigen::Index i = 0; i < n; ++i) g[i] = model.eval_rows(locs.matrix().row(i), tr);
  return g;
}

Eigen::MatrixXd cross_gamma(const VariogramModel& model, const LocationSet& a,
                            const LocationSet& b) {
  const auto na = static_cast<Eigen::Index>(a.size());
  const auto nb = static_cast<Eigen::Index>(b.size());
  Eigen::MatrixXd g(na, nb);
  for (Eigen::Index j = 0; j < nb; ++j) {
    for (Eigen::Index i = 0; i < na; ++i) {
      g(i, j) = model.eval_rows(a.matrix().row(i), b.matrix().row(j));
    }
  }
  return g;
}

CndDiagnostics cnd_diagnostics(const Eigen::MatrixXd& gamma) {
  CndDiagnostics out;
  const Eigen::Index n = gamma.rows();
  if (n == 0 || gamma.cols() != n) throw DomainError("variogram matrix must be square and nonempty");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gamma);
  if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  out.eigenvalues = es.eigenvalues();
  const double scale = out.eigenvalues.cwiseAbs().maxCoeff();
  if (scale == 0.0 || out.eigenvalues.cwiseAbs().minCoeff() <= 1e-12 * scale) {
    out.singular = true;
    return out;
  }
  out.n_pos_eig = static_cast<int>((out.eigenvalues.array() > 0.0).count());
  out.perron = es.eigenvectors().col(n - 1);
  if (out.perron.sum() < 0.0) out.perron = -out.perron;
  const Eigen::VectorXd e = Eigen::VectorXd::Ones(n);
  out.e_Ginv_e = e.dot(gamma.partialPivLu().solve(e));
  return out;
}

double choose_delta(const Eigen::MatrixXd& gamma) {
  const Eigen::Index n = gamma.rows();
  if (n <= 1) return 1.0;
  const Eigen::VectorXd ge = gamma.rowwise().sum();
  const double den = ge.sum();
  if (!(den > 0.0)) throw DomainError("variogram matrix is degenerate (e'Gamma e <= 0)");
  return ge.squaredNorm() / den;
}

BumpedCholesky bumped_cholesky(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw DomainError("bumped_cholesky needs a square matrix");
  BumpedCholesky out;
  out.tol = 1e-12 * inf_norm(a);
  if (out.tol == 0.0) out.tol = std::numeric_limits<double>::min();
  out.bump = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd w = a;
  for (Eigen::Index k = 0; k < n; k += kBlock) {
    const Eigen::Index kb = std::min(kBlock, n - k);
    const Eigen::Index m = n - k - kb;
    bumped_panel(w.block(k, k, kb, kb), out.bump.segment(k, kb), out.tol);
    if (m > 0) {
      auto l11 = w.block(k, k, kb, kb).triangularView<Eigen::Lower>();
      auto a21 = w.block(k + kb, k, m, kb);
      l11.transpose().solveInPlace<Eigen::OnTheRight>(a21);
      w.block(k + kb, k + kb, m, m).selfadjointView<Eigen::Lower>().rankUpdate(a21, -1.0);
    }
  }
  out.L = w.triangularView<Eigen::Lower>();
  return out;
}

double ShiftedCholesky::bump_max() const { return bump.size() ? bump.maxCoeff() : 0.0; }

ShiftedCholesky shifted_cholesky(const Eigen::MatrixXd& gamma, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("delta must be positive");
  const Eigen::Index n = gamma.rows();
  if (gamma.cols() != n) throw DomainError("variogram matrix must be square");
  Eigen::MatrixXd a = -gamma;
  a.array() += delta;
  auto bc = bumped_cholesky(a);
  ShiftedCholesky sc;
  sc.delta = delta;
  sc.L0 = std::move(bc.L);
  sc.bump = std::move(bc.bump);
  sc.bump_warning = sc.bump_max() > 1e-6 * inf_norm(gamma);
  return sc;
}

ShiftedCholesky factor_shifted(const Eigen::MatrixXd& gamma, std::optional<double> delta) {
  if (delta) {
    auto sc = shifted_cholesky(gamma, *delta);
    if (sc.bump_warning) {
      log().warn("shifted factorization at delta={} needed a diagonal bump of {}", *delta,
                 sc.bump_max());
    }
    return sc;
  }
  double d = choose_delta(gamma);
  auto sc = shifted_cholesky(gamma, d);
  for (int i = 0; i < kMaxDeltaDoublings && sc.bump_warning; ++i) {
    d *= 2.0;
    sc = shifted_cholesky(gamma, d);
    sc.retries = i + 1;
  }
  if (sc.bump_warning) {
    log().warn("accepting bumped shifted factor at delta={} (bump {})", d, sc.bump_max());
  }
  return sc;
}

ShiftedCholesky factor_shifted_augmented(const Eigen::MatrixXd& gamma,
                                         const Eigen::VectorXd& gamma_t) {
  const Eigen::Index n = gamma.rows();
  if (gamma_t.size() != n) throw DomainError("gamma(t) length does not match Gamma");
  double d = choose_delta(augmented_gamma(gamma, gamma_t));
  ShiftedCholesky sc;
  for (int i = 0;; ++i) {
    sc = factor_shifted(gamma, d);
    sc.retries = i;
    const Eigen::VectorXd r = sc.L0.triangularView<Eigen::Lower>().solve(
        (Eigen::VectorXd::Constant(n, d) - gamma_t).eval());
    if (d - r.squaredNorm() >= 0.0 || i == kMaxDeltaDoublings) return sc;
    d *= 2.0;
  }
}

TwistedFactor twisted_factor(const ShiftedCholesky& sc, const Eigen::VectorXd& gamma_t) {
  const Eigen::Index n = sc.size();
  if (gamma_t.size() != n) throw DomainError("gamma(t) length does not match the factor");
  if ((gamma_t.array() < 0.0).any()) throw DomainError("gamma(t) entries must be nonnegative");
  TwistedFactor tf;
  tf.r = sc.L0.triangularView<Eigen::Lower>().solve(
      (Eigen::VectorXd::Constant(n, sc.delta) - gamma_t).eval());
  const double rho2 = sc.delta - tf.r.squaredNorm();
  if (rho2 < 0.0) {
    if (rho2 < -1e-10 * sc.delta) {
      throw NumericError("augmented shifted matrix is not positive semidefinite (delta too small?)");
    }
    log().warn("twisted factor: clamping rho^2 = {} to 0", rho2);
    tf.clamped = true;
    tf.rho = 0.0;
  } else {
    tf.rho = std::sqrt(rho2);
  }
  return tf;
}

IncrementCovFactor increment_factor(const ShiftedCholesky& sc, const TwistedFactor& tf) {
  const Eigen::Index n = sc.size();
  if (tf.r.size() != n) throw DomainError("twisted factor does not match the shifted factor");
  // Column j of the column-major G is row j of W = L0' (upper triangular), so
  // the row rotations below work on contiguous memory and G needs no transpose.
  // The dense top row -rho e' is kept apart. Phase 1 reads each row of W
  // from L0 as it first touches it, which saves a separate copy pass.
  IncrementCovFactor out;
  out.G.resize(n, n);
  Eigen::VectorXd r = tf.r;
  auto row = [&out](Eigen::Index j) { return out.G.col(j).data(); };
  if (n > 0) out.G.col(n - 1) = sc.L0.col(n - 1);

  // Phase 1: rotate r onto ||r|| e_1, trailing to leading; W becomes upper Hessenberg.
  for (Eigen::Index i = n - 1; i >= 1; --i) {
    const Givens g = make_givens(r[i - 1], r[i]);
    r[i - 1] = g.h;
    r[i] = 0.0;
    out.G.col(i - 1).head(i - 1).setZero();
    rotate_from(sc.L0.col(i - 1).data(), row(i - 1), row(i), i - 1, n, g);
  }
  if (n > 0) out.G.col(0).array() -= r[0];

  // Phase 2: annihilate the subdiagonal (a) and fold the top row into the
  // triangle (b). Row k is final once (a) has rotated rows k and k+1, so both
  // rotations run in one sweep.
  Eigen::VectorXd top = Eigen::VectorXd::Constant(n, -tf.rho);
  double* __restrict t = top.data();
  for (Eigen::Index k = 0; k < n; ++k) {
    double* __restrict rk = row(k);
    if (k + 1 == n) {
      const Givens b = make_givens(rk[k], t[k]);
      rk[k] = b.h;
      break;
    }
    double* __restrict rn = row(k + 1);
    const Givens a = make_givens(rk[k], rn[k]);
    const Givens b = make_givens(a.h, t[k]);
    for (Eigen::Index c = k; c < n; ++c) {
      const double x = a.c * rk[c] + a.s * rn[c];
      rn[c] = -a.s * rk[c] + a.c * rn[c];
      rk[c] = b.c * x + b.s * t[c];
      t[c] = -b.s * x + b.c * t[c];
    }
    rn[k] = 0.0;
  }

  for (Eigen::Index j = 0; j < n; ++j) {
    if (out.G(j, j) < 0.0) out.G.col(j).tail(n - j) *= -1.0;
  }
  return out;
}

Eigen::MatrixXd increment_covariance(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& gamma_t) {
  const Eigen::Index n = gamma.rows();
  if (gamma_t.size() != n) throw DomainError("gamma(t) length does not match Gamma");
  Eigen::MatrixXd m = -gamma;
  m.colwise() += gamma_t;
  m.rowwise() += gamma_t.transpose();
  return m;
}

void cholesky_update_row(Eigen::MatrixXd& r, Eigen::VectorXd x) {
  const Eigen::Index n = r.rows();
  if (x.size() != n) throw DomainError("update vector length does not match the factor");
  Eigen::VectorXd c(n);
  Eigen::VectorXd s(n);
  Eigen::Index first = 0;
  while (first < n && x[first] == 0.0) ++first;
  for (Eigen::Index j = first; j < n; ++j) {
    double* col = r.col(j).data();
    double xj = x[j];
    for (Eigen::Index i = first; i < j; ++i) {
      const double t = c[i] * col[i] + s[i] * xj;
      xj = c[i] * xj - s[i] * col[i];
      col[i] = t;
    }
    const Givens g = make_givens(col[j], xj);
    c[j] = g.c;
    s[j] = g.s;
    col[j] = g.h;
    if (col[j] < 0.0) {
      // Keep a positive diagonal: flip the sign of this rotation's output row.
      c[j] = -c[j];
      s[j] = -s[j];
      col[j] = -col[j];
    }
  }
}

Eigen::MatrixXd noisy_shifted_factor(const ShiftedCholesky& sc, double sigma,
                                     const Eigen::MatrixXd& F) {
  if (!(sigma >= 0.0)) throw DomainError("sigma must be nonnegative");
  const Eigen::Index n = sc.size();
  Eigen::MatrixXd r = sc.L0.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (r(i, i) < 0.0) r.row(i) = -r.row(i);
  }
  if (sigma == 0.0) return r;
  if (F.size() == 0) {
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      x[k] = sigma;
      cholesky_update_row(r, std::move(x));
    }
    return r;
  }
  if (F.rows() != n) throw DomainError("noise factor must have one row per observation");
  for (Eigen::Index k = 0; k < F.cols(); ++k) cholesky_update_row(r, sigma * F.col(k));
  return r;
}

DowndateResult cholesky_downdate(const Eigen::MatrixXd& r_in, const Eigen::MatrixXd& b) {
  const Eigen::Index n = r_in.rows();
  if (r_in.cols() != n) throw DomainError("downdate needs a square factor");
  if (b.size() > 0 && b.cols() != n) throw DomainError("downdate rows must match the factor size");
  DowndateResult out;
  out.R = r_in;
  Eigen::MatrixXd& r = out.R;
  Eigen::VectorXd p(n);
  Eigen::VectorXd c(n);
  Eigen::VectorXd s(n);
  for (Eigen::Index row = 0; row < b.rows(); ++row) {
    const double diag_scale = r.diagonal().cwiseAbs().maxCoeff();
    const double pivot_tol = 1e-14 * diag_scale;
    // Solve R' p = x.
    for (Eigen::Index j = 0; j < n; ++j) {
      const double num = b(row, j) - r.col(j).head(j).dot(p.head(j));
      const double piv = r(j, j);
      if (std::abs(piv) <= pivot_tol) {
        p[j] = 0.0;
        if (std::abs(num) > 1e-8 * diag_scale) out.clamps.push_back({row, num});
      } else {
        p[j] = num / piv;
      }
    }
    double alpha2 = 1.0 - p.squaredNorm();
    if (alpha2 < 0.0) {
      if (alpha2 < -1e-8) {
        throw NumericError("Cholesky downdate failed: downdated matrix is indefinite");
      }
      out.clamps.push_back({row, alpha2});
      alpha2 = 0.0;
    }
    double alpha = std::sqrt(alpha2);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      const double scale = alpha + std::abs(p[i]);
      if (scale == 0.0) {
        c[i] = 1.0;
        s[i] = 0.0;
        continue;
      }
      const double a = alpha / scale;
      const double bb = p[i] / scale;
      const double nrm = std::sqrt(a * a + bb * bb);
      c[i] = a / nrm;
      s[i] = bb / nrm;
      alpha = scale * nrm;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      double* col = r.col(j).data();
      double xx = 0.0;
      for (Eigen::Index i = j; i >= 0; --i) {
        const double t = c[i] * xx + s[i] * col[i];
        col[i] = c[i] * col[i] - s[i] * xx;
        xx = t;
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (r(i, i) < 0.0) r.row(i) = -r.row(i);
  }
  if (!out.clamps.empty()) {
    log().warn("Cholesky downdate clamped {} near-zero pivot(s)", out.clamps.size());
  }
  return out;
}

IncrementMap increment_map(IncrementKind kind, int n) {
  if (n < 1) throw DomainError("increment map needs n >= 1");
  IncrementMap m;
  m.kind = kind;
  m.D = Eigen::MatrixXd::Zero(n, n + 1);
  m.J = Eigen::MatrixXd::Identity(n, n);
  if (kind == IncrementKind::TargetRelative) {
    m.D.col(0).setConstant(-1.0);
    m.D.rightCols(n).setIdentity();
    return m;
  }
  for (int i = 0; i < n; ++i) {
    m.D(i, i) = -1.0;
    m.D(i, i + 1) = 1.0;
    if (i > 0) m.J(i, i - 1) = -1.0;
  }
  return m;
}

Eigen::MatrixXd augmented_gamma(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& gamma_t) {
  const Eigen::Index n = gamma.rows();
  if (gamma_t.size() != n) throw DomainError("gamma(t) length does not match Gamma");
  Eigen::MatrixXd a(n + 1, n + 1);
  a(0, 0) = 0.0;
  a.block(0, 1, 1, n) = gamma_t.transpose();
  a.block(1, 0, n, 1) = gamma_t;
  a.bottomRightCorner(n, n) = gamma;
  return a;
}

}  // namespace igpk
