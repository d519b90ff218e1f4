#include "igpk/kriging.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include "igpk/error.hpp"

namespace igpk {

namespace {

KrigingWeights make_weights(Eigen::VectorXd lambda, WeightMethod method, Location target = {}) {
  KrigingWeights w;
  w.sum_check = lambda.sum();
  w.lambda = std::move(lambda);
  w.method = method;
  w.target = std::move(target);
  return w;
}

Eigen::VectorXd unit(Eigen::Index n, Eigen::Index k) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e[k] = 1.0;
  return e;
}

void check_square(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& gamma_t) {
  if (gamma.rows() != gamma.cols()) throw DomainError("variogram matrix must be square");
  if (gamma_t.size() != gamma.rows()) throw DomainError("gamma(t) length does not match Gamma");
  if (gamma.rows() == 0) throw DomainError("no observations");
}

// A = vartheta2 e e' - Gamma and a = vartheta2 e - gamma_t, after checking the sill.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> sill_system(const Eigen::MatrixXd& gamma,
                                                        const Eigen::VectorXd& gamma_t,
                                                        const SillSpec& sill) {
  check_square(gamma, gamma_t);
  if (!(sill.vartheta2 > 0.0)) throw DomainError("sill must be positive");
  if (gamma.maxCoeff() > sill.vartheta2 || gamma_t.maxCoeff() > sill.vartheta2) {
    throw DomainError("sill is smaller than an observed variogram value");
  }
  Eigen::MatrixXd a = -gamma;
  a.array() += sill.vartheta2;
  Eigen::VectorXd av = Eigen::VectorXd::Constant(gamma_t.size(), sill.vartheta2) - gamma_t;
  return {std::move(a), std::move(av)};
}

Eigen::PartialPivLU<Eigen::MatrixXd> checked_lu(const Eigen::MatrixXd& a, const char* what) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  if (!(lu.rcond() > 1e-15)) throw NumericError(std::string(what) + " is singular");
  return lu;
}

void check_weights_vector(const Eigen::VectorXd& c, Eigen::Index n) {
  if (c.size() != n) throw DomainError("weight vector c has the wrong length");
  if ((c.array() <= 0.0).any() || !c.allFinite()) {
    throw DomainError("weight vector c must be strictly positive");
  }
}

// Total-degree monomial exponents in dim variables up to degree p.
void monomials(int dim, int p, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == dim) {
    out.push_back(cur);
    return;
  }
  int used = 0;
  for (int v : cur) used += v;
  for (int k = 0; k + used <= p; ++k) {
    cur.push_back(k);
    monomials(dim, p, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::string_view to_string(WeightMethod m) {
  switch (m) {
    case WeightMethod::Igp: return "igp";
    case WeightMethod::IgpNoiseFree: return "igp_noise_free";
    case WeightMethod::Limit: return "limit";
    case WeightMethod::Rational: return "rational";
    case WeightMethod::Shepard: return "shepard";
    case WeightMethod::GammaShepard: return "gamma_shepard";
    case WeightMethod::JosephKangResidual: return "joseph_kang_residual";
  }
  return "unknown";
}

Eigen::MatrixXd ObservationModel::noise_covariance(Eigen::Index n) const {
  if (F.size() == 0) return sigma * sigma * Eigen::MatrixXd::Identity(n, n);
  if (F.rows() != n) throw DomainError("noise factor must have one row per observation");
  return sigma * sigma * F * F.transpose();
}

Observations::Observations(LocationSet l, Eigen::VectorXd v) : locs(std::move(l)), y(std::move(v)) {
  if (static_cast<Eigen::Index>(locs.size()) != y.size()) {
    throw DomainError("number of observation values does not match locations");
  }
  if (!y.allFinite()) throw DomainError("observation values must be finite");
}

IgpKriging::IgpKriging(LocationSet locs, VariogramModel model, ObservationModel om,
                       std::optional<double> delta)
    : locs_(std::move(locs)), model_(std::move(model)), om_(std::move(om)) {
  const auto n = static_cast<Eigen::Index>(locs_.size());
  if (n < 1) throw DomainError("IGP kriging needs at least one observation");
  if (!(om_.sigma >= 0.0)) throw DomainError("sigma must be nonnegative");
  if (om_.F.size() > 0 && om_.F.rows() != n) {
    throw DomainError("noise factor must have one row per observation");
  }
  const auto vg = build_gamma(model_, locs_);
  sc_ = factor_shifted(vg.gamma, delta);
  rs_ = noisy_shifted_factor(sc_, om_.sigma, om_.F);
  u_ = solve(Eigen::VectorXd::Ones(n));
  alpha_ = u_.sum();
  if (!(alpha_ > 1e-300) || !std::isfinite(alpha_)) {
    throw NumericError("degenerate configuration: e'N e vanishes");
  }
}

Eigen::VectorXd IgpKriging::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = rs_.transpose().triangularView<Eigen::Lower>().solve(b);
  rs_.triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Eigen::VectorXd IgpKriging::weights_for_gamma(const Eigen::VectorXd& gamma_t) const {
  if (gamma_t.size() != u_.size()) throw DomainError("gamma(t) length does not match observations");
  // With K = sigma^2 F F' + delta e e' - Gamma, u = K^{-1} e, v = K^{-1} gamma_t:
  // lambda = (1 + e'v) u / (e'u) - v, which does not depend on delta.
  const Eigen::VectorXd v = solve(gamma_t);
  return u_ * ((1.0 + v.sum()) / alpha_) - v;
}

KrigingWeights IgpKriging::weights(const Location& t) const {
  if (om_.sigma == 0.0) {
    if (auto l = locs_.find_coincident(t)) {
      return make_weights(unit(u_.size(), static_cast<Eigen::Index>(*l)), WeightMethod::Igp, t);
    }
  }
  return make_weights(weights_for_gamma(gamma_vector(model_, locs_, t)), WeightMethod::Igp, t);
}

KrigingWeights igp_weights(const Observations& obs, const VariogramModel& model,
                           const ObservationModel& om, const Location& t,
                           std::optional<double> delta) {
  return IgpKriging(obs.locs, model, om, delta).weights(t);
}

KrigingWeights igp_weights_noise_free(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& gamma_t) {
  check_square(gamma, gamma_t);
  const Eigen::Index n = gamma.rows();
  const auto lu = checked_lu(gamma, "variogram matrix");
  const Eigen::VectorXd w1 = lu.solve(gamma_t);
  const Eigen::VectorXd w2 = lu.solve(Eigen::VectorXd::Ones(n));
  const double den = w2.sum();
  if (std::abs(den) <= 1e-300) throw NumericError("degenerate configuration: e'Gamma^{-1}e = 0");
  return make_weights(w1 + (1.0 - w1.sum()) / den * w2, WeightMethod::IgpNoiseFree);
}

Eigen::VectorXd igp_weights_precision(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& gamma_t,
                                      const Eigen::MatrixXd& noise_cov, IncrementKind kind) {
  check_square(gamma, gamma_t);
  const Eigen::Index n = gamma.rows();
  const auto map = increment_map(kind, static_cast<int>(n));
  const Eigen::MatrixXd cov = -map.D * augmented_gamma(gamma, gamma_t) * map.D.transpose();
  const Eigen::MatrixXd prior_prec =
      map.D.transpose() * Eigen::LDLT<Eigen::MatrixXd>(cov).solve(map.D);
  Eigen::LLT<Eigen::MatrixXd> noise(noise_cov);
  if (noise.info() != Eigen::Success) throw NumericError("noise covariance is not positive definite");
  const Eigen::MatrixXd noise_inv = noise.solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd w = prior_prec;
  w.bottomRightCorner(n, n) += noise_inv;
  const Eigen::VectorXd z = w.partialPivLu().solve(unit(n + 1, 0));
  return noise_inv * z.tail(n);
}

Eigen::VectorXd igp_weights_ratio_form(const ShiftedCholesky& sc, const Eigen::VectorXd& gamma_t,
                                       const Eigen::MatrixXd& noise_cov) {
  const auto g = increment_factor(sc, twisted_factor(sc, gamma_t)).G;
  const Eigen::MatrixXd s = noise_cov + g * g.transpose();
  const Eigen::VectorXd x = s.partialPivLu().solve(Eigen::VectorXd::Ones(s.rows()));
  return x / x.sum();
}

KrigingWeights limit_weights(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& gamma_t,
                             const SillSpec& sill) {
  const auto [a, av] = sill_system(gamma, gamma_t, sill);
  const Eigen::VectorXd w = checked_lu(a, "vartheta^2 e e' - Gamma").solve(av);
  const double den = w.sum();
  if (std::abs(den) <= 1e-14) throw NumericError("limit kriging denominator vanishes");
  return make_weights(w / den, WeightMethod::Limit);
}

KrigingWeights rational_weights(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& gamma_t,
                                const SillSpec& sill, const RationalConfig& cfg) {
  const auto [a, av] = sill_system(gamma, gamma_t, sill);
  const Eigen::Index n = a.rows();
  const auto lu = checked_lu(a, "vartheta^2 e e' - Gamma");
  Eigen::VectorXd c;
  bool flagged = false;
  switch (cfg.source) {
    case CSource::Perron: c = perron_vector(a / sill.vartheta2); break;
    case CSource::Ones: c = Eigen::VectorXd::Ones(n); break;
    case CSource::RInvE:
      c = sill.vartheta2 * lu.solve(Eigen::VectorXd::Ones(n));
      flagged = (c.array() <= 0.0).any();
      break;
    case CSource::User:
      check_weights_vector(cfg.c, n);
      c = cfg.c;
      break;
  }
  const double den = av.dot(c);
  if (std::abs(den) <= 1e-14 * av.norm() * c.norm()) {
    throw NumericError("rational kriging denominator vanishes");
  }
  const Eigen::VectorXd lam = lu.solve(av).cwiseProduct(a * c) / den;
  auto w = make_weights(lam, WeightMethod::Rational);
  w.c_flagged = flagged;
  return w;
}

KrigingWeights shepard_weights(const LocationSet& locs, const Location& t,
                               const DistanceFn& distance, const Eigen::VectorXd& c_in) {
  const auto n = static_cast<Eigen::Index>(locs.size());
  if (n == 0) throw DomainError("no observations");
  const Eigen::VectorXd c = c_in.size() == 0 ? Eigen::VectorXd::Ones(n) : c_in;
  check_weights_vector(c, n);
  Eigen::VectorXd inv(n);
  std::optional<Eigen::Index> hit;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Location s = locs[static_cast<std::size_t>(k)];
    const double d = distance(t, s);
    if (!(d >= 0.0)) throw DomainError("distance measure returned a negative value");
    if (d == 0.0 || coincident(t, s)) {
      if (hit) throw DomainError("target coincides with more than one observation");
      hit = k;
      continue;
    }
    inv[k] = c[k] / d;
  }
  if (hit) return make_weights(unit(n, *hit), WeightMethod::Shepard, t);
  return make_weights(inv / inv.sum(), WeightMethod::Shepard, t);
}

KrigingWeights gamma_shepard_weights(const VariogramModel& model, const LocationSet& locs,
                                     const Location& t, const Eigen::VectorXd& c) {
  auto w = shepard_weights(
      locs, t, [&model](const Location& a, const Location& b) { return model.eval(a, b); }, c);
  w.method = WeightMethod::GammaShepard;
  return w;
}

JosephKangPrediction joseph_kang_predict(const Observations& obs, const Location& t,
                                         int poly_degree, const DistanceFn& distance,
                                         const Eigen::VectorXd& c) {
  if (poly_degree < 0) throw DomainError("polynomial degree must be nonnegative");
  const Eigen::Index n = obs.size();
  const int dim = obs.locs.dim();
  if (t.dim() != dim) throw DomainError("target dimension differs from observations");
  std::vector<std::vector<int>> basis;
  std::vector<int> cur;
  monomials(dim, poly_degree, cur, basis);
  const auto m = static_cast<Eigen::Index>(basis.size());
  if (m > n) throw DomainError("too few observations for the requested polynomial degree");

  const Eigen::MatrixXd& p = obs.locs.matrix();
  const Eigen::RowVectorXd lo = p.colwise().minCoeff();
  const Eigen::RowVectorXd hi = p.colwise().maxCoeff();
  const Eigen::RowVectorXd center = 0.5 * (lo + hi);
  Eigen::RowVectorXd half = 0.5 * (hi - lo);
  for (Eigen::Index j = 0; j < half.size(); ++j) {
    if (half[j] <= 0.0) half[j] = 1.0;
  }
  auto row = [&](const Eigen::RowVectorXd& x) {
    const Eigen::RowVectorXd z = (x - center).cwiseQuotient(half);
    Eigen::RowVectorXd out(m);
    for (Eigen::Index b = 0; b < m; ++b) {
      double v = 1.0;
      for (int d = 0; d < dim; ++d) v *= std::pow(z[d], basis[static_cast<std::size_t>(b)][d]);
      out[b] = v;
    }
    return out;
  };
  Eigen::MatrixXd design(n, m);
  for (Eigen::Index i = 0; i < n; ++i) design.row(i) = row(p.row(i));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-12);
  if (qr.rank() < m) throw NumericError("polynomial trend basis is rank deficient");
  const Eigen::VectorXd coef = qr.solve(obs.y);
  const Eigen::VectorXd resid = obs.y - design * coef;

  JosephKangPrediction out;
  out.weights = shepard_weights(obs.locs, t, distance, c);
  out.weights.method = WeightMethod::JosephKangResidual;
  out.trend = row(t.coords().transpose()).dot(coef);
  out.value = out.trend + out.weights.lambda.dot(resid);
  return out;
}

GLimMatrix g_lim_matrix(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& gamma_t,
                        const SillSpec& sill) {
  const auto [a, av] = sill_system(gamma, gamma_t, sill);
  const Eigen::Index n = a.rows();
  const Eigen::VectorXd w = checked_lu(a, "vartheta^2 e e' - Gamma").solve(av);
  GLimMatrix out;
  out.f = w.sum();
  out.g = av.dot(w);
  if (!(out.f > 0.0)) return out;
  out.feasible = true;
  out.h = (out.f + out.g) / (out.f * out.f);
  const Eigen::VectorXd e = Eigen::VectorXd::Ones(n);
  out.GG = a;
  out.GG.array() += out.h;
  out.GG -= (av * e.transpose() + e * av.transpose()) / out.f;
  out.secant_residual = (out.GG * w - e).cwiseAbs().maxCoeff();
  return out;
}

double predict(const KrigingWeights& w, const Eigen::VectorXd& y) {
  if (w.lambda.size() != y.size()) throw DomainError("weights and observations differ in length");
  return w.lambda.dot(y);
}

Eigen::VectorXd perron_vector(const Eigen::MatrixXd& r) {
  const Eigen::Index n = r.rows();
  if (n == 0 || r.cols() != n) throw DomainError("Perron vector needs a square matrix");
  if ((r.array() <= 0.0).any()) throw DomainError("Perron vector needs an elementwise-positive matrix");
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < 10000; ++it) {
    const Eigen::VectorXd w = r * v;
    const double lambda = v.dot(w) / v.squaredNorm();
    if ((w - lambda * v).norm() <= 1e-10 * std::abs(lambda) * v.norm()) return w / w.sum();
    v = w / w.sum();
  }
  throw NumericError("power iteration for the Perron vector did not converge");
}

}  // namespace igpk
