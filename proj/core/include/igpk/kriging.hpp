#pragma once

#include <functional>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "igpk/location.hpp"
#include "igpk/structmat.hpp"
#include "igpk/variogram.hpp"

namespace igpk {

enum class WeightMethod {
  Igp,
  IgpNoiseFree,
  Limit,
  Rational,
  Shepard,
  GammaShepard,
  JosephKangResidual,
};

std::string_view to_string(WeightMethod m);

/// Observation error covariance sigma^2 F F'. An empty F stands for the identity.
struct ObservationModel {
  double sigma = 0.0;
  Eigen::MatrixXd F;

  [[nodiscard]] Eigen::MatrixXd noise_covariance(Eigen::Index n) const;
};

struct Observations {
  LocationSet locs;
  Eigen::VectorXd y;

  Observations() = default;
  Observations(LocationSet locs, Eigen::VectorXd y);
  [[nodiscard]] Eigen::Index size() const { return y.size(); }
};

struct KrigingWeights {
  Eigen::VectorXd lambda;
  WeightMethod method = WeightMethod::Igp;
  Location target;
  double sum_check = 0.0;
  bool c_flagged = false;  // rational weights built from a c with nonpositive entries
};

struct SillSpec {
  double vartheta2 = 1.0;
};

enum class CSource { Perron, Ones, RInvE, User };

struct RationalConfig {
  CSource source = CSource::Perron;
  Eigen::VectorXd c;  // used when source == User
};

/// IGP kriging against a fixed observation set. The shifted factor and its
/// noise-augmented QR update are computed once; each target then costs two
/// triangular solves.
class IgpKriging {
 public:
  IgpKriging(LocationSet locs, VariogramModel model, ObservationModel om,
             std::optional<double> delta = std::nullopt);

  /// Weights at t. With sigma == 0 and t on an observation, returns e_l.
  [[nodiscard]] KrigingWeights weights(const Location& t) const;
  /// Weights for an arbitrary vector of target variogram values.
  [[nodiscard]] Eigen::VectorXd weights_for_gamma(const Eigen::VectorXd& gamma_t) const;

  [[nodiscard]] double delta() const { return sc_.delta; }
  [[nodiscard]] const ShiftedCholesky& shifted() const { return sc_; }
  [[nodiscard]] const Eigen::MatrixXd& noisy_factor() const { return rs_; }
  [[nodiscard]] const LocationSet& locations() const { return locs_; }
  [[nodiscard]] const VariogramModel& model() const { return model_; }

 private:
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  LocationSet locs_;
  VariogramModel model_;
  ObservationModel om_;
  ShiftedCholesky sc_;
  Eigen::MatrixXd rs_;
  Eigen::VectorXd u_;
  double alpha_ = 0.0;
};

KrigingWeights igp_weights(const Observations& obs, const VariogramModel& model,
                           const ObservationModel& om, const Location& t,
                           std::optional<double> delta = std::nullopt);

/// Noise-free weights from dense solves against Gamma.
KrigingWeights igp_weights_noise_free(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& gamma_t);

/// Weights read off the posterior precision of (Z(t), Z(s)) assembled from the
/// chosen increments: e_1' W^{-1} X' Sigma^{-1} with
/// W = X' Sigma^{-1} X + D' (D Gt D')^{-1} D and Gt = -[[0, g'], [g, Gamma]].
/// noise_cov must be positive definite.
Eigen::VectorXd igp_weights_precision(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& gamma_t,
                                      const Eigen::MatrixXd& noise_cov, IncrementKind kind);

/// Ratio form e'(Sigma + G G')^{-1} e_k / e'(Sigma + G G')^{-1} e with G from
/// the twisted/Givens path.
Eigen::VectorXd igp_weights_ratio_form(const ShiftedCholesky& sc, const Eigen::VectorXd& gamma_t,
                                       const Eigen::MatrixXd& noise_cov);

KrigingWeights limit_weights(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& gamma_t,
                             const SillSpec& sill);

KrigingWeights rational_weights(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& gamma_t,
                                const SillSpec& sill, const RationalConfig& cfg);

using DistanceFn = std::function<double(const Location&, const Location&)>;

/// (c_k / d_k) / sum_j (c_j / d_j). An empty c means all ones.
KrigingWeights shepard_weights(const LocationSet& locs, const Location& t,
                               const DistanceFn& distance, const Eigen::VectorXd& c = {});

KrigingWeights gamma_shepard_weights(const VariogramModel& model, const LocationSet& locs,
                                     const Location& t, const Eigen::VectorXd& c = {});

struct JosephKangPrediction {
  double value = 0.0;
  double trend = 0.0;  // p(t)
  KrigingWeights weights;  // Shepard weights applied to the residuals
};

/// Least-squares polynomial trend of total degree poly_degree plus Shepard
/// interpolation of the residuals.
JosephKangPrediction joseph_kang_predict(const Observations& obs, const Location& t,
                                         int poly_degree, const DistanceFn& distance,
                                         const Eigen::VectorXd& c = {});

struct GLimMatrix {
  bool feasible = false;
  double f = 0.0;
  double g = 0.0;
  double h = 0.0;
  Eigen::MatrixXd GG;  // empty when infeasible
  double secant_residual = 0.0;
};

/// DFP-form matrix whose ratio-form weights equal the limit-kriging weights.
GLimMatrix g_lim_matrix(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& gamma_t,
                        const SillSpec& sill);

double predict(const KrigingWeights& w, const Eigen::VectorXd& y);

/// Positive eigenvector of the largest eigenvalue of an elementwise-positive
/// symmetric matrix, by power iteration; normalized to unit sum.
Eigen::VectorXd perron_vector(const Eigen::MatrixXd& r);

}  // namespace igpk
