#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include <Eigen/Core>
#include <json.hpp>

#include "igpk/location.hpp"

namespace igpk {

/// gamma(h) = sigma2 * h.
struct Brownian {
  double sigma2 = 1.0;
};

/// Brownian motion convolved with a normal kernel of std-dev r, dim 1 or 2.
struct ConvolvedBrownian {
  double sigma2 = 1.0;
  double r = 1.0;
  int dim = 1;
};

/// C(h) = sigma2 * exp(-theta h).
struct StationaryExp {
  double sigma2 = 1.0;
  double theta = 1.0;
};

/// C(h) = sigma2 * exp(-theta h^2).
struct StationaryGauss {
  double sigma2 = 1.0;
  double theta = 1.0;
};

using StationaryFamily = std::variant<StationaryExp, StationaryGauss>;

/// rho * g / (1 - g) over a unit-sill stationary base g.
struct Surrogate {
  StationaryFamily base;
  double rho = 1.0;
};

using VariogramFamily =
    std::variant<Brownian, ConvolvedBrownian, StationaryExp, StationaryGauss,
                 Surrogate>;

/// An immutable variogram model. Separations are Euclidean after an optional
/// per-axis scaling (empty scale means all ones).
class VariogramModel {
 public:
  explicit VariogramModel(VariogramFamily family,
                          Eigen::VectorXd axis_scale = {});

  static VariogramModel brownian(double sigma2);
  static VariogramModel convolved_brownian(double sigma2, double r, int dim);
  static VariogramModel stationary_exp(double sigma2, double theta);
  static VariogramModel stationary_gauss(double sigma2, double theta);
  static VariogramModel surrogate(StationaryFamily base, double rho);

  /// gamma as a function of the (already scaled) separation h >= 0.
  [[nodiscard]] double at_distance(double h) const;
  /// gamma(s, t). Throws DomainError on dimension mismatch.
  [[nodiscard]] double eval(const Location& s, const Location& t) const;
  /// Same as eval for two rows of coordinates.
  [[nodiscard]] double eval_rows(const Eigen::Ref<const Eigen::RowVectorXd>& s,
                                 const Eigen::Ref<const Eigen::RowVectorXd>& t) const;
  [[nodiscard]] double distance(const Location& s, const Location& t) const;

  [[nodiscard]] bool is_stationary() const;
  /// Sill for stationary models; empty for intrinsic and surrogate ones.
  [[nodiscard]] std::optional<double> sill() const;
  /// C(h) = sill - gamma(h). Throws DomainError for non-stationary models.
  [[nodiscard]] double covariance_at(double h) const;
  /// For Surrogate models, the unit-sill base model; empty otherwise.
  [[nodiscard]] std::optional<VariogramModel> surrogate_base() const;

  [[nodiscard]] const VariogramFamily& family() const { return family_; }
  [[nodiscard]] std::string_view family_name() const;
  [[nodiscard]] const Eigen::VectorXd& axis_scale() const { return axis_scale_; }
  /// Copy with a different variance scale (sigma2); not for Surrogate.
  [[nodiscard]] VariogramModel with_sigma2(double sigma2) const;

 private:
  VariogramFamily family_;
  Eigen::VectorXd axis_scale_;
};

/// gamma(s, t) for the given model.
double eval(const VariogramModel& model, const Location& s, const Location& t);

/// Solves model.with_sigma2(x).at_distance(at) == target for x by bisection
/// (absolute tolerance 1e-12 on x).
double calibrate_sigma2(const VariogramModel& model, double at, double target);

nlohmann::json to_json(const VariogramModel& model);
/// Parses {"family": ..., ...}; unknown or missing fields raise ConfigError.
VariogramModel model_from_json(const nlohmann::json& j);

}  // namespace igpk
