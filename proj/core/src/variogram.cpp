#include "igpk/variogram.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "igpk/error.hpp"
#include "igpk/special.hpp"

namespace igpk {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

double stationary_gamma(const StationaryFamily& f, double h) {
  return std::visit(Overloaded{
                        [h](const StationaryExp& m) { return -m.sigma2 * std::expm1(-m.theta * h); },
                        [h](const StationaryGauss& m) {
                          return -m.sigma2 * std::expm1(-m.theta * h * h);
                        },
                    },
                    f);
}

double stationary_sill(const StationaryFamily& f) {
  return std::visit([](const auto& m) { return m.sigma2; }, f);
}

// 1F1(a; b; x) - 1 without the cancellation of the leading 1 for small |x|.
double kummer_1f1_minus_one(double a, double b, double x) {
  if (std::abs(x) >= 1.0) return kummer_1f1(a, b, x) - 1.0;
  double term = a / b * x;
  double sum = 0.0;
  for (int k = 1; k < 200; ++k) {
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    term *= (a + k) / (b + k) * x / (k + 1);
  }
  return sum;
}

double convolved_gamma(const ConvolvedBrownian& m, double h) {
  if (h == 0.0) return 0.0;
  const double r = m.r;
  if (m.dim == 1) {
    // Phi(h / (sqrt2 r)) - Phi(-h / (sqrt2 r)) == erf(h / (2 r)).
    const double u = h / (2.0 * r);
    return 0.5 * m.sigma2 *
           (2.0 * r / std::sqrt(std::numbers::pi) * std::expm1(-u * u) + h * std::erf(u));
  }
  const double x = -(h * h) / (4.0 * r * r);
  return r * m.sigma2 * std::sqrt(std::numbers::pi) * kummer_1f1_minus_one(-0.5, 1.0, x);
}

void validate(const VariogramFamily& family) {
  std::visit(Overloaded{
                 [](const Brownian& m) { require_positive(m.sigma2, "sigma2"); },
                 [](const ConvolvedBrownian& m) {
                   require_positive(m.sigma2, "sigma2");
                   require_positive(m.r, "r");
                   if (m.dim != 1 && m.dim != 2) {
                     throw DomainError("convolved Brownian dim must be 1 or 2");
                   }
                 },
                 [](const StationaryExp& m) {
                   require_positive(m.sigma2, "sigma2");
                   require_positive(m.theta, "theta");
                 },
                 [](const StationaryGauss& m) {
                   require_positive(m.sigma2, "sigma2");
                   require_positive(m.theta, "theta");
                 },
                 [](const Surrogate& m) {
                   require_positive(m.rho, "rho");
                   std::visit(
                       [](const auto& b) {
                         require_positive(b.sigma2, "sigma2");
                         require_positive(b.theta, "theta");
                       },
                       m.base);
                   if (std::abs(stationary_sill(m.base) - 1.0) > 1e-12) {
                     throw DomainError("surrogate base must have unit sill");
                   }
                 },
             },
             family);
}

}  // namespace

VariogramModel::VariogramModel(VariogramFamily family, Eigen::VectorXd axis_scale)
    : family_(std::move(family)), axis_scale_(std::move(axis_scale)) {
  validate(family_);
  for (Eigen::Index i = 0; i < axis_scale_.size(); ++i) {
    require_positive(axis_scale_[i], "axis scale");
  }
}

VariogramModel VariogramModel::brownian(double sigma2) { return VariogramModel(Brownian{sigma2}); }

VariogramModel VariogramModel::convolved_brownian(double sigma2, double r, int dim) {
  return VariogramModel(ConvolvedBrownian{sigma2, r, dim});
}

VariogramModel VariogramModel::stationary_exp(double sigma2, double theta) {
  return VariogramModel(StationaryExp{sigma2, theta});
}

VariogramModel VariogramModel::stationary_gauss(double sigma2, double theta) {
  return VariogramModel(StationaryGauss{sigma2, theta});
}

VariogramModel VariogramModel::surrogate(StationaryFamily base, double rho) {
  return VariogramModel(Surrogate{base, rho});
}

double VariogramModel::at_distance(double h) const {
  if (!(h >= 0.0)) throw DomainError("separation must be nonnegative");
  return std::visit(Overloaded{
                        [h](const Brownian& m) { return m.sigma2 * h; },
                        [h](const ConvolvedBrownian& m) { return convolved_gamma(m, h); },
                        [h](const StationaryExp& m) { return stationary_gamma(m, h); },
                        [h](const StationaryGauss& m) { return stationary_gamma(m, h); },
                        [h](const Surrogate& m) {
                          return surrogate_transform(stationary_gamma(m.base, h), m.rho);
                        },
                    },
                    family_);
}

double VariogramModel::eval_rows(const Eigen::Ref<const Eigen::RowVectorXd>& s,
                                 const Eigen::Ref<const Eigen::RowVectorXd>& t) const {
  if (s.size() != t.size()) throw DomainError("locations differ in dimension");
  if (const auto* cb = std::get_if<ConvolvedBrownian>(&family_); cb && cb->dim != s.size()) {
    throw DomainError("location dimension does not match the convolved Brownian model");
  }
  double h = 0.0;
  if (axis_scale_.size() == 0) {
    h = (s - t).norm();
  } else {
    if (axis_scale_.size() != s.size()) {
      throw DomainError("axis scale length does not match location dimension");
    }
    h = (s - t).cwiseProduct(axis_scale_.transpose()).norm();
  }
  return at_distance(h);
}

double VariogramModel::eval(const Location& s, const Location& t) const {
  return eval_rows(s.coords().transpose(), t.coords().transpose());
}

double VariogramModel::distance(const Location& s, const Location& t) const {
  if (s.dim() != t.dim()) throw DomainError("locations differ in dimension");
  if (axis_scale_.size() == 0) return (s.coords() - t.coords()).norm();
  if (axis_scale_.size() != s.dim()) {
    throw DomainError("axis scale length does not match location dimension");
  }
  return (s.coords() - t.coords()).cwiseProduct(axis_scale_).norm();
}

bool VariogramModel::is_stationary() const {
  return std::holds_alternative<StationaryExp>(family_) ||
         std::holds_alternative<StationaryGauss>(family_);
}

std::optional<double> VariogramModel::sill() const {
  if (const auto* m = std::get_if<StationaryExp>(&family_)) return m->sigma2;
  if (const auto* m = std::get_if<StationaryGauss>(&family_)) return m->sigma2;
  return std::nullopt;
}

double VariogramModel::covariance_at(double h) const {
  const auto s = sill();
  if (!s) throw DomainError("covariance requested from a non-stationary model");
  return *s - at_distance(h);
}

std::optional<VariogramModel> VariogramModel::surrogate_base() const {
  const auto* m = std::get_if<Surrogate>(&family_);
  if (m == nullptr) return std::nullopt;
  return std::visit([this](const auto& b) { return VariogramModel(b, axis_scale_); }, m->base);
}

std::string_view VariogramModel::family_name() const {
  return std::visit(Overloaded{
                        [](const Brownian&) { return std::string_view("brownian"); },
                        [](const ConvolvedBrownian&) {
                          return std::string_view("convolved_brownian");
                        },
                        [](const StationaryExp&) { return std::string_view("stationary_exp"); },
                        [](const StationaryGauss&) {
                          return std::string_view("stationary_gauss");
                        },
                        [](const Surrogate&) { return std::string_view("surrogate"); },
                    },
                    family_);
}

VariogramModel VariogramModel::with_sigma2(double sigma2) const {
  VariogramFamily f = family_;
  std::visit(Overloaded{
                 [](Surrogate&) {
                   throw DomainError("surrogate models have no free variance scale");
                 },
                 [sigma2](auto& m) { m.sigma2 = sigma2; },
             },
             f);
  return VariogramModel(std::move(f), axis_scale_);
}

double eval(const VariogramModel& model, const Location& s, const Location& t) {
  return model.eval(s, t);
}

double calibrate_sigma2(const VariogramModel& model, double at, double target) {
  if (!(at > 0.0) || !(target > 0.0)) {
    throw DomainError("calibration needs a positive separation and target");
  }
  auto f = [&](double x) { return model.with_sigma2(x).at_distance(at) - target; };
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; f(hi) < 0.0; ++i) {
    if (i > 2000) throw NumericError("calibration could not bracket the target");
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    (fm < 0.0 ? lo : hi) = mid;
  }
  if (hi - lo > 1e-12 * std::max(1.0, hi)) throw NumericError("calibration did not converge");
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

namespace {

nlohmann::json stationary_to_json(const StationaryFamily& f) {
  return std::visit(
      Overloaded{
          [](const StationaryExp& m) {
            return nlohmann::json{
                {"family", "stationary_exp"}, {"sigma2", m.sigma2}, {"theta", m.theta}};
          },
          [](const StationaryGauss& m) {
            return nlohmann::json{
                {"family", "stationary_gauss"}, {"sigma2", m.sigma2}, {"theta", m.theta}};
          },
      },
      f);
}

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unexpected field '" + key + "' for this variogram family");
  }
  for (const char* a : allowed) {
    const std::string k(a);
    if (k != "axis_scale" && !j.contains(k)) {
      throw ConfigError("missing field '" + k + "' for this variogram family");
    }
  }
}

double number(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

StationaryFamily stationary_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string()) {
    throw ConfigError("surrogate base must be an object with a family");
  }
  const auto family = j.at("family").get<std::string>();
  require_keys(j, {"family", "sigma2", "theta"});
  if (family == "stationary_exp") return StationaryExp{number(j, "sigma2"), number(j, "theta")};
  if (family == "stationary_gauss") {
    return StationaryGauss{number(j, "sigma2"), number(j, "theta")};
  }
  throw ConfigError("surrogate base must be stationary_exp or stationary_gauss");
}

}  // namespace

nlohmann::json to_json(const VariogramModel& model) {
  nlohmann::json j = std::visit(
      Overloaded{
          [](const Brownian& m) {
            return nlohmann::json{{"family", "brownian"}, {"sigma2", m.sigma2}};
          },
          [](const ConvolvedBrownian& m) {
            return nlohmann::json{
                {"family", "convolved_brownian"}, {"sigma2", m.sigma2}, {"r", m.r}, {"dim", m.dim}};
          },
          [](const StationaryExp& m) { return stationary_to_json(m); },
          [](const StationaryGauss& m) { return stationary_to_json(m); },
          [](const Surrogate& m) {
            return nlohmann::json{
                {"family", "surrogate"}, {"rho", m.rho}, {"base", stationary_to_json(m.base)}};
          },
      },
      model.family());
  if (model.axis_scale().size() > 0) {
    j["axis_scale"] = std::vector<double>(model.axis_scale().begin(), model.axis_scale().end());
  }
  return j;
}

VariogramModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("variogram model must be a JSON object");
  if (!j.contains("family") || !j.at("family").is_string()) {
    throw ConfigError("variogram model needs a string 'family'");
  }
  const auto family = j.at("family").get<std::string>();
  Eigen::VectorXd scale;
  if (j.contains("axis_scale")) {
    const auto& a = j.at("axis_scale");
    if (!a.is_array()) throw ConfigError("axis_scale must be an array");
    scale.resize(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number()) throw ConfigError("axis_scale entries must be numbers");
      scale[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    }
  }
  try {
    if (family == "brownian") {
      require_keys(j, {"family", "sigma2", "axis_scale"});
      return VariogramModel(Brownian{number(j, "sigma2")}, scale);
    }
    if (family == "convolved_brownian") {
      require_keys(j, {"family", "sigma2", "r", "dim", "axis_scale"});
      const auto& d = j.at("dim");
      if (!d.is_number_integer()) throw ConfigError("field 'dim' must be an integer");
      return VariogramModel(ConvolvedBrownian{number(j, "sigma2"), number(j, "r"), d.get<int>()},
                            scale);
    }
    if (family == "stationary_exp") {
      require_keys(j, {"family", "sigma2", "theta", "axis_scale"});
      return VariogramModel(StationaryExp{number(j, "sigma2"), number(j, "theta")}, scale);
    }
    if (family == "stationary_gauss") {
      require_keys(j, {"family", "sigma2", "theta", "axis_scale"});
      return VariogramModel(StationaryGauss{number(j, "sigma2"), number(j, "theta")}, scale);
    }
    if (family == "surrogate") {
      require_keys(j, {"family", "rho", "base", "axis_scale"});
      return VariogramModel(Surrogate{stationary_from_json(j.at("base")), number(j, "rho")}, scale);
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid variogram parameters: ") + e.what());
  }
  throw ConfigError("unknown variogram family '" + family + "'");
}

}  // namespace igpk
