#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace igpk {

/// Coordinates closer than this (max-abs per coordinate) are the same point.
inline constexpr double kCoincidenceTol = 1e-12;

/// A point in R^d.
class Location {
 public:
  Location() = default;
  explicit Location(Eigen::VectorXd coords);
  Location(std::initializer_list<double> coords);

  [[nodiscard]] int dim() const { return static_cast<int>(coords_.size()); }
  [[nodiscard]] double operator[](int i) const { return coords_[i]; }
  [[nodiscard]] const Eigen::VectorXd& coords() const { return coords_; }

 private:
  Eigen::VectorXd coords_;
};

[[nodiscard]] bool coincident(const Location& a, const Location& b,
                              double tol = kCoincidenceTol);

/// Ordered set of points sharing one dimension, stored one point per row.
class LocationSet {
 public:
  LocationSet() = default;
  /// Validates finiteness and pairwise distinctness.
  explicit LocationSet(Eigen::MatrixXd points);
  static LocationSet from_points(const std::vector<Location>& points);
  /// No distinctness check; used for joint sets that may repeat points.
  static LocationSet unchecked(Eigen::MatrixXd points);

  [[nodiscard]] std::size_t size() const {
    return static_cast<std::size_t>(points_.rows());
  }
  [[nodiscard]] bool empty() const { return points_.rows() == 0; }
  [[nodiscard]] int dim() const { return static_cast<int>(points_.cols()); }
  [[nodiscard]] Location operator[](std::size_t i) const;
  [[nodiscard]] const Eigen::MatrixXd& matrix() const { return points_; }

  /// Rows of *this followed by rows of other; never checked for distinctness.
  [[nodiscard]] LocationSet concat(const LocationSet& other) const;
  [[nodiscard]] std::optional<std::size_t> find_coincident(
      const Location& t, double tol = kCoincidenceTol) const;
  /// Smallest pairwise Euclidean distance (infinity when size() < 2).
  [[nodiscard]] double min_separation() const;

 private:
  Eigen::MatrixXd points_;
};

}  // namespace igpk
