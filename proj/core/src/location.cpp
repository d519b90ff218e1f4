#include "igpk/location.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "igpk/error.hpp"

namespace igpk {

namespace {

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (!m.allFinite()) throw DomainError("location coordinates must be finite");
}

}  // namespace

Location::Location(Eigen::VectorXd coords) : coords_(std::move(coords)) {
  if (coords_.size() < 1) throw DomainError("location needs at least one coordinate");
  require_finite(coords_);
}

Location::Location(std::initializer_list<double> coords)
    : Location(Eigen::VectorXd::Map(coords.begin(), static_cast<Eigen::Index>(coords.size()))) {}

bool coincident(const Location& a, const Location& b, double tol) {
  if (a.dim() != b.dim()) return false;
  return (a.coords() - b.coords()).cwiseAbs().maxCoeff() <= tol;
}

LocationSet::LocationSet(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (points_.rows() > 0 && points_.cols() < 1) {
    throw DomainError("location set needs at least one coordinate");
  }
  require_finite(points_);
  for (Eigen::Index i = 0; i < points_.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < points_.rows(); ++j) {
      if ((points_.row(i) - points_.row(j)).cwiseAbs().maxCoeff() <= kCoincidenceTol) {
        throw DomainError("duplicate locations at rows " + std::to_string(i) + " and " +
                          std::to_string(j));
      }
    }
  }
}

LocationSet LocationSet::from_points(const std::vector<Location>& points) {
  if (points.empty()) return LocationSet{};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(points.size()), points.front().dim());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim() != points.front().dim()) {
      throw DomainError("all locations must share one dimension");
    }
    m.row(static_cast<Eigen::Index>(i)) = points[i].coords().transpose();
  }
  return LocationSet(std::move(m));
}

LocationSet LocationSet::unchecked(Eigen::MatrixXd points) {
  require_finite(points);
  LocationSet s;
  s.points_ = std::move(points);
  return s;
}

Location LocationSet::operator[](std::size_t i) const {
  return Location(points_.row(static_cast<Eigen::Index>(i)).transpose());
}

LocationSet LocationSet::concat(const LocationSet& other) const {
  if (empty()) return unchecked(other.points_);
  if (other.empty()) return unchecked(points_);
  if (dim() != other.dim()) throw DomainError("cannot join location sets of different dimension");
  Eigen::MatrixXd m(points_.rows() + other.points_.rows(), points_.cols());
  m << points_, other.points_;
  return unchecked(std::move(m));
}

std::optional<std::size_t> LocationSet::find_coincident(const Location& t, double tol) const {
  if (t.dim() != dim()) return std::nullopt;
  for (Eigen::Index i = 0; i < points_.rows(); ++i) {
    if ((points_.row(i).transpose() - t.coords()).cwiseAbs().maxCoeff() <= tol) {
      return static_cast<std::size_t>(i);
    }
  }
  return std::nullopt;
}

double LocationSet::min_separation() const {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < points_.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < points_.rows(); ++j) {
      best = std::min(best, (points_.row(i) - points_.row(j)).norm());
    }
  }
  return best;
}

}  // namespace igpk
