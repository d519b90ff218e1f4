#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "igpk/kriging.hpp"
#include "igpk/location.hpp"

namespace igpk {

/// Comma-separated table with a header row; cells are kept as text.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::size_t column(const std::string& name) const;
  /// All cells as doubles (ConfigError on anything non-numeric).
  [[nodiscard]] Eigen::MatrixXd numeric() const;
  [[nodiscard]] Eigen::VectorXd numeric_column(const std::string& name) const;
};

/// Shortest text that reads back to the same double ("%.17g").
std::string format_double(double v);

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Header "x[,y,...],value"; the last column is the observed value.
Observations read_observations(const std::filesystem::path& path);
/// Every column is a coordinate.
LocationSet read_locations(const std::filesystem::path& path);

/// Coordinate column names x, y, z, then x3, x4, ...
std::vector<std::string> coord_names(int dim);

}  // namespace igpk
