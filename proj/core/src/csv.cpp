#include "igpk/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "igpk/error.hpp"

namespace igpk {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t')) --e;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || b == e) throw ConfigError("not a number: '" + s + "'");
  return v;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ConfigError("missing CSV column '" + name + "'");
}

Eigen::MatrixXd CsvTable::numeric() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_double(rows[i][j]);
    }
  }
  return m;
}

Eigen::VectorXd CsvTable::numeric_column(const std::string& name) const {
  const std::size_t c = column(name);
  Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_double(rows[i][c]);
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw ConfigError(path.string() + ": row has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw ConfigError(path.string() + " is empty");
  return t;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  auto write_row = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& r : table.rows) write_row(r);
  if (!out) throw ConfigError("failed writing " + path.string());
}

Observations read_observations(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  if (t.header.size() < 2) throw ConfigError(path.string() + ": need coordinate and value columns");
  const Eigen::MatrixXd m = t.numeric();
  const Eigen::Index d = m.cols() - 1;
  try {
    return Observations(LocationSet(m.leftCols(d)), m.col(d));
  } catch (const DomainError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

LocationSet read_locations(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  try {
    return LocationSet(t.numeric());
  } catch (const DomainError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> coord_names(int dim) {
  static const char* first[] = {"x", "y", "z"};
  std::vector<std::string> out;
  for (int i = 0; i < dim; ++i) out.emplace_back(i < 3 ? first[i] : "x" + std::to_string(i));
  return out;
}

}  // namespace igpk
