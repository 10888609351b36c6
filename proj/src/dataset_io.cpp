#include "grevf/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace grevf {

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

double parse_field(const std::string& field, long line_no, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError("cannot parse " + what + " '" + field + "' at line " +
                         std::to_string(line_no),
                     line_no);
  }
}

// header, then (x, value) pairs from the first two columns
std::vector<std::pair<double, double>> read_xy(const std::string& path,
                                               const char* expected_first) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file '" + path + "'");

  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty file '" + path + "'", 1);
  ++line_no;
  line = strip_cr(line);
  const auto header = split_csv(line);
  if (header.size() < 2 || header[0] != expected_first) {
    throw ParseError("expected header starting '" + std::string(expected_first) +
                         ",<value>' in '" + path + "', got '" + line + "'",
                     1);
  }

  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() < 2) {
      throw ParseError("expected at least two columns at line " + std::to_string(line_no),
                       line_no);
    }
    const double x = parse_field(fields[0], line_no, "x");
    const double v = parse_field(fields[1], line_no, "value");
    rows.emplace_back(x, v);
  }
  return rows;
}

}  // namespace

Dataset load_dataset(const std::string& path, const Interval& domain,
                     double noise_variance) {
  const auto rows = read_xy(path, "x");
  if (rows.empty()) throw ParseError("no observations in '" + path + "'");

  std::vector<double> X;
  Vector y(static_cast<Eigen::Index>(rows.size()));
  std::string offenders;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    X.push_back(rows[i].first);
    y[static_cast<Eigen::Index>(i)] = rows[i].second;
    if (!domain.contains(rows[i].first)) {
      if (!offenders.empty()) offenders += ", ";
      offenders += std::to_string(rows[i].first);
    }
  }
  if (!offenders.empty()) {
    throw DomainError("locations outside domain [" + std::to_string(domain.a) + ", " +
                      std::to_string(domain.b) + "]: " + offenders);
  }
  return Dataset(domain, std::move(X), std::move(y), noise_variance);
}

RealFn load_feature_table(const std::string& path) {
  auto rows = read_xy(path, "x");
  if (rows.size() < 2) {
    throw ParseError("feature table '" + path + "' needs at least two rows");
  }
  std::sort(rows.begin(), rows.end());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) {
      throw ParseError("feature table '" + path + "' has duplicate x = " +
                       std::to_string(rows[i].first));
    }
  }
  auto table = std::make_shared<const std::vector<std::pair<double, double>>>(std::move(rows));
  return [table](double x) {
    const auto& t = *table;
    if (x < t.front().first || x > t.back().first) return 0.0;
    auto hi = std::lower_bound(t.begin(), t.end(), std::make_pair(x, -HUGE_VAL));
    if (hi == t.begin()) return t.front().second;
    if (hi == t.end()) return t.back().second;
    const auto lo = hi - 1;
    const double span = hi->first - lo->first;
    const double w = (x - lo->first) / span;
    return (1.0 - w) * lo->second + w * hi->second;
  };
}

void write_predictions_csv(const std::vector<PredictionRow>& rows,
                           const std::string& path, bool include_method) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << (include_method ? "x,mean,variance,method\n" : "x,mean,variance\n");
  out.precision(17);
  for (const auto& row : rows) {
    out << row.x << ',' << row.mean << ',' << row.variance;
    if (include_method) out << ',' << row.method;
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace grevf
