#include "icscream/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "icscream/error.hpp"

namespace icscream {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::penalize: return "penalize";
    case Role::candidate: return "candidate";
    case Role::fixed: return "fixed";
  }
  return "unknown";
}

Role parse_role(std::string_view name) {
  if (name == "penalize") return Role::penalize;
  if (name == "candidate") return Role::candidate;
  if (name == "fixed") return Role::fixed;
  throw Error(ErrorKind::config, "unknown variable role '" + std::string(name) + "'");
}

void validate_schema(std::span<const VariableSpec> schema) {
  if (schema.empty()) throw Error(ErrorKind::invalid_argument, "schema has no variables");
  std::set<std::string> names;
  for (std::size_t k = 0; k < schema.size(); ++k) {
    if (schema[k].name.empty()) {
      throw Error(ErrorKind::invalid_argument, "variable " + std::to_string(k) + " has no name");
    }
    if (!names.insert(schema[k].name).second) {
      throw Error(ErrorKind::invalid_argument, "duplicate variable name '" + schema[k].name + "'");
    }
    if (schema[k].index != k) {
      throw Error(ErrorKind::invalid_argument,
                  "variable '" + schema[k].name + "' has index " + std::to_string(schema[k].index) +
                      ", expected " + std::to_string(k));
    }
  }
}

std::vector<std::size_t> indices_with_role(std::span<const VariableSpec> schema, Role role) {
  std::vector<std::size_t> out;
  for (const auto& v : schema) {
    if (v.role == role) out.push_back(v.index);
  }
  return out;
}

LearningSample::LearningSample(Eigen::MatrixXd design, Eigen::VectorXd output,
                               std::vector<VariableSpec> variables, std::string output_name)
    : design_(std::move(design)),
      output_(std::move(output)),
      variables_(std::move(variables)),
      output_name_(std::move(output_name)) {
  validate_schema(variables_);
  if (design_.rows() < 2) {
    throw Error(ErrorKind::invalid_argument, "learning sample needs at least 2 rows");
  }
  if (static_cast<std::size_t>(design_.cols()) != variables_.size()) {
    throw Error(ErrorKind::invalid_argument, "design has " + std::to_string(design_.cols()) +
                                                 " columns but schema lists " +
                                                 std::to_string(variables_.size()));
  }
  if (output_.size() != design_.rows()) {
    throw Error(ErrorKind::invalid_argument, "output length differs from design row count");
  }
  for (Eigen::Index i = 0; i < design_.rows(); ++i) {
    if (!std::isfinite(output_[i])) {
      throw Error(ErrorKind::missing_value, "row " + std::to_string(i + 1) + ", column '" +
                                                output_name_ + "': non-finite output");
    }
    for (Eigen::Index k = 0; k < design_.cols(); ++k) {
      const auto& spec = variables_[static_cast<std::size_t>(k)];
      const double v = design_(i, k);
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::missing_value,
                    "row " + std::to_string(i + 1) + ", column '" + spec.name + "': non-finite value");
      }
      if (!spec.distribution.in_support(v)) {
        throw Error(ErrorKind::out_of_support,
                    "row " + std::to_string(i + 1) + ", column '" + spec.name + "': value " +
                        format_double(v) + " outside declared support");
      }
    }
  }
}

Eigen::MatrixXd LearningSample::columns(std::span<const std::size_t> indices) const {
  Eigen::MatrixXd out(design_.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= dimension()) {
      throw Error(ErrorKind::invalid_argument, "column index " + std::to_string(indices[j]) +
                                                   " out of range");
    }
    out.col(static_cast<Eigen::Index>(j)) = design_.col(static_cast<Eigen::Index>(indices[j]));
  }
  return out;
}

LearningSample LearningSample::subset(std::span<const std::size_t> rows) const {
  Eigen::MatrixXd d(static_cast<Eigen::Index>(rows.size()), design_.cols());
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= size()) throw Error(ErrorKind::invalid_argument, "row index out of range");
    d.row(static_cast<Eigen::Index>(i)) = design_.row(static_cast<Eigen::Index>(rows[i]));
    y[static_cast<Eigen::Index>(i)] = output_[static_cast<Eigen::Index>(rows[i])];
  }
  return LearningSample(std::move(d), std::move(y), variables_, output_name_);
}

LearningSample load_sample(const std::filesystem::path& path, std::vector<VariableSpec> schema,
                           const std::string& output_column) {
  validate_schema(schema);
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open sample file '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw Error(ErrorKind::parse, "sample file '" + path.string() + "' is empty (no header)");
  }
  const auto header = split_fields(line);

  // Map every header column to a schema slot (or the output slot, -1).
  std::map<std::string, std::size_t> by_name;
  for (const auto& v : schema) by_name.emplace(v.name, v.index);
  std::vector<long> slot(header.size(), -2);
  std::set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!seen.insert(header[c]).second) {
      throw Error(ErrorKind::header_mismatch, "column '" + header[c] + "' appears twice in header");
    }
    if (header[c] == output_column) {
      slot[c] = -1;
    } else if (auto it = by_name.find(header[c]); it != by_name.end()) {
      slot[c] = static_cast<long>(it->second);
    } else {
      throw Error(ErrorKind::header_mismatch, "header column '" + header[c] +
                                                  "' is not in the variable schema");
    }
  }
  if (!seen.count(output_column)) {
    throw Error(ErrorKind::header_mismatch, "output column '" + output_column + "' missing from header");
  }
  for (const auto& v : schema) {
    if (!seen.count(v.name)) {
      throw Error(ErrorKind::header_mismatch, "schema variable '" + v.name + "' missing from header");
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<double> ys;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::parse, "row " + std::to_string(rows.size() + 1) + " (line " +
                                        std::to_string(line_no) + "): expected " +
                                        std::to_string(header.size()) + " fields, found " +
                                        std::to_string(fields.size()));
    }
    std::vector<double> row(schema.size());
    double y = 0.0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto& f = fields[c];
      if (f.empty() || f == "NA" || f == "NaN" || f == "nan") {
        throw Error(ErrorKind::missing_value, "row " + std::to_string(rows.size() + 1) +
                                                  ", column '" + header[c] + "': missing value");
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw Error(ErrorKind::parse, "row " + std::to_string(rows.size() + 1) + ", column '" +
                                          header[c] + "': cannot parse '" + f + "'");
      }
      if (slot[c] == -1) {
        y = v;
      } else {
        row[static_cast<std::size_t>(slot[c])] = v;
      }
    }
    rows.push_back(std::move(row));
    ys.push_back(y);
  }
  if (rows.empty()) {
    throw Error(ErrorKind::parse, "sample file '" + path.string() + "' has a header but no rows");
  }

  Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(schema.size()));
  Eigen::VectorXd output(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < schema.size(); ++k) {
      design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    output[static_cast<Eigen::Index>(i)] = ys[i];
  }
  return LearningSample(std::move(design), std::move(output), std::move(schema), output_column);
}

void write_sample(const std::filesystem::path& path, const LearningSample& sample) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write sample file '" + path.string() + "'");
  for (const auto& v : sample.variables()) out << v.name << ',';
  out << sample.output_name() << '\n';
  const auto& d = sample.design();
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index k = 0; k < d.cols(); ++k) out << format_double(d(i, k)) << ',';
    out << format_double(sample.output()[i]) << '\n';
  }
  if (!out) throw Error(ErrorKind::io, "failed writing sample file '" + path.string() + "'");
}

double empirical_quantile(std::span<const double> values, double level) {
  if (values.empty()) throw Error(ErrorKind::invalid_argument, "empirical quantile of an empty vector");
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "quantile level must lie in (0, 1)");
  }
  std::vector<double> sorted(values.begin(), values.end());
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(rank - 1), sorted.end());
  return sorted[rank - 1];
}

Threshold critical_threshold(const LearningSample& sample, double level) {
  const auto& y = sample.output();
  return {level, empirical_quantile(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), level)};
}

Eigen::MatrixXd sample_inputs(std::span<const VariableSpec> specs, std::size_t count,
                              std::uint64_t seed) {
  if (count == 0) throw Error(ErrorKind::invalid_argument, "sample count must be positive");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(specs.size()));
  for (std::size_t k = 0; k < specs.size(); ++k) {
    // One stream per column keeps each column independent of how many others exist.
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    for (std::size_t i = 0; i < count; ++i) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = specs[k].distribution.sample(rng);
    }
  }
  return out;
}

}  // namespace icscream
