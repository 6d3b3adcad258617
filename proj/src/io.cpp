#include "htmmiow/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "htmmiow/util.hpp"

namespace htmmiow {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  for (;;) {
    auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_number(const std::string& field, const std::string& source, int line_no) {
  double value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(value)) {
    throw ParseError(source + ", line " + std::to_string(line_no) + ": malformed number '" +
                     field + "'");
  }
  return value;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

struct RawTable {
  std::vector<std::string> header;       // without the leading sample_id cell
  std::vector<std::string> sample_ids;   // one per data row
  Eigen::MatrixXd values;
};

RawTable read_delimited(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ": empty file");
  line = strip_cr(line);
  std::vector<std::string> header = split_fields(line);
  if (header.size() < 2 || header[0] != "sample_id") {
    throw ParseError(source + ", line 1: header must start with 'sample_id'");
  }

  RawTable table;
  table.header.assign(header.begin() + 1, header.end());
  {
    std::unordered_map<std::string, int> seen;
    for (const auto& name : table.header) {
      if (name.empty()) throw ParseError(source + ", line 1: empty column name");
      if (++seen[name] > 1) throw ParseError(source + ", line 1: duplicate column '" + name + "'");
    }
  }

  const std::size_t n_cols = table.header.size();
  std::vector<std::vector<double>> rows;
  std::unordered_map<std::string, int> seen_samples;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (fields.size() != n_cols + 1) {
      throw ParseError(source + ", line " + std::to_string(line_no) + ": expected " +
                       std::to_string(n_cols + 1) + " fields, found " +
                       std::to_string(fields.size()));
    }
    if (fields[0].empty()) {
      throw ParseError(source + ", line " + std::to_string(line_no) + ": empty sample id");
    }
    if (++seen_samples[fields[0]] > 1) {
      throw ParseError(source + ", line " + std::to_string(line_no) + ": duplicate sample id '" +
                       fields[0] + "'");
    }
    table.sample_ids.push_back(fields[0]);
    std::vector<double> row(n_cols);
    for (std::size_t j = 0; j < n_cols; ++j) {
      if (fields[j + 1].empty()) {
        throw ParseError(source + ", line " + std::to_string(line_no) +
                         ": missing value in column '" + table.header[j] + "'");
      }
      row[j] = parse_number(fields[j + 1], source, line_no);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(source + ": no data rows");

  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < n_cols; ++j) {
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return table;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

CountMatrix read_count_table(std::istream& in, const std::string& source_name) {
  RawTable raw = read_delimited(in, source_name);
  if ((raw.values.array() < 0).any()) {
    // find the offending row for the error message
    for (Eigen::Index i = 0; i < raw.values.rows(); ++i) {
      if ((raw.values.row(i).array() < 0).any()) {
        throw ParseError(source_name + ", line " + std::to_string(i + 2) +
                         ": negative count for sample '" + raw.sample_ids[static_cast<std::size_t>(i)] + "'");
      }
    }
  }
  CountMatrix counts;
  counts.values = std::move(raw.values);
  counts.sample_ids = std::move(raw.sample_ids);
  counts.taxa_ids = std::move(raw.header);
  counts.validate();
  return counts;
}

CountMatrix read_count_table_file(const std::string& path) {
  auto in = open_input(path);
  return read_count_table(in, path);
}

void write_count_table(const CountMatrix& counts, std::ostream& out) {
  counts.validate();
  out << "sample_id";
  for (const auto& id : counts.taxa_ids) out << ',' << id;
  out << '\n';
  for (Eigen::Index i = 0; i < counts.values.rows(); ++i) {
    out << counts.sample_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < counts.values.cols(); ++j) {
      out << ',' << format_real(counts.values(i, j));
    }
    out << '\n';
  }
}

void write_count_table_file(const CountMatrix& counts, const std::string& path) {
  auto out = open_output(path);
  write_count_table(counts, out);
}

bool MetadataTable::has_column(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

Eigen::VectorXd MetadataTable::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw DataError("metadata column not found: " + name);
  return values.col(it - columns.begin());
}

Eigen::VectorXd MetadataTable::binary_column(const std::string& name) const {
  Eigen::VectorXd v = column(name);
  if (((v.array() != 0.0) && (v.array() != 1.0)).any()) {
    throw DataError("metadata column '" + name + "' must contain only 0 or 1");
  }
  return v;
}

MetadataTable read_metadata(std::istream& in, const std::string& source_name) {
  RawTable raw = read_delimited(in, source_name);
  MetadataTable table;
  table.sample_ids = std::move(raw.sample_ids);
  table.columns = std::move(raw.header);
  table.values = std::move(raw.values);
  return table;
}

MetadataTable read_metadata_file(const std::string& path) {
  auto in = open_input(path);
  return read_metadata(in, path);
}

void write_metadata(const MetadataTable& table, std::ostream& out) {
  write_labeled_matrix(table.sample_ids, table.columns, table.values, out);
}

void write_metadata_file(const MetadataTable& table, const std::string& path) {
  auto out = open_output(path);
  write_metadata(table, out);
}

MetadataTable join_metadata(const CountMatrix& counts, const MetadataTable& metadata) {
  std::unordered_map<std::string, Eigen::Index> meta_row;
  for (std::size_t i = 0; i < metadata.sample_ids.size(); ++i) {
    meta_row[metadata.sample_ids[i]] = static_cast<Eigen::Index>(i);
  }
  if (meta_row.size() != counts.sample_ids.size()) {
    throw DataError("metadata and count table carry different sample counts (" +
                    std::to_string(meta_row.size()) + " vs " +
                    std::to_string(counts.sample_ids.size()) + ")");
  }
  MetadataTable joined;
  joined.columns = metadata.columns;
  joined.sample_ids = counts.sample_ids;
  joined.values.resize(counts.values.rows(), metadata.values.cols());
  for (std::size_t i = 0; i < counts.sample_ids.size(); ++i) {
    auto it = meta_row.find(counts.sample_ids[i]);
    if (it == meta_row.end()) {
      throw DataError("sample '" + counts.sample_ids[i] + "' missing from metadata");
    }
    joined.values.row(static_cast<Eigen::Index>(i)) = metadata.values.row(it->second);
  }
  return joined;
}

void write_result_record(const MediationResult& result, std::ostream& out) {
  out << "beta1," << format_real(result.beta1) << '\n';
  out << "gamma1," << format_real(result.gamma1) << '\n';
  out << "t_obs," << format_real(result.t_obs) << '\n';
  out << "p_value," << format_real(result.p_value) << '\n';
  out << "B," << result.n_permutations << '\n';
  out << "n_failed_permutations," << result.n_failed_permutations << '\n';
  out << "seed," << result.seed << '\n';
}

void write_result_record_file(const MediationResult& result, const std::string& path) {
  auto out = open_output(path);
  write_result_record(result, out);
}

void write_null_stats(const std::vector<double>& null_stats, std::ostream& out) {
  out << "t_null\n";
  for (double t : null_stats) out << format_real(t) << '\n';
}

void write_null_stats_file(const std::vector<double>& null_stats, const std::string& path) {
  auto out = open_output(path);
  write_null_stats(null_stats, out);
}

void write_labeled_matrix(const std::vector<std::string>& sample_ids,
                          const std::vector<std::string>& columns, const Eigen::MatrixXd& values,
                          std::ostream& out) {
  if (static_cast<Eigen::Index>(sample_ids.size()) != values.rows() ||
      static_cast<Eigen::Index>(columns.size()) != values.cols()) {
    throw ShapeError("labeled matrix dimensions do not match labels");
  }
  out << "sample_id";
  for (const auto& name : columns) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out << sample_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << ',' << format_real(values(i, j));
    out << '\n';
  }
}

void write_labeled_matrix_file(const std::vector<std::string>& sample_ids,
                               const std::vector<std::string>& columns,
                               const Eigen::MatrixXd& values, const std::string& path) {
  auto out = open_output(path);
  write_labeled_matrix(sample_ids, columns, values, out);
}

}  // namespace htmmiow
