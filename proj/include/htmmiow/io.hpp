#pragma once

// File formats: comma-delimited count tables (header "sample_id" then taxa
// ids), metadata tables of numeric columns keyed by sample_id, flat
// key,value result records, and single-column sidecars. Parsers are strict:
// malformed numbers, duplicate ids, ragged rows, and missing values are
// errors naming the offending line.

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "htmmiow/compositional.hpp"
#include "htmmiow/mediation.hpp"

namespace htmmiow {

CountMatrix read_count_table(std::istream& in, const std::string& source_name = "<stream>");
CountMatrix read_count_table_file(const std::string& path);
void write_count_table(const CountMatrix& counts, std::ostream& out);
void write_count_table_file(const CountMatrix& counts, const std::string& path);

struct MetadataTable {
  std::vector<std::string> sample_ids;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;  // n x |columns|

  bool has_column(const std::string& name) const;
  Eigen::VectorXd column(const std::string& name) const;
  // Column restricted to {0, 1}; anything else is a typed-column error.
  Eigen::VectorXd binary_column(const std::string& name) const;
};

MetadataTable read_metadata(std::istream& in, const std::string& source_name = "<stream>");
MetadataTable read_metadata_file(const std::string& path);
void write_metadata(const MetadataTable& table, std::ostream& out);
void write_metadata_file(const MetadataTable& table, const std::string& path);

// Reorders metadata rows to the count table's sample order. Ids must match
// as sets; anything unmatched on either side is an error.
MetadataTable join_metadata(const CountMatrix& counts, const MetadataTable& metadata);

// Flat key,value record with keys beta1, gamma1, t_obs, p_value, B,
// n_failed_permutations, seed.
void write_result_record(const MediationResult& result, std::ostream& out);
void write_result_record_file(const MediationResult& result, const std::string& path);

// Single-column sidecar with header t_null, one statistic per line.
void write_null_stats(const std::vector<double>& null_stats, std::ostream& out);
void write_null_stats_file(const std::vector<double>& null_stats, const std::string& path);

// Generic labeled matrix (sample_id + named columns), used for the
// transform/reduce exports and simulated metadata.
void write_labeled_matrix(const std::vector<std::string>& sample_ids,
                          const std::vector<std::string>& columns, const Eigen::MatrixXd& values,
                          std::ostream& out);
void write_labeled_matrix_file(const std::vector<std::string>& sample_ids,
                               const std::vector<std::string>& columns,
                               const Eigen::MatrixXd& values, const std::string& path);

}  // namespace htmmiow
