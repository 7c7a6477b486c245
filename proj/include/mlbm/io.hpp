#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlbm/network.hpp"
#include "mlbm/partition.hpp"

namespace mlbm {

// Minimal CSV/TSV reader: the delimiter is a tab if the first line holds
// one, otherwise a comma. Double-quoted fields may contain delimiters.
std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path);

struct LabeledMatrix {
	std::vector<std::string> row_names;
	std::vector<std::string> col_names;
	Matrix values;
};

// First row holds destination names, first column source names.
LabeledMatrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const LabeledMatrix& matrix);

// Network spec document:
// {
//   "levels": [{"name": "...", "units": [...]} | {"name": "...", "units_file": "..."}],
//   "relations": [{"name": "...", "from": "<level>", "to": "<level>",
//                  "matrix": "<csv>" | "values": [[...]], "diagonal_defined": false}]
// }
// Relative paths resolve against `base_dir`. Matrix rows and columns are
// matched to units by name, so file order need not follow level order.
MultilevelNetwork network_from_json(const nlohmann::json& spec, const std::filesystem::path& base_dir);
MultilevelNetwork load_network(const std::filesystem::path& path);

// Inverse of network_from_json with inline values.
nlohmann::json network_to_json(const MultilevelNetwork& network);

// unit,cluster rows (clusters 1-based).
void write_labels_csv(const std::filesystem::path& path, const std::vector<std::string>& units,
                      const std::vector<int>& labels);
// Labels in level unit order, converted to 0-based.
std::vector<int> read_labels_csv(const std::filesystem::path& path, const Level& level);

struct OrderedMatrix {
	std::vector<std::size_t> row_order;
	std::vector<std::size_t> col_order;
	std::vector<int> row_clusters;  // per ordered row
	std::vector<int> col_clusters;
	Matrix values;  // permuted
};

// Rows and columns sorted by (cluster, original index).
OrderedMatrix order_matrix(const MultilevelNetwork& network, std::size_t relation_id, const MultiPartition& partition);

// Writes `<stem>.csv` (header row of column units, a row of column clusters,
// then one row per unit: name, cluster, values) and `<stem>.txt`, a plain
// block view with cluster boundaries. Throws IoError.
OrderedMatrix emit_ordered_matrix(const MultilevelNetwork& network, std::size_t relation_id,
                                  const MultiPartition& partition, const std::filesystem::path& stem);

struct OrderedMatrixFile {
	std::vector<std::string> row_names;
	std::vector<std::string> col_names;
	std::vector<int> row_clusters;  // 1-based as written
	std::vector<int> col_clusters;
	Matrix values;
};

OrderedMatrixFile read_ordered_matrix_csv(const std::filesystem::path& path);

struct AttributeProfile {
	std::vector<std::string> columns;
	std::vector<std::size_t> frequencies;  // per cluster
	std::vector<std::vector<double>> cluster_means;  // [cluster][column]
	std::vector<double> overall_means;
};

// Per-cluster and overall means of the numeric columns of an attribute table
// keyed by unit name (first column). Every unit of the level must appear;
// unknown names raise ValidationError. Empty cells are skipped.
AttributeProfile attribute_profile(const Level& level, const std::vector<int>& labels, int clusters,
                                   const std::filesystem::path& attributes);
void write_attribute_profile(const std::filesystem::path& path, const AttributeProfile& profile);
nlohmann::json to_json(const AttributeProfile& profile);

void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace mlbm
