#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mlbm/matrix.hpp"

namespace mlbm {

struct Level {
	std::size_t id = 0;
	std::string name;
	std::vector<std::string> unit_names;

	std::size_t size() const { return unit_names.size(); }
};

// A valued relation defined on exactly one (from_level, to_level) region.
// Every other level pair is undefined for it.
struct Relation {
	std::size_t id = 0;
	std::string name;
	std::size_t from_level = 0;
	std::size_t to_level = 0;
	Matrix values;
	// Only meaningful for one-mode relations; self-ties are ignored by default.
	bool diagonal_defined = false;

	bool one_mode() const { return from_level == to_level; }

	bool defined(std::size_t i, std::size_t j) const {
		return !(one_mode() && i == j && !diagonal_defined);
	}

	std::size_t defined_cell_count() const;
};

// Levels and relations. Immutable once built; ids equal positions.
class MultilevelNetwork {
public:
	MultilevelNetwork() = default;

	const std::vector<Level>& levels() const { return levels_; }
	const std::vector<Relation>& relations() const { return relations_; }
	const Level& level(std::size_t id) const { return levels_.at(id); }
	const Relation& relation(std::size_t id) const { return relations_.at(id); }
	std::size_t level_count() const { return levels_.size(); }
	std::size_t relation_count() const { return relations_.size(); }
	std::size_t unit_count() const;

	std::optional<std::size_t> find_level(const std::string& name) const;
	std::optional<std::size_t> find_relation(const std::string& name) const;
	std::size_t level_id(const std::string& name) const;
	std::size_t relation_id(const std::string& name) const;

	// Relations whose rows or columns are units of `level`.
	std::vector<std::size_t> relations_touching(std::size_t level) const;

private:
	friend MultilevelNetwork build_network(std::vector<Level>, std::vector<Relation>);
	std::vector<Level> levels_;
	std::vector<Relation> relations_;
};

// Validates and assembles a network; level and relation ids are reassigned
// to their positions. Throws ValidationError.
MultilevelNetwork build_network(std::vector<Level> levels, std::vector<Relation> relations);

// Share of nonzero cells among the defined cells of the relation.
double density(const Relation& relation);

struct RelationSummary {
	std::string name;
	std::size_t rows = 0;
	std::size_t cols = 0;
	double density = 0.0;
	double average_in_degree = 0.0;
	// Absent for two-mode relations and for relations without ties.
	std::optional<double> reciprocity;
};

std::vector<RelationSummary> network_summary(const MultilevelNetwork& network);

} // namespace mlbm
