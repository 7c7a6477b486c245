#pragma once

#include <optional>
#include <vector>

#include "mlbm/criteria.hpp"

namespace mlbm {

// Fraction of unordered unit pairs on which both partitions agree.
double rand_index(const std::vector<int>& p, const std::vector<int>& q);

// Hubert-Arabie adjusted Rand index. When the denominator vanishes the
// result is 1 for identical partitions and DegenerateError otherwise.
double adjusted_rand(const std::vector<int>& p, const std::vector<int>& q);

// |support(a) & support(b)| / |support(a)| over defined cells; absent when a
// has no ties.
std::optional<double> tie_overlap(const Relation& a, const Relation& b);

// Cramer's V of the 2x2 table (tie in a) x (tie in b) over defined cells;
// absent when a marginal is zero.
std::optional<double> cramers_v(const Relation& a, const Relation& b);

struct ImageCell {
	double mean = 0.0;
	std::size_t cells = 0;
	std::optional<BlockType> fitted;
};

struct ImageMatrix {
	int rows = 0;
	int cols = 0;
	std::vector<ImageCell> cells;

	const ImageCell& at(int r, int c) const { return cells[static_cast<std::size_t>(r * cols + c)]; }
};

// Block means over defined cells (densities for binary relations). With a
// model, each cell also carries the fitted block type.
ImageMatrix image_matrix(const MultilevelNetwork& network, std::size_t relation_id, const MultiPartition& partition,
                         const PrespecifiedModel* model = nullptr);

struct ForcedFit {
	double criterion = 0.0;
	ImageMatrix image;
};

// Criterion of a given partition on one relation, without search.
ForcedFit forced_fit(const MultilevelNetwork& network, std::size_t relation_id, const MultiPartition& partition,
                     const PrespecifiedModel& model);

// One-cluster criterion of a relation with a single block allowed to be any
// of `family` (by default null or complete(m_pre)).
double max_error(const MultilevelNetwork& network, std::size_t relation_id, const std::vector<BlockType>& family);
double max_error(const MultilevelNetwork& network, std::size_t relation_id, double m_pre);

} // namespace mlbm
