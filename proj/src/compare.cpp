#include "mlbm/compare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include "mlbm/errors.hpp"

namespace mlbm {

namespace {

std::int64_t pairs(std::int64_t n) { return n * (n - 1) / 2; }

// Pair counts of the contingency table, kept in integers so that both
// indices come out of a single division.
struct Contingency {
	std::int64_t total = 0;      // C(n, 2)
	std::int64_t sum_cells = 0;  // sum over cells of C(n_ij, 2)
	std::int64_t sum_rows = 0;
	std::int64_t sum_cols = 0;
};

Contingency contingency(const std::vector<int>& p, const std::vector<int>& q) {
	if (p.size() != q.size())
		throw ValidationError("partitions cover " + std::to_string(p.size()) + " and " + std::to_string(q.size()) +
		                      " units");
	std::map<std::pair<int, int>, std::int64_t> cells;
	std::map<int, std::int64_t> rows, cols;
	for (std::size_t i = 0; i < p.size(); ++i) {
		++cells[{p[i], q[i]}];
		++rows[p[i]];
		++cols[q[i]];
	}
	Contingency t;
	t.total = pairs(static_cast<std::int64_t>(p.size()));
	for (const auto& [key, c] : cells)
		t.sum_cells += pairs(c);
	for (const auto& [key, c] : rows)
		t.sum_rows += pairs(c);
	for (const auto& [key, c] : cols)
		t.sum_cols += pairs(c);
	return t;
}

} // namespace

double rand_index(const std::vector<int>& p, const std::vector<int>& q) {
	const auto t = contingency(p, q);
	if (t.total == 0)
		return 1.0;
	// Pairs together in both plus pairs apart in both.
	const auto agree = t.total - t.sum_rows - t.sum_cols + 2 * t.sum_cells;
	return static_cast<double>(agree) / static_cast<double>(t.total);
}

double adjusted_rand(const std::vector<int>& p, const std::vector<int>& q) {
	const auto t = contingency(p, q);
	// (index - expected) / (max - expected), scaled by 2 * C(n, 2).
	using wide = __int128;
	const wide numerator = 2 * (static_cast<wide>(t.sum_cells) * t.total - static_cast<wide>(t.sum_rows) * t.sum_cols);
	const wide denominator =
		static_cast<wide>(t.sum_rows + t.sum_cols) * t.total - 2 * static_cast<wide>(t.sum_rows) * t.sum_cols;
	if (denominator == 0) {
		if (rand_index(p, q) == 1.0)
			return 1.0;
		throw DegenerateError("adjusted Rand index undefined: both partitions are trivial and differ");
	}
	return static_cast<double>(numerator) / static_cast<double>(denominator);
}

namespace {

void require_same_shape(const Relation& a, const Relation& b) {
	if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols())
		throw ValidationError("relations '" + a.name + "' and '" + b.name + "' differ in shape");
}

// Defined in both relations.
bool both_defined(const Relation& a, const Relation& b, std::size_t i, std::size_t j) {
	return a.defined(i, j) && b.defined(i, j);
}

} // namespace

std::optional<double> tie_overlap(const Relation& a, const Relation& b) {
	require_same_shape(a, b);
	std::size_t ties = 0, shared = 0;
	for (std::size_t i = 0; i < a.values.rows(); ++i)
		for (std::size_t j = 0; j < a.values.cols(); ++j) {
			if (!both_defined(a, b, i, j) || a.values(i, j) == 0.0)
				continue;
			++ties;
			if (b.values(i, j) != 0.0)
				++shared;
		}
	if (ties == 0)
		return std::nullopt;
	return static_cast<double>(shared) / static_cast<double>(ties);
}

std::optional<double> cramers_v(const Relation& a, const Relation& b) {
	require_same_shape(a, b);
	double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
	for (std::size_t i = 0; i < a.values.rows(); ++i)
		for (std::size_t j = 0; j < a.values.cols(); ++j) {
			if (!both_defined(a, b, i, j))
				continue;
			const bool x = a.values(i, j) != 0.0;
			const bool y = b.values(i, j) != 0.0;
			(x ? (y ? n11 : n10) : (y ? n01 : n00)) += 1.0;
		}
	const double marginals = (n11 + n10) * (n01 + n00) * (n11 + n01) * (n10 + n00);
	if (marginals == 0.0)
		return std::nullopt;
	return std::abs(n11 * n00 - n10 * n01) / std::sqrt(marginals);
}

ImageMatrix image_matrix(const MultilevelNetwork& network, std::size_t relation_id, const MultiPartition& partition,
                         const PrespecifiedModel* model) {
	require_feasible(partition, network);
	const auto& relation = network.relation(relation_id);
	ImageMatrix image;
	image.rows = partition.cluster_counts[relation.from_level];
	image.cols = partition.cluster_counts[relation.to_level];
	image.cells.resize(static_cast<std::size_t>(image.rows * image.cols));
	const auto& rows = partition.labels[relation.from_level];
	const auto& cols = partition.labels[relation.to_level];
	std::vector<double> sums(image.cells.size(), 0.0);
	for (std::size_t i = 0; i < relation.values.rows(); ++i)
		for (std::size_t j = 0; j < relation.values.cols(); ++j) {
			if (!relation.defined(i, j))
				continue;
			const auto idx = static_cast<std::size_t>(rows[i] * image.cols + cols[j]);
			sums[idx] += relation.values(i, j);
			++image.cells[idx].cells;
		}
	for (std::size_t idx = 0; idx < sums.size(); ++idx)
		if (image.cells[idx].cells > 0)
			image.cells[idx].mean = sums[idx] / static_cast<double>(image.cells[idx].cells);
	if (model) {
		const auto rc = relation_criterion(network, relation_id, partition, *model);
		for (const auto& block : rc.blocks)
			image.cells[static_cast<std::size_t>(block.row * image.cols + block.col)].fitted = block.type;
	}
	return image;
}

ForcedFit forced_fit(const MultilevelNetwork& network, std::size_t relation_id, const MultiPartition& partition,
                     const PrespecifiedModel& model) {
	require_feasible(partition, network);
	ForcedFit out;
	out.criterion = relation_criterion(network, relation_id, partition, model).raw;
	out.image = image_matrix(network, relation_id, partition, &model);
	return out;
}

double max_error(const MultilevelNetwork& network, std::size_t relation_id, const std::vector<BlockType>& family) {
	return relation_criterion(network, relation_id, single_cluster_partition(network),
	                          PrespecifiedModel(1, 1, {family}))
		.raw;
}

double max_error(const MultilevelNetwork& network, std::size_t relation_id, double m_pre) {
	return max_error(network, relation_id, {BlockType::null_block(), BlockType::complete(m_pre)});
}

} // namespace mlbm
