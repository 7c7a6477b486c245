#include "mlbm/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mlbm/errors.hpp"

namespace mlbm {

std::string BlockType::to_string() const {
	switch (kind) {
	case BlockKind::do_not_care:
		return "dnc";
	case BlockKind::null:
		return "null";
	case BlockKind::complete: {
		std::ostringstream os;
		os << (pinned ? "complete_pinned(" : "complete(") << m_pre << ")";
		return os.str();
	}
	}
	return "?";
}

namespace {

double complete_center(double mean, const BlockType& type) {
	return type.pinned ? type.m_pre : std::max(mean, type.m_pre);
}

} // namespace

double block_inconsistency(std::span<const double> values, const BlockType& type) {
	if (values.empty() || type.kind == BlockKind::do_not_care)
		return 0.0;
	double center = 0.0;
	if (type.kind == BlockKind::complete) {
		double sum = 0.0;
		for (double v : values)
			sum += v;
		center = complete_center(sum / static_cast<double>(values.size()), type);
	}
	double ss = 0.0;
	for (double v : values)
		ss += (v - center) * (v - center);
	return ss;
}

double block_inconsistency_from_moments(std::size_t count, double sum, double sum_sq, const BlockType& type) {
	if (count == 0 || type.kind == BlockKind::do_not_care)
		return 0.0;
	if (type.kind == BlockKind::null)
		return sum_sq;
	const double n = static_cast<double>(count);
	const double mean = sum / n;
	const double center = complete_center(mean, type);
	const double spread = std::max(sum_sq - sum * mean, 0.0);
	return spread + n * (mean - center) * (mean - center);
}

namespace {

// `order` must already be in tie-break order.
BlockFit fit_ordered(std::span<const double> values, std::span<const BlockType> order) {
	BlockFit best{order.front(), block_inconsistency(values, order.front())};
	for (std::size_t t = 1; t < order.size(); ++t) {
		const double e = block_inconsistency(values, order[t]);
		if (e < best.inconsistency)
			best = {order[t], e};
	}
	return best;
}

} // namespace

BlockFit block_fit(std::span<const double> values, std::span<const BlockType> allowed) {
	if (allowed.empty())
		throw SpecError("block_fit: empty set of allowed block types");
	std::vector<BlockType> order(allowed.begin(), allowed.end());
	std::stable_sort(order.begin(), order.end(),
	                 [](const BlockType& a, const BlockType& b) { return a.kind < b.kind; });
	return fit_ordered(values, order);
}

PrespecifiedModel::PrespecifiedModel(int rows, int cols, std::vector<std::vector<BlockType>> cells)
	: rows_(rows), cols_(cols), cells_(std::move(cells)) {
	if (rows < 1 || cols < 1)
		throw SpecError("pre-specified model needs at least one row and column cluster");
	if (cells_.size() != static_cast<std::size_t>(rows * cols))
		throw SpecError("pre-specified model has " + std::to_string(cells_.size()) + " cells, expected " +
		                std::to_string(rows * cols));
	ordered_ = cells_;
	for (std::size_t i = 0; i < cells_.size(); ++i) {
		if (cells_[i].empty())
			throw SpecError("pre-specified model cell " + std::to_string(i) + " allows no block type");
		for (const auto& t : cells_[i])
			if (t.kind == BlockKind::complete && !(std::isfinite(t.m_pre) && t.m_pre >= 0.0))
				throw SpecError("complete block needs a finite m_pre >= 0");
		std::stable_sort(ordered_[i].begin(), ordered_[i].end(),
		                 [](const BlockType& a, const BlockType& b) { return a.kind < b.kind; });
	}
}

PrespecifiedModel PrespecifiedModel::collapsed() const {
	std::vector<BlockType> types;
	for (const auto& cell : cells_)
		for (const auto& t : cell)
			if (std::find(types.begin(), types.end(), t) == types.end())
				types.push_back(t);
	return PrespecifiedModel(1, 1, {types});
}

PrespecifiedModel PrespecifiedModel::scaled(double factor) const {
	auto cells = cells_;
	for (auto& cell : cells)
		for (auto& t : cell)
			if (t.kind == BlockKind::complete)
				t.m_pre *= factor;
	return PrespecifiedModel(rows_, cols_, std::move(cells));
}

PrespecifiedModel uniform_prespec(int rows, int cols, std::vector<BlockType> allowed) {
	return PrespecifiedModel(rows, cols, std::vector<std::vector<BlockType>>(static_cast<std::size_t>(std::max(rows * cols, 0)), allowed));
}

PrespecifiedModel cohesive_prespec(int m, double m_pre) {
	if (m < 1)
		throw SpecError("cohesive model needs m >= 1");
	std::vector<std::vector<BlockType>> cells;
	for (int r = 0; r < m; ++r)
		for (int c = 0; c < m; ++c)
			cells.push_back({r == c ? BlockType::complete(m_pre) : BlockType::null_block()});
	return PrespecifiedModel(m, m, std::move(cells));
}

PrespecifiedModel one_to_one_prespec(int m, double m_pre) {
	return one_to_one_prespec(m, m, m_pre);
}

PrespecifiedModel one_to_one_prespec(int rows, int cols, double m_pre) {
	if (rows < 1 || cols < 1)
		throw SpecError("1-to-1 model needs at least one row and column cluster");
	std::vector<std::vector<BlockType>> cells;
	for (int r = 0; r < rows; ++r)
		for (int c = 0; c < cols; ++c)
			cells.push_back({r % cols == c ? BlockType::complete(m_pre) : BlockType::null_block()});
	return PrespecifiedModel(rows, cols, std::move(cells));
}

void WeightVector::validate() const {
	bool positive = false;
	for (double w : values) {
		if (!std::isfinite(w) || w < 0.0)
			throw ValidationError("weights must be finite and >= 0");
		positive = positive || w > 0.0;
	}
	if (!positive)
		throw ValidationError("at least one weight must be positive");
}

WeightVector unit_weights(std::size_t relations) {
	return {std::vector<double>(relations, 1.0)};
}

void require_model_fits(const MultilevelNetwork& network, std::size_t relation_id, const MultiPartition& partition,
                        const PrespecifiedModel& model) {
	const auto& relation = network.relation(relation_id);
	const int rows = partition.cluster_counts.at(relation.from_level);
	const int cols = partition.cluster_counts.at(relation.to_level);
	if (model.rows() != rows || model.cols() != cols)
		throw SpecError("model for relation '" + relation.name + "' is " + std::to_string(model.rows()) + "x" +
		                std::to_string(model.cols()) + " but the partition has " + std::to_string(rows) + "x" +
		                std::to_string(cols) + " clusters");
}

namespace {

std::vector<std::vector<std::size_t>> members_by_cluster(const std::vector<int>& labels, int m) {
	std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(m));
	for (std::size_t i = 0; i < labels.size(); ++i)
		members[static_cast<std::size_t>(labels[i])].push_back(i);
	return members;
}

template <typename OnBlock>
double evaluate_relation(const MultilevelNetwork& network, std::size_t relation_id, const MultiPartition& partition,
                         const PrespecifiedModel& model, OnBlock&& on_block) {
	require_model_fits(network, relation_id, partition, model);
	const auto& relation = network.relation(relation_id);
	const auto rows = members_by_cluster(partition.labels[relation.from_level], model.rows());
	const auto cols = members_by_cluster(partition.labels[relation.to_level], model.cols());
	std::vector<double> cells;
	double raw = 0.0;
	for (int p = 0; p < model.rows(); ++p)
		for (int q = 0; q < model.cols(); ++q) {
			cells.clear();
			for (auto i : rows[static_cast<std::size_t>(p)])
				for (auto j : cols[static_cast<std::size_t>(q)])
					if (relation.defined(i, j))
						cells.push_back(relation.values(i, j));
			const auto fit = fit_ordered(cells, model.ordered(p, q));
			on_block(p, q, fit, cells.size());
			raw += fit.inconsistency;
		}
	return raw;
}

} // namespace

RelationCriterion relation_criterion(const MultilevelNetwork& network, std::size_t relation_id,
                                     const MultiPartition& partition, const PrespecifiedModel& model) {
	RelationCriterion out;
	out.raw = evaluate_relation(network, relation_id, partition, model,
	                            [&](int p, int q, const BlockFit& fit, std::size_t cells) {
		                            out.blocks.push_back({relation_id, p, q, fit.type, fit.inconsistency, cells});
	                            });
	return out;
}

double relation_raw(const MultilevelNetwork& network, std::size_t relation_id, const MultiPartition& partition,
                    const PrespecifiedModel& model) {
	return evaluate_relation(network, relation_id, partition, model, [](int, int, const BlockFit&, std::size_t) {});
}

void require_spec_fits(const MultilevelNetwork& network, const MultiPartition& partition,
                       const EquivalenceSpec& equivalences, const WeightVector& weights) {
	require_feasible(partition, network);
	if (equivalences.size() != network.relation_count())
		throw SpecError("equivalence spec has " + std::to_string(equivalences.size()) + " models for " +
		                std::to_string(network.relation_count()) + " relations");
	if (weights.size() != network.relation_count())
		throw SpecError("weight vector has " + std::to_string(weights.size()) + " entries for " +
		                std::to_string(network.relation_count()) + " relations");
	weights.validate();
	for (std::size_t k = 0; k < network.relation_count(); ++k)
		require_model_fits(network, k, partition, equivalences[k]);
}

CriterionBreakdown total_criterion(const MultilevelNetwork& network, const MultiPartition& partition,
                                   const EquivalenceSpec& equivalences, const WeightVector& weights) {
	require_spec_fits(network, partition, equivalences, weights);
	CriterionBreakdown out;
	for (std::size_t k = 0; k < network.relation_count(); ++k) {
		auto rc = relation_criterion(network, k, partition, equivalences[k]);
		const double weighted = weights[k] * rc.raw;
		out.per_relation.push_back({rc.raw, weights[k], weighted});
		out.total += weighted;
		out.per_block.insert(out.per_block.end(), rc.blocks.begin(), rc.blocks.end());
	}
	return out;
}

double total_value(const MultilevelNetwork& network, const MultiPartition& partition,
                   const EquivalenceSpec& equivalences, const WeightVector& weights) {
	double total = 0.0;
	for (std::size_t k = 0; k < network.relation_count(); ++k)
		total += weights[k] * relation_raw(network, k, partition, equivalences[k]);
	return total;
}

} // namespace mlbm
