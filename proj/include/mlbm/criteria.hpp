#pragma once

#include <span>
#include <string>
#include <vector>

#include "mlbm/network.hpp"
#include "mlbm/partition.hpp"

namespace mlbm {

// Sum-of-squares block types. The enumerator order is the tie-break order
// used when several allowed types fit a block equally well.
enum class BlockKind { do_not_care = 0, null = 1, complete = 2 };

struct BlockType {
	BlockKind kind = BlockKind::null;
	// Complete blocks only: the center is max(block mean, m_pre), or exactly
	// m_pre when `pinned` is set.
	double m_pre = 0.0;
	bool pinned = false;

	static BlockType null_block() { return {BlockKind::null, 0.0, false}; }
	static BlockType complete(double m_pre = 0.0) { return {BlockKind::complete, m_pre, false}; }
	static BlockType complete_pinned(double center) { return {BlockKind::complete, center, true}; }
	static BlockType do_not_care() { return {BlockKind::do_not_care, 0.0, false}; }

	std::string to_string() const;

	friend bool operator==(const BlockType&, const BlockType&) = default;
};

// Inconsistency of a block whose defined cells hold `values`.
double block_inconsistency(std::span<const double> values, const BlockType& type);

// Same quantity computed from the block's cell count, sum and sum of squares.
// Used by incremental evaluation; agrees with block_inconsistency up to
// rounding.
double block_inconsistency_from_moments(std::size_t count, double sum, double sum_sq, const BlockType& type);

struct BlockFit {
	BlockType type;
	double inconsistency = 0.0;
};

// Allowed type with the smallest inconsistency; ties go to the earlier kind in
// BlockKind order, then to the earlier entry of `allowed`.
BlockFit block_fit(std::span<const double> values, std::span<const BlockType> allowed);

// Grid of allowed block types, one non-empty set per (row cluster, column
// cluster).
class PrespecifiedModel {
public:
	PrespecifiedModel() = default;
	PrespecifiedModel(int rows, int cols, std::vector<std::vector<BlockType>> cells);

	int rows() const { return rows_; }
	int cols() const { return cols_; }
	const std::vector<BlockType>& allowed(int r, int c) const {
		return cells_[static_cast<std::size_t>(r * cols_ + c)];
	}
	// Same as allowed() but sorted into tie-break order.
	const std::vector<BlockType>& ordered(int r, int c) const {
		return ordered_[static_cast<std::size_t>(r * cols_ + c)];
	}

	// 1x1 model allowing every distinct type that occurs anywhere in the grid.
	PrespecifiedModel collapsed() const;

	// Copy with every complete type's m_pre multiplied by `factor`.
	PrespecifiedModel scaled(double factor) const;

	friend bool operator==(const PrespecifiedModel& a, const PrespecifiedModel& b) {
		return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.cells_ == b.cells_;
	}

private:
	int rows_ = 0;
	int cols_ = 0;
	std::vector<std::vector<BlockType>> cells_;
	std::vector<std::vector<BlockType>> ordered_;
};

// Same set of allowed types in every cell.
PrespecifiedModel uniform_prespec(int rows, int cols, std::vector<BlockType> allowed);

// Cohesive groups: complete(m_pre) on the diagonal, null elsewhere.
PrespecifiedModel cohesive_prespec(int m, double m_pre);

// Each row cluster tied to exactly one column cluster: non-null (complete)
// blocks on the diagonal, null elsewhere. Needs equal cluster counts.
PrespecifiedModel one_to_one_prespec(int m, double m_pre = 0.0);

// Rectangular generalization: row cluster r may only tie to column cluster
// r mod cols. With rows == cols this is the square model above.
PrespecifiedModel one_to_one_prespec(int rows, int cols, double m_pre);

// One model per relation, indexed by relation id.
using EquivalenceSpec = std::vector<PrespecifiedModel>;

struct WeightVector {
	std::vector<double> values;

	double operator[](std::size_t k) const { return values[k]; }
	std::size_t size() const { return values.size(); }

	// Throws ValidationError on negative, non-finite or all-zero weights.
	void validate() const;

	friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

WeightVector unit_weights(std::size_t relations);

struct BlockRecord {
	std::size_t relation = 0;
	int row = 0;
	int col = 0;
	BlockType type;
	double inconsistency = 0.0;
	std::size_t cells = 0;
};

struct RelationCriterion {
	double raw = 0.0;
	std::vector<BlockRecord> blocks;
};

struct RelationTerm {
	double raw = 0.0;
	double weight = 0.0;
	double weighted = 0.0;
};

struct CriterionBreakdown {
	double total = 0.0;
	std::vector<RelationTerm> per_relation;
	std::vector<BlockRecord> per_block;
};

// Checks that `model` matches the cluster counts of the relation's levels.
void require_model_fits(const MultilevelNetwork& network, std::size_t relation_id, const MultiPartition& partition,
                        const PrespecifiedModel& model);

// Sum of best block fits over all blocks of one relation, in row-major block
// order. Undefined diagonal cells are left out of diagonal blocks.
RelationCriterion relation_criterion(const MultilevelNetwork& network, std::size_t relation_id,
                                     const MultiPartition& partition, const PrespecifiedModel& model);

// relation_criterion(...).raw without recording blocks; identical value.
double relation_raw(const MultilevelNetwork& network, std::size_t relation_id, const MultiPartition& partition,
                    const PrespecifiedModel& model);

// Weighted criterion over all relations; total = sum_k w_k * raw_k in
// relation order.
CriterionBreakdown total_criterion(const MultilevelNetwork& network, const MultiPartition& partition,
                                   const EquivalenceSpec& equivalences, const WeightVector& weights);

// Total only, same arithmetic as total_criterion.
double total_value(const MultilevelNetwork& network, const MultiPartition& partition,
                   const EquivalenceSpec& equivalences, const WeightVector& weights);

// Checks sizes of equivalences and weights against the network.
void require_spec_fits(const MultilevelNetwork& network, const MultiPartition& partition,
                       const EquivalenceSpec& equivalences, const WeightVector& weights);

} // namespace mlbm
