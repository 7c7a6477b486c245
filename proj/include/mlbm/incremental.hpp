#pragma once

#include <vector>

#include "mlbm/criteria.hpp"

namespace mlbm {

// Total criterion maintained under single-unit moves.
//
// Each relation keeps the cell count, sum and sum of squares of every block.
// Moving a unit touches only its row and column strips, so an update costs
// O(n + m^2) per touched relation instead of a full O(n^2) pass. Relation
// totals are re-summed over cached block values in row-major order after
// every change, so the result never depends on move history beyond the
// moments themselves.
class IncrementalCriterion {
public:
	IncrementalCriterion(const MultilevelNetwork& network, const EquivalenceSpec& equivalences,
	                     const WeightVector& weights, MultiPartition start);

	double total() const { return total_; }
	double raw(std::size_t relation) const { return relations_[relation].raw; }
	const MultiPartition& partition() const { return partition_; }
	int cluster_size(std::size_t level, int cluster) const {
		return sizes_[level][static_cast<std::size_t>(cluster)];
	}

	void move(std::size_t level, std::size_t unit, int to);

	// Criterion after the move / exchange; state is restored exactly.
	double try_move(std::size_t level, std::size_t unit, int to);
	double try_exchange(std::size_t level, std::size_t a, std::size_t b);

	// Full recomputation through total_value, for verification.
	double recompute() const;

private:
	struct Moments {
		long count = 0;
		double sum = 0.0;
		double sum_sq = 0.0;
	};
	struct RelationState {
		std::vector<Moments> blocks;
		std::vector<double> fits;
		double raw = 0.0;
	};

	void rebuild(std::size_t relation);
	void refit(std::size_t relation);
	void shift(std::size_t relation, std::size_t level, std::size_t unit, int from, int to);
	void retotal();
	void save(std::size_t level);
	void restore(std::size_t level);

	const MultilevelNetwork& network_;
	const EquivalenceSpec& equivalences_;
	const WeightVector& weights_;
	MultiPartition partition_;
	std::vector<std::vector<int>> sizes_;
	std::vector<RelationState> relations_;
	std::vector<std::vector<std::size_t>> touching_;
	double total_ = 0.0;

	std::vector<RelationState> saved_;
	MultiPartition saved_partition_;
	std::vector<std::vector<int>> saved_sizes_;
	double saved_total_ = 0.0;
	std::vector<Moments> row_acc_;
	std::vector<Moments> col_acc_;
};

} // namespace mlbm
