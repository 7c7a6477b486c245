#pragma once

#include <string>
#include <vector>

#include "mlbm/network.hpp"

namespace mlbm {

// One cluster label per unit, kept per level so a cluster can never hold
// units of two levels. Labels are 0-based inside the library.
struct MultiPartition {
	std::vector<std::vector<int>> labels;
	std::vector<int> cluster_counts;

	int cluster_of(std::size_t level, std::size_t unit) const { return labels[level][unit]; }
	std::size_t level_count() const { return labels.size(); }

	friend bool operator==(const MultiPartition&, const MultiPartition&) = default;
};

// Builds a partition whose per-level counts are max label + 1 and checks it
// against the network. Throws ValidationError if it is not feasible.
MultiPartition make_partition(const MultilevelNetwork& network, std::vector<std::vector<int>> labels);

// Every level in a single cluster.
MultiPartition single_cluster_partition(const MultilevelNetwork& network);

// Builds a partition from one global cluster id per unit, units ordered level
// by level. A global id used on two levels is rejected with ValidationError.
// Per-level labels are the global ids in increasing order.
MultiPartition partition_from_global(const MultilevelNetwork& network, const std::vector<int>& global_ids);

// True iff every unit has a label in [0, m_l) and every cluster is non-empty.
bool is_feasible(const MultiPartition& partition, const MultilevelNetwork& network);

// Throws FeasibilityError naming the first offending unit or cluster.
void require_feasible(const MultiPartition& partition, const MultilevelNetwork& network);

// Cluster sizes per level.
std::vector<std::vector<int>> cluster_sizes(const MultiPartition& partition);

} // namespace mlbm
