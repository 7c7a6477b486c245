#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mlbm/network.hpp"
#include "mlbm/partition.hpp"

namespace mlbm {

enum class Alignment { aligned, random };

struct PlantedSpec {
	std::uint64_t seed = 0;
	std::vector<std::size_t> level_sizes;
	std::vector<int> cluster_counts;
	double within_density = 1.0;
	double between_density = 0.0;
	Alignment membership = Alignment::aligned;
};

// Synthetic multilevel network with planted cohesive clusters.
//
// Each level gets a one-mode relation "level<l>" with Bernoulli ties at
// within_density inside planted clusters and between_density elsewhere.
// Consecutive levels l, l+1 are linked by a two-mode relation
// "member<l><l+1>" in which every unit of level l has exactly one tie. With
// aligned membership, a unit of cluster c picks an upper unit from upper
// cluster c mod m_upper; otherwise any upper unit. Planted clusters are
// contiguous balanced blocks of unit indices. Reproducible from the seed.
std::pair<MultilevelNetwork, MultiPartition> generate_planted(const PlantedSpec& spec);

} // namespace mlbm
