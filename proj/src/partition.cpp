#include "mlbm/partition.hpp"

#include <algorithm>
#include <map>

#include "mlbm/errors.hpp"

namespace mlbm {

MultiPartition make_partition(const MultilevelNetwork& network, std::vector<std::vector<int>> labels) {
	MultiPartition p;
	p.cluster_counts.reserve(labels.size());
	for (const auto& level : labels)
		p.cluster_counts.push_back(level.empty() ? 0 : *std::max_element(level.begin(), level.end()) + 1);
	p.labels = std::move(labels);
	if (!is_feasible(p, network))
		throw ValidationError("partition is not feasible for the network (empty cluster or bad label)");
	return p;
}

MultiPartition single_cluster_partition(const MultilevelNetwork& network) {
	MultiPartition p;
	for (const auto& level : network.levels()) {
		p.labels.emplace_back(level.size(), 0);
		p.cluster_counts.push_back(1);
	}
	return p;
}

MultiPartition partition_from_global(const MultilevelNetwork& network, const std::vector<int>& global_ids) {
	if (global_ids.size() != network.unit_count())
		throw ValidationError("global partition has " + std::to_string(global_ids.size()) + " labels for " +
		                      std::to_string(network.unit_count()) + " units");
	std::map<int, std::size_t> owner;
	std::size_t offset = 0;
	std::vector<std::vector<int>> raw;
	for (const auto& level : network.levels()) {
		std::vector<int> ids(global_ids.begin() + static_cast<std::ptrdiff_t>(offset),
		                     global_ids.begin() + static_cast<std::ptrdiff_t>(offset + level.size()));
		for (std::size_t i = 0; i < ids.size(); ++i) {
			auto [it, inserted] = owner.emplace(ids[i], level.id);
			if (!inserted && it->second != level.id)
				throw ValidationError("cluster " + std::to_string(ids[i]) + " mixes levels '" +
				                      network.level(it->second).name + "' and '" + level.name + "' (unit '" +
				                      level.unit_names[i] + "')");
		}
		raw.push_back(std::move(ids));
		offset += level.size();
	}
	std::vector<std::vector<int>> labels;
	for (auto& ids : raw) {
		std::vector<int> distinct = ids;
		std::sort(distinct.begin(), distinct.end());
		distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
		std::vector<int> relabeled;
		for (int id : ids)
			relabeled.push_back(static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), id) - distinct.begin()));
		labels.push_back(std::move(relabeled));
	}
	return make_partition(network, std::move(labels));
}

namespace {

// Empty string when feasible, otherwise a description of the first problem.
std::string feasibility_problem(const MultiPartition& partition, const MultilevelNetwork& network) {
	if (partition.labels.size() != network.level_count() || partition.cluster_counts.size() != network.level_count())
		return "partition covers " + std::to_string(partition.labels.size()) + " levels, network has " +
		       std::to_string(network.level_count());
	for (const auto& level : network.levels()) {
		const auto& labels = partition.labels[level.id];
		const int m = partition.cluster_counts[level.id];
		if (labels.size() != level.size())
			return "level '" + level.name + "' has " + std::to_string(labels.size()) + " labels for " +
			       std::to_string(level.size()) + " units";
		if (m < 1)
			return "level '" + level.name + "' has no clusters";
		std::vector<int> sizes(static_cast<std::size_t>(m), 0);
		for (std::size_t i = 0; i < labels.size(); ++i) {
			if (labels[i] < 0 || labels[i] >= m)
				return "unit '" + level.unit_names[i] + "' has label " + std::to_string(labels[i]) + " outside [0, " +
				       std::to_string(m) + ")";
			++sizes[static_cast<std::size_t>(labels[i])];
		}
		for (int c = 0; c < m; ++c)
			if (sizes[static_cast<std::size_t>(c)] == 0)
				return "cluster " + std::to_string(c) + " of level '" + level.name + "' is empty";
	}
	return {};
}

} // namespace

bool is_feasible(const MultiPartition& partition, const MultilevelNetwork& network) {
	return feasibility_problem(partition, network).empty();
}

void require_feasible(const MultiPartition& partition, const MultilevelNetwork& network) {
	if (auto problem = feasibility_problem(partition, network); !problem.empty())
		throw FeasibilityError("infeasible partition: " + problem);
}

std::vector<std::vector<int>> cluster_sizes(const MultiPartition& partition) {
	std::vector<std::vector<int>> out;
	for (std::size_t l = 0; l < partition.labels.size(); ++l) {
		std::vector<int> sizes(static_cast<std::size_t>(std::max(partition.cluster_counts[l], 0)), 0);
		for (int c : partition.labels[l])
			if (c >= 0 && c < static_cast<int>(sizes.size()))
				++sizes[static_cast<std::size_t>(c)];
		out.push_back(std::move(sizes));
	}
	return out;
}

} // namespace mlbm
