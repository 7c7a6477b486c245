#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mlbm/criteria.hpp"

namespace mlbm {

enum class Neighborhood { moves, exchanges, both };

struct SearchConfig {
	int restarts = 1;
	std::uint64_t seed = 0;
	std::optional<std::size_t> max_iterations;
	Neighborhood neighborhood = Neighborhood::both;
	// 0 picks MLBM_THREADS from the environment, else the hardware count.
	unsigned threads = 0;
};

// Worker count actually used for a config.
unsigned resolve_threads(unsigned requested);

// A neighbor must beat the current criterion by more than this relative
// margin to count as an improvement; guards against cycling on rounding noise.
inline constexpr double improvement_tolerance = 1e-12;

bool improves(double candidate, double current);

enum class StepKind { move, exchange };

struct StepRecord {
	StepKind kind = StepKind::move;
	std::size_t level = 0;
	std::size_t unit = 0;
	// Target cluster for a move, partner unit for an exchange.
	std::size_t other = 0;
	double before = 0.0;
	double after = 0.0;
	// Full recomputation after the step; only filled when verifying.
	std::optional<double> recomputed;
};

struct LocalSearchTrace {
	bool verify_full = false;
	std::vector<StepRecord> steps;
};

struct LocalSearchResult {
	MultiPartition partition;
	CriterionBreakdown breakdown;
	std::size_t iterations = 0;
};

// Steepest descent over single moves and single exchanges within a level.
// Moves never empty a cluster. Scan order is level, unit, target cluster
// (moves) then level, unit pair (exchanges); the first of equally good best
// neighbors wins.
LocalSearchResult local_search(const MultilevelNetwork& network, const EquivalenceSpec& equivalences,
                               const WeightVector& weights, const MultiPartition& start, const SearchConfig& config,
                               LocalSearchTrace* trace = nullptr);

// Best neighbor of `partition` (criterion value) or nullopt when none
// improves. Used to verify local optimality independently of the search loop.
std::optional<double> best_improving_neighbor(const MultilevelNetwork& network, const EquivalenceSpec& equivalences,
                                              const WeightVector& weights, const MultiPartition& partition,
                                              Neighborhood neighborhood = Neighborhood::both);

struct RestartOutcome {
	double criterion = 0.0;
	std::size_t iterations = 0;
};

struct SearchResult {
	MultiPartition best_partition;
	CriterionBreakdown best_breakdown;
	std::vector<RestartOutcome> per_restart;
	std::size_t best_restart = 0;
	std::size_t restarts_at_optimum = 0;
	// Set when the result comes from exhaustive enumeration.
	std::optional<std::uint64_t> enumerated;
};

// Uniform random feasible start for restart `index`, drawn from a stream
// seeded by (seed, index).
MultiPartition random_start(const MultilevelNetwork& network, const std::vector<int>& cluster_counts,
                            std::uint64_t seed, std::uint64_t index);

// Local search from `config.restarts` random starts, run in parallel.
// The best restart (lowest index among ties) wins; the result does not
// depend on the number of workers.
SearchResult restart_search(const MultilevelNetwork& network, const EquivalenceSpec& equivalences,
                            const WeightVector& weights, const std::vector<int>& cluster_counts,
                            const SearchConfig& config);

struct ExhaustiveResult {
	MultiPartition partition;
	CriterionBreakdown breakdown;
	std::uint64_t enumerated = 0;
	// Smallest criterion among all other partitions (infinity if none).
	double runner_up = 0.0;
};

inline constexpr std::uint64_t default_enumeration_cap = 10'000'000;

// Stirling number of the second kind, saturating at UINT64_MAX.
std::uint64_t stirling2(std::size_t n, std::size_t k);

// Global minimizer over every partition with exactly cluster_counts[l]
// non-empty clusters per level. Labels are canonical (clusters numbered by
// smallest member); levels are enumerated with level 0 slowest. Throws
// CapacityError when the number of partitions exceeds `cap`.
ExhaustiveResult exhaustive_search(const MultilevelNetwork& network, const EquivalenceSpec& equivalences,
                                   const WeightVector& weights, const std::vector<int>& cluster_counts,
                                   std::uint64_t cap = default_enumeration_cap);

// w_k = P_0 / P_k with P_k the relation's criterion when every level is one
// cluster and its model is collapsed to a single cell.
WeightVector compute_weights(const MultilevelNetwork& network, const EquivalenceSpec& equivalences);

WeightVector scale_weight(const WeightVector& weights, std::size_t relation, double factor);

// Second stage of the two-stage strategy: descend from `partition` under
// `new_weights`.
LocalSearchResult refine(const MultilevelNetwork& network, const EquivalenceSpec& equivalences,
                         const WeightVector& new_weights, const MultiPartition& partition, const SearchConfig& config);

} // namespace mlbm
