#include "mlbm/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

#include "mlbm/errors.hpp"
#include "mlbm/incremental.hpp"
#include "mlbm/rng.hpp"

namespace mlbm {

unsigned resolve_threads(unsigned requested) {
	if (requested > 0)
		return requested;
	if (const char* env = std::getenv("MLBM_THREADS")) {
		char* end = nullptr;
		const long n = std::strtol(env, &end, 10);
		if (end != env && n > 0)
			return static_cast<unsigned>(n);
	}
	return std::max(1u, std::thread::hardware_concurrency());
}

bool improves(double candidate, double current) {
	return candidate < current - improvement_tolerance * std::max(1.0, std::abs(current));
}

namespace {

struct Candidate {
	StepKind kind = StepKind::move;
	std::size_t level = 0;
	std::size_t unit = 0;
	std::size_t other = 0;
	double value = 0.0;
};

bool scan_moves(Neighborhood n) { return n != Neighborhood::exchanges; }
bool scan_exchanges(Neighborhood n) { return n != Neighborhood::moves; }

} // namespace

LocalSearchResult local_search(const MultilevelNetwork& network, const EquivalenceSpec& equivalences,
                               const WeightVector& weights, const MultiPartition& start, const SearchConfig& config,
                               LocalSearchTrace* trace) {
	IncrementalCriterion state(network, equivalences, weights, start);
	std::size_t iterations = 0;
	while (!config.max_iterations || iterations < *config.max_iterations) {
		const double current = state.total();
		std::optional<Candidate> best;
		auto consider = [&](const Candidate& c) {
			if (improves(c.value, current) && (!best || c.value < best->value))
				best = c;
		};
		const auto& labels = state.partition().labels;
		if (scan_moves(config.neighborhood)) {
			for (std::size_t l = 0; l < network.level_count(); ++l) {
				const int m = state.partition().cluster_counts[l];
				for (std::size_t u = 0; u < labels[l].size(); ++u) {
					const int from = labels[l][u];
					if (state.cluster_size(l, from) <= 1)
						continue;
					for (int to = 0; to < m; ++to)
						if (to != from)
							consider({StepKind::move, l, u, static_cast<std::size_t>(to), state.try_move(l, u, to)});
				}
			}
		}
		if (scan_exchanges(config.neighborhood)) {
			for (std::size_t l = 0; l < network.level_count(); ++l)
				for (std::size_t a = 0; a < labels[l].size(); ++a)
					for (std::size_t b = a + 1; b < labels[l].size(); ++b)
						if (labels[l][a] != labels[l][b])
							consider({StepKind::exchange, l, a, b, state.try_exchange(l, a, b)});
		}
		if (!best)
			break;
		if (best->kind == StepKind::move) {
			state.move(best->level, best->unit, static_cast<int>(best->other));
		} else {
			const int ca = labels[best->level][best->unit];
			const int cb = labels[best->level][best->other];
			state.move(best->level, best->unit, cb);
			state.move(best->level, best->other, ca);
		}
		++iterations;
		if (trace) {
			StepRecord rec{best->kind, best->level, best->unit, best->other, current, state.total(), std::nullopt};
			if (trace->verify_full)
				rec.recomputed = state.recompute();
			trace->steps.push_back(rec);
		}
	}
	LocalSearchResult out;
	out.partition = state.partition();
	out.breakdown = total_criterion(network, out.partition, equivalences, weights);
	out.iterations = iterations;
	return out;
}

std::optional<double> best_improving_neighbor(const MultilevelNetwork& network, const EquivalenceSpec& equivalences,
                                              const WeightVector& weights, const MultiPartition& partition,
                                              Neighborhood neighborhood) {
	const double current = total_value(network, partition, equivalences, weights);
	std::optional<double> best;
	auto consider = [&](const MultiPartition& p) {
		const double v = total_value(network, p, equivalences, weights);
		if (improves(v, current) && (!best || v < *best))
			best = v;
	};
	const auto sizes = cluster_sizes(partition);
	MultiPartition work = partition;
	for (std::size_t l = 0; l < partition.level_count(); ++l) {
		const auto n = partition.labels[l].size();
		if (scan_moves(neighborhood))
			for (std::size_t u = 0; u < n; ++u) {
				const int from = partition.labels[l][u];
				if (sizes[l][static_cast<std::size_t>(from)] <= 1)
					continue;
				for (int to = 0; to < partition.cluster_counts[l]; ++to) {
					if (to == from)
						continue;
					work.labels[l][u] = to;
					consider(work);
					work.labels[l][u] = from;
				}
			}
		if (scan_exchanges(neighborhood))
			for (std::size_t a = 0; a < n; ++a)
				for (std::size_t b = a + 1; b < n; ++b) {
					const int ca = partition.labels[l][a];
					const int cb = partition.labels[l][b];
					if (ca == cb)
						continue;
					work.labels[l][a] = cb;
					work.labels[l][b] = ca;
					consider(work);
					work.labels[l][a] = ca;
					work.labels[l][b] = cb;
				}
	}
	return best;
}

MultiPartition random_start(const MultilevelNetwork& network, const std::vector<int>& cluster_counts,
                            std::uint64_t seed, std::uint64_t index) {
	Rng rng(seed, index);
	MultiPartition p;
	p.cluster_counts = cluster_counts;
	for (const auto& level : network.levels()) {
		const auto m = static_cast<std::size_t>(cluster_counts[level.id]);
		const auto n = level.size();
		std::vector<int> labels(n);
		// Uniform assignment, resampled until no cluster is empty.
		constexpr int max_attempts = 10'000;
		bool ok = false;
		for (int attempt = 0; attempt < max_attempts && !ok; ++attempt) {
			std::vector<int> sizes(m, 0);
			for (auto& c : labels) {
				c = static_cast<int>(rng.below(m));
				++sizes[static_cast<std::size_t>(c)];
			}
			ok = std::find(sizes.begin(), sizes.end(), 0) == sizes.end();
		}
		if (!ok) {
			// Near-singleton regimes: seed every cluster with one random unit,
			// the rest stay uniform.
			std::vector<std::size_t> order(n);
			for (std::size_t i = 0; i < n; ++i)
				order[i] = i;
			for (std::size_t i = n; i > 1; --i)
				std::swap(order[i - 1], order[rng.below(i)]);
			for (std::size_t i = 0; i < n; ++i)
				labels[order[i]] = i < m ? static_cast<int>(i) : static_cast<int>(rng.below(m));
		}
		p.labels.push_back(std::move(labels));
	}
	return p;
}

namespace {

void require_counts(const MultilevelNetwork& network, const std::vector<int>& cluster_counts) {
	if (cluster_counts.size() != network.level_count())
		throw ValidationError("need one cluster count per level");
	for (const auto& level : network.levels()) {
		const int m = cluster_counts[level.id];
		if (m < 1 || static_cast<std::size_t>(m) > level.size())
			throw ValidationError("level '" + level.name + "': cannot split " + std::to_string(level.size()) +
			                      " units into " + std::to_string(m) + " non-empty clusters");
	}
}

bool same_value(double a, double b) {
	return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

} // namespace

SearchResult restart_search(const MultilevelNetwork& network, const EquivalenceSpec& equivalences,
                            const WeightVector& weights, const std::vector<int>& cluster_counts,
                            const SearchConfig& config) {
	require_counts(network, cluster_counts);
	if (config.restarts < 1)
		throw ValidationError("restarts must be >= 1");
	const auto restarts = static_cast<std::size_t>(config.restarts);
	// Validate once up front so workers never throw.
	require_spec_fits(network, random_start(network, cluster_counts, config.seed, 0), equivalences, weights);

	std::vector<LocalSearchResult> results(restarts);
	std::atomic<std::size_t> next{0};
	auto worker = [&] {
		for (std::size_t r; (r = next.fetch_add(1)) < restarts;) {
			auto start = random_start(network, cluster_counts, config.seed, r);
			results[r] = local_search(network, equivalences, weights, start, config);
		}
	};
	const unsigned threads = std::min<unsigned>(resolve_threads(config.threads), static_cast<unsigned>(restarts));
	if (threads <= 1) {
		worker();
	} else {
		std::vector<std::jthread> pool;
		for (unsigned t = 0; t < threads; ++t)
			pool.emplace_back(worker);
	}

	SearchResult out;
	for (std::size_t r = 0; r < restarts; ++r) {
		out.per_restart.push_back({results[r].breakdown.total, results[r].iterations});
		if (r == 0 || results[r].breakdown.total < results[out.best_restart].breakdown.total)
			out.best_restart = r;
	}
	const double best = results[out.best_restart].breakdown.total;
	for (const auto& o : out.per_restart)
		if (same_value(o.criterion, best))
			++out.restarts_at_optimum;
	out.best_partition = std::move(results[out.best_restart].partition);
	out.best_breakdown = std::move(results[out.best_restart].breakdown);
	return out;
}

std::uint64_t stirling2(std::size_t n, std::size_t k) {
	if (k > n)
		return 0;
	constexpr auto max = std::numeric_limits<std::uint64_t>::max();
	// Row-by-row recurrence S(i, j) = j S(i-1, j) + S(i-1, j-1).
	std::vector<std::uint64_t> row(k + 1, 0);
	row[0] = 1;
	for (std::size_t i = 1; i <= n; ++i) {
		for (std::size_t j = std::min(i, k); j >= 1; --j) {
			const std::uint64_t a = row[j];
			std::uint64_t term;
			if (a != 0 && j > max / a)
				term = max;
			else
				term = j * a;
			row[j] = (term > max - row[j - 1]) ? max : term + row[j - 1];
		}
		row[0] = 0;
	}
	return row[k];
}

namespace {

// All restricted growth strings of length n using exactly m labels, in
// lexicographic order.
std::vector<std::vector<int>> canonical_labelings(std::size_t n, int m) {
	std::vector<std::vector<int>> out;
	std::vector<int> labels(n, 0);
	auto recurse = [&](auto&& self, std::size_t i, int used) -> void {
		if (i == n) {
			if (used == m)
				out.push_back(labels);
			return;
		}
		const int remaining = static_cast<int>(n - i);
		for (int c = 0; c <= std::min(used, m - 1); ++c) {
			const int now_used = std::max(used, c + 1);
			if (m - now_used > remaining - 1)
				continue;
			labels[i] = c;
			self(self, i + 1, now_used);
		}
	};
	if (n == 0)
		return out;
	labels[0] = 0;
	recurse(recurse, 1, 1);
	return out;
}

} // namespace

ExhaustiveResult exhaustive_search(const MultilevelNetwork& network, const EquivalenceSpec& equivalences,
                                   const WeightVector& weights, const std::vector<int>& cluster_counts,
                                   std::uint64_t cap) {
	require_counts(network, cluster_counts);
	std::uint64_t total = 1;
	for (const auto& level : network.levels()) {
		const auto s = stirling2(level.size(), static_cast<std::size_t>(cluster_counts[level.id]));
		if (s != 0 && total > std::numeric_limits<std::uint64_t>::max() / s)
			total = std::numeric_limits<std::uint64_t>::max();
		else
			total *= s;
	}
	if (total > cap)
		throw CapacityError("exhaustive search would enumerate " + std::to_string(total) +
		                    " partitions, above the cap of " + std::to_string(cap));

	std::vector<std::vector<std::vector<int>>> per_level;
	for (const auto& level : network.levels())
		per_level.push_back(canonical_labelings(level.size(), cluster_counts[level.id]));

	MultiPartition current;
	current.cluster_counts = cluster_counts;
	current.labels.resize(network.level_count());
	require_spec_fits(network, [&] {
		MultiPartition first = current;
		for (std::size_t l = 0; l < per_level.size(); ++l)
			first.labels[l] = per_level[l].front();
		return first;
	}(), equivalences, weights);

	ExhaustiveResult out;
	double best = std::numeric_limits<double>::infinity();
	double runner_up = best;
	std::vector<std::size_t> index(per_level.size(), 0);
	for (;;) {
		for (std::size_t l = 0; l < per_level.size(); ++l)
			current.labels[l] = per_level[l][index[l]];
		const double v = total_value(network, current, equivalences, weights);
		++out.enumerated;
		if (v < best) {
			runner_up = best;
			best = v;
			out.partition = current;
		} else if (v < runner_up) {
			runner_up = v;
		}
		// Odometer, last level fastest.
		std::size_t l = per_level.size();
		while (l > 0) {
			--l;
			if (++index[l] < per_level[l].size())
				break;
			index[l] = 0;
			if (l == 0) {
				out.breakdown = total_criterion(network, out.partition, equivalences, weights);
				out.runner_up = runner_up;
				return out;
			}
		}
	}
}

WeightVector compute_weights(const MultilevelNetwork& network, const EquivalenceSpec& equivalences) {
	if (equivalences.size() != network.relation_count())
		throw SpecError("need one model per relation");
	if (network.relation_count() == 0)
		throw SpecError("network has no relations");
	const auto single = single_cluster_partition(network);
	std::vector<double> worst;
	for (std::size_t k = 0; k < network.relation_count(); ++k) {
		const double p = relation_raw(network, k, single, equivalences[k].collapsed());
		if (!(p > 0.0))
			throw DegenerateError("relation '" + network.relation(k).name +
			                      "' has zero one-cluster inconsistency; its weight is undefined");
		worst.push_back(p);
	}
	WeightVector w;
	for (double p : worst)
		w.values.push_back(worst.front() / p);
	w.values.front() = 1.0;
	return w;
}

WeightVector scale_weight(const WeightVector& weights, std::size_t relation, double factor) {
	if (!(factor > 0.0) || !std::isfinite(factor))
		throw ValidationError("weight scale factor must be positive");
	if (relation >= weights.size())
		throw ValidationError("no weight for relation " + std::to_string(relation));
	WeightVector out = weights;
	out.values[relation] *= factor;
	return out;
}

LocalSearchResult refine(const MultilevelNetwork& network, const EquivalenceSpec& equivalences,
                         const WeightVector& new_weights, const MultiPartition& partition, const SearchConfig& config) {
	return local_search(network, equivalences, new_weights, partition, config);
}

} // namespace mlbm
