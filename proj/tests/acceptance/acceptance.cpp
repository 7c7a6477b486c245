// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <string>

#include "mlbm/analysis.hpp"
#include "mlbm/compare.hpp"
#include "mlbm/planted.hpp"
#include "mlbm/reshape.hpp"
#include "mlbm/rng.hpp"
#include "mlbm/search.hpp"
#include "oracles.hpp"

using namespace mlbm;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

// Models the analyses use by default: cohesive at twice the density on
// one-mode relations, free null/complete on two-mode ones.
EquivalenceSpec default_models(const MultilevelNetwork& net, const std::vector<int>& m) {
	const auto cfg = parse_config({{"network", "-"}, {"approach", "multilevel"}}, ".");
	return build_equivalences(cfg, net, m);
}

struct Outcome {
	bool pass = false;
	std::string detail;
};

Outcome oracle_optimality() {
	int matched = 0;
	double exhaustive_seconds = 0.0;
	std::uint64_t largest = 0;
	for (int i = 0; i < 20; ++i) {
		const auto [net, planted] =
			generate_planted({static_cast<std::uint64_t>(1000 + i), {8, 6}, {3, 3}, 0.9, 0.05, Alignment::aligned});
		const std::vector<int> m{3, 3};
		const auto eq = default_models(net, m);
		const auto w = compute_weights(net, eq);
		SearchConfig cfg;
		cfg.restarts = 200;
		cfg.seed = static_cast<std::uint64_t>(i);
		const auto searched = restart_search(net, eq, w, m, cfg);
		const auto t = Clock::now();
		const auto ex = exhaustive_search(net, eq, w, m);
		exhaustive_seconds += seconds_since(t);
		largest = std::max(largest, ex.enumerated);
		if (ex.breakdown.total > searched.best_breakdown.total + 1e-9 * std::max(1.0, searched.best_breakdown.total))
			return {false, "exhaustive optimum above the searched criterion on instance " + std::to_string(i)};
		if (rel_close(searched.best_breakdown.total, ex.breakdown.total, 1e-9))
			++matched;
	}
	char buf[160];
	std::snprintf(buf, sizeof buf, "%d/20 matched, %llu partitions per instance, exhaustive %.2f s total", matched,
	              static_cast<unsigned long long>(largest), exhaustive_seconds);
	return {matched >= 19 && exhaustive_seconds < 60.0, buf};
}

Outcome reshape_oracle() {
	Rng rng(4242);
	int cells = 0;
	for (int trial = 0; trial < 50; ++trial) {
		const auto n = 1 + rng.below(10);
		const auto k = 1 + rng.below(6);
		const bool binary = trial % 2 == 0;
		Matrix m(n, k), u(k, k);
		for (std::size_t i = 0; i < n; ++i)
			for (std::size_t a = 0; a < k; ++a)
				if (rng.bernoulli(0.4))
					m(i, a) = binary ? 1.0 : 0.5 * static_cast<double>(1 + rng.below(6));
		for (std::size_t a = 0; a < k; ++a)
			for (std::size_t b = 0; b < k; ++b)
				if (a != b && rng.bernoulli(0.35))
					u(a, b) = binary ? 1.0 : 0.25 * static_cast<double>(1 + rng.below(8));
		Relation rm, ru;
		rm.name = "m";
		rm.to_level = 1;
		rm.values = m;
		ru.name = "u";
		ru.from_level = ru.to_level = 1;
		ru.values = u;
		for (bool co : {false, true})
			for (bool bin : {false, true}) {
				ReshapeOptions opt;
				opt.include_comembership = co;
				opt.binarize = bin;
				const auto got = reshape_down(rm, ru, opt).values;
				if (!(got == oracle::reshape_quadruple(m, u, co, bin, opt.threshold)))
					return {false, "mismatch on instance " + std::to_string(trial)};
				cells += static_cast<int>(n * n);
			}
	}
	return {true, "50 instances, " + std::to_string(cells) + " cells equal"};
}

Outcome criterion_identities() {
	Rng rng(77);
	for (int trial = 0; trial < 30; ++trial) {
		const auto [net, planted] =
			generate_planted({static_cast<std::uint64_t>(trial), {9, 6}, {3, 2}, 0.7, 0.15, Alignment::random});
		const std::vector<int> m{3, 2};
		const auto p = random_start(net, m, 5, static_cast<std::uint64_t>(trial));
		const auto eq = default_models(net, m);
		const WeightVector w{{1.0, 0.5 + rng.uniform(), 3.0 * rng.uniform()}};
		const auto b = total_criterion(net, p, eq, w);
		double sum = 0.0;
		for (std::size_t k = 0; k < b.per_relation.size(); ++k)
			sum += w.values[k] * relation_raw(net, k, p, eq[k]);
		if (b.total != sum)
			return {false, "additivity"};

		const EquivalenceSpec dnc{uniform_prespec(3, 3, {BlockType::do_not_care()}),
		                          uniform_prespec(2, 2, {BlockType::do_not_care()}),
		                          uniform_prespec(3, 2, {BlockType::do_not_care()})};
		if (total_value(net, p, dnc, w) != 0.0)
			return {false, "do-not-care contribution"};

		const auto one = single_cluster_partition(net);
		for (std::size_t k = 0; k < net.relation_count(); ++k) {
			const auto family = default_models(net, {1, 1})[k];
			if (forced_fit(net, k, one, family).criterion != max_error(net, k, family.allowed(0, 0)))
				return {false, "forced_fit(one-cluster) != max_error"};
		}

		std::vector<double> values(1 + rng.below(40));
		double mean = 0.0;
		for (auto& v : values) {
			v = rng.uniform() * 3.0;
			mean += v;
		}
		mean /= static_cast<double>(values.size());
		if (block_inconsistency(values, BlockType::complete(mean * rng.uniform())) !=
		    block_inconsistency(values, BlockType::complete(0.0)))
			return {false, "constrained complete below the mean"};

		const double s = 0.25 + 4.0 * rng.uniform();
		std::vector<Relation> scaled;
		for (auto r : net.relations()) {
			for (std::size_t i = 0; i < r.values.rows(); ++i)
				for (std::size_t j = 0; j < r.values.cols(); ++j)
					r.values(i, j) *= s;
			scaled.push_back(std::move(r));
		}
		const auto snet = build_network(net.levels(), scaled);
		for (std::size_t k = 0; k < net.relation_count(); ++k)
			if (!rel_close(relation_raw(snet, k, p, eq[k].scaled(s)), s * s * relation_raw(net, k, p, eq[k]), 1e-12))
				return {false, "scale law"};
	}
	return {true, "30 instances: additivity, do-not-care, forced fit, constrained complete, scale law"};
}

Outcome ari_suite() {
	if (adjusted_rand({0, 0, 1, 1}, {0, 1, 0, 1}) != -0.5)
		return {false, "ARI({1,2|3,4},{1,3|2,4}) != -0.5"};
	Rng rng(99);
	std::vector<int> base(80);
	for (std::size_t i = 0; i < base.size(); ++i)
		base[i] = static_cast<int>(i % 5);
	if (adjusted_rand(base, base) != 1.0)
		return {false, "ARI(p,p) != 1"};
	double sum = 0.0;
	for (int t = 0; t < 1000; ++t) {
		auto perm = base;
		for (std::size_t i = perm.size(); i > 1; --i)
			std::swap(perm[i - 1], perm[rng.below(i)]);
		sum += adjusted_rand(base, perm);
	}
	const double mean = sum / 1000.0;
	int compared = 0;
	while (compared < 100) {
		const auto n = 2 + rng.below(40);
		std::vector<int> a(n), b(n);
		const auto ma = 1 + rng.below(6), mb = 1 + rng.below(6);
		for (std::size_t i = 0; i < n; ++i) {
			a[i] = static_cast<int>(rng.below(ma));
			b[i] = static_cast<int>(rng.below(mb));
		}
		const auto c = oracle::pair_counts(a, b);
		if ((c.both + c.only_p) * (c.only_p + c.neither) + (c.both + c.only_q) * (c.only_q + c.neither) == 0)
			continue;
		if (adjusted_rand(a, b) != oracle::ari_pairs(a, b))
			return {false, "pair-loop oracle disagreement"};
		++compared;
	}
	char buf[120];
	std::snprintf(buf, sizeof buf, "-0.5 exact, self 1, null mean %+.4f, 100 oracle pairs exact", mean);
	return {std::abs(mean) <= 0.02, buf};
}

Outcome weighting() {
	for (std::uint64_t seed = 0; seed < 10; ++seed) {
		const auto [net, planted] = generate_planted({seed, {20, 8}, {4, 3}, 0.7, 0.1, Alignment::aligned});
		const auto eq = default_models(net, {4, 3});
		const auto w = compute_weights(net, eq);
		if (w.values[0] != 1.0)
			return {false, "first weight not exactly 1"};
		const auto one = single_cluster_partition(net);
		const double ref = relation_raw(net, 0, one, eq[0].collapsed());
		for (std::size_t k = 0; k < w.size(); ++k)
			if (!rel_close(w.values[k] * relation_raw(net, k, one, eq[k].collapsed()), ref, 1e-9))
				return {false, "w_k * P_k not constant"};
		const auto doubled = scale_weight(w, 2, 2.0);
		for (std::size_t k = 0; k < w.size(); ++k)
			if (doubled.values[k] != (k == 2 ? 2.0 * w.values[k] : w.values[k]))
				return {false, "scale_weight did not double exactly"};
	}
	return {true, "10 fixtures"};
}

Outcome local_search_contracts() {
	std::size_t steps = 0;
	for (std::uint64_t seed = 0; seed < 10; ++seed) {
		const auto [net, planted] = generate_planted({seed, {20, 8}, {4, 3}, 0.8, 0.1, Alignment::aligned});
		const std::vector<int> m{4, 3};
		const auto eq = default_models(net, m);
		const auto w = scale_weight(compute_weights(net, eq), 2, 2.0);
		LocalSearchTrace trace;
		trace.verify_full = true;
		const auto start = random_start(net, m, seed, 0);
		const auto r = local_search(net, eq, w, start, {}, &trace);
		for (const auto& s : trace.steps) {
			if (!(s.after < s.before))
				return {false, "non-decreasing step"};
			if (!s.recomputed || !rel_close(s.after, *s.recomputed, 1e-10))
				return {false, "incremental value differs from full recomputation"};
		}
		steps += trace.steps.size();
		if (best_improving_neighbor(net, eq, w, r.partition))
			return {false, "returned partition has an improving neighbor"};
	}
	return {true, "10 runs, " + std::to_string(steps) + " steps verified"};
}

const PlantedSpec recovery_fixture{2024, {30, 12}, {4, 3}, 0.8, 0.05, Alignment::aligned};

json recovery_config(int restarts) {
	json cfg{{"network", "-"}, {"approach", "multilevel"}, {"clusters", json::object({{"L1", 4}, {"L2", 3}})}};
	cfg["search"] = {{"restarts", restarts}, {"seed", 1}};
	cfg["weights"] = {{"mode", "auto"}, {"scale", {{"member12", 2.0}}}};
	cfg["ordered_matrices"] = false;
	return cfg;
}

// Found cluster -> planted cluster by majority overlap.
std::vector<int> majority_map(const std::vector<int>& found, const std::vector<int>& planted, int m) {
	std::vector<std::vector<int>> counts(static_cast<std::size_t>(m), std::vector<int>(static_cast<std::size_t>(m)));
	for (std::size_t i = 0; i < found.size(); ++i)
		++counts[static_cast<std::size_t>(found[i])][static_cast<std::size_t>(planted[i])];
	std::vector<int> map(static_cast<std::size_t>(m));
	for (int c = 0; c < m; ++c) {
		const auto& row = counts[static_cast<std::size_t>(c)];
		map[static_cast<std::size_t>(c)] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
	}
	return map;
}

Outcome structure_recovery() {
	const auto [net, planted] = generate_planted(recovery_fixture);
	const auto t = Clock::now();
	const auto doc = run_analysis(parse_config(recovery_config(1000), "."), net).document;
	const double elapsed = seconds_since(t);
	const auto p = partition_from_json(doc["runs"][0]["partitions"], net);
	const double ari1 = adjusted_rand(p.labels[0], planted.labels[0]);
	const double ari2 = adjusted_rand(p.labels[1], planted.labels[1]);
	const auto rows = majority_map(p.labels[0], planted.labels[0], 4);
	const auto cols = majority_map(p.labels[1], planted.labels[1], 3);
	const auto image = image_matrix(net, 2, p);
	double worst = 0.0;
	for (int r = 0; r < 4; ++r)
		for (int c = 0; c < 3; ++c)
			if (rows[static_cast<std::size_t>(r)] % 3 != cols[static_cast<std::size_t>(c)])
				worst = std::max(worst, image.at(r, c).mean);
	char buf[200];
	std::snprintf(buf, sizeof buf, "ARI L1 %.3f, L2 %.3f, max off-link two-mode density %.3f, %.1f s for 1000 restarts",
	              ari1, ari2, worst, elapsed);
	return {ari1 >= 0.9 && ari2 >= 0.9 && worst < 0.05 && elapsed < 300.0, buf};
}

Outcome determinism() {
	const auto [net, planted] = generate_planted(recovery_fixture);
	auto strip = [](json doc) {
		doc.erase("wall_time_s");
		return doc.dump();
	};
	for (const auto* approach : {"separate", "convert_multi", "multilevel"}) {
		auto cfg = recovery_config(200);
		cfg["approach"] = approach;
		cfg["main_level"] = "L1";
		if (std::string(approach) == "multilevel")
			cfg["two_stage"] = {{"scale", {{"member12", 5.0}}}};
		else
			cfg.erase("weights");
		cfg["search"]["threads"] = 1;
		const auto serial = strip(run_analysis(parse_config(cfg, "."), net).document);
		cfg["search"]["threads"] = 8;
		const auto first = strip(run_analysis(parse_config(cfg, "."), net).document);
		const auto second = strip(run_analysis(parse_config(cfg, "."), net).document);
		if (serial != first || first != second)
			return {false, std::string("documents differ for ") + approach};
	}
	return {true, "separate, convert_multi, multilevel: 1 vs 8 threads and repeated runs identical"};
}

Outcome one_to_one() {
	const auto [net, planted] = generate_planted(recovery_fixture);
	auto cfg = recovery_config(1000);
	cfg["models"] = {{"member12", {{"type", "one_to_one"}}}};
	cfg["weights"]["scale"]["member12"] = 10.0;
	const auto doc = run_analysis(parse_config(cfg, "."), net).document;
	const auto p = partition_from_json(doc["runs"][0]["partitions"], net);
	const auto eq = build_equivalences(parse_config(cfg, "."), net, {4, 3});
	const auto image = image_matrix(net, 2, p, &eq[2]);
	std::string links;
	for (int r = 0; r < 4; ++r) {
		int complete = 0, tied = 0;
		for (int c = 0; c < 3; ++c) {
			const auto& cell = image.at(r, c);
			if (cell.fitted && cell.fitted->kind == BlockKind::complete)
				++complete;
			if (cell.mean > 0.0) {
				++tied;
				if (!(cell.fitted && cell.fitted->kind == BlockKind::complete))
					return {false, "row cluster " + std::to_string(r + 1) + " has ties outside its linked cluster"};
				links += (links.empty() ? "" : " ") + std::to_string(r + 1) + "->" + std::to_string(c + 1);
			}
		}
		if (complete != 1 || tied != 1)
			return {false, "row cluster " + std::to_string(r + 1) + " links to " + std::to_string(tied) + " clusters"};
	}
	const double ari1 = adjusted_rand(p.labels[0], planted.labels[0]);
	char buf[160];
	std::snprintf(buf, sizeof buf, "links %s, ARI L1 %.3f", links.c_str(), ari1);
	return {true, buf};
}

} // namespace

int main() {
	const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
		{"oracle optimality", oracle_optimality},
		{"reshape quadruple-loop oracle", reshape_oracle},
		{"criterion identities", criterion_identities},
		{"adjusted Rand suite", ari_suite},
		{"weighting", weighting},
		{"local search contracts", local_search_contracts},
		{"structure recovery", structure_recovery},
		{"determinism", determinism},
		{"one-to-one linkage", one_to_one},
	};
	int failed = 0;
	for (std::size_t i = 0; i < criteria.size(); ++i) {
		Outcome o;
		try {
			o = criteria[i].second();
		} catch (const std::exception& e) {
			o = {false, std::string("exception: ") + e.what()};
		}
		failed += o.pass ? 0 : 1;
		std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
		std::fflush(stdout);
	}
	return failed == 0 ? 0 : 1;
}
