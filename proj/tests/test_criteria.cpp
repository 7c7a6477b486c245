#include "doctest.h"

#include <vector>

#include "mlbm/criteria.hpp"
#include "mlbm/errors.hpp"
#include "mlbm/planted.hpp"
#include "mlbm/rng.hpp"
#include "oracles.hpp"

using namespace mlbm;

namespace {

MultilevelNetwork four_node() {
	Matrix m(4, 4);
	m(0, 1) = m(1, 0) = m(2, 3) = m(3, 2) = m(0, 2) = 1;
	Relation r;
	r.name = "R";
	r.values = m;
	return build_network({{0, "A", {"1", "2", "3", "4"}}}, {r});
}

std::vector<double> v(std::initializer_list<double> x) { return x; }

} // namespace

TEST_CASE("block_inconsistency formulas") {
	CHECK(block_inconsistency(v({0, 0, 0}), BlockType::null_block()) == 0.0);
	CHECK(block_inconsistency(v({1, 1, 1, 1}), BlockType::complete(0.12)) == 0.0);
	CHECK(block_inconsistency(v({0, 0, 1, 1}), BlockType::complete(0.0)) == 1.0);
	CHECK(block_inconsistency(v({0, 0, 1, 1}), BlockType::complete(0.8)) == doctest::Approx(1.36));
	CHECK(block_inconsistency(v({3, -2, 7}), BlockType::do_not_care()) == 0.0);
	CHECK(block_inconsistency(v({1, 2}), BlockType::null_block()) == 5.0);
	// Pinned center ignores the mean.
	CHECK(block_inconsistency(v({1, 1}), BlockType::complete_pinned(0.5)) == 0.5);
	for (const auto& t : {BlockType::null_block(), BlockType::complete(0.3), BlockType::do_not_care()})
		CHECK(block_inconsistency({}, t) == 0.0);
}

TEST_CASE("moment form agrees with the direct form") {
	Rng rng(11);
	for (int trial = 0; trial < 200; ++trial) {
		std::vector<double> values(rng.below(12));
		double sum = 0, sq = 0;
		for (auto& x : values) {
			x = trial % 2 ? (rng.bernoulli(0.4) ? 1.0 : 0.0) : rng.uniform() * 5.0;
			sum += x;
			sq += x * x;
		}
		for (const auto& t : {BlockType::null_block(), BlockType::complete(0.0), BlockType::complete(0.7),
		                      BlockType::complete_pinned(0.4), BlockType::do_not_care()}) {
			const double direct = block_inconsistency(values, t);
			const double moments = block_inconsistency_from_moments(values.size(), sum, sq, t);
			CHECK(moments == doctest::Approx(direct).epsilon(1e-12).scale(1.0));
		}
	}
}

TEST_CASE("block_fit picks the minimum with fixed tie-breaks") {
	const std::vector<BlockType> nc{BlockType::null_block(), BlockType::complete(0.5)};
	auto fit = block_fit(v({0, 0, 0, 0}), nc);
	CHECK(fit.type == BlockType::null_block());
	CHECK(fit.inconsistency == 0.0);

	fit = block_fit(v({1, 1, 1, 1}), nc);
	CHECK(fit.type.kind == BlockKind::complete);
	CHECK(fit.inconsistency == 0.0);

	fit = block_fit(v({0, 1, 0, 1}), std::vector<BlockType>{BlockType::null_block(), BlockType::complete(0.0)});
	CHECK(fit.type.kind == BlockKind::complete);
	CHECK(fit.inconsistency == 1.0);

	// Equal fits: do_not_care beats null beats complete regardless of listing order.
	fit = block_fit(v({}), std::vector<BlockType>{BlockType::complete(0.1), BlockType::null_block()});
	CHECK(fit.type == BlockType::null_block());
	fit = block_fit(v({0, 0}), std::vector<BlockType>{BlockType::complete(0.0), BlockType::do_not_care(),
	                                                  BlockType::null_block()});
	CHECK(fit.type == BlockType::do_not_care());
	CHECK_THROWS_AS(block_fit(v({1}), std::vector<BlockType>{}), SpecError);
}

TEST_CASE("relation_criterion on the four-node example") {
	const auto net = four_node();
	const auto p = make_partition(net, {{0, 0, 1, 1}});
	const auto rc = relation_criterion(net, 0, p, cohesive_prespec(2, 0.0));
	CHECK(rc.raw == 1.0);
	REQUIRE(rc.blocks.size() == 4);
	CHECK(rc.blocks[0].inconsistency == 0.0);
	CHECK(rc.blocks[0].cells == 2);
	CHECK(rc.blocks[1].inconsistency == 1.0);
	CHECK(rc.blocks[1].cells == 4);
	CHECK(rc.blocks[2].inconsistency == 0.0);
	CHECK(rc.blocks[3].inconsistency == 0.0);

	// One cluster collapses to a single block of the 12 off-diagonal cells.
	const auto one = single_cluster_partition(net);
	std::vector<double> cells;
	for (std::size_t i = 0; i < 4; ++i)
		for (std::size_t j = 0; j < 4; ++j)
			if (i != j)
				cells.push_back(net.relation(0).values(i, j));
	CHECK(relation_criterion(net, 0, one, cohesive_prespec(1, 0.0)).raw ==
	      block_inconsistency(cells, BlockType::complete(0.0)));

	CHECK(relation_criterion(net, 0, p, uniform_prespec(2, 2, {BlockType::do_not_care()})).raw == 0.0);
	CHECK_THROWS_AS(relation_criterion(net, 0, p, cohesive_prespec(3, 0.0)), SpecError);
}

TEST_CASE("total_criterion weighting and errors") {
	const auto net = four_node();
	const auto p = make_partition(net, {{0, 0, 1, 1}});
	const auto b = total_criterion(net, p, {cohesive_prespec(2, 0.0)}, unit_weights(1));
	CHECK(b.total == relation_criterion(net, 0, p, cohesive_prespec(2, 0.0)).raw);

	// Two relations with raw 1 and 2 weighted 1 and 0.5.
	Matrix m2(4, 4);
	m2(0, 3) = m2(3, 0) = 1;
	Relation r1 = net.relation(0), r2 = net.relation(0), r3 = net.relation(0);
	r2.name = "S";
	r2.values = m2;
	r3.name = "T";
	r3.values = Matrix(4, 4, 5.0);
	const auto net2 = build_network({net.level(0)}, {r1, r2});
	const EquivalenceSpec eq{cohesive_prespec(2, 0.0), cohesive_prespec(2, 0.0)};
	const auto two = total_criterion(net2, p, eq, {{1.0, 0.5}});
	CHECK(two.per_relation[0].raw == 1.0);
	CHECK(two.per_relation[1].raw == 2.0);
	CHECK(two.total == 2.0);

	const auto net3 = build_network({net.level(0)}, {r1, r2, r3});
	const EquivalenceSpec eq3{cohesive_prespec(2, 0.0), cohesive_prespec(2, 0.0), cohesive_prespec(2, 0.0)};
	CHECK(total_criterion(net3, p, eq3, {{1.0, 0.5, 0.0}}).total == 2.0);

	MultiPartition bad{{{0, 0, 0, 0}}, {2}};
	CHECK_THROWS_AS(total_criterion(net, bad, {cohesive_prespec(2, 0.0)}, unit_weights(1)), FeasibilityError);
	try {
		total_criterion(net, MultiPartition{{{0, 0, 5, 1}}, {2}}, {cohesive_prespec(2, 0.0)}, unit_weights(1));
	} catch (const FeasibilityError& e) {
		CHECK(std::string(e.what()).find("'3'") != std::string::npos);
	}
	CHECK_THROWS_AS(total_criterion(net, p, {cohesive_prespec(2, 0.0)}, {{-1.0}}), ValidationError);
	CHECK_THROWS_AS(total_criterion(net, p, {cohesive_prespec(2, 0.0)}, {{0.0}}), ValidationError);
}

TEST_CASE("is_feasible and partition construction") {
	const auto net = four_node();
	CHECK(is_feasible(single_cluster_partition(net), net));
	CHECK_FALSE(is_feasible(MultiPartition{{{0, 0, 1, 1}}, {3}}, net));
	CHECK_FALSE(is_feasible(MultiPartition{{{0, 0, 1}}, {2}}, net));
	CHECK_FALSE(is_feasible(MultiPartition{{{0, 0, -1, 1}}, {2}}, net));

	const auto [two, planted] = generate_planted({1, {3, 2}, {1, 1}, 1.0, 0.0, Alignment::aligned});
	// Global cluster 7 used on both levels is unrepresentable.
	CHECK_THROWS_AS(partition_from_global(two, {7, 7, 8, 7, 9}), ValidationError);
	const auto ok = partition_from_global(two, {7, 7, 8, 3, 9});
	CHECK(ok.labels[0] == std::vector<int>{0, 0, 1});
	CHECK(ok.labels[1] == std::vector<int>{0, 1});
	CHECK(ok.cluster_counts == std::vector<int>{2, 2});
}

TEST_CASE("pre-specified model constructors") {
	const auto one = cohesive_prespec(1, 0.3);
	CHECK(one.rows() == 1);
	CHECK(one.allowed(0, 0) == std::vector<BlockType>{BlockType::complete(0.3)});

	const auto researchers = cohesive_prespec(4, 0.12);
	for (int r = 0; r < 4; ++r)
		for (int c = 0; c < 4; ++c)
			CHECK(researchers.allowed(r, c) ==
			      std::vector<BlockType>{r == c ? BlockType::complete(0.12) : BlockType::null_block()});
	const auto labs = cohesive_prespec(3, 0.08);
	CHECK(labs.allowed(2, 2).front().m_pre == 0.08);

	CHECK(one_to_one_prespec(1).allowed(0, 0).front().kind == BlockKind::complete);
	const auto rect = one_to_one_prespec(4, 3, 0.0);
	CHECK(rect.allowed(3, 0).front().kind == BlockKind::complete);
	CHECK(rect.allowed(3, 1).front().kind == BlockKind::null);
	CHECK_THROWS_AS(PrespecifiedModel(1, 1, {{}}), SpecError);
	CHECK_THROWS_AS(cohesive_prespec(0, 0.1), SpecError);

	const auto collapsed = researchers.collapsed();
	CHECK(collapsed.rows() == 1);
	CHECK(collapsed.allowed(0, 0).size() == 2);
}

TEST_CASE("one_to_one model on membership matrices") {
	// Lower units 0,1 in cluster 0 tied to upper unit 0; units 2,3 to upper 1.
	Matrix member(4, 2);
	member(0, 0) = member(1, 0) = member(2, 1) = member(3, 1) = 1;
	Relation r;
	r.name = "M";
	r.from_level = 0;
	r.to_level = 1;
	r.values = member;
	const auto net = build_network({{0, "low", {"a", "b", "c", "d"}}, {0, "up", {"p", "q"}}}, {r});
	const auto aligned = make_partition(net, {{0, 0, 1, 1}, {0, 1}});
	CHECK(relation_criterion(net, 0, aligned, one_to_one_prespec(2)).raw == 0.0);
	// Row cluster 0 tied to column cluster 1: both off-diagonal blocks carry 2 ties.
	const auto crossed = make_partition(net, {{0, 0, 1, 1}, {1, 0}});
	const auto rc = relation_criterion(net, 0, crossed, one_to_one_prespec(2));
	CHECK(rc.blocks[1].inconsistency == 2.0);
	CHECK(rc.blocks[2].inconsistency == 2.0);
	// Diagonal blocks are all-zero 2x1 blocks: complete(0) center 0.
	CHECK(rc.raw == 4.0);
}

TEST_CASE("criterion identities on random instances") {
	Rng rng(5);
	for (int trial = 0; trial < 40; ++trial) {
		const auto [net, planted] =
			generate_planted({static_cast<std::uint64_t>(trial), {7, 5}, {3, 2}, 0.7, 0.2, Alignment::random});
		MultiPartition p = planted;
		// Random feasible partition: shuffle labels.
		for (auto& level : p.labels)
			for (std::size_t i = level.size(); i > 1; --i)
				std::swap(level[i - 1], level[rng.below(i)]);
		const double mp = 0.1 + 0.5 * rng.uniform();
		const EquivalenceSpec eq{cohesive_prespec(3, mp), cohesive_prespec(2, mp),
		                         uniform_prespec(3, 2, {BlockType::null_block(), BlockType::complete(mp)})};
		const WeightVector w{{1.0, 0.3 + rng.uniform(), 2.0 * rng.uniform()}};
		const auto b = total_criterion(net, p, eq, w);

		// Additivity: the total is the ordered sum of weighted terms.
		double sum = 0.0;
		for (const auto& t : b.per_relation) {
			CHECK(t.weighted == t.weight * t.raw);
			sum += t.weighted;
		}
		CHECK(b.total == sum);
		CHECK(b.total == total_value(net, p, eq, w));
		CHECK(b.total == doctest::Approx(oracle::criterion_cells(net, p, eq, w)).epsilon(1e-12));

		// Do-not-care never increases and all-dnc gives zero.
		EquivalenceSpec dnc = eq;
		dnc[0] = uniform_prespec(3, 3, {BlockType::do_not_care()});
		CHECK(total_value(net, p, dnc, w) <= b.total);
		const EquivalenceSpec all_dnc{uniform_prespec(3, 3, {BlockType::do_not_care()}),
		                              uniform_prespec(2, 2, {BlockType::do_not_care()}),
		                              uniform_prespec(3, 2, {BlockType::do_not_care()})};
		CHECK(total_value(net, p, all_dnc, w) == 0.0);

		// Scale law: values x s and m_pre x s give raw x s^2.
		const double s = 0.5 + 3.0 * rng.uniform();
		std::vector<Relation> scaled;
		for (auto r : net.relations()) {
			for (std::size_t i = 0; i < r.values.rows(); ++i)
				for (std::size_t j = 0; j < r.values.cols(); ++j)
					r.values(i, j) *= s;
			scaled.push_back(r);
		}
		const auto snet = build_network(net.levels(), scaled);
		for (std::size_t k = 0; k < 3; ++k) {
			const double raw = relation_raw(net, k, p, eq[k]);
			const double sraw = relation_raw(snet, k, p, eq[k].scaled(s));
			CHECK(sraw == doctest::Approx(s * s * raw).epsilon(1e-12));
		}

		// Relabeling clusters consistently leaves the criterion unchanged.
		MultiPartition q = p;
		for (auto& c : q.labels[0])
			c = (c + 1) % 3;
		EquivalenceSpec qeq = eq;
		// cohesive and uniform models are invariant under relabeling by construction.
		CHECK(total_value(net, q, qeq, w) == doctest::Approx(b.total).epsilon(1e-12));
	}
}

TEST_CASE("constrained complete reduces to plain SS when m_pre <= mean") {
	Rng rng(9);
	for (int trial = 0; trial < 100; ++trial) {
		std::vector<double> values(1 + rng.below(20));
		double sum = 0;
		for (auto& x : values) {
			x = rng.uniform();
			sum += x;
		}
		const double mean = sum / static_cast<double>(values.size());
		const double m_pre = mean * rng.uniform();
		CHECK(block_inconsistency(values, BlockType::complete(m_pre)) ==
		      block_inconsistency(values, BlockType::complete(0.0)));
	}
}
