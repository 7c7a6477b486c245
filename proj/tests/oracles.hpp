#pragma once

// Brute-force reference implementations. They deliberately share no code
// path with the library routines they check.

#include <cmath>
#include <cstdint>
#include <vector>

#include "mlbm/criteria.hpp"
#include "mlbm/network.hpp"

namespace oracle {

// r[i][j] = sum over upper pairs (a, b) of m[i][a] * u'[a][b] * m[j][b],
// u' = upper (+ identity), diagonal zeroed, optionally thresholded.
inline mlbm::Matrix reshape_quadruple(const mlbm::Matrix& membership, const mlbm::Matrix& upper, bool comembership,
                                      bool binarize, double threshold) {
	const auto n = membership.rows();
	const auto k = membership.cols();
	mlbm::Matrix out(n, n);
	for (std::size_t i = 0; i < n; ++i)
		for (std::size_t j = 0; j < n; ++j) {
			if (i == j)
				continue;
			double v = 0.0;
			for (std::size_t a = 0; a < k; ++a)
				for (std::size_t b = 0; b < k; ++b) {
					const double u = upper(a, b) + (comembership && a == b ? 1.0 : 0.0);
					v += membership(i, a) * u * membership(j, b);
				}
			out(i, j) = binarize ? (v >= threshold ? 1.0 : 0.0) : v;
		}
	return out;
}

struct PairCounts {
	std::int64_t both = 0, only_p = 0, only_q = 0, neither = 0;
};

inline PairCounts pair_counts(const std::vector<int>& p, const std::vector<int>& q) {
	PairCounts c;
	for (std::size_t i = 0; i < p.size(); ++i)
		for (std::size_t j = i + 1; j < p.size(); ++j) {
			const bool sp = p[i] == p[j];
			const bool sq = q[i] == q[j];
			if (sp && sq)
				++c.both;
			else if (sp)
				++c.only_p;
			else if (sq)
				++c.only_q;
			else
				++c.neither;
		}
	return c;
}

inline double rand_pairs(const std::vector<int>& p, const std::vector<int>& q) {
	const auto c = pair_counts(p, q);
	const auto total = c.both + c.only_p + c.only_q + c.neither;
	return static_cast<double>(c.both + c.neither) / static_cast<double>(total);
}

// ARI from the 2x2 pair table: 2(ad - bc) / ((a+b)(b+d) + (a+c)(c+d)).
inline double ari_pairs(const std::vector<int>& p, const std::vector<int>& q) {
	const auto c = pair_counts(p, q);
	const auto a = c.both, b = c.only_p, cc = c.only_q, d = c.neither;
	const auto num = 2 * (a * d - b * cc);
	const auto den = (a + b) * (b + d) + (a + cc) * (cc + d);
	return static_cast<double>(num) / static_cast<double>(den);
}

// Criterion by scanning every cell for every block.
inline double criterion_cells(const mlbm::MultilevelNetwork& network, const mlbm::MultiPartition& partition,
                              const mlbm::EquivalenceSpec& eq, const mlbm::WeightVector& w) {
	double total = 0.0;
	for (const auto& r : network.relations()) {
		const auto& model = eq[r.id];
		double raw = 0.0;
		for (int p = 0; p < model.rows(); ++p)
			for (int q = 0; q < model.cols(); ++q) {
				double sum = 0.0, n = 0.0;
				for (std::size_t i = 0; i < r.values.rows(); ++i)
					for (std::size_t j = 0; j < r.values.cols(); ++j)
						if (partition.labels[r.from_level][i] == p && partition.labels[r.to_level][j] == q &&
						    r.defined(i, j)) {
							sum += r.values(i, j);
							n += 1.0;
						}
				double best = INFINITY;
				for (const auto& t : model.allowed(p, q)) {
					double e = 0.0;
					if (t.kind == mlbm::BlockKind::null) {
						for (std::size_t i = 0; i < r.values.rows(); ++i)
							for (std::size_t j = 0; j < r.values.cols(); ++j)
								if (partition.labels[r.from_level][i] == p && partition.labels[r.to_level][j] == q &&
								    r.defined(i, j))
									e += r.values(i, j) * r.values(i, j);
					} else if (t.kind == mlbm::BlockKind::complete && n > 0) {
						const double c = t.pinned ? t.m_pre : std::max(sum / n, t.m_pre);
						for (std::size_t i = 0; i < r.values.rows(); ++i)
							for (std::size_t j = 0; j < r.values.cols(); ++j)
								if (partition.labels[r.from_level][i] == p && partition.labels[r.to_level][j] == q &&
								    r.defined(i, j))
									e += (r.values(i, j) - c) * (r.values(i, j) - c);
					}
					best = std::min(best, e);
				}
				raw += best;
			}
		total += w[r.id] * raw;
	}
	return total;
}

// Every surjective labeling of n units onto m clusters, counted through all
// m^n labelings divided by the m! relabelings.
inline std::uint64_t count_partitions(std::size_t n, int m) {
	std::uint64_t surjective = 0;
	std::vector<int> labels(n, 0);
	for (;;) {
		std::vector<bool> used(static_cast<std::size_t>(m), false);
		for (int l : labels)
			used[static_cast<std::size_t>(l)] = true;
		bool all = true;
		for (bool u : used)
			all = all && u;
		if (all)
			++surjective;
		std::size_t i = 0;
		while (i < n && ++labels[i] == m)
			labels[i++] = 0;
		if (i == n)
			break;
	}
	std::uint64_t fact = 1;
	for (int k = 2; k <= m; ++k)
		fact *= static_cast<std::uint64_t>(k);
	return surjective / fact;
}

} // namespace oracle
