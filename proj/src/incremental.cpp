#include "mlbm/incremental.hpp"

namespace mlbm {

IncrementalCriterion::IncrementalCriterion(const MultilevelNetwork& network, const EquivalenceSpec& equivalences,
                                           const WeightVector& weights, MultiPartition start)
	: network_(network), equivalences_(equivalences), weights_(weights), partition_(std::move(start)) {
	require_spec_fits(network_, partition_, equivalences_, weights_);
	sizes_ = cluster_sizes(partition_);
	relations_.resize(network_.relation_count());
	touching_.resize(network_.level_count());
	for (std::size_t l = 0; l < network_.level_count(); ++l)
		touching_[l] = network_.relations_touching(l);
	for (std::size_t k = 0; k < relations_.size(); ++k)
		rebuild(k);
	retotal();
	saved_.resize(relations_.size());
}

void IncrementalCriterion::rebuild(std::size_t k) {
	const auto& relation = network_.relation(k);
	const auto& model = equivalences_[k];
	auto& state = relations_[k];
	state.blocks.assign(static_cast<std::size_t>(model.rows() * model.cols()), Moments{});
	const auto& rows = partition_.labels[relation.from_level];
	const auto& cols = partition_.labels[relation.to_level];
	for (std::size_t i = 0; i < relation.values.rows(); ++i)
		for (std::size_t j = 0; j < relation.values.cols(); ++j) {
			if (!relation.defined(i, j))
				continue;
			const double v = relation.values(i, j);
			auto& b = state.blocks[static_cast<std::size_t>(rows[i] * model.cols() + cols[j])];
			++b.count;
			b.sum += v;
			b.sum_sq += v * v;
		}
	refit(k);
}

void IncrementalCriterion::refit(std::size_t k) {
	const auto& model = equivalences_[k];
	auto& state = relations_[k];
	state.fits.resize(state.blocks.size());
	double raw = 0.0;
	for (int p = 0; p < model.rows(); ++p)
		for (int q = 0; q < model.cols(); ++q) {
			const auto idx = static_cast<std::size_t>(p * model.cols() + q);
			const auto& b = state.blocks[idx];
			const auto& allowed = model.ordered(p, q);
			double best = block_inconsistency_from_moments(static_cast<std::size_t>(b.count), b.sum, b.sum_sq,
			                                               allowed.front());
			for (std::size_t t = 1; t < allowed.size(); ++t) {
				const double e = block_inconsistency_from_moments(static_cast<std::size_t>(b.count), b.sum,
				                                                  b.sum_sq, allowed[t]);
				if (e < best)
					best = e;
			}
			state.fits[idx] = best;
			raw += best;
		}
	state.raw = raw;
}

void IncrementalCriterion::retotal() {
	double total = 0.0;
	for (std::size_t k = 0; k < relations_.size(); ++k)
		total += weights_[k] * relations_[k].raw;
	total_ = total;
}

void IncrementalCriterion::shift(std::size_t k, std::size_t level, std::size_t unit, int from, int to) {
	const auto& relation = network_.relation(k);
	const auto& model = equivalences_[k];
	auto& blocks = relations_[k].blocks;
	const auto cols_m = static_cast<std::size_t>(model.cols());
	auto at = [&](int p, int q) -> Moments& {
		return blocks[static_cast<std::size_t>(p) * cols_m + static_cast<std::size_t>(q)];
	};
	auto transfer = [](Moments& src, Moments& dst, const Moments& m) {
		src.count -= m.count;
		src.sum -= m.sum;
		src.sum_sq -= m.sum_sq;
		dst.count += m.count;
		dst.sum += m.sum;
		dst.sum_sq += m.sum_sq;
	};

	if (relation.from_level == level) {
		// Row strip of `unit`, aggregated by column cluster.
		const auto& col_labels = partition_.labels[relation.to_level];
		row_acc_.assign(cols_m, Moments{});
		for (std::size_t j = 0; j < relation.values.cols(); ++j) {
			if (relation.one_mode() && j == unit)
				continue;
			const double v = relation.values(unit, j);
			auto& acc = row_acc_[static_cast<std::size_t>(col_labels[j])];
			++acc.count;
			acc.sum += v;
			acc.sum_sq += v * v;
		}
		for (std::size_t q = 0; q < cols_m; ++q)
			if (row_acc_[q].count > 0)
				transfer(at(from, static_cast<int>(q)), at(to, static_cast<int>(q)), row_acc_[q]);
	}
	if (relation.to_level == level) {
		const auto& row_labels = partition_.labels[relation.from_level];
		const auto rows_m = static_cast<std::size_t>(model.rows());
		col_acc_.assign(rows_m, Moments{});
		for (std::size_t i = 0; i < relation.values.rows(); ++i) {
			if (relation.one_mode() && i == unit)
				continue;
			const double v = relation.values(i, unit);
			auto& acc = col_acc_[static_cast<std::size_t>(row_labels[i])];
			++acc.count;
			acc.sum += v;
			acc.sum_sq += v * v;
		}
		for (std::size_t p = 0; p < rows_m; ++p)
			if (col_acc_[p].count > 0)
				transfer(at(static_cast<int>(p), from), at(static_cast<int>(p), to), col_acc_[p]);
	}
	if (relation.one_mode() && relation.diagonal_defined) {
		const double v = relation.values(unit, unit);
		transfer(at(from, from), at(to, to), Moments{1, v, v * v});
	}
}

void IncrementalCriterion::move(std::size_t level, std::size_t unit, int to) {
	const int from = partition_.labels[level][unit];
	if (from == to)
		return;
	for (auto k : touching_[level])
		shift(k, level, unit, from, to);
	partition_.labels[level][unit] = to;
	--sizes_[level][static_cast<std::size_t>(from)];
	++sizes_[level][static_cast<std::size_t>(to)];
	for (auto k : touching_[level])
		refit(k);
	retotal();
}

void IncrementalCriterion::save(std::size_t level) {
	for (auto k : touching_[level])
		saved_[k] = relations_[k];
	saved_total_ = total_;
}

void IncrementalCriterion::restore(std::size_t level) {
	for (auto k : touching_[level])
		std::swap(relations_[k], saved_[k]);
	total_ = saved_total_;
}

double IncrementalCriterion::try_move(std::size_t level, std::size_t unit, int to) {
	const int from = partition_.labels[level][unit];
	save(level);
	move(level, unit, to);
	const double value = total_;
	partition_.labels[level][unit] = from;
	--sizes_[level][static_cast<std::size_t>(to)];
	++sizes_[level][static_cast<std::size_t>(from)];
	restore(level);
	return value;
}

double IncrementalCriterion::try_exchange(std::size_t level, std::size_t a, std::size_t b) {
	const int ca = partition_.labels[level][a];
	const int cb = partition_.labels[level][b];
	save(level);
	move(level, a, cb);
	move(level, b, ca);
	const double value = total_;
	partition_.labels[level][a] = ca;
	partition_.labels[level][b] = cb;
	restore(level);
	return value;
}

double IncrementalCriterion::recompute() const {
	return total_value(network_, partition_, equivalences_, weights_);
}

} // namespace mlbm
