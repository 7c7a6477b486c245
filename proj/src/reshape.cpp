#include "mlbm/reshape.hpp"

#include <algorithm>
#include <map>

#include "mlbm/errors.hpp"

namespace mlbm {

bool is_binary(const Relation& relation) {
	return std::all_of(relation.values.data().begin(), relation.values.data().end(),
	                   [](double v) { return v == 0.0 || v == 1.0; });
}

Relation reshape_down(const Relation& membership, const Relation& upper, const ReshapeOptions& options) {
	if (!upper.one_mode())
		throw ValidationError("reshape: relation '" + upper.name + "' is not one-mode");
	if (membership.to_level != upper.from_level || membership.values.cols() != upper.values.rows())
		throw ValidationError("reshape: membership '" + membership.name + "' does not map onto the level of '" +
		                      upper.name + "'");
	if (options.binarize && !(options.threshold > 0.0))
		throw ValidationError("reshape: binarization threshold must be positive");
	Matrix middle = upper.values;
	if (options.include_comembership)
		for (std::size_t a = 0; a < middle.rows(); ++a)
			middle(a, a) += 1.0;
	Matrix product = membership.values * middle * membership.values.transposed();
	for (std::size_t i = 0; i < product.rows(); ++i)
		for (std::size_t j = 0; j < product.cols(); ++j) {
			if (options.zero_diagonal && i == j)
				product(i, j) = 0.0;
			else if (options.binarize)
				product(i, j) = product(i, j) >= options.threshold ? 1.0 : 0.0;
		}
	Relation out;
	out.name = upper.name + "_reshaped";
	out.from_level = out.to_level = membership.from_level;
	out.values = std::move(product);
	out.diagonal_defined = !options.zero_diagonal;
	return out;
}

std::vector<int> expand_partition(const std::vector<int>& upper_labels, const Relation& membership,
                                  const std::vector<std::string>& lower_names, TieRule rule) {
	if (membership.values.cols() != upper_labels.size())
		throw ValidationError("expand_partition: membership has " + std::to_string(membership.values.cols()) +
		                      " columns for " + std::to_string(upper_labels.size()) + " upper labels");
	const auto n = membership.values.rows();
	auto name = [&](std::size_t i) { return i < lower_names.size() ? lower_names[i] : "#" + std::to_string(i + 1); };
	const int existing = upper_labels.empty() ? 0 : *std::max_element(upper_labels.begin(), upper_labels.end()) + 1;

	std::vector<std::vector<int>> classes(n);
	for (std::size_t i = 0; i < n; ++i) {
		for (std::size_t a = 0; a < upper_labels.size(); ++a)
			if (membership.values(i, a) != 0.0)
				classes[i].push_back(upper_labels[a]);
		if (classes[i].empty())
			throw MembershipError("unit '" + name(i) + "' has no upper-level membership");
		std::sort(classes[i].begin(), classes[i].end());
	}

	std::vector<int> out(n, -1);
	std::map<std::vector<int>, int> combinations;
	for (std::size_t i = 0; i < n; ++i) {
		const auto& cs = classes[i];
		if (cs.front() == cs.back()) {
			out[i] = cs.front();
			continue;
		}
		if (rule == TieRule::new_class_per_combination) {
			combinations.emplace(cs, 0);
			continue;
		}
		int best = -1;
		int best_count = 0;
		bool tied = false;
		for (std::size_t s = 0; s < cs.size();) {
			std::size_t e = s;
			while (e < cs.size() && cs[e] == cs[s])
				++e;
			const int count = static_cast<int>(e - s);
			if (count > best_count) {
				best = cs[s];
				best_count = count;
				tied = false;
			} else if (count == best_count) {
				tied = true;
			}
			s = e;
		}
		if (tied && rule == TieRule::error_on_tie)
			throw TieError("unit '" + name(i) + "' has no majority class");
		out[i] = best;
	}
	if (rule == TieRule::new_class_per_combination) {
		int next = existing;
		for (auto& [key, label] : combinations)
			label = next++;
		for (std::size_t i = 0; i < n; ++i)
			if (out[i] < 0)
				out[i] = combinations.at(classes[i]);
	}
	return out;
}

ConversionInputs find_conversion_inputs(const MultilevelNetwork& network, std::size_t main_level) {
	std::optional<std::size_t> original, membership, other;
	bool transposed = false;
	std::size_t other_level = 0;
	for (const auto& r : network.relations()) {
		if (r.one_mode() && r.from_level == main_level && !original)
			original = r.id;
		if (!r.one_mode() && !membership && (r.from_level == main_level || r.to_level == main_level)) {
			membership = r.id;
			transposed = r.to_level == main_level;
			other_level = transposed ? r.from_level : r.to_level;
		}
	}
	if (!original)
		throw SpecError("main level '" + network.level(main_level).name + "' has no one-mode relation");
	if (!membership)
		throw SpecError("main level '" + network.level(main_level).name + "' has no two-mode relation");
	for (const auto& r : network.relations())
		if (r.one_mode() && r.from_level == other_level) {
			other = r.id;
			break;
		}
	if (!other)
		throw SpecError("level '" + network.level(other_level).name + "' has no one-mode relation");
	return {*original, *membership, *other, transposed};
}

Relation institutional_relation(const MultilevelNetwork& network, std::size_t main_level, bool include_comembership) {
	const auto in = find_conversion_inputs(network, main_level);
	Relation membership = network.relation(in.membership);
	if (in.membership_transposed) {
		membership.values = membership.values.transposed();
		std::swap(membership.from_level, membership.to_level);
	}
	const auto& other = network.relation(in.other);
	ReshapeOptions options;
	options.include_comembership = include_comembership;
	options.binarize = is_binary(membership) && is_binary(other);
	auto out = reshape_down(membership, other, options);
	out.name = "institutional";
	return out;
}

Relation build_extended(const MultilevelNetwork& network, std::size_t main_level, Aggregate aggregate,
                        bool include_comembership) {
	const auto in = find_conversion_inputs(network, main_level);
	const auto& original = network.relation(in.original);
	const auto institutional = institutional_relation(network, main_level, include_comembership);
	Relation out = original;
	out.name = "extended";
	for (std::size_t i = 0; i < out.values.rows(); ++i)
		for (std::size_t j = 0; j < out.values.cols(); ++j) {
			const double a = original.values(i, j);
			const double b = institutional.values(i, j);
			double v = 0.0;
			switch (aggregate) {
			case Aggregate::max:
				v = std::max(a, b);
				break;
			case Aggregate::min:
				v = std::min(a, b);
				break;
			case Aggregate::average:
				v = (a + b) / 2.0;
				break;
			case Aggregate::sum:
				v = a + b;
				break;
			}
			out.values(i, j) = v;
		}
	return out;
}

MultilevelNetwork single_relation_network(const MultilevelNetwork& network, std::size_t main_level, Relation relation) {
	Level level = network.level(main_level);
	relation.from_level = relation.to_level = 0;
	return build_network({level}, {std::move(relation)});
}

MultilevelNetwork build_multirelational(const MultilevelNetwork& network, std::size_t main_level,
                                        bool include_comembership) {
	const auto in = find_conversion_inputs(network, main_level);
	Relation original = network.relation(in.original);
	original.name = "original";
	original.from_level = original.to_level = 0;
	Relation institutional = institutional_relation(network, main_level, include_comembership);
	institutional.from_level = institutional.to_level = 0;
	institutional.diagonal_defined = original.diagonal_defined;
	return build_network({network.level(main_level)}, {std::move(original), std::move(institutional)});
}

} // namespace mlbm
