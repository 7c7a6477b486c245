#include "mlbm/network.hpp"

#include <cmath>
#include <set>
#include <unordered_set>

#include "mlbm/errors.hpp"
#include "mlbm/planted.hpp"
#include "mlbm/rng.hpp"

namespace mlbm {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
	rows_ = rows.size();
	cols_ = rows_ == 0 ? 0 : rows.begin()->size();
	data_.reserve(rows_ * cols_);
	for (const auto& row : rows) {
		if (row.size() != cols_)
			throw ValidationError("ragged matrix literal");
		data_.insert(data_.end(), row.begin(), row.end());
	}
}

Matrix Matrix::transposed() const {
	Matrix out(cols_, rows_);
	for (std::size_t i = 0; i < rows_; ++i)
		for (std::size_t j = 0; j < cols_; ++j)
			out(j, i) = (*this)(i, j);
	return out;
}

Matrix Matrix::identity(std::size_t n) {
	Matrix out(n, n);
	for (std::size_t i = 0; i < n; ++i)
		out(i, i) = 1.0;
	return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
	if (a.cols() != b.rows())
		throw ValidationError("matrix product: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
		                      " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
	Matrix out(a.rows(), b.cols());
	for (std::size_t i = 0; i < a.rows(); ++i)
		for (std::size_t k = 0; k < a.cols(); ++k) {
			const double aik = a(i, k);
			if (aik == 0.0)
				continue;
			for (std::size_t j = 0; j < b.cols(); ++j)
				out(i, j) += aik * b(k, j);
		}
	return out;
}

std::size_t Relation::defined_cell_count() const {
	std::size_t cells = values.rows() * values.cols();
	if (one_mode() && !diagonal_defined)
		cells -= values.rows();
	return cells;
}

std::size_t MultilevelNetwork::unit_count() const {
	std::size_t n = 0;
	for (const auto& level : levels_)
		n += level.size();
	return n;
}

std::optional<std::size_t> MultilevelNetwork::find_level(const std::string& name) const {
	for (const auto& level : levels_)
		if (level.name == name)
			return level.id;
	return std::nullopt;
}

std::optional<std::size_t> MultilevelNetwork::find_relation(const std::string& name) const {
	for (const auto& relation : relations_)
		if (relation.name == name)
			return relation.id;
	return std::nullopt;
}

std::size_t MultilevelNetwork::level_id(const std::string& name) const {
	if (auto id = find_level(name))
		return *id;
	throw SpecError("unknown level '" + name + "'");
}

std::size_t MultilevelNetwork::relation_id(const std::string& name) const {
	if (auto id = find_relation(name))
		return *id;
	throw SpecError("unknown relation '" + name + "'");
}

std::vector<std::size_t> MultilevelNetwork::relations_touching(std::size_t level) const {
	std::vector<std::size_t> out;
	for (const auto& relation : relations_)
		if (relation.from_level == level || relation.to_level == level)
			out.push_back(relation.id);
	return out;
}

MultilevelNetwork build_network(std::vector<Level> levels, std::vector<Relation> relations) {
	if (levels.empty())
		throw ValidationError("network needs at least one level");
	std::unordered_set<std::string> level_names;
	std::unordered_set<std::string> units;
	for (std::size_t l = 0; l < levels.size(); ++l) {
		auto& level = levels[l];
		level.id = l;
		if (level.unit_names.empty())
			throw ValidationError("level '" + level.name + "' is empty");
		if (!level_names.insert(level.name).second)
			throw ValidationError("duplicate level name '" + level.name + "'");
		for (const auto& unit : level.unit_names)
			if (!units.insert(unit).second)
				throw ValidationError("unit '" + unit + "' occurs twice (level '" + level.name + "')");
	}
	std::unordered_set<std::string> relation_names;
	for (std::size_t k = 0; k < relations.size(); ++k) {
		auto& relation = relations[k];
		relation.id = k;
		if (!relation_names.insert(relation.name).second)
			throw ValidationError("duplicate relation name '" + relation.name + "'");
		if (relation.from_level >= levels.size() || relation.to_level >= levels.size())
			throw ValidationError("relation '" + relation.name + "' references a missing level");
		const auto rows = levels[relation.from_level].size();
		const auto cols = levels[relation.to_level].size();
		if (relation.values.rows() != rows || relation.values.cols() != cols)
			throw ValidationError("relation '" + relation.name + "' is " + std::to_string(relation.values.rows()) + "x" +
			                      std::to_string(relation.values.cols()) + " but its levels need " +
			                      std::to_string(rows) + "x" + std::to_string(cols));
		for (double v : relation.values.data())
			if (!std::isfinite(v))
				throw ValidationError("relation '" + relation.name + "' has a non-finite value");
	}
	MultilevelNetwork network;
	network.levels_ = std::move(levels);
	network.relations_ = std::move(relations);
	return network;
}

double density(const Relation& relation) {
	const auto cells = relation.defined_cell_count();
	if (cells == 0)
		return 0.0;
	std::size_t ties = 0;
	for (std::size_t i = 0; i < relation.values.rows(); ++i)
		for (std::size_t j = 0; j < relation.values.cols(); ++j)
			if (relation.defined(i, j) && relation.values(i, j) != 0.0)
				++ties;
	return static_cast<double>(ties) / static_cast<double>(cells);
}

std::vector<RelationSummary> network_summary(const MultilevelNetwork& network) {
	std::vector<RelationSummary> out;
	for (const auto& relation : network.relations()) {
		RelationSummary s;
		s.name = relation.name;
		s.rows = relation.values.rows();
		s.cols = relation.values.cols();
		s.density = density(relation);
		std::size_t ties = 0;
		std::size_t reciprocated = 0;
		for (std::size_t i = 0; i < s.rows; ++i)
			for (std::size_t j = 0; j < s.cols; ++j) {
				if (!relation.defined(i, j) || relation.values(i, j) == 0.0)
					continue;
				++ties;
				if (relation.one_mode() && relation.values(j, i) != 0.0 && relation.defined(j, i))
					++reciprocated;
			}
		s.average_in_degree = s.cols == 0 ? 0.0 : static_cast<double>(ties) / static_cast<double>(s.cols);
		if (relation.one_mode() && ties > 0)
			s.reciprocity = static_cast<double>(reciprocated) / static_cast<double>(ties);
		out.push_back(std::move(s));
	}
	return out;
}

namespace {

std::vector<int> balanced_labels(std::size_t n, int m) {
	std::vector<int> labels(n);
	for (std::size_t i = 0; i < n; ++i)
		labels[i] = static_cast<int>(i * static_cast<std::size_t>(m) / n);
	return labels;
}

} // namespace

std::pair<MultilevelNetwork, MultiPartition> generate_planted(const PlantedSpec& spec) {
	const auto levels_n = spec.level_sizes.size();
	if (levels_n == 0 || spec.cluster_counts.size() != levels_n)
		throw ValidationError("planted: one cluster count per level required");
	if (!(spec.within_density >= 0.0 && spec.within_density <= 1.0 && spec.between_density >= 0.0 &&
	      spec.between_density <= 1.0))
		throw ValidationError("planted: densities must lie in [0, 1]");
	for (std::size_t l = 0; l < levels_n; ++l) {
		if (spec.cluster_counts[l] < 1)
			throw ValidationError("planted: level " + std::to_string(l) + " has zero clusters");
		if (static_cast<std::size_t>(spec.cluster_counts[l]) > spec.level_sizes[l])
			throw ValidationError("planted: more clusters than units on level " + std::to_string(l));
	}

	Rng rng(spec.seed);
	std::vector<Level> levels;
	std::vector<std::vector<int>> labels;
	for (std::size_t l = 0; l < levels_n; ++l) {
		Level level;
		level.name = "L" + std::to_string(l + 1);
		for (std::size_t i = 0; i < spec.level_sizes[l]; ++i)
			level.unit_names.push_back(level.name + "_" + std::to_string(i + 1));
		levels.push_back(std::move(level));
		labels.push_back(balanced_labels(spec.level_sizes[l], spec.cluster_counts[l]));
	}

	std::vector<Relation> relations;
	for (std::size_t l = 0; l < levels_n; ++l) {
		const auto n = spec.level_sizes[l];
		Relation r;
		r.name = "level" + std::to_string(l + 1);
		r.from_level = r.to_level = l;
		r.values = Matrix(n, n);
		for (std::size_t i = 0; i < n; ++i)
			for (std::size_t j = 0; j < n; ++j) {
				if (i == j)
					continue;
				const double p = labels[l][i] == labels[l][j] ? spec.within_density : spec.between_density;
				r.values(i, j) = rng.bernoulli(p) ? 1.0 : 0.0;
			}
		relations.push_back(std::move(r));
	}
	for (std::size_t l = 0; l + 1 < levels_n; ++l) {
		const auto lower_n = spec.level_sizes[l];
		const auto upper_n = spec.level_sizes[l + 1];
		const int upper_m = spec.cluster_counts[l + 1];
		std::vector<std::vector<std::size_t>> upper_members(static_cast<std::size_t>(upper_m));
		for (std::size_t a = 0; a < upper_n; ++a)
			upper_members[static_cast<std::size_t>(labels[l + 1][a])].push_back(a);
		Relation r;
		r.name = "member" + std::to_string(l + 1) + std::to_string(l + 2);
		r.from_level = l;
		r.to_level = l + 1;
		r.values = Matrix(lower_n, upper_n);
		for (std::size_t i = 0; i < lower_n; ++i) {
			std::size_t target;
			if (spec.membership == Alignment::aligned) {
				const auto& pool = upper_members[static_cast<std::size_t>(labels[l][i] % upper_m)];
				target = pool[rng.below(pool.size())];
			} else {
				target = rng.below(upper_n);
			}
			r.values(i, target) = 1.0;
		}
		relations.push_back(std::move(r));
	}

	MultiPartition planted;
	planted.labels = std::move(labels);
	planted.cluster_counts = spec.cluster_counts;
	return {build_network(std::move(levels), std::move(relations)), std::move(planted)};
}

} // namespace mlbm
