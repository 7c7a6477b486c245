#include "mlbm/analysis.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>

#include "mlbm/compare.hpp"
#include "mlbm/errors.hpp"
#include "mlbm/io.hpp"

namespace mlbm {

namespace fs = std::filesystem;
using nlohmann::json;

double MPre::resolve(const Relation& relation) const {
	double v = value;
	if (source == Source::density) {
		v = value * density(relation);
	} else if (source == Source::mean) {
		const auto cells = relation.defined_cell_count();
		double sum = 0.0;
		for (std::size_t i = 0; i < relation.values.rows(); ++i)
			for (std::size_t j = 0; j < relation.values.cols(); ++j)
				if (relation.defined(i, j))
					sum += relation.values(i, j);
		v = cells == 0 ? 0.0 : value * sum / static_cast<double>(cells);
	}
	if (round_up_2dp)
		v = std::ceil(v * 100.0 - 1e-9) / 100.0;
	return v;
}

PrespecifiedModel ModelRecipe::build(const Relation& relation, int rows, int cols) const {
	const double m = m_pre.resolve(relation);
	const BlockType complete = pinned ? BlockType::complete_pinned(m) : BlockType::complete(m);
	switch (kind) {
	case Kind::cohesive: {
		if (rows != cols)
			throw SpecError("cohesive model for '" + relation.name + "' needs equal row and column clusters");
		std::vector<std::vector<BlockType>> cells;
		for (int r = 0; r < rows; ++r)
			for (int c = 0; c < cols; ++c)
				cells.push_back({r == c ? complete : BlockType::null_block()});
		return PrespecifiedModel(rows, cols, std::move(cells));
	}
	case Kind::one_to_one: {
		std::vector<std::vector<BlockType>> cells;
		for (int r = 0; r < rows; ++r)
			for (int c = 0; c < cols; ++c)
				cells.push_back({r % cols == c ? complete : BlockType::null_block()});
		return PrespecifiedModel(rows, cols, std::move(cells));
	}
	case Kind::free:
		return uniform_prespec(rows, cols, {BlockType::null_block(), complete});
	case Kind::grid:
		if (!grid || grid->rows() != rows || grid->cols() != cols)
			throw SpecError("grid model for '" + relation.name + "' does not match " + std::to_string(rows) + "x" +
			                std::to_string(cols) + " clusters");
		return *grid;
	}
	throw SpecError("unknown model kind");
}

namespace {

MPre parse_m_pre(const json& j) {
	MPre m;
	if (j.is_number()) {
		m.value = j.get<double>();
		return m;
	}
	if (!j.is_string())
		throw ValidationError("m_pre must be a number or a shorthand like \"2xdensity\"");
	static const std::regex shorthand(R"(^\s*([0-9]*\.?[0-9]+)?\s*[x\*]?\s*(density|mean)\s*$)");
	std::smatch match;
	const auto s = j.get<std::string>();
	if (!std::regex_match(s, match, shorthand))
		throw ValidationError("cannot parse m_pre '" + s + "'");
	m.value = match[1].matched ? std::stod(match[1].str()) : 1.0;
	m.source = match[2].str() == "density" ? MPre::Source::density : MPre::Source::mean;
	return m;
}

std::vector<BlockType> parse_cell(const json& cell) {
	if (!cell.is_array() || cell.empty())
		throw ValidationError("grid cell must be a non-empty list such as [\"null\"] or [\"complete\", 0.12]");
	std::vector<BlockType> types;
	for (std::size_t i = 0; i < cell.size(); ++i) {
		const auto name = cell[i].get<std::string>();
		double param = 0.0;
		const bool has_param = i + 1 < cell.size() && cell[i + 1].is_number();
		if (has_param)
			param = cell[i + 1].get<double>();
		if (name == "null")
			types.push_back(BlockType::null_block());
		else if (name == "dnc" || name == "do_not_care")
			types.push_back(BlockType::do_not_care());
		else if (name == "complete")
			types.push_back(BlockType::complete(param));
		else if (name == "complete_pinned")
			types.push_back(BlockType::complete_pinned(param));
		else
			throw ValidationError("unknown block type '" + name + "'");
		if (has_param)
			++i;
	}
	return types;
}

} // namespace

ModelRecipe parse_model_recipe(const json& j) {
	ModelRecipe r;
	const auto type = j.value("type", std::string("cohesive"));
	if (type == "cohesive")
		r.kind = ModelRecipe::Kind::cohesive;
	else if (type == "one_to_one")
		r.kind = ModelRecipe::Kind::one_to_one;
	else if (type == "free")
		r.kind = ModelRecipe::Kind::free;
	else if (type == "grid")
		r.kind = ModelRecipe::Kind::grid;
	else
		throw ValidationError("unknown model type '" + type + "'");
	if (j.contains("m_pre"))
		r.m_pre = parse_m_pre(j.at("m_pre"));
	r.m_pre.round_up_2dp = j.value("round_up_2dp", false);
	r.pinned = j.value("pinned", false);
	if (r.kind == ModelRecipe::Kind::grid) {
		const auto& rows = j.at("cells");
		std::vector<std::vector<BlockType>> cells;
		const int n_rows = static_cast<int>(rows.size());
		const int n_cols = n_rows == 0 ? 0 : static_cast<int>(rows[0].size());
		for (const auto& row : rows) {
			if (static_cast<int>(row.size()) != n_cols)
				throw ValidationError("ragged model grid");
			for (const auto& cell : row)
				cells.push_back(parse_cell(cell));
		}
		r.grid = PrespecifiedModel(n_rows, n_cols, std::move(cells));
	}
	return r;
}

namespace {

ClusterRange parse_range(const json& j) {
	if (j.is_number_integer())
		return {j.get<int>(), j.get<int>()};
	if (j.is_array() && j.size() == 2)
		return {j[0].get<int>(), j[1].get<int>()};
	throw ValidationError("cluster counts must be an integer or [from, to]");
}

json range_json(const ClusterRange& r) {
	return r.from == r.to ? json(r.from) : json::array({r.from, r.to});
}

} // namespace

AnalysisConfig parse_config(const json& j, const fs::path& base_dir) {
	AnalysisConfig c;
	try {
		c.source = j;
		c.base_dir = base_dir;
		c.network = j.at("network").get<std::string>();
		const auto approach = j.value("approach", std::string("multilevel"));
		if (approach == "separate")
			c.approach = Approach::separate;
		else if (approach == "convert_single")
			c.approach = Approach::convert_single;
		else if (approach == "convert_multi")
			c.approach = Approach::convert_multi;
		else if (approach == "multilevel")
			c.approach = Approach::multilevel;
		else
			throw ValidationError("unknown approach '" + approach + "'");
		if (j.contains("main_level"))
			c.main_level = j.at("main_level").get<std::string>();
		const auto aggregate = j.value("aggregate", std::string("max"));
		if (aggregate == "max")
			c.aggregate = Aggregate::max;
		else if (aggregate == "min")
			c.aggregate = Aggregate::min;
		else if (aggregate == "average")
			c.aggregate = Aggregate::average;
		else if (aggregate == "sum")
			c.aggregate = Aggregate::sum;
		else
			throw ValidationError("unknown aggregate '" + aggregate + "'");
		c.include_comembership = j.value("include_comembership", true);
		const json clusters = j.value("clusters", json::object());
		for (const auto& [level, value] : clusters.items()) {
			const auto range = parse_range(value);
			if (range.from < 1 || range.to < range.from)
				throw ValidationError("bad cluster range for level '" + level + "'");
			c.clusters[level] = range;
		}
		const json models = j.value("models", json::object());
		for (const auto& [relation, value] : models.items())
			c.models[relation] = parse_model_recipe(value);
		if (j.contains("default_model")) {
			const auto& d = j.at("default_model");
			if (d.contains("one_mode"))
				c.default_one_mode = parse_model_recipe(d.at("one_mode"));
			if (d.contains("two_mode"))
				c.default_two_mode = parse_model_recipe(d.at("two_mode"));
		}
		const auto w = j.value("weights", json::object());
		const auto mode = w.value("mode", std::string("auto"));
		if (mode == "auto")
			c.weights.mode = WeightPlan::Mode::automatic;
		else if (mode == "explicit")
			c.weights.mode = WeightPlan::Mode::explicit_values;
		else if (mode == "equal")
			c.weights.mode = WeightPlan::Mode::equal;
		else
			throw ValidationError("unknown weight mode '" + mode + "'");
		c.weights.values = w.value("values", std::map<std::string, double>{});
		c.weights.scale = w.value("scale", std::map<std::string, double>{});
		const auto s = j.value("search", json::object());
		c.search.restarts = s.value("restarts", 100);
		c.search.seed = s.value("seed", std::uint64_t{1});
		if (s.contains("max_iterations") && !s.at("max_iterations").is_null())
			c.search.max_iterations = s.at("max_iterations").get<std::size_t>();
		const auto hood = s.value("neighborhood", std::string("both"));
		if (hood == "both")
			c.search.neighborhood = Neighborhood::both;
		else if (hood == "moves")
			c.search.neighborhood = Neighborhood::moves;
		else if (hood == "exchanges")
			c.search.neighborhood = Neighborhood::exchanges;
		else
			throw ValidationError("unknown neighborhood '" + hood + "'");
		c.search.threads = s.value("threads", 0u);
		c.exhaustive = s.value("exhaustive", false);
		c.enumeration_cap = s.value("enumeration_cap", default_enumeration_cap);
		if (c.search.restarts < 1)
			throw ValidationError("search.restarts must be >= 1");
		if (j.contains("two_stage"))
			c.two_stage_scale = j.at("two_stage").value("scale", std::map<std::string, double>{});
		const auto tie = j.value("tie_rule", std::string("majority"));
		if (tie == "majority")
			c.tie_rule = TieRule::majority;
		else if (tie == "new_class")
			c.tie_rule = TieRule::new_class_per_combination;
		else if (tie == "error")
			c.tie_rule = TieRule::error_on_tie;
		else
			throw ValidationError("unknown tie_rule '" + tie + "'");
		for (const auto& [level, path] : j.value("attributes", std::map<std::string, std::string>{}))
			c.attributes[level] = fs::path(path).is_absolute() ? fs::path(path) : base_dir / path;
		c.ordered_matrices = j.value("ordered_matrices", true);
		if (j.contains("out"))
			c.out = base_dir / j.at("out").get<std::string>();
		if ((c.approach == Approach::convert_single || c.approach == Approach::convert_multi) && !c.main_level)
			throw ValidationError("conversion approaches need main_level");
	} catch (const json::exception& e) {
		throw ValidationError(std::string("config: ") + e.what());
	}
	// Neither the worker count nor the output location affects results.
	if (c.source.contains("search"))
		c.source["search"].erase("threads");
	c.source.erase("out");
	return c;
}

AnalysisConfig load_config(const fs::path& path) {
	std::ifstream in(path);
	if (!in)
		throw IoError("cannot read " + path.string());
	json j;
	try {
		in >> j;
	} catch (const json::exception& e) {
		throw ValidationError(path.string() + ": " + e.what());
	}
	return parse_config(j, path.parent_path());
}

void override_seed(AnalysisConfig& config, std::uint64_t seed) {
	config.search.seed = seed;
	config.source["search"]["seed"] = seed;
}

void override_restarts(AnalysisConfig& config, int restarts) {
	if (restarts < 1)
		throw ValidationError("restarts must be >= 1");
	config.search.restarts = restarts;
	config.source["search"]["restarts"] = restarts;
}

void override_clusters(AnalysisConfig& config, const std::string& spec) {
	static const std::regex item(R"(^\s*([^=,]+?)\s*=\s*(\d+)\s*(?:-\s*(\d+))?\s*$)");
	std::size_t start = 0;
	while (start <= spec.size()) {
		const auto end = std::min(spec.find(',', start), spec.size());
		const auto part = spec.substr(start, end - start);
		std::smatch m;
		if (!std::regex_match(part, m, item))
			throw ValidationError("cannot parse cluster override '" + part + "' (expected level=count or level=a-b)");
		ClusterRange r{std::stoi(m[2].str()), m[3].matched ? std::stoi(m[3].str()) : std::stoi(m[2].str())};
		if (r.from < 1 || r.to < r.from)
			throw ValidationError("bad cluster range in '" + part + "'");
		config.clusters[m[1].str()] = r;
		config.source["clusters"][m[1].str()] = range_json(r);
		start = end + 1;
	}
}

void override_out(AnalysisConfig& config, const fs::path& out) { config.out = out; }

void override_threads(AnalysisConfig& config, unsigned threads) { config.search.threads = threads; }

EquivalenceSpec build_equivalences(const AnalysisConfig& config, const MultilevelNetwork& network,
                                   const std::vector<int>& cluster_counts) {
	ModelRecipe one_mode;
	one_mode.kind = ModelRecipe::Kind::cohesive;
	one_mode.m_pre = {MPre::Source::density, 2.0, false};
	ModelRecipe two_mode;
	two_mode.kind = ModelRecipe::Kind::free;
	two_mode.m_pre = {MPre::Source::density, 2.0, true};
	EquivalenceSpec eq;
	for (const auto& r : network.relations()) {
		const ModelRecipe* recipe = nullptr;
		if (auto it = config.models.find(r.name); it != config.models.end())
			recipe = &it->second;
		else if (r.one_mode())
			recipe = config.default_one_mode ? &*config.default_one_mode : &one_mode;
		else
			recipe = config.default_two_mode ? &*config.default_two_mode : &two_mode;
		eq.push_back(recipe->build(r, cluster_counts.at(r.from_level), cluster_counts.at(r.to_level)));
	}
	return eq;
}

WeightVector apply_scales(const WeightVector& weights, const std::map<std::string, double>& scales,
                          const MultilevelNetwork& network) {
	WeightVector w = weights;
	for (const auto& [name, factor] : scales)
		w = scale_weight(w, network.relation_id(name), factor);
	return w;
}

WeightVector build_weights(const WeightPlan& plan, const MultilevelNetwork& network, const EquivalenceSpec& equivalences) {
	WeightVector w;
	switch (plan.mode) {
	case WeightPlan::Mode::automatic:
		w = compute_weights(network, equivalences);
		break;
	case WeightPlan::Mode::equal:
		w = unit_weights(network.relation_count());
		break;
	case WeightPlan::Mode::explicit_values:
		for (const auto& r : network.relations()) {
			auto it = plan.values.find(r.name);
			if (it == plan.values.end())
				throw ValidationError("explicit weights miss relation '" + r.name + "'");
			w.values.push_back(it->second);
		}
		for (const auto& [name, value] : plan.values)
			network.relation_id(name);
		break;
	}
	w = apply_scales(w, plan.scale, network);
	w.validate();
	return w;
}

void AnalysisOutput::write(const fs::path& dir) const {
	std::error_code ec;
	fs::create_directories(dir, ec);
	if (ec)
		throw IoError("cannot create " + dir.string() + ": " + ec.message());
	write_text(dir / "result.json", document.dump(2) + "\n");
	for (const auto& artifact : artifacts)
		artifact(dir);
}

json to_json(const CriterionBreakdown& breakdown, const MultilevelNetwork& network) {
	json j;
	j["total"] = breakdown.total;
	j["relations"] = json::object();
	for (std::size_t k = 0; k < breakdown.per_relation.size(); ++k) {
		const auto& t = breakdown.per_relation[k];
		j["relations"][network.relation(k).name] = {{"raw", t.raw}, {"weight", t.weight}, {"weighted", t.weighted}};
	}
	j["blocks"] = json::array();
	for (const auto& b : breakdown.per_block)
		j["blocks"].push_back({{"relation", network.relation(b.relation).name},
		                       {"row", b.row + 1},
		                       {"col", b.col + 1},
		                       {"type", b.type.to_string()},
		                       {"inconsistency", b.inconsistency},
		                       {"cells", b.cells}});
	return j;
}

json to_json(const ImageMatrix& image) {
	json means = json::array(), cells = json::array(), types = json::array();
	for (int r = 0; r < image.rows; ++r) {
		json mr = json::array(), cr = json::array(), tr = json::array();
		for (int c = 0; c < image.cols; ++c) {
			const auto& cell = image.at(r, c);
			mr.push_back(cell.mean);
			cr.push_back(cell.cells);
			tr.push_back(cell.fitted ? json(cell.fitted->to_string()) : json(nullptr));
		}
		means.push_back(mr);
		cells.push_back(cr);
		types.push_back(tr);
	}
	return {{"means", means}, {"cells", cells}, {"types", types}};
}

json summary_json(const MultilevelNetwork& network) {
	json j;
	j["levels"] = json::array();
	for (const auto& level : network.levels())
		j["levels"].push_back({{"name", level.name}, {"units", level.unit_names}});
	j["relations"] = json::array();
	for (const auto& s : network_summary(network)) {
		const auto& r = network.relation(network.relation_id(s.name));
		j["relations"].push_back({{"name", s.name},
		                          {"from", network.level(r.from_level).name},
		                          {"to", network.level(r.to_level).name},
		                          {"rows", s.rows},
		                          {"cols", s.cols},
		                          {"density", s.density},
		                          {"average_in_degree", s.average_in_degree},
		                          {"reciprocity", s.reciprocity ? json(*s.reciprocity) : json(nullptr)}});
	}
	return j;
}

MultiPartition partition_from_json(const json& partitions, const MultilevelNetwork& network) {
	std::vector<std::vector<int>> labels;
	for (const auto& level : network.levels()) {
		std::vector<int> l;
		for (int c : partitions.at(level.name).get<std::vector<int>>())
			l.push_back(c - 1);
		labels.push_back(std::move(l));
	}
	return make_partition(network, std::move(labels));
}

namespace {

json weights_json(const WeightVector& w, const MultilevelNetwork& network) {
	json j = json::object();
	for (std::size_t k = 0; k < w.size(); ++k)
		j[network.relation(k).name] = w[k];
	return j;
}

json partitions_json(const MultiPartition& p, const MultilevelNetwork& network) {
	json j = json::object();
	for (const auto& level : network.levels()) {
		std::vector<int> labels;
		for (int c : p.labels[level.id])
			labels.push_back(c + 1);
		j[level.name] = labels;
	}
	return j;
}

json clusters_json(const std::vector<int>& counts, const MultilevelNetwork& network) {
	json j = json::object();
	for (const auto& level : network.levels())
		j[level.name] = counts[level.id];
	return j;
}

std::string run_tag(const std::vector<int>& counts, const MultilevelNetwork& network) {
	std::string tag;
	for (const auto& level : network.levels())
		tag += (tag.empty() ? "" : "_") + level.name + "-" + std::to_string(counts[level.id]);
	return tag;
}

// Stable relabeling onto 0..k-1 in order of first appearance of each label
// value (sorted by value, so existing order is kept).
std::vector<int> compact_labels(const std::vector<int>& labels, int& count) {
	std::set<int> distinct(labels.begin(), labels.end());
	std::vector<int> values(distinct.begin(), distinct.end());
	std::vector<int> out;
	for (int l : labels)
		out.push_back(static_cast<int>(std::lower_bound(values.begin(), values.end(), l) - values.begin()));
	count = static_cast<int>(values.size());
	return out;
}

// Full description of one partition: criterion, images, and artifacts.
json describe(const MultilevelNetwork& network, const MultiPartition& partition, const EquivalenceSpec& eq,
              const WeightVector& weights, const CriterionBreakdown& breakdown) {
	// The reported criterion must be reproducible from the reported partition.
	const auto check = total_criterion(network, partition, eq, weights);
	if (check.total != breakdown.total)
		throw std::logic_error("criterion of reported partition does not reproduce");
	json j;
	j["clusters"] = clusters_json(partition.cluster_counts, network);
	j["partitions"] = partitions_json(partition, network);
	j["criterion"] = to_json(breakdown, network);
	j["images"] = json::object();
	for (const auto& r : network.relations())
		j["images"][r.name] = to_json(image_matrix(network, r.id, partition, &eq[r.id]));
	return j;
}

// Restart search, or exhaustive enumeration when configured. The enumerated
// optimum is reported as a single restart.
SearchResult optimize(const AnalysisConfig& config, const MultilevelNetwork& network, const EquivalenceSpec& eq,
                      const WeightVector& w, const std::vector<int>& counts) {
	if (!config.exhaustive)
		return restart_search(network, eq, w, counts, config.search);
	auto ex = exhaustive_search(network, eq, w, counts, config.enumeration_cap);
	SearchResult r;
	r.best_partition = std::move(ex.partition);
	r.best_breakdown = std::move(ex.breakdown);
	r.per_restart.push_back({r.best_breakdown.total, 0});
	r.restarts_at_optimum = 1;
	r.enumerated = ex.enumerated;
	return r;
}

json search_json(const SearchResult& result) {
	if (result.enumerated)
		return {{"method", "exhaustive"}, {"enumerated", *result.enumerated}};
	return {{"restarts", result.per_restart.size()},
	        {"best_restart", result.best_restart},
	        {"restarts_at_optimum", result.restarts_at_optimum},
	        {"iterations", result.per_restart[result.best_restart].iterations}};
}

void add_partition_artifacts(AnalysisOutput& out, const AnalysisConfig& config, const MultilevelNetwork& network,
                             const MultiPartition& partition, const std::string& tag, json& run) {
	auto net = std::make_shared<MultilevelNetwork>(network);
	out.artifacts.push_back([net, partition, tag, ordered = config.ordered_matrices](const fs::path& dir) {
		for (const auto& level : net->levels())
			write_labels_csv(dir / (tag + "_" + level.name + "_partition.csv"), level.unit_names,
			                 partition.labels[level.id]);
		if (ordered)
			for (const auto& r : net->relations())
				emit_ordered_matrix(*net, r.id, partition, dir / (tag + "_" + r.name + "_ordered"));
	});
	for (const auto& [level_name, path] : config.attributes) {
		const auto level = network.find_level(level_name);
		if (!level)
			continue;
		const auto profile = attribute_profile(network.level(*level), partition.labels[*level],
		                                       partition.cluster_counts[*level], path);
		run["profiles"][level_name] = to_json(profile);
		out.artifacts.push_back([profile, file = tag + "_" + level_name + "_profile.csv"](const fs::path& dir) {
			write_attribute_profile(dir / file, profile);
		});
	}
}

std::vector<std::vector<int>> count_combinations(const AnalysisConfig& config, const MultilevelNetwork& network) {
	std::vector<ClusterRange> ranges;
	for (const auto& level : network.levels()) {
		auto it = config.clusters.find(level.name);
		if (it == config.clusters.end())
			throw SpecError("no cluster count for level '" + level.name + "'");
		ranges.push_back(it->second);
	}
	for (const auto& [name, range] : config.clusters)
		if (!network.find_level(name))
			throw SpecError("cluster count given for unknown level '" + name + "'");
	std::vector<std::vector<int>> combos{{}};
	for (const auto& r : ranges) {
		std::vector<std::vector<int>> next;
		for (const auto& prefix : combos)
			for (int m = r.from; m <= r.to; ++m) {
				auto c = prefix;
				c.push_back(m);
				next.push_back(std::move(c));
			}
		combos = std::move(next);
	}
	return combos;
}

json ari_grid(const std::vector<std::string>& names, const std::vector<std::vector<int>>& partitions) {
	json values = json::array();
	for (const auto& p : partitions) {
		json row = json::array();
		for (const auto& q : partitions) {
			try {
				row.push_back(adjusted_rand(p, q));
			} catch (const DegenerateError&) {
				row.push_back(nullptr);
			}
		}
		values.push_back(row);
	}
	return {{"names", names}, {"values", values}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

} // namespace

AnalysisOutput run_separate(const AnalysisConfig& config, const MultilevelNetwork& network) {
	AnalysisOutput out;
	json& doc = out.document;
	doc["approach"] = "separate";
	doc["config"] = config.source;
	doc["network"] = summary_json(network);
	doc["levels"] = json::object();

	struct LevelResult {
		std::size_t relation;
		MultilevelNetwork sub;
		std::optional<MultiPartition> best;  // when the count is fixed
	};
	std::map<std::size_t, LevelResult> analyzed;
	for (const auto& [name, range] : config.clusters) {
		const auto level = network.level_id(name);
		std::vector<std::size_t> candidates;
		for (const auto& r : network.relations())
			if (r.one_mode() && r.from_level == level)
				candidates.push_back(r.id);
		if (candidates.size() != 1)
			throw SpecError("separate analysis needs exactly one one-mode relation on level '" + name + "', found " +
			                std::to_string(candidates.size()));
		Relation rel = network.relation(candidates.front());
		rel.from_level = rel.to_level = 0;
		LevelResult lr{candidates.front(), build_network({network.level(level)}, {rel}), std::nullopt};

		json level_doc;
		level_doc["relation"] = network.relation(lr.relation).name;
		const auto family = build_equivalences(config, lr.sub, {1}).front().collapsed();
		level_doc["max_error"] = max_error(lr.sub, 0, family.allowed(0, 0));
		level_doc["sweep"] = json::array();
		level_doc["runs"] = json::array();
		for (int m = range.from; m <= range.to; ++m) {
			if (static_cast<std::size_t>(m) > lr.sub.level(0).size())
				throw ValidationError("level '" + name + "' has fewer than " + std::to_string(m) + " units");
			const auto eq = build_equivalences(config, lr.sub, {m});
			const auto w = unit_weights(1);
			const auto result = optimize(config, lr.sub, eq, w, {m});
			json run = describe(lr.sub, result.best_partition, eq, w, result.best_breakdown);
			run["search"] = search_json(result);
			add_partition_artifacts(out, config, lr.sub, result.best_partition, name + "-" + std::to_string(m), run);
			level_doc["sweep"].push_back({{"clusters", m}, {"criterion", result.best_breakdown.total}});
			level_doc["runs"].push_back(run);
			if (range.from == range.to)
				lr.best = result.best_partition;
		}
		doc["levels"][name] = level_doc;
		analyzed.emplace(level, std::move(lr));
	}

	// Cross-level comparison needs one chosen partition per level.
	json lifts = json::array();
	std::map<std::size_t, std::pair<std::vector<std::string>, std::vector<std::vector<int>>>> grids;
	for (const auto& [level, lr] : analyzed)
		if (lr.best)
			grids[level] = {{network.level(level).name}, {lr.best->labels[0]}};
	for (const auto& membership : network.relations()) {
		if (membership.one_mode())
			continue;
		auto lower = analyzed.find(membership.from_level);
		auto upper = analyzed.find(membership.to_level);
		if (lower == analyzed.end() || upper == analyzed.end() || !lower->second.best || !upper->second.best)
			continue;
		const auto& lower_level = network.level(membership.from_level);
		const auto lifted_raw = expand_partition(upper->second.best->labels[0], membership, lower_level.unit_names,
		                                         config.tie_rule);
		int lifted_m = 0;
		const auto lifted = compact_labels(lifted_raw, lifted_m);
		const auto& sub = lower->second.sub;
		MultiPartition forced{{lifted}, {lifted_m}};
		const auto eq = build_equivalences(config, sub, {lifted_m});
		const auto fit = forced_fit(sub, 0, forced, eq[0]);
		const auto family = build_equivalences(config, sub, {1}).front().collapsed();
		const double searched = relation_raw(sub, 0, *lower->second.best,
		                                     build_equivalences(config, sub, lower->second.best->cluster_counts)[0]);
		const auto name = network.level(membership.to_level).name + " lifted via " + membership.name;
		lifts.push_back({{"membership", membership.name},
		                 {"from_level", network.level(membership.to_level).name},
		                 {"to_level", lower_level.name},
		                 {"partition", [&] {
			                  std::vector<int> l;
			                  for (int c : lifted)
				                  l.push_back(c + 1);
			                  return l;
		                  }()},
		                 {"clusters", lifted_m},
		                 {"ari_vs_searched", [&]() -> json {
			                  try {
				                  return adjusted_rand(lifted, lower->second.best->labels[0]);
			                  } catch (const DegenerateError&) {
				                  return nullptr;
			                  }
		                  }()},
		                 {"forced_fit", {{"criterion", fit.criterion}, {"image", to_json(fit.image)}}},
		                 {"max_error", max_error(sub, 0, family.allowed(0, 0))},
		                 {"searched_criterion", searched}});
		grids[membership.from_level].first.push_back(name);
		grids[membership.from_level].second.push_back(lifted);
	}
	doc["comparisons"]["lifts"] = lifts;
	doc["comparisons"]["ari"] = json::object();
	for (const auto& [level, grid] : grids)
		if (grid.first.size() > 1)
			doc["comparisons"]["ari"][network.level(level).name] = ari_grid(grid.first, grid.second);
	return out;
}

AnalysisOutput run_conversion(const AnalysisConfig& config, const MultilevelNetwork& network) {
	AnalysisOutput out;
	json& doc = out.document;
	const bool multi = config.approach == Approach::convert_multi;
	doc["approach"] = multi ? "convert_multi" : "convert_single";
	doc["config"] = config.source;
	doc["network"] = summary_json(network);
	const auto main = network.level_id(*config.main_level);
	doc["main_level"] = *config.main_level;

	const auto joint = build_multirelational(network, main, config.include_comembership);
	doc["institutional"] = {{"overlap", optional_json(tie_overlap(joint.relation(0), joint.relation(1)))},
	                        {"cramers_v", optional_json(cramers_v(joint.relation(0), joint.relation(1)))}};
	const MultilevelNetwork derived =
		multi ? joint
		      : single_relation_network(network, main,
		                                build_extended(network, main, config.aggregate, config.include_comembership));
	doc["derived"] = summary_json(derived);

	auto it = config.clusters.find(*config.main_level);
	if (it == config.clusters.end())
		throw SpecError("no cluster count for main level '" + *config.main_level + "'");
	doc["sweep"] = json::array();
	doc["runs"] = json::array();
	for (int m = it->second.from; m <= it->second.to; ++m) {
		const auto eq = build_equivalences(config, derived, {m});
		const auto w = build_weights(config.weights, derived, eq);
		const auto result = optimize(config, derived, eq, w, {m});
		json run = describe(derived, result.best_partition, eq, w, result.best_breakdown);
		run["weights"] = weights_json(w, derived);
		run["search"] = search_json(result);
		add_partition_artifacts(out, config, derived, result.best_partition, run_tag({m}, derived), run);
		doc["sweep"].push_back({{"clusters", m}, {"criterion", result.best_breakdown.total}});
		doc["runs"].push_back(run);
	}
	out.artifacts.push_back([derived](const fs::path& dir) {
		for (const auto& r : derived.relations()) {
			const auto& units = derived.level(0).unit_names;
			write_matrix_csv(dir / ("derived_" + r.name + ".csv"), {units, units, r.values});
		}
	});
	return out;
}

namespace {

json linkage_json(const MultilevelNetwork& network, const ImageMatrix& image) {
	json rows = json::array();
	for (int r = 0; r < image.rows; ++r) {
		std::vector<int> linked;
		for (int c = 0; c < image.cols; ++c) {
			const auto& cell = image.at(r, c);
			if (cell.fitted && cell.fitted->kind == BlockKind::complete)
				linked.push_back(c + 1);
		}
		rows.push_back({{"row_cluster", r + 1}, {"col_clusters", linked}});
	}
	(void)network;
	return rows;
}

json cross_level_json(const MultilevelNetwork& network, const MultiPartition& partition, const EquivalenceSpec& eq,
                      TieRule rule) {
	json j = json::object();
	for (const auto& r : network.relations()) {
		if (r.one_mode())
			continue;
		const auto image = image_matrix(network, r.id, partition, &eq[r.id]);
		json entry;
		entry["linkage"] = linkage_json(network, image);
		try {
			const auto lifted = expand_partition(partition.labels[r.to_level], r,
			                                     network.level(r.from_level).unit_names, rule);
			entry["ari_lifted_vs_partition"] = adjusted_rand(lifted, partition.labels[r.from_level]);
		} catch (const Error& e) {
			entry["ari_lifted_vs_partition"] = nullptr;
			entry["ari_note"] = e.what();
		}
		j[r.name] = entry;
	}
	return j;
}

json undetermined_json(const MultilevelNetwork& network, const WeightVector& w) {
	json j = json::array();
	for (const auto& level : network.levels()) {
		bool used = false;
		for (auto k : network.relations_touching(level.id))
			used = used || w[k] > 0.0;
		if (!used)
			j.push_back(level.name);
	}
	return j;
}

} // namespace

AnalysisOutput run_multilevel(const AnalysisConfig& config, const MultilevelNetwork& network) {
	AnalysisOutput out;
	json& doc = out.document;
	doc["approach"] = "multilevel";
	doc["config"] = config.source;
	doc["network"] = summary_json(network);
	doc["sweep"] = json::array();
	doc["runs"] = json::array();
	for (const auto& counts : count_combinations(config, network)) {
		const auto eq = build_equivalences(config, network, counts);
		const auto w1 = build_weights(config.weights, network, eq);
		const auto result = optimize(config, network, eq, w1, counts);
		json run = describe(network, result.best_partition, eq, w1, result.best_breakdown);
		run["weights"] = weights_json(w1, network);
		run["search"] = search_json(result);
		run["cross_level"] = cross_level_json(network, result.best_partition, eq, config.tie_rule);
		run["undetermined_levels"] = undetermined_json(network, w1);
		json sweep{{"clusters", clusters_json(counts, network)}, {"criterion", result.best_breakdown.total}};
		const auto tag = run_tag(counts, network);
		if (config.two_stage_scale) {
			const auto w2 = apply_scales(w1, *config.two_stage_scale, network);
			const auto refined = refine(network, eq, w2, result.best_partition, config.search);
			json r2 = describe(network, refined.partition, eq, w2, refined.breakdown);
			r2["weights"] = weights_json(w2, network);
			r2["iterations"] = refined.iterations;
			r2["cross_level"] = cross_level_json(network, refined.partition, eq, config.tie_rule);
			r2["undetermined_levels"] = undetermined_json(network, w2);
			add_partition_artifacts(out, config, network, refined.partition, tag + "_refined", r2);
			run["refined"] = r2;
			sweep["refined_criterion"] = refined.breakdown.total;
		}
		add_partition_artifacts(out, config, network, result.best_partition, tag, run);
		doc["sweep"].push_back(sweep);
		doc["runs"].push_back(run);
	}
	return out;
}

AnalysisOutput run_analysis(const AnalysisConfig& config, const MultilevelNetwork& network) {
	const auto t0 = std::chrono::steady_clock::now();
	AnalysisOutput out;
	switch (config.approach) {
	case Approach::separate:
		out = run_separate(config, network);
		break;
	case Approach::convert_single:
	case Approach::convert_multi:
		out = run_conversion(config, network);
		break;
	case Approach::multilevel:
		out = run_multilevel(config, network);
		break;
	}
	out.document["seed"] = config.search.seed;
	out.document["wall_time_s"] =
		std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
	return out;
}

} // namespace mlbm
