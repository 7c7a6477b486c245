// Command-line front end: one analysis per invocation.
//
// Exit codes: 0 success, 2 validation/specification error, 3 capacity error,
// 4 I/O error.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mlbm/analysis.hpp"
#include "mlbm/compare.hpp"
#include "mlbm/errors.hpp"
#include "mlbm/io.hpp"
#include "mlbm/reshape.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Overrides {
	std::string config;
	std::optional<std::uint64_t> seed;
	std::optional<int> restarts;
	std::string clusters;
	std::string out;
	std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Overrides& o) {
	cmd->add_option("--config", o.config, "Analysis config (JSON)")->required();
	cmd->add_option("--seed", o.seed, "Random seed");
	cmd->add_option("--restarts", o.restarts, "Number of random starts");
	cmd->add_option("--clusters", o.clusters, "Cluster counts, e.g. L1=4,L2=2-5");
	cmd->add_option("--out", o.out, "Output directory");
	cmd->add_option("--threads", o.threads, "Worker threads (default: MLBM_THREADS or all cores)");
}

mlbm::AnalysisConfig configure(const Overrides& o) {
	auto config = mlbm::load_config(o.config);
	if (o.seed)
		mlbm::override_seed(config, *o.seed);
	if (o.restarts)
		mlbm::override_restarts(config, *o.restarts);
	if (!o.clusters.empty())
		mlbm::override_clusters(config, o.clusters);
	if (!o.out.empty())
		mlbm::override_out(config, o.out);
	if (o.threads)
		mlbm::override_threads(config, *o.threads);
	return config;
}

// Raw config JSON plus the directory relative paths resolve against.
std::pair<json, fs::path> read_json(const std::string& path) {
	std::ifstream in(path);
	if (!in)
		throw mlbm::IoError("cannot read " + path);
	json j;
	try {
		in >> j;
	} catch (const json::exception& e) {
		throw mlbm::ValidationError(path + ": " + e.what());
	}
	return {j, fs::path(path).parent_path()};
}

fs::path resolve(const fs::path& base, const std::string& p) {
	return fs::path(p).is_absolute() ? fs::path(p) : base / p;
}

void emit(const mlbm::AnalysisOutput& output, const std::optional<fs::path>& out) {
	if (out) {
		output.write(*out);
		std::cout << "wrote " << (*out / "result.json").string() << '\n';
	} else {
		std::cout << output.document.dump(2) << '\n';
	}
}

std::optional<fs::path> out_dir(const Overrides& o, const json& j, const fs::path& base) {
	if (!o.out.empty())
		return fs::path(o.out);
	if (j.contains("out"))
		return resolve(base, j.at("out").get<std::string>());
	return std::nullopt;
}

mlbm::AnalysisOutput run_compare(const Overrides& o) {
	const auto [j, base] = read_json(o.config);
	const auto network = mlbm::load_network(resolve(base, j.at("network").get<std::string>()));
	mlbm::AnalysisOutput output;
	auto& doc = output.document;
	doc["network"] = mlbm::summary_json(network);

	// Partitions grouped by level for the ARI grids.
	std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::vector<int>>>> by_level;
	std::map<std::string, std::pair<std::size_t, std::vector<int>>> named;
	for (const auto& p : j.value("partitions", json::array())) {
		const auto level = network.level_id(p.at("level").get<std::string>());
		const auto labels = mlbm::read_labels_csv(resolve(base, p.at("file").get<std::string>()), network.level(level));
		const auto name = p.at("name").get<std::string>();
		by_level[network.level(level).name].first.push_back(name);
		by_level[network.level(level).name].second.push_back(labels);
		named[name] = {level, labels};
	}
	doc["ari"] = json::object();
	doc["rand"] = json::object();
	for (const auto& [level, grid] : by_level) {
		json ari = json::array(), rand = json::array();
		for (const auto& p : grid.second) {
			json ar = json::array(), rr = json::array();
			for (const auto& q : grid.second) {
				try {
					ar.push_back(mlbm::adjusted_rand(p, q));
				} catch (const mlbm::DegenerateError&) {
					ar.push_back(nullptr);
				}
				rr.push_back(mlbm::rand_index(p, q));
			}
			ari.push_back(ar);
			rand.push_back(rr);
		}
		doc["ari"][level] = {{"names", grid.first}, {"values", ari}};
		doc["rand"][level] = {{"names", grid.first}, {"values", rand}};
	}
	doc["relation_pairs"] = json::array();
	for (const auto& pair : j.value("relation_pairs", json::array())) {
		const auto& a = network.relation(network.relation_id(pair.at(0).get<std::string>()));
		const auto& b = network.relation(network.relation_id(pair.at(1).get<std::string>()));
		const auto overlap = mlbm::tie_overlap(a, b);
		const auto v = mlbm::cramers_v(a, b);
		doc["relation_pairs"].push_back({{"a", a.name},
		                                 {"b", b.name},
		                                 {"overlap", overlap ? json(*overlap) : json(nullptr)},
		                                 {"cramers_v", v ? json(*v) : json(nullptr)}});
	}
	doc["forced"] = json::array();
	for (const auto& f : j.value("forced", json::array())) {
		const auto rel = network.relation_id(f.at("relation").get<std::string>());
		const auto& relation = network.relation(rel);
		if (!relation.one_mode())
			throw mlbm::SpecError("forced fits are evaluated on one-mode relations");
		const auto& [level, labels] = named.at(f.at("partition").get<std::string>());
		if (level != relation.from_level)
			throw mlbm::SpecError("partition '" + f.at("partition").get<std::string>() + "' is not on the level of '" +
			                      relation.name + "'");
		mlbm::Relation r = relation;
		r.from_level = r.to_level = 0;
		const auto sub = mlbm::build_network({network.level(level)}, {r});
		const auto partition = mlbm::make_partition(sub, {labels});
		const auto recipe = mlbm::parse_model_recipe(f.value("model", json{{"type", "cohesive"}, {"m_pre", "2xdensity"}}));
		const auto model = recipe.build(sub.relation(0), partition.cluster_counts[0], partition.cluster_counts[0]);
		const auto fit = mlbm::forced_fit(sub, 0, partition, model);
		const auto family = recipe.build(sub.relation(0), 1, 1).collapsed();
		doc["forced"].push_back({{"partition", f.at("partition")},
		                         {"relation", relation.name},
		                         {"criterion", fit.criterion},
		                         {"max_error", mlbm::max_error(sub, 0, family.allowed(0, 0))},
		                         {"image", mlbm::to_json(fit.image)}});
	}
	return output;
}

mlbm::AnalysisOutput run_reshape(const Overrides& o) {
	const auto [j, base] = read_json(o.config);
	const auto network = mlbm::load_network(resolve(base, j.at("network").get<std::string>()));
	const auto main = network.level_id(j.at("main_level").get<std::string>());
	const bool comembership = j.value("include_comembership", true);
	const auto aggregate_name = j.value("aggregate", std::string("max"));
	static const std::map<std::string, mlbm::Aggregate> aggregates{{"max", mlbm::Aggregate::max},
	                                                               {"min", mlbm::Aggregate::min},
	                                                               {"average", mlbm::Aggregate::average},
	                                                               {"sum", mlbm::Aggregate::sum}};
	auto agg = aggregates.find(aggregate_name);
	if (agg == aggregates.end())
		throw mlbm::ValidationError("unknown aggregate '" + aggregate_name + "'");
	const auto joint = mlbm::build_multirelational(network, main, comembership);
	const auto extended = mlbm::build_extended(network, main, agg->second, comembership);
	const auto single = mlbm::single_relation_network(network, main, extended);

	mlbm::AnalysisOutput output;
	auto& doc = output.document;
	const auto overlap = mlbm::tie_overlap(joint.relation(0), joint.relation(1));
	const auto v = mlbm::cramers_v(joint.relation(0), joint.relation(1));
	doc["main_level"] = network.level(main).name;
	doc["overlap"] = overlap ? json(*overlap) : json(nullptr);
	doc["cramers_v"] = v ? json(*v) : json(nullptr);
	doc["multirelational"] = mlbm::summary_json(joint);
	doc["extended"] = mlbm::summary_json(single);
	output.artifacts.push_back([joint, extended](const fs::path& dir) {
		const auto& units = joint.level(0).unit_names;
		mlbm::write_matrix_csv(dir / "institutional.csv", {units, units, joint.relation(1).values});
		mlbm::write_matrix_csv(dir / "extended.csv", {units, units, extended.values});
	});
	return output;
}

mlbm::AnalysisOutput run_weights(const Overrides& o) {
	auto config = configure(o);
	const auto network = mlbm::load_network(config.base_dir / config.network);
	std::vector<int> counts;
	for (const auto& level : network.levels()) {
		auto it = config.clusters.find(level.name);
		counts.push_back(it == config.clusters.end() ? 1 : it->second.from);
	}
	const auto eq = mlbm::build_equivalences(config, network, counts);
	const auto automatic = mlbm::compute_weights(network, eq);
	mlbm::AnalysisOutput output;
	auto& doc = output.document;
	const auto single = mlbm::single_cluster_partition(network);
	for (const auto& r : network.relations()) {
		doc["one_cluster_error"][r.name] = mlbm::relation_raw(network, r.id, single, eq[r.id].collapsed());
		doc["auto"][r.name] = automatic[r.id];
	}
	const auto scaled = mlbm::apply_scales(automatic, config.weights.scale, network);
	for (const auto& r : network.relations())
		doc["scaled"][r.name] = scaled[r.id];
	if (config.two_stage_scale) {
		const auto second = mlbm::apply_scales(scaled, *config.two_stage_scale, network);
		for (const auto& r : network.relations())
			doc["second_stage"][r.name] = second[r.id];
	}
	return output;
}

int exit_code(const std::exception& e) {
	if (dynamic_cast<const mlbm::CapacityError*>(&e))
		return 3;
	if (dynamic_cast<const mlbm::IoError*>(&e))
		return 4;
	if (dynamic_cast<const mlbm::Error*>(&e) || dynamic_cast<const json::exception*>(&e))
		return 2;
	return 1;
}

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"Generalized blockmodeling of multilevel networks"};
	app.require_subcommand(1);

	Overrides separate, convert, multilevel, compare, reshape, weights, stats;
	auto* cmd_separate = app.add_subcommand("separate", "Blockmodel each level on its own and compare across levels");
	add_common(cmd_separate, separate);
	auto* cmd_convert = app.add_subcommand("convert", "Convert to one level (extended or multi-relational) and blockmodel");
	add_common(cmd_convert, convert);
	auto* cmd_multilevel = app.add_subcommand("multilevel", "Blockmodel all levels and two-mode ties jointly");
	add_common(cmd_multilevel, multilevel);
	auto* cmd_compare = app.add_subcommand("compare", "ARI grids, tie overlap, Cramer's V and forced fits");
	add_common(cmd_compare, compare);
	auto* cmd_reshape = app.add_subcommand("reshape", "Write reshaped and extended relations for the main level");
	add_common(cmd_reshape, reshape);
	auto* cmd_weights = app.add_subcommand("weights", "Relation weights from one-cluster inconsistencies");
	add_common(cmd_weights, weights);
	auto* cmd_stats = app.add_subcommand("stats", "Descriptive statistics per relation");
	add_common(cmd_stats, stats);

	CLI11_PARSE(app, argc, argv);

	try {
		if (cmd_separate->parsed() || cmd_convert->parsed() || cmd_multilevel->parsed()) {
			const auto& o = cmd_separate->parsed() ? separate : cmd_convert->parsed() ? convert : multilevel;
			auto config = configure(o);
			if (cmd_separate->parsed())
				config.approach = mlbm::Approach::separate;
			else if (cmd_multilevel->parsed())
				config.approach = mlbm::Approach::multilevel;
			else if (config.approach != mlbm::Approach::convert_single && config.approach != mlbm::Approach::convert_multi)
				config.approach = mlbm::Approach::convert_multi;
			if (config.approach != mlbm::Approach::separate && config.approach != mlbm::Approach::multilevel &&
			    !config.main_level)
				throw mlbm::ValidationError("conversion needs main_level");
			const auto network = mlbm::load_network(config.base_dir / config.network);
			emit(mlbm::run_analysis(config, network), config.out);
		} else if (cmd_compare->parsed()) {
			const auto [j, base] = read_json(compare.config);
			emit(run_compare(compare), out_dir(compare, j, base));
		} else if (cmd_reshape->parsed()) {
			const auto [j, base] = read_json(reshape.config);
			emit(run_reshape(reshape), out_dir(reshape, j, base));
		} else if (cmd_weights->parsed()) {
			const auto [j, base] = read_json(weights.config);
			emit(run_weights(weights), out_dir(weights, j, base));
		} else if (cmd_stats->parsed()) {
			const auto [j, base] = read_json(stats.config);
			const auto network = mlbm::load_network(resolve(base, j.at("network").get<std::string>()));
			mlbm::AnalysisOutput output;
			output.document = mlbm::summary_json(network);
			emit(output, out_dir(stats, j, base));
		}
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << '\n';
		return exit_code(e);
	}
	return 0;
}
