#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlbm/compare.hpp"
#include "mlbm/criteria.hpp"
#include "mlbm/reshape.hpp"
#include "mlbm/search.hpp"

namespace mlbm {

enum class Approach { separate, convert_single, convert_multi, multilevel };

// Pre-specified value for complete blocks: a constant, or a multiple of the
// relation's density or mean (the "2xdensity" shorthand).
struct MPre {
	enum class Source { fixed, density, mean };
	Source source = Source::fixed;
	double value = 0.0;  // constant, or the multiplier
	bool round_up_2dp = false;

	double resolve(const Relation& relation) const;
};

struct ModelRecipe {
	enum class Kind { cohesive, one_to_one, free, grid };
	Kind kind = Kind::cohesive;
	MPre m_pre;
	bool pinned = false;
	std::optional<PrespecifiedModel> grid;

	// Model for a relation split into rows x cols clusters.
	PrespecifiedModel build(const Relation& relation, int rows, int cols) const;
};

ModelRecipe parse_model_recipe(const nlohmann::json& j);

struct WeightPlan {
	enum class Mode { automatic, explicit_values, equal };
	Mode mode = Mode::automatic;
	std::map<std::string, double> values;
	std::map<std::string, double> scale;
};

struct ClusterRange {
	int from = 1;
	int to = 1;
};

struct AnalysisConfig {
	nlohmann::json source;  // effective config, echoed into the result
	std::filesystem::path base_dir;
	std::filesystem::path network;
	Approach approach = Approach::multilevel;
	std::optional<std::string> main_level;
	Aggregate aggregate = Aggregate::max;
	bool include_comembership = true;
	std::map<std::string, ClusterRange> clusters;
	std::map<std::string, ModelRecipe> models;
	std::optional<ModelRecipe> default_one_mode;
	std::optional<ModelRecipe> default_two_mode;
	WeightPlan weights;
	SearchConfig search;
	// Enumerate every feasible partition instead of restarting local search.
	bool exhaustive = false;
	std::uint64_t enumeration_cap = default_enumeration_cap;
	std::optional<std::map<std::string, double>> two_stage_scale;
	TieRule tie_rule = TieRule::majority;
	std::map<std::string, std::filesystem::path> attributes;
	bool ordered_matrices = true;
	std::optional<std::filesystem::path> out;
};

// Config document:
// {
//   "network": "net.json", "approach": "separate|convert_single|convert_multi|multilevel",
//   "main_level": "...", "aggregate": "max|min|average|sum", "include_comembership": true,
//   "clusters": {"<level>": 4 | [2, 8]},
//   "models": {"<relation>": {"type": "cohesive|one_to_one|free|grid", "m_pre": 0.12 | "2xdensity",
//                              "round_up_2dp": false, "pinned": false, "cells": [[[...]]]}},
//   "default_model": {"one_mode": {...}, "two_mode": {...}},
//   "weights": {"mode": "auto|explicit|equal", "values": {...}, "scale": {"<relation>": 2}},
//   "search": {"restarts": 1000, "seed": 1, "max_iterations": null, "neighborhood": "both", "threads": 0,
//              "exhaustive": false, "enumeration_cap": 10000000},
//   "two_stage": {"scale": {"<relation>": 10}},
//   "tie_rule": "majority|new_class|error",
//   "attributes": {"<level>": "attrs.csv"}, "ordered_matrices": true, "out": "results"
// }
// Throws ValidationError.
AnalysisConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
AnalysisConfig load_config(const std::filesystem::path& path);

// Command-line overrides; each also rewrites the echoed config.
void override_seed(AnalysisConfig& config, std::uint64_t seed);
void override_restarts(AnalysisConfig& config, int restarts);
void override_clusters(AnalysisConfig& config, const std::string& spec);  // "level=count,level=a-b"
void override_out(AnalysisConfig& config, const std::filesystem::path& out);
void override_threads(AnalysisConfig& config, unsigned threads);

// Models for every relation of `network` under per-level cluster counts.
EquivalenceSpec build_equivalences(const AnalysisConfig& config, const MultilevelNetwork& network,
                                   const std::vector<int>& cluster_counts);

// Weights per the plan; automatic weights come from compute_weights.
WeightVector build_weights(const WeightPlan& plan, const MultilevelNetwork& network, const EquivalenceSpec& equivalences);

WeightVector apply_scales(const WeightVector& weights, const std::map<std::string, double>& scales,
                          const MultilevelNetwork& network);

struct AnalysisOutput {
	nlohmann::json document;
	// Deferred file writes, run against the output directory.
	std::vector<std::function<void(const std::filesystem::path&)>> artifacts;

	void write(const std::filesystem::path& dir) const;
};

AnalysisOutput run_separate(const AnalysisConfig& config, const MultilevelNetwork& network);
AnalysisOutput run_conversion(const AnalysisConfig& config, const MultilevelNetwork& network);
AnalysisOutput run_multilevel(const AnalysisConfig& config, const MultilevelNetwork& network);
AnalysisOutput run_analysis(const AnalysisConfig& config, const MultilevelNetwork& network);

// Serialization helpers shared with the CLI.
nlohmann::json to_json(const CriterionBreakdown& breakdown, const MultilevelNetwork& network);
nlohmann::json to_json(const ImageMatrix& image);
nlohmann::json summary_json(const MultilevelNetwork& network);

// Reads a run's partitions ({"<level>": [1-based clusters]}) back into a
// MultiPartition for `network`.
MultiPartition partition_from_json(const nlohmann::json& partitions, const MultilevelNetwork& network);

} // namespace mlbm
