#pragma once

#include <vector>

#include "mlbm/network.hpp"

namespace mlbm {

struct ReshapeOptions {
	// Count co-membership in the same upper unit as a tie (upper + identity).
	bool include_comembership = false;
	bool binarize = false;
	// Tie iff value >= threshold when binarizing.
	double threshold = 1.0;
	bool zero_diagonal = true;
};

// Indirect lower-level ties through the upper level:
// membership * (upper [+ I]) * membership'. `membership` is lower x upper,
// `upper` is one-mode on the upper level. The result is one-mode on the
// membership's row level and is named "<upper>_reshaped".
Relation reshape_down(const Relation& membership, const Relation& upper, const ReshapeOptions& options = {});

enum class TieRule { majority, new_class_per_combination, error_on_tie };

// Lower-level labels read off the classes of each unit's upper units.
// `membership` is lower x upper; a unit with a single distinct upper class
// takes it. Otherwise:
//  - majority: most frequent class among the unit's memberships, ties to the
//    lowest class index;
//  - error_on_tie: as majority, but a tie throws TieError;
//  - new_class_per_combination: each distinct sorted multiset of classes
//    gets a fresh label after the existing ones, numbered in sorted multiset
//    order.
// Throws MembershipError for a unit without memberships.
std::vector<int> expand_partition(const std::vector<int>& upper_labels, const Relation& membership,
                                  const std::vector<std::string>& lower_names, TieRule rule = TieRule::majority);

enum class Aggregate { max, min, average, sum };

struct ConversionInputs {
	std::size_t original = 0;  // one-mode on the main level
	std::size_t membership = 0;  // two-mode between main and other level
	std::size_t other = 0;  // one-mode on the other level
	bool membership_transposed = false;  // stored as other x main
};

// Locates the relations the conversion builders need. Throws SpecError.
ConversionInputs find_conversion_inputs(const MultilevelNetwork& network, std::size_t main_level);

// Reshaped ("institutional") relation on the main level. Binary inputs are
// binarized after reshaping.
Relation institutional_relation(const MultilevelNetwork& network, std::size_t main_level,
                                bool include_comembership = true);

// Cell-wise aggregate of the main level's original relation and its
// institutional relation.
Relation build_extended(const MultilevelNetwork& network, std::size_t main_level, Aggregate aggregate,
                        bool include_comembership = true);

// One-level network over the main level's units with two relations,
// "original" and "institutional", for joint analysis.
MultilevelNetwork build_multirelational(const MultilevelNetwork& network, std::size_t main_level,
                                        bool include_comembership = true);

// One-level network holding a single relation on the main level.
MultilevelNetwork single_relation_network(const MultilevelNetwork& network, std::size_t main_level, Relation relation);

bool is_binary(const Relation& relation);

} // namespace mlbm
