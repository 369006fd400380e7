#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ssf/io.hpp"

namespace ssf {

struct CurationConfig {
    std::size_t min_chars = 175;
    double story_prob_threshold = 0.7;
    double toxicity_threshold = 0.5;
    std::set<std::string> excluded_communities;
    double train_ratio = 2.0 / 3.0;
    double val_ratio = 1.0 / 6.0;
    double test_ratio = 1.0 / 6.0;
    std::size_t min_stories_per_community = 45;
    std::size_t heldout_community_count = 5;
    double heldout_fraction = 0.10;
    std::size_t stratified_sample_size = 45;
    std::uint64_t rng_seed = 0;

    /// Throws ValidationError listing every violated constraint.
    void validate() const;
};

CurationConfig curation_config_from_json(const json& j);
json to_json(const CurationConfig& c);

/// Classifier outputs for one candidate. Missing scores are kept as nullopt
/// so the filter can name the offending id.
struct ScoredText {
    std::string id;
    std::string community;
    std::optional<double> story_probability;
    std::optional<double> toxicity;
    std::optional<double> sexually_explicit;
    std::string masked_text;
};

enum class RejectReason { too_short, story_threshold, toxicity, sexually_explicit, excluded_community };

std::string to_string(RejectReason r);

struct FilterResult {
    std::vector<std::string> kept;
    std::map<std::string, RejectReason> rejected;

    std::map<RejectReason, std::size_t> counts() const;
};

/// Gates are checked in a fixed order; the first failing gate is the reason.
FilterResult apply_filters(const std::vector<ScoredText>& scored, const CurationConfig& cfg);

struct Story {
    std::string id;
    std::string community;
};

enum class Split { train, val, test };

std::string to_string(Split s);

struct SplitAssignment {
    std::string id;
    std::string community;
    Split split;
    bool heldout = false;
};

struct SplitResult {
    /// Sorted by (community, id).
    std::vector<SplitAssignment> assignments;
    std::vector<std::string> heldout_val_communities;
    std::vector<std::string> heldout_test_communities;
    /// Communities below min_stories_per_community.
    std::vector<std::string> excluded_communities;
    double achieved_heldout_fraction_val = 0.0;
    double achieved_heldout_fraction_test = 0.0;

    json report() const;
};

SplitResult build_splits(const std::vector<Story>& stories, const CurationConfig& cfg);

struct StratifiedResult {
    std::vector<Story> sample;
    std::vector<std::string> excluded_communities;
};

StratifiedResult build_stratified(const std::vector<Story>& stories, const CurationConfig& cfg);

/// Largest-remainder apportionment of n items over the given ratios.
/// Ties in the remainder go to the earlier ratio.
std::vector<std::size_t> apportion(std::size_t n, const std::vector<double>& ratios);

ScoredText scored_from_json(const json& row);

}  // namespace ssf
