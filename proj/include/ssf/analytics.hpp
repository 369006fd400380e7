#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ssf/frames.hpp"
#include "ssf/taxonomy.hpp"

namespace ssf {

struct LabelDistribution {
    std::string dimension;
    std::string community;
    /// Registry order; size is the dimension's support S_j.
    std::vector<std::string> labels;
    std::vector<std::size_t> counts;
    std::size_t total = 0;
    std::size_t inferences = 0;

    bool defined() const noexcept { return total > 0; }
    /// Normalized counts; throws if the distribution is undefined.
    std::vector<double> probabilities() const;
};

/// Counts each label once per standard inference. `community` restricts the
/// input to stories whose community (via `story_community`) matches.
LabelDistribution sublabel_distribution(const std::vector<LabelAssignment>& assignments, const Dimension& dim,
                                        const std::map<std::string, std::string>& story_community,
                                        const std::optional<std::string>& community = std::nullopt);

struct EntropyValue {
    double value = 0.0;
    bool degenerate = false;
};

/// Base-2 Shannon entropy over log2 of the support size.
EntropyValue normalized_entropy(const std::vector<double>& p);

struct GroupEntropy {
    double value = 0.0;
    std::size_t dimensions = 0;
};

/// Mean normalized entropy over the group's dimensions with defined
/// distributions.
GroupEntropy group_entropy(const std::map<std::string, LabelDistribution>& distributions,
                           const TaxonomyRegistry& registry, DimensionGroup group);

/// NPMI of probabilities; nullopt when a marginal is zero.
std::optional<double> npmi_value(double pxy, double px, double py);

struct NpmiMatrix {
    std::string row_dimension;
    std::string col_dimension;
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    std::vector<std::vector<std::optional<double>>> values;
    std::size_t stories = 0;
};

/// Story-level co-occurrence: story s exhibits label x if any of its
/// standard inferences for the row dimension carries x. Only stories with
/// assignments in both dimensions count.
NpmiMatrix npmi(const std::vector<LabelAssignment>& assignments, const Dimension& row_dim, const Dimension& col_dim);

struct CommunityProfile {
    std::string community;
    std::size_t stories = 0;
    /// h_{c,j}; absent when the community has no inferences for j.
    std::map<std::string, std::vector<double>> pooled;
    std::map<std::string, LabelDistribution> distributions;
};

/// Slot embeddings for one inference, already normalized.
struct EmbeddedInference {
    std::string story_id;
    std::string dimension;
    std::vector<std::vector<double>> slot_embeddings;
};

/// h_{i,j} is the mean over the story's inferences of each inference's mean
/// slot embedding; h_{c,j} is the mean of h_{i,j} over the community's stories.
CommunityProfile build_profile(const std::string& community, const std::vector<EmbeddedInference>& inferences,
                               const std::vector<LabelAssignment>& assignments,
                               const std::map<std::string, std::string>& story_community,
                               const TaxonomyRegistry& registry);

struct SimValue {
    double value = 0.0;
    std::size_t dimensions = 0;
    /// Some dimension lacked data on one side and was left out of the mean.
    bool partial = false;
};

SimValue ssf_sim_gen(const CommunityProfile& a, const CommunityProfile& b);

enum class JsMode { distance, divergence };

/// Base-2 Jensen-Shannon divergence, in [0, 1].
double js_divergence(const std::vector<double>& p, const std::vector<double>& q);
double js_distance(const std::vector<double>& p, const std::vector<double>& q);

SimValue ssf_sim_class(const CommunityProfile& a, const CommunityProfile& b, JsMode mode = JsMode::distance);

struct PairScore {
    std::string a;
    std::string b;
    double gen = 0.0;
    double cls = 0.0;
};

struct RankedPair {
    std::string a;
    std::string b;
    double gen_score = 0.0;
    double class_score = 0.0;
    double gen_rank = 0.0;
    double class_rank = 0.0;
    double composite = 0.0;
};

struct SimilarityRanking {
    double lambda_rank = 0.667;
    std::vector<RankedPair> pairs;
};

/// Rank 1 = highest score; tied scores share the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& scores);

/// Sorted by composite ascending, ties broken by pair name.
SimilarityRanking composite_ranking(const std::vector<PairScore>& pairs, double lambda_rank = 0.667);

struct Hypothesis {
    std::string name;
    /// Set expected to be closer to the reference.
    std::string better;
    std::string worse;
};

struct ComparisonResult {
    std::string name;
    std::size_t pairs = 0;
    double mean_better = 0.0;
    double mean_worse = 0.0;
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
    double p_holm = 1.0;
    double cohens_d = 0.0;

    json to_json() const;
};

using EmbeddingSet = std::map<std::string, std::vector<double>>;

/// Paired by id against `reference`; each hypothesis is a one-sided paired
/// t-test on cosine similarities, Holm-adjusted across the family.
std::vector<ComparisonResult> compare_inference_sets(const std::map<std::string, EmbeddingSet>& sets,
                                                     const EmbeddingSet& reference,
                                                     const std::vector<Hypothesis>& hypotheses);

}  // namespace ssf
