#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ssf/frames.hpp"

namespace ssf {

enum class Rating { very_unlikely, somewhat_unlikely, somewhat_likely, very_likely };

std::string to_string(Rating r);
Rating rating_from_string(const std::string& s);

struct RatingRecord {
    std::string annotator_id;
    std::string story_id;
    std::string dimension;
    Variant variant = Variant::standard;
    Rating rating = Rating::very_unlikely;
    std::string inference_ref;
};

/// Columns: annotator_id, story_id, dimension, variant, rating, and an
/// optional inference_ref.
std::vector<RatingRecord> read_ratings_csv(const std::filesystem::path& path);

struct DiscardedGroup {
    std::string annotator_id;
    std::string story_id;
    std::size_t ratings = 0;
};

struct QualityFilterResult {
    std::vector<RatingRecord> kept;
    std::vector<DiscardedGroup> discarded;
    std::size_t discarded_ratings = 0;
    std::vector<std::string> warnings;
};

/// Drops every standard rating of an (annotator, story) group in which a
/// known-implausible inference was rated somewhat or very likely.
/// Known-implausible rows never appear in `kept`.
QualityFilterResult quality_filter(const std::vector<RatingRecord>& ratings, std::size_t dimensions_per_story = 10);

/// |a ∩ b| / |a ∪ b|, with two empty sets counting as full agreement.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

struct LabelScore {
    std::string label;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct F1Report {
    double micro = 0.0;
    double macro = 0.0;
    std::vector<LabelScore> per_label;
};

/// Items are keyed by inference id. Gold items without a prediction count as
/// empty predictions; a prediction for an id missing from gold is an error.
F1Report multilabel_f1(const std::map<std::string, std::set<std::string>>& predictions,
                       const std::map<std::string, std::set<std::string>>& gold);

struct PlausibilityRate {
    std::string dimension;
    std::size_t ratings = 0;
    /// Share rated anything but very_unlikely.
    double plausible = 0.0;
    /// Share rated somewhat_likely or very_likely.
    double likely = 0.0;
};

std::vector<PlausibilityRate> plausibility_summary(const std::vector<RatingRecord>& kept);

}  // namespace ssf
