#include "ssf/validation.hpp"

#include <algorithm>
#include <array>

#include <spdlog/spdlog.h>

#include "ssf/errors.hpp"

namespace ssf {

std::string to_string(Rating r) {
    switch (r) {
        case Rating::very_unlikely: return "very_unlikely";
        case Rating::somewhat_unlikely: return "somewhat_unlikely";
        case Rating::somewhat_likely: return "somewhat_likely";
        case Rating::very_likely: return "very_likely";
    }
    return "";
}

Rating rating_from_string(const std::string& s) {
    for (auto r : {Rating::very_unlikely, Rating::somewhat_unlikely, Rating::somewhat_likely, Rating::very_likely}) {
        if (to_string(r) == s) return r;
    }
    throw ValidationError("rating must be one of very_unlikely, somewhat_unlikely, somewhat_likely, very_likely; got " +
                          s);
}

std::vector<RatingRecord> read_ratings_csv(const std::filesystem::path& path) {
    auto table = read_csv(path);
    std::vector<std::string> missing;
    for (const char* col : {"annotator_id", "story_id", "dimension", "variant", "rating"}) {
        if (!table.column(col)) missing.push_back(col);
    }
    if (!missing.empty()) throw ValidationError("ratings file " + path.string() + " lacks columns", missing);
    const auto ann = *table.column("annotator_id"), story = *table.column("story_id"),
               dim = *table.column("dimension"), var = *table.column("variant"), rat = *table.column("rating");
    const auto ref = table.column("inference_ref");
    std::vector<RatingRecord> out;
    for (const auto& row : table.rows) {
        RatingRecord r;
        r.annotator_id = row.at(ann);
        r.story_id = row.at(story);
        r.dimension = row.at(dim);
        r.variant = variant_from_string(row.at(var));
        r.rating = rating_from_string(row.at(rat));
        if (ref) r.inference_ref = row.at(*ref);
        out.push_back(std::move(r));
    }
    return out;
}

QualityFilterResult quality_filter(const std::vector<RatingRecord>& ratings, std::size_t dimensions_per_story) {
    using Group = std::pair<std::string, std::string>;
    std::map<Group, bool> failed;
    std::map<Group, std::set<std::string>> dims;
    for (const auto& r : ratings) {
        Group g{r.annotator_id, r.story_id};
        auto& f = failed[g];
        if (r.variant == Variant::known_implausible) {
            f = f || r.rating == Rating::somewhat_likely || r.rating == Rating::very_likely;
        } else {
            dims[g].insert(r.dimension);
        }
    }
    QualityFilterResult out;
    for (const auto& [g, f] : failed) {
        const auto n = dims[g].size();
        if (n != dimensions_per_story) {
            out.warnings.push_back("annotator " + g.first + " story " + g.second + " rated " + std::to_string(n) +
                                   " of " + std::to_string(dimensions_per_story) + " dimensions");
            spdlog::warn("{}", out.warnings.back());
        }
    }
    std::map<Group, std::size_t> dropped;
    for (const auto& r : ratings) {
        if (r.variant == Variant::known_implausible) continue;
        Group g{r.annotator_id, r.story_id};
        if (failed[g]) {
            ++dropped[g];
            ++out.discarded_ratings;
        } else {
            out.kept.push_back(r);
        }
    }
    for (const auto& [g, n] : dropped) out.discarded.push_back({g.first, g.second, n});
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.contains(x);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

F1Report multilabel_f1(const std::map<std::string, std::set<std::string>>& predictions,
                       const std::map<std::string, std::set<std::string>>& gold) {
    std::vector<std::string> unknown;
    for (const auto& [id, labels] : predictions) {
        if (!gold.contains(id)) unknown.push_back(id);
    }
    if (!unknown.empty()) throw ValidationError("predictions for unknown inference ids", unknown);

    static const std::set<std::string> none;
    std::map<std::string, LabelScore> scores;
    for (const auto& [id, g] : gold) {
        auto it = predictions.find(id);
        const auto& p = it == predictions.end() ? none : it->second;
        for (const auto& l : g) {
            auto& s = scores[l];
            if (p.contains(l)) ++s.tp;
            else ++s.fn;
        }
        for (const auto& l : p) {
            if (!g.contains(l)) ++scores[l].fp;
        }
    }
    F1Report out;
    std::size_t tp = 0, fp = 0, fn = 0;
    double macro_sum = 0.0;
    for (auto& [label, s] : scores) {
        s.label = label;
        s.precision = s.tp + s.fp ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp) : 0.0;
        s.recall = s.tp + s.fn ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn) : 0.0;
        s.f1 = static_cast<double>(2 * s.tp) / static_cast<double>(2 * s.tp + s.fp + s.fn);
        macro_sum += s.f1;
        tp += s.tp;
        fp += s.fp;
        fn += s.fn;
        out.per_label.push_back(s);
    }
    out.micro = tp + fp + fn ? static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn) : 1.0;
    out.macro = scores.empty() ? 1.0 : macro_sum / static_cast<double>(scores.size());
    return out;
}

std::vector<PlausibilityRate> plausibility_summary(const std::vector<RatingRecord>& kept) {
    std::map<std::string, std::array<std::size_t, 3>> tally;  // total, plausible, likely
    for (const auto& r : kept) {
        if (r.variant != Variant::standard) continue;
        auto& t = tally[r.dimension];
        ++t[0];
        t[1] += r.rating != Rating::very_unlikely;
        t[2] += r.rating == Rating::somewhat_likely || r.rating == Rating::very_likely;
    }
    std::vector<PlausibilityRate> out;
    for (const auto& [dim, t] : tally) {
        out.push_back({dim, t[0], static_cast<double>(t[1]) / static_cast<double>(t[0]),
                       static_cast<double>(t[2]) / static_cast<double>(t[0])});
    }
    return out;
}

}  // namespace ssf
