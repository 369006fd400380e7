#include "ssf/curation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "ssf/errors.hpp"

namespace ssf {

namespace {

std::size_t utf8_length(const std::string& s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void CurationConfig::validate() const {
    std::vector<std::string> v;
    if (!in_unit(story_prob_threshold)) v.push_back("story_prob_threshold must be in [0,1]");
    if (!in_unit(toxicity_threshold)) v.push_back("toxicity_threshold must be in [0,1]");
    if (!in_unit(heldout_fraction)) v.push_back("heldout_fraction must be in [0,1]");
    if (train_ratio < 0 || val_ratio < 0 || test_ratio < 0) v.push_back("split ratios must be non-negative");
    if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9) v.push_back("split ratios must sum to 1");
    if (stratified_sample_size == 0) v.push_back("stratified_sample_size must be positive");
    if (!v.empty()) throw ValidationError("invalid curation config", v);
}

CurationConfig curation_config_from_json(const json& j) {
    CurationConfig c;
    c.min_chars = j.value("min_chars", c.min_chars);
    c.story_prob_threshold = j.value("story_prob_threshold", c.story_prob_threshold);
    c.toxicity_threshold = j.value("toxicity_threshold", c.toxicity_threshold);
    if (j.contains("excluded_communities")) {
        c.excluded_communities = j["excluded_communities"].get<std::set<std::string>>();
    }
    if (j.contains("split_ratios")) {
        auto r = j["split_ratios"].get<std::vector<double>>();
        if (r.size() != 3) throw ValidationError("split_ratios needs three entries (train, val, test)");
        c.train_ratio = r[0];
        c.val_ratio = r[1];
        c.test_ratio = r[2];
    }
    c.min_stories_per_community = j.value("min_stories_per_community", c.min_stories_per_community);
    c.heldout_community_count = j.value("heldout_community_count", c.heldout_community_count);
    c.heldout_fraction = j.value("heldout_fraction", c.heldout_fraction);
    c.stratified_sample_size = j.value("stratified_sample_size", c.stratified_sample_size);
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    c.validate();
    return c;
}

json to_json(const CurationConfig& c) {
    return json{{"min_chars", c.min_chars},
                {"story_prob_threshold", c.story_prob_threshold},
                {"toxicity_threshold", c.toxicity_threshold},
                {"excluded_communities", c.excluded_communities},
                {"split_ratios", {c.train_ratio, c.val_ratio, c.test_ratio}},
                {"min_stories_per_community", c.min_stories_per_community},
                {"heldout_community_count", c.heldout_community_count},
                {"heldout_fraction", c.heldout_fraction},
                {"stratified_sample_size", c.stratified_sample_size},
                {"rng_seed", c.rng_seed}};
}

std::string to_string(RejectReason r) {
    switch (r) {
        case RejectReason::too_short: return "too-short";
        case RejectReason::story_threshold: return "story-threshold";
        case RejectReason::toxicity: return "toxicity";
        case RejectReason::sexually_explicit: return "sexually-explicit";
        case RejectReason::excluded_community: return "excluded-community";
    }
    return "unknown";
}

std::map<RejectReason, std::size_t> FilterResult::counts() const {
    std::map<RejectReason, std::size_t> out;
    for (const auto& [id, reason] : rejected) ++out[reason];
    return out;
}

FilterResult apply_filters(const std::vector<ScoredText>& scored, const CurationConfig& cfg) {
    FilterResult result;
    for (const auto& s : scored) {
        if (!s.story_probability || !s.toxicity || !s.sexually_explicit) {
            throw ValidationError("candidate " + s.id + " is missing a score field");
        }
        if (!in_unit(*s.story_probability) || !in_unit(*s.toxicity) || !in_unit(*s.sexually_explicit)) {
            throw ValidationError("candidate " + s.id + " has a score outside [0,1]");
        }
        std::optional<RejectReason> reason;
        if (utf8_length(s.masked_text) < cfg.min_chars) {
            reason = RejectReason::too_short;
        } else if (*s.story_probability < cfg.story_prob_threshold) {
            reason = RejectReason::story_threshold;
        } else if (*s.toxicity >= cfg.toxicity_threshold) {
            reason = RejectReason::toxicity;
        } else if (*s.sexually_explicit >= cfg.toxicity_threshold) {
            reason = RejectReason::sexually_explicit;
        } else if (cfg.excluded_communities.contains(s.community)) {
            reason = RejectReason::excluded_community;
        }
        if (reason) {
            result.rejected.emplace(s.id, *reason);
        } else {
            result.kept.push_back(s.id);
        }
    }
    return result;
}

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "unknown";
}

std::vector<std::size_t> apportion(std::size_t n, const std::vector<double>& ratios) {
    std::vector<std::size_t> counts(ratios.size());
    std::vector<double> remainders(ratios.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        double exact = static_cast<double>(n) * ratios[i];
        // guard against 40.0000000001-style noise before flooring
        double fl = std::floor(exact + 1e-9);
        counts[i] = static_cast<std::size_t>(fl);
        // snap to a grid so equal shares tie exactly
        remainders[i] = std::round(std::max(0.0, exact - fl) * 1e9) / 1e9;
        assigned += counts[i];
    }
    std::vector<std::size_t> order(ratios.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % order.size()]];
    return counts;
}

namespace {

std::map<std::string, std::vector<std::string>> group_by_community(const std::vector<Story>& stories) {
    std::map<std::string, std::vector<std::string>> groups;
    std::set<std::string> seen;
    for (const auto& s : stories) {
        if (!seen.insert(s.id).second) throw ValidationError("duplicate story id: " + s.id);
        groups[s.community].push_back(s.id);
    }
    for (auto& [c, ids] : groups) std::sort(ids.begin(), ids.end());
    return groups;
}

struct HeldoutDivision {
    std::vector<bool> to_val;
    double frac_val = 0.0;
    double frac_test = 0.0;
};

double share(std::size_t heldout, std::size_t regular) {
    const auto total = heldout + regular;
    return total == 0 ? 0.0 : static_cast<double>(heldout) / static_cast<double>(total);
}

HeldoutDivision divide_heldout(const std::vector<std::size_t>& sizes, std::size_t val_regular,
                               std::size_t test_regular, double target) {
    const std::size_t h = sizes.size();
    HeldoutDivision best;
    double best_cost = std::numeric_limits<double>::infinity();
    auto evaluate = [&](const std::vector<bool>& to_val) {
        std::size_t hv = 0, ht = 0;
        for (std::size_t i = 0; i < h; ++i) (to_val[i] ? hv : ht) += sizes[i];
        double fv = share(hv, val_regular), ft = share(ht, test_regular);
        double cost = std::abs(fv - target) + std::abs(ft - target);
        if (cost < best_cost - 1e-15) {
            best_cost = cost;
            best = {to_val, fv, ft};
        }
    };
    if (h <= 16) {
        for (std::uint32_t mask = 0; mask < (1u << h); ++mask) {
            std::vector<bool> to_val(h);
            std::size_t nv = 0;
            for (std::size_t i = 0; i < h; ++i) nv += (to_val[i] = (mask >> i) & 1u);
            // both evaluation splits get unseen communities whenever possible
            if (h >= 2 && (nv == 0 || nv == h)) continue;
            evaluate(to_val);
        }
        return best;
    }
    // large h: largest community first, to whichever side is further below target
    std::vector<std::size_t> order(h);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return sizes[a] > sizes[b]; });
    std::vector<bool> to_val(h);
    std::size_t hv = 0, ht = 0;
    for (auto i : order) {
        bool val = share(hv, val_regular) <= share(ht, test_regular);
        to_val[i] = val;
        (val ? hv : ht) += sizes[i];
    }
    evaluate(to_val);
    return best;
}

}  // namespace

json SplitResult::report() const {
    std::map<std::string, std::size_t> counts;
    for (const auto& a : assignments) ++counts[to_string(a.split)];
    return json{{"split_counts", counts},
                {"heldout_val_communities", heldout_val_communities},
                {"heldout_test_communities", heldout_test_communities},
                {"excluded_communities", excluded_communities},
                {"achieved_heldout_fraction_val", achieved_heldout_fraction_val},
                {"achieved_heldout_fraction_test", achieved_heldout_fraction_test},
                {"heldout_val_test_disjoint_interpretation", true}};
}

SplitResult build_splits(const std::vector<Story>& stories, const CurationConfig& cfg) {
    cfg.validate();
    auto groups = group_by_community(stories);
    SplitResult result;
    std::vector<std::string> eligible;
    for (const auto& [c, ids] : groups) {
        if (ids.size() >= cfg.min_stories_per_community) {
            eligible.push_back(c);
        } else {
            result.excluded_communities.push_back(c);
        }
    }

    Rng rng(cfg.rng_seed);
    std::set<std::string> heldout;
    const bool reserve = cfg.heldout_fraction > 0.0 && cfg.heldout_community_count > 0;
    if (reserve) {
        if (eligible.size() < cfg.heldout_community_count) {
            throw ValidationError("only " + std::to_string(eligible.size()) +
                                  " eligible communities, need " +
                                  std::to_string(cfg.heldout_community_count) + " to hold out");
        }
        auto pool = eligible;
        rng.shuffle(pool);
        heldout.insert(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(cfg.heldout_community_count));
    }

    const std::vector<double> ratios{cfg.train_ratio, cfg.val_ratio, cfg.test_ratio};
    std::size_t val_regular = 0, test_regular = 0;
    std::vector<std::string> heldout_names;
    std::vector<std::size_t> heldout_sizes;
    for (const auto& c : eligible) {
        auto ids = groups[c];
        rng.shuffle(ids);
        if (heldout.contains(c)) {
            heldout_names.push_back(c);
            heldout_sizes.push_back(ids.size());
            continue;
        }
        auto n = apportion(ids.size(), ratios);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            Split s = i < n[0] ? Split::train : (i < n[0] + n[1] ? Split::val : Split::test);
            result.assignments.push_back({ids[i], c, s, false});
        }
        val_regular += n[1];
        test_regular += n[2];
    }

    if (!heldout_names.empty()) {
        auto division = divide_heldout(heldout_sizes, val_regular, test_regular, cfg.heldout_fraction);
        for (std::size_t i = 0; i < heldout_names.size(); ++i) {
            const auto& c = heldout_names[i];
            Split s = division.to_val[i] ? Split::val : Split::test;
            (division.to_val[i] ? result.heldout_val_communities : result.heldout_test_communities).push_back(c);
            for (const auto& id : groups[c]) result.assignments.push_back({id, c, s, true});
        }
        result.achieved_heldout_fraction_val = division.frac_val;
        result.achieved_heldout_fraction_test = division.frac_test;
    }

    std::sort(result.assignments.begin(), result.assignments.end(), [](const auto& a, const auto& b) {
        return std::tie(a.community, a.id) < std::tie(b.community, b.id);
    });
    return result;
}

StratifiedResult build_stratified(const std::vector<Story>& stories, const CurationConfig& cfg) {
    cfg.validate();
    auto groups = group_by_community(stories);
    StratifiedResult result;
    Rng rng(derive_seed(cfg.rng_seed, "stratified"));
    for (auto& [c, ids] : groups) {
        if (ids.size() < cfg.stratified_sample_size) {
            result.excluded_communities.push_back(c);
            continue;
        }
        rng.shuffle(ids);
        std::vector<std::string> picked(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(cfg.stratified_sample_size));
        std::sort(picked.begin(), picked.end());
        for (auto& id : picked) result.sample.push_back({std::move(id), c});
    }
    return result;
}

ScoredText scored_from_json(const json& row) {
    ScoredText s;
    if (!row.contains("id") || !row["id"].is_string()) throw ValidationError("score row without id");
    s.id = row["id"].get<std::string>();
    auto opt = [&](const char* key) -> std::optional<double> {
        if (!row.contains(key) || !row[key].is_number()) return std::nullopt;
        return row[key].get<double>();
    };
    s.story_probability = opt("story_probability");
    s.toxicity = opt("toxicity");
    s.sexually_explicit = opt("sexually_explicit");
    if (row.contains("masked_text") && row["masked_text"].is_string()) s.masked_text = row["masked_text"].get<std::string>();
    return s;
}

}  // namespace ssf
