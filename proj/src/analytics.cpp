#include "ssf/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "ssf/errors.hpp"
#include "ssf/stats.hpp"

namespace ssf {

std::vector<double> LabelDistribution::probabilities() const {
    if (!defined()) throw ValidationError("distribution for " + dimension + " in " + community + " is empty");
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    return p;
}

LabelDistribution sublabel_distribution(const std::vector<LabelAssignment>& assignments, const Dimension& dim,
                                        const std::map<std::string, std::string>& story_community,
                                        const std::optional<std::string>& community) {
    LabelDistribution d;
    d.dimension = dim.id;
    d.community = community.value_or("*");
    d.labels = dim.label_ids();
    d.counts.assign(d.labels.size(), 0);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < d.labels.size(); ++i) index[d.labels[i]] = i;
    for (const auto& a : assignments) {
        if (a.dimension != dim.id || a.variant != Variant::standard) continue;
        if (community) {
            auto it = story_community.find(a.story_id);
            if (it == story_community.end() || it->second != *community) continue;
        }
        ++d.inferences;
        for (const auto& l : a.labels) {
            auto it = index.find(l);
            if (it == index.end()) throw ValidationError("label " + l + " is not defined for " + dim.id);
            ++d.counts[it->second];
            ++d.total;
        }
    }
    return d;
}

EntropyValue normalized_entropy(const std::vector<double>& p) {
    if (p.size() <= 1) return {0.0, true};
    double h = 0.0;
    for (double x : p) {
        if (x > 0.0) h -= x * std::log2(x);
    }
    return {h / std::log2(static_cast<double>(p.size())), false};
}

GroupEntropy group_entropy(const std::map<std::string, LabelDistribution>& distributions,
                           const TaxonomyRegistry& registry, DimensionGroup group) {
    GroupEntropy g;
    double sum = 0.0;
    for (const auto* dim : registry.group(group)) {
        auto it = distributions.find(dim->id);
        if (it == distributions.end() || !it->second.defined()) continue;
        sum += normalized_entropy(it->second.probabilities()).value;
        ++g.dimensions;
    }
    g.value = g.dimensions ? sum / static_cast<double>(g.dimensions) : std::numeric_limits<double>::quiet_NaN();
    return g;
}

std::optional<double> npmi_value(double pxy, double px, double py) {
    if (px <= 0.0 || py <= 0.0) return std::nullopt;
    if (pxy <= 0.0) return -1.0;
    if (pxy == px && pxy == py) return 1.0;
    return std::log(pxy / (px * py)) / -std::log(pxy);
}

NpmiMatrix npmi(const std::vector<LabelAssignment>& assignments, const Dimension& row_dim, const Dimension& col_dim) {
    std::map<std::string, std::set<std::string>> rows_by_story, cols_by_story;
    for (const auto& a : assignments) {
        if (a.variant != Variant::standard) continue;
        if (a.dimension == row_dim.id) rows_by_story[a.story_id].insert(a.labels.begin(), a.labels.end());
        if (a.dimension == col_dim.id) cols_by_story[a.story_id].insert(a.labels.begin(), a.labels.end());
    }
    NpmiMatrix m;
    m.row_dimension = row_dim.id;
    m.col_dimension = col_dim.id;
    m.rows = row_dim.label_ids();
    m.cols = col_dim.label_ids();
    std::vector<std::size_t> nx(m.rows.size(), 0), ny(m.cols.size(), 0);
    std::vector<std::vector<std::size_t>> nxy(m.rows.size(), std::vector<std::size_t>(m.cols.size(), 0));
    for (const auto& [story, xs] : rows_by_story) {
        auto it = cols_by_story.find(story);
        if (it == cols_by_story.end()) continue;
        ++m.stories;
        for (std::size_t i = 0; i < m.rows.size(); ++i) {
            const bool hx = xs.contains(m.rows[i]);
            if (hx) ++nx[i];
            for (std::size_t j = 0; j < m.cols.size(); ++j) {
                if (hx && it->second.contains(m.cols[j])) ++nxy[i][j];
            }
        }
        for (std::size_t j = 0; j < m.cols.size(); ++j) {
            if (it->second.contains(m.cols[j])) ++ny[j];
        }
    }
    const double n = static_cast<double>(m.stories);
    m.values.assign(m.rows.size(), std::vector<std::optional<double>>(m.cols.size()));
    if (m.stories == 0) return m;
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        for (std::size_t j = 0; j < m.cols.size(); ++j) {
            m.values[i][j] = npmi_value(static_cast<double>(nxy[i][j]) / n, static_cast<double>(nx[i]) / n,
                                        static_cast<double>(ny[j]) / n);
        }
    }
    return m;
}

namespace {

void add_into(std::vector<double>& acc, const std::vector<double>& v) {
    if (acc.empty()) acc.assign(v.size(), 0.0);
    if (acc.size() != v.size()) throw ValidationError("embedding dimension mismatch while pooling");
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
}

void scale(std::vector<double>& v, double by) {
    for (double& x : v) x /= by;
}

}  // namespace

CommunityProfile build_profile(const std::string& community, const std::vector<EmbeddedInference>& inferences,
                               const std::vector<LabelAssignment>& assignments,
                               const std::map<std::string, std::string>& story_community,
                               const TaxonomyRegistry& registry) {
    CommunityProfile p;
    p.community = community;
    // per (dimension, story): summed inference means and their count
    std::map<std::string, std::map<std::string, std::pair<std::vector<double>, std::size_t>>> per_story;
    std::set<std::string> stories;
    for (const auto& inf : inferences) {
        auto it = story_community.find(inf.story_id);
        if (it == story_community.end() || it->second != community) continue;
        if (inf.slot_embeddings.empty()) throw ValidationError("inference without slot embeddings: " + inf.story_id);
        std::vector<double> slot_mean;
        for (const auto& e : inf.slot_embeddings) {
            double sq = 0.0;
            for (double x : e) sq += x * x;
            if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) throw ValidationError("slot embedding is not normalized");
            add_into(slot_mean, e);
        }
        scale(slot_mean, static_cast<double>(inf.slot_embeddings.size()));
        auto& cell = per_story[inf.dimension][inf.story_id];
        add_into(cell.first, slot_mean);
        ++cell.second;
        stories.insert(inf.story_id);
    }
    p.stories = stories.size();
    for (auto& [dim, by_story] : per_story) {
        std::vector<double> pooled;
        for (auto& [story, cell] : by_story) {
            scale(cell.first, static_cast<double>(cell.second));
            add_into(pooled, cell.first);
        }
        scale(pooled, static_cast<double>(by_story.size()));
        p.pooled[dim] = std::move(pooled);
    }
    for (const auto& dim : registry.dimensions()) {
        p.distributions[dim.id] = sublabel_distribution(assignments, dim, story_community, community);
    }
    return p;
}

namespace {

bool nonzero(const std::vector<double>& v) {
    return std::any_of(v.begin(), v.end(), [](double x) { return x != 0.0; });
}

SimValue finish(double sum, std::size_t used) {
    SimValue s;
    s.dimensions = used;
    s.partial = used < TaxonomyRegistry::kDimensionCount;
    s.value = used ? sum / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
    return s;
}

}  // namespace

SimValue ssf_sim_gen(const CommunityProfile& a, const CommunityProfile& b) {
    double sum = 0.0;
    std::size_t used = 0;
    for (const auto& [dim, ha] : a.pooled) {
        auto it = b.pooled.find(dim);
        if (it == b.pooled.end() || !nonzero(ha) || !nonzero(it->second)) continue;
        sum += cosine(ha, it->second);
        ++used;
    }
    return finish(sum, used);
}

double js_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw ValidationError("distributions have different support");
    double kl_p = 0.0, kl_q = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = (p[i] + q[i]) / 2.0;
        if (p[i] > 0.0) kl_p += p[i] * std::log2(p[i] / m);
        if (q[i] > 0.0) kl_q += q[i] * std::log2(q[i] / m);
    }
    return std::clamp(0.5 * kl_p + 0.5 * kl_q, 0.0, 1.0);
}

double js_distance(const std::vector<double>& p, const std::vector<double>& q) {
    return std::sqrt(js_divergence(p, q));
}

SimValue ssf_sim_class(const CommunityProfile& a, const CommunityProfile& b, JsMode mode) {
    double sum = 0.0;
    std::size_t used = 0;
    for (const auto& [dim, da] : a.distributions) {
        auto it = b.distributions.find(dim);
        if (it == b.distributions.end() || !da.defined() || !it->second.defined()) continue;
        auto p = da.probabilities();
        auto q = it->second.probabilities();
        sum += 1.0 - (mode == JsMode::distance ? js_distance(p, q) : js_divergence(p, q));
        ++used;
    }
    return finish(sum, used);
}

std::vector<double> average_ranks(const std::vector<double>& scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });
    std::vector<double> ranks(scores.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

SimilarityRanking composite_ranking(const std::vector<PairScore>& pairs, double lambda_rank) {
    if (!(lambda_rank >= 0.0 && lambda_rank <= 1.0)) throw ValidationError("lambda_rank must be in [0, 1]");
    std::vector<double> gen, cls;
    for (const auto& p : pairs) {
        if (std::isnan(p.gen) || std::isnan(p.cls)) throw ValidationError("pair " + p.a + "/" + p.b + " has no score");
        gen.push_back(p.gen);
        cls.push_back(p.cls);
    }
    auto gr = average_ranks(gen);
    auto cr = average_ranks(cls);
    SimilarityRanking out;
    out.lambda_rank = lambda_rank;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        out.pairs.push_back({pairs[i].a, pairs[i].b, gen[i], cls[i], gr[i], cr[i],
                             lambda_rank * cr[i] + (1.0 - lambda_rank) * gr[i]});
    }
    std::stable_sort(out.pairs.begin(), out.pairs.end(), [](const RankedPair& x, const RankedPair& y) {
        return std::tie(x.composite, x.a, x.b) < std::tie(y.composite, y.a, y.b);
    });
    return out;
}

json ComparisonResult::to_json() const {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    return {{"name", name},       {"pairs", pairs}, {"mean_better", num(mean_better)}, {"mean_worse", num(mean_worse)},
            {"t", num(t)},        {"df", df},       {"p", num(p)},                     {"p_holm", num(p_holm)},
            {"cohens_d", num(cohens_d)}};
}

std::vector<ComparisonResult> compare_inference_sets(const std::map<std::string, EmbeddingSet>& sets,
                                                     const EmbeddingSet& reference,
                                                     const std::vector<Hypothesis>& hypotheses) {
    auto lookup = [&](const std::string& name) -> const EmbeddingSet& {
        auto it = sets.find(name);
        if (it == sets.end()) throw ValidationError("unknown inference set " + name);
        return it->second;
    };
    std::vector<ComparisonResult> out;
    for (const auto& h : hypotheses) {
        const auto& better = lookup(h.better);
        const auto& worse = lookup(h.worse);
        std::vector<std::string> unpaired;
        for (const auto& [id, v] : reference) {
            if (!better.contains(id) || !worse.contains(id)) unpaired.push_back(id);
        }
        for (const auto* s : {&better, &worse}) {
            for (const auto& [id, v] : *s) {
                if (!reference.contains(id)) unpaired.push_back(id);
            }
        }
        if (!unpaired.empty()) {
            std::sort(unpaired.begin(), unpaired.end());
            unpaired.erase(std::unique(unpaired.begin(), unpaired.end()), unpaired.end());
            std::string ids;
            for (const auto& id : unpaired) ids += (ids.empty() ? "" : ", ") + id;
            throw ValidationError("comparison " + h.name + " has unpaired items: " + ids, unpaired);
        }
        std::vector<double> sb, sw, diff;
        for (const auto& [id, ref] : reference) {
            sb.push_back(cosine(better.at(id), ref));
            sw.push_back(cosine(worse.at(id), ref));
            diff.push_back(sb.back() - sw.back());
        }
        auto t = paired_t_one_sided(diff);
        ComparisonResult r;
        r.name = h.name;
        r.pairs = diff.size();
        r.mean_better = mean(sb);
        r.mean_worse = mean(sw);
        r.t = t.t;
        r.df = t.df;
        r.p = t.p;
        r.cohens_d = cohens_d(sb, sw);
        out.push_back(r);
    }
    std::vector<double> ps;
    for (const auto& r : out) ps.push_back(r.p);
    auto adj = holm_adjust(ps);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].p_holm = adj[i];
    return out;
}

}  // namespace ssf
