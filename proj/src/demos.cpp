#include "ssf/demos.hpp"

#include <cmath>
#include <limits>

#include "ssf/errors.hpp"
#include "ssf/gateway.hpp"

namespace ssf {

void DemoPool::validate() const {
    std::vector<std::string> v;
    if (!(lambda_mmr >= 0.0 && lambda_mmr <= 1.0)) v.push_back("lambda_mmr must be in [0, 1]");
    for (const auto& c : candidates) {
        if (c.embedding.size() != candidates.front().embedding.size() || c.embedding.empty()) {
            v.push_back("candidate " + c.id + " has embedding dimension " + std::to_string(c.embedding.size()));
            continue;
        }
        double sq = 0.0;
        for (double x : c.embedding) sq += x * x;
        if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) v.push_back("candidate " + c.id + " embedding is not normalized");
    }
    if (!v.empty()) throw ValidationError("invalid demo pool for " + dimension + ": " + v.front(), v);
}

Tranches tranche_sizes(std::size_t k) {
    const std::size_t quarter = k / 4;
    return {quarter, k - 2 * quarter, quarter};
}

std::vector<std::size_t> sample_demos(const DemoPool& pool, std::span<const double> query, std::size_t k, Rng& rng) {
    pool.validate();
    const std::size_t n = pool.candidates.size();
    if (k > n) {
        throw ValidationError("demo pool for " + pool.dimension + " has " + std::to_string(n) +
                              " candidates, fewer than k=" + std::to_string(k));
    }
    std::vector<double> relevance(n);
    for (std::size_t i = 0; i < n; ++i) relevance[i] = cosine(pool.candidates[i].embedding, query);

    const auto sizes = tranche_sizes(k);
    std::vector<std::size_t> chosen;
    std::vector<bool> taken(n, false);

    // random tranche: partial Fisher-Yates over the index list
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = 0; i < sizes.random; ++i) {
        std::swap(order[i], order[i + rng.index(n - i)]);
        chosen.push_back(order[i]);
        taken[order[i]] = true;
    }

    // redundancy[i] = max similarity of i to anything chosen so far
    std::vector<double> redundancy(n, -std::numeric_limits<double>::infinity());
    auto note_chosen = [&](std::size_t c) {
        for (std::size_t i = 0; i < n; ++i) {
            redundancy[i] = std::max(redundancy[i], cosine(pool.candidates[i].embedding, pool.candidates[c].embedding));
        }
    };
    for (auto c : chosen) note_chosen(c);

    const double lambda = pool.lambda_mmr;
    for (std::size_t step = 0; step < sizes.mmr; ++step) {
        std::size_t best = n;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            double penalty = chosen.empty() ? 0.0 : redundancy[i];
            double score = lambda * relevance[i] - (1.0 - lambda) * penalty;
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        chosen.push_back(best);
        taken[best] = true;
        note_chosen(best);
    }

    for (std::size_t step = 0; step < sizes.similarity; ++step) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i] && (best == n || relevance[i] > relevance[best])) best = i;
        }
        chosen.push_back(best);
        taken[best] = true;
    }
    return chosen;
}

std::vector<DemoCandidate> read_demo_pool(const std::filesystem::path& path) {
    std::vector<DemoCandidate> out;
    for (const auto& row : read_jsonl(path)) {
        DemoCandidate c;
        c.id = row.at("id").get<std::string>();
        c.dimension = row.value("dimension", "");
        c.text = row.at("text").get<std::string>();
        c.labels = row.at("labels").get<std::set<std::string>>();
        if (row.contains("embedding")) c.embedding = row["embedding"].get<std::vector<double>>();
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace ssf
