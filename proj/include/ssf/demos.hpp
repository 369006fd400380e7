#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ssf/io.hpp"

namespace ssf {

struct DemoCandidate {
    std::string id;
    std::string dimension;
    std::string text;
    std::set<std::string> labels;
    std::vector<double> embedding;
};

struct DemoPool {
    std::string dimension;
    std::vector<DemoCandidate> candidates;
    double lambda_mmr = 0.5;

    /// Embeddings share one dimension and have unit norm (1e-6).
    void validate() const;
};

struct Tranches {
    std::size_t random = 0;
    std::size_t mmr = 0;
    std::size_t similarity = 0;
};

/// floor(k/4) random, floor(k/4) by similarity, the rest by MMR.
Tranches tranche_sizes(std::size_t k);

/// Indices of k distinct candidates in selection order: a random tranche,
/// then greedy MMR against everything chosen so far, then the most similar
/// remaining candidates. Ties go to the lower index.
std::vector<std::size_t> sample_demos(const DemoPool& pool, std::span<const double> query, std::size_t k, Rng& rng);

std::vector<DemoCandidate> read_demo_pool(const std::filesystem::path& path);

}  // namespace ssf
