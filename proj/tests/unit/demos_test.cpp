#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "ssf/demos.hpp"
#include "ssf/gateway.hpp"
#include "ssf/errors.hpp"
#include "support/oracles.hpp"

using namespace ssf;

namespace {

std::vector<double> unit_at(double degrees) {
    double r = degrees * M_PI / 180.0;
    return {std::cos(r), std::sin(r)};
}

DemoPool planar_pool(double lambda) {
    DemoPool pool;
    pool.dimension = "moral";
    pool.lambda_mmr = lambda;
    const double angles[] = {0, 15, 40, 80, 100, -20, -60, 170};
    for (int i = 0; i < 8; ++i) pool.candidates.push_back({"d" + std::to_string(i), "moral", "t", {}, unit_at(angles[i])});
    return pool;
}

std::vector<std::vector<double>> embeddings(const DemoPool& p) {
    std::vector<std::vector<double>> out;
    for (const auto& c : p.candidates) out.push_back(c.embedding);
    return out;
}

}  // namespace

TEST_CASE("tranche sizes") {
    auto t = tranche_sizes(30);
    CHECK(t.random == 7);
    CHECK(t.mmr == 16);
    CHECK(t.similarity == 7);
    auto s = tranche_sizes(3);
    CHECK(s.random == 0);
    CHECK(s.mmr == 3);
    CHECK(s.similarity == 0);
    auto e = tranche_sizes(10);
    CHECK(e.random + e.mmr + e.similarity == 10);
    CHECK(e.mmr == 6);
}

TEST_CASE("hand-traced greedy in the plane") {
    // query at 30 degrees, lambda 0.5, k=3 so every pick is MMR:
    // step 1 relevance only -> 40 deg (index 2); step 2 favors the far side
    // -> -60 deg (index 6); step 3 -> 0 deg (index 0) at score 0.05
    auto pool = planar_pool(0.5);
    Rng rng(1);
    CHECK(sample_demos(pool, unit_at(30), 3, rng) == std::vector<std::size_t>{2, 6, 0});
}

TEST_CASE("k=4 over 8 candidates matches the brute-force trace") {
    auto pool = planar_pool(0.5);
    auto q = unit_at(30);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        auto got = sample_demos(pool, q, 4, rng);
        REQUIRE(got.size() == 4);
        auto expect = oracle::mmr_greedy(embeddings(pool), q, {got[0]}, 2, 0.5);
        CHECK(std::vector<std::size_t>(got.begin(), got.begin() + 3) == expect);
        for (auto i : oracle::by_similarity(embeddings(pool), q)) {
            if (std::find(expect.begin(), expect.end(), i) == expect.end()) {
                CHECK(got[3] == i);
                break;
            }
        }
    }
}

TEST_CASE("lambda 1 is pure similarity, lambda 0 pure diversity") {
    auto q = unit_at(30);
    auto sim = planar_pool(1.0);
    Rng r1(3);
    auto got = sample_demos(sim, q, 3, r1);
    auto order = oracle::by_similarity(embeddings(sim), q);
    CHECK(got == std::vector<std::size_t>(order.begin(), order.begin() + 3));

    auto div = planar_pool(0.0);
    Rng r2(3);
    auto d = sample_demos(div, q, 3, r2);
    // first pick has no penalty and ties everywhere -> index 0; then the
    // candidate least similar to 0 deg is 170 deg (index 7)
    CHECK(d[0] == 0);
    CHECK(d[1] == 7);
}

TEST_CASE("no duplicates and exact length") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 50; ++trial) {
        DemoPool pool;
        pool.lambda_mmr = (gen() % 11) / 10.0;
        std::size_t n = 4 + gen() % 17;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> v(8);
            for (auto& x : v) x = nd(gen);
            pool.candidates.push_back({std::to_string(i), "d", "t", {}, l2_normalize(v)});
        }
        std::vector<double> q(8);
        for (auto& x : q) x = nd(gen);
        std::size_t k = 1 + gen() % n;
        Rng rng(trial);
        auto got = sample_demos(pool, q, k, rng);
        CHECK(got.size() == k);
        CHECK(std::set<std::size_t>(got.begin(), got.end()).size() == k);
    }
}

TEST_CASE("pool errors") {
    auto pool = planar_pool(0.5);
    Rng rng(1);
    CHECK_THROWS_AS(sample_demos(pool, unit_at(0), 9, rng), ValidationError);
    pool.candidates[0].embedding = {2.0, 0.0};
    CHECK_THROWS_AS(sample_demos(pool, unit_at(0), 2, rng), ValidationError);
    auto bad = planar_pool(1.5);
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("same seed same sample") {
    auto pool = planar_pool(0.5);
    Rng a(11), b(11);
    CHECK(sample_demos(pool, unit_at(10), 8, a) == sample_demos(pool, unit_at(10), 8, b));
}
