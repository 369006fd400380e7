#include <doctest.h>

#include <cmath>
#include <random>

#include "ssf/analytics.hpp"
#include "ssf/errors.hpp"
#include "support/oracles.hpp"

using namespace ssf;

namespace {

const TaxonomyRegistry& registry() {
    static const auto reg = load_registry_file(std::filesystem::path(SSF_DATA_DIR) / "taxonomy.json");
    return reg;
}

LabelAssignment assign(const std::string& story, const std::string& dim, std::set<std::string> labels,
                       Variant v = Variant::standard) {
    LabelAssignment a;
    a.story_id = story;
    a.dimension = dim;
    a.labels = std::move(labels);
    a.variant = v;
    return a;
}

std::vector<double> norm(std::vector<double> v) { return l2_normalize(v); }

}  // namespace

TEST_CASE("distribution counts each label once per inference") {
    const auto& dim = registry().dimension("overall_goal");
    std::vector<LabelAssignment> as;
    for (int i = 0; i < 10; ++i) as.push_back(assign("s" + std::to_string(i), "overall_goal", {"entertain"}));
    as.push_back(assign("x", "overall_goal", {"persuade_debate"}, Variant::known_implausible));
    auto d = sublabel_distribution(as, dim, {});
    auto p = d.probabilities();
    auto idx = std::find(d.labels.begin(), d.labels.end(), "entertain") - d.labels.begin();
    CHECK(p[static_cast<std::size_t>(idx)] == 1.0);
    CHECK(d.labels.size() == dim.sublabels.size());
    CHECK(d.inferences == 10);

    auto empty = sublabel_distribution({}, dim, {});
    CHECK_FALSE(empty.defined());
    CHECK_THROWS_AS(empty.probabilities(), ValidationError);

    std::map<std::string, std::string> sc{{"s0", "a"}, {"s1", "b"}};
    CHECK(sublabel_distribution(as, dim, sc, std::string("a")).total == 1);
    CHECK_THROWS_AS(sublabel_distribution({assign("s", "overall_goal", {"joy"})}, dim, {}), ValidationError);
}

TEST_CASE("multi-label inference contributes every label") {
    const auto& dim = registry().dimension("stance");
    auto d = sublabel_distribution({assign("s", "stance", {"support_belief_norm", "counter_belief_norm"}),
                                    assign("t", "stance", {"support_belief_norm"})},
                                   dim, {});
    CHECK(d.total == 3);
    auto p = d.probabilities();
    CHECK(std::abs(p[0] - 2.0 / 3.0) < 1e-15);
    double sum = 0;
    for (double x : p) sum += x;
    CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("normalized entropy") {
    CHECK(normalized_entropy({0.25, 0.25, 0.25, 0.25}).value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(normalized_entropy({1.0, 0.0, 0.0}).value == 0.0);
    CHECK(normalized_entropy({0.5, 0.5, 0.0, 0.0}).value == doctest::Approx(0.5).epsilon(1e-12));
    auto one = normalized_entropy({1.0});
    CHECK(one.value == 0.0);
    CHECK(one.degenerate);
    CHECK(normalized_entropy({0.1, 0.2, 0.7}).value ==
          doctest::Approx(oracle::entropy2({0.1, 0.2, 0.7}) / std::log2(3.0)));
    CHECK(normalized_entropy({0.7, 0.1, 0.2}).value == normalized_entropy({0.1, 0.2, 0.7}).value);
}

TEST_CASE("group entropy") {
    std::map<std::string, LabelDistribution> dists;
    for (const auto& d : registry().dimensions()) {
        LabelDistribution ld;
        ld.dimension = d.id;
        ld.labels = d.label_ids();
        ld.counts.assign(ld.labels.size(), 3);
        ld.total = 3 * ld.labels.size();
        dists[d.id] = ld;
    }
    auto all = group_entropy(dists, registry(), DimensionGroup::reader_centric);
    CHECK(all.value == doctest::Approx(1.0));
    CHECK(all.dimensions == 7);

    // author group: make one dimension a point mass and another half/half
    auto& goal = dists["overall_goal"];
    std::fill(goal.counts.begin(), goal.counts.end(), 0);
    goal.counts[0] = 4;
    goal.total = 4;
    auto& intent = dists["narrative_intent"];
    std::fill(intent.counts.begin(), intent.counts.end(), 0);
    intent.counts[0] = intent.counts[1] = 2;
    intent.total = 4;
    auto g = group_entropy(dists, registry(), DimensionGroup::author_centric);
    CHECK(g.dimensions == 3);
    double expect = (0.0 + 1.0 / std::log2(static_cast<double>(intent.labels.size())) + 1.0) / 3.0;
    CHECK(g.value == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("npmi conventions") {
    CHECK(*npmi_value(0.25, 0.25, 0.25) == 1.0);
    CHECK(*npmi_value(0.25, 0.5, 0.5) == 0.0);
    CHECK(*npmi_value(0.0, 0.3, 0.4) == -1.0);
    CHECK_FALSE(npmi_value(0.0, 0.0, 0.4));
    double v = *npmi_value(0.25, 0.30, 0.40);
    CHECK(v == doctest::Approx(std::log(25.0 * 100.0 / (30.0 * 40.0)) / -std::log(25.0 / 100.0)).epsilon(1e-12));
    CHECK(std::abs(v - 0.5294) < 1e-4);
    CHECK(*npmi_value(0.1, 0.3, 0.2) == *npmi_value(0.1, 0.2, 0.3));
}

TEST_CASE("npmi matrix from a contingency table") {
    // 100 stories: x in 30, y in 40, both in 25
    std::vector<LabelAssignment> as;
    for (int i = 0; i < 100; ++i) {
        std::string s = "s" + std::to_string(i);
        std::set<std::string> goal, intent;
        if (i < 30) goal.insert("entertain");
        if (i < 25 || (i >= 30 && i < 45)) intent.insert("convey_similar_experience");
        as.push_back(assign(s, "overall_goal", goal));
        as.push_back(assign(s, "narrative_intent", intent));
    }
    auto m = npmi(as, registry().dimension("overall_goal"), registry().dimension("narrative_intent"));
    CHECK(m.stories == 100);
    auto r = std::find(m.rows.begin(), m.rows.end(), "entertain") - m.rows.begin();
    auto c = std::find(m.cols.begin(), m.cols.end(), "convey_similar_experience") - m.cols.begin();
    auto v = m.values[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    REQUIRE(v);
    CHECK(*v == doctest::Approx(std::log(25.0 * 100.0 / (30.0 * 40.0)) / -std::log(0.25)).epsilon(1e-12));
    // a label no story carries is masked
    CHECK_FALSE(m.values[0][0]);
    for (const auto& row : m.values) {
        for (const auto& x : row) {
            if (x) CHECK((*x >= -1.0 && *x <= 1.0));
        }
    }
}

TEST_CASE("jensen-shannon") {
    std::vector<double> p{1.0, 0.0}, q{0.5, 0.5};
    double expect_div = oracle::entropy2({0.75, 0.25}) - 0.5 * oracle::entropy2(q) - 0.5 * oracle::entropy2(p);
    CHECK(js_divergence(p, q) == doctest::Approx(expect_div).epsilon(1e-12));
    CHECK(std::abs(js_divergence(p, q) - 0.3113) < 1e-4);
    CHECK(std::abs(js_distance(p, q) - 0.5579) < 1e-4);
    CHECK(std::abs(1.0 - js_distance(p, q) - 0.4421) < 1e-4);
    CHECK(js_distance({0.2, 0.8}, {0.2, 0.8}) == 0.0);
    CHECK(js_distance({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(js_divergence({1.0}, {0.5, 0.5}), ValidationError);
}

TEST_CASE("hand-pooled profile embeddings") {
    // community c: story s1 with one inference of two slots, story s2 likewise
    std::vector<EmbeddedInference> inf{
        {"s1", "moral", {norm({1, 0, 0}), norm({0, 1, 0})}},
        {"s2", "moral", {norm({0, 0, 1}), norm({1, 1, 0})}},
        {"t1", "moral", {norm({1, 0, 0}), norm({1, 0, 0})}},
    };
    std::map<std::string, std::string> sc{{"s1", "c"}, {"s2", "c"}, {"t1", "d"}};
    auto pc = build_profile("c", inf, {}, sc, registry());
    auto pd = build_profile("d", inf, {}, sc, registry());
    // h_s1 = (.5,.5,0); h_s2 = (r/2, r/2, .5) with r = 1/sqrt2; h_c = mean
    const double r = 1.0 / std::sqrt(2.0);
    std::vector<double> hc{(0.5 + r / 2) / 2, (0.5 + r / 2) / 2, 0.25};
    REQUIRE(pc.pooled.at("moral").size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(pc.pooled.at("moral")[i] == doctest::Approx(hc[i]).epsilon(1e-12));
    CHECK(pc.stories == 2);
    auto sim = ssf_sim_gen(pc, pd);
    CHECK(sim.value == doctest::Approx(oracle::cosine(hc, {1, 0, 0})).epsilon(1e-12));
    CHECK(sim.dimensions == 1);
    CHECK(sim.partial);
    CHECK(ssf_sim_gen(pc, pc).value == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<EmbeddedInference> bad{{"s1", "moral", {{2.0, 0.0, 0.0}}}};
    CHECK_THROWS_AS(build_profile("c", bad, {}, sc, registry()), ValidationError);
}

TEST_CASE("orthogonal pooled embeddings give zero") {
    CommunityProfile a, b;
    for (const auto& d : registry().dimensions()) {
        a.pooled[d.id] = {1, 0};
        b.pooled[d.id] = {0, 1};
    }
    auto s = ssf_sim_gen(a, b);
    CHECK(s.value == 0.0);
    CHECK(s.dimensions == 10);
    CHECK_FALSE(s.partial);
}

TEST_CASE("class similarity over shared dimensions") {
    std::map<std::string, std::string> sc{{"a1", "A"}, {"b1", "B"}};
    std::vector<LabelAssignment> as{assign("a1", "stance", {"support_belief_norm"}),
                                    assign("b1", "stance", {"counter_belief_norm"}),
                                    assign("a1", "moral", {"security"}), assign("b1", "moral", {"security"})};
    auto pa = build_profile("A", {}, as, sc, registry());
    auto pb = build_profile("B", {}, as, sc, registry());
    auto s = ssf_sim_class(pa, pb);
    CHECK(s.dimensions == 2);
    CHECK(s.partial);
    CHECK(s.value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ssf_sim_class(pa, pa).value == 1.0);
    CHECK(ssf_sim_class(pa, pb, JsMode::divergence).value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("average ranks") {
    std::vector<double> s{0.9, 0.5, 0.9, 0.1, 0.5};
    CHECK(average_ranks(s) == std::vector<double>{1.5, 3.5, 1.5, 5.0, 3.5});
    CHECK(average_ranks(s) == oracle::average_ranks(s));
}

TEST_CASE("composite ranking") {
    // pair p has class rank 1 and gen rank 2; q the reverse
    std::vector<PairScore> pairs{{"q", "x", 0.9, 0.1}, {"p", "x", 0.1, 0.9}};
    auto r = composite_ranking(pairs, 0.667);
    REQUIRE(r.pairs.size() == 2);
    CHECK(r.pairs[0].a == "p");
    CHECK(r.pairs[0].composite == doctest::Approx(0.667 * 1 + 0.333 * 2).epsilon(1e-12));
    CHECK(r.pairs[1].composite == doctest::Approx(0.667 * 2 + 0.333 * 1).epsilon(1e-12));
    CHECK(composite_ranking(pairs, 1.0).pairs[0].a == "p");
    CHECK(composite_ranking(pairs, 0.0).pairs[0].a == "q");
    CHECK_THROWS_AS(composite_ranking(pairs, 1.5), ValidationError);
}

TEST_CASE("ties in five pairs against the counting oracle") {
    std::vector<PairScore> pairs{{"a", "b", 0.5, 0.2}, {"a", "c", 0.5, 0.2}, {"a", "d", 0.7, 0.2},
                                 {"b", "c", 0.1, 0.9}, {"b", "d", 0.5, 0.3}};
    auto r = composite_ranking(pairs, 0.5);
    std::vector<double> gen, cls;
    for (const auto& p : pairs) {
        gen.push_back(p.gen);
        cls.push_back(p.cls);
    }
    auto go = oracle::average_ranks(gen), co = oracle::average_ranks(cls);
    for (const auto& rp : r.pairs) {
        std::size_t i = 0;
        while (pairs[i].a != rp.a || pairs[i].b != rp.b) ++i;
        CHECK(rp.gen_rank == go[i]);
        CHECK(rp.class_rank == co[i]);
    }
}

TEST_CASE("comparison of inference sets") {
    EmbeddingSet ref{{"s1", {1, 0}}, {"s2", {0, 1}}, {"s3", {1, 1}}};
    EmbeddingSet same = ref;
    EmbeddingSet ortho{{"s1", {0, 1}}, {"s2", {1, 0}}, {"s3", {1, -1}}};
    auto res = compare_inference_sets({{"A", same}, {"B", ortho}, {"C", same}}, ref,
                                      {{"A>B", "A", "B"}, {"A>C", "A", "C"}});
    REQUIRE(res.size() == 2);
    CHECK(res[0].mean_better == doctest::Approx(1.0));
    CHECK(std::abs(res[0].mean_worse) < 1e-12);
    CHECK(res[0].t > 0);
    CHECK(res[1].t == 0.0);
    CHECK(res[1].p == 0.5);
    CHECK(res[1].p_holm >= res[1].p);

    EmbeddingSet missing{{"s1", {1, 0}}};
    CHECK_THROWS_WITH_AS(compare_inference_sets({{"A", same}, {"B", missing}}, ref, {{"h", "A", "B"}}),
                         doctest::Contains("s2, s3"), ValidationError);
}

TEST_CASE("metrics are symmetric on random profiles") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<CommunityProfile> ps(6);
    for (auto& p : ps) {
        for (const auto& d : registry().dimensions()) {
            std::vector<double> v(5);
            for (auto& x : v) x = u(gen);
            p.pooled[d.id] = v;
            LabelDistribution ld;
            ld.dimension = d.id;
            ld.labels = d.label_ids();
            for (std::size_t i = 0; i < ld.labels.size(); ++i) ld.counts.push_back(gen() % 4);
            ld.counts[0] += 1;
            for (auto c : ld.counts) ld.total += c;
            p.distributions[d.id] = ld;
        }
    }
    for (const auto& a : ps) {
        for (const auto& b : ps) {
            CHECK(ssf_sim_gen(a, b).value == ssf_sim_gen(b, a).value);
            CHECK(ssf_sim_class(a, b).value == ssf_sim_class(b, a).value);
        }
        CHECK(std::abs(ssf_sim_gen(a, a).value - 1.0) < 1e-9);
        CHECK(std::abs(ssf_sim_class(a, a).value - 1.0) < 1e-9);
    }
}
