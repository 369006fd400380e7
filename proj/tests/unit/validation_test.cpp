#include <doctest.h>

#include "ssf/errors.hpp"
#include "ssf/validation.hpp"
#include "support/oracles.hpp"

using namespace ssf;

namespace {

const std::vector<std::string> kDims{"overall_goal", "narrative_intent", "author_emotional_response",
                                     "causal_explanation", "prediction", "character_appraisal", "moral",
                                     "stance", "narrative_feeling", "aesthetic_feeling"};

std::vector<RatingRecord> group(const std::string& ann, const std::string& story, std::optional<Rating> implausible,
                                Rating standard = Rating::very_likely) {
    std::vector<RatingRecord> out;
    for (const auto& d : kDims) out.push_back({ann, story, d, Variant::standard, standard, ""});
    if (implausible) out.push_back({ann, story, "moral", Variant::known_implausible, *implausible, ""});
    return out;
}

void append(std::vector<RatingRecord>& a, const std::vector<RatingRecord>& b) { a.insert(a.end(), b.begin(), b.end()); }

}  // namespace

TEST_CASE("quality filter") {
    std::vector<RatingRecord> rs;
    append(rs, group("a", "s1", Rating::very_likely));
    append(rs, group("a", "s2", Rating::very_unlikely));
    append(rs, group("b", "s1", std::nullopt));
    append(rs, group("b", "s2", Rating::somewhat_likely));
    append(rs, group("c", "s1", Rating::somewhat_unlikely));
    auto r = quality_filter(rs);
    CHECK(r.discarded_ratings == 20);
    REQUIRE(r.discarded.size() == 2);
    CHECK(r.discarded[0].annotator_id == "a");
    CHECK(r.discarded[0].story_id == "s1");
    CHECK(r.discarded[1].annotator_id == "b");
    CHECK(r.kept.size() == 30);
    for (const auto& k : r.kept) {
        CHECK(k.variant == Variant::standard);
        CHECK_FALSE((k.annotator_id == "a" && k.story_id == "s1"));
    }
    CHECK(r.warnings.empty());

    auto again = quality_filter(r.kept);
    CHECK(again.kept.size() == r.kept.size());
    CHECK(again.discarded_ratings == 0);
}

TEST_CASE("incomplete group warns but is still filtered") {
    auto rs = group("a", "s1", Rating::very_likely);
    rs.erase(rs.begin());
    auto r = quality_filter(rs);
    CHECK(r.warnings.size() == 1);
    CHECK(r.discarded_ratings == 9);
    CHECK(r.kept.empty());
}

TEST_CASE("ratings csv") {
    auto dir = oracle::temp_dir("ratings");
    write_text(dir / "r.csv",
               "annotator_id,story_id,dimension,variant,rating\n"
               "a,s1,moral,standard,very_likely\n"
               "a,s1,stance,known_implausible,somewhat_unlikely\n");
    auto rs = read_ratings_csv(dir / "r.csv");
    REQUIRE(rs.size() == 2);
    CHECK(rs[1].variant == Variant::known_implausible);
    CHECK(rs[1].rating == Rating::somewhat_unlikely);
    write_text(dir / "bad.csv", "annotator_id,story_id,dimension,variant,rating\na,s1,moral,standard,maybe\n");
    CHECK_THROWS_AS(read_ratings_csv(dir / "bad.csv"), ValidationError);
    write_text(dir / "cols.csv", "annotator_id,story_id\na,s1\n");
    CHECK_THROWS_AS(read_ratings_csv(dir / "cols.csv"), ValidationError);
}

TEST_CASE("jaccard") {
    CHECK(jaccard({"x", "y"}, {"x", "y"}) == 1.0);
    CHECK(jaccard({"x"}, {"y"}) == 0.0);
    CHECK(jaccard({"x", "y"}, {"y", "z"}) == 1.0 / 3.0);
    CHECK(jaccard({}, {}) == 1.0);
    CHECK(jaccard({"x"}, {}) == 0.0);
    CHECK(jaccard({"a", "b", "c"}, {"b"}) == jaccard({"b"}, {"a", "b", "c"}));
}

TEST_CASE("f1 on a hand confusion table") {
    // labels x,y; item1 gold {x} pred {x,y} (FP on y); item2 gold {x,y} pred {x} (FN on y); item3 gold {y} pred {y}
    std::map<std::string, std::set<std::string>> gold{{"1", {"x"}}, {"2", {"x", "y"}}, {"3", {"y"}}};
    std::map<std::string, std::set<std::string>> pred{{"1", {"x", "y"}}, {"2", {"x"}}, {"3", {"y"}}};
    auto r = multilabel_f1(pred, gold);
    // x: tp 2 -> f1 1; y: tp 1 fp 1 fn 1 -> f1 0.5; micro: tp 3 fp 1 fn 1 -> 6/8
    CHECK(r.micro == 0.75);
    CHECK(r.macro == 0.75);
    REQUIRE(r.per_label.size() == 2);
    CHECK(r.per_label[1].label == "y");
    CHECK(r.per_label[1].precision == 0.5);
    CHECK(r.per_label[1].recall == 0.5);
    CHECK(r.per_label[1].f1 == 0.5);
}

TEST_CASE("f1 edge cases") {
    std::map<std::string, std::set<std::string>> gold{{"1", {"x"}}, {"2", {"y"}}};
    auto perfect = multilabel_f1(gold, gold);
    CHECK(perfect.micro == 1.0);
    CHECK(perfect.macro == 1.0);
    auto none = multilabel_f1({{"1", {}}, {"2", {}}}, gold);
    CHECK(none.micro == 0.0);
    CHECK_THROWS_AS(multilabel_f1({{"9", {"x"}}}, gold), ValidationError);
    CHECK(multilabel_f1({{"1", {}}}, {{"1", {}}}).micro == 1.0);

    // renaming labels leaves both scores unchanged
    std::map<std::string, std::set<std::string>> g2{{"1", {"p"}}, {"2", {"q"}}};
    std::map<std::string, std::set<std::string>> p1{{"1", {"x", "y"}}, {"2", {"y"}}}, p2{{"1", {"p", "q"}}, {"2", {"q"}}};
    CHECK(multilabel_f1(p1, gold).macro == multilabel_f1(p2, g2).macro);
    CHECK(multilabel_f1(p1, gold).micro == multilabel_f1(p2, g2).micro);
}

TEST_CASE("plausibility rates") {
    auto all_likely = group("a", "s", std::nullopt, Rating::very_likely);
    for (const auto& r : plausibility_summary(all_likely)) {
        CHECK(r.plausible == 1.0);
        CHECK(r.likely == 1.0);
    }
    auto none = group("a", "s", std::nullopt, Rating::very_unlikely);
    for (const auto& r : plausibility_summary(none)) {
        CHECK(r.plausible == 0.0);
        CHECK(r.likely == 0.0);
    }
    std::vector<RatingRecord> mixed;
    const Rating scale[] = {Rating::very_unlikely, Rating::somewhat_unlikely, Rating::somewhat_likely,
                            Rating::very_likely};
    for (int i = 0; i < 10; ++i) mixed.push_back({"a" + std::to_string(i), "s", "moral", Variant::standard, scale[i % 4], ""});
    auto rates = plausibility_summary(mixed);
    REQUIRE(rates.size() == 1);
    // ratings 0..9 mod 4 -> very_unlikely x3, somewhat_unlikely x3, somewhat_likely x2, very_likely x2
    CHECK(rates[0].ratings == 10);
    CHECK(rates[0].plausible == 0.7);
    CHECK(rates[0].likely == 0.4);
}
