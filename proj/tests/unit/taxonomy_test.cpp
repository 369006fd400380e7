#include <doctest.h>

#include "ssf/errors.hpp"
#include "ssf/slot_template.hpp"
#include "ssf/taxonomy.hpp"

using namespace ssf;

namespace {

json shipped() { return read_json(std::filesystem::path(SSF_DATA_DIR) / "taxonomy.json"); }

}  // namespace

TEST_CASE("slot template parsing") {
    auto t = parse_slot_template("A {{x}} b {{y}}.");
    CHECK(t.fixed == std::vector<std::string>{"A ", " b ", "."});
    CHECK(t.slots == std::vector<std::string>{"x", "y"});
    CHECK(t.render({{"x", "foo"}, {"y", "bar"}}) == "A foo b bar.");
    CHECK_THROWS_AS(t.render({{"x", "foo"}}), ValidationError);
    CHECK_THROWS_AS(parse_slot_template("A {{x}}{{y}}"), ValidationError);
    CHECK_THROWS_AS(parse_slot_template("A {{x"), ValidationError);
    CHECK_THROWS_AS(parse_slot_template("A {{}} b"), ValidationError);
    CHECK_THROWS_AS(parse_slot_template("A }} b"), ValidationError);
}

TEST_CASE("shipped registry") {
    auto reg = load_registry(shipped());
    CHECK(reg.dimensions().size() == 10);
    auto author = reg.group(DimensionGroup::author_centric);
    REQUIRE(author.size() == 3);
    CHECK(author[0]->id == "overall_goal");
    CHECK(author[1]->id == "narrative_intent");
    CHECK(author[2]->id == "author_emotional_response");
    CHECK(reg.dimension("stance").label_ids() ==
          std::vector<std::string>{"support_belief_norm", "counter_belief_norm", "neutral_belief_norm"});
    CHECK(reg.dimension("moral").sublabels.size() == 10);
    CHECK(reg.dimension("author_emotional_response").label_ids() == reg.dimension("narrative_feeling").label_ids());
    CHECK(reg.dimension("author_emotional_response").label_ids().size() == 12);
    CHECK_FALSE(reg.canonical_templates());
    for (const auto& d : reg.dimensions()) {
        CHECK_FALSE(d.inference_template.slots.empty());
        for (const auto& s : d.sublabels) CHECK(is_snake_case(s.id));
    }
}

TEST_CASE("label validation") {
    auto reg = load_registry(shipped());
    CHECK_NOTHROW(reg.validate_labels("stance", {"support_belief_norm"}));
    CHECK_NOTHROW(reg.validate_labels("stance", {}));
    CHECK_THROWS_WITH_AS(reg.validate_labels("stance", {"joy"}), doctest::Contains("joy"), ValidationError);
    CHECK_THROWS_AS(reg.validate_labels("nope", {}), ValidationError);
}

TEST_CASE("registry round trips") {
    auto reg = load_registry(shipped());
    auto again = load_registry(reg.to_json());
    CHECK(again.to_json() == reg.to_json());
}

TEST_CASE("invalid registries list every violation") {
    auto doc = shipped();
    SUBCASE("nine dimensions") {
        doc["dimensions"].erase(doc["dimensions"].size() - 1);
        CHECK_THROWS_AS(load_registry(doc), ValidationError);
    }
    SUBCASE("several problems at once") {
        doc["dimensions"][1]["id"] = "overall_goal";
        doc["dimensions"][2]["group"] = "sideways";
        doc["dimensions"][3]["slots"].push_back("ghost");
        doc["dimensions"][4]["sublabels"].push_back(doc["dimensions"][4]["sublabels"][0]);
        try {
            load_registry(doc);
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(e.violations().size() >= 4);
        }
    }
    SUBCASE("wrong group for an author-centric dimension") {
        doc["dimensions"][0]["group"] = "reader_centric";
        CHECK_THROWS_AS(load_registry(doc), ValidationError);
    }
    SUBCASE("repeated slot") {
        doc["dimensions"][7]["template"] = "Readers would {{stance}} that {{stance}} {{belief_or_norm}}.";
        CHECK_THROWS_AS(load_registry(doc), ValidationError);
    }
}

TEST_CASE("snake case") {
    CHECK(is_snake_case("support_belief_norm"));
    CHECK(is_snake_case("joy"));
    CHECK_FALSE(is_snake_case("Joy"));
    CHECK_FALSE(is_snake_case("a-b"));
    CHECK_FALSE(is_snake_case(""));
}
