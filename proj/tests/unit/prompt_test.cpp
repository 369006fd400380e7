#include <doctest.h>

#include "ssf/errors.hpp"
#include "ssf/prompt.hpp"

using namespace ssf;

TEST_CASE("render substitutes literally") {
    PromptTemplate t("t", "Summarize this: <<TEXT>>");
    CHECK(t.required() == std::set<std::string>{"TEXT"});
    CHECK(render(t, {{"TEXT", "hello"}}) == "Summarize this: hello");
}

TEST_CASE("missing binding names the placeholder") {
    PromptTemplate t("t", "<<TEXT>> and <<OTHER>>");
    CHECK_THROWS_WITH_AS(render(t, {{"OTHER", "x"}}), doctest::Contains("TEXT unbound"), ValidationError);
}

TEST_CASE("bound values are never re-expanded") {
    PromptTemplate t("t", "A <<X>> B <<Y>> C");
    auto out = render(t, {{"X", "<<Y>>"}, {"Y", "<<X>>"}});
    // oracle: the same substitution done by hand in one pass
    CHECK(out == std::string("A ") + "<<Y>>" + " B " + "<<X>>" + " C");
}

TEST_CASE("unused bindings are reported, not fatal") {
    PromptTemplate t("t", "<<A>>");
    std::vector<std::string> unused;
    CHECK(render(t, {{"A", "1"}, {"EXTRA", "2"}}, &unused) == "1");
    CHECK(unused == std::vector<std::string>{"EXTRA"});
}

TEST_CASE("markers only match upper-case names") {
    CHECK(find_placeholders("<<a>> <<>> << X>> <<OK_1>> <<<IN>>").size() == 2);
    PromptTemplate t("t", "x <<<IN>> y");
    CHECK(render(t, {{"IN", "v"}}) == "x <v y");
}

TEST_CASE("distinct bindings give distinct prompts") {
    const auto& t = prompts::community_purpose();
    auto a = render(t, {{"SUBREDDIT_NAME", "a"}, {"SUBREDDIT_PUBLIC_DESCRIPTION", "d"}});
    auto b = render(t, {{"SUBREDDIT_NAME", "a"}, {"SUBREDDIT_PUBLIC_DESCRIPTION", "e"}});
    CHECK(a != b);
}

TEST_CASE("catalog placeholders") {
    CHECK(prompts::utterance_summary().required() == std::set<std::string>{"TEXT"});
    CHECK(prompts::initial_post_summary().required() == std::set<std::string>{"TITLE", "POST_SUMMARY"});
    CHECK(prompts::conversation_summary().required() ==
          std::set<std::string>{"ANCESTRAL_CHAIN_SUMMARY", "PRECEEDING_PEERS_SUMMARY"});
    CHECK(prompts::community_values().required() ==
          std::set<std::string>{"SUBREDDIT_NAME", "SUBREDDIT_DESCRIPTION_SUMMARY", "SUBREDDIT_PUBLIC_RULES"});
    CHECK(prompts::inference_generation().required() == prompts::known_implausible_generation().required());
    CHECK(prompts::inference_generation().required().contains("DIMENSION_TEMPLATE"));
    CHECK(prompts::inference_classification().required() ==
          std::set<std::string>{"DIMENSION", "TAXONOMY", "DIMENSION_ANNOTATION_GUIDELINES", "EXAMPLES",
                                "TEXT_TO_CLASSIFY"});
    CHECK(prompts::all().size() == 10);
}

TEST_CASE("fixed instructions are present") {
    CHECK(prompts::conversation_summary().body().find("Start your response with 'The conversation so far...'.") !=
          std::string::npos);
    CHECK(prompts::inference_generation().body().find("DO NOT MODIFY ANY TEXT OUTSIDE `{{}}`") != std::string::npos);
    CHECK(prompts::known_implausible_generation().body().find("contextually **implausible** description") !=
          std::string::npos);
    CHECK(prompts::inference_generation().body().find("implausible") == std::string::npos);
}

TEST_CASE("bullet list") {
    CHECK(prompts::bullet_list({"a", "b"}) == "- a\n- b");
    CHECK(prompts::bullet_list({}).empty());
}
