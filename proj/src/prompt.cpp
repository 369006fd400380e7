#include "ssf/prompt.hpp"

#include <spdlog/spdlog.h>

#include "ssf/errors.hpp"

namespace ssf {

namespace {

bool is_name_char(char c) { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_'; }

/// Length of a `<<NAME>>` marker starting at `pos`, or 0.
std::size_t marker_length(std::string_view text, std::size_t pos) {
    if (text.compare(pos, 2, "<<") != 0) return 0;
    std::size_t end = pos + 2;
    while (end < text.size() && is_name_char(text[end])) ++end;
    if (end == pos + 2 || text.compare(end, 2, ">>") != 0) return 0;
    return end + 2 - pos;
}

}  // namespace

std::set<std::string> find_placeholders(std::string_view text) {
    std::set<std::string> out;
    for (std::size_t pos = text.find("<<"); pos != std::string_view::npos; pos = text.find("<<", pos + 1)) {
        if (auto len = marker_length(text, pos)) out.emplace(text.substr(pos + 2, len - 4));
    }
    return out;
}

PromptTemplate::PromptTemplate(std::string name, std::string body)
    : name_(std::move(name)), body_(std::move(body)), required_(find_placeholders(body_)) {}

std::string render(const PromptTemplate& tpl, const Bindings& bindings, std::vector<std::string>* unused) {
    std::vector<std::string> missing;
    for (const auto& name : tpl.required()) {
        if (!bindings.contains(name)) missing.push_back(name);
    }
    if (!missing.empty()) {
        std::string names;
        for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
        throw ValidationError(names + " unbound in prompt " + tpl.name(), missing);
    }
    for (const auto& [name, value] : bindings) {
        if (tpl.required().contains(name)) continue;
        spdlog::warn("prompt {}: binding {} is not used", tpl.name(), name);
        if (unused) unused->push_back(name);
    }

    const std::string_view body = tpl.body();
    std::string out;
    out.reserve(body.size());
    std::size_t pos = 0;
    while (pos < body.size()) {
        auto next = body.find("<<", pos);
        if (next == std::string_view::npos) {
            out.append(body.substr(pos));
            break;
        }
        out.append(body.substr(pos, next - pos));
        if (auto len = marker_length(body, next)) {
            out += bindings.at(std::string(body.substr(next + 2, len - 4)));
            pos = next + len;
        } else {
            out.push_back('<');
            pos = next + 1;
        }
    }
    return out;
}

namespace prompts {

const PromptTemplate& utterance_summary() {
    static const PromptTemplate t("utterance_summary",
        "The following text comes from a social media forum. Summarize the text in a maximum of 2 sentences. "
        "Do not hallucinate and do not say that the text is too short to summarize.\n"
        "\n"
        "<<TEXT>>");
    return t;
}

const PromptTemplate& initial_post_summary() {
    static const PromptTemplate t("initial_post_summary",
        "Your task is to distill the provided context about the top-level post in a subreddit conversation into a "
        "succinct 1-sentence summary.\n"
        "\n"
        "Context Types:\n"
        "- Top-level Post Title: the title of the initial top-level post\n"
        "- Top-level Post Summary: a summary of the initial top-level post\n"
        "\n"
        "Context:\n"
        "- Top-level Post Title: <<TITLE>>\n"
        "- Top-level Post Summary: <<POST_SUMMARY>>\n"
        "\n"
        "Write a 1-sentence summary of the provided context. Output just the summary and no other text. "
        "Start your response with 'The first post...'.");
    return t;
}

const PromptTemplate& ancestral_chain_summary() {
    static const PromptTemplate t("ancestral_chain_summary",
        "Below are <<SUMMARY_COUNT>> summaries social media posts in an ancestral chain (parent-child relationships "
        "as you read left to right). Your task is to generate a global summary of the overall chain based on the "
        "local summaries in three sentences or less.\n"
        "<<SUMMARY_LIST>>");
    return t;
}

const PromptTemplate& peer_chain_summary() {
    static const PromptTemplate t("peer_chain_summary",
        "Below are <<SUMMARY_COUNT>> summaries of a chain of social media comments under a single parent "
        "post/comment. Your task is to generate a global summary of the overall chain based on the local summaries "
        "in three sentences or less.\n"
        "<<SUMMARY_LIST>>");
    return t;
}

const PromptTemplate& conversation_summary() {
    static const PromptTemplate t("conversation_summary",
        "Your task is to distill the provided context about the conversational context into a 1-2 sentence summary.\n"
        "\n"
        "Conversational Context Types:\n"
        "- Ancestors Summary: a summary of the chain of texts formed by a parent-child relationship leading up to "
        "the current text\n"
        "- Preceding Peers Summary: a summary of the chronologically-ordered comments preceding the current text "
        "under the same parent\n"
        "\n"
        "Conversational Context:\n"
        "- Ancestors Summary:\n<<ANCESTRAL_CHAIN_SUMMARY>>\n"
        "- Preceding Peers Summary:\n<<PRECEEDING_PEERS_SUMMARY>>\n"
        "\n"
        "Summarize the provided conversational context in 1-3 sentences. Output just the summary and no other "
        "text. Start your response with 'The conversation so far...'.");
    return t;
}

const PromptTemplate& community_purpose() {
    static const PromptTemplate t("community_purpose",
        "Summarize the following description of the r/<<SUBREDDIT_NAME>> subreddit in 1 sentence. Do not "
        "hallucinate and do not say the text is too short to summarize. Output the summary and no other text.\n"
        "\n"
        "<<SUBREDDIT_PUBLIC_DESCRIPTION>>");
    return t;
}

const PromptTemplate& community_values() {
    static const PromptTemplate t("community_values",
        "Summarize key values or norms of the r/<<SUBREDDIT_NAME>> subreddit that are either explicitly stated or "
        "strongly evidenced by the following description and rules for the subreddit. Do not hallucinate. Output "
        "a 1 sentence summary and no other text.\n"
        "\n"
        "Description:\n<<SUBREDDIT_DESCRIPTION_SUMMARY>>\n"
        "Rules:\n<<SUBREDDIT_PUBLIC_RULES>>");
    return t;
}

namespace {

std::string generation_body(bool implausible) {
    const std::string task =
        implausible
            ? "Your task is to generate one contextually **implausible** description of the <<TAXONOMY_DIMENSION>> "
              "in a social media conversation."
            : "Your task is to use commonsense to generate one contextually plausible description of the "
              "<<TAXONOMY_DIMENSION>> in a social media conversation.";
    std::string body = task + "\n\n";
    body +=
        "General (non-exhaustive) information to help scaffold your thinking about <<DIMENSION>> in the context "
        "of social media storytelling:\n"
        "<<DIMENSION_OVERVIEW>>\n"
        "\n"
        "The following conversational context types are available:\n"
        "- Subreddit Name: the Reddit community where the conversation takes place\n"
        "- Subreddit Description: a brief overview of the subreddit topic\n"
        "- Subreddit Values: a high-level summary of key values, norms, or rules in the subreddit\n"
        "- Top-level Post Summary: a summary of the first, top-level post in the conversation thread\n"
        "- Conversation Summary: a summary of the prior conversation leading up to the current text\n"
        "- Current Text: the current text to analyze. The text necessarily contains storytelling (even if the "
        "story is short or banal).\n"
        "\n"
        "Conversational Context:\n"
        "- Subreddit Name:\n<<SUBREDDIT_NAME>>\n"
        "- Subreddit Description:\n<<SUBREDDIT_DESCRIPTION>>\n"
        "- Subreddit Values:\n<<SUBREDDIT_VALUES>>\n"
        "- Top-level Post Summary:\n<<INITIAL_POST_SUMMARY>>\n"
        "- Conversation Summary:\n<<CONVERSATION_SUMMARY>>\n"
        "\n"
        "Current Text:\n"
        "<<CURRENT_TEXT>>\n"
        "\n"
        "Output Instructions:\n"
        "Remember: " + task + "\n";
    if (implausible) {
        body += "Your output will be used to test human annotators, to see if they correctly identify your "
                "response as implausible or extremely unlikely.\n";
    }
    body +=
        "You may use the provided info about <<DIM>> as background but do **not** force your response to fit it. "
        "You must not copy directly from the provided info if you can answer more precisely in your own words.\n"
        "\n"
        "**IMPORTANT RULES (READ CAREFULLY):**\n"
        "- ONLY edit inside double-braced placeholders like `{{...}}`. DO NOT MODIFY ANY TEXT OUTSIDE `{{}}`.\n"
        "- DO NOT change or correct the template’s wording, punctuation, or singular/plural mismatches. FOLLOW "
        "THE TEMPLATE EXACTLY.\n"
        "- DO NOT modify the JSON structure. Use valid JSON with double quotes only.\n"
        "- OUTPUT ONLY the completed template below — NO EXTRA TEXT, HEADINGS, OR COMMENTS.\n"
        "- IF YOU BREAK THESE RULES, THE OUTPUT WILL BE UNUSABLE.\n"
        "{\"response\": <<DIMENSION_TEMPLATE>>}";
    return body;
}

}  // namespace

const PromptTemplate& inference_generation() {
    static const PromptTemplate t("inference_generation", generation_body(false));
    return t;
}

const PromptTemplate& known_implausible_generation() {
    static const PromptTemplate t("known_implausible_generation", generation_body(true));
    return t;
}

const PromptTemplate& inference_classification() {
    static const PromptTemplate t("inference_classification",
        "Using the taxonomy and tips below, classify the following description of the <<DIMENSION>> in a social "
        "media conversation.\n"
        "\n"
        "Taxonomy for <<DIMENSION>>:\n"
        "<<TAXONOMY>>\n"
        "\n"
        "Classification Tips for <<DIMENSION>>:\n"
        "<<DIMENSION_ANNOTATION_GUIDELINES>>\n"
        "\n"
        "<<EXAMPLES>>"
        "Text to classify:\n"
        "<<TEXT_TO_CLASSIFY>>\n"
        "\n"
        "Output Instructions:\n"
        "Remember: Using the taxonomy and tips below, classify the following description of the <<DIMENSION>> in "
        "a social media conversation.\n"
        "Fill in the JSON list below with *ALL* of the categories that apply to the text. Many texts span multiple "
        "categories—please include every one that applies, not just the most obvious.'\n"
        "\n"
        "**IMPORTANT RULES (READ CAREFULLY):**\n"
        "- DO NOT modify the JSON structure. Use valid JSON with double quotes only.\n"
        "- OUTPUT ONLY the completed template below — NO EXTRA TEXT, HEADINGS, OR COMMENTS.\n"
        "{\"response\": [\"category_a\", \"...\"]}");
    return t;
}

std::vector<const PromptTemplate*> all() {
    return {&utterance_summary(),   &initial_post_summary(),        &ancestral_chain_summary(),
            &peer_chain_summary(),  &conversation_summary(),        &community_purpose(),
            &community_values(),    &inference_generation(),        &known_implausible_generation(),
            &inference_classification()};
}

std::string bullet_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out.push_back('\n');
        out += "- " + items[i];
    }
    return out;
}

}  // namespace prompts

}  // namespace ssf
