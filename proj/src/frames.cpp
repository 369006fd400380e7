#include "ssf/frames.hpp"

#include <spdlog/spdlog.h>

#include "ssf/errors.hpp"
#include "ssf/prompt.hpp"

namespace ssf {

std::string to_string(Variant v) { return v == Variant::standard ? "standard" : "known_implausible"; }

Variant variant_from_string(const std::string& s) {
    if (s == "standard") return Variant::standard;
    if (s == "known_implausible") return Variant::known_implausible;
    throw ValidationError("unknown inference variant: " + s);
}

json Inference::to_json() const {
    return {{"story_id", story_id}, {"dimension", dimension},       {"variant", to_string(variant)},
            {"sample", sample},     {"slot_values", slot_values},   {"rendered_text", rendered_text},
            {"origin", origin}};
}

Inference Inference::from_json(const json& j) {
    Inference inf;
    inf.story_id = j.at("story_id").get<std::string>();
    inf.dimension = j.at("dimension").get<std::string>();
    inf.variant = variant_from_string(j.value("variant", "standard"));
    inf.sample = j.value("sample", 0);
    inf.slot_values = j.at("slot_values").get<SlotValues>();
    inf.rendered_text = j.at("rendered_text").get<std::string>();
    inf.origin = j.value("origin", "");
    return inf;
}

json GenerationFailure::to_json() const {
    return {{"story_id", story_id}, {"dimension", dimension}, {"variant", to_string(variant)}, {"sample", sample},
            {"kind", kind},         {"detail", detail},       {"raw", raw}};
}

void GenerationOptions::validate() const {
    if (n < 1 || n > 3) throw ValidationError("inferences per dimension must be between 1 and 3");
    if (max_attempts < 1) throw ValidationError("max_attempts must be at least 1");
}

std::string render_generation_prompt(const StoryContext& ctx, const Dimension& dim, Variant variant, int n_per_call,
                                     const std::string& none_marker) {
    json tpl = dim.inference_template.source;
    if (n_per_call > 1) tpl = json(std::vector<std::string>(static_cast<std::size_t>(n_per_call), dim.inference_template.source));
    auto or_none = [&](const std::string& s) { return s.empty() ? none_marker : s; };
    Bindings b{
        {"TAXONOMY_DIMENSION", dim.name},
        {"DIMENSION", dim.name},
        {"DIM", dim.name},
        {"DIMENSION_OVERVIEW", dim.description},
        {"SUBREDDIT_NAME", ctx.story.community},
        {"SUBREDDIT_DESCRIPTION", ctx.community.purpose_summary.value_or(none_marker)},
        {"SUBREDDIT_VALUES", ctx.community.values_summary.value_or(none_marker)},
        {"INITIAL_POST_SUMMARY", or_none(ctx.context.initial_post_summary)},
        {"CONVERSATION_SUMMARY", or_none(ctx.context.conversation_summary)},
        {"CURRENT_TEXT", ctx.story.text},
        {"DIMENSION_TEMPLATE", tpl.dump()},
    };
    const auto& prompt =
        variant == Variant::standard ? prompts::inference_generation() : prompts::known_implausible_generation();
    return render(prompt, b);
}

namespace {

/// Parses the reply into candidate texts; nullopt if it is not the expected
/// JSON wrapper.
std::optional<std::vector<std::string>> reply_texts(const std::string& reply) {
    auto doc = extract_json_object(reply);
    if (!doc || !doc->contains("response")) return std::nullopt;
    const auto& r = (*doc)["response"];
    if (r.is_string()) return std::vector<std::string>{r.get<std::string>()};
    if (!r.is_array()) return std::nullopt;
    std::vector<std::string> out;
    for (const auto& item : r) {
        if (!item.is_string()) return std::nullopt;
        out.push_back(item.get<std::string>());
    }
    return out;
}

}  // namespace

GenerationOutcome generate_inferences(const StoryContext& ctx, const Dimension& dim, Gateway& gateway,
                                      const GenerationOptions& options, Variant variant) {
    options.validate();
    GenerationOutcome out;
    const int per_call = options.n_per_call ? options.n : 1;
    const int calls = options.n_per_call ? 1 : options.n;
    const auto prompt = render_generation_prompt(ctx, dim, variant, per_call, options.none_marker);

    for (int call = 0; call < calls; ++call) {
        GenerationFailure failure{ctx.story.id, dim.id, variant, call, "", "", ""};
        std::vector<Inference> got;
        for (int attempt = 0; attempt < options.max_attempts && got.empty(); ++attempt) {
            GenerationRequest req;
            req.prompt = prompt;
            req.sample_index = call;
            req.temperature = options.temperature;
            req.max_tokens = options.max_tokens * per_call;
            req.tag = request_tag(req) + "-a" + std::to_string(attempt);
            GenerationResult res;
            try {
                res = gateway.generate(req);
            } catch (const Error& e) {
                failure.kind = "backend";
                failure.detail = e.what();
                failure.raw.clear();
                break;
            }
            auto texts = reply_texts(res.text);
            if (!texts || static_cast<int>(texts->size()) != per_call) {
                failure.kind = "json";
                failure.detail = "reply is not a {\"response\": ...} object with " + std::to_string(per_call) +
                                 " inference(s)";
                failure.raw = res.text;
                continue;
            }
            std::vector<Inference> batch;
            for (std::size_t i = 0; i < texts->size(); ++i) {
                auto conf = check_conformance(dim.inference_template, (*texts)[i]);
                if (!conf.ok) {
                    failure.kind = "conformance";
                    failure.detail = conf.violation;
                    failure.raw = res.text;
                    batch.clear();
                    break;
                }
                if (conf.ambiguous) {
                    spdlog::debug("{}/{}: ambiguous slot segmentation, using leftmost", ctx.story.id, dim.id);
                }
                Inference inf;
                inf.story_id = ctx.story.id;
                inf.dimension = dim.id;
                inf.slot_values = std::move(conf.slot_values);
                inf.rendered_text = (*texts)[i];
                inf.variant = variant;
                inf.origin = res.backend;
                inf.sample = options.n_per_call ? static_cast<int>(i) : call;
                batch.push_back(std::move(inf));
            }
            got = std::move(batch);
        }
        if (got.empty()) {
            spdlog::warn("{}/{} sample {}: {} failure: {}", ctx.story.id, dim.id, call, failure.kind, failure.detail);
            out.failures.push_back(std::move(failure));
        } else {
            for (auto& inf : got) out.inferences.push_back(std::move(inf));
        }
    }
    return out;
}

GenerationOutcome generate_known_implausible(const StoryContext& ctx, const Dimension& dim, Gateway& gateway,
                                             const GenerationOptions& options) {
    GenerationOptions one = options;
    one.n = 1;
    one.n_per_call = false;
    return generate_inferences(ctx, dim, gateway, one, Variant::known_implausible);
}

std::map<std::string, std::string> pick_implausible_dimensions(const std::vector<std::string>& story_ids,
                                                              const TaxonomyRegistry& registry,
                                                              std::uint64_t seed) {
    std::map<std::string, std::string> out;
    const auto& dims = registry.dimensions();
    for (const auto& id : story_ids) {
        Rng rng(derive_seed(seed, "implausible:" + id));
        out[id] = dims[rng.index(dims.size())].id;
    }
    return out;
}

json LabelAssignment::to_json() const {
    return {{"story_id", story_id}, {"dimension", dimension}, {"variant", to_string(variant)},
            {"sample", sample},     {"labels", labels},       {"source", source}};
}

LabelAssignment LabelAssignment::from_json(const json& j) {
    LabelAssignment a;
    a.story_id = j.at("story_id").get<std::string>();
    a.dimension = j.at("dimension").get<std::string>();
    a.variant = variant_from_string(j.value("variant", "standard"));
    a.sample = j.value("sample", 0);
    a.labels = j.at("labels").get<std::set<std::string>>();
    a.source = j.value("source", "model");
    return a;
}

std::string render_classification_prompt(const Dimension& dim, std::string_view text,
                                         const std::vector<Demonstration>& demos) {
    std::string taxonomy;
    for (const auto& s : dim.sublabels) {
        if (!taxonomy.empty()) taxonomy += "\n";
        taxonomy += "- " + s.id + ": " + s.definition;
    }
    std::string examples;
    if (!demos.empty()) {
        examples = "Examples:\n";
        for (const auto& d : demos) {
            examples += "Input: " + d.text + "\nOutput: {\"response\": \n" + json(d.labels).dump() + "}\n\n";
        }
    }
    return render(prompts::inference_classification(), {{"DIMENSION", dim.name},
                                                          {"TAXONOMY", taxonomy},
                                                          {"DIMENSION_ANNOTATION_GUIDELINES", dim.guidelines},
                                                          {"EXAMPLES", examples},
                                                          {"TEXT_TO_CLASSIFY", std::string(text)}});
}

LabelAssignment classify_inference(const Inference& inference, const TaxonomyRegistry& registry, Gateway& gateway,
                                   const std::vector<Demonstration>& demos, const ClassificationOptions& options) {
    const auto& dim = registry.dimension(inference.dimension);
    const auto prompt = render_classification_prompt(dim, inference.rendered_text, demos);
    std::string raw;
    for (int attempt = 0; attempt < std::max(1, options.max_attempts); ++attempt) {
        GenerationRequest req;
        req.prompt = prompt;
        req.max_tokens = options.max_tokens;
        req.tag = request_tag(req) + "-a" + std::to_string(attempt);
        raw = gateway.generate(req).text;
        auto doc = extract_json_object(raw);
        if (!doc || !doc->contains("response") || !(*doc)["response"].is_array()) continue;
        std::set<std::string> labels;
        bool strings = true;
        for (const auto& l : (*doc)["response"]) {
            if (!l.is_string()) {
                strings = false;
                break;
            }
            labels.insert(l.get<std::string>());
        }
        if (!strings) continue;
        registry.validate_labels(dim.id, labels);
        LabelAssignment a;
        a.story_id = inference.story_id;
        a.dimension = inference.dimension;
        a.variant = inference.variant;
        a.sample = inference.sample;
        a.labels = std::move(labels);
        return a;
    }
    throw ProtocolError("classification of " + inference.story_id + "/" + inference.dimension +
                        " returned invalid JSON: " + raw.substr(0, 300));
}

}  // namespace ssf
