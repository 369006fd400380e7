#include "ssf/config.hpp"

#include <algorithm>

#include "ssf/errors.hpp"

namespace fs = std::filesystem;

namespace ssf {

namespace {

std::optional<fs::path> opt_path(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return fs::path(j[key].get<std::string>());
}

json path_or_null(const std::optional<fs::path>& p) { return p ? json(p->generic_string()) : json(nullptr); }

}  // namespace

RunConfig run_config_from_json(const json& doc, const fs::path& base_dir) {
    RunConfig c;
    c.base_dir = base_dir;
    try {
        if (doc.contains("rng_seed") && !doc["rng_seed"].is_null()) c.rng_seed = doc["rng_seed"].get<std::uint64_t>();
        c.output_dir = doc.value("output_dir", std::string("out"));
        const auto& corpus = doc.at("corpus");
        c.corpus.utterances = corpus.at("utterances").get<std::string>();
        c.corpus.scores = corpus.at("scores").get<std::string>();
        c.corpus.communities = corpus.at("communities").get<std::string>();
        c.corpus.ratings = opt_path(corpus, "ratings");
        c.corpus.gold_labels = opt_path(corpus, "gold_labels");
        c.corpus.demo_pool = opt_path(corpus, "demo_pool");
        c.corpus.permissive = corpus.value("permissive", false);
        c.registry = doc.at("registry").get<std::string>();

        const json gw = doc.value("gateway", json::object());
        c.gateway.kind = gw.value("kind", c.gateway.kind);
        c.gateway.transcript = opt_path(gw, "transcript");
        c.gateway.synthetic_fallback = gw.value("synthetic_fallback", c.gateway.synthetic_fallback);
        c.gateway.base_url = gw.value("base_url", c.gateway.base_url);
        c.gateway.model = gw.value("model", c.gateway.model);
        c.gateway.classifier_model = gw.value("classifier_model", c.gateway.classifier_model);
        c.gateway.embedding_model = gw.value("embedding_model", c.gateway.embedding_model);
        c.gateway.api_key_env = gw.value("api_key_env", c.gateway.api_key_env);
        c.gateway.max_concurrency = gw.value("max_concurrency", c.gateway.max_concurrency);
        c.gateway.max_retries = gw.value("max_retries", c.gateway.max_retries);
        c.gateway.timeout_seconds = gw.value("timeout_seconds", c.gateway.timeout_seconds);
        c.gateway.embedding_dim = gw.value("embedding_dim", c.gateway.embedding_dim);

        json cur = doc.value("curation", json::object());
        if (c.rng_seed) cur["rng_seed"] = *c.rng_seed;
        c.curation = curation_config_from_json(cur);

        const json ctx = doc.value("context", json::object());
        c.k_anc = ctx.value("k_anc", c.k_anc);
        c.k_peer = ctx.value("k_peer", c.k_peer);
        c.passthrough_chars = ctx.value("passthrough_chars", c.passthrough_chars);

        const json gen = doc.value("generation", json::object());
        c.inferences_per_dimension = gen.value("n", c.inferences_per_dimension);
        c.generation_attempts = gen.value("max_attempts", c.generation_attempts);
        c.n_per_call = gen.value("n_per_call", c.n_per_call);
        c.inject_implausible = gen.value("inject_implausible", c.inject_implausible);
        c.story_set = gen.value("story_set", c.story_set);

        const json cls = doc.value("classification", json::object());
        c.classification_mode = cls.value("mode", c.classification_mode);
        c.lambda_mmr = cls.value("lambda_mmr", c.lambda_mmr);
        c.classification_attempts = cls.value("max_attempts", c.classification_attempts);
        if (cls.contains("demo_k") && !cls["demo_k"].is_null()) c.demo_k = cls["demo_k"].get<std::size_t>();

        const json an = doc.value("analysis", json::object());
        c.lambda_rank = an.value("lambda_rank", c.lambda_rank);
        const auto js = an.value("js", std::string("distance"));
        if (js != "distance" && js != "divergence") throw ValidationError("analysis.js must be distance or divergence");
        c.js_mode = js == "distance" ? JsMode::distance : JsMode::divergence;
        if (an.contains("npmi_pairs")) {
            c.npmi_pairs = an["npmi_pairs"].get<std::vector<std::pair<std::string, std::string>>>();
        }

        c.dimensions_per_story = doc.value("validation", json::object()).value("dimensions_per_story", c.dimensions_per_story);

        for (const auto& s : stage_names()) c.stages[s] = true;
        for (const auto& [k, v] : doc.value("stages", json::object()).items()) {
            if (!c.stages.contains(k)) throw ValidationError("unknown stage in stages: " + k);
            c.stages[k] = v.get<bool>();
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed run config: ") + e.what());
    }
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    if (!fs::exists(path)) throw ValidationError("config file not found: " + path.string());
    json doc;
    try {
        doc = read_json(path);
    } catch (const json::exception& e) {
        throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return run_config_from_json(doc, fs::absolute(path).parent_path());
}

json RunConfig::effective() const {
    json pairs = json::array();
    for (const auto& [a, b] : npmi_pairs) pairs.push_back({a, b});
    return {
        {"rng_seed", rng_seed ? json(*rng_seed) : json(nullptr)},
        {"corpus",
         {{"utterances", corpus.utterances.generic_string()},
          {"scores", corpus.scores.generic_string()},
          {"communities", corpus.communities.generic_string()},
          {"ratings", path_or_null(corpus.ratings)},
          {"gold_labels", path_or_null(corpus.gold_labels)},
          {"demo_pool", path_or_null(corpus.demo_pool)},
          {"permissive", corpus.permissive}}},
        {"registry", registry.generic_string()},
        {"gateway",
         {{"kind", gateway.kind},
          {"transcript", path_or_null(gateway.transcript)},
          {"synthetic_fallback", gateway.synthetic_fallback},
          {"base_url", gateway.base_url},
          {"model", gateway.model},
          {"classifier_model", gateway.classifier_model},
          {"embedding_model", gateway.embedding_model},
          {"embedding_dim", gateway.embedding_dim}}},
        {"curation", to_json(curation)},
        {"context", {{"k_anc", k_anc}, {"k_peer", k_peer}, {"passthrough_chars", passthrough_chars}}},
        {"generation",
         {{"n", inferences_per_dimension},
          {"max_attempts", generation_attempts},
          {"n_per_call", n_per_call},
          {"inject_implausible", inject_implausible},
          {"story_set", story_set}}},
        {"classification",
         {{"mode", classification_mode},
          {"lambda_mmr", lambda_mmr},
          {"max_attempts", classification_attempts},
          {"demo_k", demo_k ? json(*demo_k) : json(nullptr)}}},
        {"analysis",
         {{"lambda_rank", lambda_rank},
          {"js", js_mode == JsMode::distance ? "distance" : "divergence"},
          {"npmi_pairs", pairs}}},
        {"validation", {{"dimensions_per_story", dimensions_per_story}}},
    };
}

std::string RunConfig::hash() const { return sha256_hex(effective().dump()); }

bool RunConfig::stage_enabled(const std::string& stage) const {
    auto it = stages.find(stage);
    return it == stages.end() || it->second;
}

fs::path RunConfig::resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }

void RunConfig::validate() const {
    std::vector<std::string> v;
    auto need = [&](const fs::path& p, const char* what) {
        if (!fs::exists(resolve(p))) v.push_back(std::string(what) + " not found: " + resolve(p).string());
    };
    need(corpus.utterances, "corpus.utterances");
    need(corpus.scores, "corpus.scores");
    need(corpus.communities, "corpus.communities");
    need(registry, "registry");
    if (corpus.ratings) need(*corpus.ratings, "corpus.ratings");
    if (corpus.gold_labels) need(*corpus.gold_labels, "corpus.gold_labels");
    if (corpus.demo_pool) need(*corpus.demo_pool, "corpus.demo_pool");
    if (gateway.transcript) need(*gateway.transcript, "gateway.transcript");
    if (gateway.kind != "mock" && gateway.kind != "http") v.push_back("gateway.kind must be mock or http");
    if (gateway.max_concurrency == 0) v.push_back("gateway.max_concurrency must be at least 1");
    if (gateway.max_retries < 0) v.push_back("gateway.max_retries must be non-negative");
    if (gateway.embedding_dim == 0) v.push_back("gateway.embedding_dim must be positive");
    if (inferences_per_dimension < 1 || inferences_per_dimension > 3) v.push_back("generation.n must be 1..3");
    if (generation_attempts < 1) v.push_back("generation.max_attempts must be at least 1");
    if (story_set != "all" && story_set != "stratified") v.push_back("generation.story_set must be all or stratified");
    if (classification_mode != "zero_shot" && classification_mode != "k_shot") {
        v.push_back("classification.mode must be zero_shot or k_shot");
    }
    if (classification_mode == "k_shot" && !corpus.demo_pool) v.push_back("k_shot classification needs corpus.demo_pool");
    if (demo_k && *demo_k == 0) v.push_back("classification.demo_k must be positive");
    if (!(lambda_mmr >= 0.0 && lambda_mmr <= 1.0)) v.push_back("classification.lambda_mmr must be in [0, 1]");
    if (!(lambda_rank >= 0.0 && lambda_rank <= 1.0)) v.push_back("analysis.lambda_rank must be in [0, 1]");
    const bool sampling = stage_enabled("curate") || stage_enabled("generate") || stage_enabled("classify");
    if (sampling && !rng_seed) v.push_back("rng_seed is required for the sampling stages");
    if (!v.empty()) throw ValidationError("invalid run config: " + v.front(), v);
}

}  // namespace ssf
