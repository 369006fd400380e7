#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssf/analytics.hpp"
#include "ssf/curation.hpp"
#include "ssf/io.hpp"

namespace ssf {

inline const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names{"ingest",   "curate",  "summarize", "generate",
                                                "classify", "analyze", "validate",  "report"};
    return names;
}

struct CorpusPaths {
    std::filesystem::path utterances;
    std::filesystem::path scores;
    std::filesystem::path communities;
    std::optional<std::filesystem::path> ratings;
    std::optional<std::filesystem::path> gold_labels;
    std::optional<std::filesystem::path> demo_pool;
    bool permissive = false;
};

struct GatewayConfig {
    /// "mock" or "http".
    std::string kind = "mock";
    std::optional<std::filesystem::path> transcript;
    bool synthetic_fallback = true;
    std::string base_url = "https://api.openai.com";
    std::string model = "gpt-4o";
    std::string classifier_model = "gpt-4.1";
    std::string embedding_model = "text-embedding-3-small";
    std::string api_key_env = "SSF_API_KEY";
    std::size_t max_concurrency = 4;
    int max_retries = 4;
    int timeout_seconds = 120;
    std::size_t embedding_dim = 64;
};

struct RunConfig {
    /// Directory relative paths are resolved against.
    std::filesystem::path base_dir;
    std::optional<std::uint64_t> rng_seed;
    std::filesystem::path output_dir = "out";
    CorpusPaths corpus;
    std::filesystem::path registry;
    GatewayConfig gateway;
    CurationConfig curation;

    std::size_t k_anc = 5;
    std::size_t k_peer = 5;
    std::size_t passthrough_chars = 40;

    int inferences_per_dimension = 1;
    int generation_attempts = 3;
    bool n_per_call = false;
    bool inject_implausible = true;
    /// "all" stories kept by curation, or the "stratified" sample.
    std::string story_set = "all";

    /// "zero_shot" or "k_shot".
    std::string classification_mode = "zero_shot";
    double lambda_mmr = 0.5;
    int classification_attempts = 3;
    /// Overrides every dimension's demonstration count when set.
    std::optional<std::size_t> demo_k;

    double lambda_rank = 0.667;
    JsMode js_mode = JsMode::distance;
    std::vector<std::pair<std::string, std::string>> npmi_pairs{{"overall_goal", "narrative_intent"}};

    std::size_t dimensions_per_story = 10;

    std::map<std::string, bool> stages;

    /// Canonical form of the settings that influence artifacts (output_dir
    /// excluded), used for the provenance hash.
    json effective() const;
    std::string hash() const;

    bool stage_enabled(const std::string& stage) const;
    std::filesystem::path resolve(const std::filesystem::path& p) const;

    /// Throws ValidationError listing every problem, including input files
    /// that do not exist.
    void validate() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const json& doc, const std::filesystem::path& base_dir);

}  // namespace ssf
