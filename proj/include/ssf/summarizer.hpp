#pragma once

#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssf/gateway.hpp"
#include "ssf/graph.hpp"

namespace ssf {

struct StageRecord {
    std::string stage;
    std::string prompt_hash;
    std::string backend;
};

struct ContextSummary {
    std::string story_id;
    std::string initial_post_summary;
    std::string ancestors_summary;
    std::string peers_summary;
    std::string conversation_summary;
    std::vector<StageRecord> provenance;
    std::vector<std::string> failed_stages;

    bool complete() const noexcept { return failed_stages.empty(); }
    json to_json() const;
    static ContextSummary from_json(const json& j);
};

struct CommunitySummary {
    std::string community;
    std::optional<std::string> purpose_summary;
    std::optional<std::string> values_summary;

    json to_json() const;
    static CommunitySummary from_json(const json& j);
};

/// Summaries keyed by (utterance id, prompt hash). Concurrent requests for
/// the same key share one computation.
class SummaryCache {
public:
    using Key = std::pair<std::string, std::string>;

    std::string get_or_compute(const Key& key, const std::function<std::string()>& compute);
    std::optional<std::string> find(const Key& key) const;

    void load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path, const std::optional<json>& provenance = std::nullopt) const;

    std::size_t size() const;
    std::size_t hits() const noexcept { return hits_; }
    std::size_t misses() const noexcept { return misses_; }

private:
    mutable std::mutex mu_;
    std::map<Key, std::string> done_;
    std::map<Key, std::shared_future<std::string>> pending_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

struct SummarizerOptions {
    /// Texts shorter than this many characters are used verbatim.
    std::size_t passthrough_chars = 40;
    std::string none_marker = "(none)";
    int max_tokens = 256;
};

class Summarizer {
public:
    Summarizer(Gateway& gateway, SummaryCache& cache, SummarizerOptions options = {});

    /// Runs the staged summarization for `story_id`. Backend failures do not
    /// throw; the affected stages are listed in failed_stages.
    ContextSummary summarize_context(const ContextWindow& window, const std::string& story_id);

    /// Missing sources leave the corresponding field unset.
    CommunitySummary summarize_community(const std::string& community, const std::optional<std::string>& description,
                                         const std::optional<std::string>& rules);

private:
    struct StageResult {
        std::optional<std::string> text;
        StageRecord record;
    };

    StageResult run_stage(const std::string& stage, const std::string& key_id, const std::string& prompt);
    StageResult utterance_summary(const Utterance& u);

    Gateway& gateway_;
    SummaryCache& cache_;
    SummarizerOptions options_;
};

}  // namespace ssf
