#pragma once

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "ssf/gateway.hpp"

namespace ssf {

struct TranscriptEntry {
    std::string prompt_hash;
    int sample = 0;
    int status = 200;
    std::string response;
};

std::vector<TranscriptEntry> read_transcript(const std::filesystem::path& path);
void write_transcript(const std::filesystem::path& path, const std::vector<TranscriptEntry>& entries);

enum class MockFallback { none, synthetic };

/// Replays recorded replies keyed by (sha256(prompt), sample index). Several
/// entries under one key are served in order and the last one repeats. With
/// the synthetic fallback, unknown prompts get a deterministic reply derived
/// from the prompt itself.
class MockBackend : public TextBackend {
public:
    explicit MockBackend(std::vector<TranscriptEntry> entries = {}, MockFallback fallback = MockFallback::none,
                         std::string tag = "mock");

    void script(const std::string& prompt, std::string response, int sample = 0, int status = 200);
    void set_latency(std::chrono::microseconds latency) { latency_ = latency; }

    BackendReply complete(const GenerationRequest& request) override;
    std::string tag() const override { return tag_; }

    std::size_t calls() const noexcept { return calls_; }
    std::size_t max_in_flight() const noexcept { return max_in_flight_; }
    /// Successful replies served so far, one per key, sorted by key.
    std::vector<TranscriptEntry> served() const;

private:
    using Key = std::pair<std::string, int>;

    std::map<Key, std::deque<TranscriptEntry>> script_;
    std::map<Key, TranscriptEntry> served_;
    mutable std::mutex mu_;
    MockFallback fallback_;
    std::string tag_;
    std::chrono::microseconds latency_{0};
    std::atomic<std::size_t> calls_{0};
    std::atomic<std::size_t> in_flight_{0};
    std::atomic<std::size_t> max_in_flight_{0};
};

/// Reply the synthetic fallback gives for `prompt`.
std::string synthetic_reply(const std::string& prompt, int sample);

/// Bag-of-words embedder: each lowercase token maps to a fixed pseudo-random
/// vector and a text embeds as the sum.
class MockEmbedder : public EmbeddingBackend {
public:
    explicit MockEmbedder(std::size_t dim = 64) : dim_(dim) {}
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
    std::string tag() const override { return "mock-embed-" + std::to_string(dim_); }
    std::size_t calls() const noexcept { return calls_; }

private:
    std::size_t dim_;
    std::atomic<std::size_t> calls_{0};
};

}  // namespace ssf
