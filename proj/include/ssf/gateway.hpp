#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssf/io.hpp"

namespace ssf {

struct GenerationRequest {
    std::string prompt;
    double temperature = 0.0;
    double top_p = 1.0;
    int max_tokens = 512;
    /// Idempotency tag; kept stable across retries. Filled in by the gateway
    /// when empty.
    std::string tag;
    /// Distinguishes repeated samples of the same prompt.
    int sample_index = 0;

    void validate() const;
};

struct Usage {
    std::size_t prompt_chars = 0;
    std::size_t completion_chars = 0;
    int attempts = 0;
};

struct GenerationResult {
    std::string text;
    std::string tag;
    std::string backend;
    Usage usage;
};

/// Raw reply from a backend. status 0 means the transport failed before any
/// HTTP status was seen.
struct BackendReply {
    int status = 200;
    std::string text;
    std::string error;
};

class TextBackend {
public:
    virtual ~TextBackend() = default;
    /// Returns the completion or a non-2xx status. Throws ProtocolError when
    /// a 2xx reply cannot be interpreted.
    virtual BackendReply complete(const GenerationRequest& request) = 0;
    virtual std::string tag() const = 0;
};

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
    virtual std::string tag() const = 0;
};

bool is_transient_status(int status) noexcept;

struct RetryPolicy {
    int max_retries = 4;
    std::chrono::milliseconds initial_backoff{250};
    double multiplier = 2.0;
    std::chrono::milliseconds max_backoff{8000};

    std::chrono::milliseconds delay(int retry) const;
};

struct GatewayOptions {
    std::size_t max_concurrency = 4;
    RetryPolicy retry;
    /// Injected so tests do not sleep.
    std::function<void(std::chrono::milliseconds)> sleeper;
};

/// Counting gate bounding the number of requests in flight.
class ConcurrencyGate {
public:
    explicit ConcurrencyGate(std::size_t limit);
    void acquire();
    void release();

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::size_t limit_;
    std::size_t active_ = 0;
};

class Gateway {
public:
    Gateway(std::shared_ptr<TextBackend> backend, GatewayOptions options = {});

    /// Blocks until the request succeeds, retrying transient failures with
    /// exponential backoff. Throws TransportError when retries run out or the
    /// backend rejects the request outright.
    GenerationResult generate(GenerationRequest request);

    /// Fans out up to max_concurrency requests; results keep input order.
    std::vector<GenerationResult> generate_batch(std::vector<GenerationRequest> requests);

    std::string backend_tag() const { return backend_->tag(); }
    std::size_t max_concurrency() const noexcept { return options_.max_concurrency; }
    std::size_t attempts() const noexcept { return attempts_; }
    std::size_t retries() const noexcept { return retries_; }

private:
    std::shared_ptr<TextBackend> backend_;
    GatewayOptions options_;
    ConcurrencyGate gate_;
    std::atomic<std::size_t> attempts_{0};
    std::atomic<std::size_t> retries_{0};
};

/// Default tag for a request: hash of prompt and sample index.
std::string request_tag(const GenerationRequest& request);

std::vector<double> l2_normalize(std::span<const double> v);
double cosine(std::span<const double> a, std::span<const double> b);

/// Embeds `texts`, checks that every vector has the same dimension and
/// returns them L2-normalized. A zero vector is an error.
std::vector<std::vector<double>> embed_texts(EmbeddingBackend& backend, const std::vector<std::string>& texts,
                                             std::size_t batch_size = 64);

/// First parseable JSON object in `text`, tolerating prose or code fences
/// around it.
std::optional<json> extract_json_object(std::string_view text);

}  // namespace ssf
