#include "ssf/gateway.hpp"

#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

#include "ssf/errors.hpp"
#include "ssf/parallel.hpp"

namespace ssf {

void GenerationRequest::validate() const {
    std::vector<std::string> v;
    if (prompt.empty()) v.push_back("prompt is empty");
    if (!(temperature >= 0.0 && temperature <= 2.0)) v.push_back("temperature must be in [0, 2]");
    if (!(top_p > 0.0 && top_p <= 1.0)) v.push_back("top_p must be in (0, 1]");
    if (max_tokens <= 0) v.push_back("max_tokens must be positive");
    if (sample_index < 0) v.push_back("sample_index must be non-negative");
    if (!v.empty()) throw ValidationError("invalid generation request: " + v.front(), v);
}

bool is_transient_status(int status) noexcept {
    return status == 0 || status == 408 || status == 429 || (status >= 500 && status <= 599);
}

std::chrono::milliseconds RetryPolicy::delay(int retry) const {
    double ms = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, retry);
    ms = std::min(ms, static_cast<double>(max_backoff.count()));
    return std::chrono::milliseconds(static_cast<long long>(ms));
}

ConcurrencyGate::ConcurrencyGate(std::size_t limit) : limit_(limit) {
    if (limit == 0) throw ValidationError("max_concurrency must be at least 1");
}

void ConcurrencyGate::acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return active_ < limit_; });
    ++active_;
}

void ConcurrencyGate::release() {
    {
        std::lock_guard lock(mu_);
        --active_;
    }
    cv_.notify_one();
}

std::string request_tag(const GenerationRequest& request) {
    return "req-" + sha256_hex(request.prompt).substr(0, 16) + "-" + std::to_string(request.sample_index);
}

Gateway::Gateway(std::shared_ptr<TextBackend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(std::move(options)), gate_(options_.max_concurrency) {
    if (!backend_) throw ValidationError("gateway needs a backend");
    if (options_.retry.max_retries < 0) throw ValidationError("max_retries must be non-negative");
    if (!options_.sleeper) {
        options_.sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
}

GenerationResult Gateway::generate(GenerationRequest request) {
    request.validate();
    if (request.tag.empty()) request.tag = request_tag(request);

    struct Slot {
        ConcurrencyGate& g;
        explicit Slot(ConcurrencyGate& gate) : g(gate) { g.acquire(); }
        ~Slot() { g.release(); }
    };

    std::string last_error;
    for (int attempt = 0;; ++attempt) {
        BackendReply reply;
        {
            Slot slot(gate_);
            ++attempts_;
            reply = backend_->complete(request);
        }
        if (reply.status >= 200 && reply.status < 300) {
            GenerationResult out;
            out.usage = {request.prompt.size(), reply.text.size(), attempt + 1};
            out.text = std::move(reply.text);
            out.tag = request.tag;
            out.backend = backend_->tag();
            return out;
        }
        last_error = "status " + std::to_string(reply.status) + (reply.error.empty() ? "" : ": " + reply.error);
        if (!is_transient_status(reply.status)) {
            throw TransportError("backend rejected request " + request.tag + " (" + last_error + ")");
        }
        if (attempt >= options_.retry.max_retries) break;
        auto wait = options_.retry.delay(attempt);
        ++retries_;
        spdlog::warn("request {}: {}; retry {}/{} in {} ms", request.tag, last_error, attempt + 1,
                     options_.retry.max_retries, wait.count());
        options_.sleeper(wait);
    }
    throw TransportError("request " + request.tag + " failed after " +
                         std::to_string(options_.retry.max_retries + 1) + " attempts (" + last_error + ")");
}

std::vector<GenerationResult> Gateway::generate_batch(std::vector<GenerationRequest> requests) {
    return parallel_map(requests.size(), options_.max_concurrency,
                        [&](std::size_t i) { return generate(std::move(requests[i])); });
}

std::vector<double> l2_normalize(std::span<const double> v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (!(sq > 0.0) || !std::isfinite(sq)) throw ValidationError("cannot normalize a zero or non-finite vector");
    const double norm = std::sqrt(sq);
    std::vector<double> out(v.begin(), v.end());
    for (double& x : out) x /= norm;
    return out;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("cosine of vectors with different dimensions");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw ValidationError("cosine of a zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::vector<double>> embed_texts(EmbeddingBackend& backend, const std::vector<std::string>& texts,
                                             std::size_t batch_size) {
    if (batch_size == 0) throw ValidationError("embedding batch size must be positive");
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    std::optional<std::size_t> dim;
    for (std::size_t start = 0; start < texts.size(); start += batch_size) {
        std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                       texts.begin() + static_cast<std::ptrdiff_t>(std::min(texts.size(), start + batch_size)));
        auto vectors = backend.embed(batch);
        if (vectors.size() != batch.size()) {
            throw ProtocolError("embedding backend returned " + std::to_string(vectors.size()) + " vectors for " +
                                std::to_string(batch.size()) + " texts");
        }
        for (auto& v : vectors) {
            if (!dim) dim = v.size();
            if (v.size() != *dim || v.empty()) {
                throw ProtocolError("embedding dimension mismatch: " + std::to_string(v.size()) + " vs " +
                                    std::to_string(*dim));
            }
            out.push_back(l2_normalize(v));
        }
    }
    return out;
}

namespace {

/// End of the balanced {...} starting at `open`, honoring JSON strings.
std::optional<std::size_t> matching_brace(std::string_view s, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        char c = s[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return i;
    }
    return std::nullopt;
}

}  // namespace

std::optional<json> extract_json_object(std::string_view text) {
    for (std::size_t open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
        auto close = matching_brace(text, open);
        if (!close) continue;
        auto doc = json::parse(text.substr(open, *close - open + 1), nullptr, false);
        if (!doc.is_discarded() && doc.is_object()) return doc;
    }
    return std::nullopt;
}

}  // namespace ssf
