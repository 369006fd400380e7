#pragma once

#include <chrono>
#include <string>

#include "ssf/gateway.hpp"

namespace ssf {

/// OpenAI-compatible endpoint settings. The key is read from `api_key_env`
/// at construction; an unset variable sends no Authorization header.
struct HttpEndpoint {
    std::string base_url = "https://api.openai.com";
    std::string model = "gpt-4o";
    std::string api_key_env = "SSF_API_KEY";
    std::chrono::seconds timeout{120};
};

/// Chat-completions adapter.
class HttpBackend : public TextBackend {
public:
    explicit HttpBackend(HttpEndpoint endpoint);
    BackendReply complete(const GenerationRequest& request) override;
    std::string tag() const override { return "http:" + endpoint_.model; }

private:
    HttpEndpoint endpoint_;
    std::string api_key_;
};

/// Embeddings adapter.
class HttpEmbedder : public EmbeddingBackend {
public:
    explicit HttpEmbedder(HttpEndpoint endpoint);
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
    std::string tag() const override { return "http:" + endpoint_.model; }

private:
    HttpEndpoint endpoint_;
    std::string api_key_;
};

}  // namespace ssf
