#include "ssf/http_backend.hpp"

#include <cstdlib>

#include <httplib.h>

#include "ssf/errors.hpp"

namespace ssf {

namespace {

std::string key_from_env(const std::string& var) {
    const char* v = var.empty() ? nullptr : std::getenv(var.c_str());
    return v ? v : "";
}

httplib::Client make_client(const HttpEndpoint& ep) {
    httplib::Client cli(ep.base_url);
    cli.set_connection_timeout(std::chrono::seconds(10));
    cli.set_read_timeout(ep.timeout);
    cli.set_write_timeout(ep.timeout);
    return cli;
}

httplib::Headers headers(const std::string& key, const std::string& tag) {
    httplib::Headers h;
    if (!key.empty()) h.emplace("Authorization", "Bearer " + key);
    if (!tag.empty()) h.emplace("Idempotency-Key", tag);
    return h;
}

/// POSTs `body`; returns status 0 with the error text when no reply arrived.
std::pair<int, std::string> post(const HttpEndpoint& ep, const std::string& key, const std::string& path,
                                 const json& body, const std::string& tag) {
    auto cli = make_client(ep);
    auto res = cli.Post(path, headers(key, tag), body.dump(), "application/json");
    if (!res) return {0, httplib::to_string(res.error())};
    return {res->status, res->body};
}

}  // namespace

HttpBackend::HttpBackend(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)), api_key_(key_from_env(endpoint_.api_key_env)) {}

BackendReply HttpBackend::complete(const GenerationRequest& request) {
    json body{{"model", endpoint_.model},
              {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
              {"temperature", request.temperature},
              {"top_p", request.top_p},
              {"max_tokens", request.max_tokens}};
    auto [status, text] = post(endpoint_, api_key_, "/v1/chat/completions", body, request.tag);
    if (status < 200 || status >= 300) return {status, "", status == 0 ? text : text.substr(0, 200)};
    auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ProtocolError("chat completion reply is not JSON");
    try {
        return {status, doc.at("choices").at(0).at("message").at("content").get<std::string>(), ""};
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("chat completion reply missing content: ") + e.what());
    }
}

HttpEmbedder::HttpEmbedder(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)), api_key_(key_from_env(endpoint_.api_key_env)) {}

std::vector<std::vector<double>> HttpEmbedder::embed(const std::vector<std::string>& texts) {
    json body{{"model", endpoint_.model}, {"input", texts}};
    auto [status, text] = post(endpoint_, api_key_, "/v1/embeddings", body, "");
    if (status < 200 || status >= 300) {
        throw TransportError("embedding request failed with status " + std::to_string(status) + ": " +
                             text.substr(0, 200));
    }
    auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ProtocolError("embedding reply is not JSON");
    try {
        std::vector<std::vector<double>> out(texts.size());
        const auto& data = doc.at("data");
        if (data.size() != texts.size()) throw ProtocolError("embedding reply has wrong number of vectors");
        for (std::size_t i = 0; i < data.size(); ++i) {
            std::size_t idx = data[i].value("index", i);
            if (idx >= out.size()) throw ProtocolError("embedding reply index out of range");
            out[idx] = data[i].at("embedding").get<std::vector<double>>();
        }
        return out;
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed embedding reply: ") + e.what());
    }
}

}  // namespace ssf
