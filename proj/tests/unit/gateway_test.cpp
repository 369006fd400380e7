#include <doctest.h>

#include <atomic>
#include <cmath>
#include <thread>

#include <httplib.h>

#include "ssf/errors.hpp"
#include "ssf/gateway.hpp"
#include "ssf/http_backend.hpp"
#include "ssf/mock_backend.hpp"
#include "ssf/parallel.hpp"
#include "support/oracles.hpp"

using namespace ssf;
using namespace std::chrono_literals;

namespace {

struct Recorder {
    std::vector<std::chrono::milliseconds> waits;
    GatewayOptions options(int max_retries, std::size_t concurrency = 4) {
        GatewayOptions o;
        o.max_concurrency = concurrency;
        o.retry.max_retries = max_retries;
        o.sleeper = [this](std::chrono::milliseconds d) { waits.push_back(d); };
        return o;
    }
};

GenerationRequest req(std::string prompt, int sample = 0) {
    GenerationRequest r;
    r.prompt = std::move(prompt);
    r.sample_index = sample;
    return r;
}

/// Local chat-completions server scripted with a status sequence.
struct FakeServer {
    httplib::Server svr;
    std::thread th;
    int port = 0;
    std::mutex mu;
    std::vector<int> statuses;
    std::vector<std::string> idempotency_keys;
    std::string reply_body;

    explicit FakeServer(std::vector<int> seq, std::string content = "canned")
        : statuses(std::move(seq)) {
        reply_body = json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
        svr.Post("/v1/chat/completions", [this](const httplib::Request& rq, httplib::Response& res) {
            std::lock_guard lock(mu);
            idempotency_keys.push_back(rq.get_header_value("Idempotency-Key"));
            int s = statuses.empty() ? 200 : statuses.front();
            if (statuses.size() > 1) statuses.erase(statuses.begin());
            res.status = s;
            res.set_content(s == 200 ? reply_body : "{\"error\":\"busy\"}", "application/json");
        });
        svr.Post("/v1/embeddings", [](const httplib::Request& rq, httplib::Response& res) {
            auto in = json::parse(rq.body);
            json data = json::array();
            for (std::size_t i = 0; i < in["input"].size(); ++i) {
                data.push_back({{"index", i}, {"embedding", {3.0 + static_cast<double>(i), 4.0}}});
            }
            res.set_content(json{{"data", data}}.dump(), "application/json");
        });
        port = svr.bind_to_any_port("127.0.0.1");
        th = std::thread([this] { svr.listen_after_bind(); });
        svr.wait_until_ready();
    }
    ~FakeServer() {
        svr.stop();
        th.join();
    }
    HttpEndpoint endpoint() const {
        HttpEndpoint ep;
        ep.base_url = "http://127.0.0.1:" + std::to_string(port);
        ep.model = "fake";
        ep.api_key_env = "";
        ep.timeout = 5s;
        return ep;
    }
};

class FixedEmbedder : public EmbeddingBackend {
public:
    std::vector<std::vector<double>> reply;
    std::vector<std::vector<double>> embed(const std::vector<std::string>&) override { return reply; }
    std::string tag() const override { return "fixed"; }
};

}  // namespace

TEST_CASE("request validation") {
    auto r = req("x");
    r.temperature = -0.1;
    CHECK_THROWS_AS(r.validate(), ValidationError);
    r = req("x");
    r.top_p = 0.0;
    CHECK_THROWS_AS(r.validate(), ValidationError);
    r.top_p = 1.0;
    CHECK_NOTHROW(r.validate());
}

TEST_CASE("mock replays a canned reply") {
    auto mock = std::make_shared<MockBackend>();
    mock->script("hello", "world");
    Recorder rec;
    Gateway gw(mock, rec.options(2));
    auto out = gw.generate(req("hello"));
    CHECK(out.text == "world");
    CHECK(out.backend == "mock");
    CHECK(out.usage.attempts == 1);
    CHECK(out.tag == request_tag(req("hello")));
    CHECK_THROWS_AS(gw.generate(req("unknown")), ProtocolError);
}

TEST_CASE("429 twice then 200 succeeds after two retries") {
    auto mock = std::make_shared<MockBackend>();
    mock->script("p", "", 0, 429);
    mock->script("p", "", 0, 429);
    mock->script("p", "done", 0, 200);
    Recorder rec;
    Gateway gw(mock, rec.options(4));
    auto out = gw.generate(req("p"));
    CHECK(out.text == "done");
    CHECK(out.usage.attempts == 3);
    CHECK(gw.retries() == 2);
    CHECK(rec.waits == std::vector<std::chrono::milliseconds>{250ms, 500ms});
}

TEST_CASE("zero retries surface the first failure") {
    auto mock = std::make_shared<MockBackend>();
    mock->script("p", "", 0, 503);
    Recorder rec;
    Gateway gw(mock, rec.options(0));
    CHECK_THROWS_AS(gw.generate(req("p")), TransportError);
    CHECK(mock->calls() == 1);
    CHECK(rec.waits.empty());
}

TEST_CASE("non-transient status is not retried") {
    auto mock = std::make_shared<MockBackend>();
    mock->script("p", "", 0, 400);
    Recorder rec;
    Gateway gw(mock, rec.options(3));
    CHECK_THROWS_AS(gw.generate(req("p")), TransportError);
    CHECK(mock->calls() == 1);
    CHECK(is_transient_status(0));
    CHECK(is_transient_status(408));
    CHECK(is_transient_status(502));
    CHECK_FALSE(is_transient_status(404));
}

TEST_CASE("backoff grows and is capped") {
    RetryPolicy p;
    CHECK(p.delay(0) == 250ms);
    CHECK(p.delay(3) == 2000ms);
    CHECK(p.delay(10) == 8000ms);
}

TEST_CASE("http backend retries 429 with a stable idempotency key") {
    FakeServer server({429, 429, 200});
    Recorder rec;
    Gateway gw(std::make_shared<HttpBackend>(server.endpoint()), rec.options(4));
    auto out = gw.generate(req("ping"));
    CHECK(out.text == "canned");
    CHECK(gw.retries() == 2);
    REQUIRE(server.idempotency_keys.size() == 3);
    CHECK(server.idempotency_keys[0] == out.tag);
    CHECK(server.idempotency_keys[1] == out.tag);
    CHECK(server.idempotency_keys[2] == out.tag);
}

TEST_CASE("http backend reports malformed replies as protocol errors") {
    FakeServer server({200});
    server.reply_body = "{\"choices\": []}";
    Gateway gw(std::make_shared<HttpBackend>(server.endpoint()), Recorder{}.options(0));
    CHECK_THROWS_AS(gw.generate(req("ping")), ProtocolError);
}

TEST_CASE("http backend with nothing listening is a transport error") {
    HttpEndpoint ep;
    ep.base_url = "http://127.0.0.1:1";
    ep.api_key_env = "";
    Recorder rec;
    Gateway gw(std::make_shared<HttpBackend>(ep), rec.options(1));
    CHECK_THROWS_AS(gw.generate(req("ping")), TransportError);
    CHECK(rec.waits.size() == 1);
}

TEST_CASE("http embedder") {
    FakeServer server({200});
    HttpEmbedder emb(server.endpoint());
    auto v = embed_texts(emb, {"a", "b"});
    REQUIRE(v.size() == 2);
    CHECK(v[0][0] == doctest::Approx(0.6));
    CHECK(v[0][1] == doctest::Approx(0.8));
}

TEST_CASE("batch keeps input order and respects the cap") {
    auto mock = std::make_shared<MockBackend>();
    for (int i = 0; i < 24; ++i) mock->script("p" + std::to_string(i), "r" + std::to_string(i));
    mock->set_latency(2ms);
    Recorder rec;
    Gateway gw(mock, rec.options(0, 3));
    std::vector<GenerationRequest> reqs;
    for (int i = 0; i < 24; ++i) reqs.push_back(req("p" + std::to_string(i)));
    auto out = gw.generate_batch(reqs);
    REQUIRE(out.size() == 24);
    for (int i = 0; i < 24; ++i) CHECK(out[i].text == "r" + std::to_string(i));
    CHECK(mock->max_in_flight() <= 3);
    CHECK(mock->max_in_flight() >= 1);
}

TEST_CASE("parallel_map rethrows the lowest failing index") {
    try {
        parallel_map(50, 4, [](std::size_t i) -> int {
            if (i == 7 || i == 30) throw std::runtime_error("fail " + std::to_string(i));
            return static_cast<int>(i);
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "fail 7");
    }
    auto sq = parallel_map(10, 3, [](std::size_t i) { return i * i; });
    CHECK(sq[9] == 81);
}

TEST_CASE("mock entries are consumed in order and the last repeats") {
    std::vector<TranscriptEntry> t{{sha256_hex("q"), 0, 200, "one"}, {sha256_hex("q"), 0, 200, "two"},
                                   {sha256_hex("q"), 1, 200, "other"}};
    MockBackend m(t);
    CHECK(m.complete(req("q")).text == "one");
    CHECK(m.complete(req("q")).text == "two");
    CHECK(m.complete(req("q")).text == "two");
    CHECK(m.complete(req("q", 1)).text == "other");
    auto dir = oracle::temp_dir("transcript");
    write_transcript(dir / "t.jsonl", t);
    auto back = read_transcript(dir / "t.jsonl");
    REQUIRE(back.size() == 3);
    CHECK(back[2].sample == 1);
    CHECK(back[1].response == "two");
}

TEST_CASE("synthetic fallback is deterministic") {
    MockBackend a({}, MockFallback::synthetic), b({}, MockFallback::synthetic);
    auto p = req("The following text comes from a social media forum. Summarize the text in a maximum of 2 "
                 "sentences. Do not hallucinate and do not say that the text is too short to summarize.\n\nhi");
    CHECK(a.complete(p).text == b.complete(p).text);
    CHECK(a.served().size() == 1);
}

TEST_CASE("embedding helpers") {
    CHECK(l2_normalize(std::vector<double>{3, 4}) == std::vector<double>{0.6, 0.8});
    CHECK_THROWS_AS(l2_normalize(std::vector<double>{0, 0}), ValidationError);
    CHECK(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 2}) == 0.0);

    MockEmbedder m(16);
    CHECK(embed_texts(m, {}).empty());
    auto a = embed_texts(m, {"the cat sat", "a dog"});
    auto b = embed_texts(m, {"the cat sat", "a dog"});
    CHECK(a == b);
    REQUIRE(a.size() == 2);
    double sq = 0;
    for (double x : a[0]) sq += x * x;
    CHECK(std::abs(std::sqrt(sq) - 1.0) < 1e-6);

    FixedEmbedder bad;
    bad.reply = {{1, 0}, {1, 0, 0}};
    CHECK_THROWS_AS(embed_texts(bad, {"x", "y"}), ProtocolError);
    bad.reply = {{1, 0}};
    CHECK_THROWS_AS(embed_texts(bad, {"x", "y"}), ProtocolError);
}

TEST_CASE("json extraction tolerates junk") {
    auto j = extract_json_object("Sure! ```json\n{\"response\": \"a } b\"}\n``` done");
    REQUIRE(j);
    CHECK((*j)["response"] == "a } b");
    CHECK_FALSE(extract_json_object("no json here"));
    CHECK_FALSE(extract_json_object("{\"unterminated\": "));
    auto k = extract_json_object("{bad} {\"ok\": 1}");
    REQUIRE(k);
    CHECK((*k)["ok"] == 1);
}
