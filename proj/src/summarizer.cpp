#include "ssf/summarizer.hpp"

#include <spdlog/spdlog.h>

#include "ssf/errors.hpp"
#include "ssf/parallel.hpp"
#include "ssf/prompt.hpp"

namespace ssf {

json ContextSummary::to_json() const {
    json prov = json::array();
    for (const auto& p : provenance) {
        prov.push_back({{"stage", p.stage}, {"prompt_hash", p.prompt_hash}, {"backend", p.backend}});
    }
    return {{"story_id", story_id},
            {"initial_post_summary", initial_post_summary},
            {"ancestors_summary", ancestors_summary},
            {"peers_summary", peers_summary},
            {"conversation_summary", conversation_summary},
            {"provenance", prov},
            {"failed_stages", failed_stages}};
}

ContextSummary ContextSummary::from_json(const json& j) {
    ContextSummary s;
    s.story_id = j.at("story_id").get<std::string>();
    s.initial_post_summary = j.value("initial_post_summary", "");
    s.ancestors_summary = j.value("ancestors_summary", "");
    s.peers_summary = j.value("peers_summary", "");
    s.conversation_summary = j.value("conversation_summary", "");
    for (const auto& p : j.value("provenance", json::array())) {
        s.provenance.push_back({p.at("stage"), p.value("prompt_hash", ""), p.value("backend", "")});
    }
    s.failed_stages = j.value("failed_stages", std::vector<std::string>{});
    return s;
}

json CommunitySummary::to_json() const {
    return {{"community", community},
            {"purpose_summary", purpose_summary ? json(*purpose_summary) : json(nullptr)},
            {"values_summary", values_summary ? json(*values_summary) : json(nullptr)}};
}

CommunitySummary CommunitySummary::from_json(const json& j) {
    CommunitySummary s;
    s.community = j.at("community").get<std::string>();
    if (j.contains("purpose_summary") && j["purpose_summary"].is_string()) s.purpose_summary = j["purpose_summary"];
    if (j.contains("values_summary") && j["values_summary"].is_string()) s.values_summary = j["values_summary"];
    return s;
}

std::string SummaryCache::get_or_compute(const Key& key, const std::function<std::string()>& compute) {
    std::unique_lock lock(mu_);
    if (auto it = done_.find(key); it != done_.end()) {
        ++hits_;
        return it->second;
    }
    if (auto it = pending_.find(key); it != pending_.end()) {
        auto fut = it->second;
        ++hits_;
        lock.unlock();
        return fut.get();
    }
    ++misses_;
    std::promise<std::string> promise;
    pending_.emplace(key, promise.get_future().share());
    lock.unlock();
    try {
        std::string value = compute();
        lock.lock();
        done_.emplace(key, value);
        pending_.erase(key);
        lock.unlock();
        promise.set_value(value);
        return value;
    } catch (...) {
        lock.lock();
        pending_.erase(key);
        lock.unlock();
        promise.set_exception(std::current_exception());
        throw;
    }
}

std::optional<std::string> SummaryCache::find(const Key& key) const {
    std::lock_guard lock(mu_);
    auto it = done_.find(key);
    if (it == done_.end()) return std::nullopt;
    return it->second;
}

void SummaryCache::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return;
    std::lock_guard lock(mu_);
    for (const auto& row : read_jsonl(path)) {
        done_[{row.at("id").get<std::string>(), row.at("prompt_hash").get<std::string>()}] =
            row.at("summary").get<std::string>();
    }
}

void SummaryCache::save(const std::filesystem::path& path, const std::optional<json>& provenance) const {
    std::lock_guard lock(mu_);
    std::vector<json> rows;
    for (const auto& [key, value] : done_) {
        rows.push_back({{"id", key.first}, {"prompt_hash", key.second}, {"summary", value}});
    }
    write_jsonl(path, rows, provenance);
}

std::size_t SummaryCache::size() const {
    std::lock_guard lock(mu_);
    return done_.size();
}

Summarizer::Summarizer(Gateway& gateway, SummaryCache& cache, SummarizerOptions options)
    : gateway_(gateway), cache_(cache), options_(std::move(options)) {}

Summarizer::StageResult Summarizer::run_stage(const std::string& stage, const std::string& key_id,
                                              const std::string& prompt) {
    StageResult r;
    r.record = {stage, sha256_hex(prompt), gateway_.backend_tag()};
    try {
        r.text = cache_.get_or_compute({key_id, r.record.prompt_hash}, [&] {
            GenerationRequest req;
            req.prompt = prompt;
            req.max_tokens = options_.max_tokens;
            return gateway_.generate(std::move(req)).text;
        });
    } catch (const Error& e) {
        spdlog::warn("summary stage {} for {} failed: {}", stage, key_id, e.what());
    }
    return r;
}

Summarizer::StageResult Summarizer::utterance_summary(const Utterance& u) {
    if (u.text.size() < options_.passthrough_chars) {
        return {u.text, {"passthrough", "", "none"}};
    }
    return run_stage("utterance", u.id, render(prompts::utterance_summary(), {{"TEXT", u.text}}));
}

ContextSummary Summarizer::summarize_context(const ContextWindow& window, const std::string& story_id) {
    ContextSummary out;
    out.story_id = story_id;
    const bool is_root = window.initial_post.id == story_id;

    // The initial post is covered by its own stage, so it is dropped from the
    // ancestral chain.
    std::vector<Utterance> ancestors;
    for (const auto& a : window.ancestors) {
        if (a.id != window.initial_post.id) ancestors.push_back(a);
    }

    std::vector<const Utterance*> locals{&window.initial_post};
    for (const auto& a : ancestors) locals.push_back(&a);
    for (const auto& p : window.prior_peers) locals.push_back(&p);
    auto local = parallel_map(locals.size(), gateway_.max_concurrency(),
                              [&](std::size_t i) { return utterance_summary(*locals[i]); });
    for (const auto& r : local) out.provenance.push_back(r.record);

    auto fail = [&](const std::string& stage) { out.failed_stages.push_back(stage); };

    // initial post
    if (!local[0].text) {
        fail("utterance:" + window.initial_post.id);
        fail("initial_post");
    } else {
        auto prompt = render(prompts::initial_post_summary(),
                             {{"TITLE", window.initial_post.title.value_or(options_.none_marker)},
                              {"POST_SUMMARY", *local[0].text}});
        auto r = run_stage("initial_post", window.initial_post.id, prompt);
        out.provenance.push_back(r.record);
        if (r.text) out.initial_post_summary = *r.text;
        else fail("initial_post");
    }

    auto chain = [&](const std::string& stage, const PromptTemplate& tpl, std::size_t begin,
                     std::size_t count) -> std::string {
        if (count == 0) return options_.none_marker;
        std::vector<std::string> items;
        for (std::size_t i = begin; i < begin + count; ++i) {
            if (!local[i].text) {
                fail("utterance:" + locals[i]->id);
                fail(stage);
                return {};
            }
            items.push_back(*local[i].text);
        }
        auto prompt = render(tpl, {{"SUMMARY_COUNT", std::to_string(count)},
                                   {"SUMMARY_LIST", prompts::bullet_list(items)}});
        auto r = run_stage(stage, story_id, prompt);
        out.provenance.push_back(r.record);
        if (!r.text) {
            fail(stage);
            return {};
        }
        return *r.text;
    };
    out.ancestors_summary = chain("ancestral_chain", prompts::ancestral_chain_summary(), 1, ancestors.size());
    out.peers_summary =
        chain("peer_chain", prompts::peer_chain_summary(), 1 + ancestors.size(), window.prior_peers.size());

    if (is_root || (ancestors.empty() && window.prior_peers.empty())) {
        out.conversation_summary = out.initial_post_summary;
    } else if (out.failed_stages.empty()) {
        auto prompt = render(prompts::conversation_summary(),
                             {{"ANCESTRAL_CHAIN_SUMMARY", out.ancestors_summary},
                              {"PRECEEDING_PEERS_SUMMARY", out.peers_summary}});
        auto r = run_stage("merge", story_id, prompt);
        out.provenance.push_back(r.record);
        if (r.text) out.conversation_summary = *r.text;
        else fail("merge");
    } else {
        fail("merge");
    }
    return out;
}

CommunitySummary Summarizer::summarize_community(const std::string& community,
                                                 const std::optional<std::string>& description,
                                                 const std::optional<std::string>& rules) {
    CommunitySummary out;
    out.community = community;
    auto present = [](const std::optional<std::string>& s) { return s && !s->empty(); };
    if (present(description)) {
        auto prompt = render(prompts::community_purpose(),
                             {{"SUBREDDIT_NAME", community}, {"SUBREDDIT_PUBLIC_DESCRIPTION", *description}});
        out.purpose_summary = run_stage("community_purpose", "r/" + community, prompt).text;
    }
    if (present(rules)) {
        auto prompt = render(prompts::community_values(),
                             {{"SUBREDDIT_NAME", community},
                              {"SUBREDDIT_DESCRIPTION_SUMMARY", out.purpose_summary.value_or(options_.none_marker)},
                              {"SUBREDDIT_PUBLIC_RULES", *rules}});
        out.values_summary = run_stage("community_values", "r/" + community, prompt).text;
    }
    return out;
}

}  // namespace ssf
