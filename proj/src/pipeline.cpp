#include "ssf/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ssf/analytics.hpp"
#include "ssf/demos.hpp"
#include "ssf/errors.hpp"
#include "ssf/frames.hpp"
#include "ssf/graph.hpp"
#include "ssf/http_backend.hpp"
#include "ssf/parallel.hpp"
#include "ssf/summarizer.hpp"
#include "ssf/validation.hpp"

namespace fs = std::filesystem;

namespace ssf {

namespace {

constexpr const char* kUtterances = "ingest/utterances.jsonl";
constexpr const char* kGraph = "ingest/graph.json";
constexpr const char* kSplits = "curate/splits.jsonl";
constexpr const char* kStratified = "curate/stratified.jsonl";
constexpr const char* kCurationReport = "curate/report.json";
constexpr const char* kContexts = "summarize/contexts.jsonl";
constexpr const char* kCommunities = "summarize/communities.jsonl";
constexpr const char* kSummaryCache = "summarize/cache.jsonl";
constexpr const char* kInferences = "generate/inferences.jsonl";
constexpr const char* kFailures = "generate/failures.jsonl";
constexpr const char* kFrames = "classify/frames.jsonl";
constexpr const char* kDistributions = "analyze/distributions.csv";
constexpr const char* kEntropy = "analyze/entropy.csv";
constexpr const char* kSimilarity = "analyze/similarity.csv";
constexpr const char* kRanking = "analyze/ranking.csv";
constexpr const char* kValidationSummary = "validate/summary.json";
constexpr const char* kReport = "report/summary.json";

std::string file_hash(const fs::path& p) { return sha256_hex(read_text(p)); }

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
    return out;
}

std::string rules_text(const json& rules) {
    if (rules.is_null()) return "";
    if (rules.is_string()) return rules.get<std::string>();
    std::vector<std::string> lines;
    for (const auto& r : rules) lines.push_back(r.get<std::string>());
    return join(lines, "\n");
}

ConversationGraph load_graph(const fs::path& p) { return build_graph(read_records(p)); }

std::map<std::string, std::string> story_communities(const ConversationGraph& g) {
    std::map<std::string, std::string> out;
    for (const auto& u : g.vertices()) out[u.id] = u.community;
    return out;
}

}  // namespace

std::string directory_hash(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto& f : files) acc += fs::relative(f, dir).generic_string() + "\n" + file_hash(f) + "\n";
    return sha256_hex(acc);
}

Pipeline::Pipeline(RunConfig config, fs::path out_dir, std::shared_ptr<TextBackend> backend,
                   std::shared_ptr<EmbeddingBackend> embedder)
    : config_(std::move(config)), out_(std::move(out_dir)), config_hash_(config_.hash()),
      embedder_(std::move(embedder)) {
    config_.validate();
    GatewayOptions opts;
    opts.max_concurrency = config_.gateway.max_concurrency;
    opts.retry.max_retries = config_.gateway.max_retries;
    std::shared_ptr<TextBackend> gen = backend, cls = backend;
    if (!backend) {
        if (config_.gateway.kind == "mock") {
            std::vector<TranscriptEntry> entries;
            if (config_.gateway.transcript) entries = read_transcript(config_.resolve(*config_.gateway.transcript));
            mock_ = std::make_shared<MockBackend>(
                std::move(entries), config_.gateway.synthetic_fallback ? MockFallback::synthetic : MockFallback::none);
            gen = cls = mock_;
        } else {
            HttpEndpoint ep;
            ep.base_url = config_.gateway.base_url;
            ep.api_key_env = config_.gateway.api_key_env;
            ep.timeout = std::chrono::seconds(config_.gateway.timeout_seconds);
            ep.model = config_.gateway.model;
            gen = std::make_shared<HttpBackend>(ep);
            ep.model = config_.gateway.classifier_model;
            cls = std::make_shared<HttpBackend>(ep);
        }
    }
    if (!embedder_) {
        if (config_.gateway.kind == "mock") {
            embedder_ = std::make_shared<MockEmbedder>(config_.gateway.embedding_dim);
        } else {
            HttpEndpoint ep;
            ep.base_url = config_.gateway.base_url;
            ep.api_key_env = config_.gateway.api_key_env;
            ep.timeout = std::chrono::seconds(config_.gateway.timeout_seconds);
            ep.model = config_.gateway.embedding_model;
            embedder_ = std::make_shared<HttpEmbedder>(ep);
        }
    }
    generator_ = std::make_unique<Gateway>(gen, opts);
    classifier_ = std::make_unique<Gateway>(cls, opts);
}

std::size_t Pipeline::backend_attempts() const { return generator_->attempts() + classifier_->attempts(); }

const TaxonomyRegistry& Pipeline::registry() {
    if (!registry_) registry_ = load_registry_file(config_.resolve(config_.registry));
    return *registry_;
}

json Pipeline::provenance(const std::string& stage) const {
    return {{"config_hash", config_hash_}, {"engine_version", std::string(kEngineVersion)}, {"stage", stage}};
}

std::vector<std::string> Pipeline::csv_comments(const std::string& stage) const {
    return {"config_hash=" + config_hash_, "engine_version=" + std::string(kEngineVersion), "stage=" + stage};
}

fs::path Pipeline::require(const std::string& rel, const std::string& producer) const {
    auto p = artifact(rel);
    if (!fs::exists(p)) throw MissingArtifactError(rel, producer);
    return p;
}

std::vector<fs::path> Pipeline::stage_inputs(const std::string& stage) const {
    std::vector<fs::path> in;
    auto opt = [&](const std::optional<fs::path>& p) {
        if (p) in.push_back(config_.resolve(*p));
    };
    const auto transcript = config_.gateway.transcript;
    if (stage == "ingest") {
        in.push_back(config_.resolve(config_.corpus.utterances));
    } else if (stage == "curate") {
        in.push_back(require(kUtterances, "ingest"));
        in.push_back(config_.resolve(config_.corpus.scores));
    } else if (stage == "summarize") {
        in.push_back(require(kUtterances, "ingest"));
        in.push_back(require(kSplits, "curate"));
        in.push_back(require(kStratified, "curate"));
        in.push_back(config_.resolve(config_.corpus.communities));
        opt(transcript);
    } else if (stage == "generate") {
        in.push_back(require(kUtterances, "ingest"));
        in.push_back(require(kContexts, "summarize"));
        in.push_back(require(kCommunities, "summarize"));
        in.push_back(config_.resolve(config_.registry));
        opt(transcript);
    } else if (stage == "classify") {
        in.push_back(require(kInferences, "generate"));
        in.push_back(config_.resolve(config_.registry));
        opt(config_.corpus.demo_pool);
        opt(transcript);
    } else if (stage == "analyze") {
        in.push_back(require(kFrames, "classify"));
        in.push_back(require(kUtterances, "ingest"));
        in.push_back(config_.resolve(config_.registry));
    } else if (stage == "validate") {
        opt(config_.corpus.ratings);
        opt(config_.corpus.gold_labels);
        if (config_.corpus.gold_labels) in.push_back(require(kFrames, "classify"));
    } else if (stage == "report") {
        in.push_back(require(kSimilarity, "analyze"));
        in.push_back(require(kValidationSummary, "validate"));
        in.push_back(require(kFrames, "classify"));
        in.push_back(require(kCurationReport, "curate"));
        in.push_back(require(kGraph, "ingest"));
    } else {
        throw ValidationError("unknown stage: " + stage);
    }
    return in;
}

StageReport Pipeline::run_stage(const std::string& stage, bool force) {
    StageReport rep;
    rep.stage = stage;
    const auto inputs = stage_inputs(stage);
    std::string acc = config_hash_ + "\n" + stage + "\n";
    for (const auto& p : inputs) acc += p.filename().string() + "\n" + file_hash(p) + "\n";
    const auto inputs_hash = sha256_hex(acc);

    const auto stamp_path = out_ / ".stamps" / (stage + ".json");
    if (!force && fs::exists(stamp_path)) {
        auto stamp = read_json(stamp_path);
        bool fresh = stamp.value("inputs_hash", "") == inputs_hash;
        const json outputs = stamp.value("outputs", json::object());
        for (const auto& [rel, h] : outputs.items()) {
            fresh = fresh && fs::exists(artifact(rel)) && file_hash(artifact(rel)) == h.get<std::string>();
        }
        if (fresh) {
            spdlog::info("stage {}: cache hit, outputs up to date", stage);
            rep.cache_hit = true;
            for (const auto& [rel, h] : outputs.items()) rep.outputs.push_back(rel);
            return rep;
        }
    }

    spdlog::info("stage {}: running", stage);
    if (stage == "ingest") rep.outputs = ingest();
    else if (stage == "curate") rep.outputs = curate();
    else if (stage == "summarize") rep.outputs = summarize();
    else if (stage == "generate") rep.outputs = generate();
    else if (stage == "classify") rep.outputs = classify();
    else if (stage == "analyze") rep.outputs = analyze();
    else if (stage == "validate") rep.outputs = validate();
    else rep.outputs = report();

    json outputs = json::object();
    for (const auto& rel : rep.outputs) outputs[rel] = file_hash(artifact(rel));
    write_json(stamp_path, {{"stage", stage},
                            {"config_hash", config_hash_},
                            {"engine_version", kEngineVersion},
                            {"inputs_hash", inputs_hash},
                            {"outputs", outputs}});
    spdlog::info("stage {}: wrote {} artifact(s)", stage, rep.outputs.size());
    return rep;
}

std::vector<StageReport> Pipeline::run_all(bool force) {
    std::vector<StageReport> out;
    for (const auto& s : stage_names()) {
        if (!config_.stage_enabled(s)) {
            spdlog::info("stage {}: disabled in config", s);
            continue;
        }
        out.push_back(run_stage(s, force));
    }
    return out;
}

std::vector<std::string> Pipeline::ingest() {
    auto records = read_records(config_.resolve(config_.corpus.utterances));
    auto g = build_graph(records, {config_.corpus.permissive});
    std::vector<json> rows;
    for (const auto& r : g.to_records()) rows.push_back(record_to_json(r));
    write_jsonl(artifact(kUtterances), rows, provenance("ingest"));
    auto summary = to_json(summarize_graph(g));
    summary["reattached_ids"] = g.reattached();
    summary["_provenance"] = provenance("ingest");
    write_json(artifact(kGraph), summary);
    return {kUtterances, kGraph};
}

std::vector<std::string> Pipeline::curate() {
    auto g = load_graph(artifact(kUtterances));
    std::vector<ScoredText> scored;
    std::vector<std::string> unknown;
    for (const auto& row : read_jsonl(config_.resolve(config_.corpus.scores))) {
        auto s = scored_from_json(row);
        if (!g.contains(s.id)) {
            unknown.push_back(s.id);
            continue;
        }
        const auto& u = g.at(s.id);
        s.community = u.community;
        if (s.masked_text.empty()) s.masked_text = u.text;
        scored.push_back(std::move(s));
    }
    if (!unknown.empty()) throw ValidationError("scores reference unknown utterances: " + join(unknown, ", "), unknown);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

    auto filtered = apply_filters(scored, config_.curation);
    std::vector<Story> stories;
    for (const auto& id : filtered.kept) stories.push_back({id, g.at(id).community});
    auto splits = build_splits(stories, config_.curation);
    auto strat = build_stratified(stories, config_.curation);

    std::vector<json> rows;
    for (const auto& a : splits.assignments) {
        rows.push_back({{"id", a.id}, {"community", a.community}, {"split", to_string(a.split)}, {"heldout", a.heldout}});
    }
    write_jsonl(artifact(kSplits), rows, provenance("curate"));
    rows.clear();
    for (const auto& s : strat.sample) rows.push_back({{"id", s.id}, {"community", s.community}});
    write_jsonl(artifact(kStratified), rows, provenance("curate"));

    json gates = json::object();
    for (const auto& [reason, n] : filtered.counts()) gates[to_string(reason)] = n;
    json rejected = json::object();
    for (const auto& [id, reason] : filtered.rejected) rejected[id] = to_string(reason);
    write_json(artifact(kCurationReport), {{"candidates", scored.size()},
                                           {"kept", filtered.kept.size()},
                                           {"rejections", gates},
                                           {"rejected", rejected},
                                           {"splits", splits.report()},
                                           {"stratified_excluded", strat.excluded_communities},
                                           {"_provenance", provenance("curate")}});
    return {kSplits, kStratified, kCurationReport};
}

std::vector<std::string> Pipeline::summarize() {
    auto g = load_graph(artifact(kUtterances));
    std::vector<std::string> ids;
    for (const auto& row : read_jsonl(artifact(config_.story_set == "all" ? kSplits : kStratified))) {
        ids.push_back(row.at("id").get<std::string>());
    }
    std::sort(ids.begin(), ids.end());

    SummaryCache cache;
    cache.load(artifact(kSummaryCache));
    SummarizerOptions opts;
    opts.passthrough_chars = config_.passthrough_chars;
    Summarizer summarizer(*generator_, cache, opts);

    auto contexts = parallel_map(ids.size(), config_.gateway.max_concurrency, [&](std::size_t i) {
        return summarizer.summarize_context(select_context(g, ids[i], config_.k_anc, config_.k_peer), ids[i]);
    });
    std::vector<json> rows;
    for (const auto& c : contexts) {
        if (!c.complete()) spdlog::warn("story {}: failed stages {}", c.story_id, join(c.failed_stages, ","));
        rows.push_back(c.to_json());
    }
    write_jsonl(artifact(kContexts), rows, provenance("summarize"));

    std::set<std::string> needed;
    for (const auto& id : ids) needed.insert(g.at(id).community);
    std::map<std::string, json> sources;
    for (const auto& row : read_jsonl(config_.resolve(config_.corpus.communities))) {
        sources[row.at("community").get<std::string>()] = row;
    }
    rows.clear();
    for (const auto& name : needed) {
        std::optional<std::string> description, rules;
        if (auto it = sources.find(name); it != sources.end()) {
            if (it->second.contains("description") && it->second["description"].is_string()) {
                description = it->second["description"].get<std::string>();
            }
            if (auto r = rules_text(it->second.value("rules", json(nullptr))); !r.empty()) rules = r;
        } else {
            spdlog::warn("community {} has no description or rules; its summaries are unavailable", name);
        }
        rows.push_back(summarizer.summarize_community(name, description, rules).to_json());
    }
    write_jsonl(artifact(kCommunities), rows, provenance("summarize"));
    cache.save(artifact(kSummaryCache), provenance("summarize"));
    spdlog::info("summary cache: {} hits, {} misses", cache.hits(), cache.misses());
    return {kContexts, kCommunities, kSummaryCache};
}

std::vector<std::string> Pipeline::generate() {
    const auto& reg = registry();
    auto g = load_graph(artifact(kUtterances));
    std::map<std::string, CommunitySummary> communities;
    for (const auto& row : read_jsonl(artifact(kCommunities))) {
        auto c = CommunitySummary::from_json(row);
        communities[c.community] = c;
    }
    std::vector<StoryContext> stories;
    for (const auto& row : read_jsonl(artifact(kContexts))) {
        StoryContext ctx;
        ctx.context = ContextSummary::from_json(row);
        ctx.story = g.at(ctx.context.story_id);
        if (auto it = communities.find(ctx.story.community); it != communities.end()) ctx.community = it->second;
        else ctx.community.community = ctx.story.community;
        stories.push_back(std::move(ctx));
    }
    std::vector<std::string> ids;
    for (const auto& s : stories) ids.push_back(s.story.id);
    std::map<std::string, std::string> implausible;
    if (config_.inject_implausible) implausible = pick_implausible_dimensions(ids, reg, derive_seed(*config_.rng_seed, "implausible"));

    struct Item {
        std::size_t story;
        const Dimension* dim;
        Variant variant;
    };
    std::vector<Item> items;
    for (std::size_t s = 0; s < stories.size(); ++s) {
        for (const auto& d : reg.dimensions()) {
            items.push_back({s, &d, Variant::standard});
            if (implausible.contains(stories[s].story.id) && implausible[stories[s].story.id] == d.id) {
                items.push_back({s, &d, Variant::known_implausible});
            }
        }
    }
    GenerationOptions opts;
    opts.n = config_.inferences_per_dimension;
    opts.max_attempts = config_.generation_attempts;
    opts.n_per_call = config_.n_per_call;
    auto outcomes = parallel_map(items.size(), config_.gateway.max_concurrency, [&](std::size_t i) {
        const auto& it = items[i];
        return it.variant == Variant::standard
                   ? generate_inferences(stories[it.story], *it.dim, *generator_, opts)
                   : generate_known_implausible(stories[it.story], *it.dim, *generator_, opts);
    });
    std::vector<json> rows, failures;
    for (const auto& o : outcomes) {
        for (const auto& inf : o.inferences) rows.push_back(inf.to_json());
        for (const auto& f : o.failures) failures.push_back(f.to_json());
    }
    write_jsonl(artifact(kInferences), rows, provenance("generate"));
    write_jsonl(artifact(kFailures), failures, provenance("generate"));
    spdlog::info("generated {} inferences, {} failures", rows.size(), failures.size());
    return {kInferences, kFailures};
}

std::vector<std::string> Pipeline::classify() {
    const auto& reg = registry();
    std::vector<Inference> inferences;
    for (const auto& row : read_jsonl(artifact(kInferences))) inferences.push_back(Inference::from_json(row));

    const bool k_shot = config_.classification_mode == "k_shot";
    std::map<std::string, DemoPool> pools;
    std::map<std::string, std::vector<double>> query_vectors;
    if (k_shot) {
        for (auto& c : read_demo_pool(config_.resolve(*config_.corpus.demo_pool))) {
            if (!reg.contains(c.dimension)) throw ValidationError("demo " + c.id + " has unknown dimension " + c.dimension);
            reg.validate_labels(c.dimension, c.labels);
            pools[c.dimension].dimension = c.dimension;
            pools[c.dimension].candidates.push_back(std::move(c));
        }
        for (auto& [dim, pool] : pools) {
            pool.lambda_mmr = config_.lambda_mmr;
            std::vector<std::string> texts;
            for (const auto& c : pool.candidates) texts.push_back(c.text);
            auto vecs = embed_texts(*embedder_, texts);
            for (std::size_t i = 0; i < vecs.size(); ++i) pool.candidates[i].embedding = std::move(vecs[i]);
        }
        std::set<std::string> unique;
        for (const auto& inf : inferences) unique.insert(inf.rendered_text);
        std::vector<std::string> texts(unique.begin(), unique.end());
        auto vecs = embed_texts(*embedder_, texts);
        for (std::size_t i = 0; i < texts.size(); ++i) query_vectors[texts[i]] = std::move(vecs[i]);
    }

    ClassificationOptions opts;
    opts.max_attempts = config_.classification_attempts;
    auto labels = parallel_map(inferences.size(), config_.gateway.max_concurrency, [&](std::size_t i) {
        const auto& inf = inferences[i];
        std::vector<Demonstration> demos;
        if (k_shot) {
            auto it = pools.find(inf.dimension);
            if (it == pools.end()) throw ValidationError("no demonstrations for dimension " + inf.dimension);
            const std::size_t k = config_.demo_k.value_or(reg.dimension(inf.dimension).demo_k);
            Rng rng(derive_seed(*config_.rng_seed, "demos:" + inf.story_id + "/" + inf.dimension + "/" +
                                                      to_string(inf.variant) + "/" + std::to_string(inf.sample)));
            for (auto idx : sample_demos(it->second, query_vectors.at(inf.rendered_text), k, rng)) {
                const auto& c = it->second.candidates[idx];
                demos.push_back({c.text, c.labels});
            }
        }
        return classify_inference(inf, reg, *classifier_, demos, opts);
    });
    std::vector<json> rows;
    for (std::size_t i = 0; i < inferences.size(); ++i) {
        auto row = inferences[i].to_json();
        row["labels"] = labels[i].labels;
        row["label_source"] = labels[i].source;
        rows.push_back(std::move(row));
    }
    write_jsonl(artifact(kFrames), rows, provenance("classify"));
    return {kFrames};
}

std::vector<std::string> Pipeline::analyze() {
    const auto& reg = registry();
    auto g = load_graph(require(kUtterances, "ingest"));
    const auto community_of = story_communities(g);

    std::vector<Inference> inferences;
    std::vector<LabelAssignment> assignments;
    for (const auto& row : read_jsonl(artifact(kFrames))) {
        auto inf = Inference::from_json(row);
        LabelAssignment a;
        a.story_id = inf.story_id;
        a.dimension = inf.dimension;
        a.variant = inf.variant;
        a.sample = inf.sample;
        a.labels = row.at("labels").get<std::set<std::string>>();
        a.source = row.value("label_source", "model");
        reg.validate_labels(a.dimension, a.labels);
        assignments.push_back(std::move(a));
        if (inf.variant == Variant::standard) inferences.push_back(std::move(inf));
    }

    std::set<std::string> community_set;
    for (const auto& inf : inferences) community_set.insert(community_of.at(inf.story_id));
    const std::vector<std::string> communities(community_set.begin(), community_set.end());
    std::vector<std::string> outputs;

    // distributions and entropy
    CsvTable dist{{"community", "dimension", "label", "count", "probability"}, {}};
    CsvTable ent{{"community", "group", "normalized_entropy", "dimensions"}, {}};
    std::vector<std::optional<std::string>> scopes{std::nullopt};
    for (const auto& c : communities) scopes.emplace_back(c);
    for (const auto& scope : scopes) {
        std::map<std::string, LabelDistribution> by_dim;
        for (const auto& dim : reg.dimensions()) {
            auto d = sublabel_distribution(assignments, dim, community_of, scope);
            for (std::size_t i = 0; i < d.labels.size(); ++i) {
                dist.rows.push_back({d.community, dim.id, d.labels[i], std::to_string(d.counts[i]),
                                     d.defined() ? format_number(static_cast<double>(d.counts[i]) /
                                                                 static_cast<double>(d.total))
                                                 : "NA"});
            }
            by_dim[dim.id] = std::move(d);
        }
        for (auto group : {DimensionGroup::author_centric, DimensionGroup::reader_centric}) {
            auto ge = group_entropy(by_dim, reg, group);
            ent.rows.push_back({scope.value_or("*"), to_string(group), format_number(ge.value),
                                std::to_string(ge.dimensions)});
        }
    }
    write_csv(artifact(kDistributions), dist, csv_comments("analyze"));
    write_csv(artifact(kEntropy), ent, csv_comments("analyze"));
    outputs.push_back(kDistributions);
    outputs.push_back(kEntropy);

    for (const auto& [a, b] : config_.npmi_pairs) {
        auto m = npmi(assignments, reg.dimension(a), reg.dimension(b));
        CsvTable t{{a, b, "npmi", "stories"}, {}};
        for (std::size_t i = 0; i < m.rows.size(); ++i) {
            for (std::size_t j = 0; j < m.cols.size(); ++j) {
                t.rows.push_back({m.rows[i], m.cols[j],
                                  m.values[i][j] ? format_number(*m.values[i][j]) : "NA", std::to_string(m.stories)});
            }
        }
        const std::string rel = "analyze/npmi_" + a + "__" + b + ".csv";
        write_csv(artifact(rel), t, csv_comments("analyze"));
        outputs.push_back(rel);
    }

    // community similarity
    std::set<std::string> slot_texts;
    for (const auto& inf : inferences) {
        for (const auto& [slot, value] : inf.slot_values) slot_texts.insert(value);
    }
    const std::vector<std::string> texts(slot_texts.begin(), slot_texts.end());
    auto vecs = embed_texts(*embedder_, texts);
    std::map<std::string, const std::vector<double>*> vec_of;
    for (std::size_t i = 0; i < texts.size(); ++i) vec_of[texts[i]] = &vecs[i];
    std::vector<EmbeddedInference> embedded;
    for (const auto& inf : inferences) {
        EmbeddedInference e{inf.story_id, inf.dimension, {}};
        for (const auto& slot : reg.dimension(inf.dimension).inference_template.slots) {
            e.slot_embeddings.push_back(*vec_of.at(inf.slot_values.at(slot)));
        }
        embedded.push_back(std::move(e));
    }
    std::vector<CommunityProfile> profiles;
    for (const auto& c : communities) profiles.push_back(build_profile(c, embedded, assignments, community_of, reg));

    CsvTable sim{{"community_a", "community_b", "ssf_sim_gen", "ssf_sim_class", "gen_dimensions", "class_dimensions",
                  "partial"},
                 {}};
    std::vector<PairScore> pairs;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        for (std::size_t j = i + 1; j < profiles.size(); ++j) {
            auto gen = ssf_sim_gen(profiles[i], profiles[j]);
            auto cls = ssf_sim_class(profiles[i], profiles[j], config_.js_mode);
            sim.rows.push_back({profiles[i].community, profiles[j].community, format_number(gen.value),
                                format_number(cls.value), std::to_string(gen.dimensions),
                                std::to_string(cls.dimensions), (gen.partial || cls.partial) ? "true" : "false"});
            if (!std::isnan(gen.value) && !std::isnan(cls.value)) {
                pairs.push_back({profiles[i].community, profiles[j].community, gen.value, cls.value});
            }
        }
    }
    auto comments = csv_comments("analyze");
    comments.push_back(std::string("js=") + (config_.js_mode == JsMode::distance ? "distance" : "divergence"));
    write_csv(artifact(kSimilarity), sim, comments);

    auto ranking = composite_ranking(pairs, config_.lambda_rank);
    CsvTable rank{{"position", "community_a", "community_b", "gen_score", "class_score", "gen_rank", "class_rank",
                   "composite"},
                  {}};
    for (std::size_t i = 0; i < ranking.pairs.size(); ++i) {
        const auto& p = ranking.pairs[i];
        rank.rows.push_back({std::to_string(i + 1), p.a, p.b, format_number(p.gen_score), format_number(p.class_score),
                             format_number(p.gen_rank), format_number(p.class_rank), format_number(p.composite)});
    }
    comments.push_back("lambda_rank=" + format_number(config_.lambda_rank));
    write_csv(artifact(kRanking), rank, comments);
    outputs.push_back(kSimilarity);
    outputs.push_back(kRanking);
    return outputs;
}

std::vector<std::string> Pipeline::validate() {
    json summary{{"_provenance", provenance("validate")}};
    std::vector<std::string> outputs;
    if (config_.corpus.ratings) {
        auto ratings = read_ratings_csv(config_.resolve(*config_.corpus.ratings));
        auto filtered = quality_filter(ratings, config_.dimensions_per_story);
        CsvTable kept{{"annotator_id", "story_id", "dimension", "variant", "rating", "inference_ref"}, {}};
        for (const auto& r : filtered.kept) {
            kept.rows.push_back({r.annotator_id, r.story_id, r.dimension, to_string(r.variant), to_string(r.rating),
                                 r.inference_ref});
        }
        CsvTable disc{{"annotator_id", "story_id", "discarded_ratings"}, {}};
        for (const auto& d : filtered.discarded) disc.rows.push_back({d.annotator_id, d.story_id, std::to_string(d.ratings)});
        CsvTable plaus{{"dimension", "ratings", "plausible_rate", "likely_rate"}, {}};
        for (const auto& p : plausibility_summary(filtered.kept)) {
            plaus.rows.push_back({p.dimension, std::to_string(p.ratings), format_number(p.plausible), format_number(p.likely)});
        }
        write_csv(artifact("validate/kept_ratings.csv"), kept, csv_comments("validate"));
        write_csv(artifact("validate/discarded.csv"), disc, csv_comments("validate"));
        write_csv(artifact("validate/plausibility.csv"), plaus, csv_comments("validate"));
        outputs.insert(outputs.end(), {"validate/kept_ratings.csv", "validate/discarded.csv", "validate/plausibility.csv"});
        summary["ratings"] = {{"total", ratings.size()},
                              {"kept", filtered.kept.size()},
                              {"discarded", filtered.discarded_ratings},
                              {"discarded_groups", filtered.discarded.size()},
                              {"warnings", filtered.warnings}};
    } else {
        summary["ratings"] = nullptr;
    }

    if (config_.corpus.gold_labels) {
        const auto& reg = registry();
        auto key = [](const json& row) {
            return row.at("story_id").get<std::string>() + "|" + row.at("dimension").get<std::string>() + "|" +
                   std::to_string(row.value("sample", 0));
        };
        std::map<std::string, std::map<std::string, std::set<std::string>>> gold, pred;
        for (const auto& row : read_jsonl(config_.resolve(*config_.corpus.gold_labels))) {
            auto labels = row.at("labels").get<std::set<std::string>>();
            reg.validate_labels(row.at("dimension").get<std::string>(), labels);
            gold[row.at("dimension").get<std::string>()][key(row)] = std::move(labels);
        }
        for (const auto& row : read_jsonl(artifact(kFrames))) {
            if (row.value("variant", "standard") != "standard") continue;
            const auto dim = row.at("dimension").get<std::string>();
            auto it = gold.find(dim);
            if (it == gold.end() || !it->second.contains(key(row))) continue;
            pred[dim][key(row)] = row.at("labels").get<std::set<std::string>>();
        }
        CsvTable agree{{"dimension", "items", "micro_f1", "macro_f1", "mean_jaccard"}, {}};
        for (const auto& [dim, g] : gold) {
            auto f1 = multilabel_f1(pred[dim], g);
            double jac = 0.0;
            for (const auto& [id, labels] : g) {
                auto it = pred[dim].find(id);
                jac += jaccard(it == pred[dim].end() ? std::set<std::string>{} : it->second, labels);
            }
            agree.rows.push_back({dim, std::to_string(g.size()), format_number(f1.micro), format_number(f1.macro),
                                  format_number(jac / static_cast<double>(g.size()))});
        }
        write_csv(artifact("validate/agreement.csv"), agree, csv_comments("validate"));
        outputs.push_back("validate/agreement.csv");
        summary["agreement_dimensions"] = gold.size();
    }
    write_json(artifact(kValidationSummary), summary);
    outputs.push_back(kValidationSummary);
    return outputs;
}

std::vector<std::string> Pipeline::report() {
    json files = json::object();
    for (const auto& stage : stage_names()) {
        if (stage == "report") continue;
        auto stamp_path = out_ / ".stamps" / (stage + ".json");
        if (!fs::exists(stamp_path)) continue;
        files[stage] = read_json(stamp_path).at("outputs");
    }
    auto graph = read_json(artifact(kGraph));
    auto curation = read_json(artifact(kCurationReport));
    auto validation = read_json(artifact(kValidationSummary));
    std::size_t inferences = 0, implausible = 0;
    for (const auto& row : read_jsonl(artifact(kFrames))) {
        ++inferences;
        implausible += row.value("variant", "standard") == "known_implausible";
    }
    std::size_t failures = fs::exists(artifact(kFailures)) ? read_jsonl(artifact(kFailures)).size() : 0;
    auto ranking = read_csv(artifact(kRanking));
    json top = nullptr;
    if (!ranking.rows.empty()) top = {ranking.rows.front()[1], ranking.rows.front()[2]};

    write_json(artifact(kReport), {{"_provenance", provenance("report")},
                                   {"utterances", graph.at("vertices")},
                                   {"stories", curation.at("kept")},
                                   {"inferences", inferences},
                                   {"known_implausible", implausible},
                                   {"generation_failures", failures},
                                   {"most_similar_pair", top},
                                   {"ratings", validation.value("ratings", json(nullptr))},
                                   {"artifacts", files}});
    return {kReport};
}

}  // namespace ssf
