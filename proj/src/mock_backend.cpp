#include "ssf/mock_backend.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>
#include <thread>

#include "ssf/errors.hpp"

namespace ssf {

std::vector<TranscriptEntry> read_transcript(const std::filesystem::path& path) {
    std::vector<TranscriptEntry> out;
    for (const auto& row : read_jsonl(path)) {
        TranscriptEntry e;
        e.prompt_hash = row.at("prompt_hash").get<std::string>();
        e.sample = row.value("sample", 0);
        e.status = row.value("status", 200);
        e.response = row.value("response", std::string{});
        out.push_back(std::move(e));
    }
    return out;
}

void write_transcript(const std::filesystem::path& path, const std::vector<TranscriptEntry>& entries) {
    std::vector<json> rows;
    rows.reserve(entries.size());
    for (const auto& e : entries) {
        json row{{"prompt_hash", e.prompt_hash}, {"sample", e.sample}, {"response", e.response}};
        if (e.status != 200) row["status"] = e.status;
        rows.push_back(std::move(row));
    }
    write_jsonl(path, rows);
}

MockBackend::MockBackend(std::vector<TranscriptEntry> entries, MockFallback fallback, std::string tag)
    : fallback_(fallback), tag_(std::move(tag)) {
    for (auto& e : entries) script_[{e.prompt_hash, e.sample}].push_back(std::move(e));
}

void MockBackend::script(const std::string& prompt, std::string response, int sample, int status) {
    std::lock_guard lock(mu_);
    script_[{sha256_hex(prompt), sample}].push_back({sha256_hex(prompt), sample, status, std::move(response)});
}

BackendReply MockBackend::complete(const GenerationRequest& request) {
    ++calls_;
    const std::size_t now = ++in_flight_;
    for (std::size_t seen = max_in_flight_; now > seen && !max_in_flight_.compare_exchange_weak(seen, now);) {
    }
    struct Leave {
        std::atomic<std::size_t>& n;
        ~Leave() { --n; }
    } leave{in_flight_};
    if (latency_.count() > 0) std::this_thread::sleep_for(latency_);

    Key key{sha256_hex(request.prompt), request.sample_index};
    TranscriptEntry entry;
    {
        std::lock_guard lock(mu_);
        auto it = script_.find(key);
        if (it != script_.end() && !it->second.empty()) {
            entry = it->second.front();
            if (it->second.size() > 1) it->second.pop_front();
        } else if (fallback_ == MockFallback::synthetic) {
            entry = {key.first, key.second, 200, synthetic_reply(request.prompt, request.sample_index)};
        } else {
            throw ProtocolError("mock backend has no transcript for prompt " + key.first.substr(0, 16) +
                                " sample " + std::to_string(key.second));
        }
        if (entry.status >= 200 && entry.status < 300) served_[key] = entry;
    }
    return {entry.status, entry.response, entry.status == 200 ? "" : "scripted status"};
}

std::vector<TranscriptEntry> MockBackend::served() const {
    std::lock_guard lock(mu_);
    std::vector<TranscriptEntry> out;
    for (const auto& [key, e] : served_) out.push_back(e);
    return out;
}

namespace {

std::uint64_t pick(const std::string& prompt, int sample, const std::string& salt) {
    return derive_seed(static_cast<std::uint64_t>(sample), sha256_hex(prompt) + "/" + salt);
}

std::string words(std::string_view text, std::size_t n) {
    std::istringstream in{std::string(text)};
    std::string w, out;
    for (std::size_t i = 0; i < n && in >> w; ++i) out += (out.empty() ? "" : " ") + w;
    while (!out.empty() && std::ispunct(static_cast<unsigned char>(out.back()))) out.pop_back();
    return out;
}

/// Text between `start` and the next `stop` (or the end).
std::string_view section(std::string_view prompt, std::string_view start, std::string_view stop) {
    auto a = prompt.find(start);
    if (a == std::string_view::npos) return {};
    a += start.size();
    auto b = stop.empty() ? std::string_view::npos : prompt.find(stop, a);
    return prompt.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a);
}

const std::map<std::string, std::vector<std::string>>& slot_vocabulary() {
    static const std::map<std::string, std::vector<std::string>> v{
        {"goal", {"persuade others to reconsider", "provide practical advice", "request advice from others",
                  "provide comfort to the poster", "request reassurance", "provide a similar experience",
                  "entertain fellow readers", "affirm who they are"}},
        {"intent", {"clarify what happened", "show what kind of person they are", "justify a choice they made",
                    "release built up frustration", "entertain the thread", "convey that they need support",
                    "convey a similar experience", "revise how they understand the event"}},
        {"emotion", {"fear", "anger", "sadness", "guilt", "joy", "pride", "hope", "relief", "appreciation",
                     "connection", "compassion"}},
        {"feeling", {"compassion", "anger", "joy", "sadness", "hope", "appreciation", "fear", "relief"}},
        {"appraisal", {"positively", "neutrally", "negatively"}},
        {"stance", {"support", "counter", "be neutral toward"}},
        {"response", {"suspense", "curiosity", "surprise", "attention", "transportation into the scene",
                      "evocation of old memories"}},
        {"moral", {"security comes from planning ahead", "benevolence toward friends pays off",
                   "achievement takes patience", "tradition keeps families close",
                   "universalism means treating strangers fairly", "self direction matters more than approval"}},
        {"character", {"the author", "the author's neighbor", "the manager", "the author's sister"}},
        {"subject", {"the author", "the landlord", "the project", "the author's friend"}},
        {"target", {"the author", "the author's coworker", "the situation"}},
    };
    return v;
}

const std::vector<std::string>& generic_vocabulary() {
    static const std::vector<std::string> v{
        "the author kept their promise", "the plan fell through at the last minute",
        "nobody had warned them beforehand", "the situation was handled calmly",
        "they had been through something similar", "the outcome surprised everyone",
        "the family finally talked it over", "the delay cost them a week"};
    return v;
}

const std::vector<std::string>& implausible_vocabulary() {
    static const std::vector<std::string> v{
        "a flock of penguins", "the moon filed a complaint", "the toaster was elected mayor",
        "gravity briefly reversed", "a dragon audited the taxes", "the ocean moved to Ohio"};
    return v;
}

std::string fill_template(const std::string& tpl, const std::string& prompt, int sample, bool implausible) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        auto open = tpl.find("{{", pos);
        auto close = open == std::string::npos ? std::string::npos : tpl.find("}}", open + 2);
        if (close == std::string::npos) {
            out += tpl.substr(pos);
            return out;
        }
        out += tpl.substr(pos, open - pos);
        std::string slot = tpl.substr(open + 2, close - open - 2);
        const auto& vocab = slot_vocabulary();
        auto it = vocab.find(slot);
        const auto& choices =
            implausible ? implausible_vocabulary() : (it != vocab.end() ? it->second : generic_vocabulary());
        out += choices[pick(prompt, sample, slot) % choices.size()];
        pos = close + 2;
    }
}

std::string classify_reply(const std::string& prompt, int sample) {
    std::vector<std::string> labels;
    auto taxonomy = section(section(prompt, "Taxonomy for ", ""), ":\n", "\n\n");
    std::istringstream lines{std::string(taxonomy)};
    for (std::string line; std::getline(lines, line);) {
        if (line.rfind("- ", 0) != 0) continue;
        auto colon = line.find(':');
        labels.push_back(line.substr(2, colon == std::string::npos ? std::string::npos : colon - 2));
    }
    std::string text{section(prompt, "Text to classify:\n", "\n\nOutput Instructions")};
    std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });

    json chosen = json::array();
    for (const auto& label : labels) {
        auto head = label.substr(0, label.find('_'));
        if (head.size() >= 4 && text.find(head) != std::string::npos) chosen.push_back(label);
    }
    if (chosen.empty() && !labels.empty()) chosen.push_back(labels[pick(prompt, sample, "label") % labels.size()]);
    return json{{"response", chosen}}.dump();
}

}  // namespace

std::string synthetic_reply(const std::string& prompt, int sample) {
    if (prompt.find("Using the taxonomy and tips below, classify") == 0) return classify_reply(prompt, sample);

    if (auto at = prompt.rfind("{\"response\": "); at != std::string::npos && prompt.find("description of the") != std::string::npos) {
        auto doc = json::parse(prompt.substr(at), nullptr, false);
        if (!doc.is_discarded() && doc.contains("response")) {
            const bool implausible = prompt.find("**implausible**") != std::string::npos;
            const auto& r = doc["response"];
            if (r.is_string()) {
                return json{{"response", fill_template(r.get<std::string>(), prompt, sample, implausible)}}.dump();
            }
            if (r.is_array()) {
                json filled = json::array();
                for (std::size_t i = 0; i < r.size(); ++i) {
                    filled.push_back(fill_template(r[i].get<std::string>(), prompt, sample * 100 + static_cast<int>(i),
                                                   implausible));
                }
                return json{{"response", filled}}.dump();
            }
        }
    }
    if (prompt.find("'The conversation so far...'") != std::string::npos) {
        return "The conversation so far follows " +
               words(section(prompt, "- Ancestors Summary:\n", "\n- Preceding"), 10) + " and " +
               words(section(prompt, "- Preceding Peers Summary:\n", "\n\n"), 8) + ".";
    }
    if (prompt.find("'The first post...'") != std::string::npos) {
        auto context = section(prompt, "\nContext:\n", "");
        return "The first post, titled \"" + words(section(context, "- Top-level Post Title: ", "\n"), 10) +
               "\", says " + words(section(context, "- Top-level Post Summary: ", "\n"), 12) + ".";
    }
    if (prompt.find("in an ancestral chain") != std::string::npos ||
        prompt.find("under a single parent") != std::string::npos) {
        auto count = words(section(prompt, "Below are ", " summaries"), 1);
        return "Across " + count + " comment(s): " + words(section(prompt, "less.\n- ", ""), 14) + ".";
    }
    if (prompt.find("Summarize key values or norms") == 0) {
        return "Members value " + words(section(prompt, "Rules:\n", ""), 12) + ".";
    }
    if (prompt.find("Summarize the following description of the r/") == 0) {
        return "A community for " + words(section(prompt, "summarize. Output the summary and no other text.\n\n", ""), 12) + ".";
    }
    if (prompt.find("Summarize the text in a maximum of 2 sentences") != std::string::npos) {
        return "The writer says " + words(section(prompt, "too short to summarize.\n\n", ""), 16) + ".";
    }
    return "No synthetic reply for this prompt.";
}

std::vector<std::vector<double>> MockEmbedder::embed(const std::vector<std::string>& texts) {
    ++calls_;
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        std::vector<double> v(dim_, 0.0);
        std::vector<std::string> tokens;
        std::string cur;
        for (char c : text + " ") {
            if (std::isalnum(static_cast<unsigned char>(c))) {
                cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            } else if (!cur.empty()) {
                tokens.push_back(std::move(cur));
                cur.clear();
            }
        }
        if (tokens.empty()) tokens.push_back("<empty>");
        for (const auto& t : tokens) {
            Rng rng(derive_seed(0, "token:" + t));
            for (double& x : v) x += rng.unit() * 2.0 - 1.0;
        }
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace ssf
