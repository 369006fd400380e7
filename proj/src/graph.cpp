#include "ssf/graph.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ssf/errors.hpp"

namespace ssf {

std::size_t ConversationGraph::idx(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw ValidationError("unknown utterance id: " + id);
    return it->second;
}

const Utterance& ConversationGraph::at(const std::string& id) const { return vertices_[idx(id)]; }

std::optional<std::string> ConversationGraph::parent_of(const std::string& id) const {
    auto p = parent_[idx(id)];
    if (!p) return std::nullopt;
    return vertices_[*p].id;
}

std::optional<std::string> ConversationGraph::preceding_peer_of(const std::string& id) const {
    auto p = pre_[idx(id)];
    if (!p) return std::nullopt;
    return vertices_[*p].id;
}

std::size_t ConversationGraph::edge_count() const noexcept {
    std::size_t n = 0;
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        n += parent_[i].has_value();
        n += pre_[i].has_value();
    }
    return n;
}

std::vector<Edge> ConversationGraph::edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        if (parent_[i]) out.push_back({vertices_[*parent_[i]].id, vertices_[i].id, EdgeType::par});
    }
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        if (pre_[i]) out.push_back({vertices_[*pre_[i]].id, vertices_[i].id, EdgeType::pre});
    }
    return out;
}

std::size_t ConversationGraph::depth(const std::string& id) const {
    std::size_t d = 0;
    for (auto p = parent_[idx(id)]; p; p = parent_[*p]) ++d;
    return d;
}

std::vector<RawRecord> ConversationGraph::to_records() const {
    std::vector<RawRecord> out;
    out.reserve(vertices_.size());
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        RawRecord r{vertices_[i], std::nullopt};
        if (parent_[i]) r.parent_id = vertices_[*parent_[i]].id;
        out.push_back(std::move(r));
    }
    return out;
}

ConversationGraph build_graph(const std::vector<RawRecord>& records, const BuildOptions& options) {
    ConversationGraph g;
    const std::size_t n = records.size();
    g.vertices_.reserve(n);
    g.parent_.assign(n, std::nullopt);
    g.pre_.assign(n, std::nullopt);

    for (const auto& rec : records) {
        const auto& u = rec.utterance;
        if (u.id.empty()) throw ValidationError("utterance with empty id");
        if (u.text.empty()) throw ValidationError("utterance " + u.id + " has empty text");
        if (u.timestamp < 0) throw ValidationError("utterance " + u.id + " has negative timestamp");
        if (!g.index_.emplace(u.id, g.vertices_.size()).second) {
            throw ValidationError("duplicate utterance id: " + u.id);
        }
        g.vertices_.push_back(u);
    }

    // one root per conversation, used to reattach orphans
    std::map<std::string, std::vector<std::size_t>> roots;
    for (std::size_t i = 0; i < n; ++i) {
        if (!records[i].parent_id) roots[records[i].utterance.conversation_id].push_back(i);
    }

    for (std::size_t i = 0; i < n; ++i) {
        const auto& rec = records[i];
        if (!rec.parent_id) continue;
        const auto& pid = *rec.parent_id;
        if (pid == rec.utterance.id) {
            throw ValidationError("utterance " + pid + " lists itself as parent (cycle at " + pid + ")");
        }
        auto it = g.index_.find(pid);
        if (it == g.index_.end()) {
            if (!options.permissive) {
                throw ValidationError("utterance " + rec.utterance.id + " references missing parent " + pid);
            }
            auto r = roots.find(rec.utterance.conversation_id);
            if (r == roots.end() || r->second.size() != 1) {
                throw ValidationError("cannot reattach orphan " + rec.utterance.id +
                                      ": conversation " + rec.utterance.conversation_id +
                                      " has no unique root");
            }
            g.parent_[i] = r->second.front();
            g.reattached_.push_back(rec.utterance.id);
            continue;
        }
        if (g.vertices_[it->second].conversation_id != rec.utterance.conversation_id) {
            throw ValidationError("utterance " + rec.utterance.id + " and its parent " + pid +
                                  " belong to different conversations");
        }
        g.parent_[i] = it->second;
    }

    // par cycles: 0 = unvisited, 1 = on current walk, 2 = known acyclic
    std::vector<std::uint8_t> state(n, 0);
    std::vector<std::size_t> walk;
    for (std::size_t start = 0; start < n; ++start) {
        walk.clear();
        std::optional<std::size_t> cur = start;
        while (cur && state[*cur] == 0) {
            state[*cur] = 1;
            walk.push_back(*cur);
            cur = g.parent_[*cur];
        }
        if (cur && state[*cur] == 1) {
            throw ValidationError("cycle detected through utterance " + g.vertices_[*cur].id);
        }
        for (auto v : walk) state[v] = 2;
    }

    std::map<std::size_t, std::vector<std::size_t>> children;
    for (std::size_t i = 0; i < n; ++i) {
        if (g.parent_[i]) children[*g.parent_[i]].push_back(i);
    }
    for (auto& [parent, kids] : children) {
        std::sort(kids.begin(), kids.end(), [&](std::size_t a, std::size_t b) {
            const auto& ua = g.vertices_[a];
            const auto& ub = g.vertices_[b];
            if (ua.timestamp != ub.timestamp) return ua.timestamp < ub.timestamp;
            return ua.id < ub.id;
        });
        for (std::size_t k = 1; k < kids.size(); ++k) g.pre_[kids[k]] = kids[k - 1];
    }
    return g;
}

std::vector<Utterance> ancestors(const ConversationGraph& g, const std::string& id) {
    std::vector<Utterance> out;
    for (auto p = g.parent_of(id); p; p = g.parent_of(*p)) out.push_back(g.at(*p));
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<Utterance> preceding_peers(const ConversationGraph& g, const std::string& id) {
    std::vector<Utterance> out;
    for (auto p = g.preceding_peer_of(id); p; p = g.preceding_peer_of(*p)) out.push_back(g.at(*p));
    std::reverse(out.begin(), out.end());
    return out;
}

namespace {

template <typename T>
std::vector<T> last_n(std::vector<T> items, std::size_t n) {
    if (items.size() > n) items.erase(items.begin(), items.end() - static_cast<std::ptrdiff_t>(n));
    return items;
}

}  // namespace

ContextWindow select_context(const ConversationGraph& g, const std::string& id, std::size_t k_anc,
                             std::size_t k_peer) {
    auto ancs = ancestors(g, id);
    ContextWindow w;
    w.initial_post = ancs.empty() ? g.at(id) : ancs.front();
    w.ancestors = last_n(std::move(ancs), k_anc);
    w.prior_peers = last_n(preceding_peers(g, id), k_peer);
    w.k_anc = k_anc;
    w.k_peer = k_peer;
    return w;
}

GraphSummary summarize_graph(const ConversationGraph& g) {
    GraphSummary s;
    s.vertices = g.vertex_count();
    std::set<std::string> conversations;
    // memoized depth over vertices in insertion order
    std::unordered_map<std::string, std::size_t> depth;
    for (const auto& u : g.vertices()) {
        conversations.insert(u.conversation_id);
        std::vector<std::string> chain;
        std::optional<std::string> cur = u.id;
        std::size_t base = 0;
        while (cur) {
            auto it = depth.find(*cur);
            if (it != depth.end()) {
                base = it->second + 1;
                break;
            }
            chain.push_back(*cur);
            cur = g.parent_of(*cur);
        }
        // chain.back() is either a root or a child of a memoized vertex
        std::size_t d = cur ? base : 0;
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
            depth[*it] = d;
            s.max_depth = std::max(s.max_depth, d);
            ++d;
        }
        if (g.parent_of(u.id)) ++s.par_edges;
        if (g.preceding_peer_of(u.id)) ++s.pre_edges;
    }
    s.conversations = conversations.size();
    s.reattached = g.reattached().size();
    return s;
}

json to_json(const GraphSummary& s) {
    return json{{"vertices", s.vertices},
                {"edges", s.par_edges + s.pre_edges},
                {"par_edges", s.par_edges},
                {"pre_edges", s.pre_edges},
                {"conversations", s.conversations},
                {"max_depth", s.max_depth},
                {"reattached", s.reattached}};
}

RawRecord record_from_json(const json& row) {
    auto require_string = [&](const char* key) -> std::string {
        if (!row.contains(key) || !row[key].is_string()) {
            std::string id = row.contains("id") && row["id"].is_string() ? row["id"].get<std::string>() : "?";
            throw ValidationError(std::string("record ") + id + ": missing string field '" + key + "'");
        }
        return row[key].get<std::string>();
    };
    RawRecord r;
    r.utterance.id = require_string("id");
    r.utterance.conversation_id = require_string("conversation_id");
    r.utterance.community = require_string("subreddit");
    r.utterance.text = require_string("text");
    if (!row.contains("timestamp") || !row["timestamp"].is_number_integer()) {
        throw ValidationError("record " + r.utterance.id + ": missing integer field 'timestamp'");
    }
    r.utterance.timestamp = row["timestamp"].get<std::int64_t>();
    if (row.contains("parent_id") && !row["parent_id"].is_null()) {
        r.parent_id = row["parent_id"].get<std::string>();
    }
    if (row.contains("title") && row["title"].is_string()) r.utterance.title = row["title"].get<std::string>();
    if (row.contains("author_hash") && row["author_hash"].is_string()) {
        r.utterance.author_hash = row["author_hash"].get<std::string>();
    }
    return r;
}

json record_to_json(const RawRecord& r) {
    const auto& u = r.utterance;
    json row{{"id", u.id},
             {"conversation_id", u.conversation_id},
             {"subreddit", u.community},
             {"timestamp", u.timestamp},
             {"text", u.text},
             {"parent_id", r.parent_id ? json(*r.parent_id) : json(nullptr)}};
    if (u.title) row["title"] = *u.title;
    if (u.author_hash) row["author_hash"] = *u.author_hash;
    return row;
}

std::vector<RawRecord> read_records(const std::filesystem::path& path) {
    std::vector<RawRecord> out;
    for (const auto& row : read_jsonl(path)) out.push_back(record_from_json(row));
    return out;
}

}  // namespace ssf
