#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ssf/io.hpp"

namespace ssf {

struct Utterance {
    std::string id;
    std::string conversation_id;
    std::string community;
    std::int64_t timestamp = 0;
    std::string text;
    std::optional<std::string> author_hash;
    std::optional<std::string> title;
};

/// Flat input row, as found in a corpus export.
struct RawRecord {
    Utterance utterance;
    std::optional<std::string> parent_id;
};

enum class EdgeType { par, pre };

struct Edge {
    std::string from;
    std::string to;
    EdgeType type;

    bool operator==(const Edge&) const = default;
};

struct BuildOptions {
    /// Reattach records whose parent is missing to their conversation root.
    bool permissive = false;
};

/// Immutable conversation DAG. Holds any number of conversations.
///
/// Every vertex has at most one incoming `par` edge (its parent) and at most
/// one incoming `pre` edge (its chronologically preceding sibling). Queries
/// never mutate and are safe to call concurrently.
class ConversationGraph {
public:
    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t edge_count() const noexcept;

    bool contains(const std::string& id) const { return index_.contains(id); }
    const Utterance& at(const std::string& id) const;
    const std::vector<Utterance>& vertices() const noexcept { return vertices_; }

    std::optional<std::string> parent_of(const std::string& id) const;
    std::optional<std::string> preceding_peer_of(const std::string& id) const;

    /// All edges, par edges first, each group in vertex insertion order.
    std::vector<Edge> edges() const;

    /// Ids whose parent was missing and which were reattached (permissive mode).
    const std::vector<std::string>& reattached() const noexcept { return reattached_; }

    /// Edge count from the vertex to its root along par edges.
    std::size_t depth(const std::string& id) const;

    /// Records that rebuild an identical graph.
    std::vector<RawRecord> to_records() const;

private:
    friend ConversationGraph build_graph(const std::vector<RawRecord>&, const BuildOptions&);

    std::size_t idx(const std::string& id) const;

    std::vector<Utterance> vertices_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::optional<std::size_t>> parent_;
    std::vector<std::optional<std::size_t>> pre_;
    std::vector<std::string> reattached_;
};

ConversationGraph build_graph(const std::vector<RawRecord>& records, const BuildOptions& options = {});

/// Root-first ancestor chain: ancs(parent) + [parent].
std::vector<Utterance> ancestors(const ConversationGraph& g, const std::string& id);

/// Oldest-first chain of preceding siblings: pres(prev) + [prev].
std::vector<Utterance> preceding_peers(const ConversationGraph& g, const std::string& id);

/// What a reader has plausibly seen before reaching an utterance.
struct ContextWindow {
    Utterance initial_post;
    std::vector<Utterance> ancestors;
    std::vector<Utterance> prior_peers;
    std::size_t k_anc = 5;
    std::size_t k_peer = 5;
};

/// Keeps the nearest `k_anc` ancestors and `k_peer` preceding peers.
ContextWindow select_context(const ConversationGraph& g, const std::string& id,
                             std::size_t k_anc = 5, std::size_t k_peer = 5);

struct GraphSummary {
    std::size_t vertices = 0;
    std::size_t par_edges = 0;
    std::size_t pre_edges = 0;
    std::size_t conversations = 0;
    std::size_t max_depth = 0;
    std::size_t reattached = 0;
};

GraphSummary summarize_graph(const ConversationGraph& g);
json to_json(const GraphSummary& s);

RawRecord record_from_json(const json& row);
json record_to_json(const RawRecord& r);
std::vector<RawRecord> read_records(const std::filesystem::path& path);

}  // namespace ssf
