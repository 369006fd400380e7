#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ssf/gateway.hpp"
#include "ssf/graph.hpp"
#include "ssf/slot_template.hpp"
#include "ssf/summarizer.hpp"
#include "ssf/taxonomy.hpp"

namespace ssf {

using SlotValues = std::map<std::string, std::string>;

struct Conformance {
    bool ok = false;
    SlotValues slot_values;
    /// More than one segmentation exists; the leftmost one was returned.
    bool ambiguous = false;
    std::string violation;
};

/// Matches `candidate` against the template's fixed segments in order, with
/// every slot filled by non-empty text. Separators are matched leftmost, so
/// earlier slots get the shortest fill.
Conformance check_conformance(const SlotTemplate& tpl, std::string_view candidate);

enum class Variant { standard, known_implausible };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct Inference {
    std::string story_id;
    std::string dimension;
    SlotValues slot_values;
    std::string rendered_text;
    Variant variant = Variant::standard;
    std::string origin;
    int sample = 0;

    json to_json() const;
    static Inference from_json(const json& j);
};

struct GenerationFailure {
    std::string story_id;
    std::string dimension;
    Variant variant = Variant::standard;
    int sample = 0;
    /// "json", "conformance" or "backend".
    std::string kind;
    std::string detail;
    std::string raw;

    json to_json() const;
};

struct GenerationOutcome {
    std::vector<Inference> inferences;
    std::vector<GenerationFailure> failures;
};

/// Everything the generation prompt needs about one story.
struct StoryContext {
    Utterance story;
    ContextSummary context;
    CommunitySummary community;
};

struct GenerationOptions {
    int n = 1;
    /// Attempts per sample before the sample is reported as failed.
    int max_attempts = 3;
    /// Ask for all n inferences in one call instead of one call each.
    bool n_per_call = false;
    int max_tokens = 256;
    double temperature = 0.0;
    std::string none_marker = "(none)";

    void validate() const;
};

std::string render_generation_prompt(const StoryContext& ctx, const Dimension& dim, Variant variant,
                                     int n_per_call = 1, const std::string& none_marker = "(none)");

/// Generates up to n inferences. Nonconforming or unparseable replies are
/// retried, then reported in `failures` with the raw text; they are never
/// repaired. Backend errors are reported the same way.
GenerationOutcome generate_inferences(const StoryContext& ctx, const Dimension& dim, Gateway& gateway,
                                      const GenerationOptions& options, Variant variant = Variant::standard);

GenerationOutcome generate_known_implausible(const StoryContext& ctx, const Dimension& dim, Gateway& gateway,
                                             const GenerationOptions& options);

/// One dimension per story receives a known-implausible inference.
std::map<std::string, std::string> pick_implausible_dimensions(const std::vector<std::string>& story_ids,
                                                              const TaxonomyRegistry& registry,
                                                              std::uint64_t seed);

struct Demonstration {
    std::string text;
    std::set<std::string> labels;
};

struct LabelAssignment {
    std::string story_id;
    std::string dimension;
    Variant variant = Variant::standard;
    int sample = 0;
    std::set<std::string> labels;
    /// "model" or "human".
    std::string source = "model";

    json to_json() const;
    static LabelAssignment from_json(const json& j);
};

struct ClassificationOptions {
    int max_attempts = 3;
    int max_tokens = 128;
};

/// Empty `demos` gives the zero-shot prompt without the Examples section.
std::string render_classification_prompt(const Dimension& dim, std::string_view text,
                                         const std::vector<Demonstration>& demos);

/// Labels parsed from the {"response": [...]} reply. Unknown labels raise
/// ValidationError; a reply that is still not valid JSON after the allowed
/// attempts raises ProtocolError carrying the raw text.
LabelAssignment classify_inference(const Inference& inference, const TaxonomyRegistry& registry, Gateway& gateway,
                                   const std::vector<Demonstration>& demos, const ClassificationOptions& options = {});

}  // namespace ssf
