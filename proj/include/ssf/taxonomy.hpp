#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ssf/io.hpp"
#include "ssf/slot_template.hpp"

namespace ssf {

enum class DimensionGroup { author_centric, reader_centric };

std::string to_string(DimensionGroup g);

struct Sublabel {
    std::string id;
    std::string definition;
    std::optional<std::string> notes;
};

struct Dimension {
    std::string id;
    std::string name;
    std::string description;
    DimensionGroup group = DimensionGroup::reader_centric;
    SlotTemplate inference_template;
    std::vector<Sublabel> sublabels;
    /// Demonstrations per k-shot classification prompt.
    std::size_t demo_k = 10;
    /// Classification tips shown to the labeling model.
    std::string guidelines;

    bool has_label(const std::string& label) const;
    std::vector<std::string> label_ids() const;
};

/// The ten reader-response dimensions. Immutable once loaded.
class TaxonomyRegistry {
public:
    static constexpr std::size_t kDimensionCount = 10;
    static constexpr int kSchemaVersion = 1;

    const std::vector<Dimension>& dimensions() const noexcept { return dimensions_; }
    const Dimension& dimension(const std::string& id) const;
    bool contains(const std::string& id) const;

    std::vector<const Dimension*> group(DimensionGroup g) const;

    /// Throws ValidationError naming the labels the dimension does not define.
    void validate_labels(const std::string& dimension_id, const std::set<std::string>& labels) const;

    bool canonical_templates() const noexcept { return canonical_templates_; }

    json to_json() const;

private:
    friend TaxonomyRegistry load_registry(const json& doc);

    std::vector<Dimension> dimensions_;
    bool canonical_templates_ = false;
};

/// Validates the whole document and reports every violation at once.
TaxonomyRegistry load_registry(const json& doc);
TaxonomyRegistry load_registry_file(const std::filesystem::path& path);

bool is_snake_case(const std::string& s);

}  // namespace ssf
