#include "ssf/taxonomy.hpp"

#include <algorithm>
#include <map>

#include "ssf/errors.hpp"

namespace ssf {

namespace {

// Which side of the author/reader split each standard dimension sits on.
const std::map<std::string, DimensionGroup>& standard_groups() {
    static const std::map<std::string, DimensionGroup> groups{
        {"overall_goal", DimensionGroup::author_centric},
        {"narrative_intent", DimensionGroup::author_centric},
        {"author_emotional_response", DimensionGroup::author_centric},
        {"causal_explanation", DimensionGroup::reader_centric},
        {"prediction", DimensionGroup::reader_centric},
        {"character_appraisal", DimensionGroup::reader_centric},
        {"moral", DimensionGroup::reader_centric},
        {"stance", DimensionGroup::reader_centric},
        {"narrative_feeling", DimensionGroup::reader_centric},
        {"aesthetic_feeling", DimensionGroup::reader_centric},
    };
    return groups;
}

}  // namespace

std::string to_string(DimensionGroup g) {
    return g == DimensionGroup::author_centric ? "author_centric" : "reader_centric";
}

bool is_snake_case(const std::string& s) {
    if (s.empty() || !(s.front() >= 'a' && s.front() <= 'z') || s.back() == '_') return false;
    char prev = 0;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
        if (!ok || (c == '_' && prev == '_')) return false;
        prev = c;
    }
    return true;
}

bool Dimension::has_label(const std::string& label) const {
    return std::any_of(sublabels.begin(), sublabels.end(), [&](const Sublabel& s) { return s.id == label; });
}

std::vector<std::string> Dimension::label_ids() const {
    std::vector<std::string> out;
    out.reserve(sublabels.size());
    for (const auto& s : sublabels) out.push_back(s.id);
    return out;
}

const Dimension& TaxonomyRegistry::dimension(const std::string& id) const {
    for (const auto& d : dimensions_) {
        if (d.id == id) return d;
    }
    throw ValidationError("unknown dimension: " + id);
}

bool TaxonomyRegistry::contains(const std::string& id) const {
    return std::any_of(dimensions_.begin(), dimensions_.end(), [&](const Dimension& d) { return d.id == id; });
}

std::vector<const Dimension*> TaxonomyRegistry::group(DimensionGroup g) const {
    std::vector<const Dimension*> out;
    for (const auto& d : dimensions_) {
        if (d.group == g) out.push_back(&d);
    }
    return out;
}

void TaxonomyRegistry::validate_labels(const std::string& dimension_id, const std::set<std::string>& labels) const {
    const auto& dim = dimension(dimension_id);
    std::vector<std::string> unknown;
    for (const auto& l : labels) {
        if (!dim.has_label(l)) unknown.push_back(l);
    }
    if (!unknown.empty()) {
        std::string msg = "unknown label(s) for " + dimension_id + ":";
        for (const auto& u : unknown) msg += " " + u;
        throw ValidationError(msg, unknown);
    }
}

json TaxonomyRegistry::to_json() const {
    json dims = json::array();
    for (const auto& d : dimensions_) {
        json subs = json::array();
        for (const auto& s : d.sublabels) {
            json sj{{"id", s.id}, {"definition", s.definition}};
            if (s.notes) sj["notes"] = *s.notes;
            subs.push_back(std::move(sj));
        }
        dims.push_back(json{{"id", d.id},
                            {"name", d.name},
                            {"description", d.description},
                            {"group", ssf::to_string(d.group)},
                            {"template", d.inference_template.source},
                            {"slots", d.inference_template.slots},
                            {"demo_k", d.demo_k},
                            {"guidelines", d.guidelines},
                            {"sublabels", std::move(subs)}});
    }
    return json{{"schema_version", kSchemaVersion},
                {"canonical_templates", canonical_templates_},
                {"dimensions", std::move(dims)}};
}

TaxonomyRegistry load_registry(const json& doc) {
    std::vector<std::string> v;
    TaxonomyRegistry reg;
    if (!doc.is_object()) throw ValidationError("registry document must be a JSON object");
    if (doc.value("schema_version", -1) != TaxonomyRegistry::kSchemaVersion) {
        v.push_back("schema_version must be " + std::to_string(TaxonomyRegistry::kSchemaVersion));
    }
    reg.canonical_templates_ = doc.value("canonical_templates", false);
    if (!doc.contains("dimensions") || !doc["dimensions"].is_array()) {
        throw ValidationError("invalid registry", {"missing dimensions array"});
    }
    const auto& dims = doc["dimensions"];
    if (dims.size() != TaxonomyRegistry::kDimensionCount) {
        v.push_back("expected " + std::to_string(TaxonomyRegistry::kDimensionCount) + " dimensions, found " +
                    std::to_string(dims.size()));
    }
    std::set<std::string> dim_ids;
    for (const auto& dj : dims) {
        Dimension d;
        d.id = dj.value("id", "");
        const std::string where = "dimension '" + d.id + "'";
        if (d.id.empty()) v.push_back("dimension without id");
        if (!dim_ids.insert(d.id).second) v.push_back("duplicate dimension id '" + d.id + "'");
        d.name = dj.value("name", d.id);
        d.description = dj.value("description", "");
        d.guidelines = dj.value("guidelines", "");
        d.demo_k = dj.value("demo_k", std::size_t{10});
        if (d.demo_k == 0) v.push_back(where + ": demo_k must be positive");

        const std::string group = dj.value("group", "");
        if (group == "author_centric") {
            d.group = DimensionGroup::author_centric;
        } else if (group == "reader_centric") {
            d.group = DimensionGroup::reader_centric;
        } else {
            v.push_back(where + ": unknown group '" + group + "'");
        }
        auto std_group = standard_groups().find(d.id);
        if (std_group != standard_groups().end() && (group == "author_centric" || group == "reader_centric") &&
            std_group->second != d.group) {
            v.push_back(where + ": must be " + ssf::to_string(std_group->second));
        }

        std::vector<std::string> declared = dj.value("slots", std::vector<std::string>{});
        try {
            d.inference_template = parse_slot_template(dj.value("template", ""));
            const auto& found = d.inference_template.slots;
            std::set<std::string> seen;
            for (const auto& s : declared) {
                if (!seen.insert(s).second) v.push_back(where + ": duplicate slot '" + s + "'");
                auto n = std::count(found.begin(), found.end(), s);
                if (n == 0) v.push_back(where + ": template is missing slot '" + s + "'");
                if (n > 1) v.push_back(where + ": slot '" + s + "' appears more than once");
            }
            for (const auto& s : found) {
                if (!seen.contains(s)) v.push_back(where + ": template slot '" + s + "' is not declared");
            }
            if (found.empty()) v.push_back(where + ": template has no slots");
            if (declared.size() == found.size() && declared != found) {
                v.push_back(where + ": slots must be listed in template order");
            }
        } catch (const ValidationError& e) {
            v.push_back(where + ": " + e.what());
        }

        std::set<std::string> label_ids;
        for (const auto& sj : dj.value("sublabels", json::array())) {
            Sublabel s;
            s.id = sj.value("id", "");
            s.definition = sj.value("definition", "");
            if (sj.contains("notes") && sj["notes"].is_string()) s.notes = sj["notes"].get<std::string>();
            if (!is_snake_case(s.id)) v.push_back(where + ": sublabel id '" + s.id + "' is not snake_case");
            if (!label_ids.insert(s.id).second) v.push_back(where + ": duplicate sublabel '" + s.id + "'");
            d.sublabels.push_back(std::move(s));
        }
        if (d.sublabels.empty()) v.push_back(where + ": no sublabels");
        reg.dimensions_.push_back(std::move(d));
    }
    if (!v.empty()) {
        std::string msg = "invalid registry (" + std::to_string(v.size()) + " violations)";
        for (const auto& s : v) msg += "\n  - " + s;
        throw ValidationError(msg, v);
    }
    return reg;
}

TaxonomyRegistry load_registry_file(const std::filesystem::path& path) {
    return load_registry(read_json(path));
}

}  // namespace ssf
