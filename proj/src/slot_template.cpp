#include "ssf/slot_template.hpp"

#include "ssf/errors.hpp"

namespace ssf {

SlotTemplate parse_slot_template(std::string_view text) {
    SlotTemplate t;
    t.source = std::string(text);
    std::size_t pos = 0;
    std::string current;
    while (pos < text.size()) {
        auto open = text.find("{{", pos);
        if (open == std::string_view::npos) {
            current.append(text.substr(pos));
            break;
        }
        auto close = text.find("}}", open + 2);
        if (close == std::string_view::npos) {
            throw ValidationError("unterminated '{{' in template: " + t.source);
        }
        current.append(text.substr(pos, open - pos));
        std::string name(text.substr(open + 2, close - open - 2));
        if (name.empty() || name.find_first_of("{}") != std::string::npos) {
            throw ValidationError("bad slot name '" + name + "' in template: " + t.source);
        }
        if (!t.slots.empty() && current.empty()) {
            throw ValidationError("adjacent slots in template: " + t.source);
        }
        t.fixed.push_back(std::move(current));
        current.clear();
        t.slots.push_back(std::move(name));
        pos = close + 2;
    }
    t.fixed.push_back(std::move(current));
    for (const auto& f : t.fixed) {
        if (f.find("}}") != std::string::npos) throw ValidationError("stray '}}' in template: " + t.source);
    }
    return t;
}

std::string SlotTemplate::render(const std::map<std::string, std::string>& values) const {
    std::string out = fixed.front();
    for (std::size_t i = 0; i < slots.size(); ++i) {
        auto it = values.find(slots[i]);
        if (it == values.end()) throw ValidationError("no value for slot '" + slots[i] + "'");
        out += it->second;
        out += fixed[i + 1];
    }
    return out;
}

}  // namespace ssf
