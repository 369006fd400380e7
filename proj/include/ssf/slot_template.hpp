#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ssf {

/// An inference template such as "Readers would {{verb}} the idea that {{idea}}."
///
/// Stored as alternating fixed text and slot names: fixed[0] slot[0] fixed[1]
/// ... slot[n-1] fixed[n]. Interior fixed segments are never empty, otherwise
/// two adjacent slots could not be told apart.
struct SlotTemplate {
    std::string source;
    std::vector<std::string> fixed;
    std::vector<std::string> slots;

    std::string render(const std::map<std::string, std::string>& values) const;
};

/// Parses `{{name}}` markers. Throws ValidationError on malformed input.
SlotTemplate parse_slot_template(std::string_view text);

}  // namespace ssf
