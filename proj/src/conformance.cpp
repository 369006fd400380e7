#include "ssf/frames.hpp"

namespace ssf {

namespace {

/// Start offsets of fixed[1..n-1], or empty when no segmentation exists.
std::optional<std::vector<std::size_t>> leftmost(const SlotTemplate& t, std::string_view c, std::size_t end) {
    std::vector<std::size_t> pos;
    std::size_t cur = t.fixed.front().size();
    for (std::size_t i = 1; i + 1 < t.fixed.size(); ++i) {
        auto p = c.find(t.fixed[i], cur + 1);
        if (p == std::string_view::npos) return std::nullopt;
        pos.push_back(p);
        cur = p + t.fixed[i].size();
    }
    if (cur + 1 > end) return std::nullopt;
    return pos;
}

std::vector<std::size_t> rightmost(const SlotTemplate& t, std::string_view c, std::size_t end) {
    std::vector<std::size_t> pos(t.fixed.size() - 2);
    std::size_t limit = end;
    for (std::size_t i = t.fixed.size() - 2; i >= 1; --i) {
        // fixed[i] must end at least one character before `limit`
        const auto& f = t.fixed[i];
        auto p = c.rfind(f, limit - 1 - f.size());
        pos[i - 1] = p;
        limit = p;
    }
    return pos;
}

}  // namespace

Conformance check_conformance(const SlotTemplate& tpl, std::string_view candidate) {
    Conformance out;
    const auto& head = tpl.fixed.front();
    const auto& tail = tpl.fixed.back();
    if (tpl.slots.empty()) {
        out.ok = candidate == head;
        if (!out.ok) out.violation = "text differs from the template";
        return out;
    }
    if (candidate.substr(0, head.size()) != head) {
        out.violation = "does not begin with \"" + head + "\"";
        return out;
    }
    if (candidate.size() < head.size() + tail.size() ||
        candidate.substr(candidate.size() - tail.size()) != tail) {
        out.violation = "does not end with \"" + tail + "\"";
        return out;
    }
    const std::size_t end = candidate.size() - tail.size();
    auto left = leftmost(tpl, candidate, end);
    if (!left || (tpl.slots.size() == 1 && end <= head.size())) {
        out.violation = "fixed text between slots is missing or altered, or a slot is empty";
        return out;
    }
    out.ok = true;
    std::size_t cur = head.size();
    for (std::size_t i = 0; i < tpl.slots.size(); ++i) {
        std::size_t stop = i < left->size() ? (*left)[i] : end;
        out.slot_values[tpl.slots[i]] = std::string(candidate.substr(cur, stop - cur));
        if (i < left->size()) cur = stop + tpl.fixed[i + 1].size();
    }
    if (tpl.slots.size() > 1) out.ambiguous = rightmost(tpl, candidate, end) != *left;
    return out;
}

}  // namespace ssf
