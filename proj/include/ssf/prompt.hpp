#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ssf {

using Bindings = std::map<std::string, std::string>;

/// A gateway prompt with `<<NAME>>` placeholders (NAME is [A-Z0-9_]+).
class PromptTemplate {
public:
    PromptTemplate(std::string name, std::string body);

    const std::string& name() const noexcept { return name_; }
    const std::string& body() const noexcept { return body_; }
    const std::set<std::string>& required() const noexcept { return required_; }

private:
    std::string name_;
    std::string body_;
    std::set<std::string> required_;
};

/// Single-pass substitution. Bound values are inserted literally and never
/// re-expanded. Throws ValidationError ("X unbound") when a placeholder has
/// no binding; bindings the template does not use are logged and, if
/// `unused` is given, reported there.
std::string render(const PromptTemplate& tpl, const Bindings& bindings,
                   std::vector<std::string>* unused = nullptr);

/// Every placeholder name occurring in `text`.
std::set<std::string> find_placeholders(std::string_view text);

/// Prompt catalog used by the pipeline.
namespace prompts {

const PromptTemplate& utterance_summary();
const PromptTemplate& initial_post_summary();
const PromptTemplate& ancestral_chain_summary();
const PromptTemplate& peer_chain_summary();
const PromptTemplate& conversation_summary();
const PromptTemplate& community_purpose();
const PromptTemplate& community_values();
const PromptTemplate& inference_generation();
const PromptTemplate& known_implausible_generation();
const PromptTemplate& inference_classification();

std::vector<const PromptTemplate*> all();

/// "- a\n- b" list used by the chain prompts.
std::string bullet_list(const std::vector<std::string>& items);

}  // namespace prompts

}  // namespace ssf
