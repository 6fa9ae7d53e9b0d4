#pragma once

#include <map>
#include <string>

namespace hopgraph {

// Plain-text template with {name} placeholders. Unknown placeholders are
// left verbatim so prompts may contain literal braces.
class PromptTemplate {
public:
    PromptTemplate() = default;
    explicit PromptTemplate(std::string text);

    static PromptTemplate from_file(const std::string& path);

    std::string render(const std::map<std::string, std::string>& values) const;
    const std::string& text() const { return text_; }

private:
    std::string text_;
};

// The four templates the engine renders. Placeholders:
//   incoming / outgoing : {passage} {min_questions}
//   reason              : {query} {numbered_questions}
//   answer              : {query} {context}
struct PromptSet {
    PromptTemplate incoming;
    PromptTemplate outgoing;
    PromptTemplate reason;
    PromptTemplate answer;

    // Built-in defaults, identical to the files under assets/prompts/.
    static PromptSet defaults();

    // Overrides defaults with <dir>/incoming.txt, outgoing.txt, reason.txt,
    // answer.txt where those files exist.
    static PromptSet from_dir(const std::string& dir);
};

} // namespace hopgraph
