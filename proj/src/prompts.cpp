#include "hopgraph/prompts.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hopgraph/errors.hpp"

namespace hopgraph {

namespace {

constexpr const char* kIncomingDefault =
    R"(You are given a passage. Write questions that the passage itself fully answers.
Each question must be answerable using only the information in the passage.
Write at least {min_questions} questions, one per line, each ending with a question mark.
Do not number the questions and do not add any other text.

Passage:
{passage}
)";

constexpr const char* kOutgoingDefault =
    R"(You are given a passage. Write follow-up questions that a careful reader would
ask next, but that the passage itself cannot answer. Each question should ask
about an entity or event the passage mentions without explaining.
Write at least {min_questions} questions, one per line, each ending with a question mark.
Do not number the questions and do not add any other text.

Passage:
{passage}
)";

constexpr const char* kReasonDefault =
    R"(You are answering the main question below by walking from passage to passage.
The current passage raises the numbered follow-up questions listed here. Pick
the one question whose answer would help most with the main question.
Reply with that question's number and nothing else. If none of them would
help, reply with the word none.

Main question: {query}

Follow-up questions:
{numbered_questions}
)";

constexpr const char* kAnswerDefault =
    R"(Answer the question using only the context passages below. Reply with the
answer text only, no explanation.

Context:
{context}

Question: {query}
Answer:)";

} // namespace

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {
    if (text_.empty()) {
        throw ConfigError("prompt template must not be empty");
    }
}

PromptTemplate PromptTemplate::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open prompt template: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return PromptTemplate(buf.str());
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
    std::string out;
    out.reserve(text_.size());
    std::size_t i = 0;
    while (i < text_.size()) {
        char c = text_[i];
        if (c == '{') {
            auto close = text_.find('}', i + 1);
            if (close != std::string::npos) {
                auto it = values.find(text_.substr(i + 1, close - i - 1));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

PromptSet PromptSet::defaults() {
    PromptSet set;
    set.incoming = PromptTemplate(kIncomingDefault);
    set.outgoing = PromptTemplate(kOutgoingDefault);
    set.reason = PromptTemplate(kReasonDefault);
    set.answer = PromptTemplate(kAnswerDefault);
    return set;
}

PromptSet PromptSet::from_dir(const std::string& dir) {
    PromptSet set = defaults();
    auto maybe = [&](const char* file, PromptTemplate& slot) {
        std::filesystem::path p = std::filesystem::path(dir) / file;
        if (std::filesystem::exists(p)) {
            slot = PromptTemplate::from_file(p.string());
        }
    };
    maybe("incoming.txt", set.incoming);
    maybe("outgoing.txt", set.outgoing);
    maybe("reason.txt", set.reason);
    maybe("answer.txt", set.answer);
    return set;
}

} // namespace hopgraph
