#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vaf {

class ChatClient;

enum class VerdictSource { llm, lexical };

std::string_view to_string(VerdictSource s) noexcept;

struct MentionVerdict {
    int score = 0;  // 0 or 1
    std::string reasoning;
    VerdictSource source = VerdictSource::lexical;
};

/// Case-folded alphanumeric tokens; everything else separates tokens.
std::vector<std::string> mention_tokens(std::string_view text);

/// 1 iff the leading two tokens of the target name, or of any " - " or
/// " | " separated part of it, occur contiguously in the thoughts. A
/// one-token name needs that token. Brand tokens alone never match.
MentionVerdict judge_lexical(std::string_view thoughts, std::string_view target_name);

extern const std::string_view kJudgePromptTemplate;
extern const std::string_view kJudgeJsonOnlySuffix;

std::string render_judge_prompt(std::string_view scenario_name, std::string_view product_name,
                                std::string_view response);

/// Reads {"semantic_understanding_score": 0|1, "reasoning": ...} from a
/// reply, ignoring <think> blocks and code fences. nullopt when malformed.
std::optional<MentionVerdict> parse_judge_reply(std::string_view reply);

/// Sends one judge prompt and returns the raw reply text.
using JudgeAsk = std::function<std::string(const std::string& prompt)>;

/// Asks once, re-asks once with a JSON-only suffix on a malformed reply,
/// then falls back to the lexical verdict. Unreachable judges also fall back.
MentionVerdict judge_llm(std::string_view thoughts, std::string_view target_name, std::string_view scenario,
                         const JudgeAsk& ask);

/// Chat-completion transport at temperature 0.
JudgeAsk chat_judge(std::shared_ptr<ChatClient> client, std::string model);

}  // namespace vaf
