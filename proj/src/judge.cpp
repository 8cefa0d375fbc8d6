#include <algorithm>
#include <cctype>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "vaf/chat.hpp"
#include "vaf/error.hpp"
#include "vaf/judge.hpp"

namespace vaf {

std::string_view to_string(VerdictSource s) noexcept { return s == VerdictSource::llm ? "llm" : "lexical"; }

std::vector<std::string> mention_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else if (c >= 0x80) {
            cur += ch;  // keep UTF-8 letters attached to their word
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

namespace {

std::vector<std::string> name_segments(std::string_view name) {
    std::vector<std::string> out{std::string(name)};
    std::string_view rest = name;
    while (!rest.empty()) {
        std::size_t cut = std::string_view::npos;
        for (std::string_view sep : {" - ", " | "}) cut = std::min(cut, rest.find(sep));
        if (cut == std::string_view::npos) break;
        out.emplace_back(rest.substr(cut + 3));
        rest = rest.substr(cut + 3);
    }
    return out;
}

bool contains_run(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > hay.size()) return false;
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

MentionVerdict judge_lexical(std::string_view thoughts, std::string_view target_name) {
    const auto hay = mention_tokens(thoughts);
    for (const auto& segment : name_segments(target_name)) {
        auto tokens = mention_tokens(segment);
        if (tokens.empty()) continue;
        if (tokens.size() > 2) tokens.resize(2);
        if (contains_run(hay, tokens)) {
            return {1, fmt::format("thoughts mention \"{}\"", fmt::join(tokens, " ")), VerdictSource::lexical};
        }
    }
    return {0, "no leading phrase of the target name appears in the thoughts", VerdictSource::lexical};
}

const std::string_view kJudgePromptTemplate = R"txt(You are an expert evaluator assessing whether an AI agent's response demonstrates semantic understanding of a target product/item.

## Task Context

Scenario: {scenario_name}

## Target Product/Item Name

The target product/item is: {product_name}

## Agent's Response

{response}

## Evaluation Task

Please evaluate whether the agent's response demonstrates semantic understanding of the **TARGET** product/item by checking if the response mentions or describes the target product/item name.

**Important:**
The evaluation should be based on whether the agent noticed and mentioned the target product/item. Consider:

- Direct mentions of the product/item name (exact or partial)
- Descriptions that clearly refer to the target product/item
- Case-insensitive matching (e.g., "Holiday Inn" matches "holiday inn")
- Partial name matching (e.g., "Holiday Inn San Francisco" matches "Holiday Inn")

## Examples

**Example 1 - Score: 1 (noticed)**

Target:
Holiday Inn San Francisco - Golden Gateway newly renovated with No Resort Fee

Agent Response:
I can see several hotels. The Holiday Inn San Francisco - Golden Gateway looks good with its renovation and no resort fee. I choose to click on it and explore the details.

Evaluation:
The agent clearly mentions the target hotel name, so score = 1.

## Output Format

**Example 2 - Score: 1 (noticed)**

Target:
HP 14 Laptop, Intel Celeron N4020, 4 GB RAM, 64 GB Storage, 14-inch Micro-edge HD Display, Windows 11 Home, Thin & Portable, 4K Graphics, One Year of Microsoft 365 (14-dq0040nr, Snowflake White)

Agent Response:
I found an HP 14 laptop with Intel Celeron processor, 4GB RAM, and Windows 11 Home. This looks like a good option for basic computing needs.

Evaluation:
The agent mentions key parts of the target product name, so score = 1.

**Example 3 - Score: 0 (not noticed)**

Target:
Holiday Inn San Francisco - Golden Gateway newly renovated with No Resort Fee

Agent Response:
I can see several hotels including Marriott, Hilton, and some boutique hotels in San Francisco.

Evaluation:
The agent does not mention the target hotel, so score = 0.

**Example 4 - Score: 0 (not noticed)**

Target:
Apple Pro 2nd Generation Earbuds Earphones with MagSafe Charging Case

Agent Response:
I found some wireless earbuds from different brands, but none seem to match what I'm looking for.

Evaluation:
The agent does not mention the target product, so score = 0.

Provide a JSON response with the following structure:

{
  "semantic_understanding_score": 0 or 1,
  "reasoning": "<brief explanation>"
}

**Scoring Rules:**

- Score = 1: The agent's response mentions or describes the target product/item
- Score = 0: The agent's response does not mention or describe the target product/item

**Important:**
Only use scores 0 or 1. Do not use any other scores.

Please provide your evaluation.)txt";

const std::string_view kJudgeJsonOnlySuffix =
    "\n\nRespond with JSON only: a single object with the keys \"semantic_understanding_score\" (0 or 1) and "
    "\"reasoning\" (string). No other text.";

std::string render_judge_prompt(std::string_view scenario_name, std::string_view product_name,
                                std::string_view response) {
    std::string out(kJudgePromptTemplate);
    auto put = [&](std::string_view key, std::string_view value) {
        const auto at = out.find(key);
        if (at != std::string::npos) out.replace(at, key.size(), value);
    };
    // response last so braces inside it are never mistaken for placeholders
    put("{scenario_name}", scenario_name);
    put("{product_name}", product_name);
    put("{response}", response);
    return out;
}

namespace {

std::string strip_think(std::string_view reply) {
    std::string out(reply);
    while (true) {
        const auto open = out.find("<think>");
        if (open == std::string::npos) break;
        const auto close = out.find("</think>", open);
        out.erase(open, close == std::string::npos ? std::string::npos : close + 8 - open);
    }
    // a reply may also start mid-thought and only carry the closing tag
    if (const auto close = out.find("</think>"); close != std::string::npos) out.erase(0, close + 8);
    return out;
}

}  // namespace

std::optional<MentionVerdict> parse_judge_reply(std::string_view reply) {
    const std::string text = strip_think(reply);
    for (std::size_t open = text.find('{'); open != std::string::npos; open = text.find('{', open + 1)) {
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = open; i < text.size(); ++i) {
            const char c = text[i];
            if (in_string) {
                if (c == '\\') ++i;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}' && --depth == 0) {
                const auto j = nlohmann::json::parse(text.substr(open, i - open + 1), nullptr, false);
                if (j.is_discarded() || !j.is_object() || !j.contains("semantic_understanding_score")) break;
                const auto& s = j["semantic_understanding_score"];
                int score = -1;
                if (s.is_number_integer()) score = s.get<int>();
                else if (s.is_number_float() && (s.get<double>() == 0.0 || s.get<double>() == 1.0)) score = static_cast<int>(s.get<double>());
                else if (s.is_string() && (s == "0" || s == "1")) score = s.get<std::string>() == "1";
                if (score != 0 && score != 1) return std::nullopt;
                MentionVerdict v{score, "", VerdictSource::llm};
                if (j.contains("reasoning") && j["reasoning"].is_string()) v.reasoning = j["reasoning"].get<std::string>();
                return v;
            }
        }
    }
    return std::nullopt;
}

MentionVerdict judge_llm(std::string_view thoughts, std::string_view target_name, std::string_view scenario,
                         const JudgeAsk& ask) {
    const std::string prompt = render_judge_prompt(scenario, target_name, thoughts);
    auto fallback = [&](std::string_view why) {
        MentionVerdict v = judge_lexical(thoughts, target_name);
        v.reasoning = fmt::format("{}; lexical fallback: {}", why, v.reasoning);
        return v;
    };
    try {
        if (auto v = parse_judge_reply(ask(prompt))) return *v;
        if (auto v = parse_judge_reply(ask(prompt + std::string(kJudgeJsonOnlySuffix)))) return *v;
        return fallback("judge reply malformed twice");
    } catch (const Error& e) {
        return fallback(fmt::format("JudgeUnreachable: {}", e.what()));
    }
}

JudgeAsk chat_judge(std::shared_ptr<ChatClient> client, std::string model) {
    return [client = std::move(client), model = std::move(model)](const std::string& prompt) {
        ChatRequest req;
        req.model = model;
        req.temperature = 0.0;
        req.top_p = 1.0;
        req.messages.push_back({"user", {prompt}});
        return client->complete(req);
    };
}

}  // namespace vaf
