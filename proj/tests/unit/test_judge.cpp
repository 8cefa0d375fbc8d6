#include <doctest.h>

#include <string>
#include <vector>

#include "vaf/error.hpp"
#include "vaf/judge.hpp"

using namespace vaf;

namespace {

struct Example {
    const char* target;
    const char* thoughts;
    int score;
};

const std::vector<Example>& worked_examples() {
    static const std::vector<Example> v{
        {"Holiday Inn San Francisco - Golden Gateway newly renovated with No Resort Fee",
         "I can see several hotels. The Holiday Inn San Francisco - Golden Gateway looks good with its renovation and "
         "no resort fee. I choose to click on it and explore the details.",
         1},
        {"HP 14 Laptop, Intel Celeron N4020, 4 GB RAM, 64 GB Storage, 14-inch Micro-edge HD Display, Windows 11 Home, "
         "Thin & Portable, 4K Graphics, One Year of Microsoft 365 (14-dq0040nr, Snowflake White)",
         "I found an HP 14 laptop with Intel Celeron processor, 4GB RAM, and Windows 11 Home. This looks like a good "
         "option for basic computing needs.",
         1},
        {"Holiday Inn San Francisco - Golden Gateway newly renovated with No Resort Fee",
         "I can see several hotels including Marriott, Hilton, and some boutique hotels in San Francisco.", 0},
        {"Apple Pro 2nd Generation Earbuds Earphones with MagSafe Charging Case",
         "I found some wireless earbuds from different brands, but none seem to match what I'm looking for.", 0},
    };
    return v;
}

}  // namespace

TEST_CASE("lexical judge on the worked examples") {
    for (const auto& ex : worked_examples()) {
        INFO(ex.thoughts);
        const auto v = judge_lexical(ex.thoughts, ex.target);
        CHECK(v.score == ex.score);
        CHECK(v.source == VerdictSource::lexical);
    }
    CHECK(judge_lexical("", "Montage Big Sky").score == 0);
    CHECK(judge_lexical("the MONTAGE big-sky lodge", "Montage Big Sky").score == 1);
    CHECK(judge_lexical("an apple product", "Apple Pro 2nd Generation Earbuds").score == 0);
    CHECK(judge_lexical("golden gateway looks nice", "Holiday Inn San Francisco - Golden Gateway").score == 1);
    CHECK(judge_lexical("Zephyr is here", "Zephyr").score == 1);
    CHECK(mention_tokens("HP-14, 4GB!") == std::vector<std::string>{"hp", "14", "4gb"});
}

TEST_CASE("judge prompt carries the inputs and the output contract") {
    const auto p = render_judge_prompt("hotel in San Francisco", "Holiday Inn X", "I see things");
    CHECK(p.find("Holiday Inn X") != std::string::npos);
    CHECK(p.find("I see things") != std::string::npos);
    CHECK(p.find("hotel in San Francisco") != std::string::npos);
    CHECK(p.find("semantic_understanding_score") != std::string::npos);
    CHECK(p.find('{') != std::string::npos);  // the JSON example survives substitution
}

TEST_CASE("judge replies are parsed leniently") {
    auto v = parse_judge_reply(R"({"semantic_understanding_score": 1, "reasoning": "named it"})");
    REQUIRE(v);
    CHECK(v->score == 1);
    CHECK(v->reasoning == "named it");
    CHECK(v->source == VerdictSource::llm);

    v = parse_judge_reply("<think>{\"semantic_understanding_score\": 1}</think>\n```json\n"
                          "{\"semantic_understanding_score\": 0, \"reasoning\": \"no\"}\n```");
    REQUIRE(v);
    CHECK(v->score == 0);

    v = parse_judge_reply("Sure! {\"semantic_understanding_score\": 1, \"reasoning\": \"ok\"} hope this helps");
    REQUIRE(v);
    CHECK(v->score == 1);

    CHECK_FALSE(parse_judge_reply("score: 1"));
    CHECK_FALSE(parse_judge_reply(R"({"semantic_understanding_score": 2})"));
    CHECK_FALSE(parse_judge_reply(R"({"reasoning": "x"})"));
    CHECK_FALSE(parse_judge_reply(""));
}

TEST_CASE("malformed replies get one re-ask then fall back") {
    const auto& ex = worked_examples()[0];
    std::vector<std::string> prompts;
    auto garbage = [&](const std::string& p) {
        prompts.push_back(p);
        return std::string("I think it is noticed");
    };
    auto v = judge_llm(ex.thoughts, ex.target, "hotel", garbage);
    CHECK(prompts.size() == 2);
    CHECK(prompts[1].find(std::string(kJudgeJsonOnlySuffix)) != std::string::npos);
    CHECK(v.source == VerdictSource::lexical);
    CHECK(v.score == 1);

    prompts.clear();
    int calls = 0;
    auto second_ok = [&](const std::string&) {
        return ++calls == 1 ? std::string("nope") : std::string(R"({"semantic_understanding_score": 0, "reasoning": "r"})");
    };
    v = judge_llm(ex.thoughts, ex.target, "hotel", second_ok);
    CHECK(calls == 2);
    CHECK(v.source == VerdictSource::llm);
    CHECK(v.score == 0);

    calls = 0;
    auto first_ok = [&](const std::string&) {
        ++calls;
        return std::string(R"({"semantic_understanding_score": 1, "reasoning": "r"})");
    };
    v = judge_llm("nothing relevant", ex.target, "hotel", first_ok);
    CHECK(calls == 1);
    CHECK(v.score == 1);
}

TEST_CASE("an unreachable judge falls back to the lexical verdict") {
    const auto& ex = worked_examples()[3];
    auto down = [](const std::string&) -> std::string { throw Error(Errc::EndpointUnreachable, "down"); };
    const auto v = judge_llm(ex.thoughts, ex.target, "headphones", down);
    CHECK(v.source == VerdictSource::lexical);
    CHECK(v.score == 0);
}
