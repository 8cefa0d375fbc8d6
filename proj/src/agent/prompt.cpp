#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "vaf/agent.hpp"
#include "vaf/error.hpp"

namespace vaf {

const std::string_view kAgentSystemPrompt =
    R"txt(You are a GUI agent. You are given a task and your action history, with screenshots. You need to perform the next action to complete the task.

## Output Format

Thought: ...
Action: ...

## Action Space

click(start_box='(x1,y1)')
left_double(start_box='(x1,y1)')
right_single(start_box='(x1,y1)')
drag(start_box='(x1,y1)', end_box='(x3,y3)')
hotkey(key='')
type(content='') # If you want to submit your input, use "\n" at the end of `content`.
scroll(start_box='(x1,y1)', direction='down or up or right or left')
wait() # Sleep for 5s and take a screenshot to check for any changes.
finished()
call_user() # Submit the task and call the user when the task is unsolvable, or when you need the user's help.

## Note

- Use English in the `Thought` part.
- Summarize your next action (with its target element) in one sentence in the `Thought` part.
- Output coordinates as integers in the format (x,y).
- **STRATEGY**: Explore the page naturally and make a decision when you find a good option.
- You can scroll down to see more options, scroll up to revisit options you saw earlier, or click to select.
- Make your own judgment about when you've found a suitable option to select.)txt";

const std::string_view kAgentUserTemplate =
    R"txt(## User Instruction

Find the BEST {TARGET_CATEGORY} from this {WEBSITE_OR_PAGE_TYPE}{OPTIONAL_CONTEXT}. You can explore available options by scrolling through the page naturally. If you've seen multiple options across different parts of the page, you can scroll back up to select an option you remember being particularly good. Use your exploration history to make an informed choice.

**Important:**
When selecting, click on the {CLICKABLE_REGION_DESCRIPTION}, **NOT** the center of the page.

**Critical Requirement:**
Your `Thought` **MUST** start **exactly** with:

> I can see the following {VISIBLE_ITEM_PLURAL} on this screen:

**Coordinate Warning:**

followed by a detailed description of each visible {VISIBLE_ITEM_SINGULAR} ({VISIBLE_FIELDS_LIST}). Then explain your next action.

- For scrolling: ALWAYS use `scroll(start_box="({SCROLL_X},{SCROLL_Y})", direction="down/up")`
- For clicking: **NEVER** use ({SCROLL_X},{SCROLL_Y})!
- You MUST use the ACTUAL {VISIBLE_ITEM_SINGULAR}'s coordinates that you see in the image
- Click coordinates should match the exact {VISIBLE_ITEM_SINGULAR} position you can visually identify
- Do **NOT** copy scroll coordinates for clicking actions

{SCROLL_BOUNDARY_RULES_BLOCK}

## Response Format

Thought: [Start with "I can see the following {VISIBLE_ITEM_PLURAL} on this screen:" then list items with details, then explain your decision: either scroll to explore more options (down/up), or click to select an option you find suitable{OPTIONAL_BOUNDARY_SENTENCE}.]
Action: [Either `scroll(start_box="({SCROLL_X},{SCROLL_Y})", direction="down/up")` or `click(start_box="(ACTUAL_X,ACTUAL_Y)")`])txt";

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& fields) {
    std::string out;
    out.reserve(tmpl.size() + 256);
    std::size_t i = 0;
    while (i < tmpl.size()) {
        const char c = tmpl[i];
        if (c == '{') {
            const auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                const std::string_view name = tmpl.substr(i + 1, close - i - 1);
                const bool placeholder = !name.empty() && std::all_of(name.begin(), name.end(), [](char ch) {
                    return std::isupper(static_cast<unsigned char>(ch)) || ch == '_' ||
                           std::isdigit(static_cast<unsigned char>(ch));
                });
                if (placeholder) {
                    auto it = fields.find(std::string(name));
                    if (it == fields.end()) throw Error(Errc::TemplateFieldMissing, std::string(name));
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += c;
        ++i;
    }
    return out;
}

std::map<std::string, std::string> scenario_fields(const std::map<std::string, std::string>& prompt) {
    std::map<std::string, std::string> fields{
        {"OPTIONAL_CONTEXT", ""},
        {"SCROLL_X", std::to_string(kDefaultScrollX)},
        {"SCROLL_Y", std::to_string(kDefaultScrollY)},
    };
    for (const auto& [key, value] : prompt) {
        std::string upper;
        for (char c : key) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        fields[upper] = value;
    }
    return fields;
}

namespace {

void boundary_fields(std::map<std::string, std::string>& fields, const RenderedView& view) {
    const bool top = view.scroll_y <= 0;
    const bool bottom = view.scroll_y >= max_scroll(view.page_height_px);
    std::string block;
    std::string sentence;
    if (top && bottom) {
        block = "**Scroll Boundaries:** The whole page fits on this screen. Scrolling up or down will not show new options.";
        sentence = " (the whole page is already visible, so prefer clicking)";
    } else if (top) {
        block = "**Scroll Boundaries:** You are at the top of the page. Scrolling up will not show new options.";
    } else if (bottom) {
        block = "**Scroll Boundaries:** You have reached the bottom of the page. Scrolling down will not show new options.";
        sentence = " (you are at the bottom of the page, so scroll up or click)";
    }
    fields["SCROLL_BOUNDARY_RULES_BLOCK"] = block;
    fields["OPTIONAL_BOUNDARY_SENTENCE"] = sentence;
}

}  // namespace

PromptPayload build_prompt(const std::map<std::string, std::string>& fields, std::span<const AgentTurn> history,
                           std::span<const RenderedView> views, int max_steps) {
    if (static_cast<int>(history.size()) >= max_steps) {
        throw std::invalid_argument(fmt::format("history of {} turns reaches the step budget {}", history.size(), max_steps));
    }
    if (views.size() != history.size() + 1) {
        throw std::invalid_argument(fmt::format("{} views for {} prior turns", views.size(), history.size()));
    }
    auto filled = fields;
    boundary_fields(filled, views.back());

    PromptPayload p;
    p.step_index = static_cast<int>(history.size());
    p.system_text = std::string(kAgentSystemPrompt);
    p.user_text = fill_template(kAgentUserTemplate, filled);
    p.item_plural = filled.at("VISIBLE_ITEM_PLURAL");
    for (const auto& v : views) p.images.push_back(v.image);

    p.messages.push_back({"system", {{PromptPart::Kind::text, p.system_text, 0}}});
    p.messages.push_back({"user", {{PromptPart::Kind::text, p.user_text, 0}}});
    for (std::size_t k = 0; k < views.size(); ++k) {
        p.messages.push_back({"user", {{PromptPart::Kind::image, {}, k}}});
        if (k < history.size()) p.messages.push_back({"assistant", {{PromptPart::Kind::text, history[k].raw, 0}}});
    }
    return p;
}

}  // namespace vaf
