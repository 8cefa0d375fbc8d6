#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vaf/render.hpp"

namespace vaf {

class ChatClient;

// --- action grammar -----------------------------------------------------------

enum class ScrollDirection { up, down, left, right };

std::string_view to_string(ScrollDirection d) noexcept;

namespace action {
struct Click {
    int x = 0;
    int y = 0;
    bool operator==(const Click&) const = default;
};
struct Scroll {
    int x = 0;
    int y = 0;
    ScrollDirection direction = ScrollDirection::down;
    bool operator==(const Scroll&) const = default;
};
struct Finished {
    bool operator==(const Finished&) const = default;
};
struct Wait {
    bool operator==(const Wait&) const = default;
};
struct Type {
    std::string content;
    bool operator==(const Type&) const = default;
};
struct Hotkey {
    std::string key;
    bool operator==(const Hotkey&) const = default;
};
struct Drag {
    int x1 = 0;
    int y1 = 0;
    int x3 = 0;
    int y3 = 0;
    bool operator==(const Drag&) const = default;
};
struct CallUser {
    bool operator==(const CallUser&) const = default;
};
struct Unparseable {
    std::string raw;
    bool operator==(const Unparseable&) const = default;
};
}  // namespace action

using AgentAction = std::variant<action::Click, action::Scroll, action::Finished, action::Wait, action::Type,
                                 action::Hotkey, action::Drag, action::CallUser, action::Unparseable>;

/// Name of the action kind ("click", "scroll", ..., "unparseable").
std::string_view action_kind(const AgentAction& a) noexcept;

/// Emits the action in the agent grammar, e.g. `click(start_box='(512,740)')`.
/// Strings are single-quoted with `\\`, `\'` and `\n` escapes.
std::string format_action(const AgentAction& a);

/// Parses one action call (no "Action:" prefix). Returns nullopt if malformed.
std::optional<AgentAction> parse_action(std::string_view text);

struct AgentTurn {
    std::string thought;
    AgentAction action;
    std::string raw;
    std::int64_t latency_ms = 0;
};

/// Total: anything that lacks a "Thought:" segment followed by an "Action:"
/// segment with a well-formed call yields action::Unparseable{raw}.
AgentTurn parse_turn(std::string_view raw);

std::string format_turn(std::string_view thought, const AgentAction& a);

// --- prompts ------------------------------------------------------------------

inline constexpr int kDefaultScrollX = 640;
inline constexpr int kDefaultScrollY = 600;

struct PromptPart {
    enum class Kind { text, image } kind = Kind::text;
    std::string text;
    std::size_t image_index = 0;
};

struct PromptMessage {
    std::string role;  // system | user | assistant
    std::vector<PromptPart> parts;
};

/// Everything an agent sees at one step. `images` are the viewports of
/// every step so far in chronological order, the last being current.
struct PromptPayload {
    std::string system_text;
    std::string user_text;
    std::vector<ViewportImage> images;
    std::vector<PromptMessage> messages;
    int step_index = 0;
    std::string item_plural;  // filled VISIBLE_ITEM_PLURAL
};

extern const std::string_view kAgentSystemPrompt;
extern const std::string_view kAgentUserTemplate;

/// Substitutes `{NAME}` placeholders. Throws Error(TemplateFieldMissing).
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& fields);

/// Template fields for a scenario: the manifest's prompt keys upper-cased,
/// plus scroll anchor and optional-context defaults.
std::map<std::string, std::string> scenario_fields(const std::map<std::string, std::string>& prompt);

/// `views` holds one rendered view per step so far (history.size() + 1).
PromptPayload build_prompt(const std::map<std::string, std::string>& fields, std::span<const AgentTurn> history,
                           std::span<const RenderedView> views, int max_steps);

// --- agents -------------------------------------------------------------------

struct SamplingParams {
    double temperature = 1.0;
    double top_p = 0.8;
};

struct AgentProfile {
    enum class Kind { remote_chat_endpoint, scripted };
    std::string name = "top_bias";
    Kind kind = Kind::scripted;
    std::string endpoint;
    std::string model;
    int timeout_ms = 120000;
    SamplingParams sampling;
    std::string policy = "top_bias";
    std::vector<double> policy_params{0.5};

    /// Throws Error(InvalidConfig) for out-of-range sampling or unknown policies.
    void validate() const;
};

/// Parses `scripted:top_bias:0.5`, `scripted:saliency:2,2,0.3`,
/// `scripted:uniform`, `scripted:always_scroll_then_click_first` or `remote`.
AgentProfile parse_agent_spec(std::string_view spec, AgentProfile base = {});
std::string agent_spec_string(const AgentProfile& profile);

struct AgentObservation {
    const PromptPayload& prompt;
    const RenderedView& view;
    int step_index = 0;
};

class Agent {
public:
    virtual ~Agent() = default;
    /// Throws EndpointUnreachable, AuthFailure or ResponseTimeout (remote only).
    virtual AgentTurn step(const AgentObservation& obs) = 0;
    /// Scripted agents never read pixels, so the runner can skip them.
    [[nodiscard]] virtual bool needs_images() const noexcept { return false; }
};

/// Creates one stateful agent per trial.
class AgentFactory {
public:
    explicit AgentFactory(AgentProfile profile, std::shared_ptr<ChatClient> client = nullptr);

    [[nodiscard]] std::unique_ptr<Agent> create(std::uint64_t trial_seed) const;
    [[nodiscard]] const AgentProfile& profile() const noexcept { return profile_; }

private:
    AgentProfile profile_;
    std::shared_ptr<ChatClient> client_;
};

std::unique_ptr<Agent> make_top_bias_agent(double p, std::uint64_t seed);
std::unique_ptr<Agent> make_saliency_agent(double w_color, double w_size, double w_rank, std::uint64_t seed);
std::unique_ptr<Agent> make_scroll_then_first_agent();

}  // namespace vaf
