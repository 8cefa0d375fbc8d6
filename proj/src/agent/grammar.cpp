#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "vaf/agent.hpp"

namespace vaf {

std::string_view to_string(ScrollDirection d) noexcept {
    switch (d) {
        case ScrollDirection::up: return "up";
        case ScrollDirection::down: return "down";
        case ScrollDirection::left: return "left";
        case ScrollDirection::right: return "right";
    }
    return "down";
}

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

std::string quote(std::string_view s) {
    std::string out = "'";
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\'': out += "\\'"; break;
            case '\n': out += "\\n"; break;
            default: out += c;
        }
    }
    return out + "'";
}

std::string point(int x, int y) { return fmt::format("'({},{})'", x, y); }

}  // namespace

std::string_view action_kind(const AgentAction& a) noexcept {
    static constexpr std::string_view names[] = {"click", "scroll", "finished", "wait", "type",
                                                 "hotkey", "drag", "call_user", "unparseable"};
    return names[a.index()];
}

std::string format_action(const AgentAction& a) {
    return std::visit(
        overloaded{
            [](const action::Click& c) { return fmt::format("click(start_box={})", point(c.x, c.y)); },
            [](const action::Scroll& s) {
                return fmt::format("scroll(start_box={}, direction='{}')", point(s.x, s.y), to_string(s.direction));
            },
            [](const action::Finished&) { return std::string("finished()"); },
            [](const action::Wait&) { return std::string("wait()"); },
            [](const action::Type& t) { return fmt::format("type(content={})", quote(t.content)); },
            [](const action::Hotkey& h) { return fmt::format("hotkey(key={})", quote(h.key)); },
            [](const action::Drag& d) {
                return fmt::format("drag(start_box={}, end_box={})", point(d.x1, d.y1), point(d.x3, d.y3));
            },
            [](const action::CallUser&) { return std::string("call_user()"); },
            [](const action::Unparseable& u) { return u.raw; },
        },
        a);
}

std::string format_turn(std::string_view thought, const AgentAction& a) {
    return fmt::format("Thought: {}\nAction: {}", thought, format_action(a));
}

// --- parser -------------------------------------------------------------------

namespace {

class Cursor {
public:
    explicit Cursor(std::string_view s) : s_(s) {}

    void skip_ws() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool eat(char c) {
        skip_ws();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }
    std::string identifier() {
        skip_ws();
        const std::size_t start = i_;
        while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
        return std::string(s_.substr(start, i_ - start));
    }
    std::optional<std::string> quoted() {
        skip_ws();
        if (i_ >= s_.size() || (s_[i_] != '\'' && s_[i_] != '"')) return std::nullopt;
        const char q = s_[i_++];
        std::string out;
        while (i_ < s_.size()) {
            const char c = s_[i_++];
            if (c == q) return out;
            if (c == '\\' && i_ < s_.size()) {
                const char e = s_[i_++];
                out += e == 'n' ? '\n' : e;
                continue;
            }
            out += c;
        }
        return std::nullopt;
    }
    [[nodiscard]] std::size_t pos() const noexcept { return i_; }

private:
    std::string_view s_;
    std::size_t i_ = 0;
};

std::optional<int> parse_int(std::string_view& s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    int v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end == s.data()) return std::nullopt;
    s.remove_prefix(static_cast<std::size_t>(end - s.data()));
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    return v;
}

// "(x,y)"; a four-number box "(x1,y1,x2,y2)" collapses to its center.
std::optional<std::pair<int, int>> parse_point(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    if (s.empty() || s.front() != '(') return std::nullopt;
    s.remove_prefix(1);
    std::vector<int> nums;
    while (true) {
        auto v = parse_int(s);
        if (!v) return std::nullopt;
        nums.push_back(*v);
        if (s.empty()) return std::nullopt;
        if (s.front() == ',') {
            s.remove_prefix(1);
            continue;
        }
        if (s.front() == ')') break;
        return std::nullopt;
    }
    s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    if (!s.empty()) return std::nullopt;
    if (nums.size() == 2) return std::pair{nums[0], nums[1]};
    if (nums.size() == 4) return std::pair{(nums[0] + nums[2]) / 2, (nums[1] + nums[3]) / 2};
    return std::nullopt;
}

std::optional<AgentAction> parse_call(Cursor& cur) {
    const std::string name = cur.identifier();
    if (name.empty() || !cur.eat('(')) return std::nullopt;
    std::vector<std::pair<std::string, std::string>> args;
    if (!cur.eat(')')) {
        while (true) {
            std::string key = cur.identifier();
            if (key.empty() || !cur.eat('=')) return std::nullopt;
            auto value = cur.quoted();
            if (!value) return std::nullopt;
            args.emplace_back(std::move(key), std::move(*value));
            if (cur.eat(',')) continue;
            if (cur.eat(')')) break;
            return std::nullopt;
        }
    }
    auto arg = [&](std::string_view key) -> const std::string* {
        for (const auto& [k, v] : args) {
            if (k == key) return &v;
        }
        return nullptr;
    };
    auto only = [&](std::initializer_list<std::string_view> keys) {
        for (const auto& [k, v] : args) {
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) return false;
        }
        return args.size() == keys.size();
    };

    if (name == "click") {
        const std::string* box = arg("start_box");
        if (!box || !only({"start_box"})) return std::nullopt;
        auto p = parse_point(*box);
        if (!p) return std::nullopt;
        return action::Click{p->first, p->second};
    }
    if (name == "scroll") {
        const std::string* box = arg("start_box");
        const std::string* dir = arg("direction");
        if (!box || !dir || !only({"start_box", "direction"})) return std::nullopt;
        auto p = parse_point(*box);
        if (!p) return std::nullopt;
        std::optional<ScrollDirection> d;
        for (auto candidate : {ScrollDirection::up, ScrollDirection::down, ScrollDirection::left, ScrollDirection::right}) {
            if (*dir == to_string(candidate)) d = candidate;
        }
        if (!d) return std::nullopt;
        return action::Scroll{p->first, p->second, *d};
    }
    if (name == "drag") {
        const std::string* a = arg("start_box");
        const std::string* b = arg("end_box");
        if (!a || !b || !only({"start_box", "end_box"})) return std::nullopt;
        auto p = parse_point(*a);
        auto q = parse_point(*b);
        if (!p || !q) return std::nullopt;
        return action::Drag{p->first, p->second, q->first, q->second};
    }
    if (name == "type") {
        const std::string* c = arg("content");
        if (!c || !only({"content"})) return std::nullopt;
        return action::Type{*c};
    }
    if (name == "hotkey") {
        const std::string* k = arg("key");
        if (!k || !only({"key"})) return std::nullopt;
        return action::Hotkey{*k};
    }
    // finished may carry a summary message; it carries no meaning here
    if (name == "finished" && (args.empty() || only({"content"}))) return action::Finished{};
    if (name == "wait" && args.empty()) return action::Wait{};
    if (name == "call_user" && args.empty()) return action::CallUser{};
    return std::nullopt;
}

std::string strip_box_tokens(std::string_view raw) {
    std::string out(raw);
    for (std::string_view token : {"<|box_start|>", "<|box_end|>"}) {
        for (auto at = out.find(token); at != std::string::npos; at = out.find(token)) out.erase(at, token.size());
    }
    return out;
}

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

}  // namespace

std::optional<AgentAction> parse_action(std::string_view text) {
    const std::string clean = strip_box_tokens(text);
    Cursor cur(clean);
    auto a = parse_call(cur);
    return a;
}

AgentTurn parse_turn(std::string_view raw) {
    AgentTurn turn;
    turn.raw = std::string(raw);
    turn.action = action::Unparseable{turn.raw};

    const std::string text = strip_box_tokens(raw);
    const auto thought_at = text.find("Thought:");
    if (thought_at == std::string::npos) return turn;
    const auto action_at = text.find("Action:", thought_at);
    if (action_at == std::string::npos) return turn;
    turn.thought = trim(std::string_view(text).substr(thought_at + 8, action_at - thought_at - 8));

    // first well-formed call after "Action:"
    const std::string_view rest = std::string_view(text).substr(action_at + 7);
    for (std::size_t at = 0; at < rest.size(); ++at) {
        if (!std::isalpha(static_cast<unsigned char>(rest[at]))) continue;
        if (at > 0 && (std::isalnum(static_cast<unsigned char>(rest[at - 1])) || rest[at - 1] == '_')) continue;
        Cursor cur(rest.substr(at));
        if (auto a = parse_call(cur)) {
            turn.action = std::move(*a);
            return turn;
        }
    }
    return turn;
}

}  // namespace vaf
