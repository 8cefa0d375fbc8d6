#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "vaf/agent.hpp"
#include "vaf/chat.hpp"
#include "vaf/error.hpp"

namespace vaf {

// --- profiles -----------------------------------------------------------------

namespace {

const std::vector<std::string> kPolicies{"top_bias", "saliency", "uniform", "always_scroll_then_click_first"};

std::vector<double> default_params(const std::string& policy) {
    if (policy == "top_bias") return {0.5};
    if (policy == "saliency") return {2.0, 2.0, 0.3};
    return {};
}

std::size_t param_count(const std::string& policy) { return default_params(policy).size(); }

}  // namespace

void AgentProfile::validate() const {
    if (!(sampling.temperature >= 0 && sampling.temperature <= 2)) {
        throw Error(Errc::InvalidConfig, fmt::format("temperature {} outside [0, 2]", sampling.temperature));
    }
    if (!(sampling.top_p >= 0 && sampling.top_p <= 1)) {
        throw Error(Errc::InvalidConfig, fmt::format("top_p {} outside [0, 1]", sampling.top_p));
    }
    if (kind == Kind::remote_chat_endpoint) {
        if (endpoint.empty()) throw Error(Errc::InvalidConfig, "remote agent needs agent.endpoint");
        return;
    }
    if (std::find(kPolicies.begin(), kPolicies.end(), policy) == kPolicies.end()) {
        throw Error(Errc::InvalidConfig, fmt::format("unknown scripted policy '{}'", policy));
    }
    if (policy_params.size() != param_count(policy)) {
        throw Error(Errc::InvalidConfig,
                    fmt::format("policy '{}' takes {} parameters, got {}", policy, param_count(policy), policy_params.size()));
    }
    if (policy == "top_bias" && !(policy_params[0] >= 0 && policy_params[0] <= 1)) {
        throw Error(Errc::InvalidConfig, fmt::format("top_bias probability {} outside [0, 1]", policy_params[0]));
    }
}

AgentProfile parse_agent_spec(std::string_view spec, AgentProfile base) {
    std::vector<std::string> parts;
    {
        std::string s(spec);
        std::size_t start = 0;
        for (int i = 0; i < 2; ++i) {
            const auto colon = s.find(':', start);
            if (colon == std::string::npos) break;
            parts.push_back(s.substr(start, colon - start));
            start = colon + 1;
        }
        parts.push_back(s.substr(start));
    }
    if (parts[0] == "remote") {
        base.kind = AgentProfile::Kind::remote_chat_endpoint;
        if (parts.size() > 1) {
            std::string model = parts[1];
            for (std::size_t i = 2; i < parts.size(); ++i) model += ":" + parts[i];
            base.model = model;
        }
        base.name = base.model.empty() ? "remote" : base.model;
        return base;
    }
    if (parts[0] == "scripted") parts.erase(parts.begin());
    if (parts.empty() || parts[0].empty()) throw Error(Errc::InvalidConfig, fmt::format("bad agent spec '{}'", spec));
    // a parameter list may itself have been split on ':' above; rejoin
    while (parts.size() > 2) {
        parts[1] += ":" + parts[2];
        parts.erase(parts.begin() + 2);
    }
    base.kind = AgentProfile::Kind::scripted;
    base.policy = parts[0];
    base.policy_params = default_params(base.policy);
    if (parts.size() == 2 && !parts[1].empty()) {
        base.policy_params.clear();
        std::stringstream ss(parts[1]);
        std::string item;
        while (std::getline(ss, item, ',')) {
            char* end = nullptr;
            const double v = std::strtod(item.c_str(), &end);
            if (end == item.c_str() || *end != '\0') {
                throw Error(Errc::InvalidConfig, fmt::format("bad policy parameter '{}' in '{}'", item, spec));
            }
            base.policy_params.push_back(v);
        }
    }
    base.name = agent_spec_string(base);
    base.validate();
    return base;
}

std::string agent_spec_string(const AgentProfile& profile) {
    if (profile.kind == AgentProfile::Kind::remote_chat_endpoint) {
        return profile.model.empty() ? "remote" : "remote:" + profile.model;
    }
    std::string out = "scripted:" + profile.policy;
    if (!profile.policy_params.empty()) out += fmt::format(":{}", fmt::join(profile.policy_params, ","));
    return out;
}

// --- scripted policies --------------------------------------------------------

namespace {

action::Click center_click(const VisibleItem& v) {
    return {static_cast<int>(std::floor(v.box.x + v.box.width / 2)), static_cast<int>(std::floor(v.box.y + v.box.height / 2))};
}

bool clickable(const VisibleItem& v) { return v.box.width >= 1 && v.box.height >= 1; }

std::string describe(const AgentObservation& obs, std::string_view decision) {
    std::string labels;
    for (const auto& v : obs.view.visible_items) {
        if (!labels.empty()) labels += "; ";
        labels += v.appearance.label.empty() ? v.selector : v.appearance.label;
    }
    const std::string& plural = obs.prompt.item_plural.empty() ? std::string("items") : obs.prompt.item_plural;
    return fmt::format("I can see the following {} on this screen: {}. {}", plural, labels.empty() ? "none" : labels,
                       decision);
}

AgentTurn scripted_turn(const AgentObservation& obs, std::string_view decision, const AgentAction& a) {
    return parse_turn(format_turn(describe(obs, decision), a));
}

const action::Scroll kScrollDown{kDefaultScrollX, kDefaultScrollY, ScrollDirection::down};
const action::Scroll kScrollUp{kDefaultScrollX, kDefaultScrollY, ScrollDirection::up};

bool at_bottom(const RenderedView& v) { return v.scroll_y >= max_scroll(v.page_height_px); }

// Each item is considered once, when it first comes into view, and accepted
// with probability p. Rank k is chosen with probability p(1-p)^k.
class TopBiasAgent final : public Agent {
public:
    TopBiasAgent(double p, std::uint64_t seed) : accept_(p), rng_(seed) {}

    AgentTurn step(const AgentObservation& obs) override {
        for (const auto& v : obs.view.visible_items) {
            if (!seen_.insert(v.selector).second) continue;
            if (clickable(v) && accept_(rng_)) {
                return scripted_turn(obs, fmt::format("I will click on {}.", v.appearance.label), center_click(v));
            }
        }
        if (at_bottom(obs.view)) return scripted_turn(obs, "Nothing here suits me, so I am done.", action::Finished{});
        return scripted_turn(obs, "I will scroll down to see more options.", kScrollDown);
    }

private:
    std::bernoulli_distribution accept_;
    std::mt19937_64 rng_;
    std::set<std::string> seen_;
};

// Browses to the bottom, then samples one seen item by a softmax over
// colour contrast, relative card area and on-page rank, scrolls back to it
// and clicks it.
class SaliencyAgent final : public Agent {
public:
    SaliencyAgent(double w_color, double w_size, double w_rank, std::uint64_t seed)
        : w_color_(w_color), w_size_(w_size), w_rank_(w_rank), rng_(seed) {}

    AgentTurn step(const AgentObservation& obs) override {
        for (const auto& v : obs.view.visible_items) {
            if (std::none_of(seen_.begin(), seen_.end(), [&](const VisibleItem& s) { return s.selector == v.selector; })) {
                seen_.push_back(v);
            }
        }
        if (!choice_) {
            if (!at_bottom(obs.view)) return scripted_turn(obs, "I will scroll down to see more options.", kScrollDown);
            if (seen_.empty()) return scripted_turn(obs, "There is nothing to choose from.", action::Finished{});
            choose();
        }
        const VisibleItem& pick = seen_[*choice_];
        for (const auto& v : obs.view.visible_items) {
            if (v.selector == pick.selector && clickable(v)) {
                return scripted_turn(obs, fmt::format("I will click on {}.", v.appearance.label), center_click(v));
            }
        }
        const bool above = pick.page_box.y < obs.view.scroll_y;
        return scripted_turn(obs, fmt::format("I will scroll {} back to {}.", above ? "up" : "down", pick.appearance.label),
                             above ? kScrollUp : kScrollDown);
    }

private:
    void choose() {
        std::map<std::tuple<int, int, int>, int> votes;
        for (const auto& s : seen_) ++votes[{s.appearance.background.r, s.appearance.background.g, s.appearance.background.b}];
        const auto common = std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) {
                                return a.second < b.second;
                            })->first;
        const Rgba reference{static_cast<std::uint8_t>(std::get<0>(common)), static_cast<std::uint8_t>(std::get<1>(common)),
                             static_cast<std::uint8_t>(std::get<2>(common)), 255};

        std::vector<double> areas;
        for (const auto& s : seen_) areas.push_back(s.page_box.width * s.page_box.height);
        std::vector<double> sorted = areas;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[sorted.size() / 2];

        std::vector<double> scores;
        for (std::size_t k = 0; k < seen_.size(); ++k) {
            const double color = color_distance(seen_[k].appearance.background, reference);
            const double size = median > 0 && areas[k] > 0 ? std::log(areas[k] / median) : 0.0;
            scores.push_back(w_color_ * color + w_size_ * size - w_rank_ * static_cast<double>(k));
        }
        const double top = *std::max_element(scores.begin(), scores.end());
        std::vector<double> weights;
        for (double s : scores) weights.push_back(std::exp(s - top));
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        choice_ = pick(rng_);
    }

    double w_color_;
    double w_size_;
    double w_rank_;
    std::mt19937_64 rng_;
    std::vector<VisibleItem> seen_;
    std::optional<std::size_t> choice_;
};

class ScrollThenFirstAgent final : public Agent {
public:
    AgentTurn step(const AgentObservation& obs) override {
        if (obs.step_index == 0) return scripted_turn(obs, "I will scroll down to see more options.", kScrollDown);
        for (const auto& v : obs.view.visible_items) {
            if (clickable(v)) return scripted_turn(obs, fmt::format("I will click on {}.", v.appearance.label), center_click(v));
        }
        return scripted_turn(obs, "There is nothing to choose from.", action::Finished{});
    }
};

// --- remote -------------------------------------------------------------------

class RemoteAgent final : public Agent {
public:
    RemoteAgent(std::shared_ptr<ChatClient> client, AgentProfile profile, std::uint64_t seed)
        : client_(std::move(client)), profile_(std::move(profile)), seed_(seed) {}

    bool needs_images() const noexcept override { return true; }

    AgentTurn step(const AgentObservation& obs) override {
        ChatRequest req;
        req.model = profile_.model;
        req.temperature = profile_.sampling.temperature;
        req.top_p = profile_.sampling.top_p;
        req.seed = static_cast<std::int64_t>((seed_ + static_cast<std::uint64_t>(obs.step_index)) & 0x7fffffff);
        for (const auto& m : obs.prompt.messages) {
            ChatMessage msg{m.role, {}};
            for (const auto& part : m.parts) {
                if (part.kind == PromptPart::Kind::text) {
                    msg.content.emplace_back(part.text);
                } else {
                    msg.content.emplace_back(ChatImage{obs.prompt.images.at(part.image_index).png()});
                }
            }
            req.messages.push_back(std::move(msg));
        }
        const auto started = std::chrono::steady_clock::now();
        const std::string text = client_->complete(req);
        AgentTurn turn = parse_turn(text);
        turn.latency_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
        return turn;
    }

private:
    std::shared_ptr<ChatClient> client_;
    AgentProfile profile_;
    std::uint64_t seed_;
};

}  // namespace

std::unique_ptr<Agent> make_top_bias_agent(double p, std::uint64_t seed) {
    return std::make_unique<TopBiasAgent>(p, seed);
}

std::unique_ptr<Agent> make_saliency_agent(double w_color, double w_size, double w_rank, std::uint64_t seed) {
    return std::make_unique<SaliencyAgent>(w_color, w_size, w_rank, seed);
}

std::unique_ptr<Agent> make_scroll_then_first_agent() { return std::make_unique<ScrollThenFirstAgent>(); }

AgentFactory::AgentFactory(AgentProfile profile, std::shared_ptr<ChatClient> client)
    : profile_(std::move(profile)), client_(std::move(client)) {
    profile_.validate();
    if (profile_.kind == AgentProfile::Kind::remote_chat_endpoint && !client_) {
        ChatEndpoint ep;
        ep.url = profile_.endpoint;
        if (const char* token = std::getenv("VAF_AGENT_TOKEN")) ep.token = token;
        ep.timeout = std::chrono::milliseconds(profile_.timeout_ms);
        client_ = std::make_shared<ChatClient>(ep, std::make_shared<RequestLimiter>(4));
    }
}

std::unique_ptr<Agent> AgentFactory::create(std::uint64_t trial_seed) const {
    if (profile_.kind == AgentProfile::Kind::remote_chat_endpoint) {
        return std::make_unique<RemoteAgent>(client_, profile_, trial_seed);
    }
    const auto& w = profile_.policy_params;
    if (profile_.policy == "top_bias") return make_top_bias_agent(w.at(0), trial_seed);
    if (profile_.policy == "saliency") return make_saliency_agent(w.at(0), w.at(1), w.at(2), trial_seed);
    if (profile_.policy == "uniform") return make_saliency_agent(0, 0, 0, trial_seed);
    return make_scroll_then_first_agent();
}

}  // namespace vaf
