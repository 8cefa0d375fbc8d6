#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "vaf/episode.hpp"
#include "vaf/error.hpp"

namespace vaf {

std::string_view to_string(Termination t) noexcept {
    switch (t) {
        case Termination::clicked: return "clicked";
        case Termination::finished_no_click: return "finished_no_click";
        case Termination::step_budget_exhausted: return "step_budget_exhausted";
        case Termination::agent_error: return "agent_error";
    }
    return "agent_error";
}

Termination parse_termination(std::string_view s) {
    for (auto t : {Termination::clicked, Termination::finished_no_click, Termination::step_budget_exhausted,
                   Termination::agent_error}) {
        if (s == to_string(t)) return t;
    }
    throw std::invalid_argument(fmt::format("unknown termination '{}'", s));
}

void EpisodeConfig::validate() const {
    if (max_steps < 1) throw Error(Errc::InvalidConfig, "episode.max_steps must be >= 1");
    if (trials_per_variant < 1) throw Error(Errc::InvalidConfig, "episode.trials_per_variant must be >= 1");
    if (backend != "synthetic" && backend != "live") {
        throw Error(Errc::InvalidConfig, fmt::format("episode.backend must be live or synthetic, got '{}'", backend));
    }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

}  // namespace

std::uint64_t trial_seed(std::uint64_t seed, std::string_view variant_id, int trial_index) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(fnv1a(variant_id) + static_cast<std::uint64_t>(trial_index)));
}

TrialRecord run_trial(RenderSession& session, const PageSource& page, const AgentFactory& agents,
                      const EpisodeConfig& config, int trial_index) {
    TrialRecord rec;
    rec.variant_id = page.variant_id;
    rec.trial_index = trial_index;
    try {
        const BoundingBox target = target_bbox(page.manifest, session.layout_index());
        const auto fields = scenario_fields(page.snapshot->prompt_fields);
        auto agent = agents.create(trial_seed(config.seed, page.variant_id, trial_index));

        std::vector<RenderedView> views;
        int scroll_y = 0;
        bool done = false;
        for (int step = 0; step < config.max_steps && !done; ++step) {
            views.push_back(session.render_view(scroll_y));
            const RenderedView& view = views.back();
            rec.scroll_trace.push_back(view.scroll_y);
            if (config.record_images) {
                const auto dir = config.image_dir / page.variant_id / std::to_string(trial_index);
                std::filesystem::create_directories(dir);
                write_file((dir / fmt::format("step{}.png", step)).string(), view.image.png());
            }
            const PromptPayload prompt = build_prompt(fields, rec.turns, views, config.max_steps);
            rec.turns.push_back(agent->step({prompt, view, step}));

            std::visit(overloaded{
                           [&](const action::Click& c) {
                               const Point p{c.x, c.y + view.scroll_y};
                               rec.click_point = p;
                               rec.target_click = hit_test(p, target);
                               rec.termination = Termination::clicked;
                               done = true;
                           },
                           [&](const action::Scroll& s) {
                               if (s.direction == ScrollDirection::down) {
                                   scroll_y = scroll_by_steps(view.scroll_y, 1, view.page_height_px);
                               } else if (s.direction == ScrollDirection::up) {
                                   scroll_y = scroll_by_steps(view.scroll_y, -1, view.page_height_px);
                               }
                           },
                           [&](const action::Finished&) {
                               rec.termination = Termination::finished_no_click;
                               done = true;
                           },
                           [&](const action::CallUser&) {
                               rec.termination = Termination::finished_no_click;
                               done = true;
                           },
                           [](const auto&) {},
                       },
                       rec.turns.back().action);
        }
        if (!done) rec.termination = Termination::step_budget_exhausted;
    } catch (const std::exception& e) {
        rec.termination = Termination::agent_error;
        rec.click_point.reset();
        rec.target_click = 0;
        rec.error = e.what();
    }
    std::string thoughts;
    for (const auto& t : rec.turns) {
        if (t.thought.empty()) continue;
        if (!thoughts.empty()) thoughts += "\n";
        thoughts += t.thought;
    }
    rec.thoughts_concat = std::move(thoughts);
    return rec;
}

BatchResult run_batch(const LoadedSnapshot& loaded, const std::vector<VariantSpec>& catalog, RenderBackend& backend,
                      const AgentFactory& agents, const EpisodeConfig& config, const BatchOptions& options) {
    config.validate();
    BatchResult result;

    std::vector<PageSource> pages{original_page(loaded)};
    for (const auto& spec : catalog) {
        try {
            pages.push_back(variant_page(loaded, apply_variant(*loaded.snapshot, loaded.manifest, spec)));
        } catch (const Error& e) {
            SkipMarker skip{spec.id, std::string(errc_name(e.code())), e.detail()};
            if (options.on_skip) options.on_skip(skip);
            result.skipped.push_back(std::move(skip));
        }
    }

    for (const auto& page : pages) {
        try {
            auto session = backend.open_session(page);
            result.layouts[page.variant_id] = session->layout_index();
            session->close();
        } catch (const Error&) {
            // trials on this page will record the failure themselves
        }
    }

    struct Task {
        std::size_t page;
        int trial;
    };
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < pages.size(); ++p) {
        for (int t = 0; t < config.trials_per_variant; ++t) {
            if (!options.completed.count({pages[p].variant_id, t})) tasks.push_back({p, t});
        }
    }

    std::vector<std::optional<TrialRecord>> slots(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex sink;
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const PageSource& page = pages[tasks[i].page];
            TrialRecord rec;
            try {
                auto session = backend.open_session(page);
                rec = run_trial(*session, page, agents, config, tasks[i].trial);
                session->close();
            } catch (const std::exception& e) {
                rec.variant_id = page.variant_id;
                rec.trial_index = tasks[i].trial;
                rec.termination = Termination::agent_error;
                rec.error = e.what();
            }
            if (options.on_record) {
                std::lock_guard lock(sink);
                options.on_record(rec);
            }
            slots[i] = std::move(rec);
        }
    };
    const int jobs = std::clamp(options.jobs, 1, 64);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    result.records.reserve(slots.size());
    for (auto& s : slots) result.records.push_back(std::move(*s));
    return result;
}

// --- JSON lines ---------------------------------------------------------------

void to_json(nlohmann::json& j, const AgentTurn& t) {
    j = {{"thought", t.thought},
         {"action_kind", std::string(action_kind(t.action))},
         {"action", format_action(t.action)},
         {"raw", t.raw},
         {"latency_ms", t.latency_ms}};
}

void from_json(const nlohmann::json& j, AgentTurn& t) {
    t.thought = j.value("thought", "");
    t.raw = j.value("raw", "");
    t.latency_ms = j.value("latency_ms", std::int64_t{0});
    const std::string kind = j.value("action_kind", "unparseable");
    std::optional<AgentAction> a;
    if (kind != "unparseable") a = parse_action(j.value("action", ""));
    t.action = a ? std::move(*a) : AgentAction{action::Unparseable{t.raw}};
}

void to_json(nlohmann::json& j, const TrialRecord& r) {
    j = {{"variant_id", r.variant_id},
         {"trial_index", r.trial_index},
         {"turns", r.turns},
         {"scroll_trace", r.scroll_trace},
         {"click_point", r.click_point ? nlohmann::json::array({r.click_point->x, r.click_point->y}) : nlohmann::json()},
         {"target_click", r.target_click},
         {"thoughts_concat", r.thoughts_concat},
         {"termination", std::string(to_string(r.termination))}};
    if (!r.error.empty()) j["error"] = r.error;
}

void from_json(const nlohmann::json& j, TrialRecord& r) {
    r.variant_id = j.at("variant_id").get<std::string>();
    r.trial_index = j.at("trial_index").get<int>();
    r.turns = j.value("turns", std::vector<AgentTurn>{});
    r.scroll_trace = j.value("scroll_trace", std::vector<int>{});
    r.click_point.reset();
    if (const auto& c = j.at("click_point"); c.is_array()) r.click_point = Point{c.at(0).get<int>(), c.at(1).get<int>()};
    r.target_click = j.at("target_click").get<int>();
    r.thoughts_concat = j.value("thoughts_concat", "");
    r.termination = parse_termination(j.at("termination").get<std::string>());
    r.error = j.value("error", "");
}

void to_json(nlohmann::json& j, const SkipMarker& s) {
    j = {{"variant_id", s.variant_id}, {"skipped", true}, {"reason", s.reason}, {"detail", s.detail}};
}

void from_json(const nlohmann::json& j, SkipMarker& s) {
    s.variant_id = j.at("variant_id").get<std::string>();
    s.reason = j.value("reason", "");
    s.detail = j.value("detail", "");
}

std::string trial_log_line(const TrialRecord& r) { return nlohmann::json(r).dump(); }
std::string trial_log_line(const SkipMarker& s) { return nlohmann::json(s).dump(); }

TrialLog read_trial_log(const std::filesystem::path& path) {
    TrialLog log;
    std::ifstream in(path);
    if (!in) return log;
    std::string line;
    std::set<std::string> skipped_ids;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            if (in.peek() == std::char_traits<char>::eof()) break;
            throw;
        }
        if (j.value("skipped", false)) {
            auto s = j.get<SkipMarker>();
            if (skipped_ids.insert(s.variant_id).second) log.skipped.push_back(std::move(s));
        } else {
            log.records.push_back(j.get<TrialRecord>());
        }
    }
    return log;
}

}  // namespace vaf
