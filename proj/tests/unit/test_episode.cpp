#include <doctest.h>

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "local_server.hpp"
#include "scratch.hpp"
#include "vaf/chat.hpp"
#include "vaf/episode.hpp"
#include "vaf/error.hpp"

using namespace vaf;

namespace {

VariantSpec spec(const std::string& id) {
    for (auto& s : default_catalog()) {
        if (s.id == id) return s;
    }
    FAIL("no variant " << id);
    return {};
}

PageSource page_of(const LoadedSnapshot& f, const std::string& id) {
    if (id == kOriginalVariantId) return original_page(f);
    return variant_page(f, apply_variant(*f.snapshot, f.manifest, spec(id)));
}

TrialRecord one_trial(const std::string& fixture, const std::string& variant, const std::string& agent_spec,
                      int trial = 0, std::uint64_t seed = 1) {
    const auto& f = test::fixture(fixture);
    SyntheticBackend backend;
    const auto page = page_of(f, variant);
    auto session = backend.open_session(page);
    EpisodeConfig cfg;
    cfg.seed = seed;
    return run_trial(*session, page, AgentFactory(parse_agent_spec(agent_spec)), cfg, trial);
}

std::vector<std::string> lines_of(const std::vector<TrialRecord>& rs) {
    std::vector<std::string> out;
    for (const auto& r : rs) out.push_back(trial_log_line(r));
    return out;
}

void check_invariants(const TrialRecord& r, const LoadedSnapshot& f, const LayoutIndex& layout, int max_steps) {
    INFO(r.variant_id << "#" << r.trial_index);
    CHECK((r.termination == Termination::clicked) == r.click_point.has_value());
    CHECK(r.turns.size() <= static_cast<std::size_t>(max_steps));
    CHECK(r.scroll_trace.size() == r.turns.size());
    for (int s : r.scroll_trace) {
        CHECK(s >= 0);
        CHECK(s <= max_scroll(layout.page_height_px));
    }
    if (r.click_point) {
        CHECK(r.target_click == hit_test(*r.click_point, target_bbox(f.manifest, layout)));
    } else {
        CHECK(r.target_click == 0);
    }
    if (r.termination == Termination::step_budget_exhausted) CHECK(r.turns.size() == static_cast<std::size_t>(max_steps));
}

}  // namespace

TEST_CASE("a greedy top-of-page agent clicks the target at once") {
    const auto r = one_trial("shop-grid", kOriginalVariantId, "scripted:top_bias:1.0");
    CHECK(r.termination == Termination::clicked);
    CHECK(r.turns.size() == 1);
    CHECK(r.target_click == 1);
    CHECK(r.thoughts_concat.rfind("I can see the following", 0) == 0);

    const auto last = one_trial("shop-grid", "order_last", "scripted:top_bias:1.0");
    CHECK(last.termination == Termination::clicked);
    CHECK(last.target_click == 0);
}

TEST_CASE("clicks are translated from the viewport into the page") {
    const auto& shop = test::fixture("shop-grid");
    const auto r = one_trial("shop-grid", kOriginalVariantId, "scripted:always_scroll_then_click_first");
    REQUIRE(r.turns.size() == 2);
    CHECK(r.scroll_trace == std::vector<int>{0, 600});
    const auto& click = std::get<action::Click>(r.turns[1].action);
    REQUIRE(r.click_point);
    CHECK(r.click_point->x == click.x);
    CHECK(r.click_point->y == click.y + 600);
    // the first card visible at 600 is not the target at the top
    SyntheticBackend backend;
    auto session = backend.open_session(original_page(shop));
    CHECK(r.target_click == hit_test(*r.click_point, target_bbox(shop.manifest, session->layout_index())));
    CHECK(r.target_click == 0);
}

TEST_CASE("a timid agent runs out of page or steps") {
    const auto& shop = test::fixture("shop-grid");
    SyntheticBackend backend;
    const auto page = original_page(shop);
    auto session = backend.open_session(page);
    EpisodeConfig cfg;
    cfg.max_steps = 2;
    const auto r = run_trial(*session, page, AgentFactory(parse_agent_spec("scripted:top_bias:0")), cfg, 0);
    CHECK(r.termination == Termination::step_budget_exhausted);
    check_invariants(r, shop, session->layout_index(), 2);

    cfg.max_steps = 12;
    const auto r2 = run_trial(*session, page, AgentFactory(parse_agent_spec("scripted:top_bias:0")), cfg, 0);
    CHECK(r2.termination == Termination::finished_no_click);
    CHECK(r2.scroll_trace.back() == max_scroll(session->layout_index().page_height_px));
}

TEST_CASE("batch size, skips and invariants") {
    const auto catalog = default_catalog();
    for (const char* name : {"shop-grid", "news-list"}) {
        const auto& f = test::fixture(name);
        std::size_t applicable = 0;
        for (const auto& s : catalog) {
            try {
                (void)apply_variant(*f.snapshot, f.manifest, s);
                ++applicable;
            } catch (const Error&) {
            }
        }
        SyntheticBackend backend;
        EpisodeConfig cfg;
        cfg.trials_per_variant = 3;
        cfg.seed = 9;
        BatchOptions opts;
        opts.jobs = 3;
        const auto res =
            run_batch(f, catalog, backend, AgentFactory(parse_agent_spec("scripted:saliency:2,2,0.3")), cfg, opts);
        INFO(name);
        CHECK(res.records.size() == (1 + applicable) * 3);
        CHECK(res.skipped.size() == catalog.size() - applicable);
        CHECK(res.records.front().variant_id == kOriginalVariantId);
        for (const auto& r : res.records) check_invariants(r, f, res.layouts.at(r.variant_id), cfg.max_steps);
    }
    CHECK(test::fixture("shop-grid").manifest.anchor_slots.size() == 4);
}

TEST_CASE("same seed, same records, whatever the parallelism") {
    const auto& f = test::fixture("hotel-list");
    const auto catalog = filter_catalog(default_catalog(), "background_color");
    SyntheticBackend backend;
    AgentFactory agents(parse_agent_spec("scripted:top_bias:0.4"));
    EpisodeConfig cfg;
    cfg.trials_per_variant = 5;
    cfg.seed = 77;
    BatchOptions serial;
    BatchOptions parallel;
    parallel.jobs = 4;
    const auto a = run_batch(f, catalog, backend, agents, cfg, serial);
    const auto b = run_batch(f, catalog, backend, agents, cfg, parallel);
    CHECK(lines_of(a.records) == lines_of(b.records));
    cfg.seed = 78;
    const auto c = run_batch(f, catalog, backend, agents, cfg, serial);
    CHECK(lines_of(a.records) != lines_of(c.records));

    CHECK(trial_seed(1, "x", 0) == trial_seed(1, "x", 0));
    CHECK(trial_seed(1, "x", 0) != trial_seed(1, "x", 1));
    CHECK(trial_seed(1, "x", 0) != trial_seed(2, "x", 0));
}

TEST_CASE("resume runs only what is missing") {
    const auto& f = test::fixture("shop-grid");
    const auto catalog = filter_catalog(default_catalog(), "order");
    SyntheticBackend backend;
    AgentFactory agents(parse_agent_spec("scripted:top_bias:0.5"));
    EpisodeConfig cfg;
    cfg.trials_per_variant = 4;
    const auto full = run_batch(f, catalog, backend, agents, cfg);

    BatchOptions opts;
    std::vector<TrialRecord> streamed;
    opts.on_record = [&](const TrialRecord& r) { streamed.push_back(r); };
    for (const auto& r : full.records) {
        if (r.trial_index % 2 == 0) opts.completed.insert({r.variant_id, r.trial_index});
    }
    const auto rest = run_batch(f, catalog, backend, agents, cfg, opts);
    CHECK(rest.records.size() == full.records.size() - opts.completed.size());
    CHECK(streamed.size() == rest.records.size());
    std::map<std::pair<std::string, int>, std::string> by_key;
    for (const auto& r : full.records) by_key[{r.variant_id, r.trial_index}] = trial_log_line(r);
    for (const auto& r : rest.records) {
        CHECK(r.trial_index % 2 == 1);
        CHECK(by_key.at({r.variant_id, r.trial_index}) == trial_log_line(r));
    }
}

TEST_CASE("trial log round trip and torn tail") {
    const auto& f = test::fixture("news-list");
    SyntheticBackend backend;
    EpisodeConfig cfg;
    cfg.trials_per_variant = 2;
    const auto res = run_batch(f, default_catalog(), backend, AgentFactory(parse_agent_spec("scripted:top_bias:0.3")), cfg);
    test::Scratch dir;
    const auto path = dir.path() / "trials.jsonl";
    {
        std::ofstream out(path);
        for (const auto& s : res.skipped) out << trial_log_line(s) << "\n";
        for (const auto& r : res.records) out << trial_log_line(r) << "\n";
        out << trial_log_line(res.records.front()).substr(0, 40);  // interrupted write
    }
    const auto log = read_trial_log(path);
    CHECK(lines_of(log.records) == lines_of(res.records));
    REQUIRE(log.skipped.size() == res.skipped.size());
    for (std::size_t i = 0; i < log.skipped.size(); ++i) {
        CHECK(log.skipped[i].variant_id == res.skipped[i].variant_id);
        CHECK(log.skipped[i].reason == res.skipped[i].reason);
    }
    for (auto t : {Termination::clicked, Termination::finished_no_click, Termination::step_budget_exhausted,
                   Termination::agent_error}) {
        CHECK(parse_termination(to_string(t)) == t);
    }
}

TEST_CASE("a remote agent is driven through the chat endpoint") {
    std::atomic<int> calls{0};
    std::atomic<int> images_seen{0};
    test::LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        int images = 0;
        for (const auto& m : body["messages"]) {
            for (const auto& p : m["content"]) images += p["type"] == "image_url";
        }
        images_seen = images;
        const std::string text = ++calls == 1
                                     ? "Thought: I can see the following laptops on this screen: many.\n"
                                       "Action: scroll(start_box=\"(640,600)\", direction=\"down\")"
                                     : "Thought: I pick the first.\nAction: click(start_box='(300,100)')";
        const nlohmann::json reply{
            {"choices", nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", text}}}}})}};
        res.set_content(reply.dump(), "application/json");
    });

    const auto& f = test::fixture("shop-grid");
    AgentProfile base;
    base.endpoint = server.url();
    const auto profile = parse_agent_spec("remote:ui-tars-7b", base);
    ChatEndpoint ep;
    ep.url = server.url();
    ep.backoff_base = std::chrono::milliseconds(1);
    AgentFactory agents(profile, std::make_shared<ChatClient>(ep, std::make_shared<RequestLimiter>(1)));
    SyntheticBackend backend;
    const auto page = original_page(f);
    auto session = backend.open_session(page);
    const auto r = run_trial(*session, page, agents, EpisodeConfig{}, 0);
    server.stop();

    CHECK(calls == 2);
    CHECK(images_seen == 2);
    CHECK(r.termination == Termination::clicked);
    REQUIRE(r.click_point);
    CHECK(*r.click_point == Point{300, 700});

    // a dead endpoint ends the trial with an error instead of throwing
    const auto dead = run_trial(*session, page, agents, EpisodeConfig{}, 1);
    CHECK(dead.termination == Termination::agent_error);
    CHECK_FALSE(dead.error.empty());
    CHECK_FALSE(dead.click_point);
}
