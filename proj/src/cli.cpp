#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "vaf/cdp.hpp"
#include "vaf/chat.hpp"
#include "vaf/cli.hpp"
#include "vaf/error.hpp"
#include "vaf/judge.hpp"

namespace vaf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(JudgeMode m) noexcept {
    switch (m) {
        case JudgeMode::llm: return "llm";
        case JudgeMode::lexical: return "lexical";
        case JudgeMode::off: return "off";
    }
    return "off";
}

JudgeMode parse_judge_mode(std::string_view s) {
    if (s == "llm") return JudgeMode::llm;
    if (s == "lexical") return JudgeMode::lexical;
    if (s == "off") return JudgeMode::off;
    throw Error(Errc::InvalidConfig, fmt::format("judge must be llm, lexical or off, got '{}'", s));
}

void RunConfig::validate() const {
    if (snapshot_roots.empty()) throw Error(Errc::InvalidConfig, "snapshot_root: no snapshot given");
    for (const auto& root : snapshot_roots) {
        if (!fs::is_directory(root)) throw Error(Errc::InvalidConfig, fmt::format("snapshot_root: {} is not a directory", root.string()));
    }
    if (catalog_path && !fs::exists(*catalog_path)) {
        throw Error(Errc::InvalidConfig, fmt::format("catalog_path: {} does not exist", catalog_path->string()));
    }
    if (jobs < 1) throw Error(Errc::InvalidConfig, "jobs must be >= 1");
    if (top_k < 1) throw Error(Errc::InvalidConfig, "top_k must be >= 1");
    if (live_port <= 0 || live_port > 65535) throw Error(Errc::InvalidConfig, "live.port out of range");
    episode.validate();
    agent.validate();
    if (agent.kind == AgentProfile::Kind::remote_chat_endpoint && agent.endpoint.empty()) {
        throw Error(Errc::InvalidConfig, "agent.endpoint is required for a remote agent");
    }
    if (judge.mode == JudgeMode::llm && judge.endpoint.empty()) {
        throw Error(Errc::InvalidConfig, "judge.endpoint is required for --judge llm");
    }
}

// --- config parsing -----------------------------------------------------------

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw Error(Errc::InvalidConfig, fmt::format("{}: expected an object", where.empty() ? "config" : where));
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw Error(Errc::InvalidConfig, fmt::format("{}{}: unknown key", where.empty() ? "" : where + ".", key));
        }
    }
}

template <class T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(Errc::InvalidConfig, fmt::format("{}{}: wrong type ({})", where.empty() ? "" : where + ".", key,
                                                     obj.at(key).type_name()));
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return (path.is_absolute() ? path : base / path).lexically_normal();
}

}  // namespace

RunConfig parse_config(std::string_view text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::InvalidConfig, e.what());
    }
    check_keys(doc, "", {"snapshot_root", "catalog_path", "only", "agent", "judge", "episode", "live", "jobs", "top_k",
                         "averaging", "output_dir"});
    const fs::path base = fs::absolute(base_dir);
    RunConfig c;
    if (doc.contains("snapshot_root")) {
        const json& roots = doc["snapshot_root"];
        std::vector<std::string> list;
        if (roots.is_string()) {
            list.push_back(roots.get<std::string>());
        } else {
            read(doc, "", "snapshot_root", list);
        }
        for (const auto& r : list) c.snapshot_roots.push_back(resolve(base, r));
    }
    if (doc.contains("catalog_path") && !doc["catalog_path"].is_null()) {
        std::string p;
        read(doc, "", "catalog_path", p);
        c.catalog_path = resolve(base, p);
    }
    read(doc, "", "only", c.only);
    read(doc, "", "jobs", c.jobs);
    int top_k = static_cast<int>(c.top_k);
    read(doc, "", "top_k", top_k);
    if (top_k < 1) throw Error(Errc::InvalidConfig, "top_k must be >= 1");
    c.top_k = static_cast<std::size_t>(top_k);
    std::string averaging = "macro";
    read(doc, "", "averaging", averaging);
    try {
        c.averaging = parse_averaging(averaging);
    } catch (const std::invalid_argument& e) {
        throw Error(Errc::InvalidConfig, fmt::format("averaging: {}", e.what()));
    }
    std::string out = c.output_dir.string();
    read(doc, "", "output_dir", out);
    c.output_dir = resolve(base, out);

    if (doc.contains("agent")) {
        const json& a = doc["agent"];
        check_keys(a, "agent", {"spec", "endpoint", "model", "timeout_ms", "temperature", "top_p"});
        read(a, "agent", "endpoint", c.agent.endpoint);
        read(a, "agent", "model", c.agent.model);
        read(a, "agent", "timeout_ms", c.agent.timeout_ms);
        read(a, "agent", "temperature", c.agent.sampling.temperature);
        read(a, "agent", "top_p", c.agent.sampling.top_p);
        std::string spec;
        read(a, "agent", "spec", spec);
        if (!spec.empty()) c.agent = parse_agent_spec(spec, c.agent);
    }
    if (doc.contains("judge")) {
        const json& j = doc["judge"];
        check_keys(j, "judge", {"mode", "scope", "endpoint", "model", "timeout_ms"});
        std::string mode(to_string(c.judge.mode));
        read(j, "judge", "mode", mode);
        c.judge.mode = parse_judge_mode(mode);
        read(j, "judge", "endpoint", c.judge.endpoint);
        read(j, "judge", "model", c.judge.model);
        read(j, "judge", "timeout_ms", c.judge.timeout_ms);
        std::string scope = "all";
        read(j, "judge", "scope", scope);
        if (scope != "all" && scope != "final") throw Error(Errc::InvalidConfig, fmt::format("judge.scope: must be all or final, got '{}'", scope));
        c.judge.final_turn_only = scope == "final";
    }
    if (doc.contains("episode")) {
        const json& e = doc["episode"];
        check_keys(e, "episode", {"max_steps", "trials", "seed", "backend", "record_images"});
        read(e, "episode", "max_steps", c.episode.max_steps);
        read(e, "episode", "trials", c.episode.trials_per_variant);
        read(e, "episode", "seed", c.episode.seed);
        read(e, "episode", "backend", c.episode.backend);
        read(e, "episode", "record_images", c.episode.record_images);
    }
    if (doc.contains("live")) {
        const json& l = doc["live"];
        check_keys(l, "live", {"host", "port"});
        read(l, "live", "host", c.live_host);
        read(l, "live", "port", c.live_port);
    }
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::InvalidConfig, fmt::format("cannot read config {}", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str(), path.parent_path());
    } catch (const Error& e) {
        throw Error(e.code(), fmt::format("{}: {}", path.string(), e.detail()));
    }
}

json config_to_json(const RunConfig& c) {
    json roots = json::array();
    for (const auto& r : c.snapshot_roots) roots.push_back(r.string());
    json out{
        {"snapshot_root", roots},
        {"catalog_path", c.catalog_path ? json(c.catalog_path->string()) : json(nullptr)},
        {"only", c.only},
        {"agent",
         {{"spec", agent_spec_string(c.agent)},
          {"endpoint", c.agent.endpoint},
          {"model", c.agent.model},
          {"timeout_ms", c.agent.timeout_ms},
          {"temperature", c.agent.sampling.temperature},
          {"top_p", c.agent.sampling.top_p}}},
        {"judge",
         {{"mode", to_string(c.judge.mode)},
          {"endpoint", c.judge.endpoint},
          {"model", c.judge.model},
          {"timeout_ms", c.judge.timeout_ms},
          {"scope", c.judge.final_turn_only ? "final" : "all"}}},
        {"episode",
         {{"max_steps", c.episode.max_steps},
          {"trials", c.episode.trials_per_variant},
          {"seed", c.episode.seed},
          {"backend", c.episode.backend},
          {"record_images", c.episode.record_images}}},
        {"live", {{"host", c.live_host}, {"port", c.live_port}}},
        {"jobs", c.jobs},
        {"top_k", c.top_k},
        {"averaging", to_string(c.averaging)},
        {"output_dir", c.output_dir.string()},
    };
    return out;
}

std::vector<fs::path> snapshot_dirs(const RunConfig& c) {
    std::vector<fs::path> out;
    for (const auto& root : c.snapshot_roots) {
        if (fs::exists(root / "page.html") || fs::exists(root / "manifest.json")) {
            out.push_back(root);
            continue;
        }
        std::vector<fs::path> children;
        for (const auto& entry : fs::directory_iterator(root)) {
            if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) children.push_back(entry.path());
        }
        std::sort(children.begin(), children.end());
        if (children.empty()) throw Error(Errc::InvalidConfig, fmt::format("snapshot_root: no snapshots under {}", root.string()));
        out.insert(out.end(), children.begin(), children.end());
    }
    return out;
}

std::vector<VariantSpec> effective_catalog(const RunConfig& c) {
    auto catalog = c.catalog_path ? load_catalog(*c.catalog_path) : default_catalog();
    if (c.only.empty()) return catalog;
    auto picked = filter_catalog(catalog, c.only);
    if (picked.empty()) throw Error(Errc::InvalidConfig, fmt::format("only: '{}' matches no family or variant id", c.only));
    return picked;
}

int exit_code_for(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidConfig:
        case Errc::MalformedCatalog:
        case Errc::MalformedManifest:
        case Errc::MissingDocument:
        case Errc::HtmlParseError:
        case Errc::SelectorNotUnique:
        case Errc::SelectorNotFound:
        case Errc::TargetNotInLayout:
        case Errc::OverlappingItemBoxes:
        case Errc::BackendUnavailable:
        case Errc::TemplateFieldMissing:
            return kExitConfig;
        case Errc::MissingBaseline: return kExitMissingBaseline;
        default: return kExitFailure;
    }
}

// --- shared helpers -----------------------------------------------------------

namespace {

struct Site {
    LoadedSnapshot loaded;
    fs::path dir;  // output directory for this site
};

std::vector<Site> load_sites(const RunConfig& c) {
    const auto dirs = snapshot_dirs(c);
    std::vector<Site> sites;
    std::set<std::string> ids;
    for (const auto& d : dirs) {
        Site s{load_snapshot(d), c.output_dir};
        if (!ids.insert(s.loaded.snapshot->id).second) {
            throw Error(Errc::InvalidConfig, fmt::format("snapshot id '{}' appears twice", s.loaded.snapshot->id));
        }
        sites.push_back(std::move(s));
    }
    if (sites.size() > 1) {
        for (auto& s : sites) s.dir = c.output_dir / "sites" / s.loaded.snapshot->id;
    }
    return sites;
}

void write_text(const fs::path& path, std::string_view text) {
    fs::create_directories(path.parent_path());
    const auto tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) throw Error(Errc::RendererFailure, fmt::format("cannot write {}", path.string()));
    }
    fs::rename(tmp, path);
}

void write_effective_config(const RunConfig& c) { write_text(c.output_dir / "effective_config.json", config_to_json(c).dump(2) + "\n"); }

std::unique_ptr<RenderBackend> make_backend(const RunConfig& c) {
    if (c.episode.backend == "live") {
        LiveOptions opts;
        opts.host = c.live_host;
        opts.port = c.live_port;
        opts.work_dir = c.output_dir / "live-pages";
        return std::make_unique<LiveBackend>(opts);
    }
    return std::make_unique<SyntheticBackend>();
}

std::map<std::string, std::string> family_map(const std::vector<VariantSpec>& catalog) {
    std::map<std::string, std::string> out;
    for (const auto& s : catalog) out[s.id] = std::string(to_string(s.family));
    return out;
}

std::vector<std::string> catalog_ids(const std::vector<VariantSpec>& catalog) {
    std::vector<std::string> out;
    for (const auto& s : catalog) out.push_back(s.id);
    return out;
}

/// Latest record per (variant, trial); agent errors are superseded by retries.
std::vector<TrialRecord> dedupe(std::vector<TrialRecord> records) {
    std::map<std::pair<std::string, int>, std::size_t> last;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto key = std::make_pair(records[i].variant_id, records[i].trial_index);
        auto [it, fresh] = last.try_emplace(key, i);
        if (!fresh) {
            const bool older_failed = records[it->second].termination == Termination::agent_error;
            const bool newer_failed = records[i].termination == Termination::agent_error;
            if (older_failed || !newer_failed) it->second = i;
        }
    }
    std::vector<std::size_t> keep;
    for (const auto& [key, i] : last) keep.push_back(i);
    std::sort(keep.begin(), keep.end());
    std::vector<TrialRecord> out;
    out.reserve(keep.size());
    for (auto i : keep) out.push_back(std::move(records[i]));
    return out;
}

std::string safe_name(std::string_view s) {
    std::string out;
    for (char ch : s) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.') ? ch : '_';
    return out;
}

}  // namespace

// --- generate -----------------------------------------------------------------

int cmd_generate(const RunConfig& c, std::ostream& log) {
    c.validate();
    const auto catalog = effective_catalog(c);
    auto sites = load_sites(c);
    write_effective_config(c);
    int failures = 0;
    for (const auto& site : sites) {
        const auto& snap = *site.loaded.snapshot;
        const fs::path vdir = site.dir / "variants";
        json report{{"snapshot", snap.id}, {"variants", json::array()}};
        int written = 0, skipped = 0;
        for (const auto& spec : catalog) {
            json entry{{"id", spec.id}, {"family", to_string(spec.family)}};
            VariantPage page;
            try {
                page = apply_variant(snap, site.loaded.manifest, spec);
            } catch (const Error& e) {
                entry["status"] = "skipped";
                entry["reason"] = errc_name(e.code());
                entry["detail"] = e.detail();
                report["variants"].push_back(std::move(entry));
                ++skipped;
                continue;
            }
            const fs::path dir = vdir / spec.id;
            write_text(dir / "page.html", html::serialize(page.document));
            // keep relative asset links working next to the written page
            const fs::path assets = snap.root / "assets";
            if (fs::exists(assets) && !fs::exists(dir / "assets")) {
                std::error_code ignored;
                fs::create_directory_symlink(fs::absolute(assets), dir / "assets", ignored);
            }
            ++written;
            const auto check = verify_preservation(snap, page, site.loaded.manifest);
            entry["status"] = check.ok ? "ok" : "failed";
            entry["changes"] = page.provenance;
            json diffs = json::array();
            for (const auto& d : check.diffs) {
                diffs.push_back({{"kind", to_string(d.kind)}, {"path", d.path}, {"detail", d.detail}});
                log << fmt::format("preservation {}/{}: {} at {}: {}\n", snap.id, spec.id, to_string(d.kind), d.path,
                                   d.detail);
            }
            entry["diffs"] = std::move(diffs);
            if (!check.ok) ++failures;
            report["variants"].push_back(std::move(entry));
        }
        write_text(vdir / "preservation.json", report.dump(2) + "\n");
        log << fmt::format("{}: {} variant pages written, {} not applicable\n", snap.id, written, skipped);
    }
    if (failures > 0) {
        log << fmt::format("{} variant(s) failed the preservation check\n", failures);
        return kExitFailure;
    }
    return kExitOk;
}

// --- run ----------------------------------------------------------------------

int cmd_run(const RunConfig& c, std::ostream& log) {
    c.validate();
    const auto catalog = effective_catalog(c);
    auto sites = load_sites(c);
    write_effective_config(c);
    auto backend = make_backend(c);

    std::shared_ptr<ChatClient> client;
    if (c.agent.kind == AgentProfile::Kind::remote_chat_endpoint) {
        ChatEndpoint ep;
        ep.url = c.agent.endpoint;
        if (const char* token = std::getenv("VAF_AGENT_TOKEN")) ep.token = token;
        ep.timeout = std::chrono::milliseconds(c.agent.timeout_ms);
        client = std::make_shared<ChatClient>(ep, std::make_shared<RequestLimiter>(c.jobs));
    }
    const AgentFactory agents(c.agent, client);

    std::int64_t expected = 0, completed = 0, errors = 0;
    for (const auto& site : sites) {
        const auto& snap = *site.loaded.snapshot;
        const fs::path log_path = site.dir / "trials.jsonl";
        fs::create_directories(site.dir);
        TrialLog previous = read_trial_log(log_path);

        // a torn final line would glue onto the next append; rewrite cleanly
        {
            std::ifstream in(log_path, std::ios::binary);
            std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            if (!all.empty() && all.back() != '\n') {
                std::string clean;
                for (const auto& s : previous.skipped) clean += trial_log_line(s) + "\n";
                for (const auto& r : previous.records) clean += trial_log_line(r) + "\n";
                write_text(log_path, clean);
            }
        }

        BatchOptions opts;
        opts.jobs = c.jobs;
        for (const auto& r : previous.records) {
            if (r.termination != Termination::agent_error) opts.completed.insert({r.variant_id, r.trial_index});
        }
        std::set<std::string> logged_skips;
        for (const auto& s : previous.skipped) logged_skips.insert(s.variant_id);

        std::ofstream out(log_path, std::ios::app | std::ios::binary);
        if (!out) throw Error(Errc::InvalidConfig, fmt::format("output_dir: cannot write {}", log_path.string()));
        std::size_t fresh = 0;
        opts.on_record = [&](const TrialRecord& r) {
            out << trial_log_line(r) << '\n';
            out.flush();
            ++fresh;
        };
        opts.on_skip = [&](const SkipMarker& s) {
            if (logged_skips.insert(s.variant_id).second) out << trial_log_line(s) << '\n';
        };

        EpisodeConfig episode = c.episode;
        episode.image_dir = site.dir / "trials";
        auto batch = run_batch(site.loaded, catalog, *backend, agents, episode, opts);
        out.close();

        // layouts of every page that opened; keep earlier ones for pages that failed this time
        json layouts = json::object();
        if (std::ifstream in(site.dir / "layouts.json"); in) {
            layouts = json::parse(in, nullptr, false);
            if (!layouts.is_object()) layouts = json::object();
        }
        for (const auto& [id, layout] : batch.layouts) layouts[id] = layout;
        write_text(site.dir / "layouts.json", layouts.dump() + "\n");

        const auto all = dedupe([&] {
            auto v = std::move(previous.records);
            v.insert(v.end(), std::make_move_iterator(batch.records.begin()), std::make_move_iterator(batch.records.end()));
            return v;
        }());
        const std::int64_t pages = 1 + static_cast<std::int64_t>(catalog.size() - batch.skipped.size());
        const std::int64_t site_expected = pages * c.episode.trials_per_variant;
        std::int64_t site_done = 0, site_errors = 0;
        std::map<std::string, int> error_kinds;
        for (const auto& r : all) {
            if (r.termination == Termination::agent_error) {
                ++site_errors;
                ++error_kinds[r.error.substr(0, r.error.find(':'))];
            } else {
                ++site_done;
            }
        }
        expected += site_expected;
        completed += std::min(site_done, site_expected);
        errors += site_errors;
        log << fmt::format("{}: {} new trials, {}/{} complete, {} failed, {} variants not applicable\n", snap.id, fresh,
                           site_done, site_expected, site_errors, batch.skipped.size());
        for (const auto& [kind, n] : error_kinds) log << fmt::format("  {} x {}\n", n, kind);
    }
    const double ratio = expected > 0 ? static_cast<double>(completed) / static_cast<double>(expected) : 1.0;
    log << fmt::format("completed {}/{} trials ({:.1f}%)\n", completed, expected, 100 * ratio);
    return ratio >= 0.95 ? kExitOk : kExitIncomplete;
}

// --- report -------------------------------------------------------------------

namespace {

std::vector<MentionVerdict> judge_records(const RunConfig& c, const std::vector<TrialRecord>& records,
                                          const LoadedSnapshot& loaded, std::ostream& log) {
    if (c.judge.mode == JudgeMode::off) return {};
    const std::string& target = loaded.manifest.target_name;
    auto thoughts = [&](const TrialRecord& r) -> const std::string& {
        static const std::string none;
        if (!c.judge.final_turn_only) return r.thoughts_concat;
        return r.turns.empty() ? none : r.turns.back().thought;
    };
    std::vector<MentionVerdict> verdicts(records.size());
    if (c.judge.mode == JudgeMode::lexical) {
        for (std::size_t i = 0; i < records.size(); ++i) verdicts[i] = judge_lexical(thoughts(records[i]), target);
        return verdicts;
    }
    ChatEndpoint ep;
    ep.url = c.judge.endpoint;
    if (const char* token = std::getenv("VAF_JUDGE_TOKEN")) ep.token = token;
    ep.timeout = std::chrono::milliseconds(c.judge.timeout_ms);
    auto client = std::make_shared<ChatClient>(ep, std::make_shared<RequestLimiter>(c.jobs));
    const JudgeAsk ask = chat_judge(client, c.judge.model);
    const std::string scenario(to_string(loaded.snapshot->scenario));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < records.size(); i = next++) {
            verdicts[i] = judge_llm(thoughts(records[i]), target, scenario, ask);
        }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < c.jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    std::size_t fallbacks = 0;
    for (const auto& v : verdicts) fallbacks += v.source == VerdictSource::lexical ? 1 : 0;
    if (fallbacks > 0) log << fmt::format("judge: {} of {} verdicts fell back to the lexical rule\n", fallbacks, verdicts.size());
    return verdicts;
}

}  // namespace

int cmd_report(const RunConfig& c, std::ostream& log) {
    c.validate();
    const auto catalog = effective_catalog(c);
    const auto families = family_map(catalog);
    const auto order = catalog_ids(catalog);
    auto sites = load_sites(c);
    write_effective_config(c);
    const fs::path rdir = c.output_dir / "report";
    fs::create_directories(rdir);
    const bool multi = sites.size() > 1;

    std::map<std::string, std::vector<std::vector<MetricsRow>>> by_scenario;
    std::vector<std::vector<MetricsRow>> all_sites;
    json verdict_log = json::array();
    for (const auto& site : sites) {
        const auto& snap = *site.loaded.snapshot;
        TrialLog trials = read_trial_log(site.dir / "trials.jsonl");
        auto records = dedupe(std::move(trials.records));
        // only variants selected by the current catalog (plus the baseline) are reported
        std::set<std::string> wanted(order.begin(), order.end());
        wanted.insert(kOriginalVariantId);
        std::erase_if(records, [&](const TrialRecord& r) { return !wanted.count(r.variant_id); });
        std::erase_if(trials.skipped, [&](const SkipMarker& s) { return !wanted.count(s.variant_id); });

        const auto verdicts = judge_records(c, records, site.loaded, log);
        for (std::size_t i = 0; i < verdicts.size(); ++i) {
            verdict_log.push_back({{"snapshot", snap.id},
                                   {"variant_id", records[i].variant_id},
                                   {"trial_index", records[i].trial_index},
                                   {"score", verdicts[i].score},
                                   {"source", to_string(verdicts[i].source)},
                                   {"reasoning", verdicts[i].reasoning}});
        }
        std::vector<MetricsRow> rows;
        try {
            rows = compute_metrics(records, verdicts, trials.skipped, order, families);
        } catch (const Error& e) {
            throw Error(e.code(), fmt::format("{}: {}", snap.id, e.detail()));
        }
        if (multi) write_text(rdir / fmt::format("metrics_{}.csv", safe_name(snap.id)), metrics_csv(rows));

        // click distributions against the layouts observed at run time
        std::map<std::string, LayoutIndex> layouts;
        if (std::ifstream in(site.dir / "layouts.json"); in) {
            const json j = json::parse(in, nullptr, false);
            if (j.is_object()) {
                for (const auto& [id, l] : j.items()) layouts[id] = l.get<LayoutIndex>();
            }
        }
        for (const auto& row : rows) {
            if (row.skipped) continue;
            const auto it = layouts.find(row.variant_id);
            if (it == layouts.end()) {
                log << fmt::format("{}/{}: no layout recorded, click distribution skipped\n", snap.id, row.variant_id);
                continue;
            }
            try {
                const auto dist = click_distribution(records, row.variant_id, site.loaded.manifest, it->second);
                const std::string name = multi ? fmt::format("clicks_{}__{}.csv", safe_name(snap.id), safe_name(row.variant_id))
                                               : fmt::format("clicks_{}.csv", safe_name(row.variant_id));
                write_text(rdir / name, click_distribution_csv(dist));
            } catch (const Error& e) {
                log << fmt::format("{}/{}: {}\n", snap.id, row.variant_id, e.what());
            }
        }
        by_scenario[std::string(to_string(snap.scenario))].push_back(rows);
        all_sites.push_back(std::move(rows));
    }

    const auto combined = combine_sites(all_sites, c.averaging);
    write_text(rdir / "metrics.csv", metrics_csv(combined));
    if (c.judge.mode != JudgeMode::off) {
        std::string lines;
        for (const auto& v : verdict_log) lines += v.dump() + "\n";
        write_text(rdir / "verdicts.jsonl", lines);
    }

    std::map<std::string, std::vector<MetricsRow>> scenario_rows;
    for (const auto& [scenario, tables] : by_scenario) scenario_rows[scenario] = combine_sites(tables, c.averaging);
    const auto matrix = heatmap_matrix(scenario_rows, order);
    write_text(rdir / "heatmap.svg", heatmap_svg(matrix));
    write_text(rdir / "heatmap.tsv", heatmap_tsv(matrix));

    const auto original = std::find_if(combined.begin(), combined.end(),
                                       [](const MetricsRow& r) { return r.variant_id == kOriginalVariantId; });
    std::size_t rankable = 0;
    for (const auto& r : combined) rankable += (!r.skipped && r.variant_id != kOriginalVariantId) ? 1 : 0;
    std::size_t k = c.top_k;
    if (rankable < 2 * k) {
        k = rankable / 2;
        log << fmt::format("only {} rankable variants; ranking top/bottom-{} instead of {}\n", rankable, k, c.top_k);
    }
    if (k > 0) {
        write_text(rdir / "rankings.md", rankings_markdown(rank_variants(combined, k), *original, k));
    }
    log << fmt::format("report: {} rows written to {}\n", combined.size(), (rdir / "metrics.csv").string());
    return kExitOk;
}

}  // namespace vaf::cli
