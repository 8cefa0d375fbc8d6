// vaf: generate variants, run browsing trials, build reports.

#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "vaf/cli.hpp"
#include "vaf/error.hpp"

namespace {

struct Overrides {
    std::string config;
    std::vector<std::string> snapshots;
    std::string catalog;
    std::string only;
    std::string agent;
    std::string endpoint;
    std::string model;
    std::string backend;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<int> max_steps;
    std::string judge;
    std::string judge_scope;
    std::string judge_endpoint;
    std::string judge_model;
    std::optional<int> top_k;
    std::string average;
    std::string out;
    std::optional<int> live_port;
    bool record_images = false;
};

void add_flags(CLI::App& app, Overrides& o) {
    app.add_option("--config", o.config, "run config (JSON)");
    app.add_option("--snapshot", o.snapshots, "snapshot dir, or a dir of snapshot dirs (repeatable)");
    app.add_option("--catalog", o.catalog, "variant catalog (JSON); default is the built-in 48");
    app.add_option("--only", o.only, "restrict to one family or variant id");
    app.add_option("--agent", o.agent, "scripted:top_bias:0.5 | scripted:saliency:2,2,0.3 | scripted:uniform | remote[:model]");
    app.add_option("--endpoint", o.endpoint, "chat-completion URL for a remote agent");
    app.add_option("--model", o.model, "model name sent to the remote agent endpoint");
    app.add_option("--backend", o.backend, "live | synthetic")->check(CLI::IsMember({"live", "synthetic"}));
    app.add_option("--trials", o.trials, "trials per variant");
    app.add_option("--seed", o.seed, "batch seed");
    app.add_option("--jobs", o.jobs, "concurrent sessions and in-flight requests");
    app.add_option("--max-steps", o.max_steps, "step budget per trial");
    app.add_flag("--record-images", o.record_images, "keep every viewport as PNG");
    app.add_option("--live-port", o.live_port, "browser remote-debugging port");
    app.add_option("--judge", o.judge, "llm | lexical | off")->check(CLI::IsMember({"llm", "lexical", "off"}));
    app.add_option("--judge-scope", o.judge_scope, "all | final: which turns' thoughts are judged")
        ->check(CLI::IsMember({"all", "final"}));
    app.add_option("--judge-endpoint", o.judge_endpoint, "chat-completion URL for the judge");
    app.add_option("--judge-model", o.judge_model, "judge model name");
    app.add_option("--top-k", o.top_k, "ranking depth");
    app.add_option("--average", o.average, "macro | micro across sites")->check(CLI::IsMember({"macro", "micro"}));
    app.add_option("--out", o.out, "output directory");
}

vaf::cli::RunConfig resolve(const Overrides& o) {
    namespace fs = std::filesystem;
    vaf::cli::RunConfig c = o.config.empty() ? vaf::cli::RunConfig{} : vaf::cli::load_config(o.config);
    if (o.config.empty()) c.output_dir = fs::absolute(c.output_dir);
    if (!o.snapshots.empty()) {
        c.snapshot_roots.clear();
        for (const auto& s : o.snapshots) c.snapshot_roots.push_back(fs::absolute(s).lexically_normal());
    }
    if (!o.catalog.empty()) c.catalog_path = fs::absolute(o.catalog).lexically_normal();
    if (!o.only.empty()) c.only = o.only;
    if (!o.endpoint.empty()) c.agent.endpoint = o.endpoint;
    if (!o.model.empty()) c.agent.model = o.model;
    if (!o.agent.empty()) c.agent = vaf::parse_agent_spec(o.agent, c.agent);
    if (!o.backend.empty()) c.episode.backend = o.backend;
    if (o.trials) c.episode.trials_per_variant = *o.trials;
    if (o.seed) c.episode.seed = *o.seed;
    if (o.jobs) c.jobs = *o.jobs;
    if (o.max_steps) c.episode.max_steps = *o.max_steps;
    if (o.record_images) c.episode.record_images = true;
    if (o.live_port) c.live_port = *o.live_port;
    if (!o.judge.empty()) c.judge.mode = vaf::cli::parse_judge_mode(o.judge);
    if (!o.judge_scope.empty()) c.judge.final_turn_only = o.judge_scope == "final";
    if (!o.judge_endpoint.empty()) c.judge.endpoint = o.judge_endpoint;
    if (!o.judge_model.empty()) c.judge.model = o.judge_model;
    if (o.top_k) {
        if (*o.top_k < 1) throw vaf::Error(vaf::Errc::InvalidConfig, "--top-k must be >= 1");
        c.top_k = static_cast<std::size_t>(*o.top_k);
    }
    if (!o.average.empty()) c.averaging = vaf::parse_averaging(o.average);
    if (!o.out.empty()) c.output_dir = fs::absolute(o.out).lexically_normal();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Visual-attribute evaluation harness for web agents"};
    app.require_subcommand(1);
    Overrides o;
    auto* generate = app.add_subcommand("generate", "write variant pages and the preservation report");
    auto* run = app.add_subcommand("run", "run (or resume) browsing trials");
    auto* report = app.add_subcommand("report", "judge mentions and write metrics, heatmap and rankings");
    for (auto* sub : {generate, run, report}) add_flags(*sub, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : vaf::cli::kExitConfig;
    }

    try {
        const auto config = resolve(o);
        if (generate->parsed()) return vaf::cli::cmd_generate(config, std::cerr);
        if (run->parsed()) return vaf::cli::cmd_run(config, std::cerr);
        return vaf::cli::cmd_report(config, std::cerr);
    } catch (const vaf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return vaf::cli::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return vaf::cli::kExitFailure;
    }
}
