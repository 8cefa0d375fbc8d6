#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vaf/agent.hpp"
#include "vaf/render.hpp"
#include "vaf/variant.hpp"

namespace vaf {

enum class Termination { clicked, finished_no_click, step_budget_exhausted, agent_error };

std::string_view to_string(Termination t) noexcept;
Termination parse_termination(std::string_view s);

struct EpisodeConfig {
    int max_steps = 12;
    int trials_per_variant = 50;
    std::uint64_t seed = 0;
    std::string backend = "synthetic";
    bool record_images = false;
    std::filesystem::path image_dir;  // trials/<variant>/<trial>/step<k>.png lands here

    /// Throws Error(InvalidConfig).
    void validate() const;
};

struct TrialRecord {
    std::string variant_id;
    int trial_index = 0;
    std::vector<AgentTurn> turns;
    std::vector<int> scroll_trace;
    std::optional<Point> click_point;  // page-absolute
    int target_click = 0;
    std::string thoughts_concat;
    Termination termination = Termination::step_budget_exhausted;
    std::string error;
};

/// A variant that could not be applied to the page.
struct SkipMarker {
    std::string variant_id;
    std::string reason;  // error code name
    std::string detail;
};

/// Stable per-trial seed so any subset of a batch is reproducible alone.
std::uint64_t trial_seed(std::uint64_t seed, std::string_view variant_id, int trial_index) noexcept;

/// One episode on an open session. Agent and renderer failures end the trial
/// with termination=agent_error instead of propagating.
TrialRecord run_trial(RenderSession& session, const PageSource& page, const AgentFactory& agents,
                      const EpisodeConfig& config, int trial_index);

struct BatchOptions {
    int jobs = 1;
    std::set<std::pair<std::string, int>> completed;  // (variant, trial) pairs to skip on resume
    std::function<void(const TrialRecord&)> on_record;
    std::function<void(const SkipMarker&)> on_skip;
};

struct BatchResult {
    std::vector<TrialRecord> records;  // original first, then catalog order; by trial index within a variant
    std::vector<SkipMarker> skipped;
    std::map<std::string, LayoutIndex> layouts;
};

/// Runs the original page and every applicable catalog variant.
BatchResult run_batch(const LoadedSnapshot& loaded, const std::vector<VariantSpec>& catalog, RenderBackend& backend,
                      const AgentFactory& agents, const EpisodeConfig& config, const BatchOptions& options = {});

void to_json(nlohmann::json& j, const AgentTurn& t);
void from_json(const nlohmann::json& j, AgentTurn& t);
void to_json(nlohmann::json& j, const TrialRecord& r);
void from_json(const nlohmann::json& j, TrialRecord& r);
void to_json(nlohmann::json& j, const SkipMarker& s);
void from_json(const nlohmann::json& j, SkipMarker& s);

struct TrialLog {
    std::vector<TrialRecord> records;
    std::vector<SkipMarker> skipped;
};

/// JSON lines: one TrialRecord per line, skip markers carry `"skipped": true`.
/// A truncated final line (interrupted write) is ignored.
TrialLog read_trial_log(const std::filesystem::path& path);
std::string trial_log_line(const TrialRecord& r);
std::string trial_log_line(const SkipMarker& s);

}  // namespace vaf
