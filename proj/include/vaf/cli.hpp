#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vaf/agent.hpp"
#include "vaf/episode.hpp"
#include "vaf/error.hpp"
#include "vaf/metrics.hpp"

namespace vaf::cli {

enum class JudgeMode { llm, lexical, off };

std::string_view to_string(JudgeMode m) noexcept;
/// Throws Error(InvalidConfig).
JudgeMode parse_judge_mode(std::string_view s);

struct JudgeSettings {
    JudgeMode mode = JudgeMode::lexical;
    std::string endpoint;
    std::string model;
    int timeout_ms = 120000;
    bool final_turn_only = false;  // scope "final": judge the last turn's thought instead of all turns
};

struct RunConfig {
    std::vector<std::filesystem::path> snapshot_roots;  // a snapshot dir or a dir of snapshot dirs
    std::optional<std::filesystem::path> catalog_path;
    std::string only;  // family name or variant id; empty = whole catalog
    AgentProfile agent;
    JudgeSettings judge;
    EpisodeConfig episode;
    std::string live_host = "127.0.0.1";
    int live_port = 9222;
    int jobs = 4;
    std::size_t top_k = 10;
    Averaging averaging = Averaging::macro;
    std::filesystem::path output_dir = "vaf-out";

    /// Throws Error(InvalidConfig) naming the offending field.
    void validate() const;
};

/// Parses a config document. Relative paths resolve against `base_dir`.
/// Throws Error(InvalidConfig) with a line/column or field location.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);
/// Fully resolved form; parsing it back yields the same config.
nlohmann::json config_to_json(const RunConfig& c);

/// Snapshot directories named by the config, in a stable order.
std::vector<std::filesystem::path> snapshot_dirs(const RunConfig& c);
/// The catalog after --only filtering.
std::vector<VariantSpec> effective_catalog(const RunConfig& c);

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // preservation failures and other runtime errors
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIncomplete = 3;
inline constexpr int kExitMissingBaseline = 4;

/// Writes variants/<id>/page.html and variants/preservation.json.
int cmd_generate(const RunConfig& c, std::ostream& log);
/// Runs (or resumes) the batch into trials.jsonl and layouts.json.
int cmd_run(const RunConfig& c, std::ostream& log);
/// Judges mentions and writes report/.
int cmd_report(const RunConfig& c, std::ostream& log);

/// Maps an error code to the CLI exit code.
int exit_code_for(Errc code) noexcept;

}  // namespace vaf::cli
