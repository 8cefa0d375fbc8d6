#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vaf/episode.hpp"
#include "vaf/judge.hpp"
#include "vaf/layout.hpp"
#include "vaf/snapshot.hpp"

namespace vaf {

/// Exact fraction in lowest terms with a positive denominator.
class Rational {
public:
    Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1);

    [[nodiscard]] std::int64_t num() const noexcept { return num_; }
    [[nodiscard]] std::int64_t den() const noexcept { return den_; }
    [[nodiscard]] double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    /// Decimal string rounded half away from zero, e.g. "0.180", "-0.360".
    [[nodiscard]] std::string format(int places = 3) const;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a);
    friend Rational operator/(const Rational& a, std::int64_t k);
    friend bool operator==(const Rational& a, const Rational& b) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
    double lo = 0;
    double hi = 0;
    [[nodiscard]] bool contains(double v) const noexcept { return lo <= v && v <= hi; }
};

/// Wilson score interval for k successes in n trials.
Interval wilson_interval(std::int64_t k, std::int64_t n, double z = kZ95);

/// Interval for p1 - p0 built from the two Wilson intervals (Newcombe's
/// hybrid score method).
Interval difference_interval(std::int64_t k1, std::int64_t n1, std::int64_t k0, std::int64_t n0, double z = kZ95);

struct MetricsRow {
    std::string variant_id;
    std::string family;  // empty for the original
    bool skipped = false;
    std::int64_t n_trials = 0;
    std::int64_t hits = 0;
    std::int64_t mentions = 0;
    std::int64_t clicked = 0;  // trials that ended in a click
    Rational tcr;
    std::optional<Rational> tmr;  // absent when no judge ran
    Rational delta_tcr;
    std::optional<Rational> delta_tmr;
    Interval tcr_ci95;
    Interval delta_ci95;
};

/// One verdict per record (same order) or none at all.
/// Rows: original first, then `order` (variants never seen come last in
/// first-appearance order); skipped variants yield skipped rows.
/// Throws Error(MissingBaseline).
std::vector<MetricsRow> compute_metrics(const std::vector<TrialRecord>& records,
                                        const std::vector<MentionVerdict>& verdicts,
                                        const std::vector<SkipMarker>& skipped = {},
                                        const std::vector<std::string>& order = {},
                                        const std::map<std::string, std::string>& families = {});

enum class Averaging { macro, micro };

std::string_view to_string(Averaging a) noexcept;
Averaging parse_averaging(std::string_view s);

/// Combines per-site metric tables of one scenario into one table. Macro
/// averages the per-site rates; micro pools the trial counts. A variant
/// skipped on every site stays skipped.
std::vector<MetricsRow> combine_sites(const std::vector<std::vector<MetricsRow>>& sites, Averaging how);

struct Ranking {
    std::vector<MetricsRow> top;     // ranks 1..k
    std::vector<MetricsRow> bottom;  // ranks n-k+1..n, in rank order
    std::size_t ranked = 0;
};

/// Sorts non-skipped variant rows by tcr desc, then delta_tcr desc, then id.
/// Throws Error(NotEnoughRows) when fewer than 2k rows qualify.
Ranking rank_variants(const std::vector<MetricsRow>& rows, std::size_t k);

struct ClickDistribution {
    std::string variant_id;
    std::vector<std::pair<std::string, std::int64_t>> per_item;  // manifest order
    std::int64_t off_item = 0;
    [[nodiscard]] std::int64_t total() const noexcept;
};

/// Assigns every clicked trial of `variant_id` to the item box containing
/// its click, or to off-item. Throws Error(OverlappingItemBoxes).
ClickDistribution click_distribution(const std::vector<TrialRecord>& records, const std::string& variant_id,
                                     const TargetManifest& manifest, const LayoutIndex& layout);

// --- heatmap ------------------------------------------------------------------

struct HeatmapMatrix {
    std::vector<std::string> rows;     // scenarios
    std::vector<std::string> columns;  // variant ids
    std::vector<std::vector<std::optional<double>>> values;  // nullopt renders as nan

    bool operator==(const HeatmapMatrix&) const = default;
};

/// Rows keyed by scenario name; cell = delta_tcr, nan when skipped or absent.
HeatmapMatrix heatmap_matrix(const std::map<std::string, std::vector<MetricsRow>>& by_scenario,
                             const std::vector<std::string>& columns);

/// Symmetric colour range: max |value| rounded up to a multiple of 0.05.
double heatmap_range(const HeatmapMatrix& m);
/// Diverging blue-white-red colour for v in [-range, range].
Rgba diverging_color(double v, double range);

std::string heatmap_svg(const HeatmapMatrix& m);
std::string heatmap_tsv(const HeatmapMatrix& m);
/// Throws std::invalid_argument.
HeatmapMatrix parse_heatmap_tsv(std::string_view text);

// --- report files -------------------------------------------------------------

std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::string rankings_markdown(const Ranking& ranking, const MetricsRow& original, std::size_t k);
std::string click_distribution_csv(const ClickDistribution& d);

}  // namespace vaf
