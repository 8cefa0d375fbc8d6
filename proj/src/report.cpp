#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "vaf/metrics.hpp"

namespace vaf {

HeatmapMatrix heatmap_matrix(const std::map<std::string, std::vector<MetricsRow>>& by_scenario,
                             const std::vector<std::string>& columns) {
    HeatmapMatrix m;
    m.columns = columns;
    for (const auto& [scenario, rows] : by_scenario) {
        m.rows.push_back(scenario);
        std::vector<std::optional<double>> line;
        for (const auto& col : columns) {
            auto it = std::find_if(rows.begin(), rows.end(), [&](const MetricsRow& r) { return r.variant_id == col; });
            if (it == rows.end() || it->skipped) {
                line.emplace_back(std::nullopt);
            } else {
                line.emplace_back(it->delta_tcr.to_double());
            }
        }
        m.values.push_back(std::move(line));
    }
    return m;
}

double heatmap_range(const HeatmapMatrix& m) {
    double peak = 0;
    for (const auto& row : m.values) {
        for (const auto& v : row) {
            if (v) peak = std::max(peak, std::abs(*v));
        }
    }
    // round up to 0.05 steps; work in integer hundredths to dodge float drift
    const auto hundredths = static_cast<long>(std::ceil(peak * 100 - 1e-9));
    const long steps = std::max(1L, (hundredths + 4) / 5);
    return static_cast<double>(steps) * 0.05;
}

Rgba diverging_color(double v, double range) {
    const Rgba neg{33, 102, 172, 255};
    const Rgba pos{178, 24, 43, 255};
    const double t = range > 0 ? std::clamp(v / range, -1.0, 1.0) : 0.0;
    const Rgba end = t < 0 ? neg : pos;
    const double a = std::abs(t);
    auto mix = [&](std::uint8_t c) { return static_cast<std::uint8_t>(std::lround(255 + (c - 255) * a)); };
    return {mix(end.r), mix(end.g), mix(end.b), 255};
}

namespace {

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string cell_text(const std::optional<double>& v) {
    if (!v) return "nan";
    std::string s = fmt::format("{:.3f}", *v);
    if (s == "-0.000") s = "0.000";
    return s;
}

}  // namespace

std::string heatmap_svg(const HeatmapMatrix& m) {
    constexpr int cell_w = 46;
    constexpr int cell_h = 30;
    constexpr int left = 120;
    constexpr int top = 190;
    constexpr int legend_w = 16;
    const int grid_w = cell_w * static_cast<int>(m.columns.size());
    const int grid_h = cell_h * static_cast<int>(m.rows.size());
    const int width = left + grid_w + 90;
    const int height = top + grid_h + 20;
    const double range = heatmap_range(m);

    std::string out;
    out += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
        "font-family=\"Helvetica, Arial, sans-serif\">\n",
        width, height, width, height);
    out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", width, height);
    out += fmt::format("<text x=\"{}\" y=\"18\" font-size=\"14\">Delta TCR (variant minus original)</text>\n", left);

    for (std::size_t c = 0; c < m.columns.size(); ++c) {
        const int x = left + static_cast<int>(c) * cell_w + cell_w / 2;
        out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\" transform=\"rotate(-60 {} {})\">{}</text>\n", x,
                           top - 6, x, top - 6, xml_escape(m.columns[c]));
    }
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        const int y = top + static_cast<int>(r) * cell_h;
        out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n", left - 6,
                           y + cell_h / 2 + 4, xml_escape(m.rows[r]));
        for (std::size_t c = 0; c < m.columns.size(); ++c) {
            const int x = left + static_cast<int>(c) * cell_w;
            const auto& v = m.values[r][c];
            const std::string fill = v ? to_hex(diverging_color(*v, range)).substr(0, 7) : "#d9d9d9";
            out += fmt::format(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#ffffff\"/>"
                "<text x=\"{}\" y=\"{}\" font-size=\"9\" text-anchor=\"middle\">{}</text>\n",
                x, y, cell_w, cell_h, fill, x + cell_w / 2, y + cell_h / 2 + 3, cell_text(v));
        }
    }

    // colour bar
    const int bar_x = left + grid_w + 20;
    constexpr int steps = 20;
    const int bar_h = std::max(grid_h, 100);
    for (int i = 0; i < steps; ++i) {
        const double v = range - (2 * range) * (i + 0.5) / steps;
        out += fmt::format("<rect x=\"{}\" y=\"{:.2f}\" width=\"{}\" height=\"{:.2f}\" fill=\"{}\"/>\n", bar_x,
                           top + bar_h * static_cast<double>(i) / steps, legend_w, static_cast<double>(bar_h) / steps,
                           to_hex(diverging_color(v, range)).substr(0, 7));
    }
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"9\">{:.2f}</text>\n", bar_x + legend_w + 4, top + 8, range);
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"9\">0.00</text>\n", bar_x + legend_w + 4, top + bar_h / 2 + 3);
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"9\">{:.2f}</text>\n", bar_x + legend_w + 4, top + bar_h,
                       -range);
    out += "</svg>\n";
    return out;
}

std::string heatmap_tsv(const HeatmapMatrix& m) {
    std::string out = "scenario";
    for (const auto& c : m.columns) out += "\t" + c;
    out += "\n";
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        out += m.rows[r];
        for (const auto& v : m.values[r]) out += "\t" + cell_text(v);
        out += "\n";
    }
    return out;
}

HeatmapMatrix parse_heatmap_tsv(std::string_view text) {
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, '\t')) cells.push_back(cell);
        return cells;
    };
    std::stringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty heatmap matrix");
    auto header = split(line);
    if (header.empty() || header[0] != "scenario") throw std::invalid_argument("heatmap matrix header must start with 'scenario'");
    HeatmapMatrix m;
    m.columns.assign(header.begin() + 1, header.end());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != m.columns.size() + 1) {
            throw std::invalid_argument(fmt::format("heatmap row '{}' has {} cells", cells.empty() ? "" : cells[0], cells.size()));
        }
        m.rows.push_back(cells[0]);
        std::vector<std::optional<double>> values;
        for (std::size_t i = 1; i < cells.size(); ++i) {
            if (cells[i] == "nan") {
                values.emplace_back(std::nullopt);
                continue;
            }
            std::size_t used = 0;
            const double v = std::stod(cells[i], &used);
            if (used != cells[i].size()) throw std::invalid_argument("bad heatmap cell '" + cells[i] + "'");
            values.emplace_back(v);
        }
        m.values.push_back(std::move(values));
    }
    return m;
}

// --- tables -------------------------------------------------------------------

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::string out =
        "variant_id,family,n_trials,hits,tcr,tcr_ci95_lo,tcr_ci95_hi,delta_tcr,delta_ci95_lo,delta_ci95_hi,"
        "mentions,tmr,delta_tmr,skipped\n";
    for (const auto& r : rows) {
        if (r.skipped) {
            out += fmt::format("{},{},0,0,nan,nan,nan,nan,nan,nan,0,nan,nan,true\n", r.variant_id, r.family);
            continue;
        }
        out += fmt::format("{},{},{},{},{},{:.3f},{:.3f},{},{:.3f},{:.3f},{},{},{},false\n", r.variant_id, r.family,
                           r.n_trials, r.hits, r.tcr.format(), r.tcr_ci95.lo, r.tcr_ci95.hi, r.delta_tcr.format(),
                           r.delta_ci95.lo, r.delta_ci95.hi, r.tmr ? std::to_string(r.mentions) : "",
                           r.tmr ? r.tmr->format() : "nan", r.delta_tmr ? r.delta_tmr->format() : "nan");
    }
    return out;
}

std::string rankings_markdown(const Ranking& ranking, const MetricsRow& original, std::size_t k) {
    auto line = [](const std::string& rank, const MetricsRow& r) {
        return fmt::format("| {} | {} | {} | {} | {} | [{:.3f}, {:.3f}] |\n", rank, r.variant_id, r.tcr.format(),
                           r.tmr ? r.tmr->format() : "n/a", r.delta_tcr.format(), r.tcr_ci95.lo, r.tcr_ci95.hi);
    };
    std::string out = fmt::format("# Top/Bottom-{} variants by target click rate\n\n", k);
    out += "| Rank | Variant | TCR | TMR | Delta TCR | TCR 95% CI |\n";
    out += "|---:|---|---:|---:|---:|---|\n";
    for (std::size_t i = 0; i < ranking.top.size(); ++i) out += line(std::to_string(i + 1), ranking.top[i]);
    MetricsRow baseline = original;
    baseline.variant_id = "original (baseline)";
    out += line("--", baseline);
    const std::size_t first_bottom = ranking.ranked - ranking.bottom.size() + 1;
    for (std::size_t i = 0; i < ranking.bottom.size(); ++i) out += line(std::to_string(first_bottom + i), ranking.bottom[i]);
    out += fmt::format("\n{} variants ranked; ties broken by delta TCR, then variant id.\n", ranking.ranked);
    return out;
}

std::string click_distribution_csv(const ClickDistribution& d) {
    std::string out = "item,clicks\n";
    for (const auto& [sel, n] : d.per_item) out += fmt::format("{},{}\n", sel, n);
    out += fmt::format("off_item,{}\n", d.off_item);
    return out;
}

}  // namespace vaf
