#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "vaf/error.hpp"
#include "vaf/metrics.hpp"

namespace vaf {

// --- Rational -----------------------------------------------------------------

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::invalid_argument("zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    num_ = g == 0 ? 0 : num / g;
    den_ = g == 0 ? 1 : den / g;
}

Rational operator+(const Rational& a, const Rational& b) {
    const std::int64_t l = std::lcm(a.den_, b.den_);
    return {a.num_ * (l / a.den_) + b.num_ * (l / b.den_), l};
}

Rational operator-(const Rational& a) { return {-a.num_, a.den_}; }
Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
Rational operator/(const Rational& a, std::int64_t k) { return {a.num_, a.den_ * k}; }

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const __int128 l = static_cast<__int128>(a.num_) * b.den_;
    const __int128 r = static_cast<__int128>(b.num_) * a.den_;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::string Rational::format(int places) const {
    __int128 scale = 1;
    for (int i = 0; i < places; ++i) scale *= 10;
    const bool negative = num_ < 0;
    const __int128 mag = negative ? -static_cast<__int128>(num_) : num_;
    // round half away from zero
    const __int128 q = (mag * scale * 2 + den_) / (2 * static_cast<__int128>(den_));
    const auto whole = static_cast<long long>(q / scale);
    const auto frac = static_cast<long long>(q % scale);
    std::string out = (negative && q != 0) ? "-" : "";
    out += std::to_string(whole);
    if (places > 0) out += fmt::format(".{:0{}d}", frac, places);
    return out;
}

// --- intervals ----------------------------------------------------------------

Interval wilson_interval(std::int64_t k, std::int64_t n, double z) {
    if (n <= 0) return {0, 1};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1 + z2 / nn;
    const double center = (p + z2 / (2 * nn)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

Interval difference_interval(std::int64_t k1, std::int64_t n1, std::int64_t k0, std::int64_t n0, double z) {
    const double p1 = n1 > 0 ? static_cast<double>(k1) / static_cast<double>(n1) : 0;
    const double p0 = n0 > 0 ? static_cast<double>(k0) / static_cast<double>(n0) : 0;
    const Interval w1 = wilson_interval(k1, n1, z);
    const Interval w0 = wilson_interval(k0, n0, z);
    const double d = p1 - p0;
    return {d - std::hypot(p1 - w1.lo, w0.hi - p0), d + std::hypot(w1.hi - p1, p0 - w0.lo)};
}

// --- metrics ------------------------------------------------------------------

std::vector<MetricsRow> compute_metrics(const std::vector<TrialRecord>& records,
                                        const std::vector<MentionVerdict>& verdicts,
                                        const std::vector<SkipMarker>& skipped, const std::vector<std::string>& order,
                                        const std::map<std::string, std::string>& families) {
    if (!verdicts.empty() && verdicts.size() != records.size()) {
        throw std::invalid_argument(fmt::format("{} verdicts for {} records", verdicts.size(), records.size()));
    }
    struct Counts {
        std::int64_t n = 0, hits = 0, mentions = 0, clicked = 0;
    };
    std::map<std::string, Counts> counts;
    std::vector<std::string> seen_order;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        auto [it, fresh] = counts.try_emplace(r.variant_id);
        if (fresh) seen_order.push_back(r.variant_id);
        auto& c = it->second;
        ++c.n;
        c.hits += r.target_click;
        c.clicked += r.termination == Termination::clicked ? 1 : 0;
        if (!verdicts.empty()) c.mentions += verdicts[i].score;
    }
    const auto base = counts.find(kOriginalVariantId);
    if (base == counts.end()) throw Error(Errc::MissingBaseline, "no trials for the original page");
    const Counts o = base->second;
    const Rational tcr_o(o.hits, o.n);
    const Rational tmr_o(o.mentions, o.n);
    const bool judged = !verdicts.empty();

    std::set<std::string> skip_ids;
    for (const auto& s : skipped) skip_ids.insert(s.variant_id);

    std::vector<std::string> ids{kOriginalVariantId};
    std::set<std::string> placed{kOriginalVariantId};
    for (const auto& id : order) {
        if ((counts.count(id) || skip_ids.count(id)) && placed.insert(id).second) ids.push_back(id);
    }
    for (const auto& id : seen_order) {
        if (placed.insert(id).second) ids.push_back(id);
    }
    for (const auto& s : skipped) {
        if (placed.insert(s.variant_id).second) ids.push_back(s.variant_id);
    }

    std::vector<MetricsRow> rows;
    for (const auto& id : ids) {
        MetricsRow row;
        row.variant_id = id;
        if (auto f = families.find(id); f != families.end()) row.family = f->second;
        const auto it = counts.find(id);
        if (it == counts.end()) {
            row.skipped = true;
            rows.push_back(std::move(row));
            continue;
        }
        const Counts& c = it->second;
        row.n_trials = c.n;
        row.hits = c.hits;
        row.mentions = c.mentions;
        row.clicked = c.clicked;
        row.tcr = Rational(c.hits, c.n);
        row.delta_tcr = row.tcr - tcr_o;
        if (judged) {
            row.tmr = Rational(c.mentions, c.n);
            row.delta_tmr = *row.tmr - tmr_o;
        }
        row.tcr_ci95 = wilson_interval(c.hits, c.n);
        row.delta_ci95 = difference_interval(c.hits, c.n, o.hits, o.n);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string_view to_string(Averaging a) noexcept { return a == Averaging::macro ? "macro" : "micro"; }

Averaging parse_averaging(std::string_view s) {
    if (s == "macro") return Averaging::macro;
    if (s == "micro") return Averaging::micro;
    throw std::invalid_argument(fmt::format("averaging must be macro or micro, got '{}'", s));
}

std::vector<MetricsRow> combine_sites(const std::vector<std::vector<MetricsRow>>& sites, Averaging how) {
    if (sites.size() == 1) return sites.front();
    std::vector<std::string> ids;
    std::map<std::string, std::vector<std::pair<std::size_t, const MetricsRow*>>> by_id;
    std::vector<const MetricsRow*> originals(sites.size(), nullptr);
    for (std::size_t s = 0; s < sites.size(); ++s) {
        for (const auto& row : sites[s]) {
            auto& v = by_id[row.variant_id];
            if (v.empty()) ids.push_back(row.variant_id);
            v.emplace_back(s, &row);
            if (row.variant_id == kOriginalVariantId) originals[s] = &row;
        }
    }
    for (std::size_t s = 0; s < sites.size(); ++s) {
        if (!originals[s]) throw Error(Errc::MissingBaseline, fmt::format("site {} has no original row", s));
    }

    std::vector<MetricsRow> out;
    for (const auto& id : ids) {
        MetricsRow row;
        row.variant_id = id;
        std::vector<std::pair<std::size_t, const MetricsRow*>> live;
        for (const auto& [s, r] : by_id[id]) {
            if (row.family.empty()) row.family = r->family;
            if (!r->skipped) live.emplace_back(s, r);
        }
        if (live.empty()) {
            row.skipped = true;
            out.push_back(std::move(row));
            continue;
        }
        // baselines of the sites this variant ran on
        std::int64_t base_n = 0, base_hits = 0, base_mentions = 0;
        bool judged = true;
        for (const auto& [s, r] : live) {
            row.n_trials += r->n_trials;
            row.hits += r->hits;
            row.mentions += r->mentions;
            row.clicked += r->clicked;
            judged = judged && r->tmr.has_value();
            base_n += originals[s]->n_trials;
            base_hits += originals[s]->hits;
            base_mentions += originals[s]->mentions;
        }
        const auto m = static_cast<std::int64_t>(live.size());
        if (how == Averaging::macro) {
            Rational tcr, delta, tmr, dtmr;
            for (const auto& [s, r] : live) {
                tcr = tcr + r->tcr;
                delta = delta + r->delta_tcr;
                if (judged) {
                    tmr = tmr + *r->tmr;
                    dtmr = dtmr + *r->delta_tmr;
                }
            }
            row.tcr = tcr / m;
            row.delta_tcr = delta / m;
            if (judged) {
                row.tmr = tmr / m;
                row.delta_tmr = dtmr / m;
            }
        } else {
            row.tcr = Rational(row.hits, row.n_trials);
            row.delta_tcr = row.tcr - Rational(base_hits, base_n);
            if (judged) {
                row.tmr = Rational(row.mentions, row.n_trials);
                row.delta_tmr = *row.tmr - Rational(base_mentions, base_n);
            }
        }
        row.tcr_ci95 = wilson_interval(row.hits, row.n_trials);
        row.delta_ci95 = difference_interval(row.hits, row.n_trials, base_hits, base_n);
        out.push_back(std::move(row));
    }
    return out;
}

Ranking rank_variants(const std::vector<MetricsRow>& rows, std::size_t k) {
    std::vector<MetricsRow> ranked;
    for (const auto& r : rows) {
        if (!r.skipped && r.variant_id != kOriginalVariantId) ranked.push_back(r);
    }
    if (ranked.size() < 2 * k) {
        throw Error(Errc::NotEnoughRows, fmt::format("{} ranked rows, need at least {}", ranked.size(), 2 * k));
    }
    std::sort(ranked.begin(), ranked.end(), [](const MetricsRow& a, const MetricsRow& b) {
        if (a.tcr != b.tcr) return a.tcr > b.tcr;
        if (a.delta_tcr != b.delta_tcr) return a.delta_tcr > b.delta_tcr;
        return a.variant_id < b.variant_id;
    });
    Ranking out;
    out.ranked = ranked.size();
    out.top.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
    out.bottom.assign(ranked.end() - static_cast<std::ptrdiff_t>(k), ranked.end());
    return out;
}

std::int64_t ClickDistribution::total() const noexcept {
    std::int64_t t = off_item;
    for (const auto& [sel, n] : per_item) t += n;
    return t;
}

ClickDistribution click_distribution(const std::vector<TrialRecord>& records, const std::string& variant_id,
                                     const TargetManifest& manifest, const LayoutIndex& layout) {
    validate_disjoint(layout, manifest.item_selectors);
    ClickDistribution d;
    d.variant_id = variant_id;
    for (const auto& sel : manifest.item_selectors) d.per_item.emplace_back(sel, 0);
    for (const auto& r : records) {
        if (r.variant_id != variant_id || r.termination != Termination::clicked || !r.click_point) continue;
        bool placed = false;
        for (auto& [sel, n] : d.per_item) {
            if (layout.contains(sel) && hit_test(*r.click_point, layout.box(sel))) {
                ++n;
                placed = true;
                break;
            }
        }
        if (!placed) ++d.off_item;
    }
    return d;
}

}  // namespace vaf
