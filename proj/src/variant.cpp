#include "vaf/variant.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "vaf/error.hpp"

namespace vaf {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_number(double v) { return fmt::format("{}", v); }

VariantSpec style_spec(std::string id, VariantFamily family, std::string property, std::string value) {
    return {std::move(id), family, StyleOverride{{{std::move(property), std::move(value)}}}};
}

}  // namespace

std::string_view to_string(VariantFamily f) noexcept {
    switch (f) {
        case VariantFamily::background_color: return "background_color";
        case VariantFamily::text_color: return "text_color";
        case VariantFamily::font_family: return "font_family";
        case VariantFamily::font_size: return "font_size";
        case VariantFamily::position: return "position";
        case VariantFamily::card_size: return "card_size";
        case VariantFamily::clarity: return "clarity";
        case VariantFamily::order: return "order";
    }
    return "?";
}

std::vector<VariantFamily> all_families() {
    return {VariantFamily::background_color, VariantFamily::text_color, VariantFamily::font_family,
            VariantFamily::font_size,        VariantFamily::position,   VariantFamily::card_size,
            VariantFamily::clarity,          VariantFamily::order};
}

std::optional<VariantFamily> parse_family(std::string_view name) noexcept {
    for (VariantFamily f : all_families()) {
        if (to_string(f) == name) return f;
    }
    return std::nullopt;
}

std::string_view sharpen_filter_css() noexcept {
    return "url('data:image/svg+xml,%3Csvg xmlns=%22http://www.w3.org/2000/svg%22%3E%3Cfilter id=%22vaf-sharpen%22%3E"
           "%3CfeConvolveMatrix order=%223%22 kernelMatrix=%220 -1 0 -1 5 -1 0 -1 0%22/%3E%3C/filter%3E%3C/svg%3E"
           "#vaf-sharpen')";
}

std::vector<VariantSpec> default_catalog() {
    std::vector<VariantSpec> out;
    out.reserve(kDefaultCatalogSize);

    for (const char* hex : {"4caf50", "ff9800", "1976d2", "6f42c1", "ffeb3b", "e91e63", "f44336", "00bcd4",
                            "2196f3", "42a5f5", "9c27b0"}) {
        out.push_back(style_spec(fmt::format("background_{}", hex), VariantFamily::background_color,
                                 "background-color", fmt::format("#{}", hex)));
    }
    for (const char* hex : {"111111", "dc3545", "007bff", "28a745", "6c757d", "fd7e14"}) {
        out.push_back(
            style_spec(fmt::format("textColor_{}", hex), VariantFamily::text_color, "color", fmt::format("#{}", hex)));
    }
    const std::pair<const char*, const char*> families[] = {
        {"arial", "Arial, sans-serif"},
        {"helvetica", "Helvetica, Arial, sans-serif"},
        {"roboto", "Roboto, sans-serif"},
        {"opensans", "'Open Sans', sans-serif"},
        {"times", "'Times New Roman', Times, serif"},
        {"georgia", "Georgia, serif"},
        {"merriweather", "Merriweather, serif"},
        {"courier", "'Courier New', Courier, monospace"},
        {"jetbrains-mono", "'JetBrains Mono', monospace"},
        {"comic", "'Comic Sans MS', cursive"},
    };
    for (const auto& [name, stack] : families) {
        out.push_back(style_spec(fmt::format("fontFamily_{}", name), VariantFamily::font_family, "font-family", stack));
    }
    for (int px : {14, 16, 18, 22, 24}) {
        out.push_back(
            style_spec(fmt::format("fontSize_{}px", px), VariantFamily::font_size, "font-size", fmt::format("{}px", px)));
    }
    for (const char* slot : {"header", "sidebar", "banner", "spotlight"}) {
        out.push_back({fmt::format("position_{}", slot), VariantFamily::position, Relocate{slot}});
    }
    for (double f : {0.8, 1.2, 1.5}) {
        out.push_back({fmt::format("card_size_scale_{}", format_number(f)), VariantFamily::card_size, Scale{f}});
    }
    for (int r : {1, 2, 4}) {
        out.push_back({fmt::format("card_clarity_blur_{}px", r), VariantFamily::clarity, Blur{BlurScope::card, double(r)}});
    }
    for (int r : {1, 2, 4}) {
        out.push_back(
            {fmt::format("image_clarity_blur_{}px", r), VariantFamily::clarity, Blur{BlurScope::image, double(r)}});
    }
    out.push_back({"card_clarity_sharp", VariantFamily::clarity, Sharpen{}});
    out.push_back({"order_middle", VariantFamily::order, Reorder{ReorderPosition::middle}});
    out.push_back({"order_last", VariantFamily::order, Reorder{ReorderPosition::last}});
    return out;
}

// --- catalog files -----------------------------------------------------------

namespace {

[[noreturn]] void bad_entry(std::size_t index, const std::string& what) {
    throw Error(Errc::MalformedCatalog, fmt::format("entry {}: {}", index, what));
}

Mutation parse_mutation(const ordered_json& m, std::size_t index) {
    if (!m.is_object() || !m.contains("type") || !m.at("type").is_string()) bad_entry(index, "mutation.type missing");
    const std::string type = m.at("type").get<std::string>();
    try {
        if (type == "style") {
            StyleOverride s;
            for (const auto& [k, v] : m.at("properties").items()) s.properties.emplace_back(k, v.get<std::string>());
            if (s.properties.empty()) bad_entry(index, "style mutation without properties");
            return s;
        }
        if (type == "relocate") return Relocate{m.at("slot").get<std::string>()};
        if (type == "reorder") {
            const std::string p = m.at("position").get<std::string>();
            if (p == "middle") return Reorder{ReorderPosition::middle};
            if (p == "last") return Reorder{ReorderPosition::last};
            bad_entry(index, "reorder position must be middle|last");
        }
        if (type == "blur") {
            const std::string scope = m.at("scope").get<std::string>();
            if (scope != "card" && scope != "image") bad_entry(index, "blur scope must be card|image");
            const double r = m.at("radius_px").get<double>();
            if (r <= 0) bad_entry(index, "blur radius must be positive");
            return Blur{scope == "card" ? BlurScope::card : BlurScope::image, r};
        }
        if (type == "sharpen") return Sharpen{};
        if (type == "scale") {
            const double f = m.at("factor").get<double>();
            if (f <= 0) bad_entry(index, "scale factor must be positive");
            return Scale{f};
        }
    } catch (const ordered_json::exception& e) {
        bad_entry(index, e.what());
    }
    bad_entry(index, "unknown mutation type '" + type + "'");
}

ordered_json mutation_json(const Mutation& m) {
    return std::visit(
        [](const auto& v) -> ordered_json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, StyleOverride>) {
                ordered_json props = ordered_json::object();
                for (const auto& [k, val] : v.properties) props[k] = val;
                return {{"type", "style"}, {"properties", props}};
            } else if constexpr (std::is_same_v<T, Relocate>) {
                return {{"type", "relocate"}, {"slot", v.anchor_slot}};
            } else if constexpr (std::is_same_v<T, Reorder>) {
                return {{"type", "reorder"}, {"position", v.position == ReorderPosition::middle ? "middle" : "last"}};
            } else if constexpr (std::is_same_v<T, Blur>) {
                return {{"type", "blur"}, {"scope", v.scope == BlurScope::card ? "card" : "image"}, {"radius_px", v.radius_px}};
            } else if constexpr (std::is_same_v<T, Sharpen>) {
                return {{"type", "sharpen"}};
            } else {
                return {{"type", "scale"}, {"factor", v.factor}};
            }
        },
        m);
}

}  // namespace

std::vector<VariantSpec> parse_catalog(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        std::size_t line = 1;
        std::size_t column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw Error(Errc::MalformedCatalog, fmt::format("line {}, column {}: {}", line, column, e.what()));
    }
    if (!doc.is_array()) throw Error(Errc::MalformedCatalog, "catalog must be a JSON array");
    std::vector<VariantSpec> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& e = doc[i];
        if (!e.is_object() || !e.contains("id") || !e.at("id").is_string()) bad_entry(i, "id missing");
        VariantSpec spec;
        spec.id = e.at("id").get<std::string>();
        if (spec.id == "original") bad_entry(i, "'original' is reserved");
        if (!seen.insert(spec.id).second) bad_entry(i, "duplicate id '" + spec.id + "'");
        const auto family = parse_family(e.value("family", std::string{}));
        if (!family) bad_entry(i, "unknown family");
        spec.family = *family;
        if (!e.contains("mutation")) bad_entry(i, "mutation missing");
        spec.mutation = parse_mutation(e.at("mutation"), i);
        out.push_back(std::move(spec));
    }
    return out;
}

std::vector<VariantSpec> load_catalog(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::MalformedCatalog, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_catalog(ss.str());
    } catch (const Error& e) {
        throw Error(Errc::MalformedCatalog, path.string() + ": " + e.detail());
    }
}

std::string catalog_to_json(const std::vector<VariantSpec>& catalog) {
    ordered_json arr = ordered_json::array();
    for (const auto& s : catalog) {
        arr.push_back({{"id", s.id}, {"family", std::string(to_string(s.family))}, {"mutation", mutation_json(s.mutation)}});
    }
    return arr.dump(2);
}

std::vector<VariantSpec> filter_catalog(const std::vector<VariantSpec>& catalog, std::string_view selector) {
    std::vector<VariantSpec> out;
    for (const auto& s : catalog) {
        if (s.id == selector || to_string(s.family) == selector) out.push_back(s);
    }
    return out;
}

// --- mutation ------------------------------------------------------------------

namespace {

void set_styles(html::Node& el, const std::vector<std::pair<std::string, std::string>>& props) {
    auto style = html::inline_style_of(el);
    for (const auto& [k, v] : props) style.set(k, v);
    el.set_attribute("style", style.serialize());
}

void collect_images(const html::Node& n, std::vector<html::Node*>& out) {
    for (const auto& c : n.children()) {
        if (c->is_element() && c->tag() == "img") out.push_back(c.get());
        collect_images(*c, out);
    }
}

}  // namespace

std::vector<std::string> apply_mutation(html::Document& doc, const TargetManifest& manifest, const VariantSpec& spec) {
    html::Node& target = resolve_unique(doc.root(), manifest.target_selector);
    const std::string& tsel = manifest.target_selector;
    std::vector<std::string> provenance;

    auto style = [&](const std::vector<std::pair<std::string, std::string>>& props, html::Node& el, const std::string& where) {
        set_styles(el, props);
        for (const auto& [k, v] : props) provenance.push_back(fmt::format("style {} {}: {}", where, k, v));
    };

    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, StyleOverride>) {
                style(m.properties, target, tsel);
            } else if constexpr (std::is_same_v<T, Scale>) {
                style({{"transform", fmt::format("scale({})", format_number(m.factor))}, {"transform-origin", "top left"}},
                      target, tsel);
            } else if constexpr (std::is_same_v<T, Blur>) {
                const std::string filter = fmt::format("blur({}px)", format_number(m.radius_px));
                if (m.scope == BlurScope::card) {
                    style({{"filter", filter}}, target, tsel);
                } else {
                    std::vector<html::Node*> images;
                    collect_images(target, images);
                    if (images.empty()) throw Error(Errc::NotApplicable, spec.id + ": target card has no image");
                    for (std::size_t i = 0; i < images.size(); ++i) {
                        style({{"filter", filter}}, *images[i], fmt::format("{} img[{}]", tsel, i + 1));
                    }
                }
            } else if constexpr (std::is_same_v<T, Sharpen>) {
                style({{"filter", std::string(sharpen_filter_css())}}, target, tsel);
            } else if constexpr (std::is_same_v<T, Relocate>) {
                auto it = manifest.anchor_slots.find(m.anchor_slot);
                if (it == manifest.anchor_slots.end()) {
                    throw Error(Errc::AnchorSlotMissing, fmt::format("{}: no '{}' slot in manifest", spec.id, m.anchor_slot));
                }
                html::Node& slot = resolve_unique(doc.root(), it->second);
                if (target.contains(slot)) throw Error(Errc::NotApplicable, spec.id + ": anchor slot lies inside the target");
                if (target.parent() == &slot) return;  // already relocated
                slot.append_child(target.detach());
                provenance.push_back(fmt::format("move {} -> {}", tsel, it->second));
            } else if constexpr (std::is_same_v<T, Reorder>) {
                const std::size_t n = manifest.item_selectors.size();
                if (n < 2) throw Error(Errc::NotApplicable, spec.id + ": fewer than two items");
                const std::size_t want = m.position == ReorderPosition::middle ? n / 2 : n - 1;
                // other items in their current document order
                std::vector<html::Node*> others;
                for (const html::Node* node : html::query_all(doc.root(), html::Selector::parse([&] {
                         std::string list;
                         for (const auto& s : manifest.item_selectors) list += (list.empty() ? "" : ", ") + s;
                         return list;
                     }()))) {
                    if (node != &target) others.push_back(const_cast<html::Node*>(node));
                }
                if (others.size() != n - 1) throw Error(Errc::NotApplicable, spec.id + ": item selectors are not unique");
                auto owned = target.detach();
                html::Node* anchor = want < others.size() ? others[want] : others.back();
                html::Node* parent = anchor->parent();
                const std::size_t at = anchor->index_in_parent() + (want < others.size() ? 0 : 1);
                parent->insert_child(at, std::move(owned));
                provenance.push_back(fmt::format("reorder {} -> index {} of {}", tsel, want, n));
            }
        },
        spec.mutation);
    return provenance;
}

VariantPage apply_variant(const Snapshot& snap, const TargetManifest& manifest, const VariantSpec& spec) {
    VariantPage page{snap.id, spec, snap.document, {}};
    page.provenance = apply_mutation(page.document, manifest, spec);
    return page;
}

// --- preservation --------------------------------------------------------------

std::string_view to_string(PreservationDiff::Kind k) noexcept {
    switch (k) {
        case PreservationDiff::Kind::text: return "text";
        case PreservationDiff::Kind::link: return "link";
        case PreservationDiff::Kind::structure: return "structure";
    }
    return "?";
}

namespace {

const html::Node* find_unique(const html::Node& root, const std::string& sel) {
    auto hits = html::query_all(root, sel);
    return hits.size() == 1 ? hits.front() : nullptr;
}

void collect_links(const html::Node& n, std::multiset<std::string>& out) {
    if (n.is_element()) {
        for (const char* attr : {"href", "action", "formaction"}) {
            if (const std::string* v = n.attribute(attr)) out.insert(n.tag() + " " + attr + "=" + *v);
        }
    }
    for (const auto& c : n.children()) collect_links(*c, out);
}

std::vector<const html::Node*> elements_excluding(const html::Node& n, const html::Node* skip) {
    std::vector<const html::Node*> out;
    for (const auto& c : n.children()) {
        if (c->is_element() && c.get() != skip) out.push_back(c.get());
    }
    return out;
}

std::vector<html::Attribute> attrs_without_style(const html::Node& n) {
    std::vector<html::Attribute> out;
    for (const auto& a : n.attributes()) {
        if (a.name != "style") out.push_back(a);
    }
    return out;
}

struct StructureWalker {
    const html::Node* skip_a;
    const html::Node* skip_b;
    bool ignore_style;
    std::vector<PreservationDiff>& diffs;

    void walk(const html::Node& a, const html::Node& b) {
        if (a.tag() != b.tag()) {
            diffs.push_back({PreservationDiff::Kind::structure, html::node_path(b),
                             fmt::format("element <{}> became <{}>", a.tag(), b.tag())});
            return;
        }
        const bool attrs_equal =
            ignore_style ? attrs_without_style(a) == attrs_without_style(b) : a.attributes() == b.attributes();
        if (!attrs_equal) {
            diffs.push_back({PreservationDiff::Kind::structure, html::node_path(b), "attributes changed"});
        }
        const auto ca = elements_excluding(a, skip_a);
        const auto cb = elements_excluding(b, skip_b);
        if (ca.size() != cb.size()) {
            diffs.push_back({PreservationDiff::Kind::structure, html::node_path(b),
                             fmt::format("child element count {} -> {}", ca.size(), cb.size())});
            return;
        }
        for (std::size_t i = 0; i < ca.size(); ++i) walk(*ca[i], *cb[i]);
    }
};

bool is_move(const Mutation& m) {
    return std::holds_alternative<Relocate>(m) || std::holds_alternative<Reorder>(m);
}

}  // namespace

PreservationReport verify_preservation(const html::Document& original, const VariantPage& variant,
                                       const TargetManifest& manifest) {
    PreservationReport report;
    auto& diffs = report.diffs;
    const html::Node& o_root = original.root();
    const html::Node& v_root = variant.document.root();

    const html::Node* o_target = find_unique(o_root, manifest.target_selector);
    const html::Node* v_target = find_unique(v_root, manifest.target_selector);
    if (o_target == nullptr || v_target == nullptr) {
        diffs.push_back({PreservationDiff::Kind::structure, "/", "target does not resolve to exactly one element"});
        report.ok = false;
        return report;
    }
    for (const auto& sel : manifest.item_selectors) {
        if (find_unique(v_root, sel) == nullptr) {
            diffs.push_back({PreservationDiff::Kind::structure, "/", "item " + sel + " no longer resolves uniquely"});
        }
    }

    if (html::visible_text(*o_target) != html::visible_text(*v_target)) {
        diffs.push_back({PreservationDiff::Kind::text, html::node_path(*v_target), "target text changed"});
    }
    if (html::visible_text(o_root, o_target) != html::visible_text(v_root, v_target)) {
        diffs.push_back({PreservationDiff::Kind::text, "/", "text outside the target changed"});
    }

    std::multiset<std::string> o_links;
    std::multiset<std::string> v_links;
    collect_links(o_root, o_links);
    collect_links(v_root, v_links);
    if (o_links != v_links) {
        std::vector<std::string> missing;
        std::vector<std::string> added;
        std::set_difference(o_links.begin(), o_links.end(), v_links.begin(), v_links.end(), std::back_inserter(missing));
        std::set_difference(v_links.begin(), v_links.end(), o_links.begin(), o_links.end(), std::back_inserter(added));
        for (const auto& l : missing) diffs.push_back({PreservationDiff::Kind::link, "/", "missing " + l});
        for (const auto& l : added) diffs.push_back({PreservationDiff::Kind::link, "/", "added " + l});
    }

    StructureWalker outside{o_target, v_target, false, diffs};
    outside.walk(o_root, v_root);
    StructureWalker inside{nullptr, nullptr, true, diffs};
    inside.walk(*o_target, *v_target);

    if (!is_move(variant.spec.mutation)) {
        const bool same_place = o_target->parent() && v_target->parent() &&
                                html::node_path(*o_target->parent()) == html::node_path(*v_target->parent()) &&
                                html::node_path(*o_target) == html::node_path(*v_target);
        if (!same_place) {
            diffs.push_back({PreservationDiff::Kind::structure, html::node_path(*v_target),
                             "target moved by a presentation-only variant"});
        }
    }

    report.ok = diffs.empty();
    return report;
}

PreservationReport verify_preservation(const Snapshot& original, const VariantPage& variant,
                                       const TargetManifest& manifest) {
    return verify_preservation(original.document, variant, manifest);
}

}  // namespace vaf
