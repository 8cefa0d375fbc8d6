#include "vaf/snapshot.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "vaf/color.hpp"
#include "vaf/error.hpp"

namespace vaf {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::MalformedManifest, what); }

template <typename T>
T required(const json& j, const char* key) {
    if (!j.contains(key)) malformed(fmt::format("missing key '{}'", key));
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        malformed(fmt::format("key '{}': {}", key, e.what()));
    }
}

BaselineStyle parse_baseline(const json& j) {
    if (!j.is_object()) malformed("baseline_style must be an object");
    BaselineStyle b;
    b.background = required<std::string>(j, "background");
    b.text_color = required<std::string>(j, "text_color");
    b.font_family = required<std::string>(j, "font_family");
    const json& fs = j.contains("font_size") ? j.at("font_size") : json();
    if (fs.is_number()) {
        b.font_size_px = fs.get<double>();
    } else if (fs.is_string()) {
        std::string s = fs.get<std::string>();
        if (s.size() > 2 && s.substr(s.size() - 2) == "px") s.resize(s.size() - 2);
        try {
            b.font_size_px = std::stod(s);
        } catch (const std::exception&) {
            malformed("baseline_style.font_size is not a px length");
        }
    } else {
        malformed("missing key 'font_size'");
    }
    if (!is_hex_color(b.background)) malformed("baseline_style.background is not 6/8-digit hex: " + b.background);
    if (!is_hex_color(b.text_color)) malformed("baseline_style.text_color is not 6/8-digit hex: " + b.text_color);
    if (b.font_size_px <= 0) malformed("baseline_style.font_size must be positive");
    return b;
}

SyntheticGeometry parse_geometry(const json& j) {
    SyntheticGeometry g;
    if (j.is_null()) return g;
    g.list_x = j.value("list_x", g.list_x);
    g.list_top = j.value("list_top", g.list_top);
    g.item_width = j.value("item_width", g.item_width);
    g.item_height = j.value("item_height", g.item_height);
    g.item_gap = j.value("item_gap", g.item_gap);
    g.page_background = j.value("page_background", g.page_background);
    if (j.contains("slot_origins")) {
        for (const auto& [name, xy] : j.at("slot_origins").items()) {
            if (!xy.is_array() || xy.size() != 2) malformed("slot_origins." + name + " must be [x, y]");
            g.slot_origins[name] = Point{xy[0].get<int>(), xy[1].get<int>()};
        }
    }
    if (g.item_width <= 0 || g.item_height <= 0) malformed("synthetic item size must be positive");
    return g;
}

}  // namespace

std::string_view to_string(Scenario s) noexcept {
    switch (s) {
        case Scenario::shopping: return "shopping";
        case Scenario::travel: return "travel";
        case Scenario::news: return "news";
        case Scenario::custom: return "custom";
    }
    return "custom";
}

Scenario parse_scenario(std::string_view name) {
    if (name == "shopping") return Scenario::shopping;
    if (name == "travel") return Scenario::travel;
    if (name == "news") return Scenario::news;
    if (name == "custom") return Scenario::custom;
    throw std::invalid_argument(fmt::format("unknown scenario '{}'", name));
}

const html::Node& resolve_unique(const html::Node& scope, const std::string& selector) {
    std::vector<const html::Node*> hits;
    try {
        hits = html::query_all(scope, selector);
    } catch (const std::invalid_argument& e) {
        throw Error(Errc::MalformedManifest, e.what());
    }
    if (hits.empty()) throw Error(Errc::SelectorNotFound, selector);
    if (hits.size() > 1) throw Error(Errc::SelectorNotUnique, fmt::format("{} matches {} elements", selector, hits.size()));
    return *hits.front();
}

html::Node& resolve_unique(html::Node& scope, const std::string& selector) {
    return const_cast<html::Node&>(resolve_unique(static_cast<const html::Node&>(scope), selector));
}

LoadedSnapshot load_snapshot(const std::filesystem::path& root) {
    const auto page_path = root / "page.html";
    const auto manifest_path = root / "manifest.json";
    if (!std::filesystem::is_regular_file(page_path)) throw Error(Errc::MissingDocument, page_path.string());
    if (!std::filesystem::is_regular_file(manifest_path)) malformed("missing " + manifest_path.string());

    json m;
    try {
        m = json::parse(read_file(manifest_path));
    } catch (const json::parse_error& e) {
        malformed(fmt::format("{}: {}", manifest_path.string(), e.what()));
    }
    if (!m.is_object()) malformed("manifest must be a JSON object");

    auto snap = std::make_shared<Snapshot>();
    snap->root = root;
    snap->asset_root = root / "assets";
    snap->document = html::parse(read_file(page_path));
    snap->id = m.value("id", root.filename().string());
    try {
        snap->scenario = parse_scenario(required<std::string>(m, "scenario"));
    } catch (const std::invalid_argument& e) {
        malformed(e.what());
    }
    snap->baseline_style = parse_baseline(m.contains("baseline_style") ? m.at("baseline_style") : json());
    snap->page_height_px = required<int>(m, "page_height_px");
    if (snap->page_height_px < kMinPageHeight) {
        malformed(fmt::format("page_height_px {} is below one viewport ({})", snap->page_height_px, kMinPageHeight));
    }
    if (m.contains("prompt")) {
        for (const auto& [k, v] : m.at("prompt").items()) {
            if (!v.is_string()) malformed("prompt." + k + " must be a string");
            snap->prompt_fields[k] = v.get<std::string>();
        }
    }
    snap->synthetic = parse_geometry(m.value("synthetic_layout", json()));

    TargetManifest manifest;
    manifest.item_selectors = required<std::vector<std::string>>(m, "item_selectors");
    if (manifest.item_selectors.empty()) malformed("item_selectors must not be empty");
    manifest.target_selector = m.value("target_selector", manifest.item_selectors.front());
    manifest.target_name = required<std::string>(m, "target_name");
    if (m.contains("anchor_slots")) {
        manifest.anchor_slots = m.at("anchor_slots").get<std::map<std::string, std::string>>();
    }
    for (const auto& [slot, _] : manifest.anchor_slots) {
        if (slot != "header" && slot != "sidebar" && slot != "banner" && slot != "spotlight") {
            malformed("unknown anchor slot '" + slot + "'");
        }
    }

    const html::Node& doc = snap->document.root();
    resolve_unique(doc, manifest.target_selector);
    for (const auto& sel : manifest.item_selectors) resolve_unique(doc, sel);
    for (const auto& [_, sel] : manifest.anchor_slots) resolve_unique(doc, sel);
    if (std::find(manifest.item_selectors.begin(), manifest.item_selectors.end(), manifest.target_selector) ==
        manifest.item_selectors.end()) {
        malformed("target_selector must be one of item_selectors");
    }

    return {std::move(snap), std::move(manifest)};
}

BoundingBox target_bbox(const TargetManifest& manifest, const LayoutIndex& layout) {
    auto it = layout.boxes.find(manifest.target_selector);
    if (it == layout.boxes.end()) throw Error(Errc::TargetNotInLayout, manifest.target_selector);
    return it->second;
}

}  // namespace vaf
