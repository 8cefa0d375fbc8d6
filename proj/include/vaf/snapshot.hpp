#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "vaf/geometry.hpp"
#include "vaf/html/dom.hpp"
#include "vaf/layout.hpp"

namespace vaf {

enum class Scenario { shopping, travel, news, custom };

std::string_view to_string(Scenario s) noexcept;
/// Throws std::invalid_argument for unknown names.
Scenario parse_scenario(std::string_view name);

/// Original presentation of the page's items, as declared by the manifest.
struct BaselineStyle {
    std::string background;  // 6- or 8-digit hex
    double font_size_px = 0;
    std::string font_family;
    std::string text_color;  // 6- or 8-digit hex
};

/// Geometry for the offline layout model: a single column of uniform item
/// cards starting at (list_x, list_top) plus fixed landing points for cards
/// relocated into anchor slots.
struct SyntheticGeometry {
    double list_x = 40;
    double list_top = 120;
    double item_width = 560;
    double item_height = 180;
    double item_gap = 20;
    std::string page_background = "#ffffff";
    std::map<std::string, Point> slot_origins;
};

struct Snapshot {
    std::string id;
    html::Document document;
    std::filesystem::path root;
    std::filesystem::path asset_root;
    int page_height_px = 0;
    Scenario scenario = Scenario::custom;
    BaselineStyle baseline_style;
    std::map<std::string, std::string> prompt_fields;
    SyntheticGeometry synthetic;
};

struct TargetManifest {
    std::string target_selector;
    std::vector<std::string> item_selectors;  // document order
    std::string target_name;
    std::map<std::string, std::string> anchor_slots;  // header|sidebar|banner|spotlight -> selector
};

struct LoadedSnapshot {
    std::shared_ptr<const Snapshot> snapshot;
    TargetManifest manifest;
};

inline constexpr int kMinPageHeight = 1200;

/// Loads `root/page.html` and `root/manifest.json`, resolving every selector
/// once. Throws Error with MissingDocument, HtmlParseError, MalformedManifest,
/// SelectorNotFound or SelectorNotUnique.
LoadedSnapshot load_snapshot(const std::filesystem::path& root);

/// Box of the target element in a rendered layout. The layout tracks element
/// identity, so relocated or reordered targets report their new position.
BoundingBox target_bbox(const TargetManifest& manifest, const LayoutIndex& layout);

/// Exactly-one resolution; throws SelectorNotFound / SelectorNotUnique.
const html::Node& resolve_unique(const html::Node& scope, const std::string& selector);
html::Node& resolve_unique(html::Node& scope, const std::string& selector);

}  // namespace vaf
