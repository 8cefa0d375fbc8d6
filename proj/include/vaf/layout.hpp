#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vaf/color.hpp"
#include "vaf/geometry.hpp"

namespace vaf {

/// Rendered presentation of one item card, as a renderer observed it.
struct ItemAppearance {
    Rgba background{255, 255, 255, 255};  // composited over the page background
    Rgba text_color{0, 0, 0, 255};
    double font_size_px = 16;
    std::string font_family;
    double card_blur_px = 0;
    double image_blur_px = 0;
    bool sharpened = false;
    double scale = 1.0;
    bool has_image = false;
    std::string label;  // visible title text of the card

    bool operator==(const ItemAppearance&) const = default;
};

/// Page-absolute boxes for every manifest selector of one rendered page.
struct LayoutIndex {
    std::map<std::string, BoundingBox> boxes;
    std::map<std::string, ItemAppearance> appearance;
    int page_height_px = 0;

    /// Throws Error(SelectorNotInPage).
    [[nodiscard]] const BoundingBox& box(const std::string& selector) const;
    [[nodiscard]] bool contains(const std::string& selector) const { return boxes.count(selector) != 0; }

    bool operator==(const LayoutIndex&) const = default;
};

/// Throws Error(OverlappingItemBoxes) if two of the listed item boxes share area.
void validate_disjoint(const LayoutIndex& layout, const std::vector<std::string>& item_selectors);

void to_json(nlohmann::json& j, const BoundingBox& b);
void from_json(const nlohmann::json& j, BoundingBox& b);
void to_json(nlohmann::json& j, const ItemAppearance& a);
void from_json(const nlohmann::json& j, ItemAppearance& a);
void to_json(nlohmann::json& j, const LayoutIndex& l);
void from_json(const nlohmann::json& j, LayoutIndex& l);

}  // namespace vaf
