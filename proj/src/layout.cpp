#include "vaf/layout.hpp"

#include "vaf/error.hpp"

namespace vaf {

const BoundingBox& LayoutIndex::box(const std::string& selector) const {
    auto it = boxes.find(selector);
    if (it == boxes.end()) throw Error(Errc::SelectorNotInPage, selector);
    return it->second;
}

void validate_disjoint(const LayoutIndex& layout, const std::vector<std::string>& items) {
    for (std::size_t i = 0; i < items.size(); ++i) {
        for (std::size_t j = i + 1; j < items.size(); ++j) {
            if (!layout.contains(items[i]) || !layout.contains(items[j])) continue;
            if (layout.box(items[i]).overlaps(layout.box(items[j]))) {
                throw Error(Errc::OverlappingItemBoxes, items[i] + " overlaps " + items[j]);
            }
        }
    }
}

void to_json(nlohmann::json& j, const BoundingBox& b) { j = {{"x", b.x}, {"y", b.y}, {"w", b.width}, {"h", b.height}}; }

void from_json(const nlohmann::json& j, BoundingBox& b) {
    b.x = j.at("x").get<double>();
    b.y = j.at("y").get<double>();
    b.width = j.at("w").get<double>();
    b.height = j.at("h").get<double>();
}

void to_json(nlohmann::json& j, const ItemAppearance& a) {
    j = {{"background", to_hex(a.background)},
         {"text_color", to_hex(a.text_color)},
         {"font_size_px", a.font_size_px},
         {"font_family", a.font_family},
         {"card_blur_px", a.card_blur_px},
         {"image_blur_px", a.image_blur_px},
         {"sharpened", a.sharpened},
         {"scale", a.scale},
         {"has_image", a.has_image},
         {"label", a.label}};
}

void from_json(const nlohmann::json& j, ItemAppearance& a) {
    a.background = parse_color(j.at("background").get<std::string>()).value_or(Rgba{});
    a.text_color = parse_color(j.at("text_color").get<std::string>()).value_or(Rgba{});
    a.font_size_px = j.at("font_size_px").get<double>();
    a.font_family = j.at("font_family").get<std::string>();
    a.card_blur_px = j.at("card_blur_px").get<double>();
    a.image_blur_px = j.at("image_blur_px").get<double>();
    a.sharpened = j.at("sharpened").get<bool>();
    a.scale = j.at("scale").get<double>();
    a.has_image = j.at("has_image").get<bool>();
    a.label = j.at("label").get<std::string>();
}

void to_json(nlohmann::json& j, const LayoutIndex& l) {
    j = {{"page_height_px", l.page_height_px}, {"boxes", l.boxes}, {"appearance", l.appearance}};
}

void from_json(const nlohmann::json& j, LayoutIndex& l) {
    l.page_height_px = j.at("page_height_px").get<int>();
    l.boxes = j.at("boxes").get<std::map<std::string, BoundingBox>>();
    l.appearance = j.value("appearance", std::map<std::string, ItemAppearance>{});
}

}  // namespace vaf
