#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "vaf/error.hpp"
#include "vaf/render.hpp"

namespace vaf {

int max_scroll(int page_height_px) noexcept { return std::max(0, page_height_px - kViewportHeight); }

int clamp_scroll(int scroll_y, int page_height_px) noexcept {
    return std::clamp(scroll_y, 0, max_scroll(page_height_px));
}

int scroll_by_steps(int scroll_y, int steps, int page_height_px) noexcept {
    const int index = (std::max(scroll_y, 0) + kScrollStep - 1) / kScrollStep;
    return clamp_scroll(std::max(0, index + steps) * kScrollStep, page_height_px);
}

PageSource original_page(const LoadedSnapshot& loaded) {
    return {loaded.snapshot, loaded.manifest, kOriginalVariantId,
            std::shared_ptr<const html::Document>(loaded.snapshot, &loaded.snapshot->document)};
}

PageSource variant_page(const LoadedSnapshot& loaded, VariantPage page) {
    std::string id = page.spec.id;
    return {loaded.snapshot, loaded.manifest, std::move(id),
            std::make_shared<const html::Document>(std::move(page.document))};
}

Raster ViewportImage::materialize() const {
    if (!source_) return Raster(kViewportWidth, kViewportHeight);
    return source_->raster().crop_rows(top_, kViewportHeight);
}

std::vector<std::uint8_t> ViewportImage::png() const { return encode_png(materialize()); }

std::vector<VisibleItem> visible_items_for(const LayoutIndex& layout, const std::vector<std::string>& items,
                                           int scroll_y) {
    const BoundingBox viewport{0, static_cast<double>(scroll_y), kViewportWidth, kViewportHeight};
    std::vector<VisibleItem> out;
    for (const auto& sel : items) {
        auto it = layout.boxes.find(sel);
        if (it == layout.boxes.end()) continue;
        const BoundingBox& page_box = it->second;
        if (!page_box.intersects(viewport)) continue;
        VisibleItem v;
        v.selector = sel;
        v.page_box = page_box;
        v.box = page_box.clipped_to(viewport).translated(0, -scroll_y);
        if (auto a = layout.appearance.find(sel); a != layout.appearance.end()) v.appearance = a->second;
        out.push_back(std::move(v));
    }
    std::stable_sort(out.begin(), out.end(), [](const VisibleItem& a, const VisibleItem& b) {
        if (a.page_box.y != b.page_box.y) return a.page_box.y < b.page_box.y;
        return a.page_box.x < b.page_box.x;
    });
    return out;
}

// --- synthetic layout -----------------------------------------------------------

namespace {

std::optional<double> css_function_arg(const std::string& value, std::string_view fn) {
    const auto at = value.find(std::string(fn) + "(");
    if (at == std::string::npos) return std::nullopt;
    const char* start = value.c_str() + at + fn.size() + 1;
    char* end = nullptr;
    const double v = std::strtod(start, &end);
    if (end == start) return std::nullopt;
    return v;
}

std::optional<double> px_length(const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str()) return std::nullopt;
    return v;
}

void find_images(const html::Node& n, std::vector<const html::Node*>& out) {
    for (const auto& c : n.children()) {
        if (c->is_element() && c->tag() == "img") out.push_back(c.get());
        find_images(*c, out);
    }
}

const html::Node* first_heading(const html::Node& n) {
    for (const auto& c : n.children()) {
        if (c->is_element() && c->tag().size() == 2 && c->tag()[0] == 'h' && c->tag()[1] >= '1' && c->tag()[1] <= '6') {
            return c.get();
        }
        if (const html::Node* h = first_heading(*c)) return h;
    }
    return nullptr;
}

Rgba page_background(const Snapshot& snap) {
    return parse_color(snap.synthetic.page_background).value_or(Rgba{255, 255, 255, 255});
}

}  // namespace

ItemAppearance synthetic_appearance(const Snapshot& snap, const html::Node& card) {
    const auto style = html::inline_style_of(card);
    const Rgba page_bg = page_background(snap);
    ItemAppearance a;
    const auto bg = parse_color(style.get("background-color").value_or(snap.baseline_style.background));
    a.background = composite(bg.value_or(Rgba{0, 0, 0, 0}), page_bg);
    a.text_color = parse_color(style.get("color").value_or(snap.baseline_style.text_color)).value_or(Rgba{0, 0, 0, 255});
    a.font_size_px = snap.baseline_style.font_size_px;
    if (auto fs = style.get("font-size")) a.font_size_px = px_length(*fs).value_or(a.font_size_px);
    a.font_family = style.get("font-family").value_or(snap.baseline_style.font_family);
    if (auto filter = style.get("filter")) {
        a.card_blur_px = css_function_arg(*filter, "blur").value_or(0);
        a.sharpened = filter->find("vaf-sharpen") != std::string::npos;
    }
    if (auto transform = style.get("transform")) a.scale = css_function_arg(*transform, "scale").value_or(1.0);
    std::vector<const html::Node*> images;
    find_images(card, images);
    a.has_image = !images.empty();
    for (const html::Node* img : images) {
        if (auto filter = html::inline_style_of(*img).get("filter")) {
            a.image_blur_px = std::max(a.image_blur_px, css_function_arg(*filter, "blur").value_or(0));
        }
    }
    const html::Node* heading = first_heading(card);
    a.label = html::visible_text(heading != nullptr ? *heading : card);
    return a;
}

LayoutIndex compute_synthetic_layout(const Snapshot& snap, const TargetManifest& manifest, const html::Document& doc) {
    const SyntheticGeometry& g = snap.synthetic;
    const html::Node& root = doc.root();

    std::vector<std::pair<std::string, const html::Node*>> slots;
    for (const auto& [name, sel] : manifest.anchor_slots) slots.emplace_back(name, &resolve_unique(root, sel));

    // items in document order
    std::vector<std::pair<const html::Node*, std::string>> items;
    for (const auto& sel : manifest.item_selectors) items.emplace_back(&resolve_unique(root, sel), sel);
    std::vector<const html::Node*> order;
    {
        std::string list;
        for (const auto& sel : manifest.item_selectors) list += (list.empty() ? "" : ", ") + sel;
        for (const html::Node* n : html::query_all(root, list)) order.push_back(n);
    }

    LayoutIndex layout;
    double cursor = g.list_top;
    double bottom = g.list_top;
    for (const html::Node* node : order) {
        const auto it = std::find_if(items.begin(), items.end(), [&](const auto& p) { return p.first == node; });
        if (it == items.end()) continue;
        const std::string& sel = it->second;
        ItemAppearance look = synthetic_appearance(snap, *node);
        const double w = g.item_width * look.scale;
        const double h = g.item_height * look.scale;

        const html::Node* slot_node = nullptr;
        std::string slot_name;
        for (const auto& [name, s] : slots) {
            if (s->contains(*node)) {
                slot_node = s;
                slot_name = name;
            }
        }
        BoundingBox box;
        if (slot_node != nullptr) {
            auto origin = g.slot_origins.find(slot_name);
            if (origin == g.slot_origins.end()) {
                throw Error(Errc::RendererFailure, fmt::format("no synthetic origin for anchor slot '{}'", slot_name));
            }
            box = {double(origin->second.x), double(origin->second.y), w, h};
        } else {
            box = {g.list_x, cursor, w, h};
            cursor += h + g.item_gap;
        }
        bottom = std::max({bottom, cursor, box.bottom()});
        layout.boxes[sel] = box;
        layout.appearance[sel] = std::move(look);
    }
    for (const auto& [name, s] : slots) {
        const std::string& sel = manifest.anchor_slots.at(name);
        auto origin = g.slot_origins.find(name);
        const Point p = origin != g.slot_origins.end() ? origin->second : Point{0, 0};
        // an occupied slot spans its card; an empty one gets the nominal card size
        BoundingBox box{double(p.x), double(p.y), g.item_width, g.item_height};
        for (const auto& [node, isel] : items) {
            if (s->contains(*node)) box = layout.boxes.at(isel);
        }
        layout.boxes[sel] = box;
    }
    layout.page_height_px = std::max(kViewportHeight, static_cast<int>(std::ceil(bottom)));
    return layout;
}

// --- synthetic raster -----------------------------------------------------------

namespace {

double char_width_factor(const std::string& family) {
    std::string f;
    for (char c : family) f += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (f.find("mono") != std::string::npos || f.find("courier") != std::string::npos) return 0.60;
    if (f.find("comic") != std::string::npos) return 0.56;
    if (f.find("serif") != std::string::npos && f.find("sans") == std::string::npos) return 0.47;
    if (f.find("times") != std::string::npos || f.find("georgia") != std::string::npos ||
        f.find("merriweather") != std::string::npos) {
        return 0.47;
    }
    return 0.52;
}

void collect_text_blocks(const html::Node& n, std::vector<std::pair<std::string, bool>>& out) {
    for (const auto& c : n.children()) {
        if (!c->is_element()) continue;
        const std::string& t = c->tag();
        const bool heading = t.size() == 2 && t[0] == 'h' && t[1] >= '1' && t[1] <= '6';
        if (heading || t == "p" || t == "button" || t == "span" || t == "li") {
            const std::string text = html::visible_text(*c);
            if (!text.empty()) out.emplace_back(text, heading);
            continue;
        }
        collect_text_blocks(*c, out);
    }
}

void draw_card(Raster& page, const html::Node& card, const BoundingBox& box, const ItemAppearance& look,
               const std::string& selector) {
    const double s = look.scale;
    page.fill_rect(box.x, box.y, box.width, box.height, look.background);
    page.stroke_rect(box.x, box.y, box.width, box.height, {221, 221, 221, 255});

    double text_x = box.x + 10 * s;
    BoundingBox image_box{};
    if (look.has_image) {
        const double side = box.height - 20 * s;
        image_box = {box.x + 10 * s, box.y + 10 * s, side, side};
        const std::size_t h = std::hash<std::string>{}(selector);
        const Rgba a{static_cast<std::uint8_t>(h & 0xff), static_cast<std::uint8_t>((h >> 8) & 0xff),
                     static_cast<std::uint8_t>((h >> 16) & 0xff), 255};
        const Rgba b{static_cast<std::uint8_t>(255 - a.r), static_cast<std::uint8_t>(255 - a.g),
                     static_cast<std::uint8_t>(255 - a.b), 255};
        const double stripe = std::max(2.0, 6 * s);
        for (double off = 0; off < side; off += stripe) {
            page.fill_rect(image_box.x, image_box.y + off, side, std::min(stripe, side - off),
                           (static_cast<int>(off / stripe) % 2 == 0) ? a : b);
        }
        text_x = image_box.right() + 10 * s;
    }

    std::vector<std::pair<std::string, bool>> blocks;
    collect_text_blocks(card, blocks);
    const double right_edge = box.right() - 10 * s;
    const double cw = char_width_factor(look.font_family);
    double y = box.y + 10 * s;
    for (const auto& [text, heading] : blocks) {
        const double fs = look.font_size_px * s * (heading ? 1.1 : 0.9);
        const double line_h = fs * 1.4;
        const double bar_h = std::max(1.0, fs * 0.7);
        double x = text_x;
        std::size_t word_start = 0;
        while (word_start < text.size() && y + bar_h <= box.bottom() - 4 * s) {
            std::size_t word_end = text.find(' ', word_start);
            if (word_end == std::string::npos) word_end = text.size();
            const double w = static_cast<double>(word_end - word_start) * fs * cw;
            if (x + w > right_edge && x > text_x) {
                x = text_x;
                y += line_h;
                continue;
            }
            if (y + bar_h > box.bottom() - 4 * s) break;
            page.fill_rect(x, y + (line_h - bar_h) / 2, std::min(w, right_edge - x), bar_h, look.text_color);
            x += w + fs * cw;
            word_start = word_end + 1;
        }
        y += line_h;
    }

    if (look.image_blur_px > 0 && look.has_image) {
        page.box_blur(image_box.x, image_box.y, image_box.width, image_box.height,
                      std::max(1, static_cast<int>(std::lround(look.image_blur_px * s))));
    }
    if (look.card_blur_px > 0) {
        page.box_blur(box.x, box.y, box.width, box.height, std::max(1, static_cast<int>(std::lround(look.card_blur_px * s))));
    }
    if (look.sharpened) page.sharpen(box.x, box.y, box.width, box.height);
}

}  // namespace

Raster render_synthetic_page(const Snapshot& snap, const TargetManifest& manifest, const html::Document& doc,
                             const LayoutIndex& layout) {
    Raster page(kViewportWidth, std::max(layout.page_height_px, kViewportHeight), page_background(snap));
    page.fill_rect(0, 0, kViewportWidth, std::max(0.0, snap.synthetic.list_top - 20), {238, 238, 238, 255});
    page.fill_rect(40, 40, 160, 28, {60, 60, 60, 255});

    // paint in document order so later cards overlap earlier ones like a browser would
    std::string list;
    for (const auto& sel : manifest.item_selectors) list += (list.empty() ? "" : ", ") + sel;
    for (const html::Node* node : html::query_all(doc.root(), list)) {
        for (const auto& sel : manifest.item_selectors) {
            if (&resolve_unique(doc.root(), sel) != node) continue;
            draw_card(page, *node, layout.box(sel), layout.appearance.at(sel), sel);
        }
    }
    return page;
}

// --- backend ---------------------------------------------------------------------

struct SyntheticBackend::PageModel final : PixelSource {
    std::shared_ptr<const Snapshot> snapshot;
    TargetManifest manifest;
    std::shared_ptr<const html::Document> document;
    LayoutIndex layout;

    mutable std::once_flag rendered;
    mutable Raster pixels;

    const Raster& raster() const override {
        std::call_once(rendered, [this] { pixels = render_synthetic_page(*snapshot, manifest, *document, layout); });
        return pixels;
    }
};

namespace {

class SyntheticSession final : public RenderSession {
public:
    explicit SyntheticSession(std::shared_ptr<SyntheticBackend::PageModel> model) : model_(std::move(model)) {}

    RenderedView render_view(int scroll_y) override {
        if (!model_) throw Error(Errc::SessionClosed, "synthetic session");
        const int page_height = model_->layout.page_height_px;
        const int y = clamp_scroll(scroll_y, page_height);
        RenderedView view;
        view.scroll_y = y;
        view.page_height_px = page_height;
        view.image = ViewportImage(model_, y);
        view.visible_items = visible_items_for(model_->layout, model_->manifest.item_selectors, y);
        return view;
    }

    const LayoutIndex& layout_index() override {
        if (!model_) throw Error(Errc::SessionClosed, "synthetic session");
        return model_->layout;
    }

    void close() override { model_.reset(); }

private:
    std::shared_ptr<SyntheticBackend::PageModel> model_;
};

}  // namespace

std::shared_ptr<SyntheticBackend::PageModel> SyntheticBackend::model_for(const PageSource& page) {
    std::lock_guard lock(mutex_);
    for (const auto& [doc, model] : cache_) {
        if (doc == page.document) return model;
    }
    auto model = std::make_shared<PageModel>();
    model->snapshot = page.snapshot;
    model->manifest = page.manifest;
    model->document = page.document;
    model->layout = compute_synthetic_layout(*page.snapshot, page.manifest, *page.document);
    cache_.emplace_back(page.document, model);
    return model;
}

std::unique_ptr<RenderSession> SyntheticBackend::open_session(const PageSource& page) {
    if (!page.snapshot || !page.document) throw Error(Errc::BackendUnavailable, "page source is empty");
    return std::make_unique<SyntheticSession>(model_for(page));
}

}  // namespace vaf
