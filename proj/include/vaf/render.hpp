#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "vaf/html/dom.hpp"
#include "vaf/layout.hpp"
#include "vaf/raster.hpp"
#include "vaf/snapshot.hpp"
#include "vaf/variant.hpp"

namespace vaf {

inline constexpr int kViewportWidth = 1280;
inline constexpr int kViewportHeight = 1200;
inline constexpr int kScrollStep = 600;
inline const std::string kOriginalVariantId = "original";

[[nodiscard]] int max_scroll(int page_height_px) noexcept;
[[nodiscard]] int clamp_scroll(int scroll_y, int page_height_px) noexcept;
/// Moves `steps` positions along 0, 600, 1200, ... (clamped to the page).
/// A clamped bottom offset counts as the lattice position it stands in for,
/// so one step up from 920 on a 2120 px page lands on 600.
[[nodiscard]] int scroll_by_steps(int scroll_y, int steps, int page_height_px) noexcept;

/// Everything a renderer needs to load one page: the base snapshot, its
/// manifest, and the (possibly mutated) document.
struct PageSource {
    std::shared_ptr<const Snapshot> snapshot;
    TargetManifest manifest;
    std::string variant_id = kOriginalVariantId;
    std::shared_ptr<const html::Document> document;
};

PageSource original_page(const LoadedSnapshot& loaded);
PageSource variant_page(const LoadedSnapshot& loaded, VariantPage page);

/// Producer of page-sized pixels, rendered on first use.
class PixelSource {
public:
    virtual ~PixelSource() = default;
    [[nodiscard]] virtual const Raster& raster() const = 0;
};

/// A 1280x1200 window onto a PixelSource starting at row `top`.
class ViewportImage {
public:
    ViewportImage() = default;
    ViewportImage(std::shared_ptr<const PixelSource> source, int top) : source_(std::move(source)), top_(top) {}

    [[nodiscard]] int width() const noexcept { return kViewportWidth; }
    [[nodiscard]] int height() const noexcept { return kViewportHeight; }
    [[nodiscard]] bool empty() const noexcept { return source_ == nullptr; }
    [[nodiscard]] Raster materialize() const;
    [[nodiscard]] std::vector<std::uint8_t> png() const;

private:
    std::shared_ptr<const PixelSource> source_;
    int top_ = 0;
};

struct VisibleItem {
    std::string selector;
    BoundingBox box;       // viewport-relative, clipped to the viewport
    BoundingBox page_box;  // page-absolute, unclipped
    ItemAppearance appearance;
};

struct RenderedView {
    ViewportImage image;
    int scroll_y = 0;
    int page_height_px = 0;
    std::vector<VisibleItem> visible_items;  // page order (top-to-bottom, then left-to-right)
};

/// Items whose page box intersects rows [scroll_y, scroll_y + 1200).
std::vector<VisibleItem> visible_items_for(const LayoutIndex& layout, const std::vector<std::string>& items,
                                           int scroll_y);

class RenderSession {
public:
    virtual ~RenderSession() = default;
    /// Clamps `scroll_y` into the page and captures that viewport.
    virtual RenderedView render_view(int scroll_y) = 0;
    virtual const LayoutIndex& layout_index() = 0;
    virtual void close() = 0;
};

class RenderBackend {
public:
    virtual ~RenderBackend() = default;
    /// Throws Error(BackendUnavailable) or Error(PageLoadTimeout).
    virtual std::unique_ptr<RenderSession> open_session(const PageSource& page) = 0;
    [[nodiscard]] virtual std::string_view name() const noexcept = 0;
};

// --- synthetic backend -------------------------------------------------------

/// Offline layout model: list items stack vertically from the geometry's
/// origin in document order, scaled cards reflow the cards below them, and
/// cards attached to an anchor slot land on that slot's origin.
LayoutIndex compute_synthetic_layout(const Snapshot& snap, const TargetManifest& manifest, const html::Document& doc);

/// Appearance of an item card derived from inline styles and the baseline.
ItemAppearance synthetic_appearance(const Snapshot& snap, const html::Node& card);

/// Draws the page: cards as filled rectangles with text-line bars and image
/// placeholders, then blur/sharpen filters over the affected regions.
Raster render_synthetic_page(const Snapshot& snap, const TargetManifest& manifest, const html::Document& doc,
                             const LayoutIndex& layout);

class SyntheticBackend final : public RenderBackend {
public:
    std::unique_ptr<RenderSession> open_session(const PageSource& page) override;
    [[nodiscard]] std::string_view name() const noexcept override { return "synthetic"; }

    struct PageModel;

private:
    std::shared_ptr<PageModel> model_for(const PageSource& page);

    std::mutex mutex_;
    std::vector<std::pair<std::shared_ptr<const html::Document>, std::shared_ptr<PageModel>>> cache_;
};

}  // namespace vaf
