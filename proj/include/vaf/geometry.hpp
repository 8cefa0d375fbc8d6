#pragma once

#include <compare>
#include <string>

namespace vaf {

/// Page-absolute axis-aligned box: top-left corner (x, y), width, height.
/// The ground-truth region is the closed box [x, y, x + width, y + height].
struct BoundingBox {
    double x = 0;
    double y = 0;
    double width = 0;
    double height = 0;

    [[nodiscard]] double right() const noexcept { return x + width; }
    [[nodiscard]] double bottom() const noexcept { return y + height; }
    [[nodiscard]] bool valid() const noexcept { return width > 0 && height > 0; }
    [[nodiscard]] bool intersects(const BoundingBox& other) const noexcept;
    /// Positive-area overlap (shared edges do not count).
    [[nodiscard]] bool overlaps(const BoundingBox& other) const noexcept;
    [[nodiscard]] BoundingBox translated(double dx, double dy) const noexcept;
    [[nodiscard]] BoundingBox clipped_to(const BoundingBox& clip) const noexcept;

    bool operator==(const BoundingBox&) const = default;
};

struct Point {
    int x = 0;
    int y = 0;

    bool operator==(const Point&) const = default;
};

/// Target Click indicator: 1 iff the click lies in the closed target box.
int hit_test(Point click, const BoundingBox& box) noexcept;

std::string to_string(const BoundingBox& box);

}  // namespace vaf
