#include "vaf/geometry.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace vaf {

bool BoundingBox::intersects(const BoundingBox& o) const noexcept {
    return x < o.right() && o.x < right() && y < o.bottom() && o.y < bottom();
}

bool BoundingBox::overlaps(const BoundingBox& o) const noexcept { return intersects(o); }

BoundingBox BoundingBox::translated(double dx, double dy) const noexcept {
    return {x + dx, y + dy, width, height};
}

BoundingBox BoundingBox::clipped_to(const BoundingBox& clip) const noexcept {
    const double left = std::max(x, clip.x);
    const double top = std::max(y, clip.y);
    const double r = std::min(right(), clip.right());
    const double b = std::min(bottom(), clip.bottom());
    return {left, top, std::max(0.0, r - left), std::max(0.0, b - top)};
}

int hit_test(Point click, const BoundingBox& box) noexcept {
    const double cx = click.x;
    const double cy = click.y;
    return (box.x <= cx && cx <= box.right() && box.y <= cy && cy <= box.bottom()) ? 1 : 0;
}

std::string to_string(const BoundingBox& b) {
    return fmt::format("{{x:{}, y:{}, w:{}, h:{}}}", b.x, b.y, b.width, b.height);
}

}  // namespace vaf
