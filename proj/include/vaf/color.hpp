#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace vaf {

struct Rgba {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    std::uint8_t a = 255;

    bool operator==(const Rgba&) const = default;
};

/// Accepts `#rgb`, `#rrggbb`, `#rrggbbaa`, `rgb()`/`rgba()` and a few keywords.
std::optional<Rgba> parse_color(std::string_view text);

/// True for the strict 6- or 8-digit `#hex` form.
bool is_hex_color(std::string_view text) noexcept;

std::string to_hex(Rgba c);

/// Source-over composite of `top` onto an opaque `bottom`.
Rgba composite(Rgba top, Rgba bottom) noexcept;

/// Euclidean RGB distance scaled to [0, 1].
double color_distance(Rgba a, Rgba b) noexcept;

}  // namespace vaf
