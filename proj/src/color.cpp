#include "vaf/color.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

#include <fmt/format.h>

namespace vaf {

namespace {

int hex_digit(char c) noexcept {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::optional<Rgba> parse_hex(std::string_view h) {
    for (char c : h) {
        if (hex_digit(c) < 0) return std::nullopt;
    }
    auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(hex_digit(h[i]) * 16 + hex_digit(h[i + 1])); };
    auto nib = [&](std::size_t i) { return static_cast<std::uint8_t>(hex_digit(h[i]) * 17); };
    switch (h.size()) {
        case 3: return Rgba{nib(0), nib(1), nib(2), 255};
        case 4: return Rgba{nib(0), nib(1), nib(2), nib(3)};
        case 6: return Rgba{byte(0), byte(2), byte(4), 255};
        case 8: return Rgba{byte(0), byte(2), byte(4), byte(6)};
        default: return std::nullopt;
    }
}

}  // namespace

std::optional<Rgba> parse_color(std::string_view text) {
    std::string s;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (s.empty()) return std::nullopt;
    if (s.front() == '#') return parse_hex(std::string_view(s).substr(1));
    if (s == "transparent") return Rgba{0, 0, 0, 0};
    if (s == "white") return Rgba{255, 255, 255, 255};
    if (s == "black") return Rgba{0, 0, 0, 255};
    if (s.rfind("rgb", 0) == 0) {
        const auto open = s.find('(');
        const auto close = s.find(')');
        if (open == std::string::npos || close == std::string::npos || close < open) return std::nullopt;
        std::vector<double> parts;
        std::stringstream ss(s.substr(open + 1, close - open - 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                parts.push_back(std::stod(item));
            } catch (const std::exception&) {
                return std::nullopt;
            }
        }
        if (parts.size() != 3 && parts.size() != 4) return std::nullopt;
        auto clamp8 = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); };
        Rgba c{clamp8(parts[0]), clamp8(parts[1]), clamp8(parts[2]), 255};
        if (parts.size() == 4) c.a = clamp8(parts[3] * 255.0);
        return c;
    }
    return std::nullopt;
}

bool is_hex_color(std::string_view text) noexcept {
    if (text.size() != 7 && text.size() != 9) return false;
    if (text.front() != '#') return false;
    return std::all_of(text.begin() + 1, text.end(), [](char c) { return hex_digit(c) >= 0; });
}

std::string to_hex(Rgba c) {
    if (c.a == 255) return fmt::format("#{:02x}{:02x}{:02x}", c.r, c.g, c.b);
    return fmt::format("#{:02x}{:02x}{:02x}{:02x}", c.r, c.g, c.b, c.a);
}

Rgba composite(Rgba top, Rgba bottom) noexcept {
    const int a = top.a;
    auto mix = [a](int t, int b) { return static_cast<std::uint8_t>((t * a + b * (255 - a) + 127) / 255); };
    return {mix(top.r, bottom.r), mix(top.g, bottom.g), mix(top.b, bottom.b), 255};
}

double color_distance(Rgba a, Rgba b) noexcept {
    const double dr = a.r - b.r;
    const double dg = a.g - b.g;
    const double db = a.b - b.b;
    return std::sqrt(dr * dr + dg * dg + db * db) / (255.0 * std::sqrt(3.0));
}

}  // namespace vaf
