#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vaf/color.hpp"

namespace vaf {

/// 8-bit RGB bitmap, row-major.
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, Rgba fill = {255, 255, 255, 255});

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] std::span<const std::uint8_t> pixels() const noexcept { return data_; }
    [[nodiscard]] std::span<std::uint8_t> pixels() noexcept { return data_; }

    [[nodiscard]] Rgba at(int x, int y) const;
    void set(int x, int y, Rgba c);

    /// Fills the rectangle clipped to the bitmap; alpha is composited.
    void fill_rect(double x, double y, double w, double h, Rgba c);
    void stroke_rect(double x, double y, double w, double h, Rgba c);
    /// Separable box blur of the given radius (three passes approximate a Gaussian).
    void box_blur(double x, double y, double w, double h, int radius);
    /// 3x3 sharpen kernel [0 -1 0; -1 5 -1; 0 -1 0].
    void sharpen(double x, double y, double w, double h);

    /// Copies rows [top, top + rows) into a new bitmap; rows past the end stay `fill`.
    [[nodiscard]] Raster crop_rows(int top, int rows, Rgba fill = {255, 255, 255, 255}) const;

    bool operator==(const Raster&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Encodes as 8-bit RGB PNG (deterministic output for equal bitmaps).
std::vector<std::uint8_t> encode_png(const Raster& image);
/// Decodes any libpng-readable PNG into RGB. Throws std::runtime_error.
Raster decode_png(std::span<const std::uint8_t> png);

void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace vaf
