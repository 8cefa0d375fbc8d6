#include "vaf/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <boost/beast/core/detail/base64.hpp>
#include <png.h>

namespace vaf {

namespace {

struct Span {
    int x0, y0, x1, y1;  // half-open
};

Span clip(const Raster& r, double x, double y, double w, double h) {
    const int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, r.width());
    const int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, r.height());
    const int x1 = std::clamp(static_cast<int>(std::floor(x + w)), 0, r.width());
    const int y1 = std::clamp(static_cast<int>(std::floor(y + h)), 0, r.height());
    return {x0, y0, std::max(x0, x1), std::max(y0, y1)};
}

}  // namespace

Raster::Raster(int width, int height, Rgba fill)
    : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height * 3) {
    if (width < 0 || height < 0) throw std::invalid_argument("negative raster size");
    for (std::size_t i = 0; i < data_.size(); i += 3) {
        data_[i] = fill.r;
        data_[i + 1] = fill.g;
        data_[i + 2] = fill.b;
    }
}

Rgba Raster::at(int x, int y) const {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) throw std::out_of_range("pixel outside raster");
    const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
    return {data_[i], data_[i + 1], data_[i + 2], 255};
}

void Raster::set(int x, int y, Rgba c) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
    const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
    data_[i] = c.r;
    data_[i + 1] = c.g;
    data_[i + 2] = c.b;
}

void Raster::fill_rect(double x, double y, double w, double h, Rgba c) {
    const Span s = clip(*this, x, y, w, h);
    for (int yy = s.y0; yy < s.y1; ++yy) {
        for (int xx = s.x0; xx < s.x1; ++xx) {
            set(xx, yy, c.a == 255 ? c : composite(c, at(xx, yy)));
        }
    }
}

void Raster::stroke_rect(double x, double y, double w, double h, Rgba c) {
    fill_rect(x, y, w, 1, c);
    fill_rect(x, y + h - 1, w, 1, c);
    fill_rect(x, y, 1, h, c);
    fill_rect(x + w - 1, y, 1, h, c);
}

void Raster::box_blur(double x, double y, double w, double h, int radius) {
    if (radius <= 0) return;
    const Span s = clip(*this, x, y, w, h);
    const int sw = s.x1 - s.x0;
    const int sh = s.y1 - s.y0;
    if (sw <= 0 || sh <= 0) return;
    std::vector<float> buf(static_cast<std::size_t>(sw) * sh * 3);
    for (int yy = 0; yy < sh; ++yy) {
        for (int xx = 0; xx < sw; ++xx) {
            const Rgba c = at(s.x0 + xx, s.y0 + yy);
            float* p = &buf[(static_cast<std::size_t>(yy) * sw + xx) * 3];
            p[0] = c.r;
            p[1] = c.g;
            p[2] = c.b;
        }
    }
    std::vector<float> tmp(buf.size());
    auto pass = [&](bool horizontal) {
        const int len = horizontal ? sw : sh;
        const int lines = horizontal ? sh : sw;
        for (int line = 0; line < lines; ++line) {
            for (int i = 0; i < len; ++i) {
                float acc[3] = {0, 0, 0};
                int count = 0;
                for (int k = std::max(0, i - radius); k <= std::min(len - 1, i + radius); ++k) {
                    const int xx = horizontal ? k : line;
                    const int yy = horizontal ? line : k;
                    const float* p = &buf[(static_cast<std::size_t>(yy) * sw + xx) * 3];
                    acc[0] += p[0];
                    acc[1] += p[1];
                    acc[2] += p[2];
                    ++count;
                }
                const int xx = horizontal ? i : line;
                const int yy = horizontal ? line : i;
                float* q = &tmp[(static_cast<std::size_t>(yy) * sw + xx) * 3];
                q[0] = acc[0] / count;
                q[1] = acc[1] / count;
                q[2] = acc[2] / count;
            }
        }
        buf.swap(tmp);
    };
    for (int i = 0; i < 3; ++i) {
        pass(true);
        pass(false);
    }
    for (int yy = 0; yy < sh; ++yy) {
        for (int xx = 0; xx < sw; ++xx) {
            const float* p = &buf[(static_cast<std::size_t>(yy) * sw + xx) * 3];
            set(s.x0 + xx, s.y0 + yy,
                {static_cast<std::uint8_t>(std::lround(p[0])), static_cast<std::uint8_t>(std::lround(p[1])),
                 static_cast<std::uint8_t>(std::lround(p[2])), 255});
        }
    }
}

void Raster::sharpen(double x, double y, double w, double h) {
    const Span s = clip(*this, x, y, w, h);
    const Raster src = *this;
    for (int yy = s.y0; yy < s.y1; ++yy) {
        for (int xx = s.x0; xx < s.x1; ++xx) {
            auto sample = [&](int dx, int dy) {
                return src.at(std::clamp(xx + dx, s.x0, s.x1 - 1), std::clamp(yy + dy, s.y0, s.y1 - 1));
            };
            const Rgba c = sample(0, 0);
            const Rgba n[4] = {sample(-1, 0), sample(1, 0), sample(0, -1), sample(0, 1)};
            auto channel = [&](auto get) {
                const int v = 5 * get(c) - get(n[0]) - get(n[1]) - get(n[2]) - get(n[3]);
                return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
            };
            set(xx, yy,
                {channel([](Rgba p) { return int(p.r); }), channel([](Rgba p) { return int(p.g); }),
                 channel([](Rgba p) { return int(p.b); }), 255});
        }
    }
}

Raster Raster::crop_rows(int top, int rows, Rgba fill) const {
    Raster out(width_, rows, fill);
    const std::size_t stride = static_cast<std::size_t>(width_) * 3;
    for (int r = 0; r < rows; ++r) {
        const int src = top + r;
        if (src < 0 || src >= height_) continue;
        std::memcpy(&out.data_[r * stride], &data_[src * stride], stride);
    }
    return out;
}

// --- PNG ---------------------------------------------------------------------

namespace {

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

struct ReadCursor {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;
};

void png_read_from_span(png_structp png, png_bytep data, png_size_t length) {
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->pos + length > cur->bytes.size()) png_error(png, "truncated PNG");
    std::memcpy(data, cur->bytes.data() + cur->pos, length);
    cur->pos += length;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Raster& image) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (png == nullptr) throw std::runtime_error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    std::vector<std::uint8_t> out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("PNG encoding failed");
    }
    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 3);
    png_write_info(png, info);
    const auto px = image.pixels();
    for (int y = 0; y < image.height(); ++y) {
        png_write_row(png, const_cast<png_bytep>(px.data() + static_cast<std::size_t>(y) * image.width() * 3));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

Raster decode_png(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw std::runtime_error("not a PNG stream");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (png == nullptr) throw std::runtime_error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    ReadCursor cursor{bytes, 0};
    Raster out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("PNG decoding failed");
    }
    png_set_read_fn(png, &cursor, png_read_from_span);
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    out = Raster(w, h);
    std::vector<png_bytep> rows(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) rows[y] = out.pixels().data() + static_cast<std::size_t>(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    namespace b64 = boost::beast::detail::base64;
    std::string out(b64::encoded_size(bytes.size()), '\0');
    out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    namespace b64 = boost::beast::detail::base64;
    std::vector<std::uint8_t> out(b64::decoded_size(text.size()));
    const auto [written, read] = b64::decode(out.data(), text.data(), text.size());
    out.resize(written);
    return out;
}

}  // namespace vaf
