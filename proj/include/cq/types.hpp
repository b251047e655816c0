#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cq {

/// The colorspaces handled by the transform chain. GammaRGB is the 8-bit
/// encoded space images arrive in; LinearRGB is its linear-light form.
enum class ColorSpace { GammaRGB, LinearRGB, XYZ, LUV, HCL };

const char* colorspace_name(ColorSpace space);

/// Parses a user-facing space name (rgb|xyz|luv|hcl). Throws
/// std::invalid_argument for anything else.
ColorSpace parse_colorspace(std::string_view name);

/// One color value tagged with the space its components live in.
struct ColorTriple {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    ColorSpace space = ColorSpace::GammaRGB;
};

/// Reference white. Tristimulus values are stored on the 0-100 scale;
/// u_prime/v_prime are derived from them at full precision.
struct WhitePoint {
    double xr;
    double yr;
    double zr;
    double u_prime;
    double v_prime;

    /// Mid-day sunlight reference under the 2 degree observer:
    /// (95.5, 100, 108.9), giving (u', v') = (0.19873, 0.46821).
    static const WhitePoint& d65();
};

struct Chromaticity2D {
    double x = 0.0;
    double y = 0.0;
};

/// 8-bit RGB raster, row-major, left-to-right, top-to-bottom.
struct PixelImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> samples;  // 3 per pixel

    PixelImage() = default;
    PixelImage(int w, int h)
        : width(w), height(h), samples(static_cast<std::size_t>(w) * h * 3, 0) {
        if (w <= 0 || h <= 0)
            throw std::invalid_argument("PixelImage: dimensions must be positive");
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    int shorter_edge() const { return width < height ? width : height; }
    int longer_edge() const { return width < height ? height : width; }

    std::uint8_t& at(int x, int y, int ch) {
        return samples[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
    }
    std::uint8_t at(int x, int y, int ch) const {
        return samples[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
    }

    bool same_dimensions(const PixelImage& other) const {
        return width == other.width && height == other.height;
    }
};

/// Number of distinct 24-bit colors present.
std::size_t distinct_color_count(const PixelImage& img);

}  // namespace cq
