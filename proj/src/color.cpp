#include "cq/color.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "cq/numeric.hpp"

namespace cq {

namespace {

[[noreturn]] void throw_wrong_space(const char* op, ColorSpace expected, ColorSpace got) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s: expected %s input, got %s", op,
                  colorspace_name(expected), colorspace_name(got));
    throw std::invalid_argument(buf);
}

void require_space(const char* op, const ColorTriple& t, ColorSpace expected) {
    if (t.space != expected) throw_wrong_space(op, expected, t.space);
}

// Inverse of kRgbToXyz via the adjugate, computed from the 7-digit
// coefficients themselves rather than from higher-precision sRGB constants.
struct Matrix3 {
    double m[3][3];
};

Matrix3 invert(const double a[3][3]) {
    const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    Matrix3 r;
    r.m[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
    r.m[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
    r.m[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
    r.m[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
    r.m[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
    r.m[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
    r.m[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
    r.m[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
    r.m[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
    return r;
}

const Matrix3& xyz_to_rgb_matrix() {
    static const Matrix3 inv = invert(kRgbToXyz);
    return inv;
}

// Knot of the luminance function: both branches evaluate to 8 here.
constexpr double kLuminanceKnee = (6.0 / 29.0) * (6.0 / 29.0) * (6.0 / 29.0);
constexpr double kLuminanceSlope = (29.0 / 3.0) * (29.0 / 3.0) * (29.0 / 3.0);

}  // namespace

const char* colorspace_name(ColorSpace space) {
    switch (space) {
        case ColorSpace::GammaRGB: return "rgb";
        case ColorSpace::LinearRGB: return "linear-rgb";
        case ColorSpace::XYZ: return "xyz";
        case ColorSpace::LUV: return "luv";
        case ColorSpace::HCL: return "hcl";
    }
    return "?";
}

ColorSpace parse_colorspace(std::string_view name) {
    if (name == "rgb") return ColorSpace::GammaRGB;
    if (name == "linear-rgb") return ColorSpace::LinearRGB;
    if (name == "xyz") return ColorSpace::XYZ;
    if (name == "luv") return ColorSpace::LUV;
    if (name == "hcl") return ColorSpace::HCL;
    throw std::invalid_argument("unknown colorspace '" + std::string(name) +
                                "' (expected rgb|xyz|luv|hcl)");
}

const WhitePoint& WhitePoint::d65() {
    static const WhitePoint w = [] {
        WhitePoint p{};
        p.xr = 95.5;
        p.yr = 100.0;
        p.zr = 108.9;
        const double denom = p.xr + 15.0 * p.yr + 3.0 * p.zr;
        p.u_prime = 4.0 * p.xr / denom;  // 0.19873 at display precision
        p.v_prime = 9.0 * p.yr / denom;  // 0.46821 at display precision
        return p;
    }();
    return w;
}

std::size_t distinct_color_count(const PixelImage& img) {
    std::vector<std::uint32_t> packed;
    packed.reserve(img.pixel_count());
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        packed.push_back((std::uint32_t(img.samples[3 * i]) << 16) |
                         (std::uint32_t(img.samples[3 * i + 1]) << 8) |
                         std::uint32_t(img.samples[3 * i + 2]));
    }
    std::sort(packed.begin(), packed.end());
    packed.erase(std::unique(packed.begin(), packed.end()), packed.end());
    return packed.size();
}

double srgb_linearize(double channel) {
    if (!(channel >= 0.0 && channel <= 1.0))
        throw std::domain_error("srgb_linearize: channel outside [0,1]");
    if (channel <= kSrgbKnee) return channel / 12.92;
    return std::pow((channel + 0.055) / 1.055, 2.4);
}

double srgb_delinearize(double channel) {
    if (!(channel >= 0.0 && channel <= 1.0))
        throw std::domain_error("srgb_delinearize: channel outside [0,1]");
    if (channel <= kSrgbKnee / 12.92) return channel * 12.92;
    return 1.055 * std::pow(channel, 1.0 / 2.4) - 0.055;
}

ColorTriple rgb_linearize(const ColorTriple& t) {
    require_space("rgb_linearize", t, ColorSpace::GammaRGB);
    return {srgb_linearize(t.c0), srgb_linearize(t.c1), srgb_linearize(t.c2),
            ColorSpace::LinearRGB};
}

ColorTriple rgb_delinearize(const ColorTriple& t) {
    require_space("rgb_delinearize", t, ColorSpace::LinearRGB);
    return {srgb_delinearize(t.c0), srgb_delinearize(t.c1), srgb_delinearize(t.c2),
            ColorSpace::GammaRGB};
}

ColorTriple rgb_to_xyz(const ColorTriple& t) {
    require_space("rgb_to_xyz", t, ColorSpace::LinearRGB);
    ColorTriple out;
    out.space = ColorSpace::XYZ;
    out.c0 = kRgbToXyz[0][0] * t.c0 + kRgbToXyz[0][1] * t.c1 + kRgbToXyz[0][2] * t.c2;
    out.c1 = kRgbToXyz[1][0] * t.c0 + kRgbToXyz[1][1] * t.c1 + kRgbToXyz[1][2] * t.c2;
    out.c2 = kRgbToXyz[2][0] * t.c0 + kRgbToXyz[2][1] * t.c1 + kRgbToXyz[2][2] * t.c2;
    return out;
}

GamutMapped xyz_to_rgb(const ColorTriple& t) {
    require_space("xyz_to_rgb", t, ColorSpace::XYZ);
    const Matrix3& inv = xyz_to_rgb_matrix();
    double ch[3];
    for (int r = 0; r < 3; ++r)
        ch[r] = inv.m[r][0] * t.c0 + inv.m[r][1] * t.c1 + inv.m[r][2] * t.c2;
    GamutMapped out;
    for (double& v : ch) {
        if (v < 0.0 || v > 1.0) {
            out.clamped = true;
            v = std::clamp(v, 0.0, 1.0);
        }
    }
    out.value = {ch[0], ch[1], ch[2], ColorSpace::LinearRGB};
    return out;
}

Chromaticity2D xyz_to_xyy(const ColorTriple& t, const WhitePoint& w) {
    require_space("xyz_to_xyy", t, ColorSpace::XYZ);
    const double total = t.c0 + t.c1 + t.c2;
    if (total <= 0.0) {
        // Black carries no chromatic information; report the white point's.
        const double wt = w.xr + w.yr + w.zr;
        return {w.xr / wt, w.yr / wt};
    }
    return {t.c0 / total, t.c1 / total};
}

ColorTriple xyz_to_luv(const ColorTriple& t, const WhitePoint& w) {
    require_space("xyz_to_luv", t, ColorSpace::XYZ);
    const double ratio = t.c1 * 100.0 / w.yr;
    const double lum = ratio <= kLuminanceKnee ? kLuminanceSlope * ratio
                                               : 116.0 * std::cbrt(ratio) - 16.0;
    const double denom = t.c0 + 15.0 * t.c1 + 3.0 * t.c2;
    double up = w.u_prime, vp = w.v_prime;
    if (denom > 0.0) {
        up = 4.0 * t.c0 / denom;
        vp = 9.0 * t.c1 / denom;
    }
    return {lum, 13.0 * lum * (up - w.u_prime), 13.0 * lum * (vp - w.v_prime), ColorSpace::LUV};
}

ColorTriple luv_to_xyz(const ColorTriple& t, const WhitePoint& w) {
    require_space("luv_to_xyz", t, ColorSpace::LUV);
    const double lum = t.c0;
    if (lum <= 0.0) return {0.0, 0.0, 0.0, ColorSpace::XYZ};
    const double ratio = lum <= kLuminanceSlope * kLuminanceKnee
                             ? lum / kLuminanceSlope
                             : std::pow((lum + 16.0) / 116.0, 3.0);
    const double y = ratio * w.yr / 100.0;
    const double up = t.c1 / (13.0 * lum) + w.u_prime;
    const double vp = t.c2 / (13.0 * lum) + w.v_prime;
    // u' = 4X/(X+15Y+3Z), v' = 9Y/(X+15Y+3Z); solve for X and Z given Y.
    const double x = y * (9.0 * up) / (4.0 * vp);
    const double z = y * (12.0 - 3.0 * up - 20.0 * vp) / (4.0 * vp);
    return {x, y, z, ColorSpace::XYZ};
}

ColorTriple luv_to_hcl(const ColorTriple& t) {
    require_space("luv_to_hcl", t, ColorSpace::LUV);
    const double chroma = std::hypot(t.c1, t.c2);
    double hue = 0.0;
    if (chroma > 0.0) hue = normalize_degrees(rad_to_deg(std::atan2(t.c2, t.c1)));
    return {t.c0, chroma, hue, ColorSpace::HCL};
}

ColorTriple hcl_to_luv(const ColorTriple& t) {
    require_space("hcl_to_luv", t, ColorSpace::HCL);
    if (t.c1 < 0.0) throw std::domain_error("hcl_to_luv: negative chroma");
    const double h = deg_to_rad(t.c2);
    return {t.c0, t.c1 * std::cos(h), t.c1 * std::sin(h), ColorSpace::LUV};
}

NormalizationParams fixed_range_params(ColorSpace space) {
    NormalizationParams p;
    p.space = space;
    p.scaling = Scaling::FixedRange;
    switch (space) {
        case ColorSpace::GammaRGB:
        case ColorSpace::LinearRGB:
            break;  // identity
        case ColorSpace::XYZ:
            p.hi = {kXyzChannelMax[0], kXyzChannelMax[1], kXyzChannelMax[2]};
            break;
        case ColorSpace::LUV:
            p.lo = {0.0, -100.0, -100.0};
            p.hi = {100.0, 100.0, 100.0};
            break;
        case ColorSpace::HCL:
            throw std::invalid_argument(
                "fixed_range_params: hcl is quantized through its luv representation");
    }
    return p;
}

NormalizationParams minmax_params(ColorSpace space, std::span<const double> values) {
    NormalizationParams p;
    p.space = space;
    p.scaling = Scaling::MinMax;
    for (int c = 0; c < 3; ++c) {
        p.lo[c] = std::numeric_limits<double>::infinity();
        p.hi[c] = -std::numeric_limits<double>::infinity();
    }
    const std::size_t n = values.size() / 3;
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) {
            p.lo[c] = std::min(p.lo[c], values[3 * i + c]);
            p.hi[c] = std::max(p.hi[c], values[3 * i + c]);
        }
    }
    return p;
}

std::uint64_t normalize_components(std::span<double> values, const NormalizationParams& p) {
    std::uint64_t clamped_pixels = 0;
    const std::size_t n = values.size() / 3;
    for (std::size_t i = 0; i < n; ++i) {
        bool clamped = false;
        for (int c = 0; c < 3; ++c) {
            double& v = values[3 * i + c];
            const double span = p.hi[c] - p.lo[c];
            if (span <= 0.0) {
                v = 0.0;  // constant channel
                continue;
            }
            double normalized = (v - p.lo[c]) / span;
            if (normalized < 0.0 || normalized > 1.0) {
                clamped = true;
                normalized = std::clamp(normalized, 0.0, 1.0);
            }
            v = normalized;
        }
        if (clamped) ++clamped_pixels;
    }
    return clamped_pixels;
}

void denormalize_components(std::span<double> values, const NormalizationParams& p) {
    const std::size_t n = values.size() / 3;
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) {
            double& v = values[3 * i + c];
            v = p.lo[c] + v * (p.hi[c] - p.lo[c]);
        }
    }
}

const std::array<double, 256>& srgb_linear_table() {
    static const std::array<double, 256> table = [] {
        std::array<double, 256> t{};
        for (int i = 0; i < 256; ++i) t[i] = srgb_linearize(i / 255.0);
        return t;
    }();
    return table;
}

std::vector<double> image_to_triples(const PixelImage& img, ColorSpace space) {
    if (space == ColorSpace::HCL)
        throw std::invalid_argument(
            "image_to_triples: hcl is quantized through its luv representation");
    const std::size_t n = img.pixel_count();
    std::vector<double> out(n * 3);
    const auto& lin = srgb_linear_table();
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t r = img.samples[3 * i];
        const std::uint8_t g = img.samples[3 * i + 1];
        const std::uint8_t b = img.samples[3 * i + 2];
        double c0, c1, c2;
        if (space == ColorSpace::GammaRGB) {
            c0 = r / 255.0;
            c1 = g / 255.0;
            c2 = b / 255.0;
        } else {
            c0 = lin[r];
            c1 = lin[g];
            c2 = lin[b];
            if (space != ColorSpace::LinearRGB) {
                ColorTriple xyz = rgb_to_xyz({c0, c1, c2, ColorSpace::LinearRGB});
                if (space == ColorSpace::XYZ) {
                    c0 = xyz.c0;
                    c1 = xyz.c1;
                    c2 = xyz.c2;
                } else {
                    ColorTriple luv = xyz_to_luv(xyz);
                    c0 = luv.c0;
                    c1 = luv.c1;
                    c2 = luv.c2;
                }
            }
        }
        out[3 * i] = c0;
        out[3 * i + 1] = c1;
        out[3 * i + 2] = c2;
    }
    return out;
}

Rgb8 triple_to_rgb8(const ColorTriple& t) {
    ColorTriple cur = t;
    bool clamped = false;
    if (cur.space == ColorSpace::HCL) cur = hcl_to_luv(cur);
    if (cur.space == ColorSpace::LUV) cur = luv_to_xyz(cur);
    if (cur.space == ColorSpace::XYZ) {
        GamutMapped m = xyz_to_rgb(cur);
        clamped = m.clamped;
        cur = m.value;
    }
    if (cur.space == ColorSpace::LinearRGB) {
        auto clamp01 = [&](double v) {
            if (v < 0.0 || v > 1.0) {
                clamped = true;
                v = std::clamp(v, 0.0, 1.0);
            }
            return v;
        };
        cur = {srgb_delinearize(clamp01(cur.c0)), srgb_delinearize(clamp01(cur.c1)),
               srgb_delinearize(clamp01(cur.c2)), ColorSpace::GammaRGB};
    }
    auto to8 = [&](double v) {
        if (v < 0.0 || v > 1.0) {
            clamped = true;
            v = std::clamp(v, 0.0, 1.0);
        }
        return static_cast<std::uint8_t>(std::lround(v * 255.0));
    };
    Rgb8 out;
    out.r = to8(cur.c0);
    out.g = to8(cur.c1);
    out.b = to8(cur.c2);
    out.clamped = clamped;
    return out;
}

}  // namespace cq
