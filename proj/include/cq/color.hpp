#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cq/types.hpp"

namespace cq {

/// Linear-RGB -> XYZ matrix for the D65 white point and 2 degree observer,
/// with the coefficients at the 7-digit precision used throughout. The
/// inverse used by xyz_to_rgb is computed once from exactly these numbers.
inline constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

/// Per-channel maxima of XYZ over the RGB cube (the matrix row sums).
inline constexpr double kXyzChannelMax[3] = {
    kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
    kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
    kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2],
};

/// Breakpoint of the sRGB transfer function.
inline constexpr double kSrgbKnee = 0.04045;

// ---------------------------------------------------------------------------
// Scalar transforms
// ---------------------------------------------------------------------------

/// Gamma-encoded channel -> linear light. Piecewise: x/12.92 at low
/// brightness, ((x+0.055)/1.055)^2.4 above the knee. Monotone on [0,1].
/// Throws std::domain_error outside [0,1].
double srgb_linearize(double channel);

/// Inverse of srgb_linearize on [0,1]. Throws std::domain_error outside [0,1].
double srgb_delinearize(double channel);

ColorTriple rgb_linearize(const ColorTriple& t);
ColorTriple rgb_delinearize(const ColorTriple& t);

/// Linear RGB -> XYZ (matrix product with kRgbToXyz).
/// Throws std::invalid_argument if t is not LinearRGB.
ColorTriple rgb_to_xyz(const ColorTriple& t);

struct GamutMapped {
    ColorTriple value;
    bool clamped = false;  // true when any channel was pulled back into [0,1]
};

/// XYZ -> linear RGB through the inverse matrix; channels outside [0,1] are
/// clamped and reported through the flag rather than as an error.
GamutMapped xyz_to_rgb(const ColorTriple& t);

/// XYZ -> xy chromaticity. X+Y+Z = 0 (black) maps to the white point's
/// chromaticity by convention.
Chromaticity2D xyz_to_xyy(const ColorTriple& t, const WhitePoint& w = WhitePoint::d65());

/// XYZ -> LUV. Y is rescaled by 100 internally so the 0-100 white point
/// tristimulus applies as printed; u', v' are scale-free ratios. A zero
/// X+15Y+3Z denominator falls back to the reference chromaticity (u = v = 0).
ColorTriple xyz_to_luv(const ColorTriple& t, const WhitePoint& w = WhitePoint::d65());

/// Exact inverse of xyz_to_luv on its image; L = 0 maps to (0,0,0).
ColorTriple luv_to_xyz(const ColorTriple& t, const WhitePoint& w = WhitePoint::d65());

/// LUV -> HCL: C = sqrt(u^2+v^2), H = atan2(v,u) in degrees in [0,360).
/// H := 0 at zero chroma. Component layout keeps L first in both spaces:
/// LUV triples are (L,u,v), HCL triples are (L,C,H).
ColorTriple luv_to_hcl(const ColorTriple& t);

/// HCL -> LUV: u = C cos H, v = C sin H, L unchanged.
ColorTriple hcl_to_luv(const ColorTriple& t);

// ---------------------------------------------------------------------------
// Whole-image conversion and component normalization
// ---------------------------------------------------------------------------

enum class Scaling {
    FixedRange,  // nominal per-space ranges (default; palettes comparable across images)
    MinMax,      // per-image per-channel min/max
};

/// Affine per-channel map onto [0,1]: v' = (v - lo) / (hi - lo). Invertible
/// exactly; hi == lo marks a constant channel (normalized value 0).
struct NormalizationParams {
    ColorSpace space = ColorSpace::GammaRGB;
    Scaling scaling = Scaling::FixedRange;
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{1.0, 1.0, 1.0};
};

/// Nominal component ranges: RGB identity; XYZ [0, row-sum_i]; LUV L in
/// [0,100], u and v in [-100,100].
NormalizationParams fixed_range_params(ColorSpace space);

/// Min/max over an n-by-3 component buffer.
NormalizationParams minmax_params(ColorSpace space, std::span<const double> values);

/// Maps values (n-by-3, row-major) into [0,1] in place. Components outside
/// [lo,hi] are clamped; returns the number of affected pixels.
std::uint64_t normalize_components(std::span<double> values, const NormalizationParams& p);

/// Inverse of normalize_components (exact for unclamped components).
void denormalize_components(std::span<double> values, const NormalizationParams& p);

/// Expands an 8-bit image into an n-by-3 double buffer in `space`
/// (GammaRGB, LinearRGB, XYZ or LUV; HCL is quantized through its LUV
/// representation and is rejected here).
std::vector<double> image_to_triples(const PixelImage& img, ColorSpace space);

/// Converts one triple in any space back to an 8-bit gamma RGB pixel.
struct Rgb8 {
    std::uint8_t r = 0, g = 0, b = 0;
    bool clamped = false;
};
Rgb8 triple_to_rgb8(const ColorTriple& t);

/// 256-entry gamma -> linear table (exactly srgb_linearize(i/255)).
const std::array<double, 256>& srgb_linear_table();

}  // namespace cq
