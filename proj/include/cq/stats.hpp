#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cq/types.hpp"

namespace cq {

/// Sample mean, SD (n-1 denominator), moment-ratio skewness m3/m2^1.5 and
/// kurtosis m4/m2^2 (central moments with 1/n). A zero-variance sample
/// reports skewness/kurtosis 0 with the degenerate flag set.
struct LinearSummary {
    double mean = 0.0;
    double sd = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;
    bool degenerate = false;
    std::size_t n = 0;
};

/// Throws std::invalid_argument on an empty sample; sd requires n >= 2
/// (n == 1 reports sd 0 with the degenerate flag).
LinearSummary linear_summary(std::span<const double> samples);

/// p-th trigonometric moment of a sample of directions (degrees):
/// cbar/sbar are the mean cos/sin of p*theta, resultant = sqrt(c^2+s^2),
/// direction = atan2(sbar,cbar) reduced to [0,360). A vanishing resultant
/// leaves the direction at 0 with direction_undefined set.
struct TrigMoment {
    double cbar = 0.0;
    double sbar = 0.0;
    double resultant = 0.0;
    double direction_deg = 0.0;
    bool direction_undefined = false;
};

TrigMoment trig_moment(std::span<const double> angles_deg, int p);

/// Circular location/dispersion/shape built from the first two trigonometric
/// moments. circular_sd is the dimensionless sqrt(-2 log R); skewness and
/// kurtosis follow the second-moment formulas with the angle difference
/// (mu2 - 2 mu1) reduced to (-180, 180] first. R within 1e-12 of 1 snaps to
/// exactly 1 (degenerate: sd 0, skewness/kurtosis 0 with the flag).
struct CircularSummary {
    double mean_direction_deg = 0.0;
    double resultant_length = 0.0;
    double circular_sd = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;
    bool degenerate = false;
    bool direction_undefined = false;
    std::size_t n = 0;
};

CircularSummary circular_summary(std::span<const double> angles_deg);

/// The per-image covariate block: circular hue statistics plus linear chroma
/// and luminance statistics, with the edge lengths.
struct ImageProfile {
    int shorter_edge = 0;
    int longer_edge = 0;
    CircularSummary hue;
    LinearSummary chroma;
    LinearSummary luminance;
    std::uint64_t zero_chroma_pixels = 0;  // pixels carrying the H := 0 convention
    bool achromatic_excluded = false;      // true when those pixels left the hue sample
};

struct CharacterizeOptions {
    /// Include zero-chroma pixels in the hue sample (H = 0 convention).
    bool include_achromatic = true;
    /// When enabled, images above pixel_threshold are summarized from a
    /// seeded uniform sample of sample_size pixels instead of exactly.
    bool allow_subsample = false;
    std::uint64_t pixel_threshold = 40'000'000;
    std::uint64_t sample_size = 10'000'000;
    std::uint64_t sample_seed = 0;
};

/// Transforms every pixel to HCL (through LUV) and summarizes H circularly
/// and C, L linearly. Throws std::invalid_argument on an empty image.
ImageProfile characterize_image(const PixelImage& img, const CharacterizeOptions& opts = {});

}  // namespace cq
