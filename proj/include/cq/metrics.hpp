#pragma once

#include <map>
#include <utility>
#include <vector>

#include "cq/types.hpp"

namespace cq {

/// Quality of one quantized/original pair.
struct QualityReport {
    double vif = 0.0;       // in [0,1]
    double mse = 0.0;       // mean squared 8-bit error over pixels and channels
    double psnr = 0.0;      // dB; +infinity when mse == 0
    double wcss = 0.0;      // objective in the normalized quantization space
    double logit_vif = 0.0; // log(v/(1-v)) of the (clamped) vif
    ColorSpace space = ColorSpace::GammaRGB;
    int k = 0;
};

/// Mean over pixels and channels of squared 8-bit differences.
/// Throws std::invalid_argument on dimension mismatch.
double mse(const PixelImage& reference, const PixelImage& distorted);

/// 10 log10(255^2 / mse); +infinity sentinel when mse == 0.
double psnr(const PixelImage& reference, const PixelImage& distorted);
double psnr_from_mse(double mse_value);

/// log(v / (1 - v)). Throws std::domain_error unless 0 < v < 1.
double logit_vif(double v);

/// Pulls a boundary value into (0,1) before the logit; the batch pipeline
/// uses this instead of erroring on exact 0/1.
double clamp_for_logit(double v, bool* clamped = nullptr);

/// Visual information fidelity (VIF), pixel-domain variant: a multi-scale
/// information ratio in [0,1]; 1 means the distorted image carries all of
/// the reference's local signal information.
///
/// Both images reduce to a luminance plane (XYZ Y row on linearized RGB,
/// scaled to [0,255]). Four scales are analyzed; between scales the planes
/// are smoothed and decimated by 2. All statistics use an 11-tap truncated
/// Gaussian window with sigma = {1, 2, 4, 8} per scale, valid region only.
/// Per window: gain g = cov/(var_ref + eps) with eps = 1e-10, conditional
/// noise sv2 = var_dist - g*cov, visual noise sigma_n^2 = 2. Windows with
/// var_ref < eps contribute to neither sum; negative variances clamp to 0.
/// Scales whose reduced plane is smaller than the window are skipped.
///
/// Throws std::invalid_argument on dimension mismatch or when the images are
/// smaller than the 11x11 analysis window.
double vif(const PixelImage& reference, const PixelImage& distorted);

/// Luminance plane used by vif: Y of linearized RGB, scaled to [0,255].
std::vector<double> luminance_plane(const PixelImage& img);

/// Per-image response entries: logit-VIF difference of each alternative
/// space against the RGB baseline at the same k.
struct ResponseMatrix {
    std::vector<int> ks;
    std::vector<double> y_xyz;  // one entry per k
    std::vector<double> y_luv;
};

/// Builds the response matrix from per-(space,k) VIF values. Every space in
/// {rgb,xyz,luv} must be present for every requested k and all values must
/// lie strictly inside (0,1); a missing entry names the (space,k) pair.
ResponseMatrix response_matrix(const std::map<std::pair<ColorSpace, int>, double>& vifs,
                               const std::vector<int>& ks);

}  // namespace cq
