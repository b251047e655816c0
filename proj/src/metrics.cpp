#include "cq/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "cq/color.hpp"
#include "cq/numeric.hpp"

namespace cq {

namespace {

constexpr int kVifScales = 4;
constexpr int kVifTaps = 11;
constexpr double kVifSigma[kVifScales] = {1.0, 2.0, 4.0, 8.0};
constexpr double kVifNoiseVar = 2.0;
constexpr double kVifEps = 1e-10;

void require_same_dimensions(const char* op, const PixelImage& a, const PixelImage& b) {
    if (!a.same_dimensions(b)) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s: dimension mismatch (%dx%d vs %dx%d)", op, a.width,
                      a.height, b.width, b.height);
        throw std::invalid_argument(buf);
    }
}

std::array<double, kVifTaps> gaussian_taps(double sigma) {
    std::array<double, kVifTaps> t{};
    const int half = kVifTaps / 2;
    double sum = 0.0;
    for (int i = 0; i < kVifTaps; ++i) {
        const double x = i - half;
        t[i] = std::exp(-(x * x) / (2.0 * sigma * sigma));
        sum += t[i];
    }
    for (double& v : t) v /= sum;
    return t;
}

struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

// Separable valid-region correlation; output shrinks by taps-1 per dimension.
Plane convolve_valid(const Plane& in, const std::array<double, kVifTaps>& taps) {
    const int ow = in.width - (kVifTaps - 1);
    const int oh = in.height - (kVifTaps - 1);
    Plane rows;
    rows.width = ow;
    rows.height = in.height;
    rows.values.resize(static_cast<std::size_t>(ow) * in.height);
    for (int y = 0; y < in.height; ++y) {
        const double* src = in.values.data() + static_cast<std::size_t>(y) * in.width;
        double* dst = rows.values.data() + static_cast<std::size_t>(y) * ow;
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int t = 0; t < kVifTaps; ++t) acc += src[x + t] * taps[t];
            dst[x] = acc;
        }
    }
    Plane out;
    out.width = ow;
    out.height = oh;
    out.values.resize(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y) {
        double* dst = out.values.data() + static_cast<std::size_t>(y) * ow;
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int t = 0; t < kVifTaps; ++t)
                acc += rows.values[static_cast<std::size_t>(y + t) * ow + x] * taps[t];
            dst[x] = acc;
        }
    }
    return out;
}

Plane decimate2(const Plane& in) {
    Plane out;
    out.width = (in.width + 1) / 2;
    out.height = (in.height + 1) / 2;
    out.values.resize(static_cast<std::size_t>(out.width) * out.height);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            out.values[static_cast<std::size_t>(y) * out.width + x] = in.at(2 * x, 2 * y);
    return out;
}

Plane elementwise_product(const Plane& a, const Plane& b) {
    Plane out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= b.values[i];
    return out;
}

}  // namespace

double mse(const PixelImage& reference, const PixelImage& distorted) {
    require_same_dimensions("mse", reference, distorted);
    NeumaierSum total;
    for (std::size_t i = 0; i < reference.samples.size(); ++i) {
        const double d =
            static_cast<double>(reference.samples[i]) - static_cast<double>(distorted.samples[i]);
        total.add(d * d);
    }
    return total.value() / static_cast<double>(reference.samples.size());
}

double psnr_from_mse(double mse_value) {
    if (mse_value <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse_value);
}

double psnr(const PixelImage& reference, const PixelImage& distorted) {
    return psnr_from_mse(mse(reference, distorted));
}

double logit_vif(double v) {
    if (!(v > 0.0 && v < 1.0))
        throw std::domain_error("logit_vif: value must lie strictly inside (0,1)");
    return std::log(v / (1.0 - v));
}

double clamp_for_logit(double v, bool* clamped) {
    constexpr double kMargin = 1e-9;
    const double out = std::clamp(v, kMargin, 1.0 - kMargin);
    if (clamped) *clamped = out != v;
    return out;
}

std::vector<double> luminance_plane(const PixelImage& img) {
    const auto& lin = srgb_linear_table();
    std::vector<double> plane(img.pixel_count());
    for (std::size_t i = 0; i < plane.size(); ++i) {
        const double y = kRgbToXyz[1][0] * lin[img.samples[3 * i]] +
                         kRgbToXyz[1][1] * lin[img.samples[3 * i + 1]] +
                         kRgbToXyz[1][2] * lin[img.samples[3 * i + 2]];
        plane[i] = 255.0 * y;
    }
    return plane;
}

double vif(const PixelImage& reference, const PixelImage& distorted) {
    require_same_dimensions("vif", reference, distorted);
    if (reference.width < kVifTaps || reference.height < kVifTaps) {
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "vif: image %dx%d is smaller than the minimum %dx%d analysis window",
                      reference.width, reference.height, kVifTaps, kVifTaps);
        throw std::invalid_argument(buf);
    }

    Plane ref{reference.width, reference.height, luminance_plane(reference)};
    Plane dist{distorted.width, distorted.height, luminance_plane(distorted)};

    NeumaierSum numerator;
    NeumaierSum denominator;
    for (int scale = 0; scale < kVifScales; ++scale) {
        const auto taps = gaussian_taps(kVifSigma[scale]);
        if (scale > 0) {
            if (ref.width < kVifTaps || ref.height < kVifTaps) break;
            ref = decimate2(convolve_valid(ref, taps));
            dist = decimate2(convolve_valid(dist, taps));
        }
        if (ref.width < kVifTaps || ref.height < kVifTaps) break;

        const Plane mu1 = convolve_valid(ref, taps);
        const Plane mu2 = convolve_valid(dist, taps);
        const Plane m11 = convolve_valid(elementwise_product(ref, ref), taps);
        const Plane m22 = convolve_valid(elementwise_product(dist, dist), taps);
        const Plane m12 = convolve_valid(elementwise_product(ref, dist), taps);

        for (std::size_t i = 0; i < mu1.values.size(); ++i) {
            const double var_ref = std::max(0.0, m11.values[i] - mu1.values[i] * mu1.values[i]);
            const double var_dist = std::max(0.0, m22.values[i] - mu2.values[i] * mu2.values[i]);
            const double cov = m12.values[i] - mu1.values[i] * mu2.values[i];
            if (var_ref < kVifEps) continue;  // no signal to lose here
            const double g = cov / (var_ref + kVifEps);
            const double sv2 = std::max(0.0, var_dist - g * cov);
            numerator.add(std::log1p(g * g * var_ref / (sv2 + kVifNoiseVar)));
            denominator.add(std::log1p(var_ref / kVifNoiseVar));
        }
    }

    const double den = denominator.value();
    if (den <= 0.0) return 1.0;  // flat reference: nothing to preserve
    return std::clamp(numerator.value() / den, 0.0, 1.0);
}

ResponseMatrix response_matrix(const std::map<std::pair<ColorSpace, int>, double>& vifs,
                               const std::vector<int>& ks) {
    auto fetch = [&](ColorSpace space, int k) {
        const auto it = vifs.find({space, k});
        if (it == vifs.end()) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "response_matrix: missing VIF for (%s, k=%d)",
                          colorspace_name(space), k);
            throw std::invalid_argument(buf);
        }
        return logit_vif(it->second);  // rejects values outside (0,1)
    };

    ResponseMatrix out;
    out.ks = ks;
    for (int k : ks) {
        const double baseline = fetch(ColorSpace::GammaRGB, k);
        out.y_xyz.push_back(fetch(ColorSpace::XYZ, k) - baseline);
        out.y_luv.push_back(fetch(ColorSpace::LUV, k) - baseline);
    }
    return out;
}

}  // namespace cq
