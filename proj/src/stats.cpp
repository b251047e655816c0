#include "cq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cq/color.hpp"
#include "cq/numeric.hpp"
#include "cq/rng.hpp"

namespace cq {

namespace {

constexpr double kResultantSnap = 1e-12;   // 1-R below this counts as all-equal
constexpr double kResultantZero = 1e-14;   // R below this leaves the direction undefined

}  // namespace

LinearSummary linear_summary(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("linear_summary: empty sample");

    LinearSummary out;
    out.n = samples.size();
    const double n = static_cast<double>(samples.size());

    NeumaierSum sum;
    for (double v : samples) sum.add(v);
    out.mean = sum.value() / n;

    if (samples.size() == 1) {
        out.degenerate = true;
        return out;
    }

    NeumaierSum s2, s3, s4;
    for (double v : samples) {
        const double d = v - out.mean;
        const double d2 = d * d;
        s2.add(d2);
        s3.add(d2 * d);
        s4.add(d2 * d2);
    }
    const double m2 = s2.value() / n;
    out.sd = std::sqrt(s2.value() / (n - 1.0));
    if (m2 <= 0.0) {
        out.degenerate = true;  // all samples equal
        out.sd = 0.0;
        return out;
    }
    out.skewness = (s3.value() / n) / std::pow(m2, 1.5);
    out.kurtosis = (s4.value() / n) / (m2 * m2);
    return out;
}

TrigMoment trig_moment(std::span<const double> angles_deg, int p) {
    if (angles_deg.empty()) throw std::invalid_argument("trig_moment: empty sample");
    if (p < 1) throw std::invalid_argument("trig_moment: p must be positive");

    NeumaierSum c, s;
    for (double a : angles_deg) {
        const double r = deg_to_rad(static_cast<double>(p) * a);
        c.add(std::cos(r));
        s.add(std::sin(r));
    }
    const double n = static_cast<double>(angles_deg.size());

    TrigMoment out;
    out.cbar = c.value() / n;
    out.sbar = s.value() / n;
    out.resultant = std::min(1.0, std::hypot(out.cbar, out.sbar));
    if (out.resultant < kResultantZero) {
        out.direction_undefined = true;
        out.direction_deg = 0.0;
    } else {
        out.direction_deg = normalize_degrees(rad_to_deg(std::atan2(out.sbar, out.cbar)));
    }
    return out;
}

CircularSummary circular_summary(std::span<const double> angles_deg) {
    const TrigMoment m1 = trig_moment(angles_deg, 1);
    const TrigMoment m2 = trig_moment(angles_deg, 2);

    CircularSummary out;
    out.n = angles_deg.size();
    out.mean_direction_deg = m1.direction_deg;
    out.direction_undefined = m1.direction_undefined;

    double r = m1.resultant;
    if (1.0 - r < kResultantSnap) r = 1.0;  // keeps sd = sqrt(-2 log R) exactly 0
    out.resultant_length = r;
    out.circular_sd = std::sqrt(-2.0 * std::log(r));

    if (r == 1.0) {
        out.degenerate = true;  // skewness/kurtosis denominators vanish
        return out;
    }

    const double delta = deg_to_rad(signed_degrees(m2.direction_deg - 2.0 * m1.direction_deg));
    out.skewness = m2.resultant * std::sin(delta) / std::pow(1.0 - r, 1.5);
    out.kurtosis = (m2.resultant * std::cos(delta) - r * r * r * r) / ((1.0 - r) * (1.0 - r));
    return out;
}

ImageProfile characterize_image(const PixelImage& img, const CharacterizeOptions& opts) {
    if (img.pixel_count() == 0)
        throw std::invalid_argument("characterize_image: empty image");

    // Pixel indices to visit: all of them, or a seeded uniform sample for
    // very large images when the caller allows it.
    const std::uint64_t total = img.pixel_count();
    std::vector<std::uint32_t> sampled;
    const bool subsample =
        opts.allow_subsample && total > opts.pixel_threshold && opts.sample_size < total;
    if (subsample) {
        SeededRng rng(mix_seed(opts.sample_seed, 0x5ca1ab1eULL));
        sampled.resize(opts.sample_size);
        for (auto& idx : sampled)
            idx = static_cast<std::uint32_t>(rng.next_index(static_cast<std::size_t>(total)));
    }
    const std::size_t n = subsample ? sampled.size() : static_cast<std::size_t>(total);

    std::vector<double> hue;
    std::vector<double> chroma;
    std::vector<double> lum;
    hue.reserve(n);
    chroma.reserve(n);
    lum.reserve(n);

    const auto& lin = srgb_linear_table();
    std::uint64_t zero_chroma = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t i = subsample ? sampled[j] : j;
        const ColorTriple rgb{lin[img.samples[3 * i]], lin[img.samples[3 * i + 1]],
                              lin[img.samples[3 * i + 2]], ColorSpace::LinearRGB};
        const ColorTriple hcl = luv_to_hcl(xyz_to_luv(rgb_to_xyz(rgb)));
        if (hcl.c1 == 0.0) {
            ++zero_chroma;
            if (opts.include_achromatic) hue.push_back(0.0);
        } else {
            hue.push_back(hcl.c2);
        }
        chroma.push_back(hcl.c1);
        lum.push_back(hcl.c0);
    }

    ImageProfile profile;
    profile.shorter_edge = img.shorter_edge();
    profile.longer_edge = img.longer_edge();
    profile.zero_chroma_pixels = zero_chroma;
    profile.achromatic_excluded = !opts.include_achromatic;
    if (hue.empty())
        throw std::invalid_argument(
            "characterize_image: hue sample is empty (all pixels achromatic and excluded)");
    profile.hue = circular_summary(hue);
    profile.chroma = linear_summary(chroma);
    profile.luminance = linear_summary(lum);
    return profile;
}

}  // namespace cq
