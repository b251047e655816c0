#pragma once

// Shared fixtures for the test suites: deterministic synthetic images and the
// independent brute-force oracles the frozen expected values come from.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "cq/quantize.hpp"
#include "cq/rng.hpp"
#include "cq/types.hpp"

namespace cqtest {

inline cq::PixelImage constant_image(int w, int h, std::uint8_t r, std::uint8_t g,
                                     std::uint8_t b) {
    cq::PixelImage img(w, h);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.samples[3 * i] = r;
        img.samples[3 * i + 1] = g;
        img.samples[3 * i + 2] = b;
    }
    return img;
}

// Multi-octave value noise; spatially correlated with texture at several
// scales, which is what the quality metric and the clustering care about.
class ValueNoise {
public:
    ValueNoise(int w, int h, std::uint64_t seed) : w_(w), h_(h) {
        const int spacings[4] = {64, 32, 16, 8};
        const double weights[4] = {0.5, 0.25, 0.15, 0.1};
        field_.assign(static_cast<std::size_t>(w) * h, 0.0);
        for (int oct = 0; oct < 4; ++oct) {
            const int s = spacings[oct];
            const int gw = w / s + 2, gh = h / s + 2;
            cq::SeededRng rng(cq::mix_seed(seed, oct));
            std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
            for (auto& v : lattice) v = rng.next_unit();
            for (int y = 0; y < h; ++y) {
                const double fy = static_cast<double>(y) / s;
                const int y0 = static_cast<int>(fy);
                const double ty = fy - y0;
                for (int x = 0; x < w; ++x) {
                    const double fx = static_cast<double>(x) / s;
                    const int x0 = static_cast<int>(fx);
                    const double tx = fx - x0;
                    const double v00 = lattice[static_cast<std::size_t>(y0) * gw + x0];
                    const double v01 = lattice[static_cast<std::size_t>(y0) * gw + x0 + 1];
                    const double v10 = lattice[static_cast<std::size_t>(y0 + 1) * gw + x0];
                    const double v11 = lattice[static_cast<std::size_t>(y0 + 1) * gw + x0 + 1];
                    const double v = (v00 * (1 - tx) + v01 * tx) * (1 - ty) +
                                     (v10 * (1 - tx) + v11 * tx) * ty;
                    field_[static_cast<std::size_t>(y) * w + x] += weights[oct] * v;
                }
            }
        }
    }

    double at(int x, int y) const { return field_[static_cast<std::size_t>(y) * w_ + x]; }

private:
    int w_, h_;
    std::vector<double> field_;
};

/// Deterministic colorful cloudy texture, the stand-in natural image.
inline cq::PixelImage textured_image(int w, int h, std::uint64_t seed = 7) {
    ValueNoise f1(w, h, cq::mix_seed(seed, 101));
    ValueNoise f2(w, h, cq::mix_seed(seed, 202));
    ValueNoise f3(w, h, cq::mix_seed(seed, 303));
    cq::PixelImage img(w, h);
    auto to8 = [](double v) {
        return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double a = f1.at(x, y), b = f2.at(x, y), c = f3.at(x, y);
            img.samples[3 * i] = to8(0.15 + 0.65 * a + 0.20 * c);
            img.samples[3 * i + 1] = to8(0.10 + 0.70 * b + 0.20 * a);
            img.samples[3 * i + 2] = to8(0.20 + 0.60 * c + 0.20 * b);
        }
    }
    return img;
}

inline cq::PixelImage add_gaussian_noise(const cq::PixelImage& src, double sigma,
                                         std::uint64_t seed) {
    cq::SeededRng rng(seed);
    cq::PixelImage out = src;
    for (auto& s : out.samples) {
        const double v = static_cast<double>(s) + sigma * rng.next_normal();
        s = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
    return out;
}

/// Four saturated quadrants; exactly 4 distinct colors.
inline cq::PixelImage four_color_image(int w = 16, int h = 16) {
    cq::PixelImage img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const bool left = x < w / 2, top = y < h / 2;
            std::uint8_t r = 0, g = 0, b = 0;
            if (top && left) r = 220;
            else if (top) g = 200;
            else if (left) b = 240;
            else { r = 250; g = 250; b = 20; }
            img.samples[3 * i] = r;
            img.samples[3 * i + 1] = g;
            img.samples[3 * i + 2] = b;
        }
    }
    return img;
}

inline cq::PixelDataset dataset_from_points(std::vector<double> points,
                                            cq::ColorSpace space = cq::ColorSpace::GammaRGB) {
    cq::PixelDataset d;
    d.points = std::move(points);
    d.space = space;
    d.norm = cq::fixed_range_params(space);
    return d;
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Exhaustive minimum objective over all partitions of n points into at most
/// k nonempty groups (equals the exactly-k optimum for k <= n). Enumerates
/// restricted growth strings; practical for n <= 12.
inline double brute_force_optimal_wcss(std::span<const double> points, int k) {
    const std::size_t n = points.size() / 3;
    std::vector<int> assign(n, 0);
    double best = std::numeric_limits<double>::infinity();

    auto evaluate = [&]() {
        double sum[3 * 8] = {0};
        std::size_t count[8] = {0};
        for (std::size_t i = 0; i < n; ++i) {
            const int g = assign[i];
            sum[3 * g] += points[3 * i];
            sum[3 * g + 1] += points[3 * i + 1];
            sum[3 * g + 2] += points[3 * i + 2];
            ++count[g];
        }
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const int g = assign[i];
            for (int c = 0; c < 3; ++c) {
                const double d = points[3 * i + c] - sum[3 * g + c] / count[g];
                total += d * d;
            }
        }
        best = std::min(best, total);
    };

    // assign[i] <= 1 + max(assign[0..i-1]), capped at k-1.
    auto recurse = [&](auto&& self, std::size_t i, int max_used) -> void {
        if (i == n) {
            evaluate();
            return;
        }
        const int limit = std::min(max_used + 1, k - 1);
        for (int g = 0; g <= limit; ++g) {
            assign[i] = g;
            self(self, i + 1, std::max(max_used, g));
        }
    };
    recurse(recurse, 0, -1);
    return best;
}

/// Largest objective decrease any single-point move could still achieve
/// (negative values mean the solution is not locally optimal). Recomputes
/// centroids from scratch, independently of the implementation path.
inline double worst_single_move_delta(const cq::PixelDataset& data,
                                      const cq::Assignment& assignment, int k) {
    const std::size_t n = data.size();
    std::vector<double> sums(static_cast<std::size_t>(k) * 3, 0.0);
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const int g = static_cast<int>(assignment.labels[i]);
        for (int c = 0; c < 3; ++c) sums[3 * g + c] += data.points[3 * i + c];
        counts[g] += 1.0;
    }
    std::vector<double> mean(sums);
    for (int g = 0; g < k; ++g)
        if (counts[g] > 0)
            for (int c = 0; c < 3; ++c) mean[3 * g + c] /= counts[g];

    auto d2 = [&](std::size_t i, int g) {
        double total = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double d = data.points[3 * i + c] - mean[3 * g + c];
            total += d * d;
        }
        return total;
    };

    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int a = static_cast<int>(assignment.labels[i]);
        if (counts[a] <= 1.0) continue;
        const double removal = counts[a] / (counts[a] - 1.0) * d2(i, a);
        for (int b = 0; b < k; ++b) {
            if (b == a) continue;
            const double delta = counts[b] / (counts[b] + 1.0) * d2(i, b) - removal;
            worst = std::min(worst, delta);
        }
    }
    return worst;
}

/// Direct textbook evaluation of the circular statistics for tiny samples.
struct NaiveCircular {
    double r1, mu1_deg, r2, mu2_deg, sd, skew, kurt;
};

inline NaiveCircular naive_circular(std::span<const double> angles_deg) {
    const double n = static_cast<double>(angles_deg.size());
    auto moment = [&](int p, double& r, double& mu_deg) {
        double c = 0.0, s = 0.0;
        for (double a : angles_deg) {
            c += std::cos(p * a * std::numbers::pi / 180.0);
            s += std::sin(p * a * std::numbers::pi / 180.0);
        }
        c /= n;
        s /= n;
        r = std::sqrt(c * c + s * s);
        mu_deg = std::atan2(s, c) * 180.0 / std::numbers::pi;
        if (mu_deg < 0) mu_deg += 360.0;
    };
    NaiveCircular out{};
    moment(1, out.r1, out.mu1_deg);
    moment(2, out.r2, out.mu2_deg);
    out.sd = std::sqrt(-2.0 * std::log(out.r1));
    double delta = std::fmod(out.mu2_deg - 2.0 * out.mu1_deg, 360.0);
    if (delta <= -180.0) delta += 360.0;
    if (delta > 180.0) delta -= 360.0;
    const double drad = delta * std::numbers::pi / 180.0;
    out.skew = out.r2 * std::sin(drad) / std::pow(1.0 - out.r1, 1.5);
    out.kurt = (out.r2 * std::cos(drad) - std::pow(out.r1, 4.0)) /
               ((1.0 - out.r1) * (1.0 - out.r1));
    return out;
}

}  // namespace cqtest
