#pragma once

#include <cstdint>
#include <vector>

#include "cq/color.hpp"
#include "cq/rng.hpp"
#include "cq/types.hpp"

namespace cq {

/// The point cloud a quantization runs on: n rows of 3 components, each
/// in [0,1], plus the parameters needed to map centroids back out.
struct PixelDataset {
    std::vector<double> points;  // n x 3, row-major
    ColorSpace space = ColorSpace::GammaRGB;
    NormalizationParams norm;

    std::size_t size() const { return points.size() / 3; }
    const double* point(std::size_t i) const { return points.data() + 3 * i; }
};

struct Palette {
    int k = 0;
    std::vector<double> centroids;  // k x 3, components in [0,1]
    ColorSpace space = ColorSpace::GammaRGB;
    NormalizationParams norm;

    const double* centroid(int j) const { return centroids.data() + 3 * j; }
};

struct Assignment {
    std::vector<std::uint32_t> labels;   // one per point, in [0,k)
    std::vector<std::uint64_t> counts;   // per-cluster sizes; every entry > 0
};

struct KMeansConfig {
    int k = 8;
    int max_iterations = 200;  // cap on optimal-transfer/quick-transfer cycles
    int restarts = 1;
    std::uint64_t seed = 0;

    /// Default policy: 10 restarts up to k=64, 3 beyond.
    static KMeansConfig with_defaults(int k, std::uint64_t seed) {
        KMeansConfig cfg;
        cfg.k = k;
        cfg.seed = seed;
        cfg.restarts = k <= 64 ? 10 : 3;
        return cfg;
    }
};

struct KMeansResult {
    Palette palette;
    Assignment assignment;
    double wcss = 0.0;
    int iterations = 0;    // optimal-transfer cycles of the winning run
    int best_restart = 0;
    /// Objective after each optimal-transfer/quick-transfer cycle of the
    /// winning run (non-increasing), starting at the post-seeding value.
    std::vector<double> wcss_history;
};

/// k-means++ seeding: first centroid uniform over points, each next drawn
/// with probability proportional to squared distance from the nearest chosen
/// one. Identical rng state yields identical palettes. Throws when k exceeds
/// the number of distinct points (the message names that count).
Palette kmeanspp_init(const PixelDataset& data, int k, SeededRng& rng);

/// Seeded k-means (best of cfg.restarts independent runs, lowest objective
/// wins, ties to the lower restart index). Each run seeds with kmeanspp_init
/// and refines with the Hartigan-Wong optimal-transfer/quick-transfer scheme
/// (Algorithm AS 136) until a full optimal-transfer pass moves nothing (or
/// the iteration cap is hit), then verifies single-point-transfer local
/// optimality against exactly recomputed centroids.
KMeansResult run_kmeans(const PixelDataset& data, const KMeansConfig& cfg);

/// Same refinement from caller-supplied centroids (k x 3, normalized scale).
/// Clusters left empty by the initial assignment are reseeded at the point
/// farthest from the empty cluster's centroid.
KMeansResult run_kmeans_from_centroids(const PixelDataset& data,
                                       std::vector<double> centroids,
                                       int max_iterations = 200);

/// Sum of squared distances from each point to its assigned centroid.
/// Throws if shapes disagree or a label is out of range.
double wcss(const PixelDataset& data, const Palette& palette, const Assignment& assignment);

/// Paints each pixel with its centroid mapped back to 8-bit gamma RGB.
/// clamped_pixels (optional) counts pixels whose centroid left the RGB gamut.
PixelImage reconstruct(int width, int height, const Assignment& assignment,
                       const Palette& palette, std::uint64_t* clamped_pixels = nullptr);

}  // namespace cq
