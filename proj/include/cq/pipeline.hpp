#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cq/metrics.hpp"
#include "cq/quantize.hpp"
#include "cq/stats.hpp"
#include "cq/types.hpp"

namespace cq {

/// End-to-end quantization of one image in one space: transform, scale to
/// [0,1], cluster, reconstruct. `hcl` runs the identical LUV pipeline (the
/// polar map is measure-preserving per cluster), so its assignments match
/// luv exactly for the same seed.
struct QuantizeOutcome {
    PixelImage image;
    Palette palette;
    Assignment assignment;
    double wcss = 0.0;
    std::uint64_t clamped_pixels = 0;  // normalization + gamut clamps
    int iterations = 0;
    int best_restart = 0;
    std::vector<double> wcss_history;
};

QuantizeOutcome quantize_image(const PixelImage& img, ColorSpace requested,
                               const KMeansConfig& cfg, Scaling scaling = Scaling::FixedRange);

/// One batch cell: a (image, space, k) evaluation.
struct ExperimentRow {
    std::string image;  // file stem
    int shorter_edge = 0;
    int longer_edge = 0;
    std::string space;  // requested name (rgb|xyz|luv|hcl)
    int k = 0;
    std::uint64_t seed = 0;
    double wcss = 0.0;
    double vif = 0.0;
    double psnr = 0.0;
    double logit_vif = 0.0;
    std::optional<double> y;  // logit-VIF difference vs rgb; empty for the baseline
    std::uint64_t clamped = 0;
    double ms = 0.0;
};

struct ExperimentConfig {
    std::vector<ColorSpace> spaces;
    std::vector<int> ks;
    std::uint64_t seed = 0;
    std::optional<int> restarts;  // overrides the per-k default policy
    Scaling scaling = Scaling::FixedRange;
    bool record_timing = false;   // measured ms in rows (off: deterministic 0)
    bool write_images = true;
    std::string out_dir;          // required by run_experiment
};

/// Best-space counts per k over a run, shaped like a colorspace-by-k table.
struct BestSpaceTally {
    std::vector<int> ks;
    std::vector<std::string> spaces;             // canonical row order
    std::map<std::string, std::vector<int>> counts;  // per space, one count per k
};

struct ExperimentResult {
    std::vector<ExperimentRow> rows;
    std::map<std::string, ResponseMatrix> responses;  // image stem -> matrix
    std::vector<std::string> response_gaps;  // images lacking a full space set
    BestSpaceTally tally;
    std::vector<std::string> failures;  // per-cell/per-image error lines
    std::vector<std::string> warnings;
};

/// Runs the full (image x space x k) cross product. Writes results.csv and
/// profiles.csv (plus quantized images) into cfg.out_dir; failures are
/// recorded and skipped. Cells are parallelized; outputs are written in
/// canonical order with per-cell seeds derived from (seed, image, space, k),
/// so identical inputs produce identical bytes.
ExperimentResult run_experiment(const std::vector<std::string>& image_paths,
                                const ExperimentConfig& cfg);

// CSV surface. results.csv header:
//   image,I,J,space,k,seed,wcss,vif,psnr,logit_vif,y_xyz_or_luv,clamped,ms
std::string results_csv_header();
std::string to_csv_row(const ExperimentRow& row);
ExperimentRow parse_csv_row(const std::string& line);
void write_results_csv(const std::string& path, const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> read_results_csv(const std::string& path);

// profiles.csv: one row of the 14 covariates per image (plus the resultant
// length and the zero-chroma count as trailing extras).
std::string profiles_csv_header();
std::string to_profile_csv_row(const std::string& image, const ImageProfile& profile);

/// Renders the tally as an aligned colorspace-by-k table.
std::string format_tally(const BestSpaceTally& tally);

/// Stem of a path ("dir/statlab.png" -> "statlab").
std::string image_stem(const std::string& path);

}  // namespace cq
