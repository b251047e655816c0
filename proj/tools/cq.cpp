#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "cq/image_io.hpp"
#include "cq/metrics.hpp"
#include "cq/parallel.hpp"
#include "cq/pipeline.hpp"
#include "cq/stats.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

cq::Scaling parse_scaling(const std::string& s) {
    if (s == "fixed") return cq::Scaling::FixedRange;
    if (s == "minmax") return cq::Scaling::MinMax;
    throw std::invalid_argument("--scaling: expected fixed|minmax");
}

int cmd_quantize(cq::ColorSpace space, int k, std::uint64_t seed, std::optional<int> restarts,
                 cq::Scaling scaling, const std::string& input, const std::string& output) {
    std::vector<std::string> warnings;
    const cq::PixelImage img = cq::decode_image(input, &warnings);
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

    cq::KMeansConfig cfg = cq::KMeansConfig::with_defaults(k, seed);
    if (restarts) cfg.restarts = *restarts;
    const cq::QuantizeOutcome out = cq::quantize_image(img, space, cfg, scaling);
    cq::encode_image(out.image, output);
    std::fprintf(stderr,
                 "%s: wrote %s (space=%s k=%d seed=%llu wcss=%.9g iterations=%d clamped=%llu)\n",
                 input.c_str(), output.c_str(), cq::colorspace_name(space), k,
                 static_cast<unsigned long long>(seed), out.wcss, out.iterations,
                 static_cast<unsigned long long>(out.clamped_pixels));
    return kExitOk;
}

int cmd_evaluate(const std::string& ref_path, const std::string& dist_path) {
    const cq::PixelImage ref = cq::decode_image(ref_path);
    const cq::PixelImage dist = cq::decode_image(dist_path);
    const double v = cq::vif(ref, dist);
    const double m = cq::mse(ref, dist);
    const double p = cq::psnr_from_mse(m);
    std::printf("vif=%.17g\n", v);
    if (std::isinf(p))
        std::printf("psnr=inf\n");
    else
        std::printf("psnr=%.17g\n", p);
    std::printf("mse=%.17g\n", m);
    return kExitOk;
}

int cmd_characterize(const std::string& input, bool exclude_achromatic, bool subsample,
                     std::uint64_t seed, bool no_header) {
    const cq::PixelImage img = cq::decode_image(input);
    cq::CharacterizeOptions opts;
    opts.include_achromatic = !exclude_achromatic;
    opts.allow_subsample = subsample;
    opts.sample_seed = seed;
    const cq::ImageProfile profile = cq::characterize_image(img, opts);
    if (!no_header) std::printf("%s\n", cq::profiles_csv_header().c_str());
    std::printf("%s\n", cq::to_profile_csv_row(cq::image_stem(input), profile).c_str());
    return kExitOk;
}

int cmd_batch(const cq::ExperimentConfig& cfg, const std::vector<std::string>& images) {
    const cq::ExperimentResult result = cq::run_experiment(images, cfg);
    for (const auto& w : result.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    for (const auto& g : result.response_gaps) std::fprintf(stderr, "note: %s\n", g.c_str());
    for (const auto& f : result.failures) std::fprintf(stderr, "error: %s\n", f.c_str());

    std::printf("%zu rows -> %s\n", result.rows.size(), cfg.out_dir.c_str());
    std::printf("best colorspace by VIF (count of images):\n%s",
                cq::format_tally(result.tally).c_str());
    return result.failures.empty() ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"color quantization in rgb/xyz/luv/hcl with VIF evaluation and image profiling"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: CQ_THREADS or all cores)");

    // quantize
    auto* quantize = app.add_subcommand("quantize", "quantize one image");
    std::string q_space;
    int q_k = 8;
    std::uint64_t q_seed = 0;
    int q_restarts = -1;
    std::string q_scaling = "fixed";
    std::string q_in, q_out;
    quantize->add_option("--space", q_space, "rgb|xyz|luv|hcl")->required();
    quantize->add_option("--k", q_k, "palette size")->required()->check(CLI::PositiveNumber);
    quantize->add_option("--seed", q_seed, "random seed (default 0)");
    quantize->add_option("--restarts", q_restarts, "independent restarts (default: 10, or 3 past k=64)")
        ->check(CLI::PositiveNumber);
    quantize->add_option("--scaling", q_scaling, "fixed|minmax component scaling (default fixed)");
    quantize->add_option("input", q_in, "input image (png/tiff)")->required();
    quantize->add_option("output", q_out, "output image (.png/.tif)")->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "compare a processed image to its original");
    std::string e_ref, e_dist;
    evaluate->add_option("reference", e_ref, "original image")->required();
    evaluate->add_option("distorted", e_dist, "processed image")->required();

    // characterize
    auto* characterize =
        app.add_subcommand("characterize", "hue/chroma/luminance distribution summary");
    std::string c_in;
    bool c_exclude = false, c_subsample = false, c_no_header = false;
    std::uint64_t c_seed = 0;
    characterize->add_option("input", c_in, "input image")->required();
    characterize->add_flag("--exclude-achromatic", c_exclude,
                           "drop zero-chroma pixels from the hue sample");
    characterize->add_flag("--subsample", c_subsample,
                           "sample 1e7 pixels for images above 4e7 pixels");
    characterize->add_option("--seed", c_seed, "subsample seed");
    characterize->add_flag("--no-header", c_no_header, "emit the data row only");

    // batch
    auto* batch = app.add_subcommand("batch", "run the space x k cross product over many images");
    std::vector<std::string> b_spaces;
    std::vector<int> b_ks;
    std::string b_out, b_scaling = "fixed";
    std::uint64_t b_seed = 0;
    int b_restarts = -1;
    bool b_timing = false, b_no_images = false;
    std::vector<std::string> b_images;
    batch->add_option("--spaces", b_spaces, "colorspaces (comma separated)")
        ->required()
        ->delimiter(',');
    batch->add_option("--ks", b_ks, "palette sizes (comma separated)")
        ->required()
        ->delimiter(',');
    batch->add_option("--out", b_out, "output directory")->required();
    batch->add_option("--seed", b_seed, "base seed (default 0)");
    batch->add_option("--restarts", b_restarts, "restart override")->check(CLI::PositiveNumber);
    batch->add_option("--scaling", b_scaling, "fixed|minmax (default fixed)");
    batch->add_flag("--timing", b_timing, "record wall-clock ms in rows (nondeterministic)");
    batch->add_flag("--no-images", b_no_images, "skip writing quantized images");
    batch->add_option("images", b_images, "input images")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (threads > 0) cq::set_thread_count(threads);

    // Name/enum validation is a usage problem; anything past it is work.
    cq::ColorSpace q_space_parsed{};
    cq::Scaling q_scaling_parsed{};
    cq::ExperimentConfig batch_cfg;
    try {
        if (quantize->parsed()) {
            q_space_parsed = cq::parse_colorspace(q_space);
            q_scaling_parsed = parse_scaling(q_scaling);
        }
        if (batch->parsed()) {
            for (const auto& name : b_spaces)
                batch_cfg.spaces.push_back(cq::parse_colorspace(name));
            batch_cfg.ks = b_ks;
            batch_cfg.seed = b_seed;
            if (b_restarts > 0) batch_cfg.restarts = b_restarts;
            batch_cfg.scaling = parse_scaling(b_scaling);
            batch_cfg.record_timing = b_timing;
            batch_cfg.write_images = !b_no_images;
            batch_cfg.out_dir = b_out;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }

    try {
        if (quantize->parsed())
            return cmd_quantize(q_space_parsed, q_k, q_seed,
                                q_restarts > 0 ? std::optional<int>(q_restarts) : std::nullopt,
                                q_scaling_parsed, q_in, q_out);
        if (evaluate->parsed()) return cmd_evaluate(e_ref, e_dist);
        if (characterize->parsed())
            return cmd_characterize(c_in, c_exclude, c_subsample, c_seed, c_no_header);
        if (batch->parsed()) return cmd_batch(batch_cfg, b_images);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
    return kExitUsage;
}
