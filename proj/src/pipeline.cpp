#include "cq/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cq/image_io.hpp"
#include "cq/parallel.hpp"
#include "cq/rng.hpp"

namespace cq {

namespace {

ColorSpace effective_space(ColorSpace requested) {
    // Polar coordinates preserve per-cluster fits, so hue/chroma clustering
    // runs on the (L,u,v) representation directly.
    return requested == ColorSpace::HCL ? ColorSpace::LUV : requested;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, const char* what) {
    if (field == "inf") return std::numeric_limits<double>::infinity();
    if (field == "-inf") return -std::numeric_limits<double>::infinity();
    double value = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw std::invalid_argument(std::string("csv: bad ") + what + " field '" +
                                    std::string(field) + "'");
    return value;
}

std::uint64_t parse_u64(std::string_view field, const char* what) {
    std::uint64_t value = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw std::invalid_argument(std::string("csv: bad ") + what + " field '" +
                                    std::string(field) + "'");
    return value;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

const std::vector<std::string>& canonical_space_order() {
    static const std::vector<std::string> order = {"rgb", "xyz", "luv", "hcl"};
    return order;
}

}  // namespace

std::string image_stem(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

QuantizeOutcome quantize_image(const PixelImage& img, ColorSpace requested,
                               const KMeansConfig& cfg, Scaling scaling) {
    if (requested == ColorSpace::LinearRGB)
        throw std::invalid_argument("quantize_image: space must be rgb, xyz, luv or hcl");
    if (img.pixel_count() == 0) throw std::invalid_argument("quantize_image: empty image");

    const ColorSpace space = effective_space(requested);
    std::vector<double> triples = image_to_triples(img, space);
    NormalizationParams norm = scaling == Scaling::FixedRange
                                   ? fixed_range_params(space)
                                   : minmax_params(space, triples);
    const std::uint64_t clamped_in = normalize_components(triples, norm);

    PixelDataset dataset;
    dataset.points = std::move(triples);
    dataset.space = space;
    dataset.norm = norm;

    KMeansResult km = run_kmeans(dataset, cfg);

    QuantizeOutcome out;
    std::uint64_t clamped_out = 0;
    out.image = reconstruct(img.width, img.height, km.assignment, km.palette, &clamped_out);
    out.palette = std::move(km.palette);
    out.assignment = std::move(km.assignment);
    out.wcss = km.wcss;
    out.clamped_pixels = clamped_in + clamped_out;
    out.iterations = km.iterations;
    out.best_restart = km.best_restart;
    out.wcss_history = std::move(km.wcss_history);
    return out;
}

std::string results_csv_header() {
    return "image,I,J,space,k,seed,wcss,vif,psnr,logit_vif,y_xyz_or_luv,clamped,ms";
}

std::string to_csv_row(const ExperimentRow& row) {
    std::ostringstream out;
    out << csv_escape(row.image) << ',' << row.shorter_edge << ',' << row.longer_edge << ','
        << row.space << ',' << row.k << ',' << row.seed << ',' << format_double(row.wcss) << ','
        << format_double(row.vif) << ',' << format_double(row.psnr) << ','
        << format_double(row.logit_vif) << ',' << (row.y ? format_double(*row.y) : "") << ','
        << row.clamped << ',' << format_double(row.ms);
    return out.str();
}

ExperimentRow parse_csv_row(const std::string& line) {
    const auto fields = split_csv_line(line);
    if (fields.size() != 13)
        throw std::invalid_argument("csv: expected 13 fields, got " +
                                    std::to_string(fields.size()));
    ExperimentRow row;
    row.image = fields[0];
    row.shorter_edge = static_cast<int>(parse_u64(fields[1], "I"));
    row.longer_edge = static_cast<int>(parse_u64(fields[2], "J"));
    row.space = fields[3];
    row.k = static_cast<int>(parse_u64(fields[4], "k"));
    row.seed = parse_u64(fields[5], "seed");
    row.wcss = parse_double(fields[6], "wcss");
    row.vif = parse_double(fields[7], "vif");
    row.psnr = parse_double(fields[8], "psnr");
    row.logit_vif = parse_double(fields[9], "logit_vif");
    if (!fields[10].empty()) row.y = parse_double(fields[10], "y");
    row.clamped = parse_u64(fields[11], "clamped");
    row.ms = parse_double(fields[12], "ms");
    return row;
}

void write_results_csv(const std::string& path, const std::vector<ExperimentRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << results_csv_header() << '\n';
    for (const auto& row : rows) out << to_csv_row(row) << '\n';
    if (!out) throw std::runtime_error(path + ": write failed");
}

std::vector<ExperimentRow> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    if (line != results_csv_header()) throw std::runtime_error(path + ": unexpected header");
    std::vector<ExperimentRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(parse_csv_row(line));
    }
    return rows;
}

std::string profiles_csv_header() {
    return "image,I,J,hue_mean_dir_deg,hue_circ_sd,hue_circ_skew,hue_circ_kurt,"
           "chroma_mean,chroma_sd,chroma_skew,chroma_kurt,"
           "lum_mean,lum_sd,lum_skew,lum_kurt,hue_resultant,zero_chroma";
}

std::string to_profile_csv_row(const std::string& image, const ImageProfile& p) {
    std::ostringstream out;
    out << csv_escape(image) << ',' << p.shorter_edge << ',' << p.longer_edge << ','
        << format_double(p.hue.mean_direction_deg) << ',' << format_double(p.hue.circular_sd)
        << ',' << format_double(p.hue.skewness) << ',' << format_double(p.hue.kurtosis) << ','
        << format_double(p.chroma.mean) << ',' << format_double(p.chroma.sd) << ','
        << format_double(p.chroma.skewness) << ',' << format_double(p.chroma.kurtosis) << ','
        << format_double(p.luminance.mean) << ',' << format_double(p.luminance.sd) << ','
        << format_double(p.luminance.skewness) << ',' << format_double(p.luminance.kurtosis)
        << ',' << format_double(p.hue.resultant_length) << ',' << p.zero_chroma_pixels;
    return out.str();
}

std::string format_tally(const BestSpaceTally& tally) {
    std::ostringstream out;
    out << "colorspace";
    for (int k : tally.ks) out << "\tk=" << k;
    out << '\n';
    for (const auto& space : tally.spaces) {
        out << space;
        const auto it = tally.counts.find(space);
        for (std::size_t i = 0; i < tally.ks.size(); ++i)
            out << '\t' << (it == tally.counts.end() ? 0 : it->second[i]);
        out << '\n';
    }
    return out.str();
}

ExperimentResult run_experiment(const std::vector<std::string>& image_paths,
                                const ExperimentConfig& cfg) {
    if (image_paths.empty()) throw std::invalid_argument("run_experiment: no images");
    if (cfg.spaces.empty() || cfg.ks.empty())
        throw std::invalid_argument("run_experiment: spaces and ks must be nonempty");
    if (cfg.out_dir.empty()) throw std::invalid_argument("run_experiment: out_dir required");
    std::filesystem::create_directories(cfg.out_dir);

    ExperimentResult result;

    struct LoadedImage {
        std::string stem;
        PixelImage image;
        bool ok = false;
    };
    std::vector<LoadedImage> images(image_paths.size());
    std::vector<std::string> profile_rows;

    // Stems are the image ids in every output; repeated names get a
    // deterministic ordinal suffix so distinct inputs never merge.
    std::map<std::string, int> stem_uses;
    for (std::size_t i = 0; i < image_paths.size(); ++i) {
        std::string stem = image_stem(image_paths[i]);
        const int use = ++stem_uses[stem];
        if (use > 1) stem += "_" + std::to_string(use);
        images[i].stem = std::move(stem);
    }

    for (std::size_t i = 0; i < image_paths.size(); ++i) {
        try {
            std::vector<std::string> notes;
            images[i].image = decode_image(image_paths[i], &notes);
            images[i].ok = true;
            for (auto& n : notes) result.warnings.push_back(std::move(n));
        } catch (const std::exception& e) {
            result.failures.push_back(std::string("decode: ") + e.what());
        }
    }

    for (auto& li : images) {
        if (!li.ok) continue;
        try {
            const ImageProfile profile = characterize_image(li.image);
            profile_rows.push_back(to_profile_csv_row(li.stem, profile));
        } catch (const std::exception& e) {
            result.failures.push_back(li.stem + ": characterize: " + e.what());
        }
    }

    struct Cell {
        std::size_t image_index;
        std::size_t space_index;
        std::size_t k_index;
    };
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (!images[i].ok) continue;
        for (std::size_t s = 0; s < cfg.spaces.size(); ++s)
            for (std::size_t kx = 0; kx < cfg.ks.size(); ++kx) cells.push_back({i, s, kx});
    }

    struct CellOutcome {
        ExperimentRow row;
        PixelImage image;
        double raw_vif = 0.0;
        bool ok = false;
        std::string error;
        std::string warning;
    };
    std::vector<CellOutcome> outcomes(cells.size());

    parallel_for(cells.size(), [&](std::size_t ci) {
        const Cell& cell = cells[ci];
        CellOutcome& out = outcomes[ci];
        const LoadedImage& li = images[cell.image_index];
        const ColorSpace requested = cfg.spaces[cell.space_index];
        const int k = cfg.ks[cell.k_index];
        // The seed stream depends on the effective space, so hcl cells
        // reproduce the luv clustering exactly.
        const std::uint64_t cell_seed =
            mix_seed(cfg.seed, fnv1a(li.stem),
                     static_cast<std::uint64_t>(effective_space(requested)),
                     static_cast<std::uint64_t>(k));
        try {
            KMeansConfig km = KMeansConfig::with_defaults(k, cell_seed);
            if (cfg.restarts) km.restarts = *cfg.restarts;
            const auto start = std::chrono::steady_clock::now();
            QuantizeOutcome q = quantize_image(li.image, requested, km, cfg.scaling);
            const double vif_value = vif(li.image, q.image);
            const auto stop = std::chrono::steady_clock::now();

            bool clamped_for_logit = false;
            const double safe_vif = clamp_for_logit(vif_value, &clamped_for_logit);
            if (clamped_for_logit)
                out.warning = li.stem + ": vif at the (0,1) boundary clamped before logit (" +
                              colorspace_name(requested) + ", k=" + std::to_string(k) + ")";

            out.row.image = li.stem;
            out.row.shorter_edge = li.image.shorter_edge();
            out.row.longer_edge = li.image.longer_edge();
            out.row.space = colorspace_name(requested);
            out.row.k = k;
            out.row.seed = cell_seed;
            out.row.wcss = q.wcss;
            out.row.vif = vif_value;
            out.row.psnr = psnr(li.image, q.image);
            out.row.logit_vif = logit_vif(safe_vif);
            out.row.clamped = q.clamped_pixels;
            out.row.ms = cfg.record_timing
                             ? std::chrono::duration<double, std::milli>(stop - start).count()
                             : 0.0;
            out.raw_vif = safe_vif;
            out.image = std::move(q.image);
            out.ok = true;
        } catch (const std::exception& e) {
            out.error = li.stem + " (" + colorspace_name(requested) +
                        ", k=" + std::to_string(k) + "): " + e.what();
        }
    });

    // Everything below runs in canonical order, so output bytes are stable.
    std::map<std::string, std::map<std::pair<ColorSpace, int>, double>> vif_by_image;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        CellOutcome& out = outcomes[ci];
        if (!out.ok) {
            result.failures.push_back(out.error);
            continue;
        }
        if (!out.warning.empty()) result.warnings.push_back(out.warning);
        const ColorSpace requested = cfg.spaces[cells[ci].space_index];
        if (requested != ColorSpace::HCL)
            vif_by_image[out.row.image][{requested, out.row.k}] = out.raw_vif;
    }

    // Response entries (alternative space vs the rgb baseline at the same k).
    for (auto& out : outcomes) {
        if (!out.ok || out.row.space == "rgb") continue;
        const auto img_it = vif_by_image.find(out.row.image);
        if (img_it == vif_by_image.end()) continue;
        const auto base = img_it->second.find({ColorSpace::GammaRGB, out.row.k});
        if (base != img_it->second.end())
            out.row.y = logit_vif(out.raw_vif) - logit_vif(base->second);
    }

    const bool full_set = [&] {
        auto has = [&](ColorSpace s) {
            return std::find(cfg.spaces.begin(), cfg.spaces.end(), s) != cfg.spaces.end();
        };
        return has(ColorSpace::GammaRGB) && has(ColorSpace::XYZ) && has(ColorSpace::LUV);
    }();
    for (const auto& [stem, vifs] : vif_by_image) {
        if (!full_set) {
            result.response_gaps.push_back(stem + ": response matrix needs rgb, xyz and luv");
            continue;
        }
        try {
            result.responses[stem] = response_matrix(vifs, cfg.ks);
        } catch (const std::exception& e) {
            result.response_gaps.push_back(stem + ": " + e.what());
        }
    }

    // Best-space tally per k, counting only images with every space present.
    // hcl reproduces luv exactly, so it never forms its own tally row.
    result.tally.ks = cfg.ks;
    for (const auto& name : canonical_space_order()) {
        if (name == "hcl") continue;
        for (const ColorSpace s : cfg.spaces) {
            if (colorspace_name(s) == name) {
                result.tally.spaces.push_back(name);
                result.tally.counts[name].assign(cfg.ks.size(), 0);
            }
        }
    }
    for (const auto& [stem, vifs] : vif_by_image) {
        (void)stem;
        for (std::size_t kx = 0; kx < cfg.ks.size(); ++kx) {
            const int k = cfg.ks[kx];
            std::string best;
            double best_vif = -1.0;
            bool complete = true;
            for (const auto& name : result.tally.spaces) {
                if (name == "hcl") continue;  // identical to luv by construction
                const auto it = vifs.find({parse_colorspace(name), k});
                if (it == vifs.end()) {
                    complete = false;
                    break;
                }
                if (it->second > best_vif) {
                    best_vif = it->second;
                    best = name;
                }
            }
            if (complete && !best.empty()) ++result.tally.counts[best][kx];
        }
    }

    // Rows in canonical order; quantized images land next to the CSVs.
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        CellOutcome& out = outcomes[ci];
        if (!out.ok) continue;
        result.rows.push_back(out.row);
        if (cfg.write_images) {
            const std::string name =
                out.row.image + "_" + out.row.space + "_k" + std::to_string(out.row.k) + ".png";
            try {
                encode_image(out.image, (std::filesystem::path(cfg.out_dir) / name).string());
            } catch (const std::exception& e) {
                result.failures.push_back(std::string("encode: ") + e.what());
            }
        }
    }

    write_results_csv((std::filesystem::path(cfg.out_dir) / "results.csv").string(),
                      result.rows);
    {
        const std::string path = (std::filesystem::path(cfg.out_dir) / "profiles.csv").string();
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw std::runtime_error(path + ": cannot open for writing");
        out << profiles_csv_header() << '\n';
        for (const auto& row : profile_rows) out << row << '\n';
    }
    {
        const std::string path = (std::filesystem::path(cfg.out_dir) / "tally.txt").string();
        std::ofstream out(path, std::ios::trunc);
        if (out) out << format_tally(result.tally);
    }
    return result;
}

}  // namespace cq
