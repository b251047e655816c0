#include "cq/quantize.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "cq/numeric.hpp"
#include "cq/parallel.hpp"

namespace cq {

namespace {

inline double dist2(const double* a, const double* b) {
    const double d0 = a[0] - b[0];
    const double d1 = a[1] - b[1];
    const double d2 = a[2] - b[2];
    return d0 * d0 + d1 * d1 + d2 * d2;
}

/*
 * Transfer bookkeeping. The refinement interleaves two stages:
 *
 *  - optimal transfer: one pass over the points; each point is checked
 *    against candidate clusters and moved wherever the objective drops the
 *    most, with the gain/loss terms n/(n+1)*d^2 and n/(n-1)*d^2 accounting
 *    for the centroid shift the move itself causes;
 *  - quick transfer: repeated cheap sweeps that only reconsider each point's
 *    current cluster against its recorded best alternative.
 *
 * Most of the speed comes from skipping comparisons that provably cannot
 * change anything: a cluster untouched since a point last looked at it cannot
 * have become a better (or worse) destination. UpdateStamp records, per
 * cluster, when it last changed, on a timeline made of quick-sweep indices
 * (0, 1, ...) plus two synthetic epochs for "during the current optimal
 * pass" and "during the previous cycle". A cluster is live for observation
 * `obs` of an optimal pass if it changed at or after that observation in the
 * previous cycle.
 *
 * Whatever this machinery skips, the final verification pass in refine()
 * re-checks exhaustively against freshly recomputed centroids, so the
 * returned solution is always single-point-transfer optimal.
 */
class UpdateStamp {
    static constexpr int kAncient = -3;
    static constexpr int kPreviousOptimal = -2;
    static constexpr int kCurrentOptimal = -1;

    int iter_ = kAncient;
    std::int64_t obs_ = 0;

public:
    void note_optimal(std::int64_t obs) {
        iter_ = kCurrentOptimal;
        obs_ = obs;
    }

    void note_quick(int iter, std::int64_t obs) {
        iter_ = iter;
        obs_ = obs;
    }

    // Called between cycles; quick-stage changes count as live for the whole
    // next optimal pass.
    void next_cycle(std::int64_t nobs) {
        if (iter_ >= 0) {
            iter_ = kPreviousOptimal;
            obs_ = nobs;
        } else if (iter_ == kCurrentOptimal) {
            iter_ = kPreviousOptimal;
        } else {
            iter_ = kAncient;
        }
    }

    bool changed_after(int iter, std::int64_t obs) const {
        return iter_ == iter ? obs_ > obs : iter_ > iter;
    }

    bool changed_at_or_after(int iter, std::int64_t obs) const {
        return iter_ == iter ? obs_ >= obs : iter_ > iter;
    }

    bool live(std::int64_t obs) const { return changed_after(kPreviousOptimal, obs); }
};

constexpr double kSingletonLoss = std::numeric_limits<double>::infinity();
constexpr int kMaxQuickSweeps = 50;

class Refiner {
public:
    Refiner(const PixelDataset& data, std::vector<double> centroids, int max_iterations)
        : pts_(data.points.data()),
          n_(data.size()),
          k_(static_cast<int>(centroids.size() / 3)),
          max_iterations_(max_iterations),
          centroids_(std::move(centroids)),
          counts_(k_, 0),
          labels_(n_, 0),
          alt_(n_, 0),
          loss_mult_(k_, kSingletonLoss),
          gain_mult_(k_, 0.0),
          removal_loss_(n_, 0.0),
          stamps_(k_) {}

    void run() {
        assign_initial();
        repair_empty_clusters();
        recompute_centroids();
        refresh_multipliers();
        wcss_history_.push_back(current_wcss());

        if (k_ > 1) {
            for (cycles_ = 0; cycles_ < max_iterations_; ++cycles_) {
                const bool settled = optimal_transfer(cycles_ == 0);
                if (settled) break;
                quick_transfer();
                recompute_centroids();
                for (auto& s : stamps_) s.next_cycle(static_cast<std::int64_t>(n_));
                wcss_history_.push_back(current_wcss());
                assert_monotone();
            }
            verify_local_optimality();
        }

        wcss_history_.push_back(current_wcss());
        assert_monotone();
    }

    std::vector<double> take_centroids() { return std::move(centroids_); }
    std::vector<std::uint32_t> take_labels() { return std::move(labels_); }
    std::vector<std::uint64_t> take_counts() { return std::move(counts_); }
    std::vector<double> take_wcss_history() { return std::move(wcss_history_); }
    int cycles() const { return cycles_; }

private:
    const double* point(std::size_t i) const { return pts_ + 3 * i; }
    double* centroid(int j) { return centroids_.data() + 3 * j; }
    const double* centroid(int j) const { return centroids_.data() + 3 * j; }

    void assign_initial() {
        for (std::size_t i = 0; i < n_; ++i) {
            int best = 0, second = -1;
            double best_d = std::numeric_limits<double>::infinity();
            double second_d = std::numeric_limits<double>::infinity();
            for (int j = 0; j < k_; ++j) {
                const double d = dist2(point(i), centroid(j));
                if (d < best_d) {
                    second = best;
                    second_d = best_d;
                    best = j;
                    best_d = d;
                } else if (d < second_d) {
                    second = j;
                    second_d = d;
                }
            }
            labels_[i] = static_cast<std::uint32_t>(best);
            alt_[i] = static_cast<std::uint32_t>(k_ > 1 ? second : best);
        }
        std::fill(counts_.begin(), counts_.end(), 0);
        for (std::size_t i = 0; i < n_; ++i) ++counts_[labels_[i]];
    }

    // Only reachable from caller-supplied centroids: D^2 seeding always picks
    // distinct data points, and each keeps at least its own source point.
    void repair_empty_clusters() {
        for (int c = 0; c < k_; ++c) {
            if (counts_[c] != 0) continue;
            std::size_t farthest = n_;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n_; ++i) {
                if (counts_[labels_[i]] < 2) continue;  // do not empty another cluster
                const double d = dist2(point(i), centroid(c));
                if (d > far_d) {
                    far_d = d;
                    farthest = i;
                }
            }
            if (farthest == n_)
                throw std::runtime_error("k-means: cannot repair empty cluster");
            --counts_[labels_[farthest]];
            alt_[farthest] = labels_[farthest];
            labels_[farthest] = static_cast<std::uint32_t>(c);
            ++counts_[c];
            for (int d = 0; d < 3; ++d) centroid(c)[d] = point(farthest)[d];
        }
    }

    void recompute_centroids() {
        std::fill(centroids_.begin(), centroids_.end(), 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            double* c = centroid(static_cast<int>(labels_[i]));
            const double* p = point(i);
            c[0] += p[0];
            c[1] += p[1];
            c[2] += p[2];
        }
        for (int j = 0; j < k_; ++j) {
            if (counts_[j] == 0) continue;
            const double inv = 1.0 / static_cast<double>(counts_[j]);
            centroid(j)[0] *= inv;
            centroid(j)[1] *= inv;
            centroid(j)[2] *= inv;
        }
    }

    void refresh_multipliers() {
        for (int j = 0; j < k_; ++j) {
            const double nc = static_cast<double>(counts_[j]);
            gain_mult_[j] = nc / (nc + 1.0);
            loss_mult_[j] = counts_[j] > 1 ? nc / (nc - 1.0) : kSingletonLoss;
        }
    }

    // Every transfer strictly lowers the objective and recomputing means
    // cannot raise it; the guard term absorbs accumulation noise.
    void assert_monotone() const {
        assert(wcss_history_.size() < 2 ||
               wcss_history_.back() <=
                   wcss_history_[wcss_history_.size() - 2] * (1.0 + 1e-12) + 1e-15);
    }

    double current_wcss() const {
        NeumaierSum total;
        for (std::size_t i = 0; i < n_; ++i)
            total.add(dist2(point(i), centroid(static_cast<int>(labels_[i]))));
        return total.value();
    }

    // Moves point i from cluster a to cluster b, sliding both centroids.
    void transfer(std::size_t i, int a, int b) {
        const double na = static_cast<double>(counts_[a]);
        const double nb = static_cast<double>(counts_[b]);
        double* ca = centroid(a);
        double* cb = centroid(b);
        const double* p = point(i);
        for (int d = 0; d < 3; ++d) {
            ca[d] = (ca[d] * na - p[d]) / (na - 1.0);
            cb[d] = (cb[d] * nb + p[d]) / (nb + 1.0);
        }
        --counts_[a];
        ++counts_[b];
        gain_mult_[a] = (na - 1.0) / na;
        loss_mult_[a] = counts_[a] > 1 ? (na - 1.0) / (na - 2.0) : kSingletonLoss;
        loss_mult_[b] = (nb + 1.0) / nb;
        gain_mult_[b] = (nb + 1.0) / (nb + 2.0);
        labels_[i] = static_cast<std::uint32_t>(b);
        alt_[i] = static_cast<std::uint32_t>(a);
    }

    // One pass; returns true once n consecutive points saw no transfer.
    bool optimal_transfer(bool all_live) {
        for (std::size_t i = 0; i < n_; ++i) {
            ++steps_since_transfer_;
            const int a = static_cast<int>(labels_[i]);
            if (counts_[a] != 1) {
                const double* p = point(i);
                // Fresh loss every visit; cached values drift across quick sweeps.
                const double loss = dist2(p, centroid(a)) * loss_mult_[a];
                removal_loss_[i] = loss;

                int b = static_cast<int>(alt_[i]);
                const int first_candidate = b;
                double gain = dist2(p, centroid(b)) * gain_mult_[b];
                auto consider = [&](int j) {
                    const double g = dist2(p, centroid(j)) * gain_mult_[j];
                    if (g < gain) {
                        gain = g;
                        b = j;
                    }
                };
                if (all_live || stamps_[a].live(static_cast<std::int64_t>(i))) {
                    for (int j = 0; j < k_; ++j)
                        if (j != a && j != first_candidate) consider(j);
                } else {
                    for (int j = 0; j < k_; ++j)
                        if (j != a && j != first_candidate &&
                            stamps_[j].live(static_cast<std::int64_t>(i)))
                            consider(j);
                }

                if (gain < loss) {
                    steps_since_transfer_ = 0;
                    stamps_[a].note_optimal(static_cast<std::int64_t>(i));
                    stamps_[b].note_optimal(static_cast<std::int64_t>(i));
                    transfer(i, a, b);
                } else {
                    alt_[i] = static_cast<std::uint32_t>(b);
                }
            }
            if (steps_since_transfer_ == n_) return true;
        }
        return false;
    }

    void quick_transfer() {
        std::size_t quiet_steps = 0;
        bool any = false;
        for (int sweep = 0; sweep < kMaxQuickSweeps; ++sweep) {
            const int prev = sweep - 1;
            for (std::size_t i = 0; i < n_; ++i) {
                ++quiet_steps;
                const int a = static_cast<int>(labels_[i]);
                if (counts_[a] != 1) {
                    const std::int64_t obs = static_cast<std::int64_t>(i);
                    const double* p = point(i);
                    if (stamps_[a].changed_at_or_after(prev, obs))
                        removal_loss_[i] = dist2(p, centroid(a)) * loss_mult_[a];
                    const int b = static_cast<int>(alt_[i]);
                    if (stamps_[a].changed_after(prev, obs) ||
                        stamps_[b].changed_after(prev, obs)) {
                        const double gain = dist2(p, centroid(b)) * gain_mult_[b];
                        if (gain < removal_loss_[i]) {
                            any = true;
                            quiet_steps = 0;
                            stamps_[a].note_quick(sweep, obs);
                            stamps_[b].note_quick(sweep, obs);
                            transfer(i, a, b);
                        }
                    }
                }
                if (quiet_steps == n_) {
                    if (any) steps_since_transfer_ = 0;
                    return;
                }
            }
        }
        // Sweep cap reached; the next optimal pass (and the final
        // verification) picks up whatever is left.
        if (any) steps_since_transfer_ = 0;
    }

    // Exhaustive passes against exactly recomputed centroids until no
    // single-point move improves the objective.
    void verify_local_optimality() {
        for (int round = 0; round < 500; ++round) {
            recompute_centroids();
            refresh_multipliers();
            bool moved = false;
            for (std::size_t i = 0; i < n_; ++i) {
                const int a = static_cast<int>(labels_[i]);
                if (counts_[a] == 1) continue;
                const double* p = point(i);
                const double loss = dist2(p, centroid(a)) * loss_mult_[a];
                int b = -1;
                double gain = loss;
                for (int j = 0; j < k_; ++j) {
                    if (j == a) continue;
                    const double g = dist2(p, centroid(j)) * gain_mult_[j];
                    if (g < gain) {
                        gain = g;
                        b = j;
                    }
                }
                if (b >= 0) {
                    transfer(i, a, b);
                    moved = true;
                }
            }
            if (!moved) return;
        }
    }

    const double* pts_;
    std::size_t n_;
    int k_;
    int max_iterations_;
    int cycles_ = 0;
    std::vector<double> centroids_;
    std::vector<std::uint64_t> counts_;
    std::vector<std::uint32_t> labels_;
    std::vector<std::uint32_t> alt_;
    std::vector<double> loss_mult_;
    std::vector<double> gain_mult_;
    std::vector<double> removal_loss_;
    std::vector<UpdateStamp> stamps_;
    std::vector<double> wcss_history_;
    std::size_t steps_since_transfer_ = 0;
};

void validate_dataset(const PixelDataset& data) {
    if (data.size() == 0) throw std::invalid_argument("k-means: empty dataset");
    for (double v : data.points)
        if (!std::isfinite(v)) throw std::invalid_argument("k-means: non-finite component");
}

KMeansResult finish(const PixelDataset& data, Refiner&& refiner, int k) {
    KMeansResult result;
    result.iterations = refiner.cycles();
    result.wcss_history = refiner.take_wcss_history();

    result.palette.k = k;
    result.palette.space = data.space;
    result.palette.norm = data.norm;
    result.palette.centroids = refiner.take_centroids();
    for (double& v : result.palette.centroids) v = std::clamp(v, 0.0, 1.0);

    result.assignment.labels = refiner.take_labels();
    result.assignment.counts = refiner.take_counts();
    result.wcss = wcss(data, result.palette, result.assignment);
    return result;
}

}  // namespace

Palette kmeanspp_init(const PixelDataset& data, int k, SeededRng& rng) {
    const std::size_t n = data.size();
    if (k < 1) throw std::invalid_argument("kmeanspp_init: k must be positive");
    if (static_cast<std::size_t>(k) > n)
        throw std::invalid_argument("kmeanspp_init: k exceeds the number of points");

    Palette palette;
    palette.k = k;
    palette.space = data.space;
    palette.norm = data.norm;
    palette.centroids.reserve(3 * static_cast<std::size_t>(k));

    const std::size_t first = rng.next_index(n);
    palette.centroids.insert(palette.centroids.end(), data.point(first), data.point(first) + 3);

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = dist2(data.point(i), data.point(first));

    for (int chosen = 1; chosen < k; ++chosen) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += d2[i];
        if (!(total > 0.0)) {
            char buf[128];
            std::snprintf(buf, sizeof(buf),
                          "kmeanspp_init: k=%d exceeds the number of distinct colors (%d)", k,
                          chosen);
            throw std::invalid_argument(buf);
        }
        const double u = rng.next_unit() * total;
        double cum = 0.0;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            cum += d2[i];
            if (u < cum) {
                pick = i;
                break;
            }
        }
        if (pick == n) {  // fp guard: u landed on the upper boundary
            for (std::size_t i = n; i-- > 0;) {
                if (d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        const double* p = data.point(pick);
        palette.centroids.insert(palette.centroids.end(), p, p + 3);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], dist2(data.point(i), p));
    }
    return palette;
}

KMeansResult run_kmeans(const PixelDataset& data, const KMeansConfig& cfg) {
    validate_dataset(data);
    if (cfg.k < 1 || static_cast<std::size_t>(cfg.k) > data.size())
        throw std::invalid_argument("run_kmeans: k must be in [1, n]");
    if (cfg.restarts < 1) throw std::invalid_argument("run_kmeans: restarts must be >= 1");
    if (cfg.max_iterations < 1)
        throw std::invalid_argument("run_kmeans: max_iterations must be >= 1");

    struct RestartOutcome {
        KMeansResult result;
        std::exception_ptr error;
    };
    std::vector<RestartOutcome> outcomes(cfg.restarts);

    parallel_for(static_cast<std::size_t>(cfg.restarts), [&](std::size_t r) {
        try {
            SeededRng rng(mix_seed(cfg.seed, r));
            Palette seed_palette = kmeanspp_init(data, cfg.k, rng);
            Refiner refiner(data, std::move(seed_palette.centroids), cfg.max_iterations);
            refiner.run();
            outcomes[r].result = finish(data, std::move(refiner), cfg.k);
        } catch (...) {
            outcomes[r].error = std::current_exception();
        }
    });

    int best = -1;
    for (int r = 0; r < cfg.restarts; ++r) {
        if (outcomes[r].error) std::rethrow_exception(outcomes[r].error);
        if (best < 0 || outcomes[r].result.wcss < outcomes[best].result.wcss) best = r;
    }
    KMeansResult result = std::move(outcomes[best].result);
    result.best_restart = best;
    return result;
}

KMeansResult run_kmeans_from_centroids(const PixelDataset& data, std::vector<double> centroids,
                                       int max_iterations) {
    validate_dataset(data);
    if (centroids.empty() || centroids.size() % 3 != 0)
        throw std::invalid_argument("run_kmeans_from_centroids: centroids must be k x 3");
    const int k = static_cast<int>(centroids.size() / 3);
    if (static_cast<std::size_t>(k) > data.size())
        throw std::invalid_argument("run_kmeans_from_centroids: k must be in [1, n]");
    Refiner refiner(data, std::move(centroids), max_iterations);
    refiner.run();
    return finish(data, std::move(refiner), k);
}

double wcss(const PixelDataset& data, const Palette& palette, const Assignment& assignment) {
    const std::size_t n = data.size();
    if (assignment.labels.size() != n)
        throw std::invalid_argument("wcss: label count does not match dataset");
    if (palette.centroids.size() != static_cast<std::size_t>(palette.k) * 3)
        throw std::invalid_argument("wcss: palette shape mismatch");
    NeumaierSum total;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t label = assignment.labels[i];
        if (label >= static_cast<std::uint32_t>(palette.k))
            throw std::invalid_argument("wcss: label out of range");
        total.add(dist2(data.point(i), palette.centroid(static_cast<int>(label))));
    }
    return total.value();
}

PixelImage reconstruct(int width, int height, const Assignment& assignment,
                       const Palette& palette, std::uint64_t* clamped_pixels) {
    PixelImage img(width, height);
    if (assignment.labels.size() != img.pixel_count())
        throw std::invalid_argument("reconstruct: assignment does not cover all pixels");

    // Centroids leave normalized space once, then pixels just copy bytes.
    std::vector<Rgb8> palette8(palette.k);
    std::vector<double> denorm = palette.centroids;
    denormalize_components(denorm, palette.norm);
    for (int j = 0; j < palette.k; ++j) {
        ColorTriple t{denorm[3 * j], denorm[3 * j + 1], denorm[3 * j + 2], palette.space};
        palette8[j] = triple_to_rgb8(t);
    }

    std::uint64_t clamped = 0;
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const Rgb8& c = palette8[assignment.labels[i]];
        img.samples[3 * i] = c.r;
        img.samples[3 * i + 1] = c.g;
        img.samples[3 * i + 2] = c.b;
        if (c.clamped) ++clamped;
    }
    if (clamped_pixels) *clamped_pixels = clamped;
    return img;
}

}  // namespace cq
