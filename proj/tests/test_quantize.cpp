#include <doctest.h>

#include <algorithm>
#include <set>
#include <stdexcept>

#include "cq/quantize.hpp"
#include "helpers.hpp"

using namespace cq;
using namespace cqtest;

namespace {

std::vector<double> random_points(std::size_t n, std::uint64_t seed) {
    SeededRng rng(seed);
    std::vector<double> pts(n * 3);
    for (auto& v : pts) v = rng.next_unit();
    return pts;
}

// {0,0.1,0.2,0.8,0.9,1.0} on all three components; the optimal 2-partition
// splits the halves with objective 3*(0.02+0.02) = 0.12.
PixelDataset six_point_instance() {
    std::vector<double> pts;
    for (double v : {0.0, 0.1, 0.2, 0.8, 0.9, 1.0}) {
        pts.push_back(v);
        pts.push_back(v);
        pts.push_back(v);
    }
    return dataset_from_points(std::move(pts));
}

}  // namespace

TEST_CASE("kmeanspp seeding") {
    SUBCASE("k=1 picks a data point") {
        const PixelDataset data = dataset_from_points(random_points(20, 1));
        SeededRng rng(99);
        const Palette p = kmeanspp_init(data, 1, rng);
        bool found = false;
        for (std::size_t i = 0; i < data.size(); ++i)
            if (std::equal(data.point(i), data.point(i) + 3, p.centroid(0))) found = true;
        CHECK(found);
    }

    SUBCASE("distance weighting forces the isolated point") {
        std::vector<double> pts;
        for (int i = 0; i < 99; ++i) {
            pts.push_back(0);
            pts.push_back(0);
            pts.push_back(0);
        }
        pts.push_back(1);
        pts.push_back(1);
        pts.push_back(1);
        const PixelDataset data = dataset_from_points(std::move(pts));
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            SeededRng rng(seed);
            const Palette p = kmeanspp_init(data, 2, rng);
            std::set<double> firsts = {p.centroid(0)[0], p.centroid(1)[0]};
            CHECK(firsts == std::set<double>{0.0, 1.0});
        }
    }

    SUBCASE("identical seeds give identical palettes") {
        const PixelDataset data = dataset_from_points(random_points(100, 2));
        SeededRng ref_rng(1234);
        const Palette ref = kmeanspp_init(data, 5, ref_rng);
        for (int rep = 0; rep < 10; ++rep) {
            SeededRng rng(1234);
            const Palette p = kmeanspp_init(data, 5, rng);
            CHECK(p.centroids == ref.centroids);
        }
    }

    SUBCASE("k beyond the distinct count errors with the count") {
        std::vector<double> pts;
        for (int i = 0; i < 50; ++i) {
            pts.push_back(0.5);
            pts.push_back(0.5);
            pts.push_back(0.5);
        }
        const PixelDataset data = dataset_from_points(std::move(pts));
        SeededRng rng(7);
        CHECK_THROWS_WITH_AS(kmeanspp_init(data, 2, rng),
                             doctest::Contains("distinct colors (1)"), std::invalid_argument);
    }
}

TEST_CASE("run_kmeans closed forms") {
    SUBCASE("k equal to n on distinct points gives zero objective") {
        const PixelDataset data = dataset_from_points(random_points(6, 3));
        KMeansConfig cfg;
        cfg.k = 6;
        cfg.restarts = 3;
        const KMeansResult r = run_kmeans(data, cfg);
        CHECK(r.wcss == doctest::Approx(0.0).epsilon(1e-12));
        std::set<std::uint32_t> used(r.assignment.labels.begin(), r.assignment.labels.end());
        CHECK(used.size() == 6);
    }

    SUBCASE("k=1 returns the component mean and total scatter") {
        const PixelDataset data = dataset_from_points(random_points(40, 4));
        KMeansConfig cfg;
        cfg.k = 1;
        const KMeansResult r = run_kmeans(data, cfg);
        double mean[3] = {0, 0, 0};
        for (std::size_t i = 0; i < data.size(); ++i)
            for (int c = 0; c < 3; ++c) mean[c] += data.points[3 * i + c];
        for (double& m : mean) m /= static_cast<double>(data.size());
        for (int c = 0; c < 3; ++c)
            CHECK(r.palette.centroid(0)[c] == doctest::Approx(mean[c]).epsilon(1e-12));
        double scatter = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i)
            for (int c = 0; c < 3; ++c) {
                const double d = data.points[3 * i + c] - mean[c];
                scatter += d * d;
            }
        CHECK(r.wcss == doctest::Approx(scatter).epsilon(1e-12));
    }

    SUBCASE("six point instance reaches the enumerated optimum") {
        const PixelDataset data = six_point_instance();
        KMeansConfig cfg;
        cfg.k = 2;
        cfg.restarts = 5;
        cfg.seed = 11;
        const KMeansResult r = run_kmeans(data, cfg);
        CHECK(r.wcss == doctest::Approx(0.12).epsilon(1e-9));
        CHECK(r.assignment.labels[0] == r.assignment.labels[1]);
        CHECK(r.assignment.labels[1] == r.assignment.labels[2]);
        CHECK(r.assignment.labels[3] == r.assignment.labels[4]);
        CHECK(r.assignment.labels[4] == r.assignment.labels[5]);
        CHECK(r.assignment.labels[0] != r.assignment.labels[3]);
        CHECK(brute_force_optimal_wcss(data.points, 2) == doctest::Approx(0.12).epsilon(1e-12));
    }
}

TEST_CASE("wcss operation") {
    const PixelDataset data = six_point_instance();
    Palette palette;
    palette.k = 2;
    palette.centroids = {0.1, 0.1, 0.1, 0.9, 0.9, 0.9};
    Assignment assignment;
    assignment.labels = {0, 0, 0, 1, 1, 1};
    assignment.counts = {3, 3};
    CHECK(wcss(data, palette, assignment) == doctest::Approx(0.12).epsilon(1e-12));

    SUBCASE("point on its centroid contributes nothing") {
        Palette p1;
        p1.k = 1;
        p1.centroids = {0.25, 0.5, 0.75};
        Assignment a1;
        a1.labels = {0};
        a1.counts = {1};
        PixelDataset single = dataset_from_points({0.25, 0.5, 0.75});
        CHECK(wcss(single, p1, a1) == 0.0);
        single.points = {0.75, 0.5, 0.25};
        const double expect = 0.5 * 0.5 + 0.0 + 0.5 * 0.5;
        CHECK(wcss(single, p1, a1) == doctest::Approx(expect).epsilon(1e-15));
    }

    SUBCASE("label out of range throws") {
        Assignment bad;
        bad.labels = {0, 0, 0, 1, 1, 2};
        bad.counts = {3, 2, 1};
        CHECK_THROWS_AS(wcss(data, palette, bad), std::invalid_argument);
    }
}

TEST_CASE("best-of-restarts matches exhaustive enumeration on small instances") {
    int hits = 0;
    const int instances = 30;
    for (int t = 0; t < instances; ++t) {
        SeededRng rng(mix_seed(500, t));
        const std::size_t n = 4 + rng.next_index(7);  // 4..10
        const int k = 1 + static_cast<int>(rng.next_index(3));
        const PixelDataset data = dataset_from_points(random_points(n, mix_seed(501, t)));
        KMeansConfig cfg;
        cfg.k = std::min<int>(k, static_cast<int>(n));
        cfg.restarts = 20;
        cfg.seed = mix_seed(502, t);
        const KMeansResult r = run_kmeans(data, cfg);
        const double optimum = brute_force_optimal_wcss(data.points, cfg.k);
        CHECK(r.wcss >= optimum - 1e-12 * (1.0 + optimum));
        if (r.wcss <= optimum + 1e-9 * (1.0 + optimum)) ++hits;
    }
    CHECK(hits >= instances * 9 / 10);
}

TEST_CASE("returned solutions are single-move optimal") {
    for (int t = 0; t < 6; ++t) {
        SeededRng rng(mix_seed(600, t));
        const std::size_t n = 50 + rng.next_index(151);  // 50..200
        const int k = 2 + static_cast<int>(rng.next_index(7));
        const PixelDataset data = dataset_from_points(random_points(n, mix_seed(601, t)));
        KMeansConfig cfg;
        cfg.k = k;
        cfg.restarts = 2;
        cfg.seed = mix_seed(602, t);
        const KMeansResult r = run_kmeans(data, cfg);
        const double worst = worst_single_move_delta(data, r.assignment, k);
        CHECK(worst >= -1e-12 * (1.0 + r.wcss));
    }
}

TEST_CASE("objective is non-increasing over the refinement") {
    for (int t = 0; t < 4; ++t) {
        const PixelDataset data =
            dataset_from_points(random_points(400, mix_seed(700, t)));
        KMeansConfig cfg;
        cfg.k = 8;
        cfg.restarts = 1;
        cfg.seed = t;
        const KMeansResult r = run_kmeans(data, cfg);
        for (std::size_t i = 1; i < r.wcss_history.size(); ++i)
            CHECK(r.wcss_history[i] <= r.wcss_history[i - 1] * (1.0 + 1e-12) + 1e-15);
    }
}

TEST_CASE("identical configuration reproduces bit-identical results") {
    const PixelDataset data = dataset_from_points(random_points(300, 42));
    KMeansConfig cfg;
    cfg.k = 7;
    cfg.restarts = 4;
    cfg.seed = 777;
    const KMeansResult a = run_kmeans(data, cfg);
    const KMeansResult b = run_kmeans(data, cfg);
    CHECK(a.palette.centroids == b.palette.centroids);
    CHECK(a.assignment.labels == b.assignment.labels);
    CHECK(a.wcss == b.wcss);
    CHECK(a.best_restart == b.best_restart);
}

TEST_CASE("no empty clusters, including repaired seeds") {
    SUBCASE("off-data centroid gets reseeded") {
        const PixelDataset data = dataset_from_points(random_points(60, 8));
        // Third centroid far outside the unit cube attracts nothing at first.
        std::vector<double> seeds = {0.1, 0.1, 0.1, 0.9, 0.9, 0.9, 10.0, 10.0, 10.0};
        const KMeansResult r = run_kmeans_from_centroids(data, seeds);
        std::set<std::uint32_t> used(r.assignment.labels.begin(), r.assignment.labels.end());
        CHECK(used.size() == 3);
        for (std::uint64_t c : r.assignment.counts) CHECK(c > 0);
    }

    SUBCASE("every cluster index appears after a normal run") {
        const PixelDataset data = dataset_from_points(random_points(120, 9));
        KMeansConfig cfg;
        cfg.k = 10;
        cfg.restarts = 2;
        const KMeansResult r = run_kmeans(data, cfg);
        std::set<std::uint32_t> used(r.assignment.labels.begin(), r.assignment.labels.end());
        CHECK(used.size() == 10);
    }
}

TEST_CASE("input validation") {
    PixelDataset data = dataset_from_points(random_points(10, 10));
    KMeansConfig cfg;
    cfg.k = 11;
    CHECK_THROWS_AS(run_kmeans(data, cfg), std::invalid_argument);
    cfg.k = 2;
    data.points[4] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(run_kmeans(data, cfg), std::invalid_argument);
    data.points.clear();
    CHECK_THROWS_AS(run_kmeans(data, cfg), std::invalid_argument);
}

TEST_CASE("reconstruct") {
    SUBCASE("k=1 on a constant image is the identity") {
        const PixelImage img = constant_image(8, 8, 120, 64, 200);
        const std::vector<double> triples = image_to_triples(img, ColorSpace::GammaRGB);
        PixelDataset data = dataset_from_points(triples);
        KMeansConfig cfg;
        cfg.k = 1;
        const KMeansResult r = run_kmeans(data, cfg);
        std::uint64_t clamped = 9;
        const PixelImage out = reconstruct(8, 8, r.assignment, r.palette, &clamped);
        CHECK(out.samples == img.samples);
        CHECK(clamped == 0);
    }

    SUBCASE("k distinct colors reproduce the image exactly") {
        const PixelImage img = four_color_image();
        CHECK(distinct_color_count(img) == 4);
        PixelDataset data = dataset_from_points(image_to_triples(img, ColorSpace::GammaRGB));
        KMeansConfig cfg;
        cfg.k = 4;
        cfg.restarts = 4;
        const KMeansResult r = run_kmeans(data, cfg);
        CHECK(r.wcss == doctest::Approx(0.0).epsilon(1e-12));
        const PixelImage out = reconstruct(img.width, img.height, r.assignment, r.palette);
        CHECK(out.samples == img.samples);
    }

    SUBCASE("distinct colors never exceed k") {
        const PixelImage img = textured_image(32, 32, 5);
        PixelDataset data = dataset_from_points(image_to_triples(img, ColorSpace::GammaRGB));
        KMeansConfig cfg;
        cfg.k = 5;
        cfg.restarts = 2;
        const KMeansResult r = run_kmeans(data, cfg);
        const PixelImage out = reconstruct(img.width, img.height, r.assignment, r.palette);
        CHECK(distinct_color_count(out) <= 5);
    }
}

TEST_CASE("duplicate-heavy datasets") {
    SUBCASE("posterized data with k below the distinct count") {
        // 6 distinct values, heavily repeated.
        SeededRng rng(901);
        std::vector<double> pts;
        const double levels[6] = {0.05, 0.2, 0.4, 0.6, 0.8, 0.95};
        for (int i = 0; i < 300; ++i) {
            const double v = levels[rng.next_index(6)];
            pts.push_back(v);
            pts.push_back(v);
            pts.push_back(v);
        }
        const PixelDataset data = dataset_from_points(std::move(pts));
        KMeansConfig cfg;
        cfg.k = 5;
        cfg.restarts = 4;
        cfg.seed = 31;
        const KMeansResult r = run_kmeans(data, cfg);
        CHECK(worst_single_move_delta(data, r.assignment, 5) >= -1e-12 * (1.0 + r.wcss));
        for (std::uint64_t c : r.assignment.counts) CHECK(c > 0);
    }

    SUBCASE("k equal to the distinct count collapses the objective to zero") {
        std::vector<double> pts;
        const double levels[3] = {0.1, 0.5, 0.9};
        for (int i = 0; i < 90; ++i) {
            const double v = levels[i % 3];
            pts.push_back(v);
            pts.push_back(v);
            pts.push_back(v);
        }
        const PixelDataset data = dataset_from_points(std::move(pts));
        KMeansConfig cfg;
        cfg.k = 3;
        cfg.restarts = 2;
        const KMeansResult r = run_kmeans(data, cfg);
        CHECK(r.wcss == doctest::Approx(0.0).epsilon(1e-15));
    }

    SUBCASE("two-point dataset, k=2") {
        const PixelDataset data = dataset_from_points({0.1, 0.1, 0.1, 0.9, 0.9, 0.9});
        KMeansConfig cfg;
        cfg.k = 2;
        const KMeansResult r = run_kmeans(data, cfg);
        CHECK(r.wcss == 0.0);
        CHECK(r.assignment.labels[0] != r.assignment.labels[1]);
    }
}
