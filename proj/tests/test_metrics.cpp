#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cq/metrics.hpp"
#include "helpers.hpp"

using namespace cq;
using namespace cqtest;

TEST_CASE("mse") {
    const PixelImage img = textured_image(32, 32, 21);
    CHECK(mse(img, img) == 0.0);

    PixelImage plus_one = img;
    for (auto& s : plus_one.samples) s = static_cast<std::uint8_t>(std::min(254, int(s)) + 1);
    PixelImage base = plus_one;
    for (auto& s : base.samples) s = static_cast<std::uint8_t>(s - 1);
    CHECK(mse(base, plus_one) == doctest::Approx(1.0).epsilon(1e-12));

    PixelImage board(16, 16), inverted(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            for (int c = 0; c < 3; ++c) {
                const bool on = (x + y) % 2 == 0;
                board.at(x, y, c) = on ? 255 : 0;
                inverted.at(x, y, c) = on ? 0 : 255;
            }
    CHECK(mse(board, inverted) == doctest::Approx(65025.0).epsilon(1e-12));

    CHECK_THROWS_AS(mse(img, board), std::invalid_argument);
}

TEST_CASE("psnr") {
    const PixelImage img = textured_image(32, 32, 22);
    CHECK(std::isinf(psnr(img, img)));
    CHECK(psnr_from_mse(65025.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(psnr_from_mse(65.025) == doctest::Approx(30.0).epsilon(1e-12));

    const PixelImage noisy = add_gaussian_noise(img, 5.0, 1);
    const double m = mse(img, noisy);
    CHECK(psnr(img, noisy) == doctest::Approx(10.0 * std::log10(65025.0 / m)).epsilon(1e-12));
}

TEST_CASE("logit transform") {
    CHECK(logit_vif(0.5) == 0.0);
    CHECK(logit_vif(0.7310585786300049) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(logit_vif(0.0), std::domain_error);
    CHECK_THROWS_AS(logit_vif(1.0), std::domain_error);
    CHECK_THROWS_AS(logit_vif(-0.2), std::domain_error);

    SeededRng rng(23);
    for (int i = 0; i < 100; ++i) {
        double a = 0.001 + 0.998 * rng.next_unit();
        double b = 0.001 + 0.998 * rng.next_unit();
        if (a > b) std::swap(a, b);
        if (a < b) CHECK(logit_vif(a) < logit_vif(b));
    }

    bool clamped = false;
    CHECK(clamp_for_logit(1.0, &clamped) == doctest::Approx(1.0 - 1e-9));
    CHECK(clamped);
    CHECK(clamp_for_logit(0.5, &clamped) == 0.5);
    CHECK_FALSE(clamped);
}

TEST_CASE("vif basics") {
    SUBCASE("identity scores 1 from 64x64 up") {
        for (int size : {64, 128, 200}) {
            const PixelImage img = textured_image(size, size, 24);
            CHECK(vif(img, img) == doctest::Approx(1.0).epsilon(1e-6));
        }
    }

    SUBCASE("flattening the image destroys nearly all information") {
        const PixelImage img = textured_image(128, 128, 25);
        const PixelImage flat = constant_image(128, 128, 128, 128, 128);
        CHECK(vif(img, flat) < 0.05);
    }

    SUBCASE("more noise, less fidelity") {
        const PixelImage img = textured_image(192, 192, 26);
        double prev = 1.1;
        for (double sigma : {2.0, 5.0, 10.0, 20.0}) {
            const double v = vif(img, add_gaussian_noise(img, sigma, 3));
            CHECK(v < prev);
            CHECK(v > 0.0);
            prev = v;
        }
    }

    SUBCASE("dimension and size guards") {
        const PixelImage a = textured_image(64, 64, 27);
        const PixelImage b = textured_image(32, 32, 27);
        CHECK_THROWS_AS(vif(a, b), std::invalid_argument);
        const PixelImage tiny = textured_image(8, 8, 27);
        CHECK_THROWS_WITH_AS(vif(tiny, tiny), doctest::Contains("11x11"),
                             std::invalid_argument);
    }
}

TEST_CASE("response matrix") {
    std::map<std::pair<ColorSpace, int>, double> vifs;
    const std::vector<int> ks = {8, 16};
    vifs[{ColorSpace::GammaRGB, 8}] = 0.500;
    vifs[{ColorSpace::XYZ, 8}] = 0.589;
    vifs[{ColorSpace::LUV, 8}] = 0.457;
    vifs[{ColorSpace::GammaRGB, 16}] = 0.607;
    vifs[{ColorSpace::XYZ, 16}] = 0.607;
    vifs[{ColorSpace::LUV, 16}] = 0.554;

    const ResponseMatrix m = response_matrix(vifs, ks);
    CHECK(m.y_xyz[0] == doctest::Approx(0.3600).epsilon(5e-4));
    CHECK(m.y_xyz[1] == 0.0);           // identical logits cancel
    CHECK(m.y_luv[0] < 0.0);            // below the baseline
    CHECK((m.y_xyz[0] > 0.0) == (vifs[{ColorSpace::XYZ, 8}] > vifs[{ColorSpace::GammaRGB, 8}]));

    vifs.erase({ColorSpace::LUV, 16});
    CHECK_THROWS_WITH_AS(response_matrix(vifs, ks), doctest::Contains("(luv, k=16)"),
                         std::invalid_argument);

    vifs[{ColorSpace::LUV, 16}] = 1.0;  // boundary values are rejected
    CHECK_THROWS_AS(response_matrix(vifs, ks), std::domain_error);
}

TEST_CASE("the best space is the same before and after the logit") {
    SeededRng rng(29);
    for (int t = 0; t < 200; ++t) {
        double best_raw = -1.0, best_logit = -1e30;
        int argmax_raw = -1, argmax_logit = -1;
        for (int s = 0; s < 3; ++s) {
            const double v = 0.01 + 0.98 * rng.next_unit();
            if (v > best_raw) {
                best_raw = v;
                argmax_raw = s;
            }
            const double l = logit_vif(v);
            if (l > best_logit) {
                best_logit = l;
                argmax_logit = s;
            }
        }
        CHECK(argmax_raw == argmax_logit);
    }
}
