#pragma once

#include <cmath>
#include <numbers>

namespace cq {

/// Neumaier-compensated accumulator. Summations over whole images run through
/// this in a fixed serial order so results are reproducible bit-for-bit.
struct NeumaierSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }

    double value() const { return sum + comp; }
};

inline double deg_to_rad(double deg) { return deg * (std::numbers::pi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / std::numbers::pi); }

/// Reduces an angle to [0, 360). Values within half an ulp of 360 collapse to 0.
inline double normalize_degrees(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    if (r >= 360.0) r = 0.0;
    return r;
}

/// Reduces an angle difference to (-180, 180].
inline double signed_degrees(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r <= -180.0) r += 360.0;
    if (r > 180.0) r -= 360.0;
    return r;
}

/// Shortest arc between two directions, in [0, 180].
inline double circular_distance_degrees(double a, double b) {
    return std::abs(signed_degrees(a - b));
}

}  // namespace cq
