#ifndef AVOL_SOLENOID_HPP
#define AVOL_SOLENOID_HPP

#include "avol/rational.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace avol {

// Discrete solenoid over an expanding torus endomorphism with contracted
// planar disk fibers: F(z, w) = (A z mod 1, lambda_c w + theta(z)).
struct SolenoidSpec {
    int torus_dim = 2;                          // k
    std::array<std::array<long, 2>, 2> matrix = {{{2, 0}, {0, 2}}};  // A, k x k
    Rational fiber_contraction = Rational(1, 32);                    // lambda_c
    // theta(z) = sum_i weight[i] * (cos 2 pi z_i, sin 2 pi z_i)
    std::vector<Rational> weights = {Rational(1, 4), Rational(1, 16)};

    long det() const;
    std::vector<std::string> validate(int separation_samples = 4096,
                                      std::uint64_t seed = 1) const;
};

std::array<double, 2> separation_map(const SolenoidSpec& spec,
                                     const std::array<double, 2>& z);

struct SolenoidPoint {
    std::array<double, 2> base{};   // z in [0,1)^k
    std::array<double, 2> fiber{};  // w in the unit disk
};

SolenoidPoint solenoid_step(const SolenoidSpec& spec, const SolenoidPoint& p);

struct SeparationReport {
    bool pass = false;
    double min_margin = 0;  // min over class pairs of |theta gap| - 2 lambda_c
    std::array<double, 2> witness_base{};
    std::size_t samples = 0;
};

// Disjointness of the |det A| branch images over sampled fibers: embedding
// requires the theta-separation of preimage classes to beat 2 lambda_c.
SeparationReport verify_injectivity(const SolenoidSpec& spec, std::size_t samples,
                                    std::uint64_t seed);

struct SliceCover {
    std::array<double, 2> base{};  // fiber basepoint z
    int level = 0;
    std::vector<std::array<double, 2>> centers;
    double radius = 0;            // lambda_c^level
    Rational area_over_pi;        // exact: count * lambda_c^(2 level)
    double max_inscribed_radius = 0;
    double min_center_gap = 0;    // +inf-like when a single disk
};

SliceCover slice_cover(const SolenoidSpec& spec, const std::array<double, 2>& z, int level,
                       std::size_t cap = std::size_t{1} << 24);

struct StarVerdict {
    std::array<double, 2> base{};
    bool no_disk = false;             // no stable-slice disk of radius >= threshold
    bool totally_disconnected = false;  // min center gap > 2 radius
    double radius = 0;
    double threshold = 0;
};

std::vector<StarVerdict> star_condition(const SolenoidSpec& spec,
                                        const std::vector<std::array<double, 2>>& fibers,
                                        int level, double disk_threshold,
                                        std::size_t cap = std::size_t{1} << 24);

}  // namespace avol

#endif
