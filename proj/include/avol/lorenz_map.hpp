#ifndef AVOL_LORENZ_MAP_HPP
#define AVOL_LORENZ_MAP_HPP

#include "avol/cantor.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace avol {

// One-dimensional Lorenz-like maps on [-3/4,3/4] \ {0}: two increasing
// branches, one-sided limits -+3/4 at 0, derivative blowing up there.

struct PowerLawParams {
    double rho = 0.75;  // branch exponent in (0,1)
    double beta = 1.8;  // scale
};

// C^1 surrogate of the positive-measure construction: the cantor map on its
// branch domains, a sqrt cap producing the +-3/4 limits and the infinite
// derivative at 0, and cubic connectors to the interval boundary.
struct CantorExtensionParams {
    CantorMapSpec cantor;
    double edge_value = 0.7;       // |f(-+3/4)|
    double sqrt_join_x = 0.05;     // sqrt piece starts at |x| = this
    double sqrt_join_value = 0.7;  // f(-sqrt_join_x) on the left branch
    double collar_outer_slope = 0.3;
};

struct LorenzMapSpec {
    std::variant<PowerLawParams, CantorExtensionParams> params = PowerLawParams{};
    double singular_floor = 1e-300;  // |x| below this counts as a singular hit

    bool is_power_law() const { return std::holds_alternative<PowerLawParams>(params); }
};

struct LorenzEval {
    double value = 0;
    double derivative = 0;
    bool fully_resolved = true;
};

// Evaluation-ready form of the spec (caches the cantor level data).
class LorenzMap {
  public:
    explicit LorenzMap(const LorenzMapSpec& spec);

    const LorenzMapSpec& spec() const { return spec_; }
    LorenzEval eval(double x) const;  // throws domain_error off the interval / at 0
    double value(double x) const { return eval(x).value; }
    double derivative(double x) const { return eval(x).derivative; }

    // one-step inverse of the branch with the given sign; nullopt when y is
    // outside that branch's image
    std::optional<double> inverse(int branch_sign, double y) const;

    bool singular(double x) const;

  private:
    LorenzMapSpec spec_;
    CantorMapCache cache_;  // cantor variant only
    double cantor_a_ = 0, cantor_b_ = 0;
    double limit_slope_ = 2.0;  // 2/(1-c_inf)
    double sqrt_q_ = 0;

    LorenzEval eval_left(double x) const;  // x in [-3/4, 0)
};

struct PropertyCheck {
    std::string name;
    bool pass = false;
    std::string witness;
};

struct PropertyReport {
    std::vector<PropertyCheck> checks;
    bool all_pass() const;
    double min_derivative = 0;   // power-law: closed-form branch floor
    double boundary_image = 0;   // f(3/4)
};

// The four Lorenz-like properties plus the sqrt(2) expansion floor
// (power-law variant only).
PropertyReport validate_properties(const LorenzMapSpec& spec);

// Nested covers of the invariant core in [-3/4,3/4]:
//  - cantor extension: depth 0 is the whole interval, depth n >= 1 the exact
//    level-n bridge cover of the Cantor set (the nonwandering core).
//  - power law: closures of the components left after removing singular
//    preimages of order <= depth (the attractor is the full interval).
IntervalCover invariant_cover(const LorenzMapSpec& spec, int depth,
                              std::size_t cap = kDefaultIntervalCap);

// Pulls `target` back through f^n along the branch-sign itinerary; the result
// maps diffeomorphically onto target. Throws contract_error naming the step
// when the itinerary is inconsistent.
struct Interval {
    double lo = 0, hi = 0;
    double length() const { return hi - lo; }
};
Interval inverse_branch(const LorenzMapSpec& spec, const std::vector<int>& itinerary,
                        Interval target);

struct DistortionReport {
    int iterates = 0;
    double distortion = 1.0;  // sup pair ratio of |(f^n)'| over one pre-ball
    std::vector<int> itinerary;
    double ball_center = 0;
    double ball_radius = 0;
};

// Max over ball centers and admissible length-n itineraries of the ratio of
// n-step derivatives across the pulled-back ball. Exhaustive for n <= 15.
DistortionReport distortion(const LorenzMapSpec& spec, int n, double radius);
std::vector<DistortionReport> distortion_table(const LorenzMapSpec& spec, int n_max,
                                               double radius);

}  // namespace avol

#endif
