#ifndef AVOL_CANTOR_HPP
#define AVOL_CANTOR_HPP

#include "avol/rational.hpp"
#include "avol/schedule.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace avol {

// Nested family of closed intervals at one construction level. Intervals are
// sorted, pairwise disjoint, with exact rational endpoints; measure is the
// exact total length prod_{k<depth}(1 - c_k) (times the root length).
struct IntervalCover {
    int depth = 0;
    Rational root_lo = Rational(-1, 2);
    Rational root_hi = Rational(1, 2);
    std::vector<Rational> lo, hi;
    std::vector<std::uint64_t> itinerary;  // branch word, one bit per level
    Rational measure;

    std::size_t size() const { return lo.size(); }
};

inline constexpr std::size_t kDefaultIntervalCap = std::size_t{1} << 26;

IntervalCover build_cover(const GapSchedule& schedule, int depth,
                          std::size_t cap = kDefaultIntervalCap);

// prod (1 - c_n) with certified relative error <= tol; exactly 0 when the
// gap sum diverges.
double limit_measure(const GapSchedule& schedule, double tol);

// The 2-to-1 expanding map defining the Cantor set: affine with slope
// 2/(1-c_n) on level-(n+1) bridges, monotone cubic across gaps, evaluated
// down to max_depth. Each branch fixes the outer endpoint and carries the
// level-(n+1) structure onto the level-n structure one symbol up.
struct CantorMapSpec {
    GapSchedule schedule;
    int max_depth = 30;

    Rational bridge_length(int level) const;  // l_n = P_n / 2^n
    Rational branch_a() const;                // right end of the left branch
    Rational branch_b() const;                // left end of the right branch

    std::vector<std::string> validate() const;
};

struct CantorEval {
    Rational value;
    Rational derivative;
    bool fully_resolved = true;  // false when the walk hit max_depth on a bridge
};

struct CantorEvalD {
    double value = 0, derivative = 0;
    bool fully_resolved = true;
};

CantorEval eval_map_exact(const CantorMapSpec& spec, const Rational& x);
CantorEvalD eval_map(const CantorMapSpec& spec, double x);

// Precomputed double-precision level data for orbit-heavy callers.
struct CantorMapCache {
    double a = 0, b = 0;
    std::vector<double> gap_fraction;  // c_0 .. c_{max_depth-1}
    int max_depth = 0;

    CantorMapCache() = default;
    explicit CantorMapCache(const CantorMapSpec& spec);
};
CantorEvalD eval_map(const CantorMapCache& cache, double x);

// Hoelder diagnostic for the derivative of the map across level-n gaps:
// per level, the exact sup of |phi'(x)-phi'(y)| / |x-y|^alpha over the gap's
// cubic (all level-n gaps are congruent). Constant schedules give 0 at every
// level; summable schedules with varying c_n blow up geometrically.
struct HoelderReport {
    double alpha = 0.5;
    int depth = 0;
    std::vector<double> per_level;    // level n = index + 1
    std::vector<double> running_max;  // nondecreasing
};

HoelderReport hoelder_modulus(const CantorMapSpec& spec, double alpha, int depth);

// Gap geometry shared with the Lorenz extension and the tests.
struct GapPiece {
    Rational x0, x1;  // gap in the domain
    Rational y0, y1;  // image gap
    Rational end_slope;
};
Rational cubic_value(const GapPiece& g, const Rational& x);
Rational cubic_derivative(const GapPiece& g, const Rational& x);
double cubic_value(double x0, double x1, double y0, double y1, double d, double x);
double cubic_derivative(double x0, double x1, double y0, double y1, double d, double x);

}  // namespace avol

#endif
