#ifndef AVOL_SCHEDULE_HPP
#define AVOL_SCHEDULE_HPP

#include "avol/rational.hpp"

#include <string>
#include <vector>

namespace avol {

// Per-level middle-gap fractions c_n of a nested Cantor construction.
// The limit set has measure prod (1 - c_n): zero for constant schedules,
// positive whenever sum c_n converges.
struct GapSchedule {
    enum class Kind { Constant, InverseSquare, Explicit };
    enum class TailRule { Unspecified, RepeatLast, InverseSquareFormula };

    Kind kind = Kind::Constant;
    Rational constant_value = Rational(1, 3);
    std::vector<Rational> entries;          // Explicit only
    TailRule tail = TailRule::Unspecified;  // Explicit only

    static GapSchedule constant(const Rational& c);
    static GapSchedule inverse_square();  // c_n = 1/(2(n+1)^2)
    static GapSchedule explicit_list(std::vector<Rational> cs, TailRule tail);

    Rational gap_fraction(std::size_t n) const;  // c_n

    // prod_{k<n} (1 - c_k), exact
    Rational partial_product(std::size_t n) const;

    // constraint violations; empty means valid
    std::vector<std::string> validate() const;

    bool tail_declared() const;
    // true if sum c_n diverges (forces limit measure 0)
    bool tail_divergent() const;
    // certified bracket for sum_{n >= from} c_n (finite tails only)
    struct TailSum { double lower = 0, upper = 0; };
    TailSum tail_sum_bounds(std::size_t from) const;

    std::string describe() const;
};

}  // namespace avol

#endif
