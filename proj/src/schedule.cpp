#include "avol/schedule.hpp"

#include "avol/errors.hpp"

#include <sstream>

namespace avol {

GapSchedule GapSchedule::constant(const Rational& c) {
    GapSchedule s;
    s.kind = Kind::Constant;
    s.constant_value = c;
    return s;
}

GapSchedule GapSchedule::inverse_square() {
    GapSchedule s;
    s.kind = Kind::InverseSquare;
    return s;
}

GapSchedule GapSchedule::explicit_list(std::vector<Rational> cs, TailRule tail) {
    GapSchedule s;
    s.kind = Kind::Explicit;
    s.entries = std::move(cs);
    s.tail = tail;
    return s;
}

Rational GapSchedule::gap_fraction(std::size_t n) const {
    switch (kind) {
        case Kind::Constant:
            return constant_value;
        case Kind::InverseSquare: {
            BigInt m(n + 1);
            return Rational(BigInt(1), 2 * m * m);
        }
        case Kind::Explicit:
            if (n < entries.size()) return entries[n];
            if (tail == TailRule::RepeatLast) {
                if (entries.empty()) throw contract_error("explicit schedule has no entries");
                return entries.back();
            }
            if (tail == TailRule::InverseSquareFormula) {
                BigInt m(n + 1);
                return Rational(BigInt(1), 2 * m * m);
            }
            throw contract_error("explicit schedule has an undeclared tail rule");
    }
    throw contract_error("bad schedule kind");
}

Rational GapSchedule::partial_product(std::size_t n) const {
    Rational p(1);
    for (std::size_t k = 0; k < n; ++k) p *= Rational(1) - gap_fraction(k);
    return p;
}

std::vector<std::string> GapSchedule::validate() const {
    std::vector<std::string> bad;
    auto check = [&](const Rational& c, std::size_t n) {
        if (!(c > 0 && c < 1)) {
            std::ostringstream os;
            os << "gap fraction c_" << n << " = " << c << " violates 0 < c < 1";
            bad.push_back(os.str());
        }
    };
    switch (kind) {
        case Kind::Constant:
            check(constant_value, 0);
            break;
        case Kind::InverseSquare:
            break;
        case Kind::Explicit: {
            if (entries.empty()) bad.push_back("explicit schedule needs at least one entry");
            for (std::size_t n = 0; n < entries.size(); ++n) check(entries[n], n);
            if (!tail_declared()) bad.push_back("explicit schedule has an undeclared tail rule");
            break;
        }
    }
    return bad;
}

bool GapSchedule::tail_declared() const {
    return kind != Kind::Explicit || tail != TailRule::Unspecified;
}

bool GapSchedule::tail_divergent() const {
    switch (kind) {
        case Kind::Constant:
            return true;
        case Kind::InverseSquare:
            return false;
        case Kind::Explicit:
            if (!tail_declared()) throw contract_error("explicit schedule has an undeclared tail rule");
            return tail == TailRule::RepeatLast;  // repeated positive entry
    }
    return true;
}

GapSchedule::TailSum GapSchedule::tail_sum_bounds(std::size_t from) const {
    if (tail_divergent()) throw contract_error("tail sum diverges");
    // finite-tail cases are all of inverse-square shape from some index on
    std::size_t n0 = from;
    double head = 0;
    if (kind == Kind::Explicit) {
        for (std::size_t n = from; n < entries.size(); ++n) head += to_double(entries[n]);
        if (entries.size() > n0) n0 = entries.size();
    }
    // sum_{n >= n0} 1/(2(n+1)^2) = (1/2) sum_{m >= n0+1} 1/m^2,
    // integral bracket: 1/M <= sum_{m>=M} 1/m^2 <= 1/M + 1/M^2 with M = n0+1
    double M = static_cast<double>(n0 + 1);
    TailSum t;
    t.lower = head + 0.5 / M;
    t.upper = head + 0.5 * (1.0 / M + 1.0 / (M * M));
    return t;
}

std::string GapSchedule::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Constant:
            os << "constant c=" << constant_value;
            break;
        case Kind::InverseSquare:
            os << "inverse-square c_n=1/(2(n+1)^2)";
            break;
        case Kind::Explicit:
            os << "explicit[" << entries.size() << " entries, tail "
               << (tail == TailRule::RepeatLast ? "repeat-last"
                   : tail == TailRule::InverseSquareFormula ? "inverse-square" : "unspecified")
               << "]";
            break;
    }
    return os.str();
}

}  // namespace avol
