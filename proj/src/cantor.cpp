#include "avol/cantor.hpp"

#include "avol/errors.hpp"

#include <cmath>
#include <sstream>

namespace avol {

IntervalCover build_cover(const GapSchedule& schedule, int depth, std::size_t cap) {
    if (depth < 0) throw domain_error("cover depth must be >= 0");
    {
        auto bad = schedule.validate();
        if (!bad.empty()) throw contract_error("invalid gap schedule: " + bad.front());
    }
    if (depth < 64 && (std::uint64_t{1} << depth) > cap)
        throw resource_error("interval count 2^" + std::to_string(depth) +
                             " exceeds cap " + std::to_string(cap));
    if (depth >= 64) throw resource_error("cover depth too large");

    IntervalCover cover;
    cover.depth = depth;
    cover.lo = {Rational(-1, 2)};
    cover.hi = {Rational(1, 2)};
    cover.itinerary = {0};

    Rational len(1);  // current level's bridge length
    for (int level = 0; level < depth; ++level) {
        const Rational c = schedule.gap_fraction(static_cast<std::size_t>(level));
        const Rational child = len * (Rational(1) - c) / 2;
        const std::size_t n = cover.lo.size();
        std::vector<Rational> lo2, hi2;
        std::vector<std::uint64_t> it2;
        lo2.reserve(2 * n);
        hi2.reserve(2 * n);
        it2.reserve(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            lo2.push_back(cover.lo[i]);
            hi2.push_back(cover.lo[i] + child);
            it2.push_back(cover.itinerary[i] << 1);
            lo2.push_back(cover.hi[i] - child);
            hi2.push_back(cover.hi[i]);
            it2.push_back((cover.itinerary[i] << 1) | 1);
        }
        cover.lo = std::move(lo2);
        cover.hi = std::move(hi2);
        cover.itinerary = std::move(it2);
        len = child;
    }
    cover.measure = schedule.partial_product(static_cast<std::size_t>(depth));
    return cover;
}

double limit_measure(const GapSchedule& schedule, double tol) {
    if (!(tol > 0)) throw domain_error("tolerance must be positive");
    {
        auto bad = schedule.validate();
        if (!bad.empty()) throw contract_error("invalid gap schedule: " + bad.front());
    }
    if (schedule.tail_divergent()) return 0.0;

    std::size_t n_terms = 64;
    long double partial = 1.0L;
    std::size_t done = 0;
    for (int iter = 0; iter < 24; ++iter) {
        for (; done < n_terms; ++done)
            partial *= 1.0L - static_cast<long double>(to_double(schedule.gap_fraction(done)));
        const auto s = schedule.tail_sum_bounds(n_terms);
        // ln(1-c) >= -c - c^2 for c <= 1/2 (tails here are inverse-square);
        // sum of tail c_n^2 <= (1/4)(1/M^4 + 1/(3 M^3)), M = n_terms + 1
        const double M = static_cast<double>(n_terms + 1);
        const double q = 0.25 * (1.0 / (M * M * M * M) + 1.0 / (3.0 * M * M * M));
        const double low = static_cast<double>(partial) * std::exp(-s.upper - q);
        const double high = static_cast<double>(partial) * std::exp(-s.lower);
        const double mid = 0.5 * (low + high);
        if (high - low <= tol * mid) return mid;
        n_terms *= 4;
    }
    throw numeric_error("limit_measure failed to reach the requested tolerance");
}

Rational CantorMapSpec::bridge_length(int level) const {
    Rational len(1);
    for (int k = 0; k < level; ++k)
        len *= (Rational(1) - schedule.gap_fraction(static_cast<std::size_t>(k))) / 2;
    return len;
}

Rational CantorMapSpec::branch_a() const { return Rational(-1, 2) + bridge_length(1); }
Rational CantorMapSpec::branch_b() const { return Rational(1, 2) - bridge_length(1); }

std::vector<std::string> CantorMapSpec::validate() const {
    std::vector<std::string> bad = schedule.validate();
    if (max_depth < 1 || max_depth > 60) bad.push_back("max_depth out of range [1,60]");
    // monotone cubic on every gap level within max_depth: with equal end
    // slopes d the derivative min is d (mu >= d) or 1.5 mu - 0.5 d, so the
    // exact condition is d <= 3 mu.
    if (bad.empty()) {
        Rational g_img = schedule.gap_fraction(0);  // central gap, root length 1
        Rational len = bridge_length(1);
        for (int n = 1; n < max_depth; ++n) {
            const Rational c = schedule.gap_fraction(static_cast<std::size_t>(n));
            const Rational g = c * len;
            const Rational mu = g_img / g;
            const Rational d = Rational(2) / (Rational(1) - c);
            if (d > 3 * mu) {
                std::ostringstream os;
                os << "gap interpolation at level " << n << " is not monotone (d > 3 mu)";
                bad.push_back(os.str());
                break;
            }
            g_img = g;
            len = len * (Rational(1) - c) / 2;
        }
    }
    return bad;
}

namespace {

Rational hermite_eq_value(const Rational& x0, const Rational& x1, const Rational& y0,
                          const Rational& y1, const Rational& d, const Rational& x) {
    const Rational h = x1 - x0;
    const Rational t = (x - x0) / h;
    const Rational mu = (y1 - y0) / h;
    const Rational e = mu - d;
    return y0 + h * t * (d + t * (3 * e - 2 * e * t));
}

Rational hermite_eq_derivative(const Rational& x0, const Rational& x1, const Rational& y0,
                               const Rational& y1, const Rational& d, const Rational& x) {
    const Rational h = x1 - x0;
    const Rational t = (x - x0) / h;
    const Rational mu = (y1 - y0) / h;
    return d + 6 * (mu - d) * t * (1 - t);
}

}  // namespace

Rational cubic_value(const GapPiece& g, const Rational& x) {
    return hermite_eq_value(g.x0, g.x1, g.y0, g.y1, g.end_slope, x);
}

Rational cubic_derivative(const GapPiece& g, const Rational& x) {
    return hermite_eq_derivative(g.x0, g.x1, g.y0, g.y1, g.end_slope, x);
}

double cubic_value(double x0, double x1, double y0, double y1, double d, double x) {
    const double h = x1 - x0, t = (x - x0) / h, mu = (y1 - y0) / h, e = mu - d;
    return y0 + h * t * (d + t * (3 * e - 2 * e * t));
}

double cubic_derivative(double x0, double x1, double y0, double y1, double d, double x) {
    const double h = x1 - x0, t = (x - x0) / h, mu = (y1 - y0) / h;
    return d + 6 * (mu - d) * t * (1 - t);
}

CantorEval eval_map_exact(const CantorMapSpec& spec, const Rational& x) {
    const Rational a = spec.branch_a(), b = spec.branch_b();
    if (x < Rational(-1, 2) || x > Rational(1, 2) || (x > a && x < b))
        throw domain_error("point is outside the branch domains");

    // cur: level-m bridge containing x; img: its level-(m-1) image bridge
    Rational clo, chi;
    if (x <= a) {
        clo = Rational(-1, 2);
        chi = a;
    } else {
        clo = b;
        chi = Rational(1, 2);
    }
    Rational ilo(-1, 2), ihi(1, 2);
    Rational l_cur = spec.bridge_length(1), l_img(1);

    for (int m = 1; m < spec.max_depth; ++m) {
        const Rational c = spec.schedule.gap_fraction(static_cast<std::size_t>(m));
        const Rational l_child = l_cur * (Rational(1) - c) / 2;
        if (x <= clo + l_child) {
            chi = clo + l_child;
            ihi = ilo + l_cur;
        } else if (x >= chi - l_child) {
            clo = chi - l_child;
            ilo = ihi - l_cur;
        } else {
            GapPiece g;
            g.x0 = clo + l_child;
            g.x1 = chi - l_child;
            g.y0 = ilo + l_cur;
            g.y1 = ihi - l_cur;
            g.end_slope = Rational(2) / (Rational(1) - c);
            return {cubic_value(g, x), cubic_derivative(g, x), true};
        }
        l_img = l_cur;
        l_cur = l_child;
    }
    const Rational slope = l_img / l_cur;
    return {ilo + (x - clo) * slope, slope, false};
}

CantorMapCache::CantorMapCache(const CantorMapSpec& spec) {
    a = to_double(spec.branch_a());
    b = to_double(spec.branch_b());
    max_depth = spec.max_depth;
    gap_fraction.reserve(static_cast<std::size_t>(max_depth));
    for (int m = 0; m < max_depth; ++m)
        gap_fraction.push_back(to_double(spec.schedule.gap_fraction(static_cast<std::size_t>(m))));
}

CantorEvalD eval_map(const CantorMapSpec& spec, double x) {
    return eval_map(CantorMapCache(spec), x);
}

CantorEvalD eval_map(const CantorMapCache& cache, double x) {
    const double a = cache.a, b = cache.b;
    if (x < -0.5 || x > 0.5 || (x > a && x < b))
        throw domain_error("point is outside the branch domains");

    double clo, chi;
    if (x <= a) {
        clo = -0.5;
        chi = a;
    } else {
        clo = b;
        chi = 0.5;
    }
    double ilo = -0.5, ihi = 0.5;
    double l_cur = chi - clo, l_img = 1.0;

    for (int m = 1; m < cache.max_depth; ++m) {
        const double c = cache.gap_fraction[static_cast<std::size_t>(m)];
        const double l_child = l_cur * (1.0 - c) / 2.0;
        if (x <= clo + l_child) {
            chi = clo + l_child;
            ihi = ilo + l_cur;
        } else if (x >= chi - l_child) {
            clo = chi - l_child;
            ilo = ihi - l_cur;
        } else {
            const double x0 = clo + l_child, x1 = chi - l_child;
            const double y0 = ilo + l_cur, y1 = ihi - l_cur;
            const double d = 2.0 / (1.0 - c);
            return {cubic_value(x0, x1, y0, y1, d, x),
                    cubic_derivative(x0, x1, y0, y1, d, x), true};
        }
        l_img = l_cur;
        l_cur = l_child;
    }
    const double slope = l_img / l_cur;
    return {ilo + (x - clo) * slope, slope, false};
}

HoelderReport hoelder_modulus(const CantorMapSpec& spec, double alpha, int depth) {
    if (!(alpha > 0 && alpha <= 1)) throw domain_error("alpha must lie in (0,1]");
    if (depth < 0 || depth > spec.max_depth)
        throw domain_error("hoelder depth must lie in [0, max_depth]");

    HoelderReport rep;
    rep.alpha = alpha;
    rep.depth = depth;
    const double ts = (1.0 - alpha) / (2.0 - alpha);
    const double amp = 6.0 * std::pow(ts, 1.0 - alpha) * (1.0 - ts);

    Rational g_img = spec.schedule.gap_fraction(0);
    Rational len = spec.bridge_length(1);
    double runmax = 0.0;
    for (int n = 1; n <= depth; ++n) {
        const Rational c = spec.schedule.gap_fraction(static_cast<std::size_t>(n));
        const Rational g = c * len;
        const Rational mu = g_img / g;
        const Rational d = Rational(2) / (Rational(1) - c);
        const double m_n =
            amp * std::abs(to_double(mu) - to_double(d)) / std::pow(to_double(g), alpha);
        rep.per_level.push_back(m_n);
        runmax = std::max(runmax, m_n);
        rep.running_max.push_back(runmax);
        g_img = g;
        len = len * (Rational(1) - c) / 2;
    }
    return rep;
}

}  // namespace avol
