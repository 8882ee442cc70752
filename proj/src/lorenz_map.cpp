#include "avol/lorenz_map.hpp"

#include "avol/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace avol {

namespace {

// cubic Hermite with distinct end slopes; t in [0,1]
struct Cubic {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0, d0 = 1, d1 = 1;

    double h() const { return x1 - x0; }
    double mu() const { return (y1 - y0) / h(); }
    double value(double x) const {
        const double t = (x - x0) / h();
        const double m = mu();
        const double a = 3 * m - 2 * d0 - d1, b = d0 + d1 - 2 * m;
        return y0 + h() * t * (d0 + t * (a + b * t));
    }
    double slope(double x) const {
        const double t = (x - x0) / h();
        const double m = mu();
        const double a = 3 * m - 2 * d0 - d1, b = d0 + d1 - 2 * m;
        return d0 + t * (2 * a + 3 * b * t);
    }
    // exact min of the quadratic slope over [0,1]
    double min_slope() const {
        const double m = mu();
        const double B = 2 * (3 * m - 2 * d0 - d1), A = 3 * (d0 + d1 - 2 * m);
        double lo = std::min(d0, d1);
        if (A != 0) {
            const double tv = -B / (2 * A);
            if (tv > 0 && tv < 1) lo = std::min(lo, d0 + tv * (B + A * tv));
        }
        return lo;
    }
    double inverse(double y) const {
        double a = x0, b = x1;
        for (int i = 0; i < 100; ++i) {
            const double mid = 0.5 * (a + b);
            if (value(mid) < y)
                a = mid;
            else
                b = mid;
        }
        return 0.5 * (a + b);
    }
};

double limit_gap_fraction(const GapSchedule& s) {
    switch (s.kind) {
        case GapSchedule::Kind::Constant:
            return to_double(s.constant_value);
        case GapSchedule::Kind::InverseSquare:
            return 0.0;
        case GapSchedule::Kind::Explicit:
            return s.tail == GapSchedule::TailRule::RepeatLast && !s.entries.empty()
                       ? to_double(s.entries.back())
                       : 0.0;
    }
    return 0.0;
}

struct ExtensionPieces {
    Cubic collar;  // [-3/4, -1/2]
    Cubic joint;   // [a, -h]
    double h = 0, q = 0, a = 0;
};

ExtensionPieces make_pieces(const CantorExtensionParams& p, double a, double limit_slope) {
    ExtensionPieces e;
    e.h = p.sqrt_join_x;
    e.a = a;
    e.q = (0.75 - p.sqrt_join_value) / std::sqrt(e.h);
    e.collar = {-0.75, -0.5, -p.edge_value, -0.5, p.collar_outer_slope, limit_slope};
    e.joint = {a, -e.h, 0.5, p.sqrt_join_value, limit_slope, e.q / (2 * std::sqrt(e.h))};
    return e;
}

// inverse of the cantor map restricted to one branch, by the dual tree walk
double cantor_branch_inverse(const CantorMapCache& c, int branch_sign, double y) {
    double clo, chi;
    if (branch_sign < 0) {
        clo = -0.5;
        chi = c.a;
    } else {
        clo = c.b;
        chi = 0.5;
    }
    double ilo = -0.5, ihi = 0.5;
    double l_cur = chi - clo, l_img = 1.0;
    for (int m = 1; m < c.max_depth; ++m) {
        const double cf = c.gap_fraction[static_cast<std::size_t>(m)];
        const double l_child = l_cur * (1.0 - cf) / 2.0;
        if (y <= ilo + l_cur) {
            chi = clo + l_child;
            ihi = ilo + l_cur;
        } else if (y >= ihi - l_cur) {
            clo = chi - l_child;
            ilo = ihi - l_cur;
        } else {
            // image falls in a gap: invert the cubic by bisection
            const double x0 = clo + l_child, x1 = chi - l_child;
            const double y0 = ilo + l_cur, y1 = ihi - l_cur;
            const double d = 2.0 / (1.0 - cf);
            double a = x0, b = x1;
            for (int i = 0; i < 100; ++i) {
                const double mid = 0.5 * (a + b);
                if (cubic_value(x0, x1, y0, y1, d, mid) < y)
                    a = mid;
                else
                    b = mid;
            }
            return 0.5 * (a + b);
        }
        l_img = l_cur;
        l_cur = l_child;
    }
    return clo + (y - ilo) * l_cur / l_img;
}

}  // namespace

LorenzMap::LorenzMap(const LorenzMapSpec& spec) : spec_(spec) {
    if (const auto* c = std::get_if<CantorExtensionParams>(&spec_.params)) {
        cache_ = CantorMapCache(c->cantor);
        cantor_a_ = cache_.a;
        cantor_b_ = cache_.b;
        limit_slope_ = 2.0 / (1.0 - limit_gap_fraction(c->cantor.schedule));
        sqrt_q_ = (0.75 - c->sqrt_join_value) / std::sqrt(c->sqrt_join_x);
    }
}

bool LorenzMap::singular(double x) const { return std::abs(x) < spec_.singular_floor; }

LorenzEval LorenzMap::eval_left(double x) const {
    const auto& p = std::get<CantorExtensionParams>(spec_.params);
    const auto pieces = make_pieces(p, cantor_a_, limit_slope_);
    if (x <= -0.5) return {pieces.collar.value(x), pieces.collar.slope(x), true};
    if (x <= cantor_a_) {
        const CantorEvalD e = eval_map(cache_, x);
        return {e.value, e.derivative, e.fully_resolved};
    }
    if (x <= -pieces.h) return {pieces.joint.value(x), pieces.joint.slope(x), true};
    const double r = std::sqrt(-x);
    return {0.75 - sqrt_q_ * r, sqrt_q_ / (2 * r), true};
}

LorenzEval LorenzMap::eval(double x) const {
    if (x < -0.75 || x > 0.75) throw domain_error("point is outside [-3/4, 3/4]");
    if (singular(x)) throw domain_error("point is on the singular line");
    if (const auto* pw = std::get_if<PowerLawParams>(&spec_.params)) {
        const double ax = std::abs(x);
        const double v = pw->beta * std::pow(ax, pw->rho) - 0.75;
        const double d = pw->beta * pw->rho * std::pow(ax, pw->rho - 1.0);
        return {x > 0 ? v : -v, d, true};
    }
    if (x < 0) return eval_left(x);
    LorenzEval e = eval_left(-x);
    return {-e.value, e.derivative, e.fully_resolved};
}

std::optional<double> LorenzMap::inverse(int branch_sign, double y) const {
    if (branch_sign == 0) return std::nullopt;
    if (const auto* pw = std::get_if<PowerLawParams>(&spec_.params)) {
        // right branch image (-3/4, f(3/4)], left branch [-f(3/4), 3/4)
        const double top = pw->beta * std::pow(0.75, pw->rho) - 0.75;
        if (branch_sign > 0) {
            if (!(y > -0.75 && y <= top)) return std::nullopt;
            return std::pow((y + 0.75) / pw->beta, 1.0 / pw->rho);
        }
        if (!(y >= -top && y < 0.75)) return std::nullopt;
        return -std::pow((0.75 - y) / pw->beta, 1.0 / pw->rho);
    }
    const auto& p = std::get<CantorExtensionParams>(spec_.params);
    if (branch_sign > 0) {
        auto xl = inverse(-1, -y);
        if (!xl) return std::nullopt;
        return -*xl;
    }
    const auto pieces = make_pieces(p, cantor_a_, limit_slope_);
    if (y < -p.edge_value || y >= 0.75) return std::nullopt;
    if (y <= -0.5) return pieces.collar.inverse(y);
    if (y <= 0.5) return cantor_branch_inverse(cache_, -1, y);
    if (y <= p.sqrt_join_value) return pieces.joint.inverse(y);
    const double r = (0.75 - y) / sqrt_q_;
    return -r * r;
}

bool PropertyReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const PropertyCheck& c) { return c.pass; });
}

PropertyReport validate_properties(const LorenzMapSpec& spec) {
    PropertyReport rep;
    const LorenzMap map(spec);
    auto add = [&rep](const std::string& name, bool pass, const std::string& witness) {
        rep.checks.push_back({name, pass, witness});
    };
    std::ostringstream w;

    if (const auto* pw = std::get_if<PowerLawParams>(&spec.params)) {
        const bool params_ok = pw->rho > 0 && pw->rho < 1 && pw->beta > 0;
        add("parameters", params_ok, "rho in (0,1), beta > 0");
        // (1) increasing: f' = beta rho |x|^(rho-1) > 0
        add("increasing-branches", params_ok, "closed-form derivative positive");
        // (2) boundary: f(3/4) < 3/4 and -3/4 < f(-3/4), both <=> beta (3/4)^rho < 3/2
        const double f34 = pw->beta * std::pow(0.75, pw->rho) - 0.75;
        rep.boundary_image = f34;
        w.str("");
        w << "f(3/4) = " << f34;
        add("boundary-inside", f34 < 0.75, w.str());
        // (3) one-sided limits at 0 are -+3/4 by the closed form
        add("limits-at-zero", true, "f(0^-) -> 3/4, f(0^+) -> -3/4 (closed form)");
        // (4) derivative blow-up at 0
        const double d3 = map.derivative(-1e-3), d6 = map.derivative(-1e-6),
                     d9 = map.derivative(-1e-9);
        w.str("");
        w << "f'(1e-3,1e-6,1e-9) = " << d3 << ", " << d6 << ", " << d9;
        add("derivative-blowup", d9 > d6 && d6 > d3 && d9 >= 100.0, w.str());
        // expansion floor (transitivity of the classical model)
        const double dmin = pw->beta * pw->rho * std::pow(0.75, pw->rho - 1.0);
        rep.min_derivative = dmin;
        w.str("");
        w << "inf f' = " << dmin;
        add("expansion-floor-sqrt2", dmin > std::sqrt(2.0), w.str());
        return rep;
    }

    const auto& p = std::get<CantorExtensionParams>(spec.params);
    auto bad = p.cantor.validate();
    add("cantor-spec", bad.empty(), bad.empty() ? "ok" : bad.front());
    if (!bad.empty()) return rep;

    const double a = to_double(p.cantor.branch_a());
    const bool geom_ok = p.edge_value > 0.5 && p.edge_value < 0.75 &&
                         p.sqrt_join_x > 0 && -p.sqrt_join_x > a &&
                         p.sqrt_join_value > 0.5 && p.sqrt_join_value < 0.75 &&
                         p.collar_outer_slope > 0;
    add("extension-geometry", geom_ok, "piece ordering and value ranges");

    const double limit_slope = 2.0 / (1.0 - limit_gap_fraction(p.cantor.schedule));
    const auto pieces = make_pieces(p, a, limit_slope);
    const double collar_min = pieces.collar.min_slope(), joint_min = pieces.joint.min_slope();
    w.str("");
    w << "min slopes: collar " << collar_min << ", joint " << joint_min;
    add("increasing-branches", collar_min > 0 && joint_min > 0 && pieces.q > 0, w.str());

    rep.boundary_image = p.edge_value;
    w.str("");
    w << "f(3/4) = " << p.edge_value;
    add("boundary-inside", p.edge_value < 0.75, w.str());

    add("limits-at-zero", true, "sqrt cap -> -+3/4 (closed form)");

    const LorenzMap m2(spec);
    const double d3 = m2.derivative(-1e-3), d6 = m2.derivative(-1e-6),
                 d9 = m2.derivative(-1e-9);
    w.str("");
    w << "f'(1e-3,1e-6,1e-9) = " << d3 << ", " << d6 << ", " << d9;
    add("derivative-blowup", d9 > d6 && d6 > d3 && d9 >= 100.0, w.str());
    return rep;
}

IntervalCover invariant_cover(const LorenzMapSpec& spec, int depth, std::size_t cap) {
    if (depth < 0) throw domain_error("cover depth must be >= 0");
    if (const auto* p = std::get_if<CantorExtensionParams>(&spec.params)) {
        IntervalCover cover;
        cover.root_lo = Rational(-3, 4);
        cover.root_hi = Rational(3, 4);
        if (depth == 0) {
            cover.depth = 0;
            cover.lo = {Rational(-3, 4)};
            cover.hi = {Rational(3, 4)};
            cover.itinerary = {0};
            cover.measure = Rational(3, 2);
            return cover;
        }
        IntervalCover bridges = build_cover(p->cantor.schedule, depth, cap);
        bridges.root_lo = cover.root_lo;
        bridges.root_hi = cover.root_hi;
        return bridges;
    }

    // power law: partition by singular preimages of order < depth
    const LorenzMap map(spec);
    std::vector<double> cuts;
    std::vector<double> frontier = {0.0};
    if (depth >= 1) cuts.push_back(0.0);
    for (int k = 2; k <= depth; ++k) {
        std::vector<double> next;
        for (double y : frontier)
            for (int s : {-1, +1})
                if (auto x = map.inverse(s, y); x && std::abs(*x) > spec.singular_floor &&
                                                std::abs(*x) < 0.75)
                    next.push_back(*x);
        cuts.insert(cuts.end(), next.begin(), next.end());
        frontier = std::move(next);
        if (cuts.size() > cap) throw resource_error("singular preimage count exceeds cap");
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    IntervalCover cover;
    cover.depth = depth;
    cover.root_lo = Rational(-3, 4);
    cover.root_hi = Rational(3, 4);
    double prev = -0.75;
    for (double c : cuts) {
        cover.lo.push_back(Rational(prev));
        cover.hi.push_back(Rational(c));
        cover.itinerary.push_back(0);
        prev = c;
    }
    cover.lo.push_back(Rational(prev));
    cover.hi.push_back(Rational(0.75));
    cover.itinerary.push_back(0);
    cover.measure = 0;
    for (std::size_t i = 0; i < cover.lo.size(); ++i)
        cover.measure += cover.hi[i] - cover.lo[i];
    return cover;
}

Interval inverse_branch(const LorenzMapSpec& spec, const std::vector<int>& itinerary,
                        Interval target) {
    if (!(target.lo <= target.hi) || target.lo < -0.75 || target.hi > 0.75)
        throw domain_error("target interval must lie inside [-3/4, 3/4]");
    const LorenzMap map(spec);
    Interval j = target;
    for (std::size_t i = itinerary.size(); i > 0; --i) {
        const int sign = itinerary[i - 1];
        auto lo = map.inverse(sign, j.lo);
        auto hi = map.inverse(sign, j.hi);
        if (!lo || !hi) {
            std::ostringstream os;
            os << "itinerary inconsistent at step " << i
               << ": interval leaves the branch image";
            throw contract_error(os.str(), os.str());
        }
        j = {*lo, *hi};
    }
    return j;
}

namespace {

struct DistortionScan {
    const LorenzMap& map;
    int n_max;
    std::vector<DistortionReport> best;

    // ratio of n-step derivatives over samples of the pre-ball
    void visit(const Interval& j, int depth, std::uint64_t word, double center,
               double radius) {
        constexpr int kSamples = 9;
        double dmin = 0, dmax = 0;
        bool any = false;
        for (int s = 0; s < kSamples; ++s) {
            double x = j.lo + (j.hi - j.lo) * s / (kSamples - 1);
            double logd = 0;
            bool ok = true;
            for (int k = 0; k < depth; ++k) {
                if (map.singular(x)) { ok = false; break; }
                const LorenzEval e = map.eval(x);
                logd += std::log(std::abs(e.derivative));
                x = e.value;
            }
            if (!ok) continue;
            if (!any) {
                dmin = dmax = logd;
                any = true;
            } else {
                dmin = std::min(dmin, logd);
                dmax = std::max(dmax, logd);
            }
        }
        if (!any) return;
        const double ratio = std::exp(dmax - dmin);
        auto& b = best[static_cast<std::size_t>(depth - 1)];
        if (ratio > b.distortion) {
            b.distortion = ratio;
            b.ball_center = center;
            b.ball_radius = radius;
            b.itinerary.clear();
            for (int k = depth - 1; k >= 0; --k)
                b.itinerary.push_back((word >> k) & 1 ? +1 : -1);
        }
    }

    void descend(const Interval& j, int depth, std::uint64_t word, double center,
                 double radius) {
        if (depth >= n_max) return;
        for (int s : {-1, +1}) {
            auto lo = map.inverse(s, j.lo);
            auto hi = map.inverse(s, j.hi);
            if (!lo || !hi) continue;
            Interval pre{*lo, *hi};
            // pre-balls live where the map is uniformly C^{1+}: chains that
            // enter the radius-sized collar of the singular point are out of
            // scope (there the log-derivative oscillation is unbounded)
            if (pre.lo < radius && pre.hi > -radius) continue;
            const std::uint64_t w = (word << 1) | (s > 0 ? 1u : 0u);
            visit(pre, depth + 1, w, center, radius);
            descend(pre, depth + 1, w, center, radius);
        }
    }
};

}  // namespace

std::vector<DistortionReport> distortion_table(const LorenzMapSpec& spec, int n_max,
                                               double radius) {
    if (n_max < 1) throw domain_error("iterate count must be >= 1");
    if (!(radius > 0 && radius < 0.375)) throw domain_error("radius must lie in (0, 3/8)");
    if (n_max > 18) throw resource_error("exhaustive itinerary enumeration capped at n = 18");

    const LorenzMap map(spec);
    DistortionScan scan{map, n_max, {}};
    scan.best.resize(static_cast<std::size_t>(n_max));
    for (int k = 0; k < n_max; ++k) scan.best[static_cast<std::size_t>(k)].iterates = k + 1;

    for (double center : {-0.55, -0.35, -0.15, 0.15, 0.35, 0.55}) {
        if (std::abs(center) <= radius || std::abs(center) + radius >= 0.75) continue;
        scan.descend({center - radius, center + radius}, 0, 0, center, radius);
    }
    return scan.best;
}

DistortionReport distortion(const LorenzMapSpec& spec, int n, double radius) {
    return distortion_table(spec, n, radius).back();
}

}  // namespace avol
