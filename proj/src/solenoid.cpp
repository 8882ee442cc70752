#include "avol/solenoid.hpp"

#include "avol/errors.hpp"
#include "avol/rng.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace avol {

namespace {

double wrap_unit(double x) {
    double y = x - std::floor(x);
    return y >= 1.0 ? 0.0 : y;
}

}  // namespace

long SolenoidSpec::det() const {
    if (torus_dim == 1) return matrix[0][0];
    return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
}

std::array<double, 2> separation_map(const SolenoidSpec& spec,
                                     const std::array<double, 2>& z) {
    std::array<double, 2> w{0, 0};
    for (int i = 0; i < spec.torus_dim; ++i) {
        const double coef = to_double(spec.weights[static_cast<std::size_t>(i)]);
        const double ang = 2.0 * M_PI * z[static_cast<std::size_t>(i)];
        w[0] += coef * std::cos(ang);
        w[1] += coef * std::sin(ang);
    }
    return w;
}

SolenoidPoint solenoid_step(const SolenoidSpec& spec, const SolenoidPoint& p) {
    SolenoidPoint out;
    const auto& A = spec.matrix;
    if (spec.torus_dim == 1) {
        out.base[0] = wrap_unit(static_cast<double>(A[0][0]) * p.base[0]);
        out.base[1] = 0;
    } else {
        out.base[0] = wrap_unit(static_cast<double>(A[0][0]) * p.base[0] +
                                static_cast<double>(A[0][1]) * p.base[1]);
        out.base[1] = wrap_unit(static_cast<double>(A[1][0]) * p.base[0] +
                                static_cast<double>(A[1][1]) * p.base[1]);
    }
    const double lc = to_double(spec.fiber_contraction);
    const auto th = separation_map(spec, p.base);
    out.fiber[0] = lc * p.fiber[0] + th[0];
    out.fiber[1] = lc * p.fiber[1] + th[1];
    return out;
}

namespace {

// preimages of z under A (mod 1): A^{-1}(z + e), e over integer shift classes
std::vector<std::array<double, 2>> base_preimages(const SolenoidSpec& spec,
                                                  const std::array<double, 2>& z) {
    std::vector<std::array<double, 2>> out;
    const long d = std::labs(spec.det());
    if (spec.torus_dim == 1) {
        const long a = spec.matrix[0][0];
        for (long e = 0; e < std::labs(a); ++e)
            out.push_back({wrap_unit((z[0] + static_cast<double>(e)) / static_cast<double>(a)), 0});
        return out;
    }
    const double a = static_cast<double>(spec.matrix[0][0]);
    const double b = static_cast<double>(spec.matrix[0][1]);
    const double c = static_cast<double>(spec.matrix[1][0]);
    const double dd = static_cast<double>(spec.matrix[1][1]);
    const double det = a * dd - b * c;
    // shift classes: representatives e in Z^2 with A^{-1} e distinct mod 1;
    // scanning a bounded window finds all |det| of them
    const long window = 8;
    for (long e1 = -window; e1 <= window; ++e1)
        for (long e2 = -window; e2 <= window; ++e2) {
            const double y1 = z[0] + static_cast<double>(e1);
            const double y2 = z[1] + static_cast<double>(e2);
            std::array<double, 2> w = {wrap_unit((dd * y1 - b * y2) / det),
                                       wrap_unit((-c * y1 + a * y2) / det)};
            bool dup = false;
            for (const auto& v : out)
                if (std::abs(v[0] - w[0]) < 1e-12 && std::abs(v[1] - w[1]) < 1e-12) {
                    dup = true;
                    break;
                }
            if (!dup) out.push_back(w);
            if (out.size() == static_cast<std::size_t>(d)) return out;
        }
    return out;
}

}  // namespace

std::vector<std::string> SolenoidSpec::validate(int separation_samples,
                                                std::uint64_t seed) const {
    std::vector<std::string> bad;
    if (torus_dim < 1 || torus_dim > 2) bad.push_back("torus dimension must be 1 or 2");
    if (static_cast<int>(weights.size()) != torus_dim)
        bad.push_back("one separation weight per torus dimension");
    const long d = std::labs(det());
    if (d < 2) bad.push_back("|det A| >= 2 (branch count)");
    const Rational lc = fiber_contraction;
    if (!(lc > 0 && lc < 1)) bad.push_back("fiber contraction in (0,1)");
    if (!bad.empty()) return bad;
    if (!(Rational(d) * lc * lc < 1)) bad.push_back("|det A| lambda_c^2 < 1 (slice-area decay)");
    // |theta| + lambda_c must stay inside the unit fiber disk
    Rational wsum(0);
    for (const auto& w : weights) wsum += abs(w);
    if (!(wsum + lc <= 1)) bad.push_back("fiber image stays inside the unit disk");
    // numerical separation check over sampled fibers
    auto rep = verify_injectivity(*this, static_cast<std::size_t>(separation_samples), seed);
    if (!rep.pass) {
        std::ostringstream os;
        os << "preimage-class separation " << rep.min_margin + 2 * to_double(lc)
           << " does not exceed 2 lambda_c = " << 2 * to_double(lc);
        bad.push_back(os.str());
    }
    return bad;
}

SeparationReport verify_injectivity(const SolenoidSpec& spec, std::size_t samples,
                                    std::uint64_t seed) {
    if (samples < 1) throw domain_error("need at least one sample");
    SeparationReport rep;
    rep.samples = samples;
    rep.min_margin = std::numeric_limits<double>::infinity();
    const double two_lc = 2.0 * to_double(spec.fiber_contraction);
    SplitMix64 rng(mix_seed(seed, 0x50LL));
    for (std::size_t s = 0; s < samples; ++s) {
        std::array<double, 2> z = {rng.next_unit(), spec.torus_dim > 1 ? rng.next_unit() : 0.0};
        auto pres = base_preimages(spec, z);
        for (std::size_t i = 0; i < pres.size(); ++i)
            for (std::size_t j = i + 1; j < pres.size(); ++j) {
                const auto ti = separation_map(spec, pres[i]);
                const auto tj = separation_map(spec, pres[j]);
                const double gap = std::hypot(ti[0] - tj[0], ti[1] - tj[1]);
                const double margin = gap - two_lc;
                if (margin < rep.min_margin) {
                    rep.min_margin = margin;
                    rep.witness_base = z;
                }
            }
    }
    rep.pass = rep.min_margin > 0;
    return rep;
}

SliceCover slice_cover(const SolenoidSpec& spec, const std::array<double, 2>& z, int level,
                       std::size_t cap) {
    if (level < 0) throw domain_error("level must be >= 0");
    const long d = std::labs(spec.det());
    double count_est = 1;
    for (int i = 0; i < level; ++i) {
        count_est *= static_cast<double>(d);
        if (count_est > static_cast<double>(cap))
            throw resource_error("slice disk count exceeds the cap");
    }

    SliceCover cover;
    cover.base = z;
    cover.level = level;

    // breadth-first over preimage itineraries: state = (base point, fiber
    // offset accumulated as sum lambda_c^(level-j) theta(orbit points))
    struct Node {
        std::array<double, 2> base;
        std::array<double, 2> center;
    };
    // center of the F^level image of the fiber over an n-th preimage chain
    // z <- w_1 <- ... <- w_n is sum_j lambda_c^j theta(w_{j+1}): the deeper the
    // preimage, the more contractions its offset passes through
    std::vector<Node> cur = {{z, {0, 0}}};
    const double lc = to_double(spec.fiber_contraction);
    double lc_pow = 1.0;
    for (int step = 0; step < level; ++step) {
        std::vector<Node> next;
        next.reserve(cur.size() * static_cast<std::size_t>(d));
        for (const auto& node : cur) {
            for (const auto& w : base_preimages(spec, node.base)) {
                const auto th = separation_map(spec, w);
                Node child;
                child.base = w;
                child.center = {node.center[0] + lc_pow * th[0],
                                node.center[1] + lc_pow * th[1]};
                next.push_back(child);
            }
        }
        cur = std::move(next);
        lc_pow *= lc;
    }
    cover.radius = std::pow(lc, level);
    cover.centers.reserve(cur.size());
    for (const auto& node : cur) cover.centers.push_back(node.center);

    Rational lc_sq_pow(1);
    for (int i = 0; i < 2 * level; ++i) lc_sq_pow *= spec.fiber_contraction;
    cover.area_over_pi = Rational(static_cast<long>(cover.centers.size())) * lc_sq_pow;

    cover.max_inscribed_radius = cover.radius;
    cover.min_center_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cover.centers.size(); ++i)
        for (std::size_t j = i + 1; j < cover.centers.size(); ++j) {
            const double g = std::hypot(cover.centers[i][0] - cover.centers[j][0],
                                        cover.centers[i][1] - cover.centers[j][1]);
            cover.min_center_gap = std::min(cover.min_center_gap, g);
        }
    return cover;
}

std::vector<StarVerdict> star_condition(const SolenoidSpec& spec,
                                        const std::vector<std::array<double, 2>>& fibers,
                                        int level, double disk_threshold, std::size_t cap) {
    if (!(disk_threshold > 0)) throw domain_error("disk threshold must be positive");
    std::vector<StarVerdict> out;
    out.reserve(fibers.size());
    for (const auto& z : fibers) {
        auto cover = slice_cover(spec, z, level, cap);
        StarVerdict v;
        v.base = z;
        v.radius = cover.radius;
        v.threshold = disk_threshold;
        v.no_disk = cover.radius < disk_threshold;
        v.totally_disconnected =
            cover.centers.size() > 1 && cover.min_center_gap > 2.0 * cover.radius;
        out.push_back(v);
    }
    return out;
}

}  // namespace avol
