#include "avol/geometric_lorenz.hpp"

#include "avol/errors.hpp"
#include "avol/volume_lab.hpp"

#include <cmath>
#include <sstream>

namespace avol {

std::vector<std::string> SuspensionSpec::validate() const {
    std::vector<std::string> bad;
    auto req = [&bad](bool ok, const std::string& ineq) {
        if (!ok) bad.push_back(ineq);
    };
    req(lambda1 > 0, "lambda1 > 0");
    req(lambda2 < lambda3, "lambda2 < lambda3");
    req(lambda3 < 0, "lambda3 < 0");
    req(lambda1 + lambda3 > 0, "lambda1 + lambda3 > 0 (volume expansion)");
    if (bad.empty()) {
        req(rho() > 0 && rho() < 1, "rho = -lambda3/lambda1 in (0,1)");
        req(stable_exponent() > 1, "s = -lambda2/lambda1 > 1");
    }
    req(glue_time > 0, "glue transit time > 0");
    req(glue_scale > 0, "glue scale > 0");
    req(fiber_scale > 0 && fiber_offset > 0, "fiber parameters > 0");
    if (bad.empty()) {
        // reachable exit-face region must glue into the interior of Sigma
        const double zmax = std::pow(0.75, rho());
        req(glue_scale * zmax - 0.75 < 0.75, "glued x stays inside Sigma");
        const double s = stable_exponent();
        const double ymax = (fiber_offset + 0.75 * fiber_scale) * std::pow(0.75, s);
        req(ymax < 0.75, "glued y stays inside Sigma");
    }
    return bad;
}

std::vector<std::string> ReturnMapSpec::validate() const {
    std::vector<std::string> bad;
    auto pr = validate_properties(base);
    if (!pr.all_pass()) bad.push_back("base map fails a Lorenz-like property");
    if (!(stable_exponent > 1)) bad.push_back("stable exponent s > 1");
    if (!(fiber_scale > 0) || !(fiber_offset > 0)) bad.push_back("fiber parameters > 0");
    const double gmax =
        (fiber_offset + 0.75 * fiber_scale) * std::pow(0.75, stable_exponent);
    if (!(gmax < 0.75)) bad.push_back("sup |g| < 3/4 (image inside the section)");
    if (!(fiber_contraction_bound() < 1)) bad.push_back("kappa (3/4)^s < 1 (fiber contraction)");
    const double floor = base_derivative_floor();
    if (!(fiber_contraction_bound() / floor < 1))
        bad.push_back("domination ratio sup|dg/dy| / inf f' < 1");
    return bad;
}

double ReturnMapSpec::fiber_contraction_bound() const {
    return fiber_scale * std::pow(0.75, stable_exponent);
}

double ReturnMapSpec::base_derivative_floor() const {
    if (const auto* pw = std::get_if<PowerLawParams>(&base.params))
        return pw->beta * pw->rho * std::pow(0.75, pw->rho - 1.0);
    // sampled floor for the piecewise variant
    const LorenzMap map(base);
    double floor = std::numeric_limits<double>::infinity();
    for (int i = 1; i < 20000; ++i) {
        const double x = -0.75 + 1.5 * i / 20000.0;
        if (std::abs(x) < 1e-6) continue;
        floor = std::min(floor, map.eval(x).derivative);
    }
    return floor;
}

ReturnMapSpec derive_return_map(const SuspensionSpec& susp) {
    auto bad = susp.validate();
    if (!bad.empty()) throw contract_error("suspension spec violates: " + bad.front());
    ReturnMapSpec rm;
    rm.base = LorenzMapSpec{PowerLawParams{susp.rho(), susp.glue_scale}};
    rm.fiber_offset = susp.fiber_offset;
    rm.fiber_scale = susp.fiber_scale;
    rm.stable_exponent = susp.stable_exponent();
    bad = rm.validate();
    if (!bad.empty())
        throw contract_error("derived return map violates: " + bad.front());
    return rm;
}

ReturnStep return_step(const ReturnMapSpec& spec, const LorenzMap& base, double x, double y) {
    if (std::abs(x) < spec.base.singular_floor)
        throw domain_error("section point on the singular line");
    if (std::abs(x) > 0.75 || std::abs(y) > 0.75)
        throw domain_error("point is outside the section");
    const LorenzEval fx = base.eval(x);
    const double s = spec.stable_exponent;
    const double axs = std::pow(std::abs(x), s);
    const double sign = x > 0 ? 1.0 : -1.0;

    ReturnStep out;
    out.x = fx.value;
    out.y = sign * spec.fiber_offset * axs + spec.fiber_scale * y * axs;
    out.tangent.dim = 2;
    out.tangent.base = ModelPoint::square(x, y);
    out.tangent.at(0, 0) = fx.derivative;
    out.tangent.at(0, 1) = 0.0;
    out.tangent.at(1, 0) =
        s * std::pow(std::abs(x), s - 1.0) * (spec.fiber_offset + spec.fiber_scale * y * sign);
    out.tangent.at(1, 1) = spec.fiber_scale * axs;
    return out;
}

ReturnStep return_step(const ReturnMapSpec& spec, double x, double y) {
    return return_step(spec, LorenzMap(spec.base), x, y);
}

double return_time(const SuspensionSpec& susp, double x) {
    if (std::abs(x) < 1e-300) throw domain_error("no return from the singular line");
    return -std::log(std::abs(x)) / susp.lambda1 + susp.glue_time;
}

namespace {

bool saddle_valid(const FlowPoint& p) {
    return std::abs(p.x) <= 1.0 && std::abs(p.y) <= 1.0 && p.z > 0.0 && p.z <= 1.0;
}

FlowPoint glue(const SuspensionSpec& susp, int side, double fy, double fz) {
    FlowPoint p;
    p.region = FlowPoint::Region::Saddle;
    p.x = side * (susp.glue_scale * fz - 0.75);
    p.y = side * susp.fiber_offset * std::pow(fz, susp.stable_exponent() / susp.rho()) +
          susp.fiber_scale * fy;
    p.z = 1.0;
    return p;
}

}  // namespace

FlowPoint flow_integrate(const SuspensionSpec& susp, FlowPoint p, double t) {
    {
        auto bad = susp.validate();
        if (!bad.empty()) throw contract_error("suspension spec violates: " + bad.front());
    }
    if (t < 0) throw domain_error("flow time must be >= 0");
    if (p.region == FlowPoint::Region::Saddle && !saddle_valid(p))
        throw domain_error("start point is outside the saddle chart");
    if (p.region == FlowPoint::Region::Tube &&
        (p.u < 0 || p.u >= 1 || std::abs(p.fy) > 1 || p.fz <= 0 || p.fz > 1))
        throw domain_error("start point is outside the tube chart");

    while (t > 0) {
        if (p.region == FlowPoint::Region::Saddle) {
            const double ax = std::abs(p.x);
            if (ax >= 1.0) {  // on an exit face
                FlowPoint q;
                q.region = FlowPoint::Region::Tube;
                q.side = p.x > 0 ? +1 : -1;
                q.u = 0;
                q.fy = p.y;
                q.fz = p.z;
                p = q;
                continue;
            }
            if (ax < 1e-300) {  // on the stable manifold of the saddle
                p.y *= std::exp(susp.lambda2 * t);
                p.z *= std::exp(susp.lambda3 * t);
                return p;
            }
            const double t_exit = -std::log(ax) / susp.lambda1;
            // absorb one-ulp shortfalls at the face crossing
            if (t < t_exit - 1e-12 * std::max(1.0, t_exit)) {
                p.x *= std::exp(susp.lambda1 * t);
                p.y *= std::exp(susp.lambda2 * t);
                p.z *= std::exp(susp.lambda3 * t);
                return p;
            }
            FlowPoint q;
            q.region = FlowPoint::Region::Tube;
            q.side = p.x > 0 ? +1 : -1;
            q.u = 0;
            q.fy = p.y * std::exp(susp.lambda2 * t_exit);
            q.fz = p.z * std::exp(susp.lambda3 * t_exit);
            p = q;
            t -= t_exit;
        } else {
            const double remaining = (1.0 - p.u) * susp.glue_time;
            if (t < remaining - 1e-12 * susp.glue_time) {
                p.u += t / susp.glue_time;
                return p;
            }
            t -= remaining;
            if (t < 0) t = 0;
            p = glue(susp, p.side, p.fy, p.fz);
        }
    }
    return p;
}

FlowBoxEstimate flow_box_volume(const SuspensionSpec& susp, double cover_area,
                                double epsilon) {
    if (epsilon < 0) throw domain_error("epsilon must be >= 0");
    if (epsilon > 0.05)
        throw contract_error("epsilon exceeds the self-intersection cap 0.05");
    const double min_return = -std::log(0.75) / susp.lambda1 + susp.glue_time;
    if (2 * epsilon >= min_return)
        throw contract_error("flow box would self-intersect: 2 epsilon >= min return time");
    FlowBoxEstimate est;
    est.epsilon = epsilon;
    est.section_area = cover_area;
    est.speed_factor = std::abs(susp.lambda3);  // transverse speed |z'| at z = 1
    est.volume = 2.0 * epsilon * cover_area * est.speed_factor;
    return est;
}

SectionStats cross_section_stats(const ReturnMapSpec& spec, int depth,
                                 const SubdivisionConfig& cfg, BoxCollection* final_cover) {
    {
        auto bad = spec.validate();
        if (!bad.empty()) throw contract_error("return map spec violates: " + bad.front());
    }
    if (depth > cfg.max_depth) throw resource_error("depth exceeds the configured cap");

    ModelHandle model(std::make_shared<const ReturnMapSpec>(spec), EvalMode::Floating);
    BoxCollection cover = BoxCollection::whole_root(2, {-0.75, -0.75, 0, 0},
                                                    {0.75, 0.75, 0, 0});
    SectionStats stats;
    stats.depths.push_back(0);
    stats.areas.push_back(cover.measure());
    stats.projections.push_back(cover.shadow_length(0));
    stats.box_counts.push_back(cover.size());
    for (int d = 1; d <= depth; ++d) {
        cover = subdivide_select(model, cover, cfg);
        stats.depths.push_back(d);
        stats.areas.push_back(cover.measure());
        stats.projections.push_back(cover.shadow_length(0));
        stats.box_counts.push_back(cover.size());
    }
    if (final_cover) *final_cover = std::move(cover);
    return stats;
}

}  // namespace avol
