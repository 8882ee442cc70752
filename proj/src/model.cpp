#include "avol/model.hpp"

#include "avol/errors.hpp"
#include "avol/geometric_lorenz.hpp"
#include "avol/solenoid.hpp"

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

ModelHandle::ModelHandle(Params params, EvalMode mode)
    : params_(std::move(params)), mode_(mode) {
    struct Init {
        ModelHandle& h;
        void operator()(const LinearMap1D& m) {
            h.dim_ = 1;
            h.chart_ = Chart::Interval;
            h.lo_ = {m.lo, 0, 0, 0};
            h.hi_ = {m.hi, 0, 0, 0};
        }
        void operator()(const DoublingMap&) {
            h.dim_ = 1;
            h.chart_ = Chart::Interval;
            h.lo_ = {0, 0, 0, 0};
            h.hi_ = {1, 0, 0, 0};
        }
        void operator()(const LorenzMapSpec& m) {
            h.dim_ = 1;
            h.chart_ = Chart::Interval;
            h.lo_ = {-0.75, 0, 0, 0};
            h.hi_ = {0.75, 0, 0, 0};
            h.lorenz_ = std::make_shared<LorenzMap>(m);
        }
        void operator()(const LinearMap2D& m) {
            h.dim_ = 2;
            h.chart_ = Chart::Square;
            h.lo_ = {m.lo, m.lo, 0, 0};
            h.hi_ = {m.hi, m.hi, 0, 0};
            h.invertible_ = m.m[0] * m.m[3] - m.m[1] * m.m[2] != 0;
        }
        void operator()(const std::shared_ptr<const ReturnMapSpec>& m) {
            h.dim_ = 2;
            h.chart_ = Chart::Square;
            h.lo_ = {-0.75, -0.75, 0, 0};
            h.hi_ = {0.75, 0.75, 0, 0};
            h.invertible_ = true;
            h.return_spec_ = m;
            h.lorenz_ = std::make_shared<LorenzMap>(m->base);
        }
        void operator()(const std::shared_ptr<const SuspensionSpec>& m) {
            h.dim_ = 3;
            h.chart_ = Chart::SuspensionSolid;
            h.lo_ = {-1, -1, 0, 0};
            h.hi_ = {1, 1, 1 + m->glue_time, 0};
            h.invertible_ = true;
            h.return_spec_ = std::make_shared<ReturnMapSpec>(derive_return_map(*m));
            h.lorenz_ = std::make_shared<LorenzMap>(h.return_spec_->base);
        }
        void operator()(const std::shared_ptr<const SolenoidSpec>& m) {
            h.dim_ = m->torus_dim + 2;
            h.chart_ = Chart::TorusDisk;
            h.lo_ = {0, 0, -1, -1};
            h.hi_ = {1, 1, 1, 1};
            if (m->torus_dim == 1) {
                h.lo_ = {0, -1, -1, 0};
                h.hi_ = {1, 1, 1, 0};
            }
            h.invertible_ = true;
        }
    };
    std::visit(Init{*this}, params_);
}

int ModelHandle::branch_id(const ModelPoint& p) const {
    struct Visitor {
        const ModelPoint& p;
        int operator()(const LinearMap1D&) const { return 0; }
        int operator()(const DoublingMap&) const { return p[0] < 0.5 ? 0 : 1; }
        int operator()(const LorenzMapSpec&) const { return p[0] < 0 ? 0 : 1; }
        int operator()(const LinearMap2D&) const { return 0; }
        int operator()(const std::shared_ptr<const ReturnMapSpec>&) const {
            return p[0] < 0 ? 0 : 1;
        }
        int operator()(const std::shared_ptr<const SuspensionSpec>&) const {
            return p[0] < 0 ? 0 : 1;
        }
        int operator()(const std::shared_ptr<const SolenoidSpec>& s) const {
            int id = 0;
            for (int i = 0; i < s->torus_dim; ++i)
                id = id * 4 + static_cast<int>(std::floor(2.0 * p[i])) % 4;
            return id;
        }
    };
    return std::visit(Visitor{p}, params_);
}

bool ModelHandle::in_domain(const ModelPoint& p) const {
    if (std::holds_alternative<LinearMap1D>(params_) ||
        std::holds_alternative<LinearMap2D>(params_)) {
        for (int i = 0; i < dim_; ++i)
            if (std::abs(p[i]) > 1e6) return false;
        return true;
    }
    for (int i = 0; i < dim_; ++i)
        if (p[i] < lo_[static_cast<std::size_t>(i)] - 1e-12 ||
            p[i] > hi_[static_cast<std::size_t>(i)] + 1e-12)
            return false;
    return true;
}

double ModelHandle::singular_distance(const ModelPoint& p) const {
    if (std::holds_alternative<LorenzMapSpec>(params_) ||
        std::holds_alternative<std::shared_ptr<const ReturnMapSpec>>(params_) ||
        std::holds_alternative<std::shared_ptr<const SuspensionSpec>>(params_))
        return std::abs(p[0]);
    return std::numeric_limits<double>::infinity();
}

std::optional<ModelPoint> ModelHandle::step(const ModelPoint& p) const {
    struct Visitor {
        const ModelHandle& h;
        const ModelPoint& p;

        std::optional<ModelPoint> operator()(const LinearMap1D& m) const {
            return ModelPoint::interval(m.slope * p[0] + m.offset);
        }
        std::optional<ModelPoint> operator()(const DoublingMap&) const {
            return ModelPoint::interval(wrap_unit(2.0 * p[0]));
        }
        std::optional<ModelPoint> operator()(const LorenzMapSpec& m) const {
            if (std::abs(p[0]) < m.singular_floor) return std::nullopt;
            if (h.mode_ == EvalMode::ExactPiecewise && h.lorenz_) {
                // exact orbits live on the cantor core; degrade elsewhere
                if (const auto* ce = std::get_if<CantorExtensionParams>(&m.params)) {
                    const Rational x = p.exact ? *p.exact : Rational(p[0]);
                    const Rational a = ce->cantor.branch_a(), b = ce->cantor.branch_b();
                    if ((x >= Rational(-1, 2) && x <= a) ||
                        (x >= b && x <= Rational(1, 2))) {
                        auto e = eval_map_exact(ce->cantor, x);
                        ModelPoint out = ModelPoint::interval(to_double(e.value));
                        out.exact = std::make_shared<const Rational>(e.value);
                        return out;
                    }
                }
            }
            return ModelPoint::interval(h.lorenz_->eval(p[0]).value);
        }
        std::optional<ModelPoint> operator()(const LinearMap2D& m) const {
            return ModelPoint::square(m.m[0] * p[0] + m.m[1] * p[1],
                                      m.m[2] * p[0] + m.m[3] * p[1]);
        }
        std::optional<ModelPoint> operator()(
            const std::shared_ptr<const ReturnMapSpec>& m) const {
            if (std::abs(p[0]) < m->base.singular_floor) return std::nullopt;
            auto r = return_step(*h.return_spec_, *h.lorenz_, p[0], p[1]);
            return ModelPoint::square(r.x, r.y);
        }
        std::optional<ModelPoint> operator()(
            const std::shared_ptr<const SuspensionSpec>&) const {
            // one model step = one return to the section
            if (std::abs(p[0]) < h.return_spec_->base.singular_floor) return std::nullopt;
            auto r = return_step(*h.return_spec_, *h.lorenz_, p[0], p[1]);
            ModelPoint out;
            out.chart = Chart::SuspensionSolid;
            out.dim = 3;
            out.coords = {r.x, r.y, 1.0, 0};
            return out;
        }
        std::optional<ModelPoint> operator()(
            const std::shared_ptr<const SolenoidSpec>& m) const {
            SolenoidPoint sp;
            const int k = m->torus_dim;
            for (int i = 0; i < k; ++i) sp.base[static_cast<std::size_t>(i)] = p[i];
            sp.fiber = {p[k], p[k + 1]};
            auto im = solenoid_step(*m, sp);
            ModelPoint out;
            out.chart = Chart::TorusDisk;
            out.dim = k + 2;
            for (int i = 0; i < k; ++i)
                out.coords[static_cast<std::size_t>(i)] = im.base[static_cast<std::size_t>(i)];
            out.coords[static_cast<std::size_t>(k)] = im.fiber[0];
            out.coords[static_cast<std::size_t>(k + 1)] = im.fiber[1];
            return out;
        }
    };
    return std::visit(Visitor{*this, p}, params_);
}

TangentMatrix ModelHandle::one_step_tangent(const ModelPoint& p) const {
    TangentMatrix t;
    t.dim = dim_;
    t.base = p;
    struct Visitor {
        const ModelHandle& h;
        const ModelPoint& p;
        TangentMatrix& t;

        void operator()(const LinearMap1D& m) const { t.at(0, 0) = m.slope; }
        void operator()(const DoublingMap&) const { t.at(0, 0) = 2.0; }
        void operator()(const LorenzMapSpec& m) const {
            if (std::abs(p[0]) < m.singular_floor)
                throw numeric_error("derivative overflow at the singular point");
            t.at(0, 0) = h.lorenz_->eval(p[0]).derivative;
        }
        void operator()(const LinearMap2D& m) const {
            t.at(0, 0) = m.m[0];
            t.at(0, 1) = m.m[1];
            t.at(1, 0) = m.m[2];
            t.at(1, 1) = m.m[3];
        }
        void operator()(const std::shared_ptr<const ReturnMapSpec>& m) const {
            if (std::abs(p[0]) < m->base.singular_floor)
                throw numeric_error("derivative overflow at the singular line");
            t = return_step(*h.return_spec_, *h.lorenz_, p[0], p[1]).tangent;
        }
        void operator()(const std::shared_ptr<const SuspensionSpec>&) const {
            if (std::abs(p[0]) < h.return_spec_->base.singular_floor)
                throw numeric_error("derivative overflow at the singular line");
            auto rt = return_step(*h.return_spec_, *h.lorenz_, p[0], p[1]).tangent;
            t.dim = 3;
            t.at(0, 0) = rt.at(0, 0);
            t.at(1, 0) = rt.at(1, 0);
            t.at(1, 1) = rt.at(1, 1);
            t.at(2, 2) = 1.0;
        }
        void operator()(const std::shared_ptr<const SolenoidSpec>& m) const {
            const int k = m->torus_dim;
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    t.at(i, j) = static_cast<double>(
                        m->matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
            const double lc = to_double(m->fiber_contraction);
            t.at(k, k) = lc;
            t.at(k + 1, k + 1) = lc;
            // d theta / d z_i
            for (int i = 0; i < k; ++i) {
                const double w = to_double(m->weights[static_cast<std::size_t>(i)]);
                const double ang = 2.0 * M_PI * p[i];
                t.at(k, i) = -w * 2.0 * M_PI * std::sin(ang);
                t.at(k + 1, i) = w * 2.0 * M_PI * std::cos(ang);
            }
        }
    };
    std::visit(Visitor{*this, p, t}, params_);
    return t;
}

OrbitResult orbit(const ModelHandle& model, const ModelPoint& start, long n) {
    if (n < 0) throw domain_error("step count must be >= 0");
    if (!model.in_domain(start)) throw domain_error("start point is outside the chart");
    OrbitResult out;
    out.points.reserve(static_cast<std::size_t>(n) + 1);
    out.points.push_back(start);
    ModelPoint cur = start;
    for (long k = 0; k < n; ++k) {
        auto next = model.step(cur);
        if (!next) {
            out.stopped_early = true;
            out.stop_index = k;
            out.stop_reason = "singular set hit";
            return out;
        }
        for (int i = 0; i < model.dim(); ++i)
            if (!std::isfinite((*next)[i]))
                throw numeric_error("non-finite coordinate along the orbit", k + 1);
        if (!model.in_domain(*next)) {
            out.stopped_early = true;
            out.stop_index = k;
            out.stop_reason = "left the chart domain";
            return out;
        }
        cur = *next;
        out.points.push_back(cur);
    }
    return out;
}

std::vector<TangentMatrix> tangent_along(const ModelHandle& model, const ModelPoint& start,
                                         long n) {
    auto orb = orbit(model, start, n);
    if (orb.stopped_early)
        throw numeric_error("orbit hit the singular set before " + std::to_string(n) +
                                " steps",
                            orb.stop_index);
    std::vector<TangentMatrix> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k)
        out.push_back(model.one_step_tangent(orb.points[static_cast<std::size_t>(k)]));
    return out;
}

bool ValidationReport::usable() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

ValidationReport validate_model(const ModelHandle& model) {
    ValidationReport rep;
    auto add = [&rep](const std::string& n, bool p, const std::string& d) {
        rep.checks.push_back({n, p, d});
    };
    struct Visitor {
        ValidationReport& rep;
        decltype(add)& push;

        void from_list(const std::vector<std::string>& bad, const std::string& scope) {
            if (bad.empty())
                push(scope, true, "ok");
            else
                for (const auto& b : bad) push(scope, false, b);
        }
        void operator()(const LinearMap1D& m) {
            push("interval-order", m.lo < m.hi, "lo < hi");
            push("finite-slope", std::isfinite(m.slope) && std::isfinite(m.offset), "");
        }
        void operator()(const DoublingMap&) { push("doubling", true, "no parameters"); }
        void operator()(const LorenzMapSpec& m) {
            auto pr = validate_properties(m);
            for (const auto& c : pr.checks) push(c.name, c.pass, c.witness);
        }
        void operator()(const LinearMap2D& m) {
            push("interval-order", m.lo < m.hi, "lo < hi");
            bool fin = true;
            for (double v : m.m) fin = fin && std::isfinite(v);
            push("finite-entries", fin, "");
        }
        void operator()(const std::shared_ptr<const ReturnMapSpec>& m) {
            from_list(m->validate(), "return-map");
            auto pr = validate_properties(m->base);
            for (const auto& c : pr.checks) push("base:" + c.name, c.pass, c.witness);
        }
        void operator()(const std::shared_ptr<const SuspensionSpec>& m) {
            from_list(m->validate(), "suspension");
        }
        void operator()(const std::shared_ptr<const SolenoidSpec>& m) {
            from_list(m->validate(), "solenoid");
        }
    };
    Visitor v{rep, add};
    std::visit(v, model.params());
    return rep;
}

}  // namespace avol
