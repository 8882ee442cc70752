#ifndef AVOL_MODEL_HPP
#define AVOL_MODEL_HPP

#include "avol/lorenz_map.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace avol {

enum class Chart { Interval, Square, SuspensionSolid, TorusDisk };

struct ModelPoint {
    Chart chart = Chart::Interval;
    int dim = 1;
    std::array<double, 4> coords{};
    // exact coordinate carried along cantor-machine orbits in exact mode
    std::shared_ptr<const Rational> exact;

    static ModelPoint interval(double x) { return {Chart::Interval, 1, {x, 0, 0, 0}, nullptr}; }
    static ModelPoint square(double x, double y) {
        return {Chart::Square, 2, {x, y, 0, 0}, nullptr};
    }
    double operator[](int i) const { return coords[static_cast<std::size_t>(i)]; }
};

struct TangentMatrix {
    int dim = 1;
    std::array<double, 16> entries{};  // row major
    ModelPoint base;

    double at(int r, int c) const {
        return entries[static_cast<std::size_t>(r * dim + c)];
    }
    double& at(int r, int c) { return entries[static_cast<std::size_t>(r * dim + c)]; }
};

// --- simple test models used by the diagnostics and their negative controls ---

struct LinearMap1D {
    double slope = 0.5, offset = 0.0;
    double lo = -1.0, hi = 1.0;
};

struct DoublingMap {};  // x -> 2x mod 1 on [0,1)

struct LinearMap2D {
    std::array<double, 4> m{0.5, 0, 0, 3.0};  // row major
    double lo = -1.0, hi = 1.0;               // square chart

    static LinearMap2D diagonal(double a, double b) { return {{a, 0, 0, b}, -1, 1}; }
    static LinearMap2D rotation90() { return {{0, -1, 1, 0}, -1, 1}; }
    static LinearMap2D identity() { return {{1, 0, 0, 1}, -1, 1}; }
};

struct ReturnMapSpec;  // geometric_lorenz.hpp
struct SuspensionSpec;
struct SolenoidSpec;  // solenoid.hpp

enum class EvalMode { Floating, ExactPiecewise };

// Uniform handle over the model zoo. Immutable after validation; all
// evaluation goes through free functions, safe to share across workers.
class ModelHandle {
  public:
    using Params = std::variant<LinearMap1D, DoublingMap, LorenzMapSpec, LinearMap2D,
                                std::shared_ptr<const ReturnMapSpec>,
                                std::shared_ptr<const SuspensionSpec>,
                                std::shared_ptr<const SolenoidSpec>>;

    ModelHandle(Params params, EvalMode mode);

    const Params& params() const { return params_; }
    EvalMode mode() const { return mode_; }
    int dim() const { return dim_; }
    Chart chart() const { return chart_; }
    bool invertible() const { return invertible_; }

    // chart bounding box, per axis
    std::array<double, 4> domain_lo() const { return lo_; }
    std::array<double, 4> domain_hi() const { return hi_; }

    // piecewise-branch label at a point (hull grouping in the subdivision)
    int branch_id(const ModelPoint& p) const;

    // one map step (or time-1 flow step); nullopt at a singular hit
    std::optional<ModelPoint> step(const ModelPoint& p) const;
    TangentMatrix one_step_tangent(const ModelPoint& p) const;

    bool in_domain(const ModelPoint& p) const;
    double singular_distance(const ModelPoint& p) const;  // +inf when no singular set

    const LorenzMap* lorenz() const { return lorenz_.get(); }

  private:
    Params params_;
    EvalMode mode_;
    int dim_ = 1;
    Chart chart_ = Chart::Interval;
    bool invertible_ = false;
    std::array<double, 4> lo_{}, hi_{};
    std::shared_ptr<const LorenzMap> lorenz_;            // cache for the lorenz kinds
    std::shared_ptr<const ReturnMapSpec> return_spec_;   // return map / suspension
};

struct OrbitResult {
    std::vector<ModelPoint> points;  // length <= n+1, starts at the seed
    bool stopped_early = false;
    long stop_index = -1;  // orbit index at which the singular set was hit
    std::string stop_reason;
};

OrbitResult orbit(const ModelHandle& model, const ModelPoint& start, long n);
std::vector<TangentMatrix> tangent_along(const ModelHandle& model, const ModelPoint& start,
                                         long n);

struct ValidationCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool usable() const;
};

ValidationReport validate_model(const ModelHandle& model);

}  // namespace avol

#endif
