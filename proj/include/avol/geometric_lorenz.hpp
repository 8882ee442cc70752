#ifndef AVOL_GEOMETRIC_LORENZ_HPP
#define AVOL_GEOMETRIC_LORENZ_HPP

#include "avol/lorenz_map.hpp"
#include "avol/model.hpp"

#include <string>
#include <vector>

namespace avol {

// Piecewise-linear geometric Lorenz suspension: a linear saddle chart with
// eigenvalues lambda1 > 0 > lambda3 > lambda2, entry section
// Sigma = [-3/4,3/4]^2 at height z = 1, exit faces |x| = 1, and gluing maps
// returning the exit faces to Sigma after a fixed transit time.
struct SuspensionSpec {
    double lambda1 = 1.0;
    double lambda2 = -1.2;
    double lambda3 = -0.75;
    double glue_scale = 1.8;    // beta: x_new = sign (beta z' - 3/4)
    double fiber_offset = 0.4;  // B
    double fiber_scale = 0.25;  // kappa
    double glue_time = 0.5;     // tau_g

    double rho() const { return -lambda3 / lambda1; }
    double stable_exponent() const { return -lambda2 / lambda1; }

    std::vector<std::string> validate() const;
};

// Cross-section return map P(x,y) = (f(x), g(x,y)) with the triangular
// tangent; the vertical foliation is exactly invariant.
struct ReturnMapSpec {
    LorenzMapSpec base;
    double fiber_offset = 0.4;    // B
    double fiber_scale = 0.25;    // kappa
    double stable_exponent = 1.2; // s

    std::vector<std::string> validate() const;
    double fiber_contraction_bound() const;  // kappa (3/4)^s
    double base_derivative_floor() const;
};

ReturnMapSpec derive_return_map(const SuspensionSpec& susp);

struct ReturnStep {
    double x = 0, y = 0;
    TangentMatrix tangent;
};

ReturnStep return_step(const ReturnMapSpec& spec, double x, double y);
// overload with a prepared base map, for orbit-heavy callers
ReturnStep return_step(const ReturnMapSpec& spec, const LorenzMap& base, double x, double y);

// Flow state: either inside the saddle chart or in transit through a gluing
// tube (progress u in [0,1] carrying the exit-face coordinates).
struct FlowPoint {
    enum class Region { Saddle, Tube };
    Region region = Region::Saddle;
    double x = 0, y = 0, z = 1;   // saddle coordinates
    int side = 0;                 // tube: exit face sign
    double u = 0, fy = 0, fz = 0; // tube: progress and face coordinates

    static FlowPoint on_section(double x, double y) {
        FlowPoint p;
        p.x = x;
        p.y = y;
        p.z = 1;
        return p;
    }
};

// Piecewise-exact integration (closed forms in the saddle, affine transit in
// the tubes). Throws domain_error when the start is outside the charts.
FlowPoint flow_integrate(const SuspensionSpec& susp, FlowPoint p, double t);

// time for the trajectory from section point (x, y) to return to the section
double return_time(const SuspensionSpec& susp, double x);

struct FlowBoxEstimate {
    double epsilon = 0;
    double section_area = 0;
    double speed_factor = 0;
    double volume = 0;  // 2 epsilon * area * speed factor, a lower-bound product
};

class BoxCollection;  // volume_lab.hpp
struct SubdivisionConfig;

FlowBoxEstimate flow_box_volume(const SuspensionSpec& susp, double cover_area,
                                double epsilon);

struct SectionStats {
    std::vector<int> depths;
    std::vector<double> areas;
    std::vector<double> projections;  // x-shadow lengths
    std::vector<std::size_t> box_counts;
};

// Box cover of the section attractor via the subdivision engine; returns the
// per-depth series and the final cover through the out parameter.
SectionStats cross_section_stats(const ReturnMapSpec& spec, int depth,
                                 const SubdivisionConfig& cfg, BoxCollection* final_cover);

}  // namespace avol

#endif
