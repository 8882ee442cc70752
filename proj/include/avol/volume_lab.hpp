#ifndef AVOL_VOLUME_LAB_HPP
#define AVOL_VOLUME_LAB_HPP

#include "avol/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace avol {

// Uniform dyadic box cover: every axis refined `depth` times relative to the
// root box, boxes stored as packed multi-indices (21 bits per axis).
class BoxCollection {
  public:
    BoxCollection() = default;
    BoxCollection(int dim, std::array<double, 4> root_lo, std::array<double, 4> root_hi);

    static BoxCollection whole_root(int dim, std::array<double, 4> lo,
                                    std::array<double, 4> hi);

    int dim() const { return dim_; }
    int depth() const { return depth_; }
    std::size_t size() const { return boxes_.size(); }
    const std::vector<std::uint64_t>& boxes() const { return boxes_; }

    double root_volume() const;
    double box_volume() const;      // per box
    double measure() const;         // count * box volume
    double axis_width(int axis) const;
    double shadow_length(int axis) const;  // measure of the axis-shadow union

    std::uint64_t pack(const std::array<std::uint32_t, 4>& idx) const;
    std::array<std::uint32_t, 4> unpack(std::uint64_t key) const;
    std::array<double, 4> box_lo(std::uint64_t key) const;
    std::array<double, 4> box_hi(std::uint64_t key) const;
    bool contains_point(const ModelPoint& p) const;  // inside some box

    std::array<double, 4> root_lo() const { return root_lo_; }
    std::array<double, 4> root_hi() const { return root_hi_; }

    // sorted unique keys at the stated depth
    void assign(int depth, std::vector<std::uint64_t> keys);

  private:
    int dim_ = 1;
    int depth_ = 0;
    std::array<double, 4> root_lo_{}, root_hi_{};
    std::vector<std::uint64_t> boxes_;  // sorted
};

struct SubdivisionConfig {
    int random_per_box = 8;       // seeded interior points per box
    int max_depth = 24;
    std::uint64_t seed = 1;
    std::size_t box_cap = std::size_t{1} << 26;
    bool backward_pass = true;    // require each kept box to map into the kept set
    bool recurrence_prune = true; // keep boxes on sampled-transition cycles
    double stencil_inset = 1.0 / 16.0;
};

// One full refinement round: bisect every axis (cyclically), keep the children
// hit by sampled image hulls, prune children whose own images miss the kept
// set, then keep the recurrent part of the sampled box-transition graph.
// Deterministic for any worker count.
BoxCollection subdivide_select(const ModelHandle& model, const BoxCollection& boxes,
                               const SubdivisionConfig& cfg);

struct VolumeSeries {
    std::vector<double> parameter;  // depth or time
    std::vector<double> measure;
    std::vector<std::size_t> box_count;
    // stratified surviving-sample fraction, when the series is sample-backed
    std::vector<double> fraction;
};

enum class SeriesClass { DecayToZero, Plateau };

struct ClassifyResult {
    SeriesClass cls = SeriesClass::DecayToZero;
    double slope = 0;  // least-squares d(log m)/d(param) over the window
    int window = 0;
    double threshold = 0;
};

ClassifyResult fit_classify(const VolumeSeries& series, int window,
                            double plateau_threshold = 0.01);

// Trapped-set volume series for the suspension in roof coordinates
// (x, y, tau), tau in [0, min(return time, tau_cap)): a grid box survives to
// time T when one of its samples has a backward orbit staying in the system
// through time T. Exactly non-increasing by construction.
struct SuspensionSpec;

struct TrapRegion {
    double tau_cap = 4.0;
    int samples_per_box = 2;  // backward-orbit samples per grid box
};

VolumeSeries trapped_volume_series(const SuspensionSpec& susp, const TrapRegion& region,
                                   double t_max, int grid_depth, std::uint64_t seed);

enum class FlowDirection { Forward, Backward };

struct EscapeResult {
    double fraction = 0;
    double std_error = 0;
    std::size_t samples = 0;
};

// Fraction of seeded uniform samples of the region box whose orbit stays in
// the region through T steps. Backward direction follows inverse images and
// so estimates the measure fraction of the T-step forward image.
EscapeResult escape_fraction(const ModelHandle& model, std::array<double, 4> region_lo,
                             std::array<double, 4> region_hi, std::size_t samples, double t,
                             std::uint64_t seed, FlowDirection dir = FlowDirection::Forward);

// Suspension version over the roof region (the #10 oracle).
EscapeResult escape_fraction(const SuspensionSpec& susp, const TrapRegion& region,
                             std::size_t samples, double t, std::uint64_t seed);

}  // namespace avol

#endif
