#include "avol/volume_lab.hpp"
#include <sstream>

#include "avol/errors.hpp"
#include "avol/geometric_lorenz.hpp"
#include "avol/parallel.hpp"
#include "avol/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace avol {

namespace {
constexpr int kAxisBits = 21;
constexpr std::uint64_t kAxisMask = (std::uint64_t{1} << kAxisBits) - 1;
}  // namespace

BoxCollection::BoxCollection(int dim, std::array<double, 4> root_lo,
                             std::array<double, 4> root_hi)
    : dim_(dim), root_lo_(root_lo), root_hi_(root_hi) {
    if (dim < 1 || dim > 3) throw domain_error("box collections support dimensions 1..3");
}

BoxCollection BoxCollection::whole_root(int dim, std::array<double, 4> lo,
                                        std::array<double, 4> hi) {
    BoxCollection b(dim, lo, hi);
    b.depth_ = 0;
    b.boxes_ = {0};
    return b;
}

double BoxCollection::root_volume() const {
    double v = 1;
    for (int i = 0; i < dim_; ++i)
        v *= root_hi_[static_cast<std::size_t>(i)] - root_lo_[static_cast<std::size_t>(i)];
    return v;
}

double BoxCollection::box_volume() const {
    return root_volume() * std::pow(2.0, -static_cast<double>(depth_ * dim_));
}

double BoxCollection::measure() const {
    return static_cast<double>(boxes_.size()) * box_volume();
}

double BoxCollection::axis_width(int axis) const {
    const auto a = static_cast<std::size_t>(axis);
    return (root_hi_[a] - root_lo_[a]) * std::pow(2.0, -static_cast<double>(depth_));
}

double BoxCollection::shadow_length(int axis) const {
    std::vector<std::uint32_t> idx;
    idx.reserve(boxes_.size());
    for (auto key : boxes_) idx.push_back(unpack(key)[static_cast<std::size_t>(axis)]);
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return static_cast<double>(idx.size()) * axis_width(axis);
}

std::uint64_t BoxCollection::pack(const std::array<std::uint32_t, 4>& idx) const {
    std::uint64_t key = 0;
    for (int i = dim_ - 1; i >= 0; --i)
        key = (key << kAxisBits) | (idx[static_cast<std::size_t>(i)] & kAxisMask);
    return key;
}

std::array<std::uint32_t, 4> BoxCollection::unpack(std::uint64_t key) const {
    std::array<std::uint32_t, 4> idx{};
    for (int i = 0; i < dim_; ++i) {
        idx[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(key & kAxisMask);
        key >>= kAxisBits;
    }
    return idx;
}

std::array<double, 4> BoxCollection::box_lo(std::uint64_t key) const {
    auto idx = unpack(key);
    std::array<double, 4> lo{};
    for (int i = 0; i < dim_; ++i) {
        const auto a = static_cast<std::size_t>(i);
        lo[a] = root_lo_[a] + axis_width(i) * static_cast<double>(idx[a]);
    }
    return lo;
}

std::array<double, 4> BoxCollection::box_hi(std::uint64_t key) const {
    auto lo = box_lo(key);
    for (int i = 0; i < dim_; ++i) lo[static_cast<std::size_t>(i)] += axis_width(i);
    return lo;
}

bool BoxCollection::contains_point(const ModelPoint& p) const {
    std::array<std::uint32_t, 4> idx{};
    const std::uint32_t cells = std::uint32_t{1} << depth_;
    for (int i = 0; i < dim_; ++i) {
        const auto a = static_cast<std::size_t>(i);
        const double t = (p[i] - root_lo_[a]) / (root_hi_[a] - root_lo_[a]);
        if (t < 0 || t >= 1.0000000001) return false;
        auto cell = static_cast<std::int64_t>(t * cells);
        if (cell >= cells) cell = cells - 1;
        idx[a] = static_cast<std::uint32_t>(cell);
    }
    const std::uint64_t key = pack(idx);
    return std::binary_search(boxes_.begin(), boxes_.end(), key);
}

void BoxCollection::assign(int depth, std::vector<std::uint64_t> keys) {
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    depth_ = depth;
    boxes_ = std::move(keys);
}

namespace {

struct DepositSet {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;  // from child -> to child
    std::size_t failed_points = 0;
    std::size_t total_points = 0;
};

// images of one child's sample points, grouped by source branch, rasterized
// into the child grid as inset-compensated hulls plus raw random images
void deposit_child(const ModelHandle& model, const BoxCollection& parents,
                   std::uint64_t child_key, int child_depth, const SubdivisionConfig& cfg,
                   DepositSet& out) {
    const int dim = parents.dim();
    const double delta = cfg.stencil_inset;
    const auto root_lo = parents.root_lo();
    const auto root_hi = parents.root_hi();
    std::array<double, 4> width{};
    std::array<double, 4> lo{};
    {
        // child geometry at child_depth
        auto idx_arr = [&] {
            std::array<std::uint32_t, 4> idx{};
            std::uint64_t k = child_key;
            for (int i = 0; i < dim; ++i) {
                idx[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(k & kAxisMask);
                k >>= kAxisBits;
            }
            return idx;
        }();
        for (int i = 0; i < dim; ++i) {
            const auto a = static_cast<std::size_t>(i);
            width[a] = (root_hi[a] - root_lo[a]) * std::pow(2.0, -child_depth);
            lo[a] = root_lo[a] + width[a] * static_cast<double>(idx_arr[a]);
        }
    }

    struct Group {
        std::array<double, 4> smin{}, smax{};  // stencil image hull
        bool has_stencil = false;
        std::vector<std::array<double, 4>> random_images;
    };
    std::unordered_map<int, Group> groups;

    auto eval_point = [&](const std::array<double, 4>& coords, bool stencil) {
        ModelPoint p;
        p.chart = model.chart();
        p.dim = dim;
        p.coords = coords;
        ++out.total_points;
        auto img = model.step(p);
        if (!img) {
            ++out.failed_points;
            return;
        }
        bool finite = true;
        for (int i = 0; i < dim; ++i) finite = finite && std::isfinite((*img)[i]);
        if (!finite) {
            ++out.failed_points;
            return;
        }
        Group& g = groups[model.branch_id(p)];
        std::array<double, 4> ic{};
        for (int i = 0; i < dim; ++i) ic[static_cast<std::size_t>(i)] = (*img)[i];
        if (stencil) {
            if (!g.has_stencil) {
                g.smin = g.smax = ic;
                g.has_stencil = true;
            } else {
                for (int i = 0; i < dim; ++i) {
                    const auto a = static_cast<std::size_t>(i);
                    g.smin[a] = std::min(g.smin[a], ic[a]);
                    g.smax[a] = std::max(g.smax[a], ic[a]);
                }
            }
        } else {
            g.random_images.push_back(ic);
        }
    };

    // 3^dim stencil at fractions {delta, 1/2, 1-delta}
    const double fr[3] = {delta, 0.5, 1.0 - delta};
    int stencil_count = 1;
    for (int i = 0; i < dim; ++i) stencil_count *= 3;
    for (int s = 0; s < stencil_count; ++s) {
        std::array<double, 4> c{};
        int q = s;
        for (int i = 0; i < dim; ++i) {
            const auto a = static_cast<std::size_t>(i);
            c[a] = lo[a] + width[a] * fr[q % 3];
            q /= 3;
        }
        eval_point(c, true);
    }
    SplitMix64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(child_depth), child_key));
    for (int r = 0; r < cfg.random_per_box; ++r) {
        std::array<double, 4> c{};
        for (int i = 0; i < dim; ++i) {
            const auto a = static_cast<std::size_t>(i);
            c[a] = lo[a] + width[a] * rng.next_unit();
        }
        eval_point(c, false);
    }

    // rasterize each group's extended hull and its raw random images
    const std::uint32_t cells = std::uint32_t{1} << child_depth;
    auto cell_of = [&](double v, int axis, bool round_up) -> std::int64_t {
        const auto a = static_cast<std::size_t>(axis);
        const double t = (v - root_lo[a]) / (root_hi[a] - root_lo[a]);
        double scaled = t * static_cast<double>(cells);
        if (round_up) scaled -= 1e-9;
        return static_cast<std::int64_t>(std::floor(scaled));
    };
    auto push_box = [&](const std::array<std::int64_t, 4>& cell) {
        std::uint64_t key = 0;
        for (int i = dim - 1; i >= 0; --i) {
            const auto a = static_cast<std::size_t>(i);
            if (cell[a] < 0 || cell[a] >= static_cast<std::int64_t>(cells)) return;
            key = (key << kAxisBits) | static_cast<std::uint64_t>(cell[a]);
        }
        out.edges.emplace_back(child_key, key);
    };

    for (auto& [branch, g] : groups) {
        (void)branch;
        std::array<std::int64_t, 4> c_lo{}, c_hi{};
        bool hull_ok = g.has_stencil;
        if (g.has_stencil) {
            const double expand = delta / (1.0 - 2.0 * delta);
            std::int64_t cells_total = 1;
            for (int i = 0; i < dim && hull_ok; ++i) {
                const auto a = static_cast<std::size_t>(i);
                const double ext = (g.smax[a] - g.smin[a]) * expand;
                c_lo[a] = cell_of(g.smin[a] - ext, i, false);
                c_hi[a] = cell_of(g.smax[a] + ext, i, true);
                if (c_hi[a] < c_lo[a]) c_hi[a] = c_lo[a];
                cells_total *= (c_hi[a] - c_lo[a] + 1);
                if (cells_total > 4096) hull_ok = false;  // degenerate hull: points only
            }
            if (hull_ok) {
                std::array<std::int64_t, 4> cur = c_lo;
                while (true) {
                    push_box(cur);
                    int axis = 0;
                    while (axis < dim) {
                        const auto a = static_cast<std::size_t>(axis);
                        if (++cur[a] <= c_hi[a]) break;
                        cur[a] = c_lo[a];
                        ++axis;
                    }
                    if (axis == dim) break;
                }
            }
        }
        if (!hull_ok && g.has_stencil) {
            // fall back to the stencil hull corners as point deposits
            for (const auto& pt : {g.smin, g.smax}) {
                std::array<std::int64_t, 4> cell{};
                for (int i = 0; i < dim; ++i)
                    cell[static_cast<std::size_t>(i)] = cell_of(pt[static_cast<std::size_t>(i)], i, false);
                push_box(cell);
            }
        }
        for (const auto& pt : g.random_images) {
            std::array<std::int64_t, 4> cell{};
            for (int i = 0; i < dim; ++i)
                cell[static_cast<std::size_t>(i)] = cell_of(pt[static_cast<std::size_t>(i)], i, false);
            push_box(cell);
        }
    }
}

// iterative Tarjan SCC; returns per-node flag "on a cycle" (component size >= 2
// or an explicit self-loop)
std::vector<char> cycle_nodes(std::size_t n, const std::vector<std::vector<std::uint32_t>>& adj,
                              const std::vector<char>& self_loop) {
    std::vector<std::uint32_t> index(n, 0), low(n, 0);
    std::vector<char> on_stack(n, 0), visited(n, 0);
    std::vector<std::uint32_t> stack;
    std::vector<char> result(n, 0);
    std::uint32_t counter = 1;

    struct Frame {
        std::uint32_t node;
        std::size_t edge;
    };
    std::vector<Frame> call;
    for (std::uint32_t root = 0; root < n; ++root) {
        if (visited[root]) continue;
        call.push_back({root, 0});
        while (!call.empty()) {
            auto& fr = call.back();
            const std::uint32_t v = fr.node;
            if (fr.edge == 0) {
                visited[v] = 1;
                index[v] = low[v] = counter++;
                stack.push_back(v);
                on_stack[v] = 1;
            }
            bool descended = false;
            while (fr.edge < adj[v].size()) {
                const std::uint32_t w = adj[v][fr.edge++];
                if (!visited[w]) {
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[v] = std::min(low[v], index[w]);
            }
            if (descended) continue;
            if (low[v] == index[v]) {
                std::vector<std::uint32_t> comp;
                while (true) {
                    const std::uint32_t w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp.push_back(w);
                    if (w == v) break;
                }
                for (auto w : comp) result[w] = comp.size() >= 2 || self_loop[w];
            }
            call.pop_back();
            if (!call.empty()) {
                const std::uint32_t parent = call.back().node;
                low[parent] = std::min(low[parent], low[v]);
            }
        }
    }
    return result;
}

}  // namespace

BoxCollection subdivide_select(const ModelHandle& model, const BoxCollection& boxes,
                               const SubdivisionConfig& cfg) {
    if (model.dim() != boxes.dim())
        throw domain_error("model dimension does not match the box collection");
    if (boxes.depth() + 1 > cfg.max_depth)
        throw resource_error("subdivision beyond the configured max depth");
    const int dim = boxes.dim();
    const std::size_t child_count = boxes.size() << dim;
    if (child_count > cfg.box_cap) throw resource_error("box count exceeds the cap");
    const int child_depth = boxes.depth() + 1;

    // children of kept parents, sorted
    std::vector<std::uint64_t> children;
    children.reserve(child_count);
    for (auto parent : boxes.boxes()) {
        const auto idx = boxes.unpack(parent);
        for (int corner = 0; corner < (1 << dim); ++corner) {
            std::uint64_t key = 0;
            for (int i = dim - 1; i >= 0; --i) {
                const auto a = static_cast<std::size_t>(i);
                const std::uint64_t cell = (static_cast<std::uint64_t>(idx[a]) << 1) |
                                           static_cast<std::uint64_t>((corner >> i) & 1);
                key = (key << kAxisBits) | cell;
            }
            children.push_back(key);
        }
    }
    std::sort(children.begin(), children.end());

    // sampled transitions, per chunk then merged in chunk order
    const std::size_t nw = static_cast<std::size_t>(worker_count());
    std::vector<DepositSet> sets(std::max<std::size_t>(nw, 1) + 1);
    parallel_chunks(children.size(), [&](std::size_t chunk, std::size_t b, std::size_t e) {
        DepositSet local;
        for (std::size_t i = b; i < e; ++i)
            deposit_child(model, boxes, children[i], child_depth, cfg, local);
        sets[chunk % sets.size()] = std::move(local);
    });
    DepositSet all;
    for (auto& s : sets) {
        all.edges.insert(all.edges.end(), s.edges.begin(), s.edges.end());
        all.failed_points += s.failed_points;
        all.total_points += s.total_points;
    }
    if (all.total_points > 0 && all.failed_points * 2 > all.total_points)
        throw numeric_error("more than half of the test points hit the singular set");

    std::sort(all.edges.begin(), all.edges.end());
    all.edges.erase(std::unique(all.edges.begin(), all.edges.end()), all.edges.end());

    // forward pass: children receiving a deposit (targets restricted to the
    // refined family)
    std::vector<std::uint64_t> kept;
    {
        std::vector<std::uint64_t> targets;
        targets.reserve(all.edges.size());
        for (const auto& e : all.edges) targets.push_back(e.second);
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
        std::set_intersection(targets.begin(), targets.end(), children.begin(),
                              children.end(), std::back_inserter(kept));
    }

    auto prune_round = [&](std::vector<std::uint64_t>& alive, bool need_out, bool need_in) {
        // retain nodes with an out-edge into `alive` (and, when requested,
        // an in-edge from `alive`); iterate to a fixed point
        while (true) {
            std::vector<std::uint64_t> next;
            std::vector<char> has_out(alive.size(), 0), has_in(alive.size(), 0);
            for (const auto& e : all.edges) {
                auto from = std::lower_bound(alive.begin(), alive.end(), e.first);
                auto to = std::lower_bound(alive.begin(), alive.end(), e.second);
                const bool from_ok = from != alive.end() && *from == e.first;
                const bool to_ok = to != alive.end() && *to == e.second;
                if (from_ok && to_ok) {
                    has_out[static_cast<std::size_t>(from - alive.begin())] = 1;
                    has_in[static_cast<std::size_t>(to - alive.begin())] = 1;
                }
            }
            for (std::size_t i = 0; i < alive.size(); ++i)
                if ((!need_out || has_out[i]) && (!need_in || has_in[i]))
                    next.push_back(alive[i]);
            if (next.size() == alive.size()) return;
            alive = std::move(next);
        }
    };

    if (cfg.backward_pass && model.invertible() && !kept.empty())
        prune_round(kept, true, false);

    if (cfg.recurrence_prune && !kept.empty()) {
        // keep boxes on sampled-transition cycles
        std::vector<std::vector<std::uint32_t>> adj(kept.size());
        std::vector<char> self_loop(kept.size(), 0);
        for (const auto& e : all.edges) {
            auto from = std::lower_bound(kept.begin(), kept.end(), e.first);
            auto to = std::lower_bound(kept.begin(), kept.end(), e.second);
            if (from == kept.end() || *from != e.first) continue;
            if (to == kept.end() || *to != e.second) continue;
            const auto fi = static_cast<std::uint32_t>(from - kept.begin());
            const auto ti = static_cast<std::uint32_t>(to - kept.begin());
            if (fi == ti)
                self_loop[fi] = 1;
            else
                adj[fi].push_back(ti);
        }
        auto on_cycle = cycle_nodes(kept.size(), adj, self_loop);
        std::vector<std::uint64_t> recurrent;
        for (std::size_t i = 0; i < kept.size(); ++i)
            if (on_cycle[i]) recurrent.push_back(kept[i]);
        kept = std::move(recurrent);
    }

    BoxCollection out(dim, boxes.root_lo(), boxes.root_hi());
    out.assign(child_depth, std::move(kept));
    return out;
}

ClassifyResult fit_classify(const VolumeSeries& series, int window,
                            double plateau_threshold) {
    if (window < 3) throw domain_error("window must be >= 3");
    if (static_cast<std::size_t>(window) > series.measure.size())
        throw domain_error("window larger than the series");
    ClassifyResult res;
    res.window = window;
    res.threshold = plateau_threshold;
    const std::size_t n = series.measure.size();
    const std::size_t b = n - static_cast<std::size_t>(window);
    for (std::size_t i = b; i < n; ++i)
        if (!(series.measure[i] > 0)) {
            res.cls = SeriesClass::DecayToZero;
            res.slope = -std::numeric_limits<double>::infinity();
            return res;
        }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = b; i < n; ++i) {
        const double x = series.parameter[i];
        const double y = std::log(series.measure[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double w = static_cast<double>(window);
    res.slope = (w * sxy - sx * sy) / (w * sxx - sx * sx);
    res.cls = std::abs(res.slope) < plateau_threshold ? SeriesClass::Plateau
                                                      : SeriesClass::DecayToZero;
    return res;
}

namespace {

// unique return-map preimage of a section point, when it exists
std::optional<std::pair<double, double>> section_preimage(const ReturnMapSpec& spec,
                                                          const LorenzMap& base, double x,
                                                          double y) {
    for (int sign : {-1, +1}) {
        auto xp = base.inverse(sign, x);
        if (!xp) continue;
        if (std::abs(*xp) < spec.base.singular_floor || std::abs(*xp) > 0.75) continue;
        const double axs = std::pow(std::abs(*xp), spec.stable_exponent);
        const double sgn = *xp > 0 ? 1.0 : -1.0;
        const double yp = (y - sgn * spec.fiber_offset * axs) / (spec.fiber_scale * axs);
        if (std::abs(yp) <= 0.75) return std::make_pair(*xp, yp);
    }
    return std::nullopt;
}

struct RoofGeometry {
    const SuspensionSpec& susp;
    const ReturnMapSpec rm;
    const LorenzMap base;
    double tau_cap;

    RoofGeometry(const SuspensionSpec& s, double cap)
        : susp(s), rm(derive_return_map(s)), base(rm.base), tau_cap(cap) {}

    double roof(double x) const {
        return std::min(-std::log(std::abs(x)) / susp.lambda1 + susp.glue_time, tau_cap);
    }
    bool valid(double x, double y, double tau) const {
        return std::abs(x) <= 0.75 && std::abs(x) > 1e-12 && std::abs(y) <= 0.75 &&
               tau >= 0 && tau < roof(x);
    }
    // time the backward orbit survives inside the system, capped
    double backward_survival(double x, double y, double tau, double cap) const {
        double t = tau;
        for (int guard = 0; guard < 100000 && t < cap; ++guard) {
            auto pre = section_preimage(rm, base, x, y);
            if (!pre) return t;
            x = pre->first;
            y = pre->second;
            t += -std::log(std::abs(x)) / susp.lambda1 + susp.glue_time;
        }
        return t;
    }
};

}  // namespace

VolumeSeries trapped_volume_series(const SuspensionSpec& susp, const TrapRegion& region,
                                   double t_max, int grid_depth, std::uint64_t seed) {
    {
        auto bad = susp.validate();
        if (!bad.empty()) throw contract_error("suspension spec violates: " + bad.front());
    }
    if (grid_depth < 1 || grid_depth > 12) throw domain_error("grid depth must be 1..12");
    if (!(t_max > 0)) throw domain_error("t_max must be positive");
    RoofGeometry geo(susp, region.tau_cap);

    // trapping verification on samples: forward return stays inside the section
    {
        SplitMix64 rng(mix_seed(seed, 0x7A));
        for (int i = 0; i < 256; ++i) {
            const double x = -0.75 + 1.5 * rng.next_unit();
            const double y = -0.75 + 1.5 * rng.next_unit();
            if (std::abs(x) < 1e-9) continue;
            auto r = return_step(geo.rm, geo.base, x, y);
            if (std::abs(r.x) > 0.75 || std::abs(r.y) > 0.75) {
                std::ostringstream os;
                os << "forward orbit of (" << x << ", " << y << ") exits the section";
                throw contract_error("region is not trapping", os.str());
            }
        }
    }

    const std::uint32_t cells = std::uint32_t{1} << grid_depth;
    const double wx = 1.5 / cells, wy = 1.5 / cells, wt = region.tau_cap / cells;
    const double box_vol = wx * wy * wt;

    const int t_steps = static_cast<int>(std::floor(t_max)) + 1;
    const std::size_t total = static_cast<std::size_t>(cells) * cells * cells;

    struct ChunkStats {
        std::vector<std::size_t> box_survivors, sample_survivors;
        std::size_t valid_samples = 0;
    };
    const std::size_t slots = static_cast<std::size_t>(worker_count()) + 1;
    std::vector<ChunkStats> stats(slots);
    for (auto& s : stats) {
        s.box_survivors.assign(static_cast<std::size_t>(t_steps), 0);
        s.sample_survivors.assign(static_cast<std::size_t>(t_steps), 0);
    }

    parallel_chunks(total, [&](std::size_t chunk, std::size_t bgn, std::size_t end) {
        ChunkStats& st = stats[chunk % slots];
        for (std::size_t i = bgn; i < end; ++i) {
            const std::uint32_t ix = static_cast<std::uint32_t>(i % cells);
            const std::uint32_t iy = static_cast<std::uint32_t>((i / cells) % cells);
            const std::uint32_t it = static_cast<std::uint32_t>(i / (cells * cells));
            SplitMix64 rng(mix_seed(seed, i, 0xB0));
            double best = -1.0;
            for (int s = 0; s < region.samples_per_box; ++s) {
                const double x = -0.75 + wx * (ix + rng.next_unit());
                const double y = -0.75 + wy * (iy + rng.next_unit());
                const double tau = wt * (it + rng.next_unit());
                if (!geo.valid(x, y, tau)) continue;
                ++st.valid_samples;
                const double surv = geo.backward_survival(x, y, tau, t_max + 1);
                best = std::max(best, surv);
                for (int T = 0; T < t_steps; ++T)
                    if (surv >= T) ++st.sample_survivors[static_cast<std::size_t>(T)];
            }
            if (best >= 0)
                for (int T = 0; T < t_steps; ++T)
                    if (best >= T) ++st.box_survivors[static_cast<std::size_t>(T)];
        }
    });

    std::size_t valid_samples = 0;
    std::vector<std::size_t> box_survivors(static_cast<std::size_t>(t_steps), 0);
    std::vector<std::size_t> sample_survivors(static_cast<std::size_t>(t_steps), 0);
    for (const auto& st : stats) {
        valid_samples += st.valid_samples;
        for (int T = 0; T < t_steps; ++T) {
            box_survivors[static_cast<std::size_t>(T)] +=
                st.box_survivors[static_cast<std::size_t>(T)];
            sample_survivors[static_cast<std::size_t>(T)] +=
                st.sample_survivors[static_cast<std::size_t>(T)];
        }
    }

    VolumeSeries series;
    for (int T = 0; T < t_steps; ++T) {
        const auto tt = static_cast<std::size_t>(T);
        series.parameter.push_back(T);
        series.measure.push_back(static_cast<double>(box_survivors[tt]) * box_vol);
        series.box_count.push_back(box_survivors[tt]);
        series.fraction.push_back(valid_samples == 0
                                      ? 0.0
                                      : static_cast<double>(sample_survivors[tt]) /
                                            static_cast<double>(valid_samples));
    }
    return series;
}

EscapeResult escape_fraction(const ModelHandle& model, std::array<double, 4> region_lo,
                             std::array<double, 4> region_hi, std::size_t samples, double t,
                             std::uint64_t seed, FlowDirection dir) {
    if (samples < 1) throw domain_error("need at least one sample");
    const int steps = static_cast<int>(t);
    const int dim = model.dim();

    std::size_t survived = 0;
    const std::size_t nw = static_cast<std::size_t>(worker_count());
    std::vector<std::size_t> counts(std::max<std::size_t>(nw, 1) + 1, 0);

    const ReturnMapSpec* rspec = nullptr;
    if (dir == FlowDirection::Backward) {
        if (auto* p = std::get_if<std::shared_ptr<const ReturnMapSpec>>(&model.params()))
            rspec = p->get();
        else
            throw contract_error("backward escape needs an invertible return map");
    }

    parallel_chunks(samples, [&](std::size_t chunk, std::size_t b, std::size_t e) {
        std::size_t local = 0;
        LorenzMap base_local = rspec ? LorenzMap(rspec->base) : LorenzMap(LorenzMapSpec{});
        for (std::size_t i = b; i < e; ++i) {
            SplitMix64 rng(mix_seed(seed, i, 0xE5));
            ModelPoint p;
            p.chart = model.chart();
            p.dim = dim;
            for (int d = 0; d < dim; ++d) {
                const auto a = static_cast<std::size_t>(d);
                p.coords[a] = region_lo[a] + (region_hi[a] - region_lo[a]) * rng.next_unit();
            }
            bool alive = true;
            if (dir == FlowDirection::Forward) {
                ModelPoint cur = p;
                for (int k = 0; k < steps && alive; ++k) {
                    auto next = model.step(cur);
                    if (!next) {
                        alive = false;
                        break;
                    }
                    for (int d = 0; d < dim; ++d) {
                        const auto a = static_cast<std::size_t>(d);
                        if ((*next)[d] < region_lo[a] || (*next)[d] > region_hi[a]) alive = false;
                    }
                    cur = *next;
                }
            } else {
                double x = p[0], y = p[1];
                for (int k = 0; k < steps && alive; ++k) {
                    auto pre = section_preimage(*rspec, base_local, x, y);
                    if (!pre) {
                        alive = false;
                        break;
                    }
                    x = pre->first;
                    y = pre->second;
                }
            }
            if (alive) ++local;
        }
        counts[chunk % counts.size()] += local;
    });
    for (auto c : counts) survived += c;

    EscapeResult res;
    res.samples = samples;
    res.fraction = static_cast<double>(survived) / static_cast<double>(samples);
    res.std_error =
        std::sqrt(std::max(res.fraction * (1 - res.fraction), 1.0 / static_cast<double>(samples)) /
                  static_cast<double>(samples));
    return res;
}

EscapeResult escape_fraction(const SuspensionSpec& susp, const TrapRegion& region,
                             std::size_t samples, double t, std::uint64_t seed) {
    if (samples < 1) throw domain_error("need at least one sample");
    RoofGeometry geo(susp, region.tau_cap);
    std::size_t survived = 0, accepted = 0;
    SplitMix64 rng(mix_seed(seed, 0xF1));
    std::size_t guard = 0;
    while (accepted < samples && guard < samples * 1000) {
        ++guard;
        const double x = -0.75 + 1.5 * rng.next_unit();
        const double y = -0.75 + 1.5 * rng.next_unit();
        const double tau = region.tau_cap * rng.next_unit();
        if (!geo.valid(x, y, tau)) continue;
        ++accepted;
        if (geo.backward_survival(x, y, tau, t + 1) >= t) ++survived;
    }
    EscapeResult res;
    res.samples = accepted;
    res.fraction = accepted ? static_cast<double>(survived) / static_cast<double>(accepted) : 0;
    res.std_error = std::sqrt(
        std::max(res.fraction * (1 - res.fraction), 1.0 / static_cast<double>(accepted)) /
        static_cast<double>(accepted));
    return res;
}

}  // namespace avol
