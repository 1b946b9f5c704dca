#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "packlab/geometry.hpp"
#include "packlab/text.hpp"

namespace packlab {

// Finite stand-in for the plane, centred at the origin. A torus identifies
// opposite sides of [-w/2, w/2) x [-h/2, h/2); a box is the closed rectangle.
struct Window {
    enum class Kind { torus, box };

    Kind kind = Kind::torus;
    double width = 1.0;
    double height = 1.0;

    static Window torus(double w, double h) { return make(Kind::torus, w, h); }
    static Window box(double w, double h) { return make(Kind::box, w, h); }

    bool is_torus() const { return kind == Kind::torus; }
    double area() const { return width * height; }
    Rect domain() const { return Rect::centered({}, 0.5 * width, 0.5 * height); }

    Vec2 wrap(Vec2 p) const {
        if (!is_torus()) {
            return p;
        }
        p.x -= width * std::floor((p.x + 0.5 * width) / width);
        p.y -= height * std::floor((p.y + 0.5 * height) / height);
        return p;
    }

    // Shortest displacement from a to b.
    Vec2 delta(Vec2 a, Vec2 b) const {
        Vec2 d = b - a;
        if (is_torus()) {
            d.x -= width * std::round(d.x / width);
            d.y -= height * std::round(d.y / height);
        }
        return d;
    }

    Window scaled(double s) const { return make(kind, s * width, s * height); }

    friend bool operator==(const Window&, const Window&) = default;

private:
    static Window make(Kind k, double w, double h) {
        require(std::isfinite(w) && std::isfinite(h) && w > 0.0 && h > 0.0, "window dimensions must be positive");
        Window out;
        out.kind = k;
        out.width = w;
        out.height = h;
        return out;
    }
};

// One copy of the body in the plane: placement index plus the periodic offset
// that produced it (zero for boxes).
struct Instance {
    std::size_t index = 0;
    int kx = 0;
    int ky = 0;
    PlacedShape shape;
};

// Immutable packing value. Construction validates pairwise disjoint interiors
// (periodic images included) and box containment.
class Packing {
public:
    Packing(Body body, Window window, std::vector<Placement> placements)
        : body_(std::move(body)), window_(window), placements_(std::move(placements)) {
        for (Placement& p : placements_) {
            p.iso.translation = window_.wrap(p.iso.translation);
        }
        if (window_.is_torus()) {
            require(body_.diameter() < std::min(window_.width, window_.height) + eps_geom,
                    "torus window must be at least one body diameter in each direction");
        }
        validate();
    }

    const Body& body() const { return body_; }
    const Window& window() const { return window_; }
    const std::vector<Placement>& placements() const { return placements_; }
    std::size_t size() const { return placements_.size(); }
    bool empty() const { return placements_.empty(); }

    PlacedShape shape(std::size_t i) const { return place(body_, placements_[i]); }

    // Visits every copy (periodic images included) whose bounding box meets q.
    void for_each_instance(const Rect& q, const std::function<void(const Instance&)>& fn) const {
        for (std::size_t i = 0; i < placements_.size(); ++i) {
            visit_images(i, q, fn);
        }
    }

    std::vector<Instance> instances(const Rect& q) const {
        std::vector<Instance> out;
        for_each_instance(q, [&](const Instance& inst) { out.push_back(inst); });
        return out;
    }

    void visit_images(std::size_t i, const Rect& q, const std::function<void(const Instance&)>& fn) const {
        const PlacedShape base = shape(i);
        const Rect b = base.bbox();
        if (!window_.is_torus()) {
            if (b.intersects(q)) {
                fn(Instance{i, 0, 0, base});
            }
            return;
        }
        const double w = window_.width;
        const double h = window_.height;
        const int kx0 = static_cast<int>(std::ceil((q.xmin - b.xmax) / w));
        const int kx1 = static_cast<int>(std::floor((q.xmax - b.xmin) / w));
        const int ky0 = static_cast<int>(std::ceil((q.ymin - b.ymax) / h));
        const int ky1 = static_cast<int>(std::floor((q.ymax - b.ymin) / h));
        for (int kx = kx0; kx <= kx1; ++kx) {
            for (int ky = ky0; ky <= ky1; ++ky) {
                const Vec2 off{kx * w, ky * h};
                fn(Instance{i, kx, ky, place(body_, placements_[i], off)});
            }
        }
    }

    // Brute-force all-pairs validity check; throws ErrorKind::invariant naming
    // the first violated pair.
    void validate() const {
        const Rect dom = window_.domain();
        std::vector<PlacedShape> shapes;
        shapes.reserve(placements_.size());
        for (std::size_t i = 0; i < placements_.size(); ++i) {
            shapes.push_back(shape(i));
            if (!window_.is_torus()) {
                const Rect b = shapes.back().bbox();
                if (b.xmin < dom.xmin - eps_geom || b.xmax > dom.xmax + eps_geom || b.ymin < dom.ymin - eps_geom ||
                    b.ymax > dom.ymax + eps_geom) {
                    fail(ErrorKind::invariant, "placement " + std::to_string(i) + " leaves the box window");
                }
            }
        }
        for (std::size_t i = 0; i < shapes.size(); ++i) {
            const Rect bi = shapes[i].bbox();
            for (std::size_t j = i; j < shapes.size(); ++j) {
                visit_images(j, bi.expanded(eps_geom), [&](const Instance& other) {
                    if (i == j && other.kx == 0 && other.ky == 0) {
                        return;
                    }
                    if (shapes_overlap(shapes[i], other.shape)) {
                        fail(ErrorKind::invariant, "placements " + std::to_string(i) + " and " + std::to_string(j) +
                                                       " overlap");
                    }
                });
            }
        }
    }

private:
    Body body_;
    Window window_;
    std::vector<Placement> placements_;
};

inline Packing with_placements(const Packing& p, std::vector<Placement> placements) {
    return Packing(p.body(), p.window(), std::move(placements));
}

// Shift every placement by t (torus positions wrap).
inline Packing translate(const Packing& p, Vec2 t) {
    std::vector<Placement> ps = p.placements();
    for (Placement& q : ps) {
        q.iso.translation += t;
    }
    return with_placements(p, std::move(ps));
}

// Apply one isometry to the whole packing (box windows must still contain it).
inline Packing transform(const Packing& p, const Isometry& g) {
    std::vector<Placement> ps;
    ps.reserve(p.size());
    for (const Placement& q : p.placements()) {
        ps.push_back(Placement{g.after(q.iso)});
    }
    return with_placements(p, std::move(ps));
}

// Uniform-grid bucket index over instances, for neighbourhood queries.
class InstanceIndex {
public:
    InstanceIndex(const Packing& p, const Rect& cover) {
        // Bucket size is at least a body diameter; huge covers get coarser
        // buckets rather than a huge table.
        cell_ = std::max({2.0 * p.body().radius(), 1e-6, std::sqrt(cover.area() / 1e6)});
        reach_ = p.body().radius();
        origin_ = {cover.xmin, cover.ymin};
        nx_ = std::max(1, static_cast<int>(std::ceil(cover.width() / cell_)) + 1);
        ny_ = std::max(1, static_cast<int>(std::ceil(cover.height() / cell_)) + 1);
        buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
        p.for_each_instance(cover.expanded(reach_), [&](const Instance& inst) { add(inst); });
    }

    void add(const Instance& inst) {
        items_.push_back(inst);
        buckets_[bucket_of(inst.shape.center)].push_back(items_.size() - 1);
    }

    // Calls fn on every instance whose reference point is within `r` of p
    // (plus the instance circumradius), i.e. every instance that may meet
    // disc(p, r).
    template <typename Fn>
    void near(Vec2 p, double r, Fn&& fn) const {
        const double reach = r + reach_;
        const int ix0 = clamp_x(static_cast<int>(std::floor((p.x - reach - origin_.x) / cell_)));
        const int ix1 = clamp_x(static_cast<int>(std::floor((p.x + reach - origin_.x) / cell_)));
        const int iy0 = clamp_y(static_cast<int>(std::floor((p.y - reach - origin_.y) / cell_)));
        const int iy1 = clamp_y(static_cast<int>(std::floor((p.y + reach - origin_.y) / cell_)));
        for (int ix = ix0; ix <= ix1; ++ix) {
            for (int iy = iy0; iy <= iy1; ++iy) {
                for (std::size_t k : buckets_[static_cast<std::size_t>(ix) * ny_ + iy]) {
                    const Instance& inst = items_[k];
                    const Vec2 d = inst.shape.center - p;
                    if (dot(d, d) <= reach * reach) {
                        if constexpr (std::is_same_v<std::invoke_result_t<Fn, const Instance&>, bool>) {
                            if (!fn(inst)) {
                                return;
                            }
                        } else {
                            fn(inst);
                        }
                    }
                }
            }
        }
    }

    const std::vector<Instance>& items() const { return items_; }

private:
    std::size_t bucket_of(Vec2 c) const {
        const int ix = clamp_x(static_cast<int>(std::floor((c.x - origin_.x) / cell_)));
        const int iy = clamp_y(static_cast<int>(std::floor((c.y - origin_.y) / cell_)));
        return static_cast<std::size_t>(ix) * ny_ + iy;
    }
    int clamp_x(int i) const { return std::clamp(i, 0, nx_ - 1); }
    int clamp_y(int i) const { return std::clamp(i, 0, ny_ - 1); }

    double cell_ = 1.0;
    double reach_ = 0.0;
    Vec2 origin_;
    int nx_ = 1;
    int ny_ = 1;
    std::vector<Instance> items_;
    std::vector<std::vector<std::size_t>> buckets_;
};

// ---------------------------------------------------------------------------
// Density

// Exact area fraction of a periodic packing.
inline double density(const Packing& p) {
    if (!p.window().is_torus()) {
        fail(ErrorKind::invalid_argument, "density is defined for torus windows only");
    }
    return static_cast<double>(p.size()) * p.body().area() / p.window().area();
}

inline double shape_disc_area(const PlacedShape& s, Vec2 c, double r) {
    if (s.disc) {
        return disc_disc_area(s.center, s.radius, c, r);
    }
    return polygon_disc_area(s.vertices, c, r);
}

// Covered fraction of B(center, r). Areas are exact (lens / polygon-circle
// formulas), so the result is accurate to rounding.
inline double density_in_ball(const Packing& p, Vec2 center, double r) {
    require(r > 0.0, "density_in_ball needs r > 0");
    double covered = 0.0;
    p.for_each_instance(Rect::centered(center, r, r), [&](const Instance& inst) {
        covered += shape_disc_area(inst.shape, center, r);
    });
    return covered / (std::numbers::pi * r * r);
}

struct DensityProfile {
    struct Sample {
        double radius = 0.0;
        double deviation = 0.0;
    };
    std::vector<Sample> samples;
};

// Centres sampled on an nx x ny grid of cell centres over the fundamental domain.
struct CenterSampling {
    int nx = 32;
    int ny = 32;
};

inline DensityProfile uniform_density_profile(const Packing& p, std::span<const double> radii,
                                              CenterSampling centers = {}) {
    require(p.window().is_torus(), "uniform_density_profile needs a torus window");
    require(centers.nx > 0 && centers.ny > 0, "center sampling grid must be nonempty");
    const double target = density(p);
    const Rect dom = p.window().domain();
    DensityProfile out;
    double last = 0.0;
    for (double r : radii) {
        require(r > 0.0, "radii must be positive");
        require(out.samples.empty() || r > last, "radii must be strictly increasing");
        last = r;
        double worst = 0.0;
        for (int i = 0; i < centers.nx; ++i) {
            for (int j = 0; j < centers.ny; ++j) {
                const Vec2 c{dom.xmin + (i + 0.5) * dom.width() / centers.nx,
                             dom.ymin + (j + 0.5) * dom.height() / centers.ny};
                worst = std::max(worst, std::abs(density_in_ball(p, c, r) - target));
            }
        }
        out.samples.push_back({r, worst});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Modified Hausdorff distance between packings

struct MatchedPair {
    Vec2 first;   // reference point of the element of the first packing
    Vec2 second;  // its partner in the second packing
    double distance = 0.0;
};

struct PackingDistanceReport {
    double epsilon = 0.0;
    double radius = 0.0;  // elements meeting B(0, radius) must be matched
    bool verdict = false;
    bool window_limited = false;
    std::vector<MatchedPair> pairs;
    std::size_t required_first = 0;
    std::size_t required_second = 0;
    std::optional<Vec2> unmatched;  // an element that found no partner
};

namespace detail {

inline bool shape_meets_ball(const PlacedShape& s, double r) {
    if (s.disc) {
        return norm(s.center) <= r + s.radius;
    }
    return convex_point_distance(s.vertices, Vec2{}) <= r;
}

inline PlacedShape shifted(PlacedShape s, Vec2 t) {
    s.center += t;
    for (Vec2& v : s.vertices) {
        v += t;
    }
    return s;
}

// Bipartite matching that must saturate the required vertices on both sides.
class RequiredMatching {
public:
    RequiredMatching(std::size_t left, std::size_t right) : adj_l_(left), adj_r_(right), ml_(left, npos), mr_(right, npos) {}

    void edge(std::size_t l, std::size_t r) {
        adj_l_[l].push_back(r);
        adj_r_[r].push_back(l);
    }

    bool augment_left(std::size_t l) {
        seen_r_.assign(adj_r_.size(), false);
        return try_left(l);
    }
    bool augment_right(std::size_t r) {
        seen_l_.assign(adj_l_.size(), false);
        return try_right(r);
    }
    std::size_t partner_of_left(std::size_t l) const { return ml_[l]; }
    std::size_t partner_of_right(std::size_t r) const { return mr_[r]; }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    bool try_left(std::size_t l) {
        for (std::size_t r : adj_l_[l]) {
            if (seen_r_[r]) {
                continue;
            }
            seen_r_[r] = true;
            if (mr_[r] == npos || try_left(mr_[r])) {
                ml_[l] = r;
                mr_[r] = l;
                return true;
            }
        }
        return false;
    }
    bool try_right(std::size_t r) {
        for (std::size_t l : adj_r_[r]) {
            if (seen_l_[l]) {
                continue;
            }
            seen_l_[l] = true;
            if (ml_[l] == npos || try_right(ml_[l])) {
                ml_[l] = r;
                mr_[r] = l;
                return true;
            }
        }
        return false;
    }

    std::vector<std::vector<std::size_t>> adj_l_, adj_r_;
    std::vector<std::size_t> ml_, mr_;
    std::vector<bool> seen_l_, seen_r_;
};

inline bool window_limited(const Window& w, double r) {
    return !w.is_torus() && r > 0.5 * std::min(w.width, w.height);
}

}  // namespace detail

// d(first + shift, second) <= epsilon, matching every element that meets
// B(0, radius) (default 1/epsilon) to a unique partner within Hausdorff
// distance epsilon, in both directions. With `witness` false the pair list is
// left empty and the search stops at the first unmatched element.
inline PackingDistanceReport modified_hausdorff_leq(const Packing& first, const Packing& second, double epsilon,
                                                    std::optional<double> radius = std::nullopt, Vec2 shift = {},
                                                    bool witness = true) {
    require(epsilon > 0.0, "epsilon must be positive");
    require(first.body() == second.body(), "packings must share the same body");
    PackingDistanceReport rep;
    rep.epsilon = epsilon;
    rep.radius = radius.value_or(1.0 / epsilon);
    rep.window_limited = detail::window_limited(first.window(), rep.radius) ||
                         detail::window_limited(second.window(), rep.radius);
    const double reach = rep.radius + first.body().radius() + epsilon + 2.0 * first.body().radius();
    const Rect cover = Rect::centered({}, reach, reach);

    // Instances of `first` are generated in its own frame and shifted.
    std::vector<Instance> left;
    first.for_each_instance(cover.translated(-shift), [&](const Instance& inst) {
        Instance moved = inst;
        moved.shape = detail::shifted(inst.shape, shift);
        left.push_back(std::move(moved));
    });
    InstanceIndex right_index(second, cover);
    const std::vector<Instance>& right = right_index.items();

    const double near_reach = epsilon + first.body().radius();
    std::vector<std::size_t> left_req;
    std::vector<bool> right_req(right.size(), false);
    for (std::size_t i = 0; i < left.size(); ++i) {
        if (detail::shape_meets_ball(left[i].shape, rep.radius)) {
            left_req.push_back(i);
        }
    }
    for (std::size_t j = 0; j < right.size(); ++j) {
        right_req[j] = detail::shape_meets_ball(right[j].shape, rep.radius);
    }
    rep.required_first = left_req.size();
    rep.required_second = static_cast<std::size_t>(std::count(right_req.begin(), right_req.end(), true));

    detail::RequiredMatching m(left.size(), right.size());
    // Left instances are few; index them by brute force through right queries.
    for (std::size_t i = 0; i < left.size(); ++i) {
        const PlacedShape& ls = left[i].shape;
        right_index.near(ls.center, near_reach, [&](const Instance& ri) {
            if (shapes_hausdorff(ls, ri.shape) <= epsilon) {
                const std::size_t j = static_cast<std::size_t>(&ri - right.data());
                m.edge(i, j);
            }
        });
    }
    for (std::size_t i : left_req) {
        if (!m.augment_left(i)) {
            rep.verdict = false;
            rep.unmatched = left[i].shape.center;
            return rep;
        }
    }
    for (std::size_t j = 0; j < right.size(); ++j) {
        if (right_req[j] && m.partner_of_right(j) == detail::RequiredMatching::npos && !m.augment_right(j)) {
            rep.verdict = false;
            rep.unmatched = right[j].shape.center;
            return rep;
        }
    }
    rep.verdict = true;
    if (witness) {
        for (std::size_t i = 0; i < left.size(); ++i) {
            const std::size_t j = m.partner_of_left(i);
            if (j != detail::RequiredMatching::npos) {
                rep.pairs.push_back({left[i].shape.center, right[j].shape.center,
                                     shapes_hausdorff(left[i].shape, right[j].shape)});
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Packing file format (version 1)
//
//   packlab-packing 1
//   body disc <radius>
//   body polygon <n> <x0> <y0> ... <x(n-1)> <y(n-1)>
//   window torus|box <width> <height>
//   placements <count>
//   <x> <y> <angle> <reflected 0|1>      (count lines)
//
// Numbers are written with 17 significant digits; '#' lines are comments.

inline void write_body(std::ostream& out, const Body& b) {
    if (b.is_disc()) {
        out << "body disc " << text::g17(b.radius()) << '\n';
        return;
    }
    out << "body polygon " << b.vertices().size();
    for (const Vec2& v : b.vertices()) {
        out << ' ' << text::g17(v.x) << ' ' << text::g17(v.y);
    }
    out << '\n';
}

inline void write_window(std::ostream& out, const Window& w) {
    out << "window " << (w.is_torus() ? "torus" : "box") << ' ' << text::g17(w.width) << ' ' << text::g17(w.height)
        << '\n';
}

inline void write_packing(std::ostream& out, const Packing& p) {
    out << "packlab-packing 1\n";
    write_body(out, p.body());
    write_window(out, p.window());
    out << "placements " << p.size() << '\n';
    for (const Placement& q : p.placements()) {
        out << text::g17(q.iso.translation.x) << ' ' << text::g17(q.iso.translation.y) << ' '
            << text::g17(q.iso.angle) << ' ' << (q.iso.reflected ? 1 : 0) << '\n';
    }
}

inline std::string packing_to_string(const Packing& p) {
    std::ostringstream out;
    write_packing(out, p);
    return out.str();
}

inline Body parse_body(const std::vector<std::string>& rec) {
    text::expect_keyword(rec, "body", 3);
    if (rec[1] == "disc") {
        return Body::disc(text::to_double(rec[2], "disc radius"));
    }
    if (rec[1] == "polygon") {
        const long long n = text::to_int(rec[2], "vertex count");
        if (n < 3 || rec.size() != static_cast<std::size_t>(3 + 2 * n)) {
            fail(ErrorKind::parse, "polygon body record has the wrong number of coordinates");
        }
        std::vector<Vec2> vs;
        for (long long i = 0; i < n; ++i) {
            vs.push_back({text::to_double(rec[3 + 2 * i], "vertex x"), text::to_double(rec[4 + 2 * i], "vertex y")});
        }
        return Body::polygon(std::move(vs));
    }
    fail(ErrorKind::parse, "unknown body kind '" + rec[1] + "'");
}

inline Window parse_window(const std::vector<std::string>& rec) {
    text::expect_keyword(rec, "window", 4);
    const double w = text::to_double(rec[2], "window width");
    const double h = text::to_double(rec[3], "window height");
    if (rec[1] == "torus") {
        return Window::torus(w, h);
    }
    if (rec[1] == "box") {
        return Window::box(w, h);
    }
    fail(ErrorKind::parse, "unknown window kind '" + rec[1] + "'");
}

inline Packing read_packing(std::istream& in) {
    auto header = text::next_record(in, "packing header");
    if (header.size() != 2 || header[0] != "packlab-packing" || header[1] != "1") {
        fail(ErrorKind::parse, "not a packlab-packing version 1 file");
    }
    Body body = parse_body(text::next_record(in, "body"));
    Window window = parse_window(text::next_record(in, "window"));
    auto count_rec = text::next_record(in, "placements");
    text::expect_keyword(count_rec, "placements", 2);
    const long long n = text::to_int(count_rec[1], "placement count");
    if (n < 0) {
        fail(ErrorKind::parse, "negative placement count");
    }
    std::vector<Placement> ps;
    ps.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        auto rec = text::next_record(in, "placement");
        if (rec.size() != 4) {
            fail(ErrorKind::parse, "placement line needs x y angle reflected");
        }
        const long long refl = text::to_int(rec[3], "reflected flag");
        if (refl != 0 && refl != 1) {
            fail(ErrorKind::parse, "reflected flag must be 0 or 1");
        }
        ps.push_back(Placement::at({text::to_double(rec[0], "x"), text::to_double(rec[1], "y")},
                                   text::to_double(rec[2], "angle"), refl == 1));
    }
    return Packing(std::move(body), window, std::move(ps));
}

inline Packing packing_from_string(const std::string& s) {
    std::istringstream in(s);
    return read_packing(in);
}

}  // namespace packlab
