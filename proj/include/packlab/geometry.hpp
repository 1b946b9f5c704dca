#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "packlab/error.hpp"

namespace packlab {

// Absolute tolerance for every touch/overlap predicate. Exact tangencies are
// classified as touching, never as overlapping.
inline constexpr double eps_geom = 1e-9;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    Vec2& operator-=(Vec2 o) {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 rotate(Vec2 p, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * p.x - s * p.y, s * p.x + c * p.y};
}

// Axis-aligned rectangle, closed.
struct Rect {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    Vec2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
    bool contains(Vec2 p, double tol = 0.0) const {
        return p.x >= xmin - tol && p.x <= xmax + tol && p.y >= ymin - tol && p.y <= ymax + tol;
    }
    bool intersects(const Rect& o, double tol = 0.0) const {
        return xmin <= o.xmax + tol && o.xmin <= xmax + tol && ymin <= o.ymax + tol &&
               o.ymin <= ymax + tol;
    }
    Rect expanded(double d) const { return {xmin - d, ymin - d, xmax + d, ymax + d}; }
    Rect translated(Vec2 t) const { return {xmin + t.x, ymin + t.y, xmax + t.x, ymax + t.y}; }
    static Rect centered(Vec2 c, double half_w, double half_h) {
        return {c.x - half_w, c.y - half_h, c.x + half_w, c.y + half_h};
    }
    friend bool operator==(const Rect&, const Rect&) = default;
};

inline Rect bounding_box(std::span<const Vec2> pts) {
    Rect r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const Vec2& p : pts) {
        r.xmin = std::min(r.xmin, p.x);
        r.ymin = std::min(r.ymin, p.y);
        r.xmax = std::max(r.xmax, p.x);
        r.ymax = std::max(r.ymax, p.y);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Polygon helpers (vertex lists, counterclockwise unless stated otherwise)

inline double signed_area(std::span<const Vec2> poly) {
    double a = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        a += cross(poly[i], poly[(i + 1) % n]);
    }
    return 0.5 * a;
}

inline double polygon_area(std::span<const Vec2> poly) { return std::abs(signed_area(poly)); }

inline Vec2 polygon_centroid(std::span<const Vec2> poly) {
    double a = 0.0;
    Vec2 c;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = poly[i];
        const Vec2 q = poly[(i + 1) % n];
        const double w = cross(p, q);
        a += w;
        c += w * (p + q);
    }
    if (std::abs(a) < 1e-300) {
        return poly.empty() ? Vec2{} : poly[0];
    }
    return (1.0 / (3.0 * a)) * c;
}

inline bool is_strictly_convex_ccw(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) {
        return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % n];
        const Vec2 c = poly[(i + 2) % n];
        if (!(cross(b - a, c - b) > 0.0)) {
            return false;
        }
    }
    // A locally convex polygon can still wind twice; total turning must be 2*pi.
    return signed_area(poly) > 0.0;
}

// Signed distance from p to the line through a->b, positive on the left (inside
// for a CCW polygon).
inline double left_distance(Vec2 a, Vec2 b, Vec2 p) { return cross(b - a, p - a) / norm(b - a); }

inline double segment_distance(Vec2 a, Vec2 b, Vec2 p) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return distance(a + t * ab, p);
}

// Distance from p to a closed convex CCW polygon (0 inside).
inline double convex_point_distance(std::span<const Vec2> poly, Vec2 p) {
    const std::size_t n = poly.size();
    bool inside = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (cross(poly[(i + 1) % n] - poly[i], p - poly[i]) < 0.0) {
            inside = false;
            break;
        }
    }
    if (inside) {
        return 0.0;
    }
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        d = std::min(d, segment_distance(poly[i], poly[(i + 1) % n], p));
    }
    return d;
}

// Sutherland-Hodgman: keep the part of `poly` on the left of a->b.
inline std::vector<Vec2> clip_halfplane(std::span<const Vec2> poly, Vec2 a, Vec2 b) {
    std::vector<Vec2> out;
    const std::size_t n = poly.size();
    if (n == 0) {
        return out;
    }
    out.reserve(n + 2);
    const Vec2 dir = b - a;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = poly[i];
        const Vec2 q = poly[(i + 1) % n];
        const double sp = cross(dir, p - a);
        const double sq = cross(dir, q - a);
        if (sp >= 0.0) {
            out.push_back(p);
        }
        if ((sp >= 0.0) != (sq >= 0.0)) {
            const double t = sp / (sp - sq);
            out.push_back(p + t * (q - p));
        }
    }
    return out;
}

// Intersection of two convex CCW polygons.
inline std::vector<Vec2> clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clipper) {
    std::vector<Vec2> out(subject.begin(), subject.end());
    const std::size_t n = clipper.size();
    for (std::size_t i = 0; i < n && !out.empty(); ++i) {
        out = clip_halfplane(out, clipper[i], clipper[(i + 1) % n]);
    }
    return out;
}

inline std::vector<Vec2> rect_polygon(const Rect& r) {
    return {{r.xmin, r.ymin}, {r.xmax, r.ymin}, {r.xmax, r.ymax}, {r.xmin, r.ymax}};
}

namespace detail {

// Signed area of disc(0, r) intersected with triangle (0, a, b).
inline double triangle_disc_area(Vec2 a, Vec2 b, double r) {
    const Vec2 d = b - a;
    const double qa = dot(d, d);
    if (qa == 0.0) {
        return 0.0;
    }
    const double qb = 2.0 * dot(a, d);
    const double qc = dot(a, a) - r * r;
    double ts[4] = {0.0, 0.0, 0.0, 1.0};
    int count = 1;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc > 0.0) {
        const double sq = std::sqrt(disc);
        const double t1 = (-qb - sq) / (2.0 * qa);
        const double t2 = (-qb + sq) / (2.0 * qa);
        if (t1 > 0.0 && t1 < 1.0) {
            ts[count++] = t1;
        }
        if (t2 > 0.0 && t2 < 1.0) {
            ts[count++] = t2;
        }
    }
    ts[count++] = 1.0;
    double area = 0.0;
    for (int i = 0; i + 1 < count; ++i) {
        const Vec2 p = a + ts[i] * d;
        const Vec2 q = a + ts[i + 1] * d;
        const Vec2 mid = a + (0.5 * (ts[i] + ts[i + 1])) * d;
        // A piece is a chord only if its ends lie on or inside the circle; the
        // midpoint alone misjudges a tangent edge.
        const double rr = r * r * (1.0 + 1e-9);
        if (dot(mid, mid) <= r * r && dot(p, p) <= rr && dot(q, q) <= rr) {
            area += 0.5 * cross(p, q);
        } else {
            area += 0.5 * r * r * std::atan2(cross(p, q), dot(p, q));
        }
    }
    return area;
}

}  // namespace detail

// Area of (simple polygon) intersected with disc(center, r).
inline double polygon_disc_area(std::span<const Vec2> poly, Vec2 center, double r) {
    if (r <= 0.0) {
        return 0.0;
    }
    double a = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        a += detail::triangle_disc_area(poly[i] - center, poly[(i + 1) % n] - center, r);
    }
    return std::abs(a);
}

inline double rect_disc_area(const Rect& rect, Vec2 center, double r) {
    // Quick exits keep rasterisation cheap.
    const double dx = std::max({rect.xmin - center.x, 0.0, center.x - rect.xmax});
    const double dy = std::max({rect.ymin - center.y, 0.0, center.y - rect.ymax});
    if (dx * dx + dy * dy >= r * r) {
        return 0.0;
    }
    const double fx = std::max(std::abs(rect.xmin - center.x), std::abs(rect.xmax - center.x));
    const double fy = std::max(std::abs(rect.ymin - center.y), std::abs(rect.ymax - center.y));
    if (fx * fx + fy * fy <= r * r) {
        return rect.area();
    }
    const auto poly = rect_polygon(rect);
    return polygon_disc_area(poly, center, r);
}

// Area of the lens disc(c1, r1) intersected with disc(c2, r2).
inline double disc_disc_area(Vec2 c1, double r1, Vec2 c2, double r2) {
    const double d = distance(c1, c2);
    if (d >= r1 + r2) {
        return 0.0;
    }
    if (d <= std::abs(r1 - r2)) {
        const double r = std::min(r1, r2);
        return std::numbers::pi * r * r;
    }
    const double a1 = std::acos(std::clamp((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1), -1.0, 1.0));
    const double a2 = std::acos(std::clamp((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2), -1.0, 1.0));
    return r1 * r1 * (a1 - std::sin(2.0 * a1) / 2.0) + r2 * r2 * (a2 - std::sin(2.0 * a2) / 2.0);
}

// ---------------------------------------------------------------------------
// Bodies, isometries, placements

enum class IsometryGroup { translations, all_isometries };

class Body {
public:
    enum class Kind { disc, polygon };

    static Body disc(double radius) {
        require(std::isfinite(radius) && radius > 0.0, "disc radius must be positive");
        Body b;
        b.kind_ = Kind::disc;
        b.radius_ = radius;
        return b;
    }

    // Vertices counterclockwise, strictly convex; the origin (reference point)
    // must lie in the closed polygon.
    static Body polygon(std::vector<Vec2> vertices) {
        require(vertices.size() >= 3, "polygon body needs at least 3 vertices");
        require(is_strictly_convex_ccw(vertices), "polygon body must be strictly convex and counterclockwise");
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            const Vec2 a = vertices[i];
            const Vec2 b = vertices[(i + 1) % vertices.size()];
            require(cross(b - a, Vec2{} - a) >= -eps_geom, "polygon body must contain the origin");
        }
        Body b;
        b.kind_ = Kind::polygon;
        b.vertices_ = std::move(vertices);
        for (const Vec2& v : b.vertices_) {
            b.radius_ = std::max(b.radius_, norm(v));
        }
        return b;
    }

    // Axis-aligned square centred at the origin.
    static Body square(double side = 1.0) {
        require(side > 0.0, "square side must be positive");
        const double h = 0.5 * side;
        return polygon({{-h, -h}, {h, -h}, {h, h}, {-h, h}});
    }

    Kind kind() const { return kind_; }
    bool is_disc() const { return kind_ == Kind::disc; }

    // Disc radius, or the polygon's circumradius about the reference point.
    double radius() const { return radius_; }
    double circumradius() const { return radius_; }
    const std::vector<Vec2>& vertices() const { return vertices_; }

    double area() const {
        return is_disc() ? std::numbers::pi * radius_ * radius_ : polygon_area(vertices_);
    }

    double diameter() const {
        if (is_disc()) {
            return 2.0 * radius_;
        }
        double d = 0.0;
        for (const Vec2& a : vertices_) {
            for (const Vec2& b : vertices_) {
                d = std::max(d, distance(a, b));
            }
        }
        return d;
    }

    Vec2 centroid() const { return is_disc() ? Vec2{} : polygon_centroid(vertices_); }

    friend bool operator==(const Body&, const Body&) = default;

private:
    Body() = default;

    Kind kind_ = Kind::disc;
    double radius_ = 0.0;
    std::vector<Vec2> vertices_;
};

// p -> R(angle) * M(p) + translation, where M mirrors across the x axis when
// `reflected` is set.
struct Isometry {
    double angle = 0.0;
    Vec2 translation;
    bool reflected = false;

    static Isometry identity() { return {}; }
    static Isometry translate(Vec2 t) { return {0.0, t, false}; }

    Vec2 linear(Vec2 p) const {
        if (reflected) {
            p.y = -p.y;
        }
        return rotate(p, angle);
    }
    Vec2 apply(Vec2 p) const { return linear(p) + translation; }

    // (this after first)(p) == apply(first.apply(p))
    Isometry after(const Isometry& first) const {
        Isometry out;
        out.angle = angle + (reflected ? -first.angle : first.angle);
        out.reflected = reflected != first.reflected;
        out.translation = apply(first.translation);
        return out;
    }

    friend bool operator==(const Isometry&, const Isometry&) = default;
};

struct Placement {
    Isometry iso;

    static Placement at(Vec2 p, double angle = 0.0, bool reflected = false) {
        return Placement{Isometry{angle, p, reflected}};
    }
    Vec2 position() const { return iso.translation; }

    friend bool operator==(const Placement&, const Placement&) = default;
};

// A body instantiated in the plane.
struct PlacedShape {
    bool disc = true;
    Vec2 center;  // reference point
    double radius = 0.0;  // disc radius or circumradius
    std::vector<Vec2> vertices;  // CCW, world coordinates (polygons only)

    Rect bbox() const {
        if (disc) {
            return Rect::centered(center, radius, radius);
        }
        return bounding_box(vertices);
    }

    bool contains(Vec2 p, double tol = 0.0) const {
        if (disc) {
            return distance(p, center) <= radius + tol;
        }
        return convex_point_distance(vertices, p) <= tol;
    }

    double area() const { return disc ? std::numbers::pi * radius * radius : polygon_area(vertices); }
};

inline PlacedShape place(const Body& body, const Isometry& iso, Vec2 offset = {}) {
    PlacedShape s;
    s.disc = body.is_disc();
    s.center = iso.translation + offset;
    s.radius = body.radius();
    if (!s.disc) {
        s.vertices.reserve(body.vertices().size());
        for (const Vec2& v : body.vertices()) {
            s.vertices.push_back(iso.apply(v) + offset);
        }
        if (iso.reflected) {
            std::reverse(s.vertices.begin(), s.vertices.end());
        }
    }
    return s;
}

inline PlacedShape place(const Body& body, const Placement& p, Vec2 offset = {}) {
    return place(body, p.iso, offset);
}

namespace detail {

// max over a's edges of min over b's vertices of the signed distance outside
// that edge.
inline double sat_one_way(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double best = -std::numeric_limits<double>::infinity();
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = a[i];
        const Vec2 q = a[(i + 1) % n];
        double m = std::numeric_limits<double>::infinity();
        for (const Vec2& v : b) {
            m = std::min(m, -left_distance(p, q, v));
        }
        best = std::max(best, m);
    }
    return best;
}

inline double polygon_polygon_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (const Vec2& v : b) {
            d = std::min(d, segment_distance(a[i], a[(i + 1) % a.size()], v));
        }
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        for (const Vec2& v : a) {
            d = std::min(d, segment_distance(b[i], b[(i + 1) % b.size()], v));
        }
    }
    return d;
}

}  // namespace detail

// Signed separation: positive is a lower bound on the gap (exact for discs),
// negative is minus the penetration depth.
inline double separation(const PlacedShape& a, const PlacedShape& b) {
    if (a.disc && b.disc) {
        return distance(a.center, b.center) - a.radius - b.radius;
    }
    if (a.disc != b.disc) {
        const PlacedShape& d = a.disc ? a : b;
        const PlacedShape& p = a.disc ? b : a;
        const double dist = convex_point_distance(p.vertices, d.center);
        if (dist > 0.0) {
            return dist - d.radius;
        }
        double depth = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < p.vertices.size(); ++i) {
            depth = std::min(depth, left_distance(p.vertices[i], p.vertices[(i + 1) % p.vertices.size()], d.center));
        }
        return -(depth + d.radius);
    }
    return std::max(detail::sat_one_way(a.vertices, b.vertices), detail::sat_one_way(b.vertices, a.vertices));
}

inline bool shapes_overlap(const PlacedShape& a, const PlacedShape& b) {
    const double reach = a.radius + b.radius;
    if (std::abs(a.center.x - b.center.x) >= reach + eps_geom ||
        std::abs(a.center.y - b.center.y) >= reach + eps_geom) {
        return false;
    }
    return separation(a, b) < -eps_geom;
}

inline double shapes_gap(const PlacedShape& a, const PlacedShape& b) {
    const double sep = separation(a, b);
    if (sep <= eps_geom) {
        return 0.0;
    }
    if (a.disc || b.disc) {
        return sep;
    }
    const double d = detail::polygon_polygon_distance(a.vertices, b.vertices);
    return d <= eps_geom ? 0.0 : d;
}

inline double shapes_hausdorff(const PlacedShape& a, const PlacedShape& b) {
    if (a.disc && b.disc) {
        return distance(a.center, b.center) + std::abs(a.radius - b.radius);
    }
    require(!a.disc && !b.disc, "hausdorff distance between a disc and a polygon is not supported");
    // d(., B) is convex, so its maximum over A is attained at a vertex of A.
    double h = 0.0;
    for (const Vec2& v : a.vertices) {
        h = std::max(h, convex_point_distance(b.vertices, v));
    }
    for (const Vec2& v : b.vertices) {
        h = std::max(h, convex_point_distance(a.vertices, v));
    }
    return h;
}

// True iff the interiors of the two placed bodies intersect (gaps within
// eps_geom count as touching).
inline bool overlap(const Body& body, const Placement& a, const Placement& b) {
    return shapes_overlap(place(body, a), place(body, b));
}

// Euclidean distance between the two placed sets; 0 when they meet or the gap
// is within eps_geom.
inline double gap_distance(const Body& body, const Placement& a, const Placement& b) {
    return shapes_gap(place(body, a), place(body, b));
}

inline double hausdorff_body_distance(const Body& body, const Placement& a, const Placement& b) {
    return shapes_hausdorff(place(body, a), place(body, b));
}

// Connectivity of the union of closed bodies via the touching graph.
inline bool connected_union(const Body& body, std::span<const Placement> ps) {
    require(!ps.empty(), "connected_union needs at least one placement");
    std::vector<PlacedShape> shapes;
    shapes.reserve(ps.size());
    for (const Placement& p : ps) {
        shapes.push_back(place(body, p));
    }
    std::vector<std::size_t> parent(ps.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    };
    std::size_t components = ps.size();
    for (std::size_t i = 0; i < ps.size(); ++i) {
        for (std::size_t j = i + 1; j < ps.size(); ++j) {
            const std::size_t ri = find(i);
            const std::size_t rj = find(j);
            if (ri == rj) {
                continue;
            }
            if (shapes_gap(shapes[i], shapes[j]) <= eps_geom) {
                parent[ri] = rj;
                --components;
            }
        }
    }
    return components == 1;
}

// True iff g(body) lies in the interior of (1+epsilon) * body.
inline bool nests_inside(const Body& body, double epsilon, const Isometry& g) {
    const double scale = 1.0 + epsilon;
    if (body.is_disc()) {
        return norm(g.translation) + body.radius() < scale * body.radius();
    }
    std::vector<Vec2> outer;
    outer.reserve(body.vertices().size());
    for (const Vec2& v : body.vertices()) {
        outer.push_back(scale * v);
    }
    const PlacedShape inner = place(body, g);
    const double tol = 1e-12 * body.radius();
    for (const Vec2& v : inner.vertices) {
        for (std::size_t i = 0; i < outer.size(); ++i) {
            if (!(left_distance(outer[i], outer[(i + 1) % outer.size()], v) > tol)) {
                return false;
            }
        }
    }
    return true;
}

// Searches identity, then translation by epsilon * centroid (the homothety of
// ratio 1+epsilon about the centroid maps K onto (1+epsilon)K shifted by that
// vector). An empty result means "not found", never a disproof.
inline std::optional<Isometry> self_nests(const Body& body, double epsilon,
                                          IsometryGroup group = IsometryGroup::all_isometries) {
    require(epsilon > 0.0, "self_nests needs epsilon > 0");
    (void)group;  // both candidates are translations, allowed in every group
    const Isometry candidates[] = {Isometry::identity(), Isometry::translate(epsilon * body.centroid())};
    for (const Isometry& g : candidates) {
        if (nests_inside(body, epsilon, g)) {
            return g;
        }
    }
    return std::nullopt;
}

}  // namespace packlab
