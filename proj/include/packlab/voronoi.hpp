#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <vector>

#include "packlab/geometry.hpp"
#include "packlab/packing.hpp"
#include "packlab/text.hpp"

namespace packlab {

struct VoronoiCell {
    Vec2 site;
    std::vector<Vec2> polygon;  // CCW, unwrapped around the site
    double area = 0.0;
};

namespace detail {

// Drops repeated and collinear vertices left where several bisectors meet.
inline std::vector<Vec2> simplify_polygon(std::vector<Vec2> poly, double tol) {
    bool changed = true;
    while (changed && poly.size() >= 3) {
        changed = false;
        for (std::size_t i = 0; i < poly.size() && poly.size() >= 3; ++i) {
            const Vec2 a = poly[(i + poly.size() - 1) % poly.size()];
            const Vec2 b = poly[i];
            const Vec2 c = poly[(i + 1) % poly.size()];
            if (distance(a, b) <= tol || std::abs(cross(b - a, c - a)) <= tol * distance(a, c)) {
                poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                break;
            }
        }
    }
    return poly;
}

}  // namespace detail

// Voronoi partition of a torus by the disc centres. Each cell starts as the
// window-sized rectangle about its site and is clipped by the bisectors with
// every other site's nearby periodic images.
inline std::vector<VoronoiCell> cells(const Packing& p) {
    const Window& w = p.window();
    if (!w.is_torus()) {
        fail(ErrorKind::invalid_argument, "voronoi cells need a torus window");
    }
    if (!p.body().is_disc()) {
        fail(ErrorKind::invalid_argument, "voronoi cells are defined for disc packings only");
    }
    if (p.empty()) {
        fail(ErrorKind::invalid_argument, "voronoi cells need at least one site");
    }
    std::vector<VoronoiCell> out;
    out.reserve(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec2 s = p.placements()[i].iso.translation;
        std::vector<Vec2> poly = rect_polygon(Rect::centered(s, 0.5 * w.width, 0.5 * w.height));
        for (std::size_t j = 0; j < p.size() && !poly.empty(); ++j) {
            const Vec2 nearest = s + w.delta(s, p.placements()[j].iso.translation);
            for (int kx = -1; kx <= 1; ++kx) {
                for (int ky = -1; ky <= 1; ++ky) {
                    const Vec2 q = nearest + Vec2{kx * w.width, ky * w.height};
                    const Vec2 d = q - s;
                    if (norm(d) < 1e-12) {
                        continue;
                    }
                    // Keep the side nearer to s: left of the bisector directed
                    // by d rotated a quarter turn.
                    const Vec2 mid = s + 0.5 * d;
                    const Vec2 dir{-d.y, d.x};
                    poly = clip_halfplane(poly, mid, mid + dir);
                }
            }
        }
        poly = detail::simplify_polygon(std::move(poly), 1e-12 * std::max(w.width, w.height));
        VoronoiCell c;
        c.site = s;
        c.area = poly.size() >= 3 ? polygon_area(poly) : 0.0;
        c.polygon = std::move(poly);
        out.push_back(std::move(c));
    }
    return out;
}

// Regular hexagon with inradius r, centred at the origin, one vertex at angle
// theta + 30 degrees.
inline std::vector<Vec2> circumscribed_hexagon(double r, double theta = 0.0) {
    std::vector<Vec2> out;
    const double R = 2.0 * r / std::sqrt(3.0);
    for (int k = 0; k < 6; ++k) {
        const double a = theta + std::numbers::pi / 6.0 + k * std::numbers::pi / 3.0;
        out.push_back({R * std::cos(a), R * std::sin(a)});
    }
    return out;
}

inline double convex_hausdorff(std::span<const Vec2> a, std::span<const Vec2> b) {
    double h = 0.0;
    for (const Vec2& v : a) {
        h = std::max(h, convex_point_distance(b, v));
    }
    for (const Vec2& v : b) {
        h = std::max(h, convex_point_distance(a, v));
    }
    return h;
}

// Hausdorff distance from the cell, recentred at its site, to the regular
// hexagon circumscribed about the radius-r disc, minimised over rotations:
// 720 angles at 0.5 degree pitch, then golden-section refinement.
inline double hexagon_deviation(const VoronoiCell& c, double r) {
    require(r > 0.0, "radius must be positive");
    require(c.polygon.size() >= 3, "cell polygon is degenerate");
    std::vector<Vec2> local;
    local.reserve(c.polygon.size());
    for (const Vec2& v : c.polygon) {
        local.push_back(v - c.site);
    }
    auto dev = [&](double theta) { return convex_hausdorff(local, circumscribed_hexagon(r, theta)); };
    const double step = std::numbers::pi / 360.0;
    double best = std::numeric_limits<double>::infinity();
    double best_theta = 0.0;
    for (int k = 0; k < 720; ++k) {
        const double v = dev(k * step);
        if (v < best) {
            best = v;
            best_theta = k * step;
        }
    }
    double lo = best_theta - step;
    double hi = best_theta + step;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = dev(x1), f2 = dev(x2);
    for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = dev(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = dev(x2);
        }
    }
    return std::min({best, f1, f2});
}

// A convex polygon intersected with a disc about `center` (radius may be
// infinite: no truncation).
struct Piece {
    std::vector<Vec2> polygon;
    Vec2 center;
    double radius = std::numeric_limits<double>::infinity();
    double area = 0.0;
};

inline double piece_area(const std::vector<Vec2>& poly, Vec2 center, double radius) {
    if (poly.size() < 3) {
        return 0.0;
    }
    if (!std::isfinite(radius)) {
        return polygon_area(poly);
    }
    return polygon_disc_area(poly, center, radius);
}

// Cell intersected with a disc about the site, radius bisected so the area
// matches `target` to 1e-9.
inline Piece truncate_cell_to_area(const VoronoiCell& c, double target) {
    require(target >= 0.0, "target area must be nonnegative");
    if (target > c.area * (1.0 + 1e-12) + 1e-15) {
        fail(ErrorKind::invalid_argument, "target area " + text::g17(target) + " exceeds the cell area " +
                                              text::g17(c.area));
    }
    Piece out;
    out.polygon = c.polygon;
    out.center = c.site;
    if (target >= c.area) {
        out.area = c.area;
        return out;
    }
    double lo = 0.0;
    double hi = 0.0;
    for (const Vec2& v : c.polygon) {
        hi = std::max(hi, distance(v, c.site));
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (piece_area(c.polygon, c.site, mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    out.radius = 0.5 * (lo + hi);
    out.area = piece_area(c.polygon, c.site, out.radius);
    return out;
}

// Window area minus the total piece area. Pieces are checked pairwise
// (periodic images included on a torus) for interior overlap of their
// polygons beyond 1e-9 in area.
inline double coverage_gap(const std::vector<Piece>& pieces, const Window& w) {
    std::vector<Rect> boxes;
    boxes.reserve(pieces.size());
    for (const Piece& p : pieces) {
        boxes.push_back(bounding_box(p.polygon));
    }
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        for (std::size_t j = i; j < pieces.size(); ++j) {
            const int span = w.is_torus() ? 1 : 0;
            Vec2 base{};
            if (w.is_torus()) {
                base = pieces[i].center + w.delta(pieces[i].center, pieces[j].center) - pieces[j].center;
            }
            for (int kx = -span; kx <= span; ++kx) {
                for (int ky = -span; ky <= span; ++ky) {
                    const Vec2 off = base + Vec2{kx * w.width, ky * w.height};
                    if (i == j && norm(off) < 1e-12) {
                        continue;
                    }
                    if (!boxes[i].intersects(boxes[j].translated(off))) {
                        continue;
                    }
                    std::vector<Vec2> other;
                    for (const Vec2& v : pieces[j].polygon) {
                        other.push_back(v + off);
                    }
                    const auto common = clip_convex(pieces[i].polygon, other);
                    if (common.size() >= 3 && polygon_area(common) > 1e-9) {
                        fail(ErrorKind::invariant,
                             "pieces " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
                    }
                }
            }
        }
    }
    double total = 0.0;
    for (const Piece& p : pieces) {
        total += p.area;
    }
    return w.area() - total;
}

// Polygon records in the packing format's polygon syntax; disc-truncated
// boundaries are sampled at 256 points per full turn.
inline std::vector<Vec2> piece_outline(const Piece& p) {
    if (!std::isfinite(p.radius)) {
        return p.polygon;
    }
    std::vector<Vec2> disc;
    const int m = 256;
    for (int k = 0; k < m; ++k) {
        const double a = 2.0 * std::numbers::pi * k / m;
        disc.push_back(p.center + p.radius * Vec2{std::cos(a), std::sin(a)});
    }
    return clip_convex(p.polygon, disc);
}

inline void write_polygon(std::ostream& out, std::span<const Vec2> poly) {
    out << "polygon " << poly.size();
    for (const Vec2& v : poly) {
        out << ' ' << text::g17(v.x) << ' ' << text::g17(v.y);
    }
    out << '\n';
}

}  // namespace packlab
