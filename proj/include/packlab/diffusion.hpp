#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "packlab/fft.hpp"
#include "packlab/geometry.hpp"
#include "packlab/packing.hpp"
#include "packlab/text.hpp"

namespace packlab {

// A finite measure discretised on the grid of cells [(i-1/2)h, (i+1/2)h] x
// [(j-1/2)h, (j+1/2)h], |i|, |j| <= half. Each cell mass is read as spread
// uniformly over its cell, so the grid measure is itself an exact finite
// measure; `relative_error` bounds its density against the continuous density
// it approximates and the truncation fields account for the dropped tail.
struct GridMeasure {
    double h = 1.0;
    int half = 0;
    double support_radius = 0.0;
    std::vector<double> mass;  // index (i + half) * side() + (j + half)

    double truncation_error = 0.0;    // total mass dropped outside the grid
    double truncation_density = 0.0;  // sup density (per unit area) of the dropped part
    double relative_error = 0.0;      // pointwise density ratio bound, minus one

    int side() const { return 2 * half + 1; }
    double at(int i, int j) const {
        if (std::abs(i) > half || std::abs(j) > half) {
            return 0.0;
        }
        return mass[static_cast<std::size_t>(i + half) * side() + (j + half)];
    }
    double total_mass() const {
        double s = 0.0;
        for (double m : mass) {
            s += m;
        }
        return s;
    }

    static GridMeasure point_mass(double h, double m = 1.0) {
        require(h > 0.0 && m >= 0.0, "point mass needs h > 0 and nonnegative mass");
        GridMeasure g;
        g.h = h;
        g.half = 0;
        g.mass = {m};
        return g;
    }
};

// Density of the measure used to separate connected replacements of k < n
// copies: (n/(n+1))^(|x| / ((2n-1) D)) for bodies of diameter D.
inline double lemma_decay_rate(int n, double diameter = 1.0) {
    return std::log((n + 1.0) / n) / ((2.0 * n - 1.0) * diameter);
}

inline double lemma_density(int n, double dist, double diameter = 1.0) {
    require(n >= 1, "n must be at least 1");
    return std::pow(static_cast<double>(n) / (n + 1.0), dist / ((2.0 * n - 1.0) * diameter));
}

// Radius where the density falls to 1e-6, capped at 40 diameters and never
// below the connected-union diameter (2n-1) D.
inline double lemma_default_cutoff(int n, double diameter = 1.0) {
    const double r = std::log(1e6) / lemma_decay_rate(n, diameter);
    return std::max(std::min(r, 40.0 * diameter), (2.0 * n - 1.0) * diameter);
}

// Mass of exp(-lambda |x|) dx outside B(0, r) in the plane.
inline double exponential_tail_mass(double lambda, double r) {
    r = std::max(r, 0.0);
    return 2.0 * std::numbers::pi * std::exp(-lambda * r) * (r / lambda + 1.0 / (lambda * lambda));
}

inline GridMeasure lemma_mu(int n, double h, double cutoff, double diameter = 1.0) {
    require(n >= 1, "lemma_mu needs n >= 1");
    require(h > 0.0 && cutoff > 0.0 && diameter > 0.0, "lemma_mu needs positive h, cutoff and diameter");
    if (cutoff < (2.0 * n - 1.0) * diameter) {
        fail(ErrorKind::invalid_argument, "lemma_mu cutoff must be at least (2n-1) body diameters");
    }
    const double lambda = lemma_decay_rate(n, diameter);
    GridMeasure g;
    g.h = h;
    g.half = static_cast<int>(std::floor(cutoff / h));
    g.support_radius = cutoff;
    g.mass.assign(static_cast<std::size_t>(g.side()) * g.side(), 0.0);
    for (int i = -g.half; i <= g.half; ++i) {
        for (int j = -g.half; j <= g.half; ++j) {
            const double d = h * std::hypot(static_cast<double>(i), static_cast<double>(j));
            if (d <= cutoff) {
                g.mass[static_cast<std::size_t>(i + g.half) * g.side() + (j + g.half)] = std::exp(-lambda * d) * h * h;
            }
        }
    }
    const double inner = std::max(cutoff - h * std::numbers::sqrt2 / 2.0, 0.0);
    g.truncation_error = exponential_tail_mass(lambda, inner);
    g.truncation_density = std::exp(-lambda * inner);
    g.relative_error = std::expm1(lambda * h * std::numbers::sqrt2 / 2.0);
    return g;
}

// Discrete convolution mu * nu.
inline GridMeasure compose(const GridMeasure& mu, const GridMeasure& nu) {
    if (std::abs(mu.h - nu.h) > 1e-12 * std::max(mu.h, nu.h)) {
        fail(ErrorKind::invalid_argument, "compose needs identical cell sizes");
    }
    GridMeasure out;
    out.h = mu.h;
    out.half = mu.half + nu.half;
    out.support_radius = mu.support_radius + nu.support_radius;
    const double total_mu = mu.total_mass();
    const double total_nu = nu.total_mass();
    const double work = static_cast<double>(mu.mass.size()) * static_cast<double>(nu.mass.size());
    double fp = 0.0;
    if (work < 2e7) {
        out.mass.assign(static_cast<std::size_t>(out.side()) * out.side(), 0.0);
        for (int a = 0; a < mu.side(); ++a) {
            for (int b = 0; b < mu.side(); ++b) {
                const double m = mu.mass[static_cast<std::size_t>(a) * mu.side() + b];
                if (m == 0.0) {
                    continue;
                }
                for (int c = 0; c < nu.side(); ++c) {
                    const double* row = &nu.mass[static_cast<std::size_t>(c) * nu.side()];
                    double* dst = &out.mass[static_cast<std::size_t>(a + c) * out.side() + b];
                    for (int d = 0; d < nu.side(); ++d) {
                        dst[d] += m * row[d];
                    }
                }
            }
        }
        fp = 1e-14 * total_mu * total_nu;
    } else {
        out.mass = fft::convolve_2d(mu.mass, mu.side(), mu.side(), nu.mass, nu.side(), nu.side());
        fp = 1e-12 * total_mu * total_nu;
        for (double& m : out.mass) {
            m = std::max(m, 0.0);
        }
    }
    out.truncation_error = mu.truncation_error * total_nu + nu.truncation_error * total_mu +
                           mu.truncation_error * nu.truncation_error + fp;
    out.truncation_density =
        mu.truncation_density * (total_nu + nu.truncation_error) + nu.truncation_density * total_mu;
    out.relative_error = (1.0 + mu.relative_error) * (1.0 + nu.relative_error) - 1.0;
    return out;
}

// ---------------------------------------------------------------------------
// Coverage rasterisation

struct CoverCell {
    int i = 0;
    int j = 0;
    double area = 0.0;  // area of the packed set inside the cell
};

inline double shape_cell_area(const PlacedShape& s, const Rect& cell) {
    if (s.disc) {
        return rect_disc_area(cell, s.center, s.radius);
    }
    const auto clipped = clip_convex(s.vertices, rect_polygon(cell));
    return clipped.size() < 3 ? 0.0 : polygon_area(clipped);
}

inline Rect cell_rect(int i, int j, double h) {
    return {(i - 0.5) * h, (j - 0.5) * h, (i + 0.5) * h, (j + 0.5) * h};
}

// Exact per-cell areas of a union of interior-disjoint shapes; cells listed in
// (i, j) order with duplicates merged.
inline std::vector<CoverCell> rasterize(std::span<const PlacedShape> shapes, double h) {
    std::vector<CoverCell> cells;
    for (const PlacedShape& s : shapes) {
        const Rect b = s.bbox();
        const int i0 = static_cast<int>(std::floor(b.xmin / h + 0.5));
        const int i1 = static_cast<int>(std::ceil(b.xmax / h - 0.5));
        const int j0 = static_cast<int>(std::floor(b.ymin / h + 0.5));
        const int j1 = static_cast<int>(std::ceil(b.ymax / h - 0.5));
        for (int i = i0; i <= i1; ++i) {
            for (int j = j0; j <= j1; ++j) {
                const double a = shape_cell_area(s, cell_rect(i, j, h));
                if (a > 0.0) {
                    cells.push_back({i, j, a});
                }
            }
        }
    }
    std::sort(cells.begin(), cells.end(), [](const CoverCell& a, const CoverCell& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    std::vector<CoverCell> merged;
    for (const CoverCell& c : cells) {
        if (!merged.empty() && merged.back().i == c.i && merged.back().j == c.j) {
            merged.back().area += c.area;
        } else {
            merged.push_back(c);
        }
    }
    return merged;
}

inline std::vector<PlacedShape> shapes_meeting(const Packing& p, const Rect& cover) {
    std::vector<PlacedShape> out;
    p.for_each_instance(cover, [&](const Instance& inst) { out.push_back(inst.shape); });
    return out;
}

// ---------------------------------------------------------------------------
// Fields

// (mu * chi_P) integrated over the cells of a grid-aligned region; cell (i, j)
// is centred at (i h, j h). Values are mass per cell.
struct Field {
    double h = 1.0;
    int i0 = 0;
    int j0 = 0;
    int nx = 0;
    int ny = 0;
    std::vector<double> values;  // index ix * ny + iy

    double relative_error = 0.0;  // per-cell relative bound
    double absolute_error = 0.0;  // per-cell absolute bound (truncation + rounding)

    double at(int ix, int iy) const { return values[static_cast<std::size_t>(ix) * ny + iy]; }
    Vec2 cell_center(int ix, int iy) const { return {(i0 + ix) * h, (j0 + iy) * h}; }
    Rect region() const { return {i0 * h, j0 * h, (i0 + nx - 1) * h, (j0 + ny - 1) * h}; }
    double error_at(std::size_t k) const { return relative_error * values[k] + absolute_error; }
    double sum() const {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        return s;
    }
};

enum class FieldMethod { automatic, direct, fft };

namespace detail {

struct CellRange {
    int i0, i1, j0, j1;
};

inline CellRange region_cells(const Rect& region, double h) {
    CellRange r{static_cast<int>(std::ceil(region.xmin / h - 1e-9)), static_cast<int>(std::floor(region.xmax / h + 1e-9)),
                static_cast<int>(std::ceil(region.ymin / h - 1e-9)), static_cast<int>(std::floor(region.ymax / h + 1e-9))};
    require(r.i0 <= r.i1 && r.j0 <= r.j1, "region contains no grid cell centre");
    return r;
}

inline double total_area(std::span<const CoverCell> cells) {
    double s = 0.0;
    for (const CoverCell& c : cells) {
        s += c.area;
    }
    return s;
}

// Per-cell truncation bound for a packed set of total area `area` (infinite
// for periodic packings).
inline double truncation_bound(const GridMeasure& mu, double area) {
    const double by_density = std::isfinite(area) ? mu.truncation_density * area : std::numeric_limits<double>::infinity();
    return std::min(mu.truncation_error * mu.h * mu.h, by_density * mu.h * mu.h);
}

inline void accumulate_direct(const GridMeasure& mu, std::span<const CoverCell> cover, const CellRange& r, double sign,
                              std::vector<double>& values) {
    const int ny = r.j1 - r.j0 + 1;
    for (const CoverCell& c : cover) {
        const int cx0 = std::max(r.i0, c.i - mu.half);
        const int cx1 = std::min(r.i1, c.i + mu.half);
        const int cy0 = std::max(r.j0, c.j - mu.half);
        const int cy1 = std::min(r.j1, c.j + mu.half);
        const double w = sign * c.area;
        for (int cx = cx0; cx <= cx1; ++cx) {
            const double* row = &mu.mass[static_cast<std::size_t>(cx - c.i + mu.half) * mu.side() + mu.half - c.j];
            double* dst = &values[static_cast<std::size_t>(cx - r.i0) * ny - r.j0];
            for (int cy = cy0; cy <= cy1; ++cy) {
                dst[cy] += row[cy] * w;
            }
        }
    }
}

inline std::vector<double> field_fft(const GridMeasure& mu, std::span<const CoverCell> cover, const CellRange& r) {
    const int ai0 = r.i0 - mu.half;
    const int aj0 = r.j0 - mu.half;
    const int anx = (r.i1 + mu.half) - ai0 + 1;
    const int any = (r.j1 + mu.half) - aj0 + 1;
    std::vector<double> a(static_cast<std::size_t>(anx) * any, 0.0);
    for (const CoverCell& c : cover) {
        const int x = c.i - ai0;
        const int y = c.j - aj0;
        if (x >= 0 && x < anx && y >= 0 && y < any) {
            a[static_cast<std::size_t>(x) * any + y] += c.area;
        }
    }
    const auto full = fft::convolve_2d(a, anx, any, mu.mass, mu.side(), mu.side());
    const int fny = any + mu.side() - 1;
    const int nx = r.i1 - r.i0 + 1;
    const int ny = r.j1 - r.j0 + 1;
    std::vector<double> out(static_cast<std::size_t>(nx) * ny);
    for (int x = 0; x < nx; ++x) {
        for (int y = 0; y < ny; ++y) {
            const double v = full[static_cast<std::size_t>(x + 2 * mu.half) * fny + (y + 2 * mu.half)];
            out[static_cast<std::size_t>(x) * ny + y] = std::max(v, 0.0);
        }
    }
    return out;
}

}  // namespace detail

// mu * chi_P over the cells of `region`. The result is exact for the grid
// measure up to rounding; error bounds relative to the continuous measure are
// carried on the field.
inline Field convolve_field(const Packing& p, const GridMeasure& mu, const Rect& region,
                            FieldMethod method = FieldMethod::automatic) {
    const detail::CellRange r = detail::region_cells(region, mu.h);
    Field f;
    f.h = mu.h;
    f.i0 = r.i0;
    f.j0 = r.j0;
    f.nx = r.i1 - r.i0 + 1;
    f.ny = r.j1 - r.j0 + 1;

    const Rect cover = Rect{r.i0 * mu.h, r.j0 * mu.h, r.i1 * mu.h, r.j1 * mu.h}.expanded((mu.half + 1) * mu.h);
    const auto shapes = shapes_meeting(p, cover);
    const auto cells = rasterize(shapes, mu.h);

    const double ncells = static_cast<double>(f.nx) * f.ny;
    const double direct_cost = static_cast<double>(cells.size()) * std::min(ncells, static_cast<double>(mu.mass.size()));
    const double fft_n = static_cast<double>(f.nx + 2 * mu.half + mu.side()) * (f.ny + 2 * mu.half + mu.side());
    const double fft_cost = 15.0 * fft_n * std::log2(std::max(fft_n, 2.0));
    const bool use_fft = method == FieldMethod::fft || (method == FieldMethod::automatic && fft_cost < direct_cost);

    double fp = 0.0;
    if (use_fft) {
        f.values = detail::field_fft(mu, cells, r);
        fp = 1e-12 * mu.total_mass() * mu.h * mu.h;
    } else {
        f.values.assign(static_cast<std::size_t>(f.nx) * f.ny, 0.0);
        detail::accumulate_direct(mu, cells, r, 1.0, f.values);
        fp = 1e-14 * mu.total_mass() * mu.h * mu.h;
    }
    const double area = p.window().is_torus() ? std::numeric_limits<double>::infinity()
                                              : static_cast<double>(p.size()) * p.body().area();
    f.relative_error = mu.relative_error;
    f.absolute_error = detail::truncation_bound(mu, area) + fp;
    return f;
}

// Field of an explicit shape list, evaluated only at the requested cells
// (global indices). Shapes outside the measure support contribute through the
// truncation bound only.
struct CellSample {
    int i = 0;
    int j = 0;
    double value = 0.0;
};

inline std::vector<CellSample> sample_field(std::span<const PlacedShape> shapes, const GridMeasure& mu,
                                            std::span<const std::pair<int, int>> cells) {
    const auto cover = rasterize(shapes, mu.h);
    std::vector<CellSample> out;
    out.reserve(cells.size());
    for (const auto& [ci, cj] : cells) {
        double v = 0.0;
        for (const CoverCell& c : cover) {
            v += mu.at(ci - c.i, cj - c.j) * c.area;
        }
        out.push_back({ci, cj, v});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dominance

struct DominanceVerdict {
    enum class Outcome { dominates, dominated_by, equal, incomparable };

    Outcome outcome = Outcome::equal;
    double worst_margin = 0.0;  // min over cells of a - b
    Vec2 worst_location;
    double tolerance = 0.0;
    double error_bound = 0.0;  // max combined per-cell error
};

inline const char* to_string(DominanceVerdict::Outcome o) {
    switch (o) {
        case DominanceVerdict::Outcome::dominates:
            return "dominates";
        case DominanceVerdict::Outcome::dominated_by:
            return "dominated_by";
        case DominanceVerdict::Outcome::equal:
            return "equal";
        case DominanceVerdict::Outcome::incomparable:
            return "incomparable";
    }
    return "?";
}

// Pointwise comparison of two fields on the same grid. The tolerance must
// exceed the combined numeric error; by default it is twice that error.
inline DominanceVerdict dominates(const Field& a, const Field& b, std::optional<double> tau = std::nullopt) {
    if (a.nx != b.nx || a.ny != b.ny || a.i0 != b.i0 || a.j0 != b.j0 ||
        std::abs(a.h - b.h) > 1e-12 * std::max(a.h, b.h)) {
        fail(ErrorKind::invalid_argument, "dominance needs fields on identical grids");
    }
    DominanceVerdict v;
    double err = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        err = std::max(err, a.error_at(k) + b.error_at(k));
    }
    v.error_bound = err;
    if (tau) {
        if (!(*tau > err)) {
            fail(ErrorKind::invalid_argument, "dominance tolerance " + text::g17(*tau) +
                                                  " does not exceed the numeric error bound " + text::g17(err));
        }
        v.tolerance = *tau;
    } else {
        v.tolerance = err > 0.0 ? 2.0 * err : 1e-300;
    }
    const double t = v.tolerance;
    bool ge = true, le = true, gt = false, lt = false;
    v.worst_margin = std::numeric_limits<double>::infinity();
    for (int ix = 0; ix < a.nx; ++ix) {
        for (int iy = 0; iy < a.ny; ++iy) {
            const double d = a.at(ix, iy) - b.at(ix, iy);
            if (d < v.worst_margin) {
                v.worst_margin = d;
                v.worst_location = a.cell_center(ix, iy);
            }
            ge = ge && d >= -t;
            le = le && d <= t;
            gt = gt || d > t;
            lt = lt || d < -t;
        }
    }
    using O = DominanceVerdict::Outcome;
    if (ge && le) {
        v.outcome = O::equal;
    } else if (ge && gt) {
        v.outcome = O::dominates;
    } else if (le && lt) {
        v.outcome = O::dominated_by;
    } else {
        v.outcome = O::incomparable;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Replacement margins

struct MarginReport {
    double increase = 0.0;     // integral of the field difference over the region
    double error_bound = 0.0;  // bound on |computed - exact|
};

namespace detail {

inline bool same_placement(const Window& w, const Placement& a, const Placement& b) {
    const Vec2 d = w.delta(a.iso.translation, b.iso.translation);
    return norm(d) <= 1e-9 && std::abs(std::remainder(a.iso.angle - b.iso.angle, 2.0 * std::numbers::pi)) <= 1e-12 &&
           a.iso.reflected == b.iso.reflected;
}

// Placements of `a` with no counterpart in `b`.
inline std::vector<Placement> difference(const Window& w, std::span<const Placement> a, std::span<const Placement> b) {
    std::vector<bool> used(b.size(), false);
    std::vector<Placement> out;
    for (const Placement& x : a) {
        bool found = false;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (!used[j] && same_placement(w, x, b[j])) {
                used[j] = true;
                found = true;
                break;
            }
        }
        if (!found) {
            out.push_back(x);
        }
    }
    return out;
}

inline std::vector<PlacedShape> instances_of(const Packing& frame, std::span<const Placement> ps, const Rect& cover) {
    // Reuse the packing's image enumeration for an arbitrary placement list.
    std::vector<PlacedShape> out;
    const Window& w = frame.window();
    for (const Placement& q : ps) {
        const PlacedShape base = place(frame.body(), q, w.wrap(q.iso.translation) - q.iso.translation);
        if (!w.is_torus()) {
            if (base.bbox().intersects(cover)) {
                out.push_back(base);
            }
            continue;
        }
        const Rect b = base.bbox();
        const int kx0 = static_cast<int>(std::ceil((cover.xmin - b.xmax) / w.width));
        const int kx1 = static_cast<int>(std::floor((cover.xmax - b.xmin) / w.width));
        const int ky0 = static_cast<int>(std::ceil((cover.ymin - b.ymax) / w.height));
        const int ky1 = static_cast<int>(std::floor((cover.ymax - b.ymin) / w.height));
        for (int kx = kx0; kx <= kx1; ++kx) {
            for (int ky = ky0; ky <= ky1; ++ky) {
                out.push_back(detail::shifted(base, {kx * w.width, ky * w.height}));
            }
        }
    }
    return out;
}

}  // namespace detail

// Increase of the field integral over `region` from `before` to `after`,
// computed from the changed elements only.
inline MarginReport replacement_margin(const Packing& before, const Packing& after, const GridMeasure& mu,
                                       const Rect& region) {
    require(before.body() == after.body() && before.window() == after.window(),
            "replacement_margin needs packings over the same body and window");
    const auto removed = detail::difference(before.window(), before.placements(), after.placements());
    const auto added = detail::difference(before.window(), after.placements(), before.placements());
    MarginReport rep;
    if (removed.empty() && added.empty()) {
        return rep;
    }
    const detail::CellRange r = detail::region_cells(region, mu.h);
    const Rect cover = Rect{r.i0 * mu.h, r.j0 * mu.h, r.i1 * mu.h, r.j1 * mu.h}.expanded((mu.half + 1) * mu.h);
    const auto plus = rasterize(detail::instances_of(before, added, cover), mu.h);
    const auto minus = rasterize(detail::instances_of(before, removed, cover), mu.h);
    const std::size_t n = static_cast<std::size_t>(r.i1 - r.i0 + 1) * (r.j1 - r.j0 + 1);
    std::vector<double> vp(n, 0.0), vm(n, 0.0);
    detail::accumulate_direct(mu, plus, r, 1.0, vp);
    detail::accumulate_direct(mu, minus, r, 1.0, vm);
    double sp = 0.0, sm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sp += vp[k];
        sm += vm[k];
    }
    rep.increase = sp - sm;
    const double changed_area = static_cast<double>(added.size() + removed.size()) * before.body().area();
    rep.error_bound = mu.relative_error * (sp + sm) +
                      static_cast<double>(n) * detail::truncation_bound(mu, changed_area) +
                      1e-13 * (sp + sm);
    return rep;
}

// ---------------------------------------------------------------------------
// Field export
//
//   packlab-field 1
//   units mass-per-cell
//   h <h>
//   cells <nx> <ny> <i0> <j0>
//   region <xmin> <ymin> <xmax> <ymax>
//   error <relative> <absolute>
//   ny lines, top row first, nx values each

inline void write_field(std::ostream& out, const Field& f) {
    out << "packlab-field 1\n";
    out << "units mass-per-cell\n";
    out << "h " << text::g17(f.h) << '\n';
    out << "cells " << f.nx << ' ' << f.ny << ' ' << f.i0 << ' ' << f.j0 << '\n';
    const Rect r = f.region();
    out << "region " << text::g17(r.xmin) << ' ' << text::g17(r.ymin) << ' ' << text::g17(r.xmax) << ' '
        << text::g17(r.ymax) << '\n';
    out << "error " << text::g17(f.relative_error) << ' ' << text::g17(f.absolute_error) << '\n';
    for (int iy = f.ny - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < f.nx; ++ix) {
            if (ix) {
                out << ' ';
            }
            out << text::g17(f.at(ix, iy));
        }
        out << '\n';
    }
}

inline Field read_field(std::istream& in) {
    auto header = text::next_record(in, "field header");
    if (header.size() != 2 || header[0] != "packlab-field" || header[1] != "1") {
        fail(ErrorKind::parse, "not a packlab-field version 1 file");
    }
    text::expect_keyword(text::next_record(in, "units"), "units", 2);
    auto hrec = text::next_record(in, "h");
    text::expect_keyword(hrec, "h", 2);
    Field f;
    f.h = text::to_double(hrec[1], "h");
    auto crec = text::next_record(in, "cells");
    text::expect_keyword(crec, "cells", 5);
    f.nx = static_cast<int>(text::to_int(crec[1], "nx"));
    f.ny = static_cast<int>(text::to_int(crec[2], "ny"));
    f.i0 = static_cast<int>(text::to_int(crec[3], "i0"));
    f.j0 = static_cast<int>(text::to_int(crec[4], "j0"));
    if (f.nx <= 0 || f.ny <= 0) {
        fail(ErrorKind::parse, "field must have at least one cell");
    }
    text::expect_keyword(text::next_record(in, "region"), "region", 5);
    auto erec = text::next_record(in, "error");
    text::expect_keyword(erec, "error", 3);
    f.relative_error = text::to_double(erec[1], "relative error");
    f.absolute_error = text::to_double(erec[2], "absolute error");
    f.values.assign(static_cast<std::size_t>(f.nx) * f.ny, 0.0);
    for (int iy = f.ny - 1; iy >= 0; --iy) {
        auto row = text::next_record(in, "field row");
        if (static_cast<int>(row.size()) != f.nx) {
            fail(ErrorKind::parse, "field row has the wrong number of values");
        }
        for (int ix = 0; ix < f.nx; ++ix) {
            f.values[static_cast<std::size_t>(ix) * f.ny + iy] = text::to_double(row[ix], "field value");
        }
    }
    return f;
}

}  // namespace packlab
