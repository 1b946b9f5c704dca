#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "packlab/geometry.hpp"
#include "packlab/packing.hpp"
#include "packlab/saturation.hpp"

namespace packlab {

namespace detail {

inline bool is_multiple(double value, double unit) {
    const double q = value / unit;
    return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q) && std::round(q) >= 1.0;
}

// Uniform double in [0, 1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

// Triangular lattice of tangent discs: (2r i + (j odd ? r : 0), sqrt(3) r j),
// with a disc at the origin. A torus must be commensurate with the lattice;
// a box keeps every lattice disc that fits.
inline Packing hexagonal(double r, const Window& w) {
    require(r > 0.0, "radius must be positive");
    const double dy = std::sqrt(3.0) * r;
    std::vector<Placement> ps;
    if (w.is_torus()) {
        if (!detail::is_multiple(w.width, 2.0 * r) || !detail::is_multiple(w.height, 2.0 * dy)) {
            fail(ErrorKind::invalid_argument,
                 "hexagonal torus needs width a multiple of 2r and height a multiple of 2*sqrt(3)*r");
        }
        const int cols = static_cast<int>(std::lround(w.width / (2.0 * r)));
        const int rows = static_cast<int>(std::lround(w.height / dy));
        for (int j = -rows / 2; j < rows - rows / 2; ++j) {
            for (int i = -cols - 1; i <= cols + 1; ++i) {
                const double x = 2.0 * r * i + ((j & 1) ? r : 0.0);
                if (x >= -0.5 * w.width - 1e-9 * r && x < 0.5 * w.width - 1e-9 * r) {
                    ps.push_back(Placement::at({x, dy * j}));
                }
            }
        }
    } else {
        const double xr = 0.5 * w.width - r + 1e-12 * r;
        const double yr = 0.5 * w.height - r + 1e-12 * r;
        const int jmax = static_cast<int>(std::floor(yr / dy));
        const int imax = static_cast<int>(std::floor(xr / (2.0 * r))) + 1;
        for (int j = -jmax; j <= jmax; ++j) {
            for (int i = -imax; i <= imax; ++i) {
                const double x = 2.0 * r * i + ((j & 1) ? r : 0.0);
                if (std::abs(x) <= xr) {
                    ps.push_back(Placement::at({x, dy * j}));
                }
            }
        }
    }
    return Packing(Body::disc(r), w, std::move(ps));
}

// Discs of radius r on the square lattice of the given pitch (>= 2r).
inline Packing square_lattice(double r, double pitch, const Window& w) {
    require(r > 0.0, "radius must be positive");
    require(pitch >= 2.0 * r - 1e-12 * r, "square lattice pitch must be at least 2r");
    std::vector<Placement> ps;
    if (w.is_torus()) {
        if (!detail::is_multiple(w.width, pitch) || !detail::is_multiple(w.height, pitch)) {
            fail(ErrorKind::invalid_argument, "square-lattice torus needs sides that are multiples of the pitch");
        }
        const int cols = static_cast<int>(std::lround(w.width / pitch));
        const int rows = static_cast<int>(std::lround(w.height / pitch));
        for (int i = -cols / 2; i < cols - cols / 2; ++i) {
            for (int j = -rows / 2; j < rows - rows / 2; ++j) {
                ps.push_back(Placement::at({pitch * i, pitch * j}));
            }
        }
    } else {
        const int imax = static_cast<int>(std::floor((0.5 * w.width - r + 1e-12 * r) / pitch));
        const int jmax = static_cast<int>(std::floor((0.5 * w.height - r + 1e-12 * r) / pitch));
        for (int i = -imax; i <= imax; ++i) {
            for (int j = -jmax; j <= jmax; ++j) {
                ps.push_back(Placement::at({pitch * i, pitch * j}));
            }
        }
    }
    return Packing(Body::disc(r), w, std::move(ps));
}

// The defect packing of the two-packing figure: hexagonal, minus the six
// discs tangent to the one at the origin. At unit spacing (r = 0.5) the
// missing centres are (+-0.5, +-sqrt(3)/2) and (+-1, 0).
inline Packing figure1_defect(double r, const Window& w) {
    const Packing hex = hexagonal(r, w);
    std::vector<Placement> keep;
    for (const Placement& q : hex.placements()) {
        const double d = norm(w.delta({}, q.iso.translation));
        if (std::abs(d - 2.0 * r) > 1e-6 * r) {
            keep.push_back(q);
        }
    }
    return Packing(hex.body(), w, std::move(keep));
}

// Default torus for the figure: 12 columns by 8 rows.
inline Window figure1_window(double r) { return Window::torus(24.0 * r, 8.0 * std::sqrt(3.0) * r); }

// Rejection sampling with mt19937_64(seed): centres uniform in the admissible
// domain (53-bit uniforms), kept when they overlap nothing placed so far.
inline Packing sparse_random(double r, std::size_t count, std::uint64_t seed, const Window& w,
                             std::size_t attempts_per_disc = 1000) {
    require(r > 0.0, "radius must be positive");
    const Body body = Body::disc(r);
    std::mt19937_64 rng(seed);
    const Rect dom = w.is_torus() ? w.domain() : w.domain().expanded(-r);
    require(dom.xmin <= dom.xmax && dom.ymin <= dom.ymax, "window too small for the disc");
    std::vector<Placement> ps;
    std::size_t attempts = 0;
    const std::size_t limit = attempts_per_disc * (count + 1);
    while (ps.size() < count) {
        if (++attempts > limit) {
            fail(ErrorKind::budget, "sparse_random placed only " + std::to_string(ps.size()) + " of " +
                                        std::to_string(count) + " discs within the attempt budget");
        }
        const double x = dom.xmin + detail::unit_uniform(rng) * dom.width();
        const double y = dom.ymin + detail::unit_uniform(rng) * dom.height();
        const Vec2 c{x, y};
        bool ok = true;
        for (const Placement& q : ps) {
            if (norm(w.delta(c, q.iso.translation)) < 2.0 * r + eps_geom) {
                ok = false;
                break;
            }
        }
        if (ok) {
            ps.push_back(Placement::at(c));
        }
    }
    return Packing(body, w, std::move(ps));
}

// Unit squares centred at (k, 0), ..., (2k-1, 0). The default window is the
// box of width 2(2k+2) and height 2 about the origin.
inline Window string_of_squares_window(int k) { return Window::box(2.0 * (2.0 * k + 2.0), 2.0); }

inline Packing string_of_squares(int k, std::optional<Window> window = std::nullopt) {
    require(k >= 1, "string_of_squares needs k >= 1");
    std::vector<Placement> ps;
    for (int i = k; i <= 2 * k - 1; ++i) {
        ps.push_back(Placement::at({static_cast<double>(i), 0.0}));
    }
    return Packing(Body::square(1.0), window.value_or(string_of_squares_window(k)), std::move(ps));
}

// The replace-one-by-two step from the k-string to the (k+1)-string: square k
// leaves, squares 2k and 2k+1 arrive.
inline ReplacementMove string_of_squares_move(int k) {
    require(k >= 1, "k must be at least 1");
    ReplacementMove m;
    m.removed.push_back(Placement::at({static_cast<double>(k), 0.0}));
    m.inserted.push_back(Placement::at({2.0 * k, 0.0}));
    m.inserted.push_back(Placement::at({2.0 * k + 1.0, 0.0}));
    std::vector<Placement> all = m.removed;
    all.insert(all.end(), m.inserted.begin(), m.inserted.end());
    m.connected = connected_union(Body::square(1.0), all);
    return m;
}

// ---------------------------------------------------------------------------

struct FamilySpec {
    enum class Family { hexagonal, square_lattice, figure1_defect, sparse_random };

    Family family = Family::hexagonal;
    double radius = 1.0;
    Window window = Window::torus(2.0, 2.0 * std::sqrt(3.0));
    double pitch = 0.0;  // square lattice; 0 means 2r
    std::uint64_t seed = 1;
    std::size_t count = 0;
};

inline std::optional<FamilySpec::Family> parse_family(const std::string& s) {
    using F = FamilySpec::Family;
    if (s == "hexagonal") return F::hexagonal;
    if (s == "square_lattice" || s == "square-lattice") return F::square_lattice;
    if (s == "figure1_defect" || s == "figure1-defect") return F::figure1_defect;
    if (s == "sparse_random" || s == "sparse-random") return F::sparse_random;
    return std::nullopt;
}

inline const char* to_string(FamilySpec::Family f) {
    switch (f) {
        case FamilySpec::Family::hexagonal:
            return "hexagonal";
        case FamilySpec::Family::square_lattice:
            return "square_lattice";
        case FamilySpec::Family::figure1_defect:
            return "figure1_defect";
        case FamilySpec::Family::sparse_random:
            return "sparse_random";
    }
    return "?";
}

inline Packing generate(const FamilySpec& s) {
    switch (s.family) {
        case FamilySpec::Family::hexagonal:
            return hexagonal(s.radius, s.window);
        case FamilySpec::Family::square_lattice:
            return square_lattice(s.radius, s.pitch > 0.0 ? s.pitch : 2.0 * s.radius, s.window);
        case FamilySpec::Family::figure1_defect:
            return figure1_defect(s.radius, s.window);
        case FamilySpec::Family::sparse_random:
            return sparse_random(s.radius, s.count, s.seed, s.window);
    }
    fail(ErrorKind::invalid_argument, "unknown family");
}

}  // namespace packlab
