#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "packlab/diffusion.hpp"
#include "packlab/geometry.hpp"
#include "packlab/packing.hpp"
#include "packlab/text.hpp"

namespace packlab {

// Remove k placements, insert k+1.
struct ReplacementMove {
    std::vector<Placement> removed;
    std::vector<Placement> inserted;
    bool connected = false;  // union of removed and inserted bodies is connected
};

struct SaturationVerdict {
    enum class Outcome { saturated_up_to_resolution, counterexample, budget_exhausted };

    Outcome outcome = Outcome::saturated_up_to_resolution;
    double resolution = 0.0;
    std::optional<ReplacementMove> move;
    std::size_t evaluations = 0;  // candidate evaluations spent on k >= 1
};

inline const char* to_string(SaturationVerdict::Outcome o) {
    switch (o) {
        case SaturationVerdict::Outcome::saturated_up_to_resolution:
            return "saturated_up_to_resolution";
        case SaturationVerdict::Outcome::counterexample:
            return "counterexample";
        case SaturationVerdict::Outcome::budget_exhausted:
            return "budget_exhausted";
    }
    return "?";
}

struct SearchOptions {
    double h = 0.1;
    int angle_steps = 64;                    // polygon bodies only
    bool reflections = false;                // also try mirrored copies
    bool require_connected = false;          // only accept connected moves
    bool refine = true;                      // slide insertions to tangency
    std::size_t node_budget = 10'000'000;    // candidate evaluations for k >= 1
};

namespace detail {

inline Rect intersect(const Rect& a, const Rect& b) {
    return {std::max(a.xmin, b.xmin), std::max(a.ymin, b.ymin), std::min(a.xmax, b.xmax), std::min(a.ymax, b.ymax)};
}

inline bool rect_empty(const Rect& r) { return r.xmin > r.xmax || r.ymin > r.ymax; }

inline auto lex_key(const Placement& q) {
    return std::make_tuple(q.iso.translation.x, q.iso.translation.y, q.iso.angle, q.iso.reflected);
}

inline bool lex_less(const Placement& a, const Placement& b) { return lex_key(a) < lex_key(b); }

struct BudgetExhausted {};

// Retained packing (minus removed indices) plus a stack of inserted copies;
// answers "can this placement be added?".
class InsertionScene {
public:
    InsertionScene(const Packing& p, const Rect& region, std::vector<bool> removed)
        : p_(p),
          removed_(std::move(removed)),
          index_(p, region.expanded(2.0 * p.body().radius() + 1e-6)),
          radius_(p.body().radius()) {
        const Window& w = p.window();
        if (w.is_torus()) {
            centers_ = region;
        } else {
            const double shrink = p.body().is_disc() ? radius_ : 0.0;
            centers_ = intersect(region, w.domain().expanded(-shrink));
        }
    }

    const Packing& packing() const { return p_; }
    const Rect& centers() const { return centers_; }
    bool has_room() const { return !rect_empty(centers_); }
    const std::vector<Placement>& inserted() const { return inserted_; }
    const InstanceIndex& index() const { return index_; }
    bool removed(std::size_t i) const { return removed_[i]; }

    bool feasible(const Placement& q) const {
        if (!centers_.contains(q.iso.translation, 1e-12 * (1.0 + radius_))) {
            return false;
        }
        const PlacedShape s = place(p_.body(), q);
        if (!p_.window().is_torus() && !s.disc) {
            const Rect b = s.bbox();
            const Rect dom = p_.window().domain();
            if (b.xmin < dom.xmin - eps_geom || b.xmax > dom.xmax + eps_geom || b.ymin < dom.ymin - eps_geom ||
                b.ymax > dom.ymax + eps_geom) {
                return false;
            }
        }
        bool ok = true;
        index_.near(s.center, radius_, [&](const Instance& inst) {
            if (!removed_[inst.index] && shapes_overlap(s, inst.shape)) {
                ok = false;
            }
            return ok;
        });
        if (!ok) {
            return false;
        }
        for (const Placement& other : inserted_) {
            if (!compatible(q, other)) {
                return false;
            }
        }
        return true;
    }

    // Two candidate placements do not overlap (periodic images included).
    bool compatible(const Placement& a, const Placement& b) const {
        const Window& w = p_.window();
        const PlacedShape sa = place(p_.body(), a);
        if (!w.is_torus()) {
            if (distance(a.iso.translation, b.iso.translation) >= 2.0 * radius_) {
                return true;
            }
            return !shapes_overlap(sa, place(p_.body(), b));
        }
        const Vec2 base = a.iso.translation + w.delta(a.iso.translation, b.iso.translation) - b.iso.translation;
        for (int kx = -1; kx <= 1; ++kx) {
            for (int ky = -1; ky <= 1; ++ky) {
                const Vec2 off = base + Vec2{kx * w.width, ky * w.height};
                if (distance(a.iso.translation, b.iso.translation + off) >= 2.0 * radius_) {
                    continue;
                }
                if (shapes_overlap(sa, place(p_.body(), b, off))) {
                    return false;
                }
            }
        }
        return true;
    }

    void push(const Placement& q) { inserted_.push_back(q); }
    void pop() { inserted_.pop_back(); }

private:
    const Packing& p_;
    std::vector<bool> removed_;
    InstanceIndex index_;
    double radius_;
    Rect centers_;
    std::vector<Placement> inserted_;
};

// Intersections of the circles of radius 2r about the given centres with each
// other and with the sides of `box`, plus the corners of `box`: the vertices of
// the feasible-centre set for a disc of radius r.
inline std::vector<Vec2> contact_points(std::span<const Vec2> centres, double r, const Rect& box,
                                        std::span<const Vec2> fresh = {}) {
    const double R = 2.0 * r;
    std::vector<Vec2> out;
    auto keep = [&](Vec2 p) {
        if (box.contains(p, 1e-9 * (1.0 + r))) {
            p.x = std::clamp(p.x, box.xmin, box.xmax);
            p.y = std::clamp(p.y, box.ymin, box.ymax);
            out.push_back(p);
        }
    };
    auto circle_circle = [&](Vec2 a, Vec2 b) {
        const Vec2 d = b - a;
        const double dd = norm(d);
        if (dd > 2.0 * R + 1e-12 || dd < 1e-12) {
            return;
        }
        const Vec2 mid = a + 0.5 * d;
        const double t = std::sqrt(std::max(R * R - 0.25 * dd * dd, 0.0));
        const Vec2 perp{-d.y / dd, d.x / dd};
        keep(mid + t * perp);
        keep(mid - t * perp);
    };
    auto circle_edges = [&](Vec2 c) {
        for (double x : {box.xmin, box.xmax}) {
            const double dx = x - c.x;
            if (std::abs(dx) <= R) {
                const double t = std::sqrt(R * R - dx * dx);
                keep({x, c.y + t});
                keep({x, c.y - t});
            }
        }
        for (double y : {box.ymin, box.ymax}) {
            const double dy = y - c.y;
            if (std::abs(dy) <= R) {
                const double t = std::sqrt(R * R - dy * dy);
                keep({c.x + t, y});
                keep({c.x - t, y});
            }
        }
    };
    if (fresh.empty()) {
        keep({box.xmin, box.ymin});
        keep({box.xmin, box.ymax});
        keep({box.xmax, box.ymin});
        keep({box.xmax, box.ymax});
        for (std::size_t i = 0; i < centres.size(); ++i) {
            circle_edges(centres[i]);
            for (std::size_t j = i + 1; j < centres.size(); ++j) {
                circle_circle(centres[i], centres[j]);
            }
        }
    } else {
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            circle_edges(fresh[i]);
            for (const Vec2& c : centres) {
                circle_circle(fresh[i], c);
            }
            for (std::size_t j = i + 1; j < fresh.size(); ++j) {
                circle_circle(fresh[i], fresh[j]);
            }
        }
    }
    return out;
}

inline std::vector<double> candidate_angles(const Body& body, const SearchOptions& opt) {
    if (body.is_disc()) {
        return {0.0};
    }
    require(opt.angle_steps >= 1, "angle_steps must be at least 1");
    std::vector<double> out;
    for (int a = 0; a < opt.angle_steps; ++a) {
        out.push_back(2.0 * std::numbers::pi * a / opt.angle_steps);
    }
    return out;
}

inline std::vector<Placement> sorted_placements(const std::vector<Vec2>& pts, std::span<const double> angles,
                                                bool reflections) {
    std::vector<Placement> out;
    for (const Vec2& p : pts) {
        for (double a : angles) {
            out.push_back(Placement::at(p, a, false));
            if (reflections) {
                out.push_back(Placement::at(p, a, true));
            }
        }
    }
    std::sort(out.begin(), out.end(), lex_less);
    std::vector<Placement> uniq;
    for (const Placement& q : out) {
        if (!uniq.empty() && uniq.back().iso.angle == q.iso.angle && uniq.back().iso.reflected == q.iso.reflected &&
            distance(uniq.back().iso.translation, q.iso.translation) <= 1e-12) {
            continue;
        }
        uniq.push_back(q);
    }
    return uniq;
}

inline int grid_lo(double v, double h) { return static_cast<int>(std::ceil(v / h - 1e-9)); }
inline int grid_hi(double v, double h) { return static_cast<int>(std::floor(v / h + 1e-9)); }

inline double grid_coord(int i, double h, double lo, double hi) { return std::clamp(i * h, lo, hi); }

// Grid points of pitch h (aligned with the origin) inside `box`.
inline std::vector<Vec2> grid_points(const Rect& box, double h) {
    std::vector<Vec2> out;
    if (rect_empty(box)) {
        return out;
    }
    for (int i = grid_lo(box.xmin, h); i <= grid_hi(box.xmax, h); ++i) {
        for (int j = grid_lo(box.ymin, h); j <= grid_hi(box.ymax, h); ++j) {
            out.push_back({grid_coord(i, h, box.xmin, box.xmax), grid_coord(j, h, box.ymin, box.ymax)});
        }
    }
    return out;
}

inline std::vector<Vec2> retained_centres(const InsertionScene& scene, const Rect& near) {
    std::vector<Vec2> out;
    for (const Instance& inst : scene.index().items()) {
        if (!scene.removed(inst.index) && near.contains(inst.shape.center)) {
            out.push_back(inst.shape.center);
        }
    }
    return out;
}

// Slide a feasible placement towards -x, then -y, until it touches something.
inline Placement refine_placement(const InsertionScene& scene, Placement q, double h) {
    const double step = std::min(h, 0.25 * scene.packing().body().radius());
    const int max_steps = 1'000'000;
    for (int axis = 0; axis < 2; ++axis) {
        // Moves stay inside the centre region so the result never relies on
        // the slack of the centre test.
        const double floor_v = axis == 0 ? scene.centers().xmin : scene.centers().ymin;
        auto moved = [&](const Placement& from, double s) {
            Placement out = from;
            double& v = axis == 0 ? out.iso.translation.x : out.iso.translation.y;
            v = std::max(v - s, std::min(v, floor_v));
            return out;
        };
        int steps = 0;
        while (steps++ < max_steps) {
            const Placement next = moved(q, step);
            if (next == q || !scene.feasible(next)) {
                break;
            }
            q = next;
        }
        double lo = 0.0;
        double hi = step;
        for (int it = 0; it < 60 && hi - lo > 1e-15 * (1.0 + std::abs(q.iso.translation.x) + std::abs(q.iso.translation.y)); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (scene.feasible(moved(q, mid))) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        q = moved(q, lo);
    }
    return q;
}

// First feasible placement in lexicographic (x, y, angle) order over the grid
// and the contact candidates.
inline std::optional<Placement> scan_insertion(const InsertionScene& scene, const SearchOptions& opt) {
    if (!scene.has_room()) {
        return std::nullopt;
    }
    const Body& body = scene.packing().body();
    const Rect& box = scene.centers();
    const auto angles = candidate_angles(body, opt);
    std::vector<Placement> contacts;
    if (body.is_disc()) {
        const auto centres = retained_centres(scene, box.expanded(2.0 * body.radius() + 1e-9));
        contacts = sorted_placements(contact_points(centres, body.radius(), box), angles, false);
    }
    std::size_t next_contact = 0;
    auto flush = [&](const Placement* upto) -> std::optional<Placement> {
        while (next_contact < contacts.size() && (upto == nullptr || lex_less(contacts[next_contact], *upto))) {
            const Placement& c = contacts[next_contact++];
            if (scene.feasible(c)) {
                return c;
            }
        }
        return std::nullopt;
    };
    const double h = opt.h;
    for (int i = grid_lo(box.xmin, h); i <= grid_hi(box.xmax, h); ++i) {
        const double x = grid_coord(i, h, box.xmin, box.xmax);
        for (int j = grid_lo(box.ymin, h); j <= grid_hi(box.ymax, h); ++j) {
            const double y = grid_coord(j, h, box.ymin, box.ymax);
            for (double a : angles) {
                for (int refl = 0; refl <= (opt.reflections && !body.is_disc() ? 1 : 0); ++refl) {
                    const Placement g = Placement::at({x, y}, a, refl == 1);
                    if (auto c = flush(&g)) {
                        return c;
                    }
                    if (scene.feasible(g)) {
                        return g;
                    }
                }
            }
        }
    }
    return flush(nullptr);
}

// Depth-first search for `need` more insertions drawn from `pool`.
class ReplacementSearch {
public:
    ReplacementSearch(InsertionScene& scene, const SearchOptions& opt, std::span<const Placement> removed,
                      std::size_t& evaluations)
        : scene_(scene), opt_(opt), removed_(removed.begin(), removed.end()), evaluations_(evaluations) {}

    bool run(std::size_t need, const std::vector<Placement>& pool) {
        if (need == 0) {
            return !opt_.require_connected || move_connected();
        }
        for (std::size_t a = 0; a < pool.size(); ++a) {
            const Placement& q = pool[a];
            scene_.push(q);
            std::vector<Placement> next;
            if (need > 1) {
                for (std::size_t b = a + 1; b < pool.size(); ++b) {
                    tick();
                    if (scene_.compatible(pool[b], q)) {
                        next.push_back(pool[b]);
                    }
                }
                for (const Placement& c : fresh_contacts(q)) {
                    tick();
                    if (scene_.feasible(c)) {
                        next.push_back(c);
                    }
                }
            }
            if (run(need - 1, next)) {
                return true;
            }
            scene_.pop();
        }
        return false;
    }

    bool move_connected() const { return union_connected(scene_.packing(), removed_, scene_.inserted()); }

    static bool union_connected(const Packing& p, std::span<const Placement> removed,
                                std::span<const Placement> inserted) {
        std::vector<Placement> all(removed.begin(), removed.end());
        all.insert(all.end(), inserted.begin(), inserted.end());
        if (all.empty()) {
            return false;
        }
        const Window& w = p.window();
        const Vec2 anchor = all.front().iso.translation;
        for (Placement& q : all) {
            q.iso.translation = anchor + w.delta(anchor, q.iso.translation);
        }
        return connected_union(p.body(), all);
    }

private:
    void tick() {
        if (++evaluations_ > opt_.node_budget) {
            throw BudgetExhausted{};
        }
    }

    std::vector<Placement> fresh_contacts(const Placement& q) const {
        const Body& body = scene_.packing().body();
        if (!body.is_disc()) {
            return {};
        }
        const double r = body.radius();
        const Vec2 c = q.iso.translation;
        auto centres = retained_centres(scene_, Rect::centered(c, 4.0 * r + 1e-9, 4.0 * r + 1e-9));
        for (std::size_t i = 0; i + 1 < scene_.inserted().size(); ++i) {
            centres.push_back(scene_.inserted()[i].iso.translation);
        }
        const Vec2 fresh[] = {c};
        std::vector<Vec2> pts = contact_points(centres, r, scene_.centers(), fresh);
        const double angles[] = {0.0};
        return sorted_placements(pts, angles, false);
    }

    InsertionScene& scene_;
    const SearchOptions& opt_;
    std::vector<Placement> removed_;
    std::size_t& evaluations_;
};

// Indices of placements with an instance meeting the region, nearest first.
inline std::vector<std::size_t> removal_order(const Packing& p, const Rect& region) {
    const Vec2 c = region.center();
    std::vector<double> best(p.size(), std::numeric_limits<double>::infinity());
    p.for_each_instance(region, [&](const Instance& inst) {
        best[inst.index] = std::min(best[inst.index], distance(inst.shape.center, c));
    });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (std::isfinite(best[i])) {
            out.push_back(i);
        }
    }
    std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) { return best[a] < best[b]; });
    return out;
}

inline bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
    const std::size_t k = idx.size();
    for (std::size_t i = k; i-- > 0;) {
        if (idx[i] < n - k + i) {
            ++idx[i];
            for (std::size_t j = i + 1; j < k; ++j) {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    return false;
}

}  // namespace detail

// A placement with its reference point in `region` that overlaps nothing,
// found by a pitch-h scan (64 angles for polygons; exact contact points for
// discs) and slid to tangency. Absent means none at this resolution.
inline std::optional<Placement> find_insertion(const Packing& p, const Rect& region, const SearchOptions& opt) {
    require(opt.h > 0.0, "find_insertion needs h > 0");
    detail::InsertionScene scene(p, region, std::vector<bool>(p.size(), false));
    auto q = detail::scan_insertion(scene, opt);
    if (q && opt.refine) {
        q = detail::refine_placement(scene, *q, opt.h);
    }
    return q;
}

inline std::optional<Placement> find_insertion(const Packing& p, const Rect& region, double h) {
    SearchOptions opt;
    opt.h = h;
    return find_insertion(p, region, opt);
}

// Searches replacements of k = 0..n-1 bodies meeting `region` by k+1 bodies
// with reference points in `region`; subsets in increasing k, then by
// distance from the region centre.
inline SaturationVerdict check_n_saturated(const Packing& p, int n, const Rect& region, const SearchOptions& opt) {
    require(n >= 1, "n must be at least 1");
    require(opt.h > 0.0, "h must be positive");
    SaturationVerdict verdict;
    verdict.resolution = opt.h;

    auto found = [&](std::vector<Placement> removed, std::vector<Placement> inserted) {
        ReplacementMove m;
        m.connected = detail::ReplacementSearch::union_connected(p, removed, inserted);
        m.removed = std::move(removed);
        m.inserted = std::move(inserted);
        verdict.outcome = SaturationVerdict::Outcome::counterexample;
        verdict.move = std::move(m);
        return verdict;
    };

    // k = 0: plain insertion.
    if (auto q = find_insertion(p, region, opt)) {
        return found({}, {*q});
    }

    const auto order = detail::removal_order(p, region);
    const Body& body = p.body();
    const auto angles = detail::candidate_angles(body, opt);
    const double reach = 2.0 * body.radius();
    try {
        for (int k = 1; k < n && static_cast<std::size_t>(k) <= order.size(); ++k) {
            std::vector<std::size_t> pick(static_cast<std::size_t>(k));
            for (std::size_t i = 0; i < pick.size(); ++i) {
                pick[i] = i;
            }
            do {
                if (++verdict.evaluations > opt.node_budget) {
                    throw detail::BudgetExhausted{};
                }
                std::vector<bool> mask(p.size(), false);
                std::vector<Placement> removed;
                for (std::size_t i : pick) {
                    mask[order[i]] = true;
                    removed.push_back(p.placements()[order[i]]);
                }
                detail::InsertionScene scene(p, region, mask);
                if (!scene.has_room()) {
                    continue;
                }
                // Every inserted body must meet space freed by the removal,
                // otherwise a smaller k would already have succeeded.
                std::vector<Vec2> pts;
                std::vector<Vec2> freed;
                for (const Instance& inst : scene.index().items()) {
                    if (mask[inst.index]) {
                        freed.push_back(inst.shape.center);
                        const auto g = detail::grid_points(
                            detail::intersect(scene.centers(), Rect::centered(inst.shape.center, reach, reach)), opt.h);
                        pts.insert(pts.end(), g.begin(), g.end());
                    }
                }
                if (body.is_disc()) {
                    Rect near{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                              -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
                    for (const Vec2& c : freed) {
                        near.xmin = std::min(near.xmin, c.x);
                        near.ymin = std::min(near.ymin, c.y);
                        near.xmax = std::max(near.xmax, c.x);
                        near.ymax = std::max(near.ymax, c.y);
                    }
                    const auto centres = detail::retained_centres(scene, near.expanded(3.0 * reach));
                    const auto c = detail::contact_points(centres, body.radius(), scene.centers());
                    for (const Vec2& v : c) {
                        for (const Vec2& f : freed) {
                            if (distance(v, f) < reach) {
                                pts.push_back(v);
                                break;
                            }
                        }
                    }
                }
                std::vector<Placement> pool;
                for (const Placement& q : detail::sorted_placements(pts, angles, opt.reflections && !body.is_disc())) {
                    if (++verdict.evaluations > opt.node_budget) {
                        throw detail::BudgetExhausted{};
                    }
                    if (scene.feasible(q)) {
                        pool.push_back(q);
                    }
                }
                if (pool.empty()) {
                    continue;
                }
                detail::ReplacementSearch search(scene, opt, removed, verdict.evaluations);
                if (search.run(static_cast<std::size_t>(k) + 1, pool)) {
                    std::vector<Placement> inserted = scene.inserted();
                    if (opt.refine) {
                        std::vector<Placement> tight = inserted;
                        for (std::size_t i = 0; i < tight.size(); ++i) {
                            while (!scene.inserted().empty()) {
                                scene.pop();
                            }
                            for (std::size_t j = 0; j < tight.size(); ++j) {
                                if (j != i) {
                                    scene.push(tight[j]);
                                }
                            }
                            tight[i] = detail::refine_placement(scene, tight[i], opt.h);
                        }
                        if (!opt.require_connected || detail::ReplacementSearch::union_connected(p, removed, tight)) {
                            inserted = std::move(tight);
                        }
                    }
                    return found(std::move(removed), std::move(inserted));
                }
            } while (detail::next_combination(pick, order.size()));
        }
    } catch (const detail::BudgetExhausted&) {
        verdict.outcome = SaturationVerdict::Outcome::budget_exhausted;
        return verdict;
    }
    return verdict;
}

inline SaturationVerdict check_n_saturated(const Packing& p, int n, const Rect& region, double h) {
    SearchOptions opt;
    opt.h = h;
    return check_n_saturated(p, n, region, opt);
}

// Removes the move's placements (matched up to periodic wrapping) and adds the
// inserted ones; the result is re-validated.
inline Packing apply_replacement(const Packing& p, const ReplacementMove& m) {
    std::vector<Placement> keep = p.placements();
    for (const Placement& r : m.removed) {
        auto it = std::find_if(keep.begin(), keep.end(),
                               [&](const Placement& q) { return detail::same_placement(p.window(), q, r); });
        if (it == keep.end()) {
            fail(ErrorKind::invariant, "move removes a placement at (" + text::g17(r.iso.translation.x) + ", " +
                                           text::g17(r.iso.translation.y) + ") that is not in the packing");
        }
        keep.erase(it);
    }
    const std::size_t retained = keep.size();
    keep.insert(keep.end(), m.inserted.begin(), m.inserted.end());
    try {
        return with_placements(p, std::move(keep));
    } catch (const Error& e) {
        fail(ErrorKind::invariant, std::string("move rejected (placements >= ") + std::to_string(retained) +
                                       " are inserted): " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Connected saturation process

struct MarginRecord {
    Rect region;
    double increase = 0.0;
    double error_bound = 0.0;
    bool meets_region = false;
};

struct IterationTrace {
    Packing initial;
    Packing terminal;
    int n = 1;
    double h = 0.0;
    std::vector<ReplacementMove> moves;
    std::vector<MarginRecord> margins;  // one per move
    bool exhausted = false;          // move budget reached
    bool search_exhausted = false;   // a single search ran out of its node budget
};

struct IterateOptions {
    SearchOptions search;
    std::optional<Rect> margin_region;    // default: the search region
    std::optional<GridMeasure> measure;   // default: lemma_mu(n) at pitch 0.05 diameters
};

namespace detail {

inline bool move_meets(const Packing& p, const ReplacementMove& m, const Rect& region) {
    auto meets = [&](const Placement& q) {
        const Window& w = p.window();
        const PlacedShape s = place(p.body(), q, w.wrap(q.iso.translation) - q.iso.translation);
        if (!w.is_torus()) {
            return s.bbox().intersects(region);
        }
        bool hit = false;
        const Rect b = s.bbox();
        for (int kx = -2; kx <= 2 && !hit; ++kx) {
            for (int ky = -2; ky <= 2 && !hit; ++ky) {
                hit = b.translated({kx * w.width, ky * w.height}).intersects(region);
            }
        }
        return hit;
    };
    return std::any_of(m.removed.begin(), m.removed.end(), meets) ||
           std::any_of(m.inserted.begin(), m.inserted.end(), meets);
}

}  // namespace detail

// Applies connected replacements (k < n) until none is found at resolution h
// or `move_budget` moves have been made. Each move's field increase over the
// margin region is recorded.
inline IterationTrace saturation_iterate(const Packing& p, int n, const Rect& region, double h,
                                         std::size_t move_budget, IterateOptions opt = {}) {
    require(n >= 1, "n must be at least 1");
    require(h > 0.0, "h must be positive");
    opt.search.h = h;
    opt.search.require_connected = true;
    const double diam = p.body().diameter();
    const GridMeasure mu = opt.measure ? *opt.measure : lemma_mu(n, 0.05 * diam, lemma_default_cutoff(n, diam), diam);
    const Rect margin_region = opt.margin_region.value_or(region);

    IterationTrace trace{p, p, n, h, {}, {}, false, false};
    while (true) {
        const auto v = check_n_saturated(trace.terminal, n, region, opt.search);
        if (v.outcome == SaturationVerdict::Outcome::budget_exhausted) {
            trace.search_exhausted = true;
            break;
        }
        if (v.outcome == SaturationVerdict::Outcome::saturated_up_to_resolution) {
            break;
        }
        if (trace.moves.size() >= move_budget) {
            trace.exhausted = true;
            break;
        }
        Packing next = apply_replacement(trace.terminal, *v.move);
        const MarginReport rep = replacement_margin(trace.terminal, next, mu, margin_region);
        trace.margins.push_back({margin_region, rep.increase, rep.error_bound,
                                 detail::move_meets(trace.terminal, *v.move, margin_region)});
        trace.moves.push_back(*v.move);
        trace.terminal = std::move(next);
    }
    return trace;
}

// Replays the moves of a trace from its initial packing.
inline Packing replay(const IterationTrace& t) {
    Packing cur = t.initial;
    for (const ReplacementMove& m : t.moves) {
        cur = apply_replacement(cur, m);
    }
    return cur;
}

// Trace format:
//
//   packlab-trace 1
//   n <n>
//   h <h>
//   status complete|move-budget|search-budget
//   initial
//   <packing>
//   moves <count>
//   move <removed> <inserted> <connected 0|1>
//   <x> <y> <angle> <reflected>            (removed, then inserted)
//   margin <xmin> <ymin> <xmax> <ymax> <increase> <error> <meets 0|1>
//   terminal
//   <packing>

inline void write_trace(std::ostream& out, const IterationTrace& t) {
    auto placement = [&](const Placement& q) {
        out << text::g17(q.iso.translation.x) << ' ' << text::g17(q.iso.translation.y) << ' '
            << text::g17(q.iso.angle) << ' ' << (q.iso.reflected ? 1 : 0) << '\n';
    };
    out << "packlab-trace 1\n";
    out << "n " << t.n << '\n';
    out << "h " << text::g17(t.h) << '\n';
    out << "status " << (t.search_exhausted ? "search-budget" : t.exhausted ? "move-budget" : "complete") << '\n';
    out << "initial\n";
    write_packing(out, t.initial);
    out << "moves " << t.moves.size() << '\n';
    for (std::size_t i = 0; i < t.moves.size(); ++i) {
        const ReplacementMove& m = t.moves[i];
        out << "move " << m.removed.size() << ' ' << m.inserted.size() << ' ' << (m.connected ? 1 : 0) << '\n';
        for (const Placement& q : m.removed) {
            placement(q);
        }
        for (const Placement& q : m.inserted) {
            placement(q);
        }
        const MarginRecord& r = t.margins[i];
        out << "margin " << text::g17(r.region.xmin) << ' ' << text::g17(r.region.ymin) << ' '
            << text::g17(r.region.xmax) << ' ' << text::g17(r.region.ymax) << ' ' << text::g17(r.increase) << ' '
            << text::g17(r.error_bound) << ' ' << (r.meets_region ? 1 : 0) << '\n';
    }
    out << "terminal\n";
    write_packing(out, t.terminal);
}

inline IterationTrace read_trace(std::istream& in) {
    auto header = text::next_record(in, "trace header");
    if (header.size() != 2 || header[0] != "packlab-trace" || header[1] != "1") {
        fail(ErrorKind::parse, "not a packlab-trace version 1 file");
    }
    auto nrec = text::next_record(in, "n");
    text::expect_keyword(nrec, "n", 2);
    auto hrec = text::next_record(in, "h");
    text::expect_keyword(hrec, "h", 2);
    auto srec = text::next_record(in, "status");
    text::expect_keyword(srec, "status", 2);
    text::expect_keyword(text::next_record(in, "initial"), "initial", 1);
    Packing initial = read_packing(in);
    auto mrec = text::next_record(in, "moves");
    text::expect_keyword(mrec, "moves", 2);
    const long long count = text::to_int(mrec[1], "move count");
    if (count < 0) {
        fail(ErrorKind::parse, "negative move count");
    }
    auto placement = [&]() {
        auto rec = text::next_record(in, "placement");
        if (rec.size() != 4) {
            fail(ErrorKind::parse, "placement line needs x y angle reflected");
        }
        return Placement::at({text::to_double(rec[0], "x"), text::to_double(rec[1], "y")},
                             text::to_double(rec[2], "angle"), text::to_int(rec[3], "reflected flag") == 1);
    };
    std::vector<ReplacementMove> moves;
    std::vector<MarginRecord> margins;
    for (long long i = 0; i < count; ++i) {
        auto rec = text::next_record(in, "move");
        text::expect_keyword(rec, "move", 4);
        ReplacementMove m;
        const long long nr = text::to_int(rec[1], "removed count");
        const long long ni = text::to_int(rec[2], "inserted count");
        if (nr < 0 || ni < 0) {
            fail(ErrorKind::parse, "negative move size");
        }
        m.connected = text::to_int(rec[3], "connected flag") == 1;
        for (long long j = 0; j < nr; ++j) {
            m.removed.push_back(placement());
        }
        for (long long j = 0; j < ni; ++j) {
            m.inserted.push_back(placement());
        }
        auto g = text::next_record(in, "margin");
        text::expect_keyword(g, "margin", 8);
        MarginRecord r;
        r.region = {text::to_double(g[1], "xmin"), text::to_double(g[2], "ymin"), text::to_double(g[3], "xmax"),
                    text::to_double(g[4], "ymax")};
        r.increase = text::to_double(g[5], "increase");
        r.error_bound = text::to_double(g[6], "error");
        r.meets_region = text::to_int(g[7], "meets flag") == 1;
        moves.push_back(std::move(m));
        margins.push_back(r);
    }
    text::expect_keyword(text::next_record(in, "terminal"), "terminal", 1);
    Packing terminal = read_packing(in);
    IterationTrace t{std::move(initial), std::move(terminal), static_cast<int>(text::to_int(nrec[1], "n")),
                     text::to_double(hrec[1], "h"), std::move(moves), std::move(margins), false, false};
    t.exhausted = srec[1] == "move-budget";
    t.search_exhausted = srec[1] == "search-budget";
    return t;
}

// ---------------------------------------------------------------------------
// Loosening

struct LoosenResult {
    Packing packing;
    std::optional<double> alpha;  // half the minimum gap; absent with < 2 placements
};

// Smallest gap between distinct copies, periodic images included.
inline std::optional<double> min_pairwise_gap(const Packing& p) {
    if (p.size() < 2) {
        return std::nullopt;
    }
    const Window& w = p.window();
    const bool torus = w.is_torus();
    std::optional<double> best;
    auto consider = [&](double g) { best = best ? std::min(*best, g) : g; };
    for (std::size_t i = 0; i < p.size(); ++i) {
        const PlacedShape si = p.shape(i);
        for (std::size_t j = i; j < p.size(); ++j) {
            if (!torus) {
                if (j != i) {
                    consider(shapes_gap(si, p.shape(j)));
                }
                continue;
            }
            const Vec2 pi = p.placements()[i].iso.translation;
            const Vec2 pj = p.placements()[j].iso.translation;
            const Vec2 base = pi + w.delta(pi, pj) - pj;
            for (int kx = -1; kx <= 1; ++kx) {
                for (int ky = -1; ky <= 1; ++ky) {
                    const Vec2 off = base + Vec2{kx * w.width, ky * w.height};
                    if (i == j && norm(off) < 1e-12) {
                        continue;
                    }
                    consider(shapes_gap(si, place(p.body(), p.placements()[j], off)));
                }
            }
        }
    }
    return best;
}

// Expands positions and window by 1+gamma about the origin and renests an
// original-size copy inside each expanded copy.
inline LoosenResult loosen(const Packing& p, double gamma) {
    require(gamma > 0.0, "gamma must be positive");
    const auto g = self_nests(p.body(), gamma);
    if (!g) {
        fail(ErrorKind::invalid_argument, "body does not self-nest at this gamma; cannot loosen");
    }
    const double s = 1.0 + gamma;
    std::vector<Placement> ps;
    ps.reserve(p.size());
    for (const Placement& q : p.placements()) {
        const Isometry expanded{q.iso.angle, s * q.iso.translation, q.iso.reflected};
        ps.push_back(Placement{expanded.after(*g)});
    }
    Packing out(p.body(), p.window().scaled(s), std::move(ps));
    const auto gap = min_pairwise_gap(out);
    return {out, gap ? std::optional<double>(0.5 * *gap) : std::nullopt};
}

// Both sides of the inequality d * gamma * delta < eps * area(K) / area(B(2r))
// used to pick the loosening factor.
struct LooseningBudget {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

inline LooseningBudget loosening_budget(const Body& body, double gamma, double epsilon, double r, double delta,
                                        int dimension = 2) {
    require(gamma > 0.0 && epsilon > 0.0 && r > 0.0, "gamma, epsilon and r must be positive");
    require(delta >= 0.0 && delta <= 1.0, "density must lie in [0, 1]");
    LooseningBudget b;
    b.lhs = dimension * gamma * delta;
    b.rhs = epsilon * body.area() / (std::numbers::pi * 4.0 * r * r);
    b.holds = b.lhs < b.rhs;
    return b;
}

}  // namespace packlab
