#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "packlab/constructions.hpp"
#include "packlab/saturation.hpp"

using namespace packlab;

namespace {

const double s3 = std::sqrt(3.0);

// Brute-force insertion oracle for discs: every grid point of pitch h in the
// admissible region, checked against every copy by plain distance tests.
bool oracle_insertable(const Packing& p, const Rect& region, double h) {
    const double r = p.body().radius();
    const Window& w = p.window();
    Rect c = region;
    if (!w.is_torus()) {
        const Rect d = w.domain().expanded(-r);
        c = {std::max(c.xmin, d.xmin), std::max(c.ymin, d.ymin), std::min(c.xmax, d.xmax), std::min(c.ymax, d.ymax)};
    }
    for (double x = std::ceil(c.xmin / h) * h; x <= c.xmax + 1e-12; x += h) {
        for (double y = std::ceil(c.ymin / h) * h; y <= c.ymax + 1e-12; y += h) {
            bool ok = true;
            for (const Placement& q : p.placements()) {
                const Vec2 d = w.delta({x, y}, q.iso.translation);
                if (norm(d) < 2.0 * r - 1e-9) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                return true;
            }
        }
    }
    return false;
}

Packing single_disc() { return Packing(Body::disc(1.0), Window::box(10, 10), {Placement::at({0, 0})}); }

}  // namespace

TEST(FindInsertion, Figure1DefectHasRoomNearTheOrigin) {
    const Packing p = figure1_defect(0.5, figure1_window(0.5));
    const auto q = find_insertion(p, Rect::centered({}, 1.5, 1.5), 0.05);
    ASSERT_TRUE(q.has_value());
    EXPECT_LE(norm(q->iso.translation), 2.0);
    const Packing grown = with_placements(p, [&] {
        auto v = p.placements();
        v.push_back(*q);
        return v;
    }());
    EXPECT_EQ(grown.size(), 91u);
}

TEST(FindInsertion, HexagonalIsFull) {
    const Packing p = hexagonal(0.5, figure1_window(0.5));
    EXPECT_FALSE(find_insertion(p, p.window().domain(), 0.05).has_value());
    EXPECT_FALSE(oracle_insertable(p, p.window().domain(), 0.05));
}

TEST(FindInsertion, EmptyBoxKeepsClearOfWalls) {
    const Packing p(Body::disc(1.0), Window::box(4, 4), {});
    const auto q = find_insertion(p, p.window().domain(), 0.5);
    ASSERT_TRUE(q.has_value());
    EXPECT_LE(std::abs(q->iso.translation.x), 1.0 + 1e-12);
    EXPECT_LE(std::abs(q->iso.translation.y), 1.0 + 1e-12);
    EXPECT_FALSE(find_insertion(Packing(Body::disc(1.0), Window::box(1.5, 4), {}), Rect::centered({}, 2, 2), 0.1));
}

TEST(FindInsertion, AgreesWithBruteForceOracle) {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const Packing p = sparse_random(0.5, 16 + seed, seed, Window::box(7, 7));
        const Rect region = Rect::centered({}, 2.5, 2.5);
        const auto q = find_insertion(p, region, 0.1);
        if (oracle_insertable(p, region, 0.1)) {
            EXPECT_TRUE(q.has_value()) << seed;
        }
        if (q) {
            auto v = p.placements();
            v.push_back(*q);
            EXPECT_NO_THROW(with_placements(p, v)) << seed;
            EXPECT_TRUE(region.contains(q->iso.translation)) << seed;
        }
    }
}

TEST(FindInsertion, FinerGridNeverLosesAnInsertion) {
    for (std::uint64_t seed = 20; seed < 30; ++seed) {
        const Packing p = sparse_random(0.5, 28, seed, Window::torus(7, 7));
        const Rect region = p.window().domain();
        if (find_insertion(p, region, 0.2)) {
            EXPECT_TRUE(find_insertion(p, region, 0.1).has_value()) << seed;
            EXPECT_TRUE(find_insertion(p, region, 0.2 / 3.0).has_value()) << seed;
        }
    }
}

TEST(FindInsertion, PolygonBodies) {
    const Body sq = Body::square(1.0);
    const Packing p(sq, Window::box(3, 1), {Placement::at({-1, 0}), Placement::at({1, 0})});
    const auto q = find_insertion(p, p.window().domain(), 0.1);
    ASSERT_TRUE(q.has_value());
    EXPECT_NEAR(q->iso.translation.x, 0.0, 1e-9);
    const Packing full(sq, Window::box(3, 1), {Placement::at({-1, 0}), Placement::at({0, 0}), Placement::at({1, 0})});
    EXPECT_FALSE(find_insertion(full, full.window().domain(), 0.05).has_value());
}

TEST(CheckSaturated, Figure1IsNotOneSaturated) {
    const Packing p = figure1_defect(0.5, figure1_window(0.5));
    const auto v = check_n_saturated(p, 1, Rect::centered({}, 1.5, 1.5), 0.05);
    ASSERT_EQ(v.outcome, SaturationVerdict::Outcome::counterexample);
    EXPECT_TRUE(v.move->removed.empty());
    EXPECT_EQ(v.move->inserted.size(), 1u);
    EXPECT_EQ(apply_replacement(p, *v.move).size(), 91u);
}

TEST(CheckSaturated, HexagonalIsTwoSaturatedLocally) {
    const Packing p = hexagonal(0.5, figure1_window(0.5));
    const auto v = check_n_saturated(p, 2, Rect::centered({}, 0.6, 0.6), 0.05);
    EXPECT_EQ(v.outcome, SaturationVerdict::Outcome::saturated_up_to_resolution);
    EXPECT_DOUBLE_EQ(v.resolution, 0.05);
}

TEST(CheckSaturated, OneForTwoReplacement) {
    // No room for a second disc with centre in the thin region, but the
    // disc can be swapped for two at the region's ends.
    const Packing p = single_disc();
    const Rect region{-1.2, -0.3, 1.2, 0.3};
    ASSERT_FALSE(find_insertion(p, region, 0.05).has_value());
    const auto v = check_n_saturated(p, 2, region, 0.05);
    ASSERT_EQ(v.outcome, SaturationVerdict::Outcome::counterexample);
    EXPECT_EQ(v.move->removed.size(), 1u);
    EXPECT_EQ(v.move->inserted.size(), 2u);
    EXPECT_TRUE(v.move->connected);
    const Packing next = apply_replacement(p, *v.move);
    EXPECT_EQ(next.size(), 2u);
    for (const Placement& q : v.move->inserted) {
        EXPECT_TRUE(region.contains(q.iso.translation));
    }
    EXPECT_EQ(check_n_saturated(p, 1, region, 0.05).outcome,
              SaturationVerdict::Outcome::saturated_up_to_resolution);
}

TEST(CheckSaturated, BudgetExhausted) {
    const Packing p = hexagonal(0.5, figure1_window(0.5));
    SearchOptions opt;
    opt.h = 0.05;
    opt.node_budget = 10;
    const auto v = check_n_saturated(p, 2, Rect::centered({}, 1.0, 1.0), opt);
    EXPECT_EQ(v.outcome, SaturationVerdict::Outcome::budget_exhausted);
    EXPECT_THROW(check_n_saturated(p, 0, p.window().domain(), 0.1), Error);
}

TEST(ApplyReplacement, Errors) {
    const Packing p = single_disc();
    ReplacementMove missing;
    missing.removed.push_back(Placement::at({3, 3}));
    missing.inserted = {Placement::at({3, 3}), Placement::at({-3, -3})};
    try {
        apply_replacement(p, missing);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invariant);
    }
    ReplacementMove clash;
    clash.inserted.push_back(Placement::at({1.5, 0}));
    EXPECT_THROW(apply_replacement(p, clash), Error);
    ReplacementMove fine;
    fine.inserted.push_back(Placement::at({3, 0}));
    EXPECT_EQ(apply_replacement(p, fine).size(), 2u);
}

TEST(Iterate, HexagonalMakesNoMoves) {
    const Packing p = hexagonal(0.5, figure1_window(0.5));
    const auto t = saturation_iterate(p, 1, Rect::centered({}, 1.0, 1.0), 0.05, 10);
    EXPECT_TRUE(t.moves.empty());
    EXPECT_FALSE(t.exhausted);
    EXPECT_EQ(packing_to_string(t.terminal), packing_to_string(p));
}

TEST(Iterate, StringOfSquaresGrowsInATightBox) {
    const Packing p = string_of_squares(2, Window::box(18, 1));
    const Rect region{3.5, -0.5, 8.0, 0.5};
    const auto t = saturation_iterate(p, 2, region, 0.1, 20);
    EXPECT_FALSE(t.exhausted);
    ASSERT_GE(t.moves.size(), 4u);
    for (const auto& m : t.moves) {
        EXPECT_TRUE(m.connected);
        EXPECT_EQ(m.inserted.size(), m.removed.size() + 1);
    }
    EXPECT_EQ(t.terminal.size(), p.size() + t.moves.size());
    EXPECT_TRUE(connected_union(t.terminal.body(), t.terminal.placements()));
    EXPECT_EQ(check_n_saturated(t.terminal, 2, region, 0.1).outcome,
              SaturationVerdict::Outcome::saturated_up_to_resolution);
}

TEST(Iterate, ReplayAndTraceRoundTrip) {
    const Packing p(Body::disc(1.0), Window::box(10, 10), {Placement::at({-3, -3}), Placement::at({3, 2})});
    const auto t = saturation_iterate(p, 2, Rect::centered({}, 2.5, 2.5), 0.1, 50);
    ASSERT_FALSE(t.moves.empty());
    ASSERT_EQ(t.margins.size(), t.moves.size());
    EXPECT_EQ(packing_to_string(replay(t)), packing_to_string(t.terminal));
    for (const auto& m : t.margins) {
        EXPECT_GE(m.increase + m.error_bound, 0.0);
    }
    std::ostringstream a;
    write_trace(a, t);
    std::istringstream in(a.str());
    const IterationTrace back = read_trace(in);
    std::ostringstream b;
    write_trace(b, back);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(packing_to_string(replay(back)), packing_to_string(t.terminal));
}

TEST(Iterate, MoveBudget) {
    const Packing p(Body::disc(1.0), Window::box(10, 10), {});
    const auto t = saturation_iterate(p, 1, p.window().domain(), 0.2, 3);
    EXPECT_TRUE(t.exhausted);
    EXPECT_EQ(t.moves.size(), 3u);
}

TEST(Loosen, HexagonalGapIsTwoGamma) {
    const Packing hex = hexagonal(1.0, Window::torus(8.0, 4.0 * s3));
    const auto res = loosen(hex, 0.1);
    ASSERT_TRUE(res.alpha.has_value());
    EXPECT_NEAR(*res.alpha, 0.1, 1e-12);
    EXPECT_EQ(res.packing.size(), hex.size());
    EXPECT_NEAR(res.packing.window().width, 8.8, 1e-12);
    // Brute force: every pair (images included) is at least 2 alpha apart.
    const Window& w = res.packing.window();
    for (std::size_t i = 0; i < res.packing.size(); ++i) {
        for (std::size_t j = i + 1; j < res.packing.size(); ++j) {
            const Vec2 d = w.delta(res.packing.placements()[i].iso.translation,
                                   res.packing.placements()[j].iso.translation);
            EXPECT_GE(norm(d) - 2.0, 2.0 * *res.alpha - 1e-9);
        }
    }
}

TEST(Loosen, DegenerateAndPolygon) {
    EXPECT_FALSE(loosen(Packing(Body::disc(1.0), Window::torus(4, 4), {}), 0.1).alpha.has_value());
    EXPECT_FALSE(loosen(single_disc(), 0.1).alpha.has_value());
    EXPECT_THROW(loosen(single_disc(), 0.0), Error);
    const Body corner = Body::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    const Packing row(corner, Window::box(6, 2), {Placement::at({-2, -0.5}), Placement::at({-1, -0.5})});
    const auto res = loosen(row, 0.1);
    ASSERT_TRUE(res.alpha.has_value());
    EXPECT_GT(*res.alpha, 0.0);
}

TEST(LooseningBudget, Inequality) {
    const auto b = loosening_budget(Body::disc(1.0), 0.01, 0.5, 1.0, 0.9);
    EXPECT_NEAR(b.lhs, 2 * 0.01 * 0.9, 1e-15);
    EXPECT_NEAR(b.rhs, 0.5 * std::numbers::pi / (4.0 * std::numbers::pi), 1e-15);
    EXPECT_TRUE(b.holds);
    EXPECT_FALSE(loosening_budget(Body::disc(1.0), 0.5, 0.01, 1.0, 0.9).holds);
}
