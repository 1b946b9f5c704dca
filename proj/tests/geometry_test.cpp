#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "packlab/geometry.hpp"

using namespace packlab;

namespace {

const Body unit_disc = Body::disc(1.0);
const Body unit_square = Body::square(1.0);

}  // namespace

TEST(Overlap, TangentDiscsDoNotOverlap) {
    EXPECT_FALSE(overlap(unit_disc, Placement::at({0, 0}), Placement::at({2, 0})));
}

TEST(Overlap, CloseDiscsOverlap) {
    EXPECT_TRUE(overlap(unit_disc, Placement::at({0, 0}), Placement::at({1.9, 0})));
}

TEST(Overlap, EdgeToEdgeSquares) {
    EXPECT_FALSE(overlap(unit_square, Placement::at({0, 0}), Placement::at({1, 0})));
    EXPECT_TRUE(overlap(unit_square, Placement::at({0, 0}), Placement::at({0.99, 0.5})));
}

TEST(Overlap, ToleranceBand) {
    EXPECT_FALSE(overlap(unit_disc, Placement::at({0, 0}), Placement::at({2.0 - 0.5e-9, 0})));
    EXPECT_TRUE(overlap(unit_disc, Placement::at({0, 0}), Placement::at({2.0 - 2e-9, 0})));
}

TEST(Overlap, SymmetricAndReflexive) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const Placement a = Placement::at({u(rng), u(rng)}, u(rng), i % 2 == 0);
        const Placement b = Placement::at({u(rng), u(rng)}, u(rng), i % 3 == 0);
        EXPECT_EQ(overlap(unit_square, a, b), overlap(unit_square, b, a));
        EXPECT_TRUE(overlap(unit_square, a, a));
        EXPECT_TRUE(overlap(unit_disc, a, a));
    }
}

TEST(Overlap, MatchesSampledInteriorOracle) {
    // Overlap iff some point lies strictly inside both; test with a fine grid
    // away from the tolerance band.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
    int checked = 0;
    for (int i = 0; i < 60; ++i) {
        const Placement a = Placement::at({0, 0});
        const Placement b = Placement::at({u(rng), u(rng)}, ang(rng));
        const PlacedShape sa = place(unit_square, a);
        const PlacedShape sb = place(unit_square, b);
        const double sep = separation(sa, sb);
        if (std::abs(sep) < 0.02) {
            continue;  // too close to call on a grid
        }
        bool common = false;
        for (double x = -1.0; x <= 1.0 && !common; x += 0.004) {
            for (double y = -1.0; y <= 1.0 && !common; y += 0.004) {
                common = oracle::inside(sa, {x, y}) && oracle::inside(sb, {x, y});
            }
        }
        EXPECT_EQ(common, overlap(unit_square, a, b)) << "case " << i;
        ++checked;
    }
    EXPECT_GT(checked, 20);
}

TEST(GapDistance, Discs) {
    EXPECT_NEAR(gap_distance(unit_disc, Placement::at({0, 0}), Placement::at({3, 0})), 1.0, 1e-12);
    EXPECT_EQ(gap_distance(unit_disc, Placement::at({0, 0}), Placement::at({2, 0})), 0.0);
    EXPECT_EQ(gap_distance(unit_disc, Placement::at({0, 0}), Placement::at({1, 0})), 0.0);
}

TEST(GapDistance, SquaresMatchSamplingOracle) {
    const Placement a = Placement::at({0, 0});
    const Placement b = Placement::at({2.5, 0});
    const double g = gap_distance(unit_square, a, b);
    EXPECT_NEAR(g, 1.5, 1e-12);
    EXPECT_NEAR(g, oracle::sampled_gap(place(unit_square, a), place(unit_square, b), 1e-3), 1e-3);
}

TEST(GapDistance, RandomPolygonsMatchOracle) {
    const Body tri = Body::polygon({{-0.5, -0.4}, {0.7, -0.3}, {0.0, 0.8}});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < 40; ++i) {
        const Placement a = Placement::at({0, 0}, ang(rng));
        const Placement b = Placement::at({u(rng), u(rng)}, ang(rng), i % 2 == 1);
        const double g = gap_distance(tri, a, b);
        EXPECT_NEAR(g, gap_distance(tri, b, a), 1e-12);
        EXPECT_GE(g, 0.0);
        if (g > 0.0) {
            EXPECT_NEAR(g, oracle::sampled_gap(place(tri, a), place(tri, b), 2e-3), 2e-3);
            EXPECT_FALSE(overlap(tri, a, b));
        }
        if (overlap(tri, a, b)) {
            EXPECT_EQ(g, 0.0);
        }
    }
}

TEST(Hausdorff, Basics) {
    EXPECT_EQ(hausdorff_body_distance(unit_square, Placement::at({1, 2}, 0.3), Placement::at({1, 2}, 0.3)), 0.0);
    EXPECT_NEAR(hausdorff_body_distance(unit_disc, Placement::at({0, 0}), Placement::at({0.3, 0.4})), 0.5, 1e-12);
}

TEST(Hausdorff, RotatedSquareMatchesOracle) {
    // Side-1 square vs the same square turned 45 degrees about its centre:
    // the rotated corner sits at 1/sqrt(2) against a half-width of 1/2.
    const Placement a = Placement::at({0, 0});
    const Placement b = Placement::at({0, 0}, std::numbers::pi / 4.0);
    const double h = hausdorff_body_distance(unit_square, a, b);
    const double sampled = oracle::sampled_hausdorff(place(unit_square, a), place(unit_square, b), 5e-4);
    EXPECT_NEAR(h, sampled, 1e-3);
    EXPECT_NEAR(h, (std::sqrt(2.0) - 1.0) / 2.0, 1e-12);
}

TEST(Hausdorff, TriangleInequality) {
    const Body pent = Body::polygon({{1, 0}, {0.31, 0.95}, {-0.81, 0.59}, {-0.81, -0.59}, {0.31, -0.95}});
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        const Placement a = Placement::at({u(rng), u(rng)}, 3.0 * u(rng), i % 2 == 0);
        const Placement b = Placement::at({u(rng), u(rng)}, 3.0 * u(rng));
        const Placement c = Placement::at({u(rng), u(rng)}, 3.0 * u(rng), i % 3 == 0);
        const double ab = hausdorff_body_distance(pent, a, b);
        const double bc = hausdorff_body_distance(pent, b, c);
        const double ac = hausdorff_body_distance(pent, a, c);
        EXPECT_LE(ac, ab + bc + 1e-6);
        EXPECT_NEAR(ab, hausdorff_body_distance(pent, b, a), 1e-12);
    }
}

TEST(Hausdorff, RandomPolygonsMatchOracle) {
    const Body tri = Body::polygon({{-0.5, -0.4}, {0.7, -0.3}, {0.0, 0.8}});
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const Placement a = Placement::at({u(rng), u(rng)}, 3.0 * u(rng));
        const Placement b = Placement::at({u(rng), u(rng)}, 3.0 * u(rng), i % 2 == 0);
        EXPECT_NEAR(hausdorff_body_distance(tri, a, b),
                    oracle::sampled_hausdorff(place(tri, a), place(tri, b), 2e-3), 3e-3);
    }
}

TEST(ConnectedUnion, Examples) {
    const std::vector<Placement> one{Placement::at({5, 5})};
    EXPECT_TRUE(connected_union(unit_disc, one));
    const std::vector<Placement> tangent{Placement::at({0, 0}), Placement::at({2, 0})};
    EXPECT_TRUE(connected_union(unit_disc, tangent));
    const std::vector<Placement> apart{Placement::at({0, 0}), Placement::at({2.1, 0})};
    EXPECT_FALSE(connected_union(unit_disc, apart));
    EXPECT_THROW(connected_union(unit_disc, std::vector<Placement>{}), Error);
}

TEST(ConnectedUnion, ChainNeedsTheMiddleLink) {
    const std::vector<Placement> chain{Placement::at({0, 0}), Placement::at({4, 0}), Placement::at({2, 0})};
    EXPECT_TRUE(connected_union(unit_disc, chain));
    const std::vector<Placement> broken{Placement::at({0, 0}), Placement::at({4, 0})};
    EXPECT_FALSE(connected_union(unit_disc, broken));
}

TEST(ConnectedUnion, InvariantUnderPermutationAndIsometry) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Placement> ps;
        for (int i = 0; i < 5; ++i) {
            ps.push_back(Placement::at({u(rng), u(rng)}, u(rng)));
        }
        const bool base = connected_union(unit_square, ps);
        auto perm = ps;
        std::shuffle(perm.begin(), perm.end(), rng);
        EXPECT_EQ(base, connected_union(unit_square, perm));
        const Isometry g{u(rng), {u(rng), u(rng)}, trial % 2 == 0};
        std::vector<Placement> moved;
        for (const Placement& p : ps) {
            moved.push_back(Placement{g.after(p.iso)});
        }
        EXPECT_EQ(base, connected_union(unit_square, moved));
    }
}

TEST(Isometry, CompositionMatchesPointwise) {
    const Isometry f{0.7, {1, -2}, true};
    const Isometry g{-1.1, {0.5, 3}, false};
    const Vec2 p{0.3, -0.8};
    const Vec2 direct = g.apply(f.apply(p));
    const Vec2 composed = g.after(f).apply(p);
    EXPECT_NEAR(direct.x, composed.x, 1e-12);
    EXPECT_NEAR(direct.y, composed.y, 1e-12);
    EXPECT_EQ(Isometry::identity().after(f), f);
}

TEST(SelfNests, DiscAndCentredPolygonUseIdentity) {
    const auto g = self_nests(unit_disc, 0.01);
    ASSERT_TRUE(g.has_value());
    EXPECT_EQ(*g, Isometry::identity());
    const auto h = self_nests(Body::polygon({{1, 0}, {0, 1}, {-1, -1}}), 0.1);
    ASSERT_TRUE(h.has_value());
    EXPECT_EQ(*h, Isometry::identity());
}

TEST(SelfNests, SquareWithOriginAtVertex) {
    const Body corner = Body::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    const auto g = self_nests(corner, 0.01);
    ASSERT_TRUE(g.has_value());
    EXPECT_NEAR(g->translation.x, 0.005, 1e-12);
    EXPECT_NEAR(g->translation.y, 0.005, 1e-12);
    // Vertex check: every vertex of gK strictly inside 1.01 K.
    for (const Vec2& v : corner.vertices()) {
        const Vec2 w = g->apply(v);
        EXPECT_GT(w.x, 0.0);
        EXPECT_GT(w.y, 0.0);
        EXPECT_LT(w.x, 1.01);
        EXPECT_LT(w.y, 1.01);
    }
    EXPECT_FALSE(nests_inside(corner, 0.01, Isometry::identity()));
}

TEST(Body, Invariants) {
    EXPECT_THROW(Body::disc(0.0), Error);
    EXPECT_THROW(Body::polygon({{0, 0}, {1, 0}}), Error);
    EXPECT_THROW(Body::polygon({{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {0.5, -0.5}}), Error);  // not strictly convex
    EXPECT_THROW(Body::polygon({{1, 1}, {2, 1}, {2, 2}, {1, 2}}), Error);                // origin outside
    EXPECT_THROW(Body::polygon({{-1, -1}, {-1, 1}, {1, 1}, {1, -1}}), Error);            // clockwise
    EXPECT_NEAR(unit_square.area(), 1.0, 1e-15);
    EXPECT_NEAR(unit_square.diameter(), std::sqrt(2.0), 1e-15);
}

TEST(Areas, DiscClipsMatchSampling) {
    const Rect r{-0.3, -0.2, 0.9, 0.5};
    const Vec2 c{0.1, 0.05};
    const double rad = 0.6;
    double sampled = 0.0;
    const int m = 1500;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double x = r.xmin + (i + 0.5) * r.width() / m;
            const double y = r.ymin + (j + 0.5) * r.height() / m;
            if (std::hypot(x - c.x, y - c.y) <= rad) {
                sampled += r.area() / (static_cast<double>(m) * m);
            }
        }
    }
    EXPECT_NEAR(rect_disc_area(r, c, rad), sampled, 1e-4);
    EXPECT_NEAR(disc_disc_area({0, 0}, 1.0, {1.0, 0}, 1.0), 2.0 * std::acos(0.5) - 0.5 * std::sqrt(3.0), 1e-12);
}

TEST(Areas, TangentEdgesDoNotCountAsInside) {
    // Disc inscribed in a square and in a regular hexagon: every edge is
    // tangent to the circle.
    EXPECT_NEAR(rect_disc_area(Rect::centered({}, 1, 1), {}, 1.0), std::numbers::pi, 1e-12);
    std::vector<Vec2> hex;
    for (int k = 0; k < 6; ++k) {
        const double a = std::numbers::pi / 6.0 + k * std::numbers::pi / 3.0;
        hex.push_back({std::cos(a) * 2.0 / std::sqrt(3.0), std::sin(a) * 2.0 / std::sqrt(3.0)});
    }
    for (double s : {-1.0, 0.0, 1.0}) {
        EXPECT_NEAR(polygon_disc_area(hex, {}, 1.0 + s * 1e-13), std::numbers::pi, 1e-9) << s;
    }
}
