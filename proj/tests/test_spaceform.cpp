#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "deltaforge.hpp"

using namespace deltaforge;

TEST(SpaceForm, BasicShape) {
    const auto e = SpaceForm::euclidean(4);
    const auto s = SpaceForm::sphere(4);
    const auto h = SpaceForm::hyperbolic(4);
    EXPECT_EQ(e.flat_dim(), 4);
    EXPECT_EQ(s.flat_dim(), 5);
    EXPECT_EQ(h.flat_dim(), 5);
    EXPECT_EQ(e.curvature(), 0);
    EXPECT_EQ(s.curvature(), 1);
    EXPECT_EQ(h.curvature(), -1);
    EXPECT_FALSE(e.curved());
    int negatives = 0;
    for (int v : h.signature()) negatives += v < 0;
    EXPECT_EQ(negatives, 1);
    EXPECT_EQ(h.signature()[0], -1);
    for (int v : s.signature()) EXPECT_EQ(v, 1);
    EXPECT_EQ(parse_space_kind("hyperbolic"), SpaceKind::Hyperbolic);
    EXPECT_THROW(parse_space_kind("torus"), ConfigError);
}

TEST(SpaceForm, InnerProductExamples) {
    const auto h = SpaceForm::hyperbolic(3);
    Eigen::VectorXd t = Eigen::VectorXd::Unit(4, 0);
    EXPECT_EQ(h.inner(t, t), -1.0);
    EXPECT_EQ(h.inner(Eigen::VectorXd::Zero(4), t), 0.0);
    const auto s = SpaceForm::sphere(3);
    Eigen::VectorXd e1 = Eigen::VectorXd::Unit(4, 1);
    EXPECT_EQ(s.inner(e1, e1), 1.0);
    EXPECT_THROW(s.inner(Eigen::VectorXd::Zero(3), e1), DimensionError);
}

TEST(SpaceForm, InnerProductIsSymmetricAndBilinear) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0, 1);
    for (auto sf : {SpaceForm::euclidean(5), SpaceForm::sphere(5), SpaceForm::hyperbolic(5)}) {
        const int N = sf.flat_dim();
        for (int t = 0; t < 100; ++t) {
            Eigen::VectorXd u(N), v(N), w(N);
            for (int i = 0; i < N; ++i) {
                u(i) = g(rng);
                v(i) = g(rng);
                w(i) = g(rng);
            }
            const double a = g(rng), b = g(rng);
            EXPECT_EQ(sf.inner(u, v), sf.inner(v, u));
            const double lhs = sf.inner(a * u + b * v, w);
            const double rhs = a * sf.inner(u, w) + b * sf.inner(v, w);
            const double scale = std::abs(a) * u.norm() * w.norm() + std::abs(b) * v.norm() * w.norm();
            EXPECT_LE(std::abs(lhs - rhs), 1e-14 * std::max(1.0, scale));
        }
    }
}

TEST(SpaceForm, QuadricExamples) {
    const auto hb = build_catalog(CatalogId::HypB, 4);
    const Eigen::VectorXd p = hb.position(std::vector<double>{0, 0, 0, 0});
    EXPECT_NEAR(p(0), 1.25, 1e-15);
    EXPECT_NEAR(p(1), -0.75, 1e-15);
    const auto q = quadric_check(hb.spaceform(), p);
    EXPECT_LE(q.residual, 1e-12);
    EXPECT_TRUE(q.upper_sheet);

    const auto ha = build_catalog(CatalogId::HypA, 4);
    EXPECT_LE(quadric_check(ha.spaceform(), ha.position(std::vector<double>{0, 0, 0, 0})).residual, 1e-12);

    const auto s = SpaceForm::sphere(3);
    EXPECT_EQ(quadric_check(s, Eigen::VectorXd::Unit(4, 0)).residual, 0.0);
    EXPECT_THROW(quadric_check(SpaceForm::euclidean(3), Eigen::VectorXd::Unit(3, 0)), KindError);

    Eigen::VectorXd lower = Eigen::VectorXd::Zero(4);
    lower(0) = -1;
    const auto ql = quadric_check(SpaceForm::hyperbolic(3), lower);
    EXPECT_EQ(ql.residual, 0.0);
    EXPECT_FALSE(ql.upper_sheet);
}

TEST(SpaceForm, CatalogPointsLieOnTheirQuadrics) {
    std::mt19937_64 rng(8);
    for (auto id : {CatalogId::SphereT2, CatalogId::HypA, CatalogId::HypB, CatalogId::HypC}) {
        const auto spec = build_catalog(id, 5);
        const double tol = id == CatalogId::SphereT2 ? 1e-12 : 1e-10;
        for (int t = 0; t < 50; ++t) {
            std::vector<double> x(5);
            for (int i = 0; i < 5; ++i) {
                std::uniform_real_distribution<double> u(spec.domain()[i].lo, spec.domain()[i].hi);
                x[i] = u(rng);
            }
            const auto q = quadric_check(spec.spaceform(), spec.position(x));
            EXPECT_LE(q.residual, tol) << to_string(id);
            EXPECT_TRUE(q.upper_sheet) << to_string(id);
        }
    }
}
