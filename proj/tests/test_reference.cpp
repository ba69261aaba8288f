#include "otrank/reference.hpp"
#include "otrank/special_fn.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using namespace otrank;
using namespace otrank::reference;

namespace {

Matrix covariance(const Matrix& pts) {
    const Matrix c = pts.rowwise() - pts.colwise().mean();
    return c.transpose() * c / static_cast<double>(pts.rows());
}

}  // namespace

TEST(Reference, RadicalInverseValues) {
    EXPECT_DOUBLE_EQ(radical_inverse(1, 2), 0.5);
    EXPECT_DOUBLE_EQ(radical_inverse(2, 2), 0.25);
    EXPECT_DOUBLE_EQ(radical_inverse(3, 2), 0.75);
    EXPECT_DOUBLE_EQ(radical_inverse(6, 2), 0.375);
    EXPECT_NEAR(radical_inverse(1, 3), 1.0 / 3.0, 4e-16);
    EXPECT_NEAR(radical_inverse(5, 3), 7.0 / 9.0, 4e-16);
    EXPECT_NEAR(radical_inverse(7, 5), 2.0 / 5.0 + 1.0 / 25.0, 4e-16);
}

TEST(Reference, HaltonLayout) {
    const auto g = halton_grid(8, 3);
    EXPECT_EQ(g.size(), 8);
    EXPECT_EQ(g.dim(), 3);
    EXPECT_EQ(g.nu, NuTag::uniform_cube);
    EXPECT_DOUBLE_EQ(g.points(0, 0), 0.5);
    EXPECT_NEAR(g.points(0, 1), 1.0 / 3.0, 4e-16);
    EXPECT_NEAR(g.points(0, 2), 0.2, 4e-16);
    EXPECT_DOUBLE_EQ(g.points(3, 0), 0.125);
    EXPECT_THROW(halton_grid(4, kMaxHaltonDim + 1), std::invalid_argument);
    EXPECT_THROW(halton_grid(0, 2), std::invalid_argument);
}

TEST(Reference, HaltonMomentsApproachUniform) {
    const auto g = halton_grid(4096, 4);
    EXPECT_LT((g.points.colwise().mean().array() - 0.5).abs().maxCoeff(), 2e-3);
    EXPECT_LT((covariance(g.points) - Matrix::Identity(4, 4) / 12.0).cwiseAbs().maxCoeff(), 2e-3);
    std::set<std::vector<double>> rows;
    for (int i = 0; i < g.size(); ++i) rows.insert({g.points(i, 0), g.points(i, 1), g.points(i, 2), g.points(i, 3)});
    EXPECT_EQ(rows.size(), 4096u);
}

TEST(Reference, RegularGrid) {
    const auto g = regular_grid_1d(5);
    for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(g.points(i, 0), (i + 1) / 5.0);
    const auto d = default_grid(NuTag::uniform_cube, 7, 1);
    EXPECT_DOUBLE_EQ(d.points(6, 0), 1.0);
}

TEST(Reference, GaussianGridIsNormalQuantileOfHalton) {
    const auto h = halton_grid(300, 2);
    const auto g = gaussian_grid(300, 2);
    for (int i = 0; i < 300; i += 17)
        for (int k = 0; k < 2; ++k) EXPECT_DOUBLE_EQ(g.points(i, k), special::std_normal_quantile(h.points(i, k)));
    const auto big = gaussian_grid(8192, 3);
    EXPECT_LT(big.points.colwise().mean().cwiseAbs().maxCoeff(), 5e-3);
    EXPECT_LT((covariance(big.points) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Reference, SphericalGridLayout) {
    for (int d : {1, 2, 3, 5}) {
        for (int n : {20, 97, 400, 1001}) {
            SphericalLayout lay;
            const auto g = spherical_uniform_grid(n, d, std::nullopt, &lay);
            ASSERT_EQ(g.size(), n);
            EXPECT_EQ(g.nu, NuTag::spherical_uniform);
            EXPECT_FALSE(lay.iid_fallback);
            EXPECT_EQ(lay.n_radii * lay.n_directions + lay.n_leftover, n);
            std::set<long> radii;
            for (int i = 0; i < n; ++i) {
                const double r = g.points.row(i).norm();
                EXPECT_LT(r, 1.0);
                EXPECT_GT(r, 0.0);
                radii.insert(std::lround(r * 1e9));
            }
            EXPECT_LE(static_cast<int>(radii.size()), lay.n_radii + (lay.n_leftover > 0 ? 1 : 0));
        }
    }
}

TEST(Reference, SphericalGridMoments) {
    const int d = 3;
    const auto g = spherical_uniform_grid(4000, d);
    EXPECT_LT(g.points.colwise().mean().cwiseAbs().maxCoeff(), 0.01);
    EXPECT_LT((covariance(g.points) - Matrix::Identity(d, d) / (3.0 * d)).cwiseAbs().maxCoeff(), 0.01);
    Matrix dirs(g.size(), d);
    for (int i = 0; i < g.size(); ++i) dirs.row(i) = g.points.row(i).normalized();
    EXPECT_LT((covariance(dirs) - Matrix::Identity(d, d) / d).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Reference, SeededGridsReproduce) {
    const auto a = spherical_uniform_grid(300, 2, 5);
    const auto b = spherical_uniform_grid(300, 2, 5);
    const auto c = spherical_uniform_grid(300, 2, 6);
    EXPECT_EQ(a.points, b.points);
    EXPECT_NE(a.points, c.points);
    EXPECT_EQ(a.seed, std::optional<std::uint64_t>(5));
    const auto i1 = iid_grid(50, 2, NuTag::gaussian, 9);
    EXPECT_EQ(i1.points, iid_grid(50, 2, NuTag::gaussian, 9).points);
    EXPECT_THROW(iid_grid(50, 2, NuTag::custom_iid, 9), std::invalid_argument);
    const auto custom = iid_grid(20, 2, [](Rng& r) { return Vector::Constant(2, std::uniform_real_distribution<double>(3, 4)(r)); }, 1);
    EXPECT_EQ(custom.nu, NuTag::custom_iid);
    EXPECT_GE(custom.points.minCoeff(), 3.0);
}

TEST(Reference, CenterGrid) {
    auto g = halton_grid(100, 2);
    center_grid(g);
    EXPECT_LT(g.points.colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Reference, CsvRoundTripIsBitExact) {
    for (NuTag nu : {NuTag::gaussian, NuTag::uniform_cube, NuTag::spherical_uniform}) {
        const auto g = default_grid(nu, 100, 2, nu == NuTag::spherical_uniform ? std::optional<std::uint64_t>(3) : std::nullopt);
        const std::string text = grid_to_csv(g);
        const auto back = grid_from_csv(text);
        EXPECT_EQ(back.points, g.points);
        EXPECT_EQ(back.nu, g.nu);
        EXPECT_EQ(back.seed, g.seed);
        EXPECT_EQ(grid_to_csv(back), text);
        EXPECT_EQ(fingerprint(back), fingerprint(g));
    }
    EXPECT_EQ(grid_to_csv(halton_grid(2, 2)).substr(0, 22), "dim=2,nu=uniform_cube,");
    EXPECT_NE(fingerprint(halton_grid(10, 2)), fingerprint(halton_grid(11, 2)));
}

TEST(Reference, CsvRejectsMalformed) {
    EXPECT_THROW(grid_from_csv(""), std::invalid_argument);
    EXPECT_THROW(grid_from_csv("dim=2,nu=gaussian,seed=\n0.1,0.2\n0.3\n"), std::invalid_argument);
    EXPECT_THROW(grid_from_csv("dim=2,nu=gaussian,seed=\n0.1,abc\n"), std::invalid_argument);
    EXPECT_THROW(grid_from_csv("dim=2,colour=red\n0.1,0.2\n"), std::invalid_argument);
    try {
        grid_from_csv("dim=2,nu=gaussian,seed=\n0.1,0.2\n0.1,x\n");
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(Reference, TagParsing) {
    for (NuTag t : {NuTag::uniform_cube, NuTag::spherical_uniform, NuTag::gaussian, NuTag::custom_iid})
        EXPECT_EQ(parse_nu_tag(to_string(t)), t);
    for (ScoreKind k : {ScoreKind::identity, ScoreKind::coord_gaussian_cdf, ScoreKind::coord_gaussian_quantile,
                        ScoreKind::van_der_waerden})
        EXPECT_EQ(parse_score_kind(to_string(k)), k);
    EXPECT_EQ(parse_nu_tag("uniform"), NuTag::uniform_cube);
    EXPECT_EQ(parse_score_kind("vdw"), ScoreKind::van_der_waerden);
    EXPECT_THROW(parse_nu_tag("cauchy"), std::invalid_argument);
}

TEST(Reference, ScoreFunctions) {
    Vector x(2);
    x << 0.3, -0.4;
    EXPECT_EQ(apply_score({ScoreKind::identity, 2}, x), x);
    const Vector c = apply_score({ScoreKind::coord_gaussian_cdf, 2}, x);
    EXPECT_DOUBLE_EQ(c(0), special::std_normal_cdf(0.3));
    Vector u(2);
    u << 0.3, 0.9;
    const Vector q = apply_score({ScoreKind::coord_gaussian_quantile, 2}, u);
    EXPECT_DOUBLE_EQ(q(1), special::std_normal_quantile(0.9));
    const Vector v = apply_score({ScoreKind::van_der_waerden, 2}, x);
    EXPECT_NEAR(v.norm(), special::chi_d_quantile(2, 0.5), 1e-12);
    EXPECT_NEAR(v(0) / v(1), x(0) / x(1), 1e-12);
    Vector out(2);
    out << 0.8, 0.8;
    EXPECT_THROW(apply_score({ScoreKind::van_der_waerden, 2}, out), std::domain_error);
    EXPECT_THROW(apply_score({ScoreKind::identity, 3}, x), std::invalid_argument);
}

TEST(Reference, ErdClosedFormsMatchIndependentMonteCarlo) {
    Rng rng = make_rng(77);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int n = 200000;
    const int d = 3;
    struct Case {
        NuTag nu;
        ScoreKind kind;
    };
    for (Case cs : {Case{NuTag::uniform_cube, ScoreKind::identity}, Case{NuTag::uniform_cube, ScoreKind::coord_gaussian_quantile},
                    Case{NuTag::spherical_uniform, ScoreKind::identity}, Case{NuTag::spherical_uniform, ScoreKind::van_der_waerden},
                    Case{NuTag::gaussian, ScoreKind::identity}, Case{NuTag::gaussian, ScoreKind::coord_gaussian_cdf}}) {
        Matrix s(n, d);
        for (int i = 0; i < n; ++i) {
            Vector v(d);
            if (cs.nu == NuTag::uniform_cube) {
                for (int k = 0; k < d; ++k) v(k) = unif(rng);
            } else {
                for (int k = 0; k < d; ++k) v(k) = g(rng);
                if (cs.nu == NuTag::spherical_uniform) v = v.normalized() * unif(rng);
            }
            s.row(i) = apply_score({cs.kind, d}, v).transpose();
        }
        const auto erd = erd_covariance(cs.nu, {cs.kind, d});
        EXPECT_TRUE(erd.closed_form);
        const double scale = erd.sigma_erd.diagonal().maxCoeff();
        EXPECT_LT((covariance(s) - erd.sigma_erd).cwiseAbs().maxCoeff(), 0.02 * scale)
            << to_string(cs.nu) << ' ' << to_string(cs.kind);
    }
}

TEST(Reference, ErdMonteCarloFallback) {
    EXPECT_THROW(erd_covariance(NuTag::gaussian, {ScoreKind::van_der_waerden, 2}), std::invalid_argument);
    ErdOptions opts;
    opts.allow_monte_carlo = true;
    opts.seed = 4;
    const auto erd = erd_covariance(NuTag::uniform_cube, {ScoreKind::coord_gaussian_cdf, 2}, opts);
    EXPECT_FALSE(erd.closed_form);
    EXPECT_GT(erd.std_error, 0.0);
    // Phi(U) with U uniform on [0,1]: variance of Phi over [0,1].
    EXPECT_NEAR(erd.sigma_erd(0, 0), 0.0099921287, 5 * erd.std_error + 1e-5);
    EXPECT_NEAR(erd.sigma_erd(0, 1), 0.0, 5 * erd.std_error);
}
