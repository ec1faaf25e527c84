#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <bcd/checks.hpp>

using namespace bcd;

namespace {

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

Matrix mat(std::initializer_list<std::initializer_list<double>> rows)
{
    Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
    Index i = 0;
    for (const auto& r : rows) {
        Index j = 0;
        for (double x : r) out(i, j++) = x;
        ++i;
    }
    return out;
}

CompositeProblem quadratic_problem(const Matrix& H, const Vector& q, double l1 = 0.0)
{
    return make_problem(make_quadratic(H, q), l1 > 0.0 ? make_l1(l1) : make_zero_regularizer());
}

} // namespace

// ---- CoordSet, masks, embeddings -----------------------------------------

TEST(CoordSet, RejectsEmptyOutOfRangeAndUnsorted)
{
    EXPECT_THROW(CoordSet({}, 3), InvalidSetError);
    EXPECT_THROW(CoordSet({3}, 3), InvalidSetError);
    EXPECT_THROW(CoordSet({-1}, 3), InvalidSetError);
    EXPECT_THROW(CoordSet({1, 0}, 3), InvalidSetError);
    EXPECT_THROW(CoordSet({1, 1}, 3), InvalidSetError);
    EXPECT_EQ(CoordSet::from_unsorted({2, 0, 2}, 3).to_string(), "1;3");
}

TEST(CoordSet, OneBasedTextRoundTrip)
{
    const auto S = CoordSet::parse_one_based("1;3", 3);
    EXPECT_EQ(S.size(), 2);
    EXPECT_EQ(S[0], 0);
    EXPECT_EQ(S[1], 2);
    EXPECT_EQ(S.to_string(), "1;3");
    EXPECT_TRUE(CoordSet::full(4).is_full());
    EXPECT_THROW(CoordSet::parse_one_based("0", 3), InvalidSetError);
}

TEST(Mask, ExampleVectors)
{
    EXPECT_EQ(mask_vector(vec({1, 2, 3}), CoordSet({0, 2}, 3)), vec({1, 3}));
    EXPECT_EQ(mask_vector(vec({5}), CoordSet::full(1)), vec({5}));
    EXPECT_EQ(mask_vector(vec({1, 2, 3}), CoordSet::full(3)), vec({1, 2, 3}));
    EXPECT_THROW(mask_vector(vec({1, 2}), CoordSet::full(3)), InvalidSetError);
}

TEST(Embed, ExampleVectors)
{
    EXPECT_EQ(embed_vector(vec({1, 3}), CoordSet({0, 2}, 3), 3), vec({1, 0, 3}));
    EXPECT_EQ(embed_vector(vec({7}), CoordSet({1}, 2), 2), vec({0, 7}));
    EXPECT_TRUE(checks::mask_embed_roundtrip(3).pass);
}

TEST(PrincipalSubmatrix, EntrywiseExample)
{
    const Matrix M = mat({{1, 4, 7}, {2, 5, 8}, {3, 6, 9}});
    const std::vector<Index> S{0, 2};
    EXPECT_EQ(principal_submatrix(M, S), mat({{1, 7}, {3, 9}}));
    const std::vector<Index> all{0, 1, 2};
    EXPECT_EQ(principal_submatrix(M, all), M);
    const SymMatrix D = SymMatrix::diagonal(vec({1, 2, 3}));
    EXPECT_EQ(principal_submatrix(D, CoordSet({1}, 3)).dense(), mat({{2}}));
}

TEST(PrincipalSubmatrix, EmbedMatrixPlacesBlock)
{
    const Matrix B = mat({{1, 2}, {2, 5}});
    const Matrix E = embed_matrix(B, CoordSet({0, 2}, 3), 3);
    EXPECT_EQ(E, mat({{1, 0, 2}, {0, 0, 0}, {2, 0, 5}}));
}

TEST(SymMatrix, RejectsAsymmetricAndNonSquare)
{
    EXPECT_THROW(SymMatrix(mat({{1, 2}, {0, 1}})), SizeMismatchError);
    EXPECT_THROW(SymMatrix(Matrix(2, 3)), SizeMismatchError);
    EXPECT_TRUE(SymMatrix::diagonal(vec({1, 2})).is_diagonal());
    EXPECT_FALSE(SymMatrix(mat({{2, 1}, {1, 2}})).is_diagonal());
}

TEST(SolveSpd, Examples)
{
    EXPECT_EQ(solve_spd(SymMatrix::identity(3), vec({1, 2, 3})), vec({1, 2, 3}));
    EXPECT_EQ(solve_spd(SymMatrix::diagonal(vec({2, 4})), vec({2, 4})), vec({1, 1}));
    const SymMatrix M(random_spd(5, 0.1, 10.0, 4));
    const Vector b = vec({1, -2, 0.5, 3, 0});
    const Vector y = solve_spd(M, b);
    EXPECT_LT((M.dense() * y - b).norm(), 1e-12 * b.norm() * 100);
    EXPECT_THROW(solve_spd(SymMatrix(mat({{1, 2}, {2, 1}})), vec({1, 1})), NotPositiveDefiniteError);
}

TEST(Eig, Extremes)
{
    auto e = eig_extremes(SymMatrix::diagonal(vec({1, 2, 3})));
    EXPECT_NEAR(e.lambda_min, 1.0, 1e-12);
    EXPECT_NEAR(e.lambda_max, 3.0, 1e-12);
    e = eig_extremes(SymMatrix::identity(4));
    EXPECT_NEAR(e.lambda_min, 1.0, 1e-12);
    EXPECT_NEAR(e.lambda_max, 1.0, 1e-12);
    // characteristic polynomial (2 - t)^2 - 1 = 0
    e = eig_extremes(SymMatrix(mat({{2, 1}, {1, 2}})));
    EXPECT_NEAR(e.lambda_min, 1.0, 1e-12);
    EXPECT_NEAR(e.lambda_max, 3.0, 1e-12);
    EXPECT_TRUE(checks::rayleigh_bounds(0).pass);
}

TEST(Subsets, EnumerationOrderAndCounts)
{
    const auto subs = enumerate_subsets(3, 2);
    ASSERT_EQ(subs.size(), 3u);
    EXPECT_EQ(subs[0].to_string(), "1;2");
    EXPECT_EQ(subs[1].to_string(), "1;3");
    EXPECT_EQ(subs[2].to_string(), "2;3");
    EXPECT_EQ(enumerate_subsets(4, 4).size(), 1u);
    EXPECT_EQ(enumerate_subsets(10, 3).size(), 120u);
    EXPECT_EQ(binomial(10, 3), 120u);
    EXPECT_THROW(enumerate_subsets(60, 30), EnumerationTooLargeError);
    EXPECT_THROW(enumerate_subsets(4, 0), InvalidSetError);
    EXPECT_TRUE(checks::subset_counts().pass);
}

TEST(Subsets, StreamMatchesCallback)
{
    SubsetStream s(6, 3);
    std::size_t count = 0;
    while (auto S = s.next()) {
        EXPECT_EQ(S->size(), 3);
        ++count;
    }
    EXPECT_EQ(count, 20u);
}

TEST(Spd, PrincipalSubmatricesOfSpdAreSpd) { EXPECT_TRUE(checks::principal_submatrices_spd(1).pass); }

// ---- objectives ------------------------------------------------------------

TEST(LsqCos, ScalarExample)
{
    Matrix A(1, 1);
    A(0, 0) = 1.0;
    const auto f = make_lsq_cos(A, vec({0}), vec({0}), false);
    EXPECT_DOUBLE_EQ(f.value(vec({2.0})), 2.0 + 1.0);
    EXPECT_DOUBLE_EQ(f.gradient(vec({2.0}))[0], 2.0);
}

TEST(LsqCos, GradientSmoothnessAndDomination)
{
    const auto inst = gen_instance(30, 8, 5);
    const auto f = make_lsq_cos(inst.A, inst.b, inst.c, false);
    EXPECT_TRUE(checks::gradient_fd(f, 1).pass);
    EXPECT_TRUE(checks::m_smoothness(f, 2).pass);
    EXPECT_TRUE(checks::lsq_cos_hessian_domination(f, 3).pass);
}

TEST(LsqCos, ExactGlobalMinimumIsStationaryAndLowest)
{
    const auto inst = gen_instance(60, 10, 2);
    const auto f = make_lsq_cos(inst.A, inst.b, inst.c, true);
    ASSERT_TRUE(f.known_opt_value && f.known_minimizer);
    EXPECT_LT(f.gradient(*f.known_minimizer).norm(), 1e-10);
    // no descent run from random starts goes below the reported optimum
    const auto p = make_smooth_problem(f);
    std::mt19937_64 rng(9);
    for (int t = 0; t < 5; ++t) {
        RunConfig cfg;
        cfg.max_iters = 3000;
        cfg.x0 = checks::detail::gaussian(10, rng, 3.0);
        const auto r = run(p, BlockRule{}, cfg);
        EXPECT_GE(r.final_F, *f.known_opt_value - 1e-12);
    }
}

TEST(L1, ProxExamples)
{
    const auto g = make_l1(0.3);
    EXPECT_NEAR(g.prox(1.0, 1.0, 0), 0.7, 1e-15);
    EXPECT_EQ(g.prox(-0.2, 1.0, 0), 0.0);
    const auto z = make_l1(0.0);
    EXPECT_TRUE(z.is_zero);
    EXPECT_EQ(z.prox(-1.25, 3.0, 0), -1.25);
    EXPECT_THROW(make_l1(-1.0), ConfigError);
    EXPECT_TRUE(checks::l1_prox_grid(4).pass);
}

TEST(ProductSquare, Values)
{
    const auto f = make_product_square();
    EXPECT_EQ(f.value(vec({1, 1})), 1.0);
    EXPECT_EQ(f.gradient(vec({1, 1})), vec({2, 2}));
    for (double t : {-2.0, -0.3, 0.0, 1.7}) EXPECT_EQ(f.value(vec({0, t})), 0.0);
    EXPECT_TRUE(checks::gradient_fd(f, 3).pass);
    EXPECT_TRUE(checks::m_smoothness(f, 3).pass);
}

TEST(HuberProduct, ValuesAndContinuity)
{
    const auto f = make_huber_product();
    EXPECT_EQ(f.value(vec({2, 2})), 9.0);
    EXPECT_DOUBLE_EQ(detail::huber_d(1.0 - 1e-15), 2.0 * (1.0 - 1e-15));
    EXPECT_EQ(detail::huber_d(1.0), 2.0);
    EXPECT_TRUE(checks::gradient_fd(f, 5).pass);
    EXPECT_TRUE(checks::m_smoothness(f, 5).pass);
}

TEST(Plateau, FlatInflection)
{
    const double c = flat_inflection_c();
    EXPECT_NEAR(c, 2.15, 0.01);
    const auto f = make_plateau_1d(c);
    const double xi = flat_inflection_point(c);
    // f'(x) = x - pi/c - c sin(cx), f''(x) = 1 - c^2 cos(cx)
    EXPECT_NEAR(f.gradient(vec({xi}))[0], 0.0, 1e-12);
    EXPECT_NEAR(1.0 - c * c * std::cos(c * xi), 0.0, 1e-12);
    EXPECT_NEAR(f.gradient(vec({std::numbers::pi / c}))[0], 0.0, 1e-15);
    // nonconvex: f'' < 0 where cos(cx) = 1
    EXPECT_LT(1.0 - c * c * std::cos(c * 0.0), 0.0);
    ASSERT_TRUE(f.known_opt_value);
    EXPECT_NEAR(*f.known_opt_value, -1.0, 1e-12);
}

TEST(Quadratic, ClosedFormOptimum)
{
    const Matrix H = mat({{2, 1}, {1, 3}});
    const auto f = make_quadratic(H, vec({1, -1}));
    ASSERT_TRUE(f.known_minimizer);
    EXPECT_LT(f.gradient(*f.known_minimizer).norm(), 1e-14);
    EXPECT_NEAR(*f.strong_convexity, eig_extremes(SymMatrix(H)).lambda_min, 1e-12);
    EXPECT_THROW(make_quadratic(mat({{1, 0}, {0, -1}}), vec({0, 0})), ClassParameterError);
}

TEST(GenInstance, StructureAndDeterminism)
{
    EXPECT_TRUE(checks::gen_instance_structure(40, 12, 0).pass);
    EXPECT_TRUE(checks::gen_instance_structure(80, 20, 7).pass);
    const auto one = gen_instance(1, 1, 3);
    EXPECT_EQ(one.A.rows(), 1);
    EXPECT_NEAR(std::abs(one.A(0, 0)), 1.0, 1e-15);
    EXPECT_THROW(gen_instance(3, 5, 0), ConfigError);
    const auto s = prescribed_singular_values(4, 4);
    EXPECT_DOUBLE_EQ(s[0], 1.0);
    EXPECT_DOUBLE_EQ(s[3], 0.25);
}

// ---- prox engine -------------------------------------------------------------

TEST(LambdaI, Examples)
{
    // g = 0: lambda_i = g_i^2 / 2
    const auto ps = quadratic_problem(Matrix::Identity(2, 2), vec({-2, 0}));
    EXPECT_DOUBLE_EQ(lambda_i(ps, vec({0, 0}), 0, 1.0), 2.0);
    // dead zone: x_i = 0, |g_i| <= lambda
    const auto pz = quadratic_problem(Matrix::Identity(1, 1), vec({0.2}), 0.3);
    EXPECT_EQ(lambda_i(pz, vec({0}), 0, 1.0), 0.0);
    // x_i = 0, g_i = 1, lambda = 0.3, L = 1: v = -0.7, lambda_i = 0.245
    const auto p1 = quadratic_problem(Matrix::Identity(1, 1), vec({1.0}), 0.3);
    EXPECT_NEAR(lambda_i(p1, vec({0}), 0, 1.0), 0.245, 1e-15);
}

TEST(Certificate, SmoothIdentityAndMinimizer)
{
    const auto p = quadratic_problem(Matrix::Identity(2, 2), vec({-3, -4}));
    const auto c = certificate(p, vec({0, 0}));
    EXPECT_DOUBLE_EQ(c.lambda_total, 12.5);
    EXPECT_EQ(certificate(p, *p.minimizer).lambda_total, 0.0);
    EXPECT_TRUE(checks::certificate_identities(p, 2, "identity").pass);
    auto inst = gen_instance(40, 10, 1, 1.0 / 800.0);
    EXPECT_TRUE(checks::certificate_identities(to_problem(inst), 2, "l1").pass);
}

TEST(Certificate, MatchesGridOracle) { EXPECT_TRUE(checks::lambda_grid_oracle(4, 3, 11).pass); }

TEST(Forcing, Examples)
{
    // f = x^2/2 at x = 1: xi = lambda = 1/2 -> mu = 1
    const auto p = quadratic_problem(Matrix::Identity(1, 1), vec({0}));
    EXPECT_DOUBLE_EQ(forcing(p, vec({1.0})), 1.0);
    EXPECT_THROW(forcing(p, vec({0.0})), AtOptimumError);

    const auto q = quadratic_problem(mat({{1, 0}, {0, 4}}), vec({0, 0}));
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
        const Vector x = checks::detail::gaussian(2, rng);
        const double mu = forcing(q, x);
        EXPECT_GE(mu, 1.0 - 1e-12);
        EXPECT_LE(mu, 4.0 + 1e-12);
    }
}

TEST(BlockStep, SmoothIdentityExample)
{
    const auto p = quadratic_problem(Matrix::Identity(3, 3), vec({-2, -2, -2}));
    const auto st = block_step(p, vec({0, 0, 0}), CoordSet({0, 2}, 3));
    EXPECT_EQ(st.u_S, vec({2, 2}));
    EXPECT_DOUBLE_EQ(st.decrease, 4.0);
    // with the sign convention of the example (gradient +2): steps are -2
    const auto p2 = quadratic_problem(Matrix::Identity(3, 3), vec({2, 2, 2}));
    EXPECT_EQ(block_step(p2, vec({0, 0, 0}), CoordSet({0, 1}, 3)).u_S, vec({-2, -2}));
}

TEST(BlockStep, ZeroRegularizerIsGradientStep)
{
    auto p = make_problem(make_quadratic(mat({{3, 1}, {1, 2}}), vec({1, 1}), QuadSmoothness::scalar), make_l1(0.0));
    const Vector x = vec({0.5, -1});
    const Vector g = p.f.gradient(x);
    const double L = 5.0;
    const auto st = block_step(p, x, CoordSet::full(2), StepModel::scalar(L));
    EXPECT_EQ(st.u_S, Vector(-g / L));
}

TEST(BlockStep, DecreaseEqualsNegativeModelValue)
{
    auto inst = gen_instance(40, 10, 3, 1.0 / 400.0);
    const auto p = to_problem(inst);
    const auto ps = to_problem(gen_instance(40, 10, 3));
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t) {
        const Vector x = checks::detail::gaussian(10, rng);
        const auto S = CoordSet({1, 4, 5, 9}, 10);
        for (const auto* prob : {&p, &ps}) {
            const auto model = default_model(*prob);
            const Vector g = prob->f.gradient(x);
            const auto st = block_step(*prob, x, g, S, model);
            const double U = block_model_value(*prob, x, g, S, st.u_S, model);
            EXPECT_NEAR(st.decrease, -U, 1e-10 * std::max(1e-300, st.decrease));
        }
    }
}

TEST(Proportion, Examples)
{
    const auto pI = quadratic_problem(Matrix::Identity(3, 3), vec({1, -2, 3}));
    EXPECT_NEAR(proportion(pI, vec({0.3, 0.1, -2}), CoordSet::full(3)), 1.0, 1e-15);

    const auto pd = quadratic_problem(mat({{1, 0}, {0, 2}}), vec({1, 1}));
    const Vector x0 = vec({0, 0});
    EXPECT_DOUBLE_EQ(proportion(pd, x0, CoordSet({0}, 2)), 0.5);
    EXPECT_DOUBLE_EQ(proportion(pd, x0, CoordSet({1}, 2)), 0.25);
    // zero at the optimum
    EXPECT_EQ(proportion(pd, *pd.minimizer, CoordSet({0}, 2)), 0.0);

    auto inst = gen_instance(40, 10, 4, 1.0 / 400.0);
    const auto pn = to_problem(inst);
    const Vector x = Vector::Constant(10, 0.5);
    const double theta = proportion(pn, x, CoordSet::full(10));
    EXPECT_NEAR(theta, 1.0 / pn.L_scalar, 1e-12 / pn.L_scalar);
}

TEST(Proportion, MonotoneUnderInclusion) { EXPECT_TRUE(checks::theta_monotone_diag(7).pass); }

TEST(Proportion, GreedyCoordinateDominatesAverages)
{
    const auto inst = gen_instance(40, 10, 2);
    EXPECT_TRUE(checks::greedy_dominance(to_problem(inst), 1, "smooth").pass);
    auto ns = inst;
    ns.lambda = 1.0 / 400.0;
    EXPECT_TRUE(checks::greedy_dominance(to_problem(ns), 1, "l1").pass);
}

TEST(ConvexDecrease, LowerBound)
{
    auto q = make_random_quadratic(6, 10.0, 3, 0.2);
    attach_reference_optimum(q);
    EXPECT_TRUE(checks::lemma5_lower_bound(q, 5, "quadratic+l1").pass);
    EXPECT_TRUE(checks::lemma5_lower_bound(make_random_quadratic(6, 10.0, 4, 0.0), 5, "quadratic").pass);
}
