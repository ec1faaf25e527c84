#include <cmath>
#include <random>
#include <sstream>

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

CompositeProblem diag_quadratic(const Vector& d, const Vector& q)
{
    return make_smooth_problem(make_quadratic(Matrix(d.asDiagonal()), q));
}

} // namespace

// ---- rule grammar ----------------------------------------------------------

TEST(RuleGrammar, ParsesAllRules)
{
    EXPECT_EQ(parse_rule("full").kind, RuleKind::full_batch);
    EXPECT_EQ(parse_rule("uniform").kind, RuleKind::uniform_coord);
    EXPECT_EQ(parse_rule("importance").kind, RuleKind::importance_coord);
    EXPECT_EQ(parse_rule("greedy").kind, RuleKind::greedy_coord);
    EXPECT_EQ(parse_rule("cyclic").kind, RuleKind::cyclic_coord);
    const auto r = parse_rule(" nice:3 ,seed=17");
    EXPECT_EQ(r.kind, RuleKind::tau_nice);
    EXPECT_EQ(r.tau, 3);
    EXPECT_EQ(r.seed, 17u);
    EXPECT_EQ(parse_rule("greedymb:2").name(), "greedymb:2");
    EXPECT_EQ(parse_rule(parse_rule("nice:4,seed=5").spec()).seed, 5u);
    EXPECT_THROW(parse_rule("nice"), ConfigError);
    EXPECT_THROW(parse_rule("nice:0"), ConfigError);
    EXPECT_THROW(parse_rule("bogus"), ConfigError);
}

TEST(RuleGrammar, ValidationAgainstProblem)
{
    const auto p = diag_quadratic(vec({1, 2, 3}), vec({1, 1, 1}));
    EXPECT_THROW(validate_rule(parse_rule("nice:4"), p, StepModel::matrix()), ConfigError);
    EXPECT_THROW(validate_rule(parse_rule("importance"), p, StepModel::scalar(3.0)), ConfigError);
    EXPECT_NO_THROW(validate_rule(parse_rule("importance"), p, StepModel::matrix()));
}

// ---- selectors ---------------------------------------------------------------

TEST(Selector, GreedySmoothPicksLargestScaledGradient)
{
    const auto p = diag_quadratic(vec({1, 1}), vec({3, 1}));
    Selector sel(parse_rule("greedy"), p, StepModel::matrix());
    const Vector x = vec({0, 0});
    const Vector g = p.f.gradient(x);
    const Vector lam = certificate(p, x, g, StepModel::matrix()).lambda_per_coord;
    EXPECT_EQ(sel.select({x, g, lam, 0}).S.to_string(), "1");
}

TEST(Selector, GreedyMinibatchNonsmoothTopTau)
{
    auto p = make_problem(make_quadratic(Matrix::Identity(4, 4), Vector::Zero(4)), make_l1(0.1));
    Selector sel(parse_rule("greedymb:2"), p, StepModel::scalar(1.0));
    const Vector x = Vector::Zero(4);
    const Vector lam = vec({5, 1, 4, 2});
    EXPECT_EQ(sel.select({x, x, lam, 0}).S.to_string(), "1;3");
}

TEST(Selector, CyclicSweeps)
{
    const auto p = diag_quadratic(vec({1, 2, 3}), vec({1, 1, 1}));
    Selector sel(parse_rule("cyclic"), p, StepModel::matrix());
    const Vector z = Vector::Zero(3);
    std::string seq;
    for (Index k = 0; k < 7; ++k) seq += sel.select({z, z, z, k}).S.to_string();
    EXPECT_EQ(seq, "1231231");
}

TEST(Selector, SamplingFrequencies) { EXPECT_TRUE(checks::selection_frequencies(42).pass); }

TEST(Selector, Determinism)
{
    const auto inst = gen_instance(30, 10, 1);
    EXPECT_TRUE(checks::selection_determinism(to_problem(inst), 8).pass);
}

TEST(Selector, GreedyMinibatchForwardFallbackIsFlagged)
{
    const auto p = to_problem(gen_instance(40, 30, 2));
    Selector sel(parse_rule("greedymb:10"), p, StepModel::matrix(), 1000);
    EXPECT_FALSE(sel.exact());
    const Vector x = Vector::Zero(30);
    const Vector g = p.f.gradient(x);
    const auto cert = certificate(p, x, g, StepModel::matrix());
    const auto s = sel.select({x, g, cert.lambda_per_coord, 0});
    EXPECT_TRUE(s.heuristic);
    EXPECT_EQ(s.S.size(), 10);
}

// ---- expected proportions ------------------------------------------------------

TEST(ExpectedTheta, HandExamples)
{
    const auto p = diag_quadratic(vec({1, 2}), vec({1, 1}));
    const Vector x = vec({0, 0});
    EXPECT_DOUBLE_EQ(exact_expected_theta(parse_rule("uniform"), p, x, StepModel::matrix()).value, 0.375);
    EXPECT_DOUBLE_EQ(exact_expected_theta(parse_rule("full"), p, x, StepModel::matrix()).value,
                     proportion(p, x, CoordSet::full(2)));
    const auto pI = make_smooth_problem(make_quadratic(Matrix::Identity(6, 6), vec({1, -2, 3, 0.5, 1, 2})));
    for (Index tau = 1; tau <= 6; ++tau) {
        BlockRule r{RuleKind::tau_nice, tau, 0};
        EXPECT_NEAR(exact_expected_theta(r, pI, vec({0, 0, 0, 0, 0, 0}), StepModel::matrix()).value, tau / 6.0, 1e-14);
    }
    EXPECT_THROW(exact_expected_theta(parse_rule("cyclic"), p, x, StepModel::matrix()), ConfigError);
}

TEST(ExpectedTheta, MonteCarloBeyondBudget)
{
    const auto pI = make_smooth_problem(make_quadratic(Matrix::Identity(8, 8), Vector::Constant(8, 1.0)));
    BlockRule r{RuleKind::tau_nice, 4, 3};
    const auto e = exact_expected_theta(r, pI, Vector::Zero(8), StepModel::matrix(), 10, 4000);
    EXPECT_FALSE(e.exact);
    EXPECT_NEAR(e.value, 0.5, 1e-12);
}

TEST(ExpectedTheta, BoundSuiteSmall)
{
    checks::ThetaSuiteOptions o;
    o.m = 30;
    o.n = 8;
    o.instances = 2;
    o.points = 8;
    o.seed = 5;
    for (const auto& c : checks::theta_bounds(o)) EXPECT_TRUE(c.pass) << checks::format_check(c);
}

// ---- descent driver ---------------------------------------------------------------

TEST(Run, OneStepNewtonOnScalarQuadratic)
{
    Matrix one(1, 1);
    one(0, 0) = 1.0;
    const auto p = make_smooth_problem(make_quadratic(one, Vector::Zero(1)));
    RunConfig cfg;
    cfg.max_iters = 1;
    cfg.x0 = vec({1.0});
    const auto r = run(p, BlockRule{}, cfg);
    EXPECT_EQ(r.x[0], 0.0);
    EXPECT_EQ(r.trace.size(), 1u);
}

TEST(Run, GreedyOnDiagonalQuadraticSatisfiesOneStepBound)
{
    const auto p = diag_quadratic(vec({1, 4}), vec({0, 0}));
    RunConfig cfg;
    cfg.max_iters = 50;
    cfg.x0 = vec({3.0, -2.0});
    cfg.record_diagnostics = true;
    const auto r = run(p, parse_rule("greedy"), cfg);
    const auto rep = verify_trace(r);
    EXPECT_TRUE(rep.all_pass());
    EXPECT_GE(rep.get("k_step_product").worst_margin, 0.0);
}

TEST(Run, StopsOnGapAndCertificate)
{
    RunConfig cfg;
    cfg.max_iters = 100000;
    cfg.stop_on = StopOn::gap;
    cfg.epsilon = 1e-6;
    cfg.x0 = vec({3.0, -2.0, 1.0});
    auto r = run(diag_quadratic(vec({1, 4, 9}), vec({1, -1, 2})), parse_rule("uniform", 1), cfg);
    EXPECT_EQ(r.termination, Termination::reached_gap);
    EXPECT_LE(*r.final_xi, 1e-6);

    // lsq_cos is nonconvex: the gap need not close, but the certificate does
    const auto p = to_problem(gen_instance(40, 10, 0));
    cfg.x0 = generated_start(10, 0);
    cfg.stop_on = StopOn::certificate;
    r = run(p, parse_rule("uniform", 1), cfg);
    EXPECT_EQ(r.termination, Termination::reached_certificate);
    EXPECT_LT(*r.final_lambda, 1e-6);
}

TEST(Run, RejectsBadConfig)
{
    const auto p = to_problem(gen_instance(40, 10, 0));
    RunConfig cfg;
    cfg.max_iters = 0;
    EXPECT_THROW(run(p, BlockRule{}, cfg), ConfigError);
    cfg.max_iters = 10;
    cfg.x0 = Vector::Zero(3);
    EXPECT_THROW(run(p, BlockRule{}, cfg), ConfigError);
    auto q = p;
    q.opt_value.reset();
    RunConfig g;
    g.stop_on = StopOn::gap;
    EXPECT_THROW(run(q, BlockRule{}, g), ConfigError);
}

TEST(Run, NonFiniteObjectiveIsNumericFailure)
{
    Objective f = make_quadratic(Matrix::Identity(2, 2), Vector::Zero(2));
    f.gradient = [](const Vector& x) {
        Vector g = x;
        g[0] = std::numeric_limits<double>::quiet_NaN();
        return g;
    };
    const auto p = make_smooth_problem(f);
    RunConfig cfg;
    cfg.x0 = vec({1, 1});
    try {
        run(p, BlockRule{}, cfg);
        FAIL() << "expected a numeric failure";
    } catch (const NumericError& e) {
        EXPECT_EQ(e.iterate().size(), 2);
    }
}

TEST(Run, ZeroRegularizerReproducesSmoothRunBitForBit) { EXPECT_TRUE(checks::smooth_nonsmooth_consistency(3).pass); }

TEST(Run, Determinism)
{
    EXPECT_TRUE(checks::run_determinism(to_problem(gen_instance(40, 10, 4)), 2).pass);
}

TEST(Run, AllRulesVerifyOnSmallInstances)
{
    const auto p = to_problem(gen_instance(60, 10, 1));
    const Vector x0 = generated_start(10, 1);
    const auto r = checks::lemma4_runs(p, {"full", "uniform", "importance", "greedy", "cyclic", "nice:3", "greedymb:3"},
                                       60, 1, "small", x0);
    EXPECT_TRUE(r.one_step.pass) << r.one_step.detail;
    EXPECT_TRUE(r.monotone.pass);
    EXPECT_TRUE(r.product.pass);
}

TEST(VerifyTrace, DetectsMonotonicityViolation)
{
    RunResult r;
    for (int k = 0; k < 3; ++k) {
        IterationRecord rec;
        rec.k = static_cast<std::uint64_t>(k);
        rec.F = k == 1 ? 2.0 : 1.0;
        rec.xi = rec.F;
        rec.mu = 0.1;
        rec.theta = 0.1;
        r.trace.push_back(rec);
    }
    r.final_F = 0.5;
    r.final_xi = 0.5;
    const auto rep = verify_trace(r);
    EXPECT_FALSE(rep.get("monotone").pass);
    EXPECT_EQ(*rep.get("monotone").worst_k, 0u);
    EXPECT_FALSE(rep.get("one_step").pass);
}

TEST(VerifyTrace, MissingDiagnosticsIsUnverifiable)
{
    const auto p = to_problem(gen_instance(40, 10, 0));
    RunConfig cfg;
    cfg.max_iters = 5;
    const auto r = run(p, BlockRule{}, cfg);
    EXPECT_THROW(verify_trace(r), UnverifiableError);
}

TEST(SequenceBound, Examples)
{
    std::vector<double> a{1.0};
    std::vector<double> b;
    for (int t = 0; t < 50; ++t) {
        b.push_back(1.0);
        a.push_back((1.0 - a.back()) * a.back());
    }
    // alpha_0 = 1 makes alpha_1 = 0; positivity fails and is reported
    EXPECT_FALSE(sequence_bound_check(a, b).pass);

    a = {0.5};
    b.clear();
    for (int t = 0; t < 50; ++t) {
        b.push_back(1.0);
        a.push_back((1.0 - a.back()) * a.back());
    }
    const auto ok = sequence_bound_check(a, b);
    EXPECT_TRUE(ok.pass);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_LE(a[k], 0.5 / (1.0 + 0.5 * static_cast<double>(k)) * (1 + 1e-12));

    // constant beta with a geometrically decreasing alpha
    a.clear();
    b.assign(30, 0.1);
    double v = 2.0;
    for (int t = 0; t <= 30; ++t, v *= 0.5) a.push_back(v);
    EXPECT_TRUE(sequence_bound_check(a, b).pass);

    // precondition violation is reported, not treated as a bound failure
    const auto bad = sequence_bound_check({1.0, 0.99}, {0.5});
    EXPECT_FALSE(bad.pass);
    ASSERT_TRUE(bad.precondition_violated_at);
    EXPECT_FALSE(bad.bound_violated_at);
}

TEST(SequenceBound, RandomAndFromRun)
{
    EXPECT_TRUE(checks::lemma3_sequences(50, 77).pass);
    EXPECT_TRUE(checks::wpl_recursion_from_run(2).pass);
}

TEST(TraceCsv, HeaderAndRows)
{
    const auto p = to_problem(gen_instance(40, 10, 0));
    RunConfig cfg;
    cfg.max_iters = 3;
    cfg.record_diagnostics = true;
    const auto r = run(p, parse_rule("nice:2", 1), cfg);
    std::ostringstream os;
    write_trace_csv(os, r, false);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "k,rule,block,F,xi,lambda,mu,theta,step_norm,ns");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_NE(line.find(",nice:2,"), std::string::npos);
        EXPECT_EQ(line.substr(line.size() - 2), ",0");
    }
    EXPECT_EQ(rows, 3);
}

// ---- rates ------------------------------------------------------------------------

TEST(LTau, Examples)
{
    const SymMatrix D = SymMatrix::diagonal(vec({1, 2, 3}));
    EXPECT_EQ(L_tau(D, 2).value, 3.0);
    const SymMatrix M(random_spd(6, 0.1, 10.0, 1));
    EXPECT_NEAR(L_tau(M, 6).value, eig_extremes(M).lambda_max, 1e-12);
    EXPECT_TRUE(checks::L_tau_identities(2).pass);
    // beyond the budget: bounded fallback, flagged inexact
    const auto lt = L_tau(M, 3, 5);
    EXPECT_FALSE(lt.exact);
    EXPECT_GE(lt.value, L_tau(M, 3).value - 1e-12);
}

TEST(ExpectedInverse, Examples)
{
    const auto E = expected_inverse_matrix(SymMatrix::identity(5), 2);
    EXPECT_LT((E.value.dense() - 0.4 * Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-15);
    const SymMatrix M(random_spd(4, 0.5, 5.0, 8));
    EXPECT_LT((expected_inverse_matrix(M, 4).value.dense() - M.dense().inverse()).cwiseAbs().maxCoeff(), 1e-12);

    const SymMatrix M3(random_spd(3, 0.5, 5.0, 9));
    Matrix acc = Matrix::Zero(3, 3);
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& pr : pairs) {
        Eigen::Matrix2d sub;
        sub << M3(pr[0], pr[0]), M3(pr[0], pr[1]), M3(pr[1], pr[0]), M3(pr[1], pr[1]);
        const Eigen::Matrix2d inv = sub.inverse();
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) acc(pr[r], pr[c]) += inv(r, c) / 3.0;
    }
    EXPECT_LT((expected_inverse_matrix(M3, 2).value.dense() - acc).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Eso, Examples)
{
    std::mt19937_64 rng(1);
    Matrix A(5, 3);
    for (Index j = 0; j < 3; ++j) A.col(j) = checks::detail::gaussian(5, rng);
    const Vector v1 = eso_v(A, 1);
    EXPECT_LT((v1 - (A.transpose() * A).diagonal()).cwiseAbs().maxCoeff(), 1e-13);
    const Vector v3 = eso_v(A, 3);
    EXPECT_LT((v3 - 3.0 * A.array().square().colwise().sum().transpose().matrix()).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_TRUE(checks::eso_vs_expected_inverse(3).pass);
    EXPECT_THROW(eso_v(Matrix::Ones(3, 1), 1), ConfigError);
}

TEST(PredictK, TableRows)
{
    const auto p = diag_quadratic(vec({1, 2, 4}), vec({1, 1, 1}));
    const double mu = 1.0;
    const double xi0 = 2.0;
    const double eps = 1e-3;
    const auto rb = predict_K(parse_rule("uniform"), FunctionClass::strongly_pl(mu), p, StepModel::matrix(), xi0);
    EXPECT_EQ(rb.K(eps), static_cast<std::uint64_t>(std::ceil(3 * 4.0 / mu * std::log(xi0 / eps))));
    EXPECT_EQ(rb.K(xi0), 0u);

    auto pn = make_problem(make_quadratic(Matrix(vec({1, 2, 4}).asDiagonal()), vec({1, 1, 1})), make_l1(0.1));
    const auto model = step_model_for(pn, parse_rule("greedymb:2"));
    const double rho = 0.05;
    const auto rw = predict_K(parse_rule("greedymb:2"), FunctionClass::weakly_pl(rho), pn, model, xi0);
    const double Lt = L_tau(pn.f.smoothness, 2).value;
    EXPECT_EQ(rw.K(eps), static_cast<std::uint64_t>(std::ceil(3 * Lt / (rho * 2 * eps))));

    EXPECT_THROW(predict_K(parse_rule("cyclic"), FunctionClass::general(), p, StepModel::matrix(), xi0), NoGuaranteeError);
    EXPECT_THROW(predict_K(parse_rule("importance"), FunctionClass::general(), pn, model, xi0), NoGuaranteeError);
    EXPECT_THROW(predict_K(parse_rule("full"), FunctionClass::strongly_pl(-1.0), p, StepModel::matrix(), xi0),
                 ClassParameterError);
    EXPECT_TRUE(checks::predict_K_monotone(p).pass);
}

TEST(PredictK, GuaranteedAccuracyInvertsK)
{
    const auto p = diag_quadratic(vec({1, 2, 4}), vec({1, 1, 1}));
    const auto rb = predict_K(parse_rule("full"), FunctionClass::general(), p, StepModel::matrix(), 1.0);
    for (double k : {10.0, 1e3, 1e6}) {
        const double e = guaranteed_accuracy(rb, k);
        EXPECT_LE(rb.K_real(e), k * (1 + 1e-9));
        EXPECT_GT(rb.K_real(e * 0.999), k);
    }
}

TEST(PredictK, ObservedNeverExceedsPrediction) { EXPECT_TRUE(checks::empirical_le_predicted(6, 3).pass); }

TEST(GradientDominated, Examples)
{
    const double L = 2.0;
    const double xi0 = 1.0;
    EXPECT_EQ(gradient_dominated_K(1.0, 2.0, L, xi0, 0.01),
              static_cast<std::uint64_t>(std::ceil(2 * L * xi0 / 0.01 * std::log(xi0 / 1e-4))));
    EXPECT_EQ(gradient_dominated_K(1.0, 1.0, L, xi0, 1.0), 0u);
    // doubling eps at least halves the leading factor
    const double k1 = static_cast<double>(gradient_dominated_K(1.0, 2.0, L, xi0, 0.01));
    const double k2 = static_cast<double>(gradient_dominated_K(1.0, 2.0, L, xi0, 0.02));
    EXPECT_LE(k2, 0.5 * k1 + 1);
}

TEST(StrongConvexity, Substitutions)
{
    auto p = make_random_quadratic(4, 4.0, 1, 0.1);
    const double l = *p.f.strong_convexity;
    for (double L : {0.5 * l, l, 10.0 * l}) EXPECT_NEAR(strongly_convex_mu(p, L), std::min(L / 2, L * l / L), 1e-12);
    p.f.strong_convexity = 0.0;
    p.g.strong_convexity = 1e-9;
    EXPECT_NEAR(strongly_convex_mu(p, 1.0), 1e-9, 1e-15);
    p.g.strong_convexity = 1.0;
    EXPECT_NEAR(strongly_convex_mu(p, 1.0), 0.5, 1e-15);
    const auto s = make_random_quadratic(4, 4.0, 1, 0.0);
    EXPECT_NEAR(strongly_convex_mu(s, 100.0), *s.f.strong_convexity, 1e-15);
}

TEST(StrongConvexity, ForcingBound) { EXPECT_TRUE(checks::theorem5(3, 30, 1).pass); }

TEST(WeakConvexity, RadiusAndRho)
{
    Matrix H(2, 2);
    H << 1.0, 0.0, 0.0, 9.0;
    const auto p = make_smooth_problem(make_quadratic(H, Vector::Zero(2)));
    const Vector x0 = vec({1.0, 1.0});
    const auto est = weakly_convex_rho(p, x0, 9.0);
    // level set {x : x1^2 + 9 x2^2 <= 10} has semi-axes sqrt(10) and sqrt(10)/3
    EXPECT_NEAR(est.R, std::sqrt(10.0), 1e-12);
    EXPECT_LE(est.R, x0.norm() * 3.0 + 1e-12);
    EXPECT_NEAR(est.rho, std::min(9.0 / (2 * 5.0), 1.0 / 20.0), 1e-12);
    EXPECT_THROW(weakly_convex_rho(p, Vector::Zero(2), 9.0), ClassParameterError);
    EXPECT_TRUE(checks::theorem8(2, 20, 4).pass);
}

TEST(ClassMembership, ProductSquareAndHuber)
{
    EXPECT_TRUE(checks::wpl_product_square(2000, 1).pass);
    EXPECT_TRUE(checks::huber_not_strongly_pl().pass);
}

TEST(ClassMembership, PlateauDisjunction)
{
    const auto r = checks::plateau_disjunction();
    EXPECT_TRUE(r.check.pass) << r.check.detail;
}
