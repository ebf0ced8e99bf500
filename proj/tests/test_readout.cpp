#include "oracles.hpp"
#include "test_util.hpp"

#include "oprc/readout.hpp"

using namespace oprc;

namespace {

std::vector<real> flat(const mat& m) { return {m.data(), m.data() + m.size()}; }

real ridge_objective(const mat& x, const mat& y, const readout_weights& w) {
    return (predict(w, x) - y).squaredNorm() + w.ridge_lambda * w.coefficients().squaredNorm();
}

} // namespace

TEST(Ridge, IdentityDesign) {
    mat x = mat::Identity(2, 2);
    mat y(2, 1);
    y << 1, 2;
    auto w0 = train_ridge(x, y, 0.0, false);
    EXPECT_NEAR(w0.coefficients()(0, 0), 1.0, 1e-14);
    EXPECT_NEAR(w0.coefficients()(1, 0), 2.0, 1e-14);
    EXPECT_EQ(w0.bias()(0), 0.0);
    auto w1 = train_ridge(x, y, 1.0, false);
    EXPECT_NEAR(w1.coefficients()(0, 0), 0.5, 1e-14);
    EXPECT_NEAR(w1.coefficients()(1, 0), 1.0, 1e-14);
    EXPECT_EQ(w1.ridge_lambda, 1.0);
}

TEST(Ridge, MatchesNormalEquationsOracle) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        mat x = test::random_matrix(50, 10, rng);
        mat y = test::random_matrix(50, 3, rng);
        for (bool intercept : {true, false}) {
            auto w = train_ridge(x, y, 0.1, intercept);
            mat ref = oracle::ridge_normal_equations(x, y, 0.1, intercept);
            EXPECT_LT((w.coefficients() - ref.topRows(10)).cwiseAbs().maxCoeff(), 1e-8);
            if (intercept) {
                EXPECT_LT((w.bias() - ref.row(10)).cwiseAbs().maxCoeff(), 1e-8);
            }
        }
    }
}

TEST(Ridge, PathReusesFactorization) {
    std::mt19937_64 rng(4);
    mat x = test::random_matrix(40, 8, rng), y = test::random_matrix(40, 2, rng);
    ridge_path path(x, y);
    EXPECT_EQ(path.rank(), 8);
    for (real lambda : {0.0, 1e-3, 1.0, 100.0}) {
        mat a = path.solve(lambda).w_out, b = train_ridge(x, y, lambda).w_out;
        EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
        mat ref = oracle::ridge_normal_equations(x, y, lambda, true);
        EXPECT_LT((a - ref).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Ridge, SingularDesignNeedsPenalty) {
    std::mt19937_64 rng(5);
    mat x = test::random_matrix(30, 4, rng);
    x.col(3) = 2 * x.col(0) - x.col(1);
    mat y = test::random_matrix(30, 1, rng);
    EXPECT_THROW(train_ridge(x, y, 0.0), singular_error);
    EXPECT_NO_THROW(train_ridge(x, y, 1e-6));
    // More columns than rows.
    mat wide = test::random_matrix(5, 9, rng);
    EXPECT_THROW(train_ridge(wide, test::random_matrix(5, 1, rng), 0.0), singular_error);
}

TEST(Ridge, InputErrors) {
    EXPECT_THROW(train_ridge(mat::Ones(5, 2), mat::Ones(4, 1), 0.1), shape_error);
    EXPECT_THROW(train_ridge(mat::Ones(5, 2), mat::Ones(5, 1), -1.0), domain_error);
    mat bad = mat::Ones(5, 2);
    bad(1, 1) = NAN;
    EXPECT_THROW(train_ridge(bad, mat::Ones(5, 1), 0.1), numeric_error);
}

TEST(Predict, ZeroStatesAndInterpolation) {
    readout_weights w{mat::Zero(4, 2), 0};
    w.w_out.topRows(3).setOnes();
    mat p = predict(w, mat::Zero(6, 3));
    EXPECT_EQ(p.cwiseAbs().maxCoeff(), 0.0);

    std::mt19937_64 rng(6);
    mat x = test::random_matrix(12, 12, rng), y = test::random_matrix(12, 2, rng);
    auto fit = train_ridge(x, y, 0.0, false);
    EXPECT_LT((predict(fit, x) - y).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_THROW(predict(fit, mat::Zero(3, 11)), shape_error);
}

TEST(Predict, HorizonHeadsAreSeparateProblems) {
    // Columns decouple: the first head of a 4-step model trained on the same
    // rows equals the 1-step model, while the other heads differ from it.
    std::mt19937_64 rng(7);
    mat x = test::random_matrix(60, 6, rng);
    vec s = test::random_vector(63, rng);
    mat y4(60, 4);
    for (int j = 0; j < 4; ++j) y4.col(j) = s.segment(j, 60) + x.col(j % 6) * (j + 1);
    auto w1 = train_ridge(x, y4.leftCols(1), 0.01);
    auto w4 = train_ridge(x, y4, 0.01);
    EXPECT_LT((w1.w_out.col(0) - w4.w_out.col(0)).cwiseAbs().maxCoeff(), 1e-12);
    for (int j = 1; j < 4; ++j) EXPECT_GT((w4.w_out.col(j) - w4.w_out.col(0)).norm(), 0.1);
}

TEST(Ridge, FirstOrderOptimality) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        mat x = test::random_matrix(30, 5, rng), y = test::random_matrix(30, 2, rng);
        auto w = train_ridge(x, y, 0.5);
        const real base = ridge_objective(x, y, w);
        for (Eigen::Index i = 0; i < w.w_out.size(); ++i)
            for (real d : {1e-4, -1e-4}) {
                auto p = w;
                p.w_out.data()[i] += d;
                EXPECT_GE(ridge_objective(x, y, p), base - 1e-12);
            }
    }
}

TEST(Ridge, PenaltyShrinksCoefficients) {
    std::mt19937_64 rng(9);
    mat x = test::random_matrix(40, 7, rng), y = test::random_matrix(40, 1, rng);
    ridge_path path(x, y);
    real prev = std::numeric_limits<real>::infinity();
    for (real lambda : {0.0, 1e-3, 1e-2, 0.1, 1.0, 10.0, 1e3, 1e6}) {
        real n = path.solve(lambda).coefficients().norm();
        EXPECT_LE(n, prev + 1e-12);
        prev = n;
    }
    EXPECT_LT(prev, 1e-4);
}

TEST(Nrmse, BasicValues) {
    vec y(5);
    y << 1, 3, 2, 5, 4;
    EXPECT_EQ(nrmse(y, y), 0.0);
    EXPECT_NEAR(nrmse(y, vec::Constant(5, y.mean())), 1.0, 1e-15);
    vec a(3), b(3);
    a << 1, 2, 3;
    b << 1, 2, 4;
    EXPECT_NEAR(nrmse(a, b), std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(nrmse(a, b), 0.7071, 1e-4);
    EXPECT_NEAR(nrmse(a, b), oracle::nrmse({1, 2, 3}, {1, 2, 4}), 1e-15);
}

TEST(Nrmse, Errors) {
    EXPECT_THROW(nrmse(vec::Ones(4), vec::Zero(4)), degenerate_error);
    EXPECT_THROW(nrmse(vec::Ones(1), vec::Zero(1)), length_error);
    EXPECT_THROW(nrmse(vec::Ones(3), vec::Zero(4)), shape_error);
    EXPECT_THROW(nrmse_multistep(mat::Ones(3, 2), mat::Ones(2, 3)), shape_error);
}

TEST(Nrmse, AffineInvariance) {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        vec y = test::random_vector(50, rng), yh = test::random_vector(50, rng);
        real a = std::uniform_real_distribution<real>(0.01, 100)(rng);
        real b = std::uniform_real_distribution<real>(-100, 100)(rng);
        vec ty = (a * y.array() + b).matrix(), tyh = (a * yh.array() + b).matrix();
        EXPECT_NEAR(nrmse(ty, tyh), nrmse(y, yh), 1e-10);
    }
}

TEST(Nrmse, MultistepPoolsFlattenedEntries) {
    mat y(3, 2), yh(3, 2);
    y << 1, 2, 3, 5, 4, 0;
    yh << 1.5, 2, 2, 4, 4, 1;
    EXPECT_NEAR(nrmse_multistep(y, yh), oracle::nrmse(flat(y), flat(yh)), 1e-15);
    EXPECT_EQ(nrmse_multistep(y, y), 0.0);
    mat c = y.leftCols(1), ch = yh.leftCols(1);
    EXPECT_EQ(nrmse_multistep(c, ch), nrmse(vec(c), vec(ch)));
    vec per = nrmse_per_step(y, yh);
    ASSERT_EQ(per.size(), 2);
    EXPECT_NEAR(per[1], oracle::nrmse({2, 5, 0}, {2, 4, 1}), 1e-15);
}

TEST(ErrorReduction, ReportedResults) {
    EXPECT_NEAR(error_reduction(0.104, 0.558), 0.8136, 1e-4);
    EXPECT_NEAR(error_reduction(0.236, 1.309), 0.8197, 1e-4);
    EXPECT_EQ(error_reduction(0.3, 0.3), 0.0);
}

TEST(ErrorReduction, SignAndBound) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<real> d(1e-6, 5);
    for (int i = 0; i < 1000; ++i) {
        real rc = d(rng), ml = d(rng);
        real er = error_reduction(rc, ml);
        EXPECT_LE(er, 1.0);
        EXPECT_EQ(er > 0, rc < ml);
    }
    EXPECT_THROW(error_reduction(0.1, 0.0), domain_error);
    EXPECT_THROW(error_reduction(0.1, -1.0), domain_error);
    EXPECT_THROW(error_reduction(-0.1, 1.0), domain_error);
}

TEST(LambdaSelection, PicksOnValidationTail) {
    std::mt19937_64 rng(12);
    mat x = test::random_matrix(200, 5, rng);
    vec beta = test::random_vector(5, rng);
    mat y = x * beta + 0.01 * test::random_matrix(200, 1, rng);
    std::vector<real> grid{1e-8, 1e-4, 1.0, 1e4};
    auto c = select_ridge_lambda(x, y, grid);
    EXPECT_LE(c.lambda, 1.0);
    // Brute-force: fit on the first 160 rows, score the last 40.
    real best = std::numeric_limits<real>::infinity(), best_l = 0;
    for (real l : grid) {
        mat ref = oracle::ridge_normal_equations(x.topRows(160), y.topRows(160), l, true);
        mat pred = (x.bottomRows(40) * ref.topRows(5)).rowwise() + ref.row(5);
        real s = oracle::nrmse(flat(y.bottomRows(40)), flat(pred));
        if (s < best) {
            best = s;
            best_l = l;
        }
    }
    EXPECT_EQ(c.lambda, best_l);
    EXPECT_NEAR(c.validation_nrmse, best, 1e-8);
    EXPECT_THROW(select_ridge_lambda(x, y, {}), config_error);
    EXPECT_THROW(select_ridge_lambda(x, y, grid, 1.5), config_error);
}
