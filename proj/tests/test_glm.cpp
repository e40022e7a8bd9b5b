#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "hdlr/errors.hpp"
#include "hdlr/glm.hpp"
#include "hdlr/rng.hpp"
#include "hdlr/simulate.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using hdlr::Dataset;
using hdlr::EffectiveLink;

namespace {

Dataset gaussian_null(int n, int p, std::uint64_t seed) {
    hdlr::SimConfig cfg;
    cfg.n = n;
    cfg.p = p;
    cfg.master_seed = seed;
    return hdlr::make_design(cfg, 0);
}

hdlr::ScalingSolution identity_scaling() {
    hdlr::ScalingSolution s;
    s.kappa = 0.0;
    s.tau_star = 1.0;
    s.b_star = 1.0;
    s.alpha = 1.0;
    return s;
}

// 8x8 Hadamard matrix columns are orthogonal with +-1 entries
MatrixXd hadamard8() {
    MatrixXd h(1, 1);
    h(0, 0) = 1.0;
    for (int m = 1; m <= 8; m *= 2) {
        MatrixXd next(2 * h.rows(), 2 * h.cols());
        next << h, h, h, -h;
        h = next;
        if (h.rows() == 8) break;
    }
    return h;
}

}  // namespace

TEST_CASE("balanced intercept model has beta = 0") {
    Dataset ds;
    ds.X = MatrixXd::Ones(8, 1);
    ds.y_signed = VectorXd(8);
    ds.y_signed << 1, 1, 1, 1, -1, -1, -1, -1;
    const auto fit = hdlr::fit_mle(ds, hdlr::logistic_link());
    REQUIRE(fit.converged);
    CHECK(std::fabs(fit.beta[0]) < 1e-10);
}

TEST_CASE("intercept-only logistic fit equals the empirical logit") {
    Dataset ds;
    ds.X = MatrixXd::Ones(6, 1);
    ds.y_signed = VectorXd(6);
    ds.y_signed << 1, 1, 1, 1, -1, -1;
    const EffectiveLink link = hdlr::logistic_link();
    const auto fit = hdlr::fit_mle(ds, link);
    REQUIRE(fit.converged);
    CHECK(fit.beta[0] == doctest::Approx(std::log(2.0)).epsilon(1e-8));
    // grid-search oracle on the negative log-likelihood
    double best = 0.0, best_val = 1e300;
    for (double b = -3.0; b <= 3.0; b += 1e-4) {
        const double val = hdlr::negative_log_likelihood(ds, link, VectorXd::Constant(1, b));
        if (val < best_val) {
            best_val = val;
            best = b;
        }
    }
    CHECK(fit.beta[0] == doctest::Approx(best).epsilon(1e-3));
    // first-order condition at the fit
    CHECK(fit.grad_norm < 1e-8 * ds.n());
}

TEST_CASE("perfectly separated toy: fit reports separable, not converged") {
    Dataset ds;
    ds.X = MatrixXd(4, 1);
    ds.X << 1.0, 2.0, -1.0, -2.0;
    ds.y_signed = VectorXd(4);
    ds.y_signed << 1, 1, -1, -1;  // y = sign(x)
    const auto fit = hdlr::fit_mle(ds, hdlr::logistic_link());
    CHECK(fit.separable);
    CHECK_FALSE(fit.converged);
}

TEST_CASE("zero column makes the Hessian singular") {
    Dataset ds;
    ds.X = MatrixXd::Zero(6, 2);
    ds.X.col(0) << 1, -1, 2, -2, 1.5, -0.5;
    ds.y_signed = VectorXd(6);
    ds.y_signed << 1, 1, -1, 1, -1, -1;
    const auto fit = hdlr::fit_mle(ds, hdlr::logistic_link());
    CHECK_FALSE(fit.converged);
    CHECK(fit.diagnostic == "singular_hessian");
}

TEST_CASE("check_separable on two-point toys") {
    Dataset ds;
    ds.X = MatrixXd(2, 1);
    ds.X << 1.0, -1.0;
    ds.y_signed = VectorXd(2);
    ds.y_signed << 1, -1;
    CHECK(hdlr::check_separable(ds));
    ds.y_signed << 1, 1;
    CHECK_FALSE(hdlr::check_separable(ds));
}

TEST_CASE("separability rates in the two phase-transition regimes (smoke)") {
    int sep_high = 0, sep_low = 0;
    for (int t = 0; t < 20; ++t) {
        hdlr::SimConfig cfg;
        cfg.n = 200;
        cfg.p = 130;
        cfg.master_seed = 404;
        if (hdlr::check_separable(hdlr::make_design(cfg, t))) ++sep_high;
        cfg.p = 60;
        if (hdlr::check_separable(hdlr::make_design(cfg, t))) ++sep_low;
    }
    CHECK(sep_high >= 18);
    CHECK(sep_low <= 1);
}

TEST_CASE("bartlett alpha on equal-leverage designs") {
    const MatrixXd h8 = hadamard8();
    Dataset ds;
    ds.X = h8.leftCols(2);
    ds.y_signed = VectorXd::Ones(8);
    // constant leverages p/n, reduced (p-1)/n -> alpha_n = (2p - 1)/2
    CHECK(hdlr::bartlett_alpha(ds, 0) == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(hdlr::bartlett_alpha(ds, 1) == doctest::Approx(1.5).epsilon(1e-10));

    // direct hat-matrix oracle at n=8, p=2
    const MatrixXd hat = ds.X * (ds.X.transpose() * ds.X).inverse() * ds.X.transpose();
    MatrixXd xr = ds.X.col(1);
    const MatrixXd hat_r = xr * (xr.transpose() * xr).inverse() * xr.transpose();
    double tr_full = 0.0, tr_red = 0.0;
    for (int i = 0; i < 8; ++i) {
        tr_full += hat(i, i) * hat(i, i);
        tr_red += hat_r(i, i) * hat_r(i, i);
    }
    CHECK(hdlr::bartlett_alpha(ds, 0) == doctest::Approx(4.0 * (tr_full - tr_red)).epsilon(1e-10));
}

TEST_CASE("bartlett alpha for the ones column is 1/2") {
    Dataset ds;
    ds.X = MatrixXd::Ones(10, 1);
    ds.y_signed = VectorXd::Ones(10);
    CHECK(hdlr::bartlett_alpha(ds, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("duplicate column raises a singular Gram error") {
    Dataset ds = gaussian_null(20, 3, 99);
    ds.X.col(2) = ds.X.col(1);
    CHECK_THROWS_AS(hdlr::bartlett_alpha(ds, 1), hdlr::SingularMatrixError);
}

TEST_CASE("empirical alpha_tilde on an orthogonal design at beta = 0") {
    const MatrixXd h8 = hadamard8();
    Dataset ds;
    ds.X = h8.leftCols(4);  // X'X = 8 I
    ds.y_signed = VectorXd::Ones(8);
    hdlr::FitResult reduced;
    reduced.beta = VectorXd::Zero(4);
    reduced.converged = true;
    // alpha_tilde = (p-1)/(n rho''(0)) = 3/(8 * 1/4)
    CHECK(hdlr::empirical_alpha_tilde(ds, hdlr::logistic_link(), 0, reduced) ==
          doctest::Approx(1.5).epsilon(1e-10));
}

TEST_CASE("empirical alpha_tilde rejects an empty reduced model") {
    Dataset ds;
    ds.X = MatrixXd::Ones(5, 1);
    ds.y_signed = VectorXd::Ones(5);
    hdlr::FitResult reduced;
    reduced.beta = VectorXd::Zero(1);
    reduced.converged = true;
    CHECK_THROWS_AS(hdlr::empirical_alpha_tilde(ds, hdlr::logistic_link(), 0, reduced),
                    std::invalid_argument);
}

TEST_CASE("llr_all agrees with direct reduced refits") {
    const EffectiveLink link = hdlr::logistic_link();
    const Dataset ds = gaussian_null(60, 10, 2024);
    REQUIRE_FALSE(hdlr::check_separable(ds));
    const auto fit = hdlr::fit_mle(ds, link);
    REQUIRE(fit.converged);

    std::vector<int> coords;
    for (int j = 0; j < 10; ++j) coords.push_back(j);
    const auto recs = hdlr::llr_all(ds, link, fit, coords, identity_scaling(), 1);
    REQUIRE(recs.size() == 10);
    for (int j = 0; j < 10; ++j) {
        REQUIRE(recs[j].ok);
        CHECK(recs[j].lambda >= 0.0);
        // independent oracle: exact Newton on the physically reduced design
        Dataset red;
        red.X = MatrixXd(ds.n(), 9);
        red.X << ds.X.leftCols(j), ds.X.rightCols(9 - j);
        red.y_signed = ds.y_signed;
        const auto rfit = hdlr::fit_mle(red, link);
        REQUIRE(rfit.converged);
        const double lambda_oracle = rfit.negloglik - fit.negloglik;
        CHECK(recs[j].lambda == doctest::Approx(lambda_oracle).epsilon(1e-7).scale(1e-7));
        // identity scaling makes adjusted == classical
        CHECK(recs[j].p_adjusted == doctest::Approx(recs[j].p_classical).epsilon(1e-12));
    }

    // parallel kernel is bit-identical to the serial reference
    const auto recs_par = hdlr::llr_all(ds, link, fit, coords, identity_scaling(), 4);
    for (int j = 0; j < 10; ++j) {
        CHECK(recs_par[j].lambda == recs[j].lambda);
        CHECK(recs_par[j].p_bartlett == recs[j].p_bartlett);
    }
}

TEST_CASE("llr p-value of a zero statistic is one") {
    const EffectiveLink link = hdlr::logistic_link();
    // single predictor, balanced responses: beta_hat = 0, so dropping the
    // only coordinate changes nothing
    Dataset ds;
    ds.X = MatrixXd(8, 1);
    ds.X << 1, 1, 1, 1, 1, 1, 1, 1;
    ds.y_signed = VectorXd(8);
    ds.y_signed << 1, 1, 1, 1, -1, -1, -1, -1;
    const auto fit = hdlr::fit_mle(ds, link);
    REQUIRE(fit.converged);
    const auto recs = hdlr::llr_all(ds, link, fit, {0}, identity_scaling(), 1);
    REQUIRE(recs.size() == 1);
    REQUIRE(recs[0].ok);
    CHECK(recs[0].lambda == doctest::Approx(0.0).scale(1.0));
    CHECK(recs[0].p_classical == doctest::Approx(1.0));
    CHECK(recs[0].p_bartlett == doctest::Approx(1.0));
    CHECK(recs[0].p_adjusted == doctest::Approx(1.0));
}

TEST_CASE("llr_all requires a converged fit") {
    const Dataset ds = gaussian_null(30, 4, 5);
    hdlr::FitResult bogus;
    bogus.converged = false;
    bogus.beta = VectorXd::Zero(4);
    CHECK_THROWS_AS(hdlr::llr_all(ds, hdlr::logistic_link(), bogus, {0}, identity_scaling(), 1),
                    std::invalid_argument);
}

TEST_CASE("llr CSV emitter") {
    std::vector<hdlr::LlrRecord> recs(1);
    recs[0].j = 3;
    recs[0].lambda = 0.5;
    recs[0].p_classical = 0.3173105078629141;
    recs[0].p_bartlett = 0.33;
    recs[0].p_adjusted = 0.35;
    std::ostringstream os;
    hdlr::write_llr_csv(os, recs);
    CHECK(os.str() == "j,lambda,p_classical,p_bartlett,p_adjusted\n"
                      "3,0.5,0.3173105079,0.33,0.35\n");
}

TEST_CASE("probit fits converge too") {
    const Dataset ds = gaussian_null(80, 8, 12);
    const auto fit = hdlr::fit_mle(ds, hdlr::probit_link());
    REQUIRE(fit.converged);
    CHECK(fit.grad_norm < 1e-8 * ds.n());
}

TEST_CASE("dataset validation rejects NaN and size mismatch") {
    Dataset ds;
    ds.X = MatrixXd::Ones(3, 1);
    ds.y_signed = VectorXd::Ones(2);
    CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
    ds.y_signed = VectorXd::Ones(3);
    ds.X(1, 0) = std::nan("");
    CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
}

TEST_CASE("fit_mle requires n > p") {
    Dataset ds;
    ds.X = MatrixXd::Identity(3, 3);
    ds.y_signed = VectorXd::Ones(3);
    CHECK_THROWS_AS(hdlr::fit_mle(ds, hdlr::logistic_link()), std::invalid_argument);
}
