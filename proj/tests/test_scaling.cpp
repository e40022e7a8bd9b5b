#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hdlr/dist.hpp"
#include "hdlr/errors.hpp"
#include "hdlr/prox.hpp"
#include "hdlr/rng.hpp"
#include "hdlr/scaling.hpp"

using hdlr::EffectiveLink;
using hdlr::ScalingSolver;

namespace {

const ScalingSolver& logistic_solver() {
    static const ScalingSolver solver{hdlr::logistic_link()};
    return solver;
}

const ScalingSolver& probit_solver() {
    static const ScalingSolver solver{hdlr::probit_link()};
    return solver;
}

}  // namespace

TEST_CASE("G(b) vanishes as b -> 0, so tiny kappa maps to tiny b") {
    CHECK(logistic_solver().expect_psi_prime(1.0, 1e-8) < 1e-4);
    const double b = logistic_solver().solve_b(1e-5, 1.0);
    CHECK(b < 1e-3);
}

TEST_CASE("solve_b reproduces a frozen reference at kappa=0.3, tau=1") {
    CHECK(logistic_solver().solve_b(0.3, 1.0) ==
          doctest::Approx(2.12593326973887).epsilon(1e-8));
}

TEST_CASE("G(b) is strictly increasing in b") {
    hdlr::Rng rng(31ULL);
    for (int i = 0; i < 50; ++i) {
        const double tau = 0.2 + 5.0 * rng.next_uniform();
        const double b1 = 0.05 + 5.0 * rng.next_uniform();
        const double b2 = b1 * (1.2 + rng.next_uniform());
        CHECK(logistic_solver().expect_psi_prime(tau, b1) <
              logistic_solver().expect_psi_prime(tau, b2));
    }
}

TEST_CASE("probit large-tau limit: b(tau) -> 2 kappa / (1 - 2 kappa)") {
    const double b = probit_solver().solve_b(0.3, 1000.0);
    CHECK(std::fabs(b / 1.5 - 1.0) < 0.02);
}

TEST_CASE("logistic large-tau limit: b(tau)/tau -> quantile of kappa + 1/2") {
    const double b = logistic_solver().solve_b(0.3, 1000.0);
    const double x = hdlr::normal_quantile(0.8);
    CHECK(std::fabs(b / 1000.0 / x - 1.0) < 0.02);
}

TEST_CASE("variance map at zero is positive and self-consistent") {
    const double kappa = 0.3;
    const double v0 = logistic_solver().variance_map(kappa, 0.0);
    CHECK(v0 > 0.0);
    // b(0) = kappa / (rho''(c) (1 - kappa)) with c = prox_{b(0) rho}(0),
    // and V(0) = b(0)^2 rho'(c)^2 / kappa
    const EffectiveLink link = hdlr::logistic_link();
    const double b0 = logistic_solver().solve_b(kappa, 0.0);
    const double c = hdlr::prox(link, b0, 0.0);
    CHECK(b0 == doctest::Approx(kappa / (link.rho2(c) * (1.0 - kappa))).epsilon(1e-7));
    const double psi0 = b0 * link.rho1(c);
    CHECK(v0 == doctest::Approx(psi0 * psi0 / kappa).epsilon(1e-8));
}

TEST_CASE("probit large-tau variance ratio approaches 2 kappa") {
    const double v = probit_solver().variance_map(0.3, 1e6);
    CHECK(std::fabs(v / 1e6 / 0.6 - 1.0) < 0.02);
}

TEST_CASE("logistic large-tau variance ratio matches the truncated-moment formula") {
    const double kappa = 0.3;
    const double x = hdlr::normal_quantile(kappa + 0.5);
    const double num = x * x * (1.0 - hdlr::normal_cdf(x)) +
                       (hdlr::normal_cdf(x) - 0.5 - x * hdlr::normal_pdf(x));
    const double target = num / (hdlr::normal_cdf(x) - 0.5);
    const double v = logistic_solver().variance_map(kappa, 1e6);
    CHECK(std::fabs(v / 1e6 / target - 1.0) < 0.02);
}

TEST_CASE("solve_system at kappa=0.3: alpha near 1.5, residuals tiny") {
    const auto sol = logistic_solver().solve_system(0.3);
    CHECK(sol.alpha == doctest::Approx(1.5).epsilon(0.07));
    CHECK(sol.alpha == doctest::Approx(1.515477).epsilon(1e-4));
    CHECK(sol.alpha > 1.0);
    CHECK(std::fabs(sol.residuals[0]) <
          1e-8 * std::max(1.0, sol.tau_star * sol.tau_star));
    CHECK(std::fabs(sol.residuals[1]) < 1e-8);

    // re-evaluating both residuals at doubled quadrature order keeps them small
    hdlr::ScalingOptions opts;
    opts.gh_order = 400;
    const ScalingSolver fine(hdlr::logistic_link(), opts);
    const double r_tau = sol.tau_star * sol.tau_star -
                         fine.expect_psi_sq(sol.tau_star, sol.b_star) / sol.kappa;
    const double r_b = sol.kappa - fine.expect_psi_prime(sol.tau_star, sol.b_star);
    CHECK(std::fabs(r_tau) < 1e-6);
    CHECK(std::fabs(r_b) < 1e-6);
}

TEST_CASE("small kappa recovers the classical logistic variance") {
    const auto sol = logistic_solver().solve_system(0.01);
    const double ratio = sol.tau_star * sol.tau_star / (4.0 * 0.01);
    CHECK(ratio >= 0.98);
    CHECK(ratio <= 1.10);
}

TEST_CASE("probit alpha at kappa=0.3 sits within 5% of logistic") {
    const auto lg = logistic_solver().solve_system(0.3);
    const auto pb = probit_solver().solve_system(0.3);
    CHECK(std::fabs(pb.alpha - lg.alpha) / lg.alpha < 0.05);
    CHECK(pb.alpha == doctest::Approx(1.512245).epsilon(1e-4));
}

TEST_CASE("kappa domain validation") {
    CHECK_THROWS_AS(logistic_solver().solve_system(0.6), hdlr::KappaOutOfRangeError);
    CHECK_THROWS_AS(logistic_solver().solve_system(0.0), hdlr::KappaOutOfRangeError);
    CHECK_THROWS_AS(logistic_solver().solve_system(0.4999), hdlr::KappaOutOfRangeError);
}

TEST_CASE("state evolution started at tau*^2 stays constant") {
    const auto sol = logistic_solver().solve_system(0.3);
    const double ts = sol.tau_star * sol.tau_star;
    const auto trace = logistic_solver().state_evolution(0.3, ts, 8);
    REQUIRE(trace.tau_sq.size() == 9);
    REQUIRE(trace.b.size() == 8);
    for (double t : trace.tau_sq) CHECK(std::fabs(t - ts) < 1e-6);
    for (double b : trace.b) CHECK(std::fabs(b - sol.b_star) < 1e-6);
}

TEST_CASE("state evolution from the classical start reaches the fixed point") {
    const auto sol = logistic_solver().solve_system(0.3);
    const double ts = sol.tau_star * sol.tau_star;
    const auto trace = logistic_solver().state_evolution(0.3, 4.0 * 0.3, 90);
    CHECK(std::fabs(trace.tau_sq.back() - ts) < 1e-6);
}

TEST_CASE("zero steps yields only the initial point") {
    const auto trace = logistic_solver().state_evolution(0.3, 1.23, 0);
    REQUIRE(trace.tau_sq.size() == 1);
    CHECK(trace.tau_sq[0] == doctest::Approx(1.23));
    CHECK(trace.b.empty());
}

TEST_CASE("fixed point is reached from distant starts (uniqueness probe)") {
    const auto sol = logistic_solver().solve_system(0.3);
    const double ts = sol.tau_star * sol.tau_star;
    const auto lo = logistic_solver().state_evolution(0.3, 0.1 * ts, 120);
    const auto hi = logistic_solver().state_evolution(0.3, 10.0 * ts, 120);
    CHECK(std::fabs(lo.tau_sq.back() - ts) < 1e-6);
    CHECK(std::fabs(hi.tau_sq.back() - ts) < 1e-6);
}

TEST_CASE("alpha curve is strictly increasing with alpha > 1 on the grid") {
    std::vector<double> grid;
    for (int i = 0; i < 9; ++i) grid.push_back(0.05 + 0.05 * i);
    const auto points = logistic_solver().alpha_curve(grid, 0);
    REQUIRE(points.size() == 9);
    double prev = 1.0;
    for (const auto& pt : points) {
        REQUIRE(pt.ok);
        CHECK(pt.alpha > 1.0);
        CHECK(pt.alpha > prev);
        prev = pt.alpha;
    }

    // n_threads = 1 serial reference matches the parallel kernel bitwise
    const auto serial = logistic_solver().alpha_curve(grid, 1);
    for (std::size_t i = 0; i < points.size(); ++i) {
        CHECK(points[i].alpha == serial[i].alpha);
        CHECK(points[i].tau_star == serial[i].tau_star);
        CHECK(points[i].b_star == serial[i].b_star);
    }
}

TEST_CASE("alpha curve records per-point errors without aborting") {
    const auto points = logistic_solver().alpha_curve({0.3, 0.7}, 1);
    REQUIRE(points.size() == 2);
    CHECK(points[0].ok);
    CHECK_FALSE(points[1].ok);
    CHECK(!points[1].error.empty());
}

TEST_CASE("curve CSV emitter") {
    const auto points = logistic_solver().alpha_curve({0.3}, 1);
    std::ostringstream os;
    hdlr::write_curve_csv(os, points);
    const std::string text = os.str();
    CHECK(text.rfind("kappa,tau_star,b_star,alpha\n", 0) == 0);
    CHECK(text.find("0.3,") != std::string::npos);
}

TEST_CASE("a single-point curve reduces to solve_system") {
    const auto sol = logistic_solver().solve_system(0.3);
    const auto points = logistic_solver().alpha_curve({0.3}, 1);
    REQUIRE(points.size() == 1);
    CHECK(points[0].alpha == doctest::Approx(sol.alpha).epsilon(1e-12));
}
