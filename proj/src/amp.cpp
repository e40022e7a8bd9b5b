#include "hdlr/amp.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "hdlr/prox.hpp"
#include "hdlr/rng.hpp"

namespace hdlr {

using Eigen::VectorXd;

namespace {

// Psi applied entrywise; computed as b rho'(prox) so that the stationarity
// identity (p/b*)(beta^t - beta^{t-1}) = -X' rho'(prox(eta^{t-1})) holds to
// rounding at every step.
VectorXd psi_vec(const EffectiveLink& link, double b, const VectorXd& z) {
    VectorXd out(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = prox_eval(link, b, z[i]).psi;
    return out;
}

}  // namespace

AmpTrace amp_run(const Eigen::MatrixXd& X, const EffectiveLink& link,
                 const ScalingSolution& scaling, int iters, std::uint64_t seed) {
    if (iters < 0) throw std::invalid_argument("amp_run: iters must be nonnegative");
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();

    AmpTrace trace;
    trace.b_star = scaling.b_star;

    Rng rng(seed);
    VectorXd beta(p);
    for (Eigen::Index k = 0; k < p; ++k) beta[k] = rng.next_normal();
    beta *= scaling.tau_star / beta.norm();

    VectorXd eta = VectorXd::Zero(n);       // eta^{t-1}; starts as eta^{-1} = 0
    VectorXd eta_prev = eta;
    VectorXd beta_prev = beta;
    double b_prev = 0.0;                    // b_{t-1}; starts as b_{-1} = 0

    trace.norm_sq.emplace_back(0, beta.squaredNorm());
    for (int t = 0; t < iters; ++t) {
        VectorXd eta_t = X * beta + psi_vec(link, b_prev, eta);
        eta_prev = eta;
        eta = eta_t;
        b_prev = scaling.b_star;

        beta_prev = beta;
        beta -= (X.transpose() * psi_vec(link, scaling.b_star, eta)) / static_cast<double>(p);
        trace.norm_sq.emplace_back(t + 1, beta.squaredNorm());
    }
    if (iters > 0) {
        // one trailing eta update so the stored pair (eta_prev, eta) frames
        // the final beta: X beta + eta_prev - eta = prox(eta_prev)
        VectorXd eta_t = X * beta + psi_vec(link, b_prev, eta);
        eta_prev = eta;
        eta = eta_t;
    }

    trace.beta = beta;
    trace.beta_prev = beta_prev;
    trace.eta = eta;
    trace.eta_prev = eta_prev;
    return trace;
}

void write_amp_csv(std::ostream& os, const AmpTrace& trace) {
    os << "t,beta_norm_sq\n";
    char buf[80];
    for (const auto& [t, v] : trace.norm_sq) {
        std::snprintf(buf, sizeof(buf), "%d,%.12g\n", t, v);
        os << buf;
    }
}

}  // namespace hdlr
