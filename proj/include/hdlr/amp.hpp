#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hdlr/links.hpp"
#include "hdlr/scaling.hpp"

namespace hdlr {

// Trajectory of the message-passing iteration
//   eta^t      = X beta^t + Psi(eta^{t-1}; b_{t-1})
//   beta^{t+1} = beta^t - (1/p) X' Psi(eta^t; b*)
// run with the constant sequence b_t = b* (the state-evolution sequence is
// constant when started at tau*), beta^0 a seeded random direction scaled
// to ||beta^0||^2 = tau*^2, eta^{-1} = 0 and b_{-1} = 0. The iterates
// approach the minimizer of sum_i rho(x_i' beta), i.e. the MLE for
// responses all of one sign.
struct AmpTrace {
    std::vector<std::pair<int, double>> norm_sq;  // (t, ||beta^t||^2)
    Eigen::VectorXd beta;                         // final iterate
    Eigen::VectorXd beta_prev;
    Eigen::VectorXd eta;                          // final eta
    Eigen::VectorXd eta_prev;
    double b_star = 0.0;
};

AmpTrace amp_run(const Eigen::MatrixXd& X, const EffectiveLink& link,
                 const ScalingSolution& scaling, int iters, std::uint64_t seed);

// CSV with header t,beta_norm_sq.
void write_amp_csv(std::ostream& os, const AmpTrace& trace);

}  // namespace hdlr
