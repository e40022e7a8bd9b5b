#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hdlr/links.hpp"
#include "hdlr/scaling.hpp"

namespace hdlr {

// Design matrix plus signed responses ytilde in {-1, +1}.
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y_signed;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
    void validate() const;  // throws on NaN entries or size mismatch
};

struct FitOptions {
    double grad_tol_per_n = 1e-8;   // converged when ||grad||_inf < tol * n
    int max_iters = 200;
    double divergence_norm = 50.0;  // ||beta|| beyond which separability is suspected
    bool skip_separability_check = false;
};

struct FitResult {
    Eigen::VectorXd beta;       // p entries; pinned coordinate is 0 in reduced fits
    double negloglik = 0.0;
    bool converged = false;
    bool separable = false;
    int newton_iters = 0;
    double grad_norm = 0.0;     // ||grad||_inf at exit
    std::string diagnostic;
};

struct LlrRecord {
    int j = -1;
    double lambda = 0.0;
    double p_classical = 1.0;
    double p_bartlett = 1.0;
    double p_adjusted = 1.0;
    double bartlett_alpha_n = 0.0;
    bool ok = true;
    std::string error;
};

double negative_log_likelihood(const Dataset& data, const EffectiveLink& link,
                               const Eigen::VectorXd& beta);

// Full-model MLE by Newton with step-halving, started at beta = 0. The
// Hessian X' diag(rho'') X is solved by Cholesky; a non-PD Hessian is
// reported through `diagnostic`, never ridged. When ||beta|| passes the
// divergence guard the separability checker decides whether the MLE is at
// infinity.
FitResult fit_mle(const Dataset& data, const EffectiveLink& link, FitOptions opts = {});

// Reduced-model MLE with coordinate `fixed_coord` pinned at zero, warm
// started from `warm` (p entries; the pinned entry is ignored). Uses chord
// steps with the warm-start Hessian factor when one is supplied; the
// convergence test is always on the exact gradient.
FitResult fit_mle_reduced(const Dataset& data, const EffectiveLink& link, int fixed_coord,
                          const Eigen::VectorXd& warm, FitOptions opts = {},
                          const Eigen::MatrixXd* full_hessian_factor = nullptr);

// True iff some beta != 0 has ytilde_i x_i' beta > 0 for all i (the MLE is
// then at infinity). Decided by smoothed max-margin ascent with an exact
// margin certificate; ties at zero margin resolve to "not separable".
bool check_separable(const Dataset& data);

// Leverage machinery for the Bartlett correction: h = diag(X (X'X)^{-1} X')
// through a Cholesky factor of the Gram matrix, never forming the hat
// matrix. Column-j removal is a rank-one downdate of the leverages.
struct LeverageCache {
    Eigen::LLT<Eigen::MatrixXd> gram_llt;
    Eigen::VectorXd h;           // leverages of the full design
    double trace_h_sq = 0.0;     // sum h_i^2
};
LeverageCache make_leverage_cache(const Dataset& data);  // throws SingularMatrixError

// alpha_n = (n/2) [ Tr(D_p^2) - Tr(D_{p-1}^2) ], D = diagonal of the hat
// matrix with/without column j.
double bartlett_alpha(const Dataset& data, int j);
double bartlett_alpha(const Dataset& data, int j, const LeverageCache& cache);

// (1/n) Tr(G^{-1}) with G = (1/n) X~' diag(rho''(.)) X~ for the reduced
// model without column `dropped`; weights are evaluated at the reduced MLE.
double empirical_alpha_tilde(const Dataset& data, const EffectiveLink& link, int dropped,
                             const FitResult& reduced_fit);

// Per-coordinate LLR statistics and p-values. Reduced fits are warm-started
// at the full MLE and may run in parallel over coordinates (n_threads = 1
// forces the serial reference kernel). Failures are recorded per
// coordinate.
std::vector<LlrRecord> llr_all(const Dataset& data, const EffectiveLink& link,
                               const FitResult& fit, const std::vector<int>& coords,
                               const ScalingSolution& scaling, int n_threads = 0);

// CSV with header j,lambda,p_classical,p_bartlett,p_adjusted (10 significant digits).
void write_llr_csv(std::ostream& os, const std::vector<LlrRecord>& records);

}  // namespace hdlr
