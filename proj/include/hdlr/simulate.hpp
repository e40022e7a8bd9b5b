#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hdlr/glm.hpp"
#include "hdlr/links.hpp"
#include "hdlr/scaling.hpp"

namespace hdlr {

enum class DesignKind { GaussianIID, BernoulliPM1, GaussianWithCovariance };

struct SimConfig {
    int n = 200;
    int p = 60;
    int trials = 400;
    DesignKind design = DesignKind::GaussianIID;
    Model model = Model::Logistic;
    int coords_first_k = -1;  // -1 = all coordinates
    std::uint64_t master_seed = 0;
    // Sigma^{1/2} factor for GaussianWithCovariance; rows of X are then
    // N(0, Sigma) with Sigma = F F'.
    std::optional<Eigen::MatrixXd> sigma_sqrt;
    int n_threads = 0;  // 0 = OpenMP default, 1 = serial reference kernel

    void validate() const;
};

// Builds Sigma^{1/2} from a covariance matrix; throws std::invalid_argument
// if Sigma is not positive definite.
Eigen::MatrixXd covariance_sqrt(const Eigen::MatrixXd& sigma);

// Deterministic function of (master_seed, trial_index): design matrix per
// cfg.design plus signed responses, ytilde_i = +-1 with probability 1/2.
Dataset make_design(const SimConfig& cfg, int trial_index);

struct TailEntry {
    double threshold = 0.0;
    double fraction = 0.0;
    double se = 0.0;  // sqrt(f(1-f)/N)
};

struct PooledRow {
    int trial = 0;
    int j = 0;
    double p_classical = 1.0;
    double p_bartlett = 1.0;
    double p_adjusted = 1.0;
};

struct SimulationReport {
    // pooled p-values in canonical (trial, coordinate) order
    std::vector<double> p_classical;
    std::vector<double> p_bartlett;
    std::vector<double> p_adjusted;
    std::vector<PooledRow> rows;
    std::map<std::string, std::vector<TailEntry>> tail_table;
    double gof_stat = 0.0;    // chi-square uniformity statistic of the adjusted pool
    double gof_pvalue = 1.0;
    int separable_trials = 0;
    int failed_trials = 0;
    // pooled sqrt(p) * beta_hat_j samples across trials and coordinates
    std::vector<double> sqrt_p_beta;
};

// Monte Carlo harness: per trial draw a design and null responses, skip and
// count separable trials, fit, compute LLR records over the requested
// coordinates, pool. Trials are independent units of work; outputs are
// bit-identical for any thread count.
SimulationReport run_simulation(const SimConfig& cfg, const ScalingSolution& scaling);

// Pearson chi-square over 20 equal-width bins against uniformity, p-value
// from chi^2_19. Throws std::invalid_argument on an empty list.
std::pair<double, double> gof_uniformity(const std::vector<double>& pvalues);

// (t, fraction of p-values <= t) over a sorted grid.
std::vector<std::pair<double, double>> empirical_cdf(const std::vector<double>& pvalues,
                                                     const std::vector<double>& grid);

const std::vector<double>& tail_thresholds();  // {.05,.01,.005,.001,.0005,.0001}

// JSON report with keys config, tail_table, gof, separable_trials,
// failed_trials. Non-finite values serialize as {"value": "...", "error": true}.
void write_report_json(std::ostream& os, const SimConfig& cfg, const SimulationReport& report);

// CSV of pooled p-values: trial,j,p_classical,p_bartlett,p_adjusted.
void write_pooled_csv(std::ostream& os, const SimulationReport& report);

}  // namespace hdlr
