#include "hdlr/quad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "hdlr/dist.hpp"

namespace hdlr {

GaussianQuadrature::GaussianQuadrature(int order) {
    if (order < 1) throw std::invalid_argument("GaussianQuadrature: order must be >= 1");
    // Golub-Welsch: Hermite Jacobi matrix has zero diagonal and off-diagonal
    // beta_k = sqrt(k/2); eigenvalues are the physicists' nodes x_k and the
    // N(0,1) weights are the squared first eigenvector components.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd sub(order > 1 ? order - 1 : 0);
    for (int k = 1; k < order; ++k) sub[k - 1] = std::sqrt(0.5 * k);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("GaussianQuadrature: tridiagonal eigen-solve failed");
    }

    nodes_.resize(order);
    weights_.resize(order);
    for (int k = 0; k < order; ++k) {
        nodes_[k] = es.eigenvalues()[k] * std::sqrt(2.0);
        const double v0 = es.eigenvectors()(0, k);
        weights_[k] = v0 * v0;
    }
    // eigenvalues come out sorted; enforce exact symmetry about 0
    for (int k = 0, j = order - 1; k < j; ++k, --j) {
        const double z = 0.5 * (nodes_[j] - nodes_[k]);
        nodes_[k] = -z;
        nodes_[j] = z;
        const double w = 0.5 * (weights_[k] + weights_[j]);
        weights_[k] = w;
        weights_[j] = w;
    }
    if (order % 2 == 1) nodes_[order / 2] = 0.0;
}

namespace {

// 15-point Gauss-Legendre rule on [-1, 1] from the Legendre Jacobi matrix.
struct LegendreRule {
    std::array<double, 15> nodes;
    std::array<double, 15> weights;
    LegendreRule() {
        constexpr int n = 15;
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd sub(n - 1);
        for (int k = 1; k < n; ++k) sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        for (int k = 0; k < n; ++k) {
            nodes[k] = es.eigenvalues()[k];
            const double v0 = es.eigenvectors()(0, k);
            weights[k] = 2.0 * v0 * v0;
        }
    }
};

const LegendreRule& legendre15() {
    static const LegendreRule rule;
    return rule;
}

struct PanelCtx {
    const std::function<double(double)>* f;
    double tau;
};

double gl15(const PanelCtx& c, double a, double b) {
    const LegendreRule& rule = legendre15();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (int k = 0; k < 15; ++k) {
        const double z = mid + half * rule.nodes[k];
        acc += rule.weights[k] * (*c.f)(c.tau * z) * normal_pdf(z);
    }
    return acc * half;
}

// accept when the whole-panel rule agrees with its split; the geometric
// panelization below keeps integrands panel-smooth so this rarely recurses.
// The relative floor stops subdivision chasing evaluation noise of the
// integrand itself.
double panel_refine(const PanelCtx& c, double a, double b, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double left = gl15(c, a, m);
    const double right = gl15(c, m, b);
    const double err = std::fabs(left + right - whole);
    const double floor = 5e-13 * (std::fabs(left) + std::fabs(right));
    if (depth <= 0 || err <= std::max(tol, floor)) return left + right;
    return panel_refine(c, a, m, left, 0.5 * tol, depth - 1) +
           panel_refine(c, m, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

double expect_adaptive(const std::function<double(double)>& f, double tau,
                       const std::vector<double>& breakpoints_z, double rel_tol) {
    constexpr double kZMax = 38.0;  // normal_pdf underflows just beyond
    // panel edges: geometric ladders around every breakpoint, scaled by the
    // layer width ~ 1/tau, so exponential ramps are one octave per panel
    const double w = 1.0 / std::max(1.0, tau);
    std::vector<double> edges{-kZMax, kZMax};
    std::vector<double> centers{-kZMax, kZMax};
    for (double p : breakpoints_z) {
        if (p > -kZMax && p < kZMax) {
            edges.push_back(p);
            centers.push_back(p);
        }
    }
    for (double p : centers) {
        for (double off = w; off < 2.0 * kZMax; off *= 2.0) {
            if (p + off < kZMax) edges.push_back(p + off);
            if (p - off > -kZMax) edges.push_back(p - off);
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    const PanelCtx ctx{&f, tau};
    std::vector<double> rough(edges.size() - 1);
    double total_rough = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (edges[i + 1] - edges[i] < 1e-14) continue;
        rough[i] = gl15(ctx, edges[i], edges[i + 1]);
        total_rough += std::fabs(rough[i]);
    }

    double total = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (edges[i + 1] - edges[i] < 1e-14) continue;
        const double tol = rel_tol * std::max(std::fabs(rough[i]), 1e-3 * total_rough);
        total += panel_refine(ctx, edges[i], edges[i + 1], rough[i], tol, 20);
    }
    return total;
}

}  // namespace hdlr
