#pragma once

#include <string>

namespace hdlr {

enum class Model { Logistic, Probit };

Model parse_model(const std::string& name);
const char* model_name(Model m);

// Effective link rho: the convex per-observation loss whose sum gives the
// negative log-likelihood of a symmetric binary regression model,
//   rho(t) = log(1 + e^t)   (logistic)
//   rho(t) = -log Phi(-t)   (probit).
//
// All evaluators are pure functions of (model, t) and overflow-free for
// |t| up to ~1e8. The probit first derivative is the inverse Mills ratio
// phi(t)/Phi(-t); for t > 8 it is evaluated through the Mills-ratio
// continued fraction since phi and Phi(-t) both underflow near t = 38.
class EffectiveLink {
  public:
    explicit EffectiveLink(Model m) : model_(m) {}

    Model model() const { return model_; }

    double rho(double t) const;
    double rho1(double t) const;   // rho'
    double rho2(double t) const;   // rho''
    double rho3(double t) const;   // rho'''

    // sup_t rho''(t): 1/4 for logistic, 1 for probit (approached as t -> inf).
    double rho2_sup() const { return model_ == Model::Logistic ? 0.25 : 1.0; }

    // Mean function mu(t) = P(y = 1 | linear predictor t); satisfies the
    // symmetry condition mu(t) + mu(-t) = 1.
    double mu(double t) const;

  private:
    Model model_;
};

inline EffectiveLink logistic_link() { return EffectiveLink(Model::Logistic); }
inline EffectiveLink probit_link() { return EffectiveLink(Model::Probit); }

}  // namespace hdlr
