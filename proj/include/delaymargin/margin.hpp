#pragma once

#include <limits>
#include <optional>

#include "delaymargin/envelope.hpp"
#include "delaymargin/matrix.hpp"

namespace delaymargin {

/// Plant x' = A x + B u(t - delay) with stabilizing predictor gain k and
/// nominal delay r. A + B k must be Hurwitz; validated on construction.
struct PlantModel {
    Matrix a;      // n x n
    Matrix b;      // n x m
    Matrix k;      // m x n
    double r = 0;  // nominal delay, > 0

    PlantModel(Matrix a_, Matrix b_, Matrix k_, double r_);

    std::size_t state_dim() const { return a.rows(); }
    std::size_t input_dim() const { return b.cols(); }
    Matrix closed_loop() const { return a + b * k; }
};

/// Comparison dynamics x' = Ahat x + q(t) C (x(t-r-eps d(t)) - x(t-r)),
/// with a decay envelope certifying Ahat.
struct ComparisonSystem {
    Matrix ahat;
    Matrix c;
    double r = 0;
    DecayEnvelope envelope;

    ComparisonSystem(Matrix ahat_, Matrix c_, double r_, DecayEnvelope env,
                     bool check_envelope = true);
};

/// Evaluated small-gain inequality together with the certified rate.
struct MarginReport {
    double epsilon = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool feasible = false;
    double epsilon_max = std::numeric_limits<double>::quiet_NaN();
    double sigma = std::numeric_limits<double>::quiet_NaN();
    double delta = std::numeric_limits<double>::quiet_NaN();
    bool scalar_path = false;
    double theta = 1.0;   // envelope used by the check
    double lambda = 0.0;
    bool capped_at_r = false;  // feasible all the way up to epsilon = r
};

struct SigmaCertificate {
    double sigma = 0.0;
    double delta = 0.0;
};

/// Small-gain feasibility at a given perturbation magnitude. General path:
/// lhs = theta |C| (e^{|Ahat| eps} - e^{-lambda eps}) < lambda = rhs.
/// Scalar path (n = 1): lhs = 2 |C| (1 - e^{-|Ahat| eps}) < |Ahat| = rhs.
MarginReport small_gain_check(const ComparisonSystem& sys, double epsilon,
                              bool scalar_path = false);

/// Margin of the closed loop: Ahat = A + Bk, C = exp(A r) B k. Uses the
/// sharper scalar inequality when the state dimension is 1; otherwise the
/// envelope comes from decay_envelope at mu, or from optimize_envelope
/// (objective = certified epsilon_max) when mu is absent. Fills sigma/delta
/// when feasible.
MarginReport closed_loop_margin(const PlantModel& model, double epsilon,
                                std::optional<double> mu = std::nullopt);

/// Supremum of certified perturbation magnitudes, by bisection over
/// [0, r] to relative tolerance 1e-10 (capped and flagged at r).
MarginReport max_epsilon(const PlantModel& model);

/// Bisected epsilon_max for one fixed comparison system.
double max_epsilon_for_system(const ComparisonSystem& sys, bool scalar_path);

/// Closed-form bound for the scalar example plant (A=B=r=1, k=-p):
/// (1/(p-1)) ln(2pe / (2pe - p + 1)). Requires p > 1.
double scalar_bound(double p);

/// Largest sigma in (0, lambda) whose contraction gain delta stays below 1,
/// bisected to absolute tolerance 1e-10. Requires feasibility at epsilon.
SigmaCertificate certify_sigma(const ComparisonSystem& sys, double epsilon,
                               bool scalar_path = false);

/// Contraction gain at a candidate rate sigma (the quantity that must stay
/// below 1).
double contraction_delta(const ComparisonSystem& sys, double epsilon,
                         double sigma, bool scalar_path);

/// The Example plant x' = x + u(t - 1 - eps d), u = -p(...); gain p > 1.
PlantModel example_plant(double p);

}  // namespace delaymargin
