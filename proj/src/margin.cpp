#include "delaymargin/margin.hpp"

#include <cmath>

#include "delaymargin/eigen.hpp"
#include "delaymargin/expm.hpp"

namespace delaymargin {

namespace {
constexpr double kStrictMargin = 1e-12;   // strict '<' with a numerical guard
constexpr double kSigmaTol = 1e-10;       // absolute bisection tolerance on sigma
constexpr double kEpsilonRelTol = 1e-10;  // relative bisection tolerance on eps
}

PlantModel::PlantModel(Matrix a_, Matrix b_, Matrix k_, double r_)
    : a(std::move(a_)), b(std::move(b_)), k(std::move(k_)), r(r_) {
    if (!a.square()) throw DimensionError("PlantModel: A must be square");
    if (b.rows() != a.rows())
        throw DimensionError("PlantModel: B must have as many rows as A");
    if (k.rows() != b.cols() || k.cols() != a.rows())
        throw DimensionError("PlantModel: k must be m x n for B n x m");
    a.check_finite("PlantModel");
    b.check_finite("PlantModel");
    k.check_finite("PlantModel");
    if (!(r > 0.0)) throw ValidationError("PlantModel: nominal delay r must be > 0");
    const HurwitzResult hw = is_hurwitz(closed_loop());
    if (!hw.hurwitz)
        throw PreconditionError(
            "PlantModel: A + Bk is not Hurwitz (spectral abscissa " +
            std::to_string(hw.abscissa) + ")");
}

ComparisonSystem::ComparisonSystem(Matrix ahat_, Matrix c_, double r_,
                                   DecayEnvelope env, bool check_envelope)
    : ahat(std::move(ahat_)), c(std::move(c_)), r(r_), envelope(env) {
    if (!ahat.square() || !c.square() || ahat.rows() != c.rows())
        throw DimensionError("ComparisonSystem: Ahat and C must be square of equal size");
    if (!(r > 0.0)) throw ValidationError("ComparisonSystem: r must be > 0");
    if (!(envelope.lambda > 0.0) || envelope.theta < 1.0)
        throw ValidationError("ComparisonSystem: invalid decay envelope");
    if (!is_hurwitz(ahat).hurwitz)
        throw PreconditionError("ComparisonSystem: Ahat is not Hurwitz");
    if (check_envelope && !certify_envelope(ahat, envelope))
        throw PreconditionError("ComparisonSystem: envelope does not certify Ahat");
}

MarginReport small_gain_check(const ComparisonSystem& sys, double epsilon,
                              bool scalar_path) {
    if (epsilon < 0.0)
        throw ValidationError("small_gain_check: epsilon must be >= 0");
    if (epsilon > sys.r)
        throw PreconditionError("small_gain_check: epsilon must not exceed r");
    if (scalar_path && sys.ahat.rows() != 1)
        throw PreconditionError("small_gain_check: scalar path requires n = 1");

    MarginReport rep;
    rep.epsilon = epsilon;
    rep.scalar_path = scalar_path;
    const double c_norm = spectral_norm(sys.c);
    const double a_norm = spectral_norm(sys.ahat);
    if (scalar_path) {
        rep.lhs = 2.0 * c_norm * (1.0 - std::exp(-a_norm * epsilon));
        rep.rhs = a_norm;
        rep.theta = 1.0;
        rep.lambda = a_norm;
    } else {
        rep.lhs = sys.envelope.theta * c_norm *
                  (std::exp(a_norm * epsilon) - std::exp(-sys.envelope.lambda * epsilon));
        rep.rhs = sys.envelope.lambda;
        rep.theta = sys.envelope.theta;
        rep.lambda = sys.envelope.lambda;
    }
    rep.feasible = rep.lhs < rep.rhs - kStrictMargin * std::max(1.0, rep.rhs);
    return rep;
}

double contraction_delta(const ComparisonSystem& sys, double epsilon,
                         double sigma, bool scalar_path) {
    const double c_norm = spectral_norm(sys.c);
    const double a_norm = spectral_norm(sys.ahat);
    if (scalar_path) {
        const double gap = a_norm - sigma;
        return c_norm * std::exp(sigma * (sys.r + epsilon)) / gap *
               (2.0 - std::exp(-gap * epsilon) - std::exp(-a_norm * epsilon));
    }
    const double gap = sys.envelope.lambda - sigma;
    return std::exp(sigma * (sys.r + epsilon)) * sys.envelope.theta * c_norm / gap *
           (1.0 - std::exp(-gap * epsilon) + std::exp(a_norm * epsilon) - 1.0);
}

SigmaCertificate certify_sigma(const ComparisonSystem& sys, double epsilon,
                               bool scalar_path) {
    const MarginReport gate = small_gain_check(sys, epsilon, scalar_path);
    if (!gate.feasible)
        throw PreconditionError("certify_sigma: small-gain inequality infeasible at epsilon");

    const double lambda = scalar_path ? spectral_norm(sys.ahat) : sys.envelope.lambda;
    auto feasible_at = [&](double sigma) {
        return contraction_delta(sys, epsilon, sigma, scalar_path) < 1.0 - kStrictMargin;
    };

    double hi = lambda * (1.0 - 1e-9);
    if (feasible_at(hi)) {
        // all epsilon-dependent terms vanish; the whole interval qualifies
        return {hi, contraction_delta(sys, epsilon, hi, scalar_path)};
    }
    double lo = 0.0;
    while (hi - lo > kSigmaTol) {
        const double mid = 0.5 * (lo + hi);
        if (feasible_at(mid)) lo = mid; else hi = mid;
    }
    return {lo, contraction_delta(sys, epsilon, lo, scalar_path)};
}

namespace {

ComparisonSystem closed_loop_comparison(const PlantModel& model,
                                        const DecayEnvelope& env,
                                        bool check_envelope) {
    const Matrix c = mat_exp(model.a, model.r) * (model.b * model.k);
    return ComparisonSystem(model.closed_loop(), c, model.r, env, check_envelope);
}

DecayEnvelope scalar_identity_envelope(const Matrix& ahat) {
    // for n = 1, |exp(At)| = e^{-|A| t} exactly
    DecayEnvelope env;
    env.theta = 1.0;
    env.lambda = spectral_norm(ahat);
    return env;
}

}  // namespace

double max_epsilon_for_system(const ComparisonSystem& sys, bool scalar_path) {
    if (!small_gain_check(sys, 0.0, scalar_path).feasible)
        return 0.0;  // cannot happen: lhs = 0 at epsilon = 0
    if (small_gain_check(sys, sys.r, scalar_path).feasible) return sys.r;
    double lo = 0.0, hi = sys.r;
    while (hi - lo > kEpsilonRelTol * std::max(hi, 1e-30)) {
        const double mid = 0.5 * (lo + hi);
        if (small_gain_check(sys, mid, scalar_path).feasible) lo = mid; else hi = mid;
    }
    return lo;
}

MarginReport closed_loop_margin(const PlantModel& model, double epsilon,
                                std::optional<double> mu) {
    const bool scalar = model.state_dim() == 1;
    DecayEnvelope env;
    if (scalar) {
        env = scalar_identity_envelope(model.closed_loop());
    } else if (mu.has_value()) {
        env = decay_envelope(model.closed_loop(), *mu);
    } else {
        const Matrix cl = model.closed_loop();
        const Matrix c = mat_exp(model.a, model.r) * (model.b * model.k);
        auto objective = [&](const DecayEnvelope& cand) {
            ComparisonSystem sys(cl, c, model.r, cand, false);
            return max_epsilon_for_system(sys, false);
        };
        env = optimize_envelope(cl, objective).envelope;
    }
    ComparisonSystem sys = closed_loop_comparison(model, env, !scalar);
    MarginReport rep = small_gain_check(sys, epsilon, scalar);
    if (rep.feasible) {
        const SigmaCertificate cert = certify_sigma(sys, epsilon, scalar);
        rep.sigma = cert.sigma;
        rep.delta = cert.delta;
    }
    return rep;
}

MarginReport max_epsilon(const PlantModel& model) {
    const bool scalar = model.state_dim() == 1;
    DecayEnvelope env;
    if (scalar) {
        env = scalar_identity_envelope(model.closed_loop());
    } else {
        const Matrix cl = model.closed_loop();
        const Matrix c = mat_exp(model.a, model.r) * (model.b * model.k);
        auto objective = [&](const DecayEnvelope& cand) {
            ComparisonSystem sys(cl, c, model.r, cand, false);
            return max_epsilon_for_system(sys, false);
        };
        env = optimize_envelope(cl, objective).envelope;
    }
    ComparisonSystem sys = closed_loop_comparison(model, env, !scalar);
    const double emax = max_epsilon_for_system(sys, scalar);

    MarginReport rep = small_gain_check(
        sys, std::min(emax, sys.r) * (1.0 - 1e-12), scalar);
    rep.epsilon_max = emax;
    rep.capped_at_r = small_gain_check(sys, sys.r, scalar).feasible;
    return rep;
}

double scalar_bound(double p) {
    if (!(p > 1.0))
        throw DomainError("scalar_bound: requires p > 1 (closed loop not Hurwitz)");
    const double e = std::exp(1.0);
    return std::log(2.0 * p * e / (2.0 * p * e - p + 1.0)) / (p - 1.0);
}

PlantModel example_plant(double p) {
    if (!(p > 1.0)) throw DomainError("example_plant: requires p > 1");
    return PlantModel(Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{-p}}, 1.0);
}

}  // namespace delaymargin
