#include "delaymargin/envelope.hpp"

#include <cmath>
#include <limits>

#include "delaymargin/eigen.hpp"
#include "delaymargin/expm.hpp"

namespace delaymargin {

namespace {
constexpr double kDelta0 = 1e-6;  // keeps mu strictly inside (0, -alpha(M))
}

double DecayEnvelope::bound(double t) const {
    return theta * std::exp(-lambda * t);
}

Matrix lyapunov_solve(const Matrix& a, const Matrix& q) {
    if (!a.square() || !q.square() || a.rows() != q.rows())
        throw DimensionError("lyapunov_solve: A and Q must be square of equal size");
    const std::size_t n = a.rows();
    const Matrix at = a.transpose();
    // (I (x) A' + A' (x) I) vec(P) = vec(-Q), vec stacking columns
    Matrix k(n * n, n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l) {
                k(j * n + i, j * n + l) += at(i, l);  // I (x) A'
                k(j * n + i, l * n + i) += at(j, l);  // A' (x) I
            }
    Vector rhs(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) rhs[j * n + i] = -q(i, j);
    Vector vec = solve(k, rhs);
    Matrix p(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) p(i, j) = vec[j * n + i];
    // symmetrize against roundoff
    p = (p + p.transpose()) * 0.5;
    return p;
}

DecayEnvelope decay_envelope(const Matrix& m, double mu) {
    if (!m.square()) throw DimensionError("decay_envelope: matrix must be square");
    const HurwitzResult hw = is_hurwitz(m);
    if (!hw.hurwitz)
        throw PreconditionError("decay_envelope: matrix is not Hurwitz");
    if (!(mu > 0.0) || !(mu < -hw.abscissa))
        throw InfeasibleError("decay_envelope: mu must lie in (0, -alpha(M))");

    Matrix shifted = m;
    for (std::size_t i = 0; i < m.rows(); ++i) shifted(i, i) += mu;
    const Matrix p = lyapunov_solve(shifted, Matrix::identity(m.rows()));
    const std::vector<double> eig = symmetric_eigenvalues(p);
    const double pmin = eig.front();
    const double pmax = eig.back();
    if (!(pmin > 0.0))
        throw NumericalError("decay_envelope: Lyapunov solution not positive definite");

    DecayEnvelope env;
    env.lambda = mu;
    env.theta = std::max(1.0, std::sqrt(pmax / pmin));  // P rescaled to lambda_min = 1
    return env;
}

bool certify_envelope(const Matrix& m, const DecayEnvelope& env, std::size_t n_points) {
    if (n_points < 2) n_points = 2;
    const double t_max = 20.0 / env.lambda;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double t = t_max * static_cast<double>(i) / (n_points - 1);
        if (spectral_norm(mat_exp(m, t)) > env.bound(t) * (1.0 + 1e-9)) return false;
    }
    return true;
}

EnvelopeSearch optimize_envelope(
    const Matrix& m, const std::function<double(const DecayEnvelope&)>& objective) {
    const HurwitzResult hw = is_hurwitz(m);
    if (!hw.hurwitz)
        throw PreconditionError("optimize_envelope: matrix is not Hurwitz");

    double lo = kDelta0;
    double hi = -hw.abscissa * (1.0 - kDelta0);
    if (hi <= lo) hi = -hw.abscissa * 0.5;

    EnvelopeSearch best;
    best.score = -std::numeric_limits<double>::infinity();
    // probes near the spectral edge may fail (the shifted Lyapunov system
    // turns singular); such mu count as infeasible rather than aborting
    auto evaluate = [&](double mu) {
        DecayEnvelope env;
        double score = -std::numeric_limits<double>::infinity();
        bool feasible = false;
        try {
            env = decay_envelope(m, mu);
            score = objective(env);
            feasible = std::isfinite(score);
            if (!feasible) score = -std::numeric_limits<double>::infinity();
        } catch (const Error&) {
            return score;
        }
        if (score > best.score || best.mu == 0.0) {
            best = {env, mu, score, feasible};
        }
        return score;
    };

    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = evaluate(c);
    double fd = evaluate(d);
    for (int iter = 0; iter < 200 && (b - a) > 1e-9 * (hi - lo); ++iter) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - invphi * (b - a);
            fc = evaluate(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + invphi * (b - a);
            fd = evaluate(d);
        }
    }
    // endpoints are never probed by the golden section itself
    evaluate(lo);
    evaluate(hi);
    return best;
}

}  // namespace delaymargin
