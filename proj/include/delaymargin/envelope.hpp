#pragma once

#include <functional>

#include "delaymargin/matrix.hpp"

namespace delaymargin {

/// Certified decay envelope for a Hurwitz matrix M:
/// |exp(M t)| <= theta * exp(-lambda * t) for all t >= 0.
struct DecayEnvelope {
    double theta = 1.0;   // >= 1, dimensionless
    double lambda = 0.0;  // > 0, 1/time

    double bound(double t) const;
};

/// Solves A' P + P A = -Q for symmetric P via the Kronecker-vectorized
/// n^2 x n^2 linear system (dense LU).
Matrix lyapunov_solve(const Matrix& a, const Matrix& q);

/// Builds the envelope from a Lyapunov certificate: solve
/// (M + mu I)' P + P (M + mu I) = -I, rescale so the smallest eigenvalue of P
/// is exactly 1, and return theta = sqrt(|P|), lambda = mu.
/// Requires M Hurwitz and 0 < mu < -spectral_abscissa(M).
DecayEnvelope decay_envelope(const Matrix& m, double mu);

/// Samples |exp(M t)| on n_points over [0, 20/lambda] and checks the bound
/// with relative slack 1e-9.
bool certify_envelope(const Matrix& m, const DecayEnvelope& env,
                      std::size_t n_points = 200);

struct EnvelopeSearch {
    DecayEnvelope envelope;
    double mu = 0.0;
    double score = 0.0;
    bool objective_feasible = false;  // objective finite at the returned mu
};

/// Golden-section search over mu in (delta0, -alpha(M)(1-delta0)) maximizing
/// the caller-supplied objective. An objective may signal infeasibility by
/// returning NaN or -inf; the best scoring envelope found is returned either
/// way, flagged accordingly.
EnvelopeSearch optimize_envelope(
    const Matrix& m, const std::function<double(const DecayEnvelope&)>& objective);

}  // namespace delaymargin
