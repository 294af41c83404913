#pragma once

// Shared helpers for the unit and acceptance suites.

#include <cmath>
#include <functional>
#include <random>

#include "delaymargin/expm.hpp"
#include "delaymargin/eigen.hpp"
#include "delaymargin/sim.hpp"

namespace delaymargin::testing {

inline Matrix random_matrix(std::mt19937& rng, std::size_t n, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Matrix m(n, n);
    for (auto& v : m.data()) v = u(rng);
    return m;
}

inline Matrix random_hurwitz(std::mt19937& rng, std::size_t n) {
    std::uniform_real_distribution<double> rate(0.3, 1.2);
    Matrix m = random_matrix(rng, n);
    const double shift = spectral_abscissa(m) + rate(rng);
    for (std::size_t i = 0; i < n; ++i) m(i, i) -= shift;
    return m;
}

// history whose nodes all come from the raw shape, with x0 chosen so the
// compatibility override is a no-op; keeps the history smooth for order tests
inline HistoryFunction matched_history(const PlantModel& model, double epsilon,
                                       double h,
                                       const std::function<double(double)>& shape1d) {
    ShapeFn shape = [&](double s) { return Vector{shape1d(s)}; };
    const auto cells = static_cast<std::size_t>(std::llround(model.r / h));
    const Matrix step = mat_exp(model.a, h);
    Matrix kernel = model.b;
    double integral = 0.0;
    for (std::size_t j = 0; j <= cells; ++j) {
        const double w = (j == 0 || j == cells) ? 0.5 * h : h;
        integral += w * kernel(0, 0) * shape1d(-static_cast<double>(j) * h);
        kernel = step * kernel;
    }
    const double k_ear = (model.k * mat_exp(model.a, model.r))(0, 0);
    const double x0 = (shape1d(0.0) - model.k(0, 0) * integral) / k_ear;
    return make_compatible_history(model, epsilon, Vector{x0}, shape, h);
}

// the supremum-norm functional of the stability estimate:
// s(t_i) = |x(t_i)| + max over [t_i - window, t_i] of |u|
inline std::vector<double> sup_norm_series(const SimTrace& trace) {
    std::vector<double> s(trace.times.size());
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        double umax = 0.0;
        for (std::size_t j = i; j <= i + trace.record_offset; ++j)
            umax = std::max(umax, euclidean_norm(trace.u_record[j]));
        s[i] = euclidean_norm(trace.x[i]) + umax;
    }
    return s;
}

}  // namespace delaymargin::testing
