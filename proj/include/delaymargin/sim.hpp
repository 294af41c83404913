#pragma once

#include <functional>
#include <string>
#include <vector>

#include "delaymargin/margin.hpp"
#include "delaymargin/matrix.hpp"
#include "delaymargin/signals.hpp"

namespace delaymargin {

using ShapeFn = std::function<Vector(double)>;

/// Control history on a uniform grid covering [-L, 0] with L >= r + epsilon,
/// piecewise linear between nodes. Node 0 satisfies the compatibility
/// condition u(0) = k exp(Ar) x0 + k int_{-r}^0 exp(-As) B u(s) ds.
struct HistoryFunction {
    double h = 0.0;                // grid step
    double length = 0.0;           // L; integer multiple of h
    std::vector<Vector> u;         // values at -L + j h, j = 0..G
    Vector x0;
    double compat_residual = 0.0;  // |u(0) - compat integral| after blending

    Vector value(double s) const;  // linear interpolation, clamped to [-L, 0]
};

/// Samples u_shape on the grid, then overrides the node at 0 with the
/// compatibility value (composite trapezoid) and blends linearly over the
/// final window of length min(4h, r/10). The override is iterated to a fixed
/// point so that the discrete compatibility residual is at roundoff level.
HistoryFunction make_compatible_history(const PlantModel& model, double epsilon,
                                        const Vector& x0, const ShapeFn& u_shape,
                                        double h);

/// Predictor feedback value u(t) = k exp(Ar) x(t) + k I(t), with the integral
/// I(t) = int_{t-r}^{t} exp(A(t-w)) B u(w) dw evaluated by composite trapezoid
/// on a grid of step dt (u read through the supplied callable).
Vector predictor_control(const PlantModel& model, const Vector& x_now,
                         const std::function<Vector(double)>& u_history,
                         double t, double dt);

/// Simulated trajectory on a uniform grid. u_record holds the control values
/// from -window (history included); u_record[record_offset + i] is u(times[i]).
struct SimTrace {
    double dt = 0.0;
    double window = 0.0;  // history span L = record_offset * dt
    std::vector<double> times;
    std::vector<Vector> x;
    std::vector<Vector> u;
    std::vector<Vector> p;  // predictor state
    std::vector<Vector> u_record;
    std::size_t record_offset = 0;
    bool diverged = false;
};

/// Closed-loop run of the plant under predictor feedback with a perturbed
/// input delay r + eps d(t). x advances by classical RK4 with the delayed
/// input read from the growing u-record; the new u node comes from the
/// predictor formula (4th-order Gregory quadrature, implicit endpoint);
/// p is recorded from its defining integral by composite trapezoid.
SimTrace simulate_closed_loop(const PlantModel& model, const DelaySignal& signal,
                              const HistoryFunction& history, double t_final,
                              double dt);

/// Same closed loop, but advancing the pair (x, u) with du/dt given by the
/// differentiated controller (distributed integral by trapezoid). Used as an
/// independent cross-check of simulate_closed_loop.
SimTrace simulate_derivative_form(const PlantModel& model, const DelaySignal& signal,
                                  const HistoryFunction& history, double t_final,
                                  double dt);

struct ComparisonTrace {
    double dt = 0.0;
    double window = 0.0;
    std::vector<double> times;
    std::vector<Vector> x;
    std::vector<Vector> x_record;
    std::size_t record_offset = 0;
    bool diverged = false;
};

/// Direct simulation of x' = Ahat x + q(t) C (x(t-r-eps d(t)) - x(t-r)).
ComparisonTrace simulate_comparison(const ComparisonSystem& sys, double epsilon,
                                    const DelaySignal& d_signal,
                                    const DelaySignal& q_signal,
                                    const ShapeFn& x_history, double t_final,
                                    double dt);

/// Reconstructs x(t) from the predictor state path:
/// x(t) = exp(-Ar) p(t) - int_{t-r}^{t} exp(A(t-r-w)) B k p(w) dw (trapezoid).
Vector recover_state(const PlantModel& model, const SimTrace& trace, double t);

struct DecayFit {
    double sigma_hat = 0.0;
    double q_hat = 1.0;
    bool estimate_holds = false;
    bool exact_zero = false;  // s identically zero over the fit window
};

/// Least-squares fit of log s(t) on [burn_in, t_final] where
/// s(t) = |x(t)| + max over [t - window, t] of |u|. q_hat is the smallest
/// constant for which s(t) <= q_hat e^{-sigma_hat t} s(0) over the whole
/// grid; estimate_holds requires a positive fitted rate and that envelope
/// check (with 1e-6 slack).
DecayFit fit_decay(const SimTrace& trace, double burn_in);

/// Same fit on the windowed sup of |x| for a comparison-system trace.
DecayFit fit_decay(const ComparisonTrace& trace, double burn_in);

/// CSV export: header t,x_1..x_n,u_1..u_m,p_1..p_n; 17 significant digits.
void write_trace_csv(const SimTrace& trace, const std::string& path);

}  // namespace delaymargin
