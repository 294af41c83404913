#pragma once

#include <complex>
#include <string>
#include <vector>

#include "delaymargin/margin.hpp"

namespace delaymargin {

/// Which reduced system the characteristic determinant comes from:
/// ReducedX pairs the delayed factor as Bk exp(Ar), ReducedP as exp(Ar) Bk.
enum class CharForm { ReducedX, ReducedP };

/// Characteristic quasipolynomial of the scalar example plant with gain p,
/// constant actual delay tau and nominal delay 1:
/// chi(s) = s + (p-1) + p e^{1-tau s} - p e^{1-s}.
std::complex<double> char_eval_scalar(double p, double tau, std::complex<double> s);

/// det(sI - (A+Bk) + N (e^{-rs} - e^{-tau s})) with N = Bk exp(Ar) or
/// exp(Ar) Bk depending on the form. At tau = r both collapse to
/// det(sI - (A+Bk)) exactly.
std::complex<double> char_eval_matrix(const PlantModel& model, double tau,
                                      std::complex<double> s, CharForm form);

struct CrossingPoint {
    double omega = 0.0;
    double tau = 0.0;
};

/// Constant-delay stability window around the nominal delay 1 for the scalar
/// example plant.
struct StabilityWindow {
    double p = 0.0;
    double tau_min = 0.0;
    double tau_max = 0.0;
    bool open_below = false;  // no boundary found below 1 within tau_cap
    bool open_above = false;
    std::vector<CrossingPoint> boundary;  // the pairs achieving tau_min/tau_max
    std::vector<double> omega_roots;      // imaginary-axis frequencies found
};

/// Crossing-curve procedure: find all omega in (0, 2pe) where an
/// imaginary-axis root is possible (sign-change scan on a 2e4 grid plus
/// bisection to 1e-12), resolve the phase by atan2, enumerate
/// tau = (phi + 2k pi)/omega up to tau_cap, and pick the window around 1.
StabilityWindow crossing_curve(double p, double tau_cap = 10.0);

struct RootEstimate {
    std::complex<double> root;          // after Newton refinement if it converged
    std::complex<double> collocation;   // raw spectral estimate
    double residual = 0.0;              // |chi(root)|
    bool refined = false;
};

/// Rightmost characteristic root of x' = (A+Bk) x + Bk e^{Ar}(x(t-tau)-x(t-r))
/// by Chebyshev collocation on [-max(tau,r), 0] with `nodes` intervals,
/// Newton-refined against the characteristic function.
RootEstimate rightmost_root(const PlantModel& model, double tau, std::size_t nodes,
                            CharForm form = CharForm::ReducedX);

/// Scalar-example convenience wrapper (gain p, r = 1).
RootEstimate rightmost_root_scalar(double p, double tau, std::size_t nodes);

struct Figure1Row {
    double p = 0.0;
    double red_tau_min = 0.0;   // measurable-perturbation band 1 -+ eps
    double red_tau_max = 0.0;
    double blue_tau_min = 0.0;  // constant-delay window
    double blue_tau_max = 0.0;
};

/// One row per gain: the measurable band from the closed-form bound and the
/// constant-delay window from the crossing curves. jobs > 1 computes rows
/// concurrently; the output order always follows p_grid.
std::vector<Figure1Row> figure1_sweep(const std::vector<double>& p_grid,
                                      unsigned jobs = 1);

/// CSV: p,red_tau_min,red_tau_max,blue_tau_min,blue_tau_max
void write_figure1_csv(const std::vector<Figure1Row>& rows, const std::string& path);

}  // namespace delaymargin
