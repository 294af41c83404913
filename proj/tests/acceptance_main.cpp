// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion states its tolerance inline.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "delaymargin/constant_delay.hpp"
#include "delaymargin/eigen.hpp"
#include "delaymargin/expm.hpp"
#include "delaymargin/margin.hpp"
#include "delaymargin/sim.hpp"
#include "support.hpp"

using namespace delaymargin;
using delaymargin::testing::matched_history;
using delaymargin::testing::random_hurwitz;
using delaymargin::testing::sup_norm_series;

namespace {

int failures = 0;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void report(int index, const char* name, bool ok, const std::string& detail,
            double elapsed) {
    std::printf("%s  %2d. %-28s %s (%.2f s)\n", ok ? "PASS" : "FAIL", index, name,
                detail.c_str(), elapsed);
    if (!ok) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

double max_gap_u_vs_kp(const PlantModel& model, const SimTrace& trace) {
    double gap = 0.0;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const Vector kp = model.k * trace.p[i];
        for (std::size_t q = 0; q < kp.size(); ++q)
            gap = std::max(gap, std::abs(trace.u[i][q] - kp[q]));
    }
    return gap;
}

std::vector<double> p_grid_8() {
    std::vector<double> grid;
    for (int i = 0; i < 8; ++i) grid.push_back(1.5 + 3.5 * i / 7.0);
    return grid;
}

// 1. max_epsilon against the closed form, p in {1.5, 2, 3, 5}, rel 1e-8, < 1 s
void criterion_closed_form() {
    Timer timer;
    double worst = 0.0;
    for (double p : {1.5, 2.0, 3.0, 5.0}) {
        const double bisected = max_epsilon(example_plant(p)).epsilon_max;
        const double closed = scalar_bound(p);
        worst = std::max(worst, std::abs(bisected - closed) / closed);
    }
    const double elapsed = timer.seconds();
    report(1, "closed-form consistency", worst <= 1e-8 && elapsed < 1.0,
           fmt("max rel dev %.2e", worst), elapsed);
}

// 2. figure-1 bands over 8 gains: containment, red symmetry 1e-12, blue
//    asymmetry somewhere > 1e-6, ratio in [0.35, 0.65], < 30 s
void criterion_figure1() {
    Timer timer;
    const auto rows = figure1_sweep(p_grid_8());
    bool contained = true, symmetric = true, asymmetric_somewhere = false;
    double ratio_lo = 1.0, ratio_hi = 0.0;
    for (const auto& row : rows) {
        contained &= row.red_tau_min > row.blue_tau_min &&
                     row.red_tau_max < row.blue_tau_max;
        symmetric &=
            std::abs((1.0 - row.red_tau_min) - (row.red_tau_max - 1.0)) <= 1e-12;
        asymmetric_somewhere |=
            std::abs((1.0 - row.blue_tau_min) - (row.blue_tau_max - 1.0)) > 1e-6;
        const double eps = row.red_tau_max - 1.0;
        const double half = 0.5 * (row.blue_tau_max - row.blue_tau_min);
        ratio_lo = std::min(ratio_lo, eps / half);
        ratio_hi = std::max(ratio_hi, eps / half);
    }
    const double elapsed = timer.seconds();
    const bool ok = contained && symmetric && asymmetric_somewhere &&
                    ratio_lo >= 0.35 && ratio_hi <= 0.65 && elapsed < 30.0;
    report(2, "figure-1 reproduction", ok,
           fmt("ratios [%.3f, %.3f]", ratio_lo, ratio_hi), elapsed);
}

// 3. every crossing-curve boundary solves the quasipolynomial to 1e-6 and the
//    unit-circle identity to 1e-9
void criterion_crossing_validity() {
    Timer timer;
    double worst_char = 0.0, worst_circle = 0.0;
    for (double p : p_grid_8()) {
        const StabilityWindow win = crossing_curve(p);
        const double pe = p * std::exp(1.0);
        for (double w : win.omega_roots) {
            const double c = std::cos(w) - (p - 1.0) / pe;
            const double s = std::sin(w) + w / pe;
            worst_circle = std::max(worst_circle, std::abs(c * c + s * s - 1.0));
        }
        for (const auto& b : win.boundary)
            worst_char = std::max(
                worst_char,
                std::abs(char_eval_scalar(p, b.tau, std::complex<double>(0, b.omega))));
    }
    report(3, "crossing validity", worst_char <= 1e-6 && worst_circle <= 1e-9,
           fmt("|chi| %.1e, circle %.1e", worst_char, worst_circle), timer.seconds());
}

// 4. rightmost roots: |Re| <= 1e-4 on the boundary, sign flip across it,
//    finite spectrum at tau = r within 1e-6
void criterion_spectral_crosscheck() {
    Timer timer;
    const StabilityWindow win = crossing_curve(2.0);
    bool ok = true;
    double worst_re = 0.0;
    for (double boundary : {win.tau_min, win.tau_max}) {
        const auto at = rightmost_root_scalar(2.0, boundary, 64);
        worst_re = std::max(worst_re, std::abs(at.root.real()));
        const auto below = rightmost_root_scalar(2.0, boundary - 1e-3, 64);
        const auto above = rightmost_root_scalar(2.0, boundary + 1e-3, 64);
        ok &= below.root.real() * above.root.real() < 0.0;
    }
    ok &= worst_re <= 1e-4;
    const auto nominal = rightmost_root_scalar(2.0, 1.0, 64);
    const double alpha = spectral_abscissa(Matrix{{-1.0}});
    ok &= std::abs(nominal.root.real() - alpha) <= 1e-6;
    report(4, "spectral cross-check", ok,
           fmt("max |Re| at boundary %.2e", worst_re), timer.seconds());
}

// 5. 20 random Hurwitz 2x2-4x4 matrices: the envelope bound holds on 200
//    samples of [0, 20/lambda] with slack 1e-9
void criterion_envelope_certificates() {
    Timer timer;
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> frac(0.2, 0.9);
    std::uniform_int_distribution<std::size_t> dims(2, 4);
    bool all_ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m = random_hurwitz(rng, dims(rng));
        const double mu = frac(rng) * -spectral_abscissa(m);
        const DecayEnvelope env = decay_envelope(m, mu);
        all_ok &= certify_envelope(m, env, 200);
    }
    report(5, "envelope certificates", all_ok, "20/20 certified", timer.seconds());
}

// 6. |u - k p| drops by a factor in [3.5, 4.5] per halving of dt
void criterion_predictor_identity() {
    Timer timer;
    const PlantModel model = example_plant(2.0);
    const DelaySignal sig = DelaySignal::sinusoid(0.5, 0.0, 0.04);
    std::vector<double> gaps;
    for (double dt : {1e-2, 5e-3, 2.5e-3}) {
        const HistoryFunction hist = matched_history(
            model, 0.04, dt, [](double s) { return 0.3 * std::cos(2.0 * s); });
        gaps.push_back(
            max_gap_u_vs_kp(model, simulate_closed_loop(model, sig, hist, 6.0, dt)));
    }
    const double r1 = gaps[0] / gaps[1];
    const double r2 = gaps[1] / gaps[2];
    const bool ok = r1 >= 3.5 && r1 <= 4.5 && r2 >= 3.5 && r2 <= 4.5;
    report(6, "predictor identity order", ok, fmt("ratios %.3f, %.3f", r1, r2),
           timer.seconds());
}

// 7. at eps = 0 the recorded p follows exp((A+Bk)(t-r)) p(r) to 1e-6 relative
void criterion_finite_spectrum() {
    Timer timer;
    const PlantModel model = example_plant(2.0);
    const double dt = 1e-3;
    const HistoryFunction hist = matched_history(
        model, 0.0, dt, [](double s) { return 0.3 * std::exp(-s); });
    const SimTrace trace = simulate_closed_loop(
        model, DelaySignal::constant(0.0, 0.0), hist, 5.0, dt);
    const auto i_r = static_cast<std::size_t>(std::llround(model.r / dt));
    const double p_r = trace.p[i_r][0];
    double worst = 0.0;
    for (std::size_t i = i_r; i < trace.times.size(); ++i) {
        const double oracle = std::exp(-(trace.times[i] - model.r)) * p_r;
        worst = std::max(worst, std::abs(trace.p[i][0] - oracle) / std::abs(oracle));
    }
    report(7, "nominal finite spectrum", worst <= 1e-6, fmt("max rel dev %.2e", worst),
           timer.seconds());
}

// 8. 100 seeded perturbations at half the certified margin all decay:
//    estimate_holds and s(20)/s(0) <= 1e-3, < 2 min
void criterion_robust_decay() {
    Timer timer;
    const PlantModel model = example_plant(2.0);
    const double eps = 0.5 * max_epsilon(model).epsilon_max;
    const double dt = 2e-3;
    const HistoryFunction hist = make_compatible_history(
        model, eps, Vector{1.0}, [](double) { return Vector{0.0}; }, dt);
    bool all_hold = true;
    double worst_ratio = 0.0;
    for (int seed = 1; seed <= 100; ++seed) {
        const DelaySignal sig = DelaySignal::piecewise_constant(seed, 0.25, eps);
        const SimTrace trace = simulate_closed_loop(model, sig, hist, 20.0, dt);
        if (trace.diverged) { all_hold = false; break; }
        const DecayFit fit = fit_decay(trace, 2.0);
        all_hold &= fit.estimate_holds;
        const auto s = sup_norm_series(trace);
        worst_ratio = std::max(worst_ratio, s.back() / s.front());
    }
    const double elapsed = timer.seconds();
    const bool ok = all_hold && worst_ratio <= 1e-3 && elapsed < 120.0;
    report(8, "robust decay (100 seeds)", ok, fmt("worst s20/s0 %.2e", worst_ratio),
           elapsed);
}

// 9. comparison-system traces never undercut the certified rate by more than
//    the 20% fitting slack
void criterion_comparison_decay() {
    Timer timer;
    const double eps = 0.1;
    const ComparisonSystem sys(Matrix{{-1.0}}, Matrix{{-2.0}}, 1.0,
                               DecayEnvelope{1.0, 1.0 - 1e-9}, false);
    const SigmaCertificate cert = certify_sigma(sys, eps, true);
    bool all_ok = true;
    double worst_rate = 1e9;
    for (int seed = 1; seed <= 50; ++seed) {
        const ComparisonTrace trace = simulate_comparison(
            sys, eps, DelaySignal::piecewise_constant(seed, 0.25, eps),
            DelaySignal::piecewise_constant(seed + 1000, 0.25, eps),
            [](double) { return Vector{1.0}; }, 20.0, 5e-3);
        const DecayFit fit = fit_decay(trace, 2.0);
        worst_rate = std::min(worst_rate, fit.sigma_hat);
        all_ok &= fit.sigma_hat >= 0.8 * cert.sigma;
    }
    report(9, "comparison-system decay", all_ok,
           fmt("min fitted rate %.3f vs 0.8 sigma %.3f", worst_rate, 0.8 * cert.sigma),
           timer.seconds());
}

// 10. derivative-form and integral-form traces agree to 1e-4 at dt = 1e-3 and
//     the gap halves quadratically with dt
void criterion_formulation_equivalence() {
    Timer timer;
    const PlantModel model = example_plant(2.0);
    const DelaySignal sig = DelaySignal::sinusoid(0.5, 0.0, 0.04);
    std::vector<double> gaps;
    for (double dt : {2e-3, 1e-3, 5e-4}) {
        const HistoryFunction hist = matched_history(
            model, 0.04, dt, [](double s) { return 0.3 * std::cos(2.0 * s); });
        const SimTrace a = simulate_closed_loop(model, sig, hist, 3.0, dt);
        const SimTrace b = simulate_derivative_form(model, sig, hist, 3.0, dt);
        double gap = 0.0;
        for (std::size_t i = 0; i < a.times.size(); ++i)
            gap = std::max(gap, std::abs(a.u[i][0] - b.u[i][0]));
        gaps.push_back(gap);
    }
    const double r1 = gaps[0] / gaps[1];
    const double r2 = gaps[1] / gaps[2];
    const bool ok = gaps[1] <= 1e-4 && r1 >= 3.0 && r1 <= 5.0 && r2 >= 3.0 && r2 <= 5.0;
    report(10, "formulation equivalence", ok,
           fmt("gap at 1e-3: %.2e; ratios %.2f, %.2f", gaps[1], r1, r2),
           timer.seconds());
}

}  // namespace

int main() {
    criterion_closed_form();
    criterion_figure1();
    criterion_crossing_validity();
    criterion_spectral_crosscheck();
    criterion_envelope_certificates();
    criterion_predictor_identity();
    criterion_finite_spectrum();
    criterion_robust_decay();
    criterion_comparison_decay();
    criterion_formulation_equivalence();
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
