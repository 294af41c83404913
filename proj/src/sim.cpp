#include "delaymargin/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "delaymargin/expm.hpp"

namespace delaymargin {

namespace {

constexpr double kBlowup = 1e12;

std::vector<double> trapezoid_weights(std::size_t cells, double dt) {
    std::vector<double> w(cells + 1, dt);
    w.front() = 0.5 * dt;
    w.back() = 0.5 * dt;
    return w;
}

// 4th-order Gregory rule: trapezoid plus the first two difference
// corrections. Interior weights are all 1, which keeps the quadrature
// stable when it appears as the kernel of the controller recursion
// (Simpson's alternating weights excite a parasitic mode there).
std::vector<double> gregory_weights(std::size_t cells, double dt) {
    if (cells < 6) return trapezoid_weights(cells, dt);
    std::vector<double> w(cells + 1, dt);
    w[0] = w[cells] = dt * 3.0 / 8.0;
    w[1] = w[cells - 1] = dt * 7.0 / 6.0;
    w[2] = w[cells - 2] = dt * 23.0 / 24.0;
    return w;
}

std::size_t checked_cell_count(double span, double dt, const char* who) {
    const double q = span / dt;
    const auto n = static_cast<std::size_t>(std::llround(q));
    if (n == 0 || std::abs(q - static_cast<double>(n)) > 1e-9 * std::max(1.0, q))
        throw ValidationError(std::string(who) +
                              ": step must divide the nominal delay r");
    return n;
}

// Uniform-grid record with interpolating reads.
struct Record {
    double start = 0.0;
    double dt = 0.0;
    std::vector<Vector> nodes;

    double head_time() const { return start + dt * (nodes.size() - 1); }

    Vector read_linear(double theta) const {
        const double pos = (theta - start) / dt;
        const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(nodes.size()) - 1;
        std::ptrdiff_t j = static_cast<std::ptrdiff_t>(std::floor(pos));
        j = std::clamp<std::ptrdiff_t>(j, 0, last - 1);
        const double a = pos - static_cast<double>(j);
        const Vector& u0 = nodes[j];
        const Vector& u1 = nodes[j + 1];
        Vector out(u0.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = (1.0 - a) * u0[i] + a * u1[i];
        return out;
    }

    // 4-point Lagrange interpolation; falls back to linear near the edges of
    // very short records. Reads slightly past the head extrapolate from the
    // last stencil (RK stages may look up to one step ahead when eps ~ r).
    Vector read(double theta) const {
        const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(nodes.size()) - 1;
        if (last < 3) return read_linear(theta);
        const double pos = (theta - start) / dt;
        std::ptrdiff_t j = static_cast<std::ptrdiff_t>(std::floor(pos));
        std::ptrdiff_t j0 = std::clamp<std::ptrdiff_t>(j - 1, 0, last - 3);
        const double x = pos - static_cast<double>(j0);
        double c[4];
        for (int i = 0; i < 4; ++i) {
            double prod = 1.0;
            for (int l = 0; l < 4; ++l)
                if (l != i) prod *= (x - l) / static_cast<double>(i - l);
            c[i] = prod;
        }
        Vector out(nodes.front().size(), 0.0);
        for (int i = 0; i < 4; ++i) {
            const Vector& node = nodes[j0 + i];
            for (std::size_t q = 0; q < out.size(); ++q) out[q] += c[i] * node[q];
        }
        return out;
    }
};

struct LoopSetup {
    std::size_t delay_cells = 0;      // r / dt
    std::vector<Matrix> w_exp;        // exp(A j dt) B, j = 0..R
    Matrix exp_ar;                    // exp(A r)
    Matrix k_exp_ar;                  // k exp(A r)
    std::vector<double> wu;           // controller quadrature (Gregory)
    std::vector<double> wp;           // predictor-state quadrature (trapezoid)
    LuFactor endpoint;                // I_m - wu[0] k B

    LoopSetup(const PlantModel& model, double dt)
        : delay_cells(checked_cell_count(model.r, dt, "simulate")),
          exp_ar(mat_exp(model.a, model.r)),
          k_exp_ar(model.k * mat_exp(model.a, model.r)),
          wu(gregory_weights(delay_cells, dt)),
          wp(trapezoid_weights(delay_cells, dt)),
          endpoint(Matrix::identity(model.k.rows()) -
                   (model.k * model.b) * gregory_weights(delay_cells, dt)[0]) {
        const Matrix step = mat_exp(model.a, dt);
        w_exp.reserve(delay_cells + 1);
        w_exp.push_back(model.b);
        for (std::size_t j = 1; j <= delay_cells; ++j)
            w_exp.push_back(step * w_exp.back());
    }
};

void axpy(Vector& acc, double scale, const Vector& v) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += scale * v[i];
}

Vector predictor_state(const LoopSetup& setup, const Record& urec,
                       const Vector& x_now, std::size_t head_index) {
    Vector integral(x_now.size(), 0.0);
    for (std::size_t j = 0; j <= setup.delay_cells; ++j)
        axpy(integral, setup.wp[j], setup.w_exp[j] * urec.nodes[head_index - j]);
    Vector p = setup.exp_ar * x_now;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += integral[i];
    return p;
}

double history_span(double r, double epsilon, double h) {
    return h * std::ceil((r + epsilon) / h - 1e-12);
}

void check_history(const HistoryFunction& history, const PlantModel& model,
                   double epsilon, double dt) {
    if (std::abs(history.h - dt) > 1e-12 * std::max(1.0, dt))
        throw ValidationError("simulate: dt must equal the history step h");
    if (history.length + 1e-12 < model.r + epsilon)
        throw CoverageError("simulate: history does not cover [-r-eps, 0]");
    for (const Vector& v : history.u)
        if (v.size() != model.input_dim())
            throw DimensionError("simulate: history values have wrong dimension");
}

}  // namespace

Vector HistoryFunction::value(double s) const {
    Record rec{-length, h, u};
    return rec.read_linear(std::clamp(s, -length, 0.0));
}

HistoryFunction make_compatible_history(const PlantModel& model, double epsilon,
                                        const Vector& x0, const ShapeFn& u_shape,
                                        double h) {
    if (!(h > 0.0)) throw ValidationError("make_compatible_history: h must be > 0");
    if (x0.size() != model.state_dim())
        throw DimensionError("make_compatible_history: x0 has wrong dimension");
    if (epsilon < 0.0)
        throw ValidationError("make_compatible_history: epsilon must be >= 0");

    const std::size_t delay_cells = checked_cell_count(model.r, h, "make_compatible_history");
    const double span = history_span(model.r, epsilon, h);
    const auto total = static_cast<std::size_t>(std::llround(span / h));

    HistoryFunction hist;
    hist.h = h;
    hist.length = span;
    hist.x0 = x0;
    hist.u.resize(total + 1);
    std::vector<Vector> shape_values(total + 1);
    for (std::size_t j = 0; j <= total; ++j) {
        const double s = -span + h * static_cast<double>(j);
        shape_values[j] = u_shape(s);
        if (shape_values[j].size() != model.input_dim())
            throw DimensionError("make_compatible_history: u_shape has wrong dimension");
        for (double v : shape_values[j])
            if (!std::isfinite(v))
                throw ValidationError("make_compatible_history: u_shape not finite");
        hist.u[j] = shape_values[j];
    }

    // weights of int_{-r}^0 exp(-As) B u(s) ds on the grid nodes s = -j h
    const std::vector<double> wt = trapezoid_weights(delay_cells, h);
    std::vector<Matrix> kernel;
    kernel.reserve(delay_cells + 1);
    const Matrix step = mat_exp(model.a, h);
    kernel.push_back(model.b);
    for (std::size_t j = 1; j <= delay_cells; ++j) kernel.push_back(step * kernel.back());

    const Matrix k_exp_ar = model.k * mat_exp(model.a, model.r);
    const double blend_len = std::min(4.0 * h, model.r / 10.0);
    const std::size_t blend_cells =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(blend_len / h)));

    auto compat_value = [&]() {
        Vector integral(model.state_dim(), 0.0);
        for (std::size_t j = 0; j <= delay_cells; ++j)
            axpy(integral, wt[j], kernel[j] * hist.u[total - j]);
        Vector target = k_exp_ar * x0;
        const Vector ki = model.k * integral;
        for (std::size_t i = 0; i < target.size(); ++i) target[i] += ki[i];
        return target;
    };

    const Vector shape0 = shape_values[total];
    Vector target = compat_value();
    // the blended nodes feed back into the integral: iterate to a fixed point
    for (int iter = 0; iter < 100; ++iter) {
        for (std::size_t j = 0; j <= blend_cells && j <= total; ++j) {
            const double w = 1.0 - static_cast<double>(j) / blend_cells;
            Vector v = shape_values[total - j];
            for (std::size_t i = 0; i < v.size(); ++i)
                v[i] += w * (target[i] - shape0[i]);
            hist.u[total - j] = v;
        }
        const Vector next = compat_value();
        double change = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i)
            change = std::max(change, std::abs(next[i] - target[i]));
        target = next;
        if (change <= 1e-15 * (1.0 + max_abs(target))) break;
    }
    Vector residual = hist.u[total];
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= target[i];
    hist.compat_residual = max_abs(residual);
    return hist;
}

Vector predictor_control(const PlantModel& model, const Vector& x_now,
                         const std::function<Vector(double)>& u_history,
                         double t, double dt) {
    if (!(dt > 0.0)) throw ValidationError("predictor_control: dt must be > 0");
    if (x_now.size() != model.state_dim())
        throw DimensionError("predictor_control: x has wrong dimension");
    const std::size_t cells = checked_cell_count(model.r, dt, "predictor_control");
    const std::vector<double> wt = trapezoid_weights(cells, dt);
    const Matrix step = mat_exp(model.a, dt);
    Matrix kernel = model.b;
    Vector integral(model.state_dim(), 0.0);
    for (std::size_t j = 0; j <= cells; ++j) {
        const Vector uj = u_history(t - static_cast<double>(j) * dt);
        if (uj.size() != model.input_dim())
            throw CoverageError("predictor_control: u_history has wrong dimension");
        axpy(integral, wt[j], kernel * uj);
        if (j < cells) kernel = step * kernel;
    }
    Vector out = (model.k * mat_exp(model.a, model.r)) * x_now;
    const Vector ki = model.k * integral;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += ki[i];
    return out;
}

SimTrace simulate_closed_loop(const PlantModel& model, const DelaySignal& signal,
                              const HistoryFunction& history, double t_final,
                              double dt) {
    const double eps = signal.epsilon();
    check_history(history, model, eps, dt);
    if (eps > model.r)
        throw PreconditionError("simulate: epsilon must not exceed r");
    if (t_final < model.r + eps)
        throw PreconditionError("simulate: t_final must be at least r + eps");

    const LoopSetup setup(model, dt);
    const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
    const auto offset = static_cast<std::size_t>(std::llround(history.length / dt));

    SimTrace trace;
    trace.dt = dt;
    trace.window = history.length;
    trace.record_offset = offset;
    trace.u_record = history.u;
    trace.u_record.reserve(offset + steps + 1);

    Record urec{-history.length, dt, std::move(trace.u_record)};

    Vector x = history.x0;
    trace.times.push_back(0.0);
    trace.x.push_back(x);
    trace.u.push_back(urec.nodes[offset]);
    trace.p.push_back(predictor_state(setup, urec, x, offset));

    auto delayed_input = [&](double tstar) {
        const double theta = tstar - model.r - eps * signal(tstar);
        if (theta < -history.length - 1e-9)
            throw Error("simulate: delayed argument precedes the stored history");
        return urec.read(theta);
    };
    auto deriv = [&](double tstar, const Vector& xv) {
        Vector dx = model.a * xv;
        const Vector bu = model.b * delayed_input(tstar);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += bu[i];
        return dx;
    };

    const std::size_t n = model.state_dim();
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        const Vector k1 = deriv(t, x);
        Vector stage(n);
        for (std::size_t q = 0; q < n; ++q) stage[q] = x[q] + 0.5 * dt * k1[q];
        const Vector k2 = deriv(t + 0.5 * dt, stage);
        for (std::size_t q = 0; q < n; ++q) stage[q] = x[q] + 0.5 * dt * k2[q];
        const Vector k3 = deriv(t + 0.5 * dt, stage);
        for (std::size_t q = 0; q < n; ++q) stage[q] = x[q] + dt * k3[q];
        const Vector k4 = deriv(t + dt, stage);
        for (std::size_t q = 0; q < n; ++q)
            x[q] += dt / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);

        // new controller node: Gregory quadrature with the implicit endpoint
        const std::size_t head = urec.nodes.size() - 1;
        Vector integral(n, 0.0);
        for (std::size_t j = 1; j <= setup.delay_cells; ++j)
            axpy(integral, setup.wu[j], setup.w_exp[j] * urec.nodes[head + 1 - j]);
        Vector rhs = setup.k_exp_ar * x;
        const Vector ki = model.k * integral;
        for (std::size_t q = 0; q < rhs.size(); ++q) rhs[q] += ki[q];
        const Vector u_new = setup.endpoint.solve(rhs);

        urec.nodes.push_back(u_new);
        trace.times.push_back(t + dt);
        trace.x.push_back(x);
        trace.u.push_back(u_new);
        trace.p.push_back(predictor_state(setup, urec, x, head + 1));

        if (!(max_abs(x) < kBlowup)) {
            trace.diverged = true;
            break;
        }
    }
    trace.u_record = std::move(urec.nodes);
    return trace;
}

SimTrace simulate_derivative_form(const PlantModel& model, const DelaySignal& signal,
                                  const HistoryFunction& history, double t_final,
                                  double dt) {
    const double eps = signal.epsilon();
    check_history(history, model, eps, dt);
    if (eps > model.r)
        throw PreconditionError("simulate: epsilon must not exceed r");
    if (t_final < model.r + eps)
        throw PreconditionError("simulate: t_final must be at least r + eps");

    const LoopSetup setup(model, dt);
    const std::size_t cells = setup.delay_cells;
    const std::vector<double> wt = trapezoid_weights(cells, dt);
    const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
    const auto offset = static_cast<std::size_t>(std::llround(history.length / dt));
    const std::size_t n = model.state_dim();
    const std::size_t m = model.input_dim();

    SimTrace trace;
    trace.dt = dt;
    trace.window = history.length;
    trace.record_offset = offset;

    Record urec{-history.length, dt, history.u};

    Vector x = history.x0;
    Vector u = urec.nodes[offset];
    trace.times.push_back(0.0);
    trace.x.push_back(x);
    trace.u.push_back(u);
    trace.p.push_back(predictor_state(setup, urec, x, offset));

    // stage kind: 0 -> t (nodes aligned), 1 -> t + dt/2, 2 -> t + dt
    auto rhs = [&](int kind, double tstar, const Vector& xv, const Vector& uv,
                   std::vector<double>& dx, std::vector<double>& du) {
        auto read_ext = [&](double theta) {
            if (theta <= urec.head_time() + 1e-12 * dt) return urec.read_linear(theta);
            const double a = std::min((theta - urec.head_time()) / dt, 1.0);
            Vector out(m);
            const Vector& headv = urec.nodes.back();
            for (std::size_t q = 0; q < m; ++q)
                out[q] = (1.0 - a) * headv[q] + a * uv[q];
            return out;
        };
        const Vector u_delayed = read_ext(tstar - model.r - eps * signal(tstar));
        const Vector u_nominal = read_ext(tstar - model.r);

        // J = int_{t*-r}^{t*} exp(A (t*-w)) B u(w) dw by trapezoid; the final
        // node carries the stage value of u
        const std::size_t head = urec.nodes.size() - 1;
        Vector integral(n, 0.0);
        if (kind == 1) {
            const std::size_t base = head - cells;
            for (std::size_t l = 0; l < cells; ++l) {
                const Vector& a0 = urec.nodes[base + l];
                const Vector& a1 = urec.nodes[base + l + 1];
                Vector mid(m);
                for (std::size_t q = 0; q < m; ++q) mid[q] = 0.5 * (a0[q] + a1[q]);
                axpy(integral, wt[l], setup.w_exp[cells - l] * mid);
            }
        } else {
            const std::size_t base = head - cells + (kind == 2 ? 1 : 0);
            for (std::size_t l = 0; l < cells; ++l)
                axpy(integral, wt[l], setup.w_exp[cells - l] * urec.nodes[base + l]);
        }
        axpy(integral, wt[cells], setup.w_exp[0] * uv);

        Vector xdot = model.a * xv;
        const Vector bu = model.b * u_delayed;
        for (std::size_t q = 0; q < n; ++q) xdot[q] += bu[q];

        Vector drift = model.a * xv;
        const Vector b_del = model.b * u_delayed;
        const Vector b_nom = model.b * u_nominal;
        for (std::size_t q = 0; q < n; ++q) drift[q] += b_del[q] - b_nom[q];
        Vector udot = setup.k_exp_ar * drift;
        const Vector k_aj = model.k * (model.a * integral);
        const Vector kbu = (model.k * model.b) * uv;
        for (std::size_t q = 0; q < m; ++q) udot[q] += k_aj[q] + kbu[q];

        dx.assign(xdot.begin(), xdot.end());
        du.assign(udot.begin(), udot.end());
    };

    std::vector<double> k1x(n), k2x(n), k3x(n), k4x(n);
    std::vector<double> k1u(m), k2u(m), k3u(m), k4u(m);
    Vector xs(n), us(m);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        rhs(0, t, x, u, k1x, k1u);
        for (std::size_t q = 0; q < n; ++q) xs[q] = x[q] + 0.5 * dt * k1x[q];
        for (std::size_t q = 0; q < m; ++q) us[q] = u[q] + 0.5 * dt * k1u[q];
        rhs(1, t + 0.5 * dt, xs, us, k2x, k2u);
        for (std::size_t q = 0; q < n; ++q) xs[q] = x[q] + 0.5 * dt * k2x[q];
        for (std::size_t q = 0; q < m; ++q) us[q] = u[q] + 0.5 * dt * k2u[q];
        rhs(1, t + 0.5 * dt, xs, us, k3x, k3u);
        for (std::size_t q = 0; q < n; ++q) xs[q] = x[q] + dt * k3x[q];
        for (std::size_t q = 0; q < m; ++q) us[q] = u[q] + dt * k3u[q];
        rhs(2, t + dt, xs, us, k4x, k4u);
        for (std::size_t q = 0; q < n; ++q)
            x[q] += dt / 6.0 * (k1x[q] + 2.0 * k2x[q] + 2.0 * k3x[q] + k4x[q]);
        for (std::size_t q = 0; q < m; ++q)
            u[q] += dt / 6.0 * (k1u[q] + 2.0 * k2u[q] + 2.0 * k3u[q] + k4u[q]);

        urec.nodes.push_back(u);
        trace.times.push_back(t + dt);
        trace.x.push_back(x);
        trace.u.push_back(u);
        trace.p.push_back(predictor_state(setup, urec, x, urec.nodes.size() - 1));

        if (!(max_abs(x) < kBlowup && max_abs(u) < kBlowup)) {
            trace.diverged = true;
            break;
        }
    }
    trace.u_record = std::move(urec.nodes);
    return trace;
}

ComparisonTrace simulate_comparison(const ComparisonSystem& sys, double epsilon,
                                    const DelaySignal& d_signal,
                                    const DelaySignal& q_signal,
                                    const ShapeFn& x_history, double t_final,
                                    double dt) {
    if (epsilon < 0.0 || epsilon > sys.r)
        throw PreconditionError("simulate_comparison: epsilon must lie in [0, r]");
    const std::size_t n = sys.ahat.rows();
    const std::size_t cells = checked_cell_count(sys.r, dt, "simulate_comparison");
    (void)cells;
    const double span = history_span(sys.r, epsilon, dt);
    const auto offset = static_cast<std::size_t>(std::llround(span / dt));
    const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));

    Record xrec{-span, dt, {}};
    xrec.nodes.reserve(offset + steps + 1);
    for (std::size_t j = 0; j <= offset; ++j) {
        Vector v = x_history(-span + dt * static_cast<double>(j));
        if (v.size() != n)
            throw DimensionError("simulate_comparison: history has wrong dimension");
        xrec.nodes.push_back(std::move(v));
    }

    ComparisonTrace trace;
    trace.dt = dt;
    trace.window = span;
    trace.record_offset = offset;

    Vector x = xrec.nodes[offset];
    trace.times.push_back(0.0);
    trace.x.push_back(x);

    auto deriv = [&](double tstar, const Vector& xv) {
        const Vector xd = xrec.read(tstar - sys.r - epsilon * d_signal(tstar));
        const Vector xn = xrec.read(tstar - sys.r);
        Vector diff(n);
        for (std::size_t q = 0; q < n; ++q) diff[q] = xd[q] - xn[q];
        Vector dx = sys.ahat * xv;
        const Vector cdiff = sys.c * diff;
        const double qv = q_signal(tstar);
        for (std::size_t q = 0; q < n; ++q) dx[q] += qv * cdiff[q];
        return dx;
    };

    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        const Vector k1 = deriv(t, x);
        Vector stage(n);
        for (std::size_t q = 0; q < n; ++q) stage[q] = x[q] + 0.5 * dt * k1[q];
        const Vector k2 = deriv(t + 0.5 * dt, stage);
        for (std::size_t q = 0; q < n; ++q) stage[q] = x[q] + 0.5 * dt * k2[q];
        const Vector k3 = deriv(t + 0.5 * dt, stage);
        for (std::size_t q = 0; q < n; ++q) stage[q] = x[q] + dt * k3[q];
        const Vector k4 = deriv(t + dt, stage);
        for (std::size_t q = 0; q < n; ++q)
            x[q] += dt / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);

        xrec.nodes.push_back(x);
        trace.times.push_back(t + dt);
        trace.x.push_back(x);
        if (!(max_abs(x) < kBlowup)) {
            trace.diverged = true;
            break;
        }
    }
    trace.x_record = std::move(xrec.nodes);
    return trace;
}

Vector recover_state(const PlantModel& model, const SimTrace& trace, double t) {
    if (t < model.r - 1e-12)
        throw PreconditionError("recover_state: requires t >= r");
    const double dt = trace.dt;
    const std::size_t cells = checked_cell_count(model.r, dt, "recover_state");
    const double pos = t / dt;
    const auto it = static_cast<std::size_t>(std::llround(pos));
    if (std::abs(pos - static_cast<double>(it)) > 1e-9)
        throw ValidationError("recover_state: t must lie on the trace grid");
    if (it >= trace.p.size() || it < cells)
        throw CoverageError("recover_state: p not available on [t-r, t]");

    const std::vector<double> wt = trapezoid_weights(cells, dt);
    const Matrix step = mat_exp(model.a, dt);
    Matrix kernel = model.b;  // exp(A j dt) B
    Vector integral(model.state_dim(), 0.0);
    for (std::size_t j = 0; j <= cells; ++j) {
        axpy(integral, wt[j], kernel * (model.k * trace.p[it - j]));
        if (j < cells) kernel = step * kernel;
    }
    Vector inner = trace.p[it];
    for (std::size_t q = 0; q < inner.size(); ++q) inner[q] -= integral[q];
    return mat_exp(model.a, -model.r) * inner;
}

namespace {

DecayFit fit_series(const std::vector<double>& times, const std::vector<double>& s,
                    double burn_in) {
    DecayFit fit;
    std::size_t first_fit = times.size();
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] >= burn_in) { first_fit = i; break; }
    if (first_fit + 2 > times.size())
        throw PreconditionError("fit_decay: trace does not extend past burn_in");

    bool any_nonzero = false;
    for (std::size_t i = first_fit; i < s.size(); ++i)
        if (s[i] > 0.0) { any_nonzero = true; break; }
    if (!any_nonzero) {
        fit.exact_zero = true;
        fit.sigma_hat = std::numeric_limits<double>::infinity();
        fit.q_hat = 1.0;
        fit.estimate_holds = true;
        return fit;
    }

    double st = 0, stt = 0, sy = 0, sty = 0, cnt = 0;
    for (std::size_t i = first_fit; i < s.size(); ++i) {
        if (!(s[i] > 0.0)) continue;
        const double y = std::log(s[i]);
        st += times[i];
        stt += times[i] * times[i];
        sy += y;
        sty += times[i] * y;
        cnt += 1.0;
    }
    const double denom = cnt * stt - st * st;
    const double slope = (cnt * sty - st * sy) / denom;
    fit.sigma_hat = -slope;

    const double s0 = s.front();
    if (!(s0 > 0.0)) {
        fit.q_hat = std::numeric_limits<double>::infinity();
        fit.estimate_holds = false;
        return fit;
    }
    double q = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        q = std::max(q, s[i] * std::exp(fit.sigma_hat * times[i]) / s0);
    fit.q_hat = q;
    bool dominated = true;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] > fit.q_hat * std::exp(-fit.sigma_hat * times[i]) * s0 * (1.0 + 1e-6)) {
            dominated = false;
            break;
        }
    fit.estimate_holds = fit.sigma_hat > 0.0 && std::isfinite(fit.q_hat) && dominated;
    return fit;
}

}  // namespace

DecayFit fit_decay(const SimTrace& trace, double burn_in) {
    std::vector<double> s(trace.times.size());
    const std::size_t win = trace.record_offset;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        double umax = 0.0;
        for (std::size_t j = i; j <= i + win; ++j)
            umax = std::max(umax, euclidean_norm(trace.u_record[j]));
        s[i] = euclidean_norm(trace.x[i]) + umax;
    }
    return fit_series(trace.times, s, burn_in);
}

DecayFit fit_decay(const ComparisonTrace& trace, double burn_in) {
    std::vector<double> s(trace.times.size());
    const std::size_t win = trace.record_offset;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        double xmax = 0.0;
        for (std::size_t j = i; j <= i + win; ++j)
            xmax = std::max(xmax, euclidean_norm(trace.x_record[j]));
        s[i] = xmax;
    }
    return fit_series(trace.times, s, burn_in);
}

void write_trace_csv(const SimTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
    if (!out) throw ValidationError("write_trace_csv: cannot open " + path);
    const std::size_t n = trace.x.empty() ? 0 : trace.x.front().size();
    const std::size_t m = trace.u.empty() ? 0 : trace.u.front().size();
    out << "t";
    for (std::size_t i = 1; i <= n; ++i) out << ",x_" << i;
    for (std::size_t i = 1; i <= m; ++i) out << ",u_" << i;
    for (std::size_t i = 1; i <= n; ++i) out << ",p_" << i;
    out << "\n";
    char buf[64];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << buf;
    };
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", trace.times[i]);
        out << buf;
        for (double v : trace.x[i]) emit(v);
        for (double v : trace.u[i]) emit(v);
        for (double v : trace.p[i]) emit(v);
        out << "\n";
    }
}

}  // namespace delaymargin
