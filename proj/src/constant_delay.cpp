#include "delaymargin/constant_delay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>

#include "delaymargin/eigen.hpp"
#include "delaymargin/expm.hpp"

namespace delaymargin {

namespace {

using Complex = std::complex<double>;

// determinant of a small dense complex matrix by Gaussian elimination
Complex complex_det(std::vector<std::vector<Complex>> a) {
    const std::size_t n = a.size();
    Complex det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a[k][k]);
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > best) { best = std::abs(a[i][k]); piv = i; }
        if (best == 0.0) return 0.0;
        if (piv != k) { std::swap(a[piv], a[k]); det = -det; }
        det *= a[k][k];
        for (std::size_t i = k + 1; i < n; ++i) {
            const Complex f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
        }
    }
    return det;
}

Matrix delay_factor(const PlantModel& model, CharForm form) {
    const Matrix bk = model.b * model.k;
    const Matrix ear = mat_exp(model.a, model.r);
    return form == CharForm::ReducedX ? bk * ear : ear * bk;
}

std::vector<std::vector<Complex>> char_matrix_at(const Matrix& cl, const Matrix& n_mat,
                                                 double tau, double r, Complex s) {
    const std::size_t n = cl.rows();
    const Complex w = std::exp(-r * s) - std::exp(-tau * s);
    std::vector<std::vector<Complex>> f(n, std::vector<Complex>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            f[i][j] = -cl(i, j) + w * n_mat(i, j);
            if (i == j) f[i][j] += s;
        }
    return f;
}

// d/ds of the matrix above
std::vector<std::vector<Complex>> char_matrix_prime(const Matrix& n_mat, double tau,
                                                    double r, Complex s) {
    const std::size_t n = n_mat.rows();
    const Complex wp = -r * std::exp(-r * s) + tau * std::exp(-tau * s);
    std::vector<std::vector<Complex>> f(n, std::vector<Complex>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            f[i][j] = wp * n_mat(i, j);
            if (i == j) f[i][j] += 1.0;
        }
    return f;
}

// solve the small complex system F x = b in place (partial pivoting)
bool complex_solve(std::vector<std::vector<Complex>> f, std::vector<Complex>& b) {
    const std::size_t n = f.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(f[k][k]);
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(f[i][k]) > best) { best = std::abs(f[i][k]); piv = i; }
        if (best == 0.0) return false;
        std::swap(f[piv], f[k]);
        std::swap(b[piv], b[k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const Complex fac = f[i][k] / f[k][k];
            for (std::size_t j = k; j < n; ++j) f[i][j] -= fac * f[k][j];
            b[i] -= fac * b[k];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) b[i] -= f[i][j] * b[j];
        b[i] /= f[i][i];
    }
    return true;
}

// Newton step via the determinant's logarithmic derivative:
// chi'/chi = tr(F^{-1} F'), so  s <- s - 1 / tr(F^{-1} F').
bool newton_refine_matrix(const Matrix& cl, const Matrix& n_mat, double tau, double r,
                          Complex& s, double& residual) {
    for (int it = 0; it < 80; ++it) {
        const auto f = char_matrix_at(cl, n_mat, tau, r, s);
        residual = std::abs(complex_det(f));
        if (residual <= 1e-9) return true;
        const auto fp = char_matrix_prime(n_mat, tau, r, s);
        Complex trace = 0.0;
        bool ok = true;
        const std::size_t n = cl.rows();
        for (std::size_t col = 0; col < n && ok; ++col) {
            std::vector<Complex> b(n);
            for (std::size_t i = 0; i < n; ++i) b[i] = fp[i][col];
            ok = complex_solve(f, b);
            if (ok) trace += b[col];
        }
        if (!ok || std::abs(trace) < 1e-300 || !std::isfinite(std::abs(trace)))
            return false;
        const Complex delta = 1.0 / trace;
        if (!std::isfinite(std::abs(delta)) || std::abs(delta) > 10.0) return false;
        s -= delta;
    }
    return false;
}

// Chebyshev-Lobatto differentiation matrix on [-1, 1] (Trefethen's formula),
// nodes y_i = cos(i pi / N), i = 0..N.
Matrix cheb_diff(std::size_t n_cells, std::vector<double>& nodes) {
    const std::size_t n = n_cells;
    nodes.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        nodes[i] = std::cos(M_PI * static_cast<double>(i) / static_cast<double>(n));
    Matrix d(n + 1, n + 1);
    auto c = [&](std::size_t i) {
        const double base = (i == 0 || i == n) ? 2.0 : 1.0;
        return (i % 2 == 0) ? base : -base;
    };
    for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t j = 0; j <= n; ++j) {
            if (i == j) continue;
            d(i, j) = c(i) / c(j) / (nodes[i] - nodes[j]);
        }
    for (std::size_t i = 0; i <= n; ++i) {
        double rowsum = 0.0;
        for (std::size_t j = 0; j <= n; ++j)
            if (j != i) rowsum += d(i, j);
        d(i, i) = -rowsum;
    }
    return d;
}

// barycentric interpolation row at query point y (in [-1, 1])
std::vector<double> lagrange_row(const std::vector<double>& nodes, double y) {
    const std::size_t n = nodes.size() - 1;
    std::vector<double> row(n + 1, 0.0);
    for (std::size_t j = 0; j <= n; ++j)
        if (std::abs(y - nodes[j]) < 1e-14) { row[j] = 1.0; return row; }
    double total = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        double w = (j % 2 == 0) ? 1.0 : -1.0;
        if (j == 0 || j == n) w *= 0.5;
        row[j] = w / (y - nodes[j]);
        total += row[j];
    }
    for (double& v : row) v /= total;
    return row;
}

RootEstimate rightmost_root_impl(const Matrix& cl, const Matrix& n_mat, double tau,
                                 double r, std::size_t nodes_count) {
    if (nodes_count < 16)
        throw ValidationError("rightmost_root: need at least 16 collocation nodes");
    if (tau < 0.0) throw ValidationError("rightmost_root: tau must be >= 0");
    const std::size_t n = cl.rows();
    const double horizon = std::max(std::max(tau, r), 1e-8);

    std::vector<double> y;
    const Matrix d = cheb_diff(nodes_count, y);
    // theta_i = (y_i - 1) * horizon / 2 maps [1, -1] onto [0, -horizon]
    const double scale = 2.0 / horizon;
    const std::vector<double> row_tau = lagrange_row(y, 1.0 - 2.0 * tau / horizon);
    const std::vector<double> row_r = lagrange_row(y, 1.0 - 2.0 * r / horizon);

    const std::size_t dim = n * (nodes_count + 1);
    Matrix g(dim, dim);
    // boundary block: x'(0) = CL x(0) + N (x(-tau) - x(-r))
    for (std::size_t bi = 0; bi < n; ++bi)
        for (std::size_t bj = 0; bj < n; ++bj) {
            g(bi, bj) += cl(bi, bj);
            for (std::size_t node = 0; node <= nodes_count; ++node)
                g(bi, node * n + bj) +=
                    n_mat(bi, bj) * (row_tau[node] - row_r[node]);
        }
    // interior blocks: spectral differentiation
    for (std::size_t i = 1; i <= nodes_count; ++i)
        for (std::size_t j = 0; j <= nodes_count; ++j) {
            const double dij = d(i, j) * scale;
            if (dij == 0.0) continue;
            for (std::size_t q = 0; q < n; ++q) g(i * n + q, j * n + q) += dij;
        }

    const auto eig = eigenvalues(g);
    Complex best(-std::numeric_limits<double>::infinity(), 0.0);
    for (const auto& l : eig)
        if (l.real() > best.real()) best = l;

    RootEstimate est;
    est.collocation = best;
    Complex s = best;
    double residual = std::abs(complex_det(char_matrix_at(cl, n_mat, tau, r, s)));
    if (newton_refine_matrix(cl, n_mat, tau, r, s, residual) &&
        std::abs(s - best) <= 0.5 * (1.0 + std::abs(best))) {
        est.root = s;
        est.residual = residual;
        est.refined = true;
    } else {
        est.root = best;
        est.residual = std::abs(complex_det(char_matrix_at(cl, n_mat, tau, r, best)));
        est.refined = false;
    }
    return est;
}

}  // namespace

std::complex<double> char_eval_scalar(double p, double tau, std::complex<double> s) {
    if (!(p > 1.0)) throw DomainError("char_eval_scalar: requires p > 1");
    if (tau < 0.0) throw ValidationError("char_eval_scalar: tau must be >= 0");
    return s + (p - 1.0) + p * std::exp(1.0 - tau * s) - p * std::exp(1.0 - s);
}

std::complex<double> char_eval_matrix(const PlantModel& model, double tau,
                                      std::complex<double> s, CharForm form) {
    if (tau < 0.0) throw ValidationError("char_eval_matrix: tau must be >= 0");
    return complex_det(
        char_matrix_at(model.closed_loop(), delay_factor(model, form), tau, model.r, s));
}

StabilityWindow crossing_curve(double p, double tau_cap) {
    if (!(p > 1.0)) throw DomainError("crossing_curve: requires p > 1");
    const double e = std::exp(1.0);
    const double pe = p * e;

    // step (i): roots of (p-1) cos w - w sin w - ((p-1)^2 + w^2) / (2pe)
    auto f = [&](double w) {
        return (p - 1.0) * std::cos(w) - w * std::sin(w) -
               ((p - 1.0) * (p - 1.0) + w * w) / (2.0 * pe);
    };
    const double hi = 2.0 * pe;
    const std::size_t grid = 20000;
    StabilityWindow win;
    win.p = p;
    std::vector<double> roots;
    double prev_w = hi * 1e-12, prev_f = f(prev_w);
    for (std::size_t i = 1; i <= grid; ++i) {
        const double w = hi * static_cast<double>(i) / grid;
        const double fw = f(w);
        if (prev_f == 0.0) roots.push_back(prev_w);
        if (prev_f * fw < 0.0) {
            double a = prev_w, b = w, fa = prev_f;
            while (b - a > 1e-12) {
                const double mid = 0.5 * (a + b);
                const double fm = f(mid);
                if (fa * fm <= 0.0) { b = mid; } else { a = mid; fa = fm; }
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_w = w;
        prev_f = fw;
    }
    win.omega_roots = roots;

    // steps (ii)-(iii): phase by atan2, tau ladder up to tau_cap
    std::vector<CrossingPoint> candidates;
    for (double w : roots) {
        const double cphi = std::cos(w) - (p - 1.0) / pe;
        const double sphi = std::sin(w) + w / pe;
        const double phi = std::atan2(sphi, cphi);
        const double two_pi = 2.0 * M_PI;
        const long k_lo = static_cast<long>(std::ceil((1e-12 * w - phi) / two_pi)) - 1;
        const long k_hi = static_cast<long>(std::floor((tau_cap * w - phi) / two_pi)) + 1;
        for (long k = k_lo; k <= k_hi; ++k) {
            const double tau = (phi + two_pi * static_cast<double>(k)) / w;
            if (tau > 0.0 && tau <= tau_cap) candidates.push_back({w, tau});
        }
    }

    // step (iv): tightest window around the nominal delay 1
    const CrossingPoint* below = nullptr;
    const CrossingPoint* above = nullptr;
    for (const auto& c : candidates) {
        if (c.tau < 1.0 && (!below || c.tau > below->tau)) below = &c;
        if (c.tau > 1.0 && (!above || c.tau < above->tau)) above = &c;
    }
    if (below) {
        win.tau_min = below->tau;
        win.boundary.push_back(*below);
    } else {
        win.open_below = true;
        win.tau_min = 0.0;
    }
    if (above) {
        win.tau_max = above->tau;
        win.boundary.push_back(*above);
    } else {
        win.open_above = true;
        win.tau_max = tau_cap;
    }
    return win;
}

RootEstimate rightmost_root(const PlantModel& model, double tau, std::size_t nodes,
                            CharForm form) {
    return rightmost_root_impl(model.closed_loop(), delay_factor(model, form), tau,
                               model.r, nodes);
}

RootEstimate rightmost_root_scalar(double p, double tau, std::size_t nodes) {
    return rightmost_root(example_plant(p), tau, nodes, CharForm::ReducedX);
}

std::vector<Figure1Row> figure1_sweep(const std::vector<double>& p_grid,
                                      unsigned jobs) {
    auto row_for = [](double p) {
        const double eps = scalar_bound(p);
        const StabilityWindow win = crossing_curve(p);
        Figure1Row row;
        row.p = p;
        row.red_tau_min = 1.0 - eps;
        row.red_tau_max = 1.0 + eps;
        row.blue_tau_min = win.tau_min;
        row.blue_tau_max = win.tau_max;
        return row;
    };
    std::vector<Figure1Row> rows(p_grid.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < p_grid.size(); ++i) rows[i] = row_for(p_grid[i]);
        return rows;
    }
    std::vector<std::future<void>> running;
    std::size_t next = 0;
    while (next < p_grid.size() || !running.empty()) {
        while (running.size() < jobs && next < p_grid.size()) {
            const std::size_t idx = next++;
            running.push_back(std::async(std::launch::async, [&, idx] {
                rows[idx] = row_for(p_grid[idx]);
            }));
        }
        running.front().get();
        running.erase(running.begin());
    }
    return rows;
}

void write_figure1_csv(const std::vector<Figure1Row>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("write_figure1_csv: cannot open " + path);
    out << "p,red_tau_min,red_tau_max,blue_tau_min,blue_tau_max\n";
    char buf[64];
    for (const auto& r : rows) {
        const double vals[5] = {r.p, r.red_tau_min, r.red_tau_max, r.blue_tau_min,
                                r.blue_tau_max};
        for (int i = 0; i < 5; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", vals[i]);
            out << (i ? "," : "") << buf;
        }
        out << "\n";
    }
}

}  // namespace delaymargin
