#include "delaymargin/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace delaymargin {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Diagonal similarity scaling with powers of two (EISPACK balanc).
void balance(Matrix& a) {
    const std::size_t n = a.rows();
    const double radix = 2.0;
    bool again = true;
    while (again) {
        again = false;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix, f = 1.0, s = c + r;
            while (c < g) { f *= radix; c *= radix * radix; }
            g = r * radix;
            while (c > g) { f /= radix; c /= radix * radix; }
            if ((c + r) / f < 0.95 * s) {
                again = true;
                const double ginv = 1.0 / f;
                for (std::size_t j = 0; j < n; ++j) a(i, j) *= ginv;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
}

// In-place Householder reduction to upper Hessenberg form.
void hessenberg(Matrix& a) {
    const std::size_t n = a.rows();
    if (n < 3) return;
    std::vector<double> v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double scale = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) scale += std::abs(a(i, k));
        if (scale == 0.0) continue;
        double h = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            v[i] = a(i, k) / scale;
            h += v[i] * v[i];
        }
        double g = std::sqrt(h);
        if (v[k + 1] > 0.0) g = -g;
        h -= v[k + 1] * g;
        v[k + 1] -= g;
        // apply P = I - v v^T / h from both sides
        for (std::size_t j = 0; j < n; ++j) {
            double f = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) f += v[i] * a(i, j);
            f /= h;
            for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= f * v[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double f = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) f += a(i, j) * v[j];
            f /= h;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * v[j];
        }
        a(k + 1, k) = scale * g;
        for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
    }
}

void push_2x2_eigenvalues(double a, double b, double c, double d,
                          std::vector<std::complex<double>>& out) {
    const double half_tr = 0.5 * (a + d);
    const double det = a * d - b * c;
    const double disc = half_tr * half_tr - det;
    if (disc >= 0.0) {
        // split the real pair the numerically stable way
        const double root = std::sqrt(disc);
        const double l1 = half_tr >= 0.0 ? half_tr + root : half_tr - root;
        out.emplace_back(l1, 0.0);
        out.emplace_back(l1 != 0.0 ? det / l1 : half_tr, 0.0);
    } else {
        const double im = std::sqrt(-disc);
        out.emplace_back(half_tr, im);
        out.emplace_back(half_tr, -im);
    }
}

// Francis double-shift QR on an upper Hessenberg matrix.
std::vector<std::complex<double>> hqr(Matrix& h) {
    const std::size_t n = h.rows();
    std::vector<std::complex<double>> eig;
    eig.reserve(n);
    if (n == 0) return eig;

    double anorm = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = (i == 0 ? 0 : i - 1); j < n; ++j)
            anorm += std::abs(h(i, j));
    if (anorm == 0.0) anorm = 1.0;

    long total_iters = 0;
    std::size_t m = n;  // active block is rows/cols [0, m)
    int its = 0;
    while (m > 0) {
        // find the largest l with a negligible subdiagonal h(l, l-1)
        std::size_t l = m - 1;
        while (l > 0) {
            double s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
            if (s == 0.0) s = anorm;
            if (std::abs(h(l, l - 1)) <= kEps * s) {
                h(l, l - 1) = 0.0;
                break;
            }
            --l;
        }
        if (l == m - 1) {
            eig.emplace_back(h(m - 1, m - 1), 0.0);
            m -= 1;
            its = 0;
            continue;
        }
        if (l == m - 2) {
            push_2x2_eigenvalues(h(m - 2, m - 2), h(m - 2, m - 1),
                                 h(m - 1, m - 2), h(m - 1, m - 1), eig);
            m -= 2;
            its = 0;
            continue;
        }
        if (its >= 40)
            throw NumericalError("eigenvalues: QR iteration failed to converge",
                                 total_iters);
        ++its;
        ++total_iters;

        // double shift from the trailing 2x2 block; ad hoc values every 10th sweep
        double trace, det;
        if (its == 10 || its == 20 || its == 30) {
            const double s = std::abs(h(m - 1, m - 2)) + std::abs(h(m - 2, m - 3));
            trace = 2.0 * (h(m - 1, m - 1) + 0.75 * s);
            det = (h(m - 1, m - 1) + 0.75 * s) * (h(m - 1, m - 1) + 0.75 * s);
        } else {
            trace = h(m - 2, m - 2) + h(m - 1, m - 1);
            det = h(m - 2, m - 2) * h(m - 1, m - 1) -
                  h(m - 2, m - 1) * h(m - 1, m - 2);
        }

        // first column of (H - aI)(H - bI) restricted to the active block
        double x = h(l, l) * h(l, l) + h(l, l + 1) * h(l + 1, l) -
                   trace * h(l, l) + det;
        double y = h(l + 1, l) * (h(l, l) + h(l + 1, l + 1) - trace);
        double z = h(l + 1, l) * h(l + 2, l + 1);

        // chase the bulge with 3x3 (then 2x2) Householder reflectors
        for (std::size_t k = l; k + 1 < m; ++k) {
            const bool last = (k + 2 >= m);
            double v0 = x, v1 = y, v2 = last ? 0.0 : z;
            double scale = std::abs(v0) + std::abs(v1) + std::abs(v2);
            if (scale != 0.0) {
                v0 /= scale; v1 /= scale; v2 /= scale;
                double alpha = std::sqrt(v0 * v0 + v1 * v1 + v2 * v2);
                if (v0 > 0.0) alpha = -alpha;
                if (std::abs(alpha) > 0.0) {
                    const double beta = 1.0 / (alpha * (alpha - v0));
                    double w0 = v0 - alpha, w1 = v1, w2 = v2;
                    // rows
                    const std::size_t jlo = (k > l) ? k - 1 : l;
                    for (std::size_t j = jlo; j < m; ++j) {
                        double f = w0 * h(k, j) + w1 * h(k + 1, j) +
                                   (last ? 0.0 : w2 * h(k + 2, j));
                        f *= beta;
                        h(k, j) -= f * w0;
                        h(k + 1, j) -= f * w1;
                        if (!last) h(k + 2, j) -= f * w2;
                    }
                    // columns
                    const std::size_t ihi = std::min(m, k + 4);
                    for (std::size_t i = l; i < ihi; ++i) {
                        double f = w0 * h(i, k) + w1 * h(i, k + 1) +
                                   (last ? 0.0 : w2 * h(i, k + 2));
                        f *= beta;
                        h(i, k) -= f * w0;
                        h(i, k + 1) -= f * w1;
                        if (!last) h(i, k + 2) -= f * w2;
                    }
                }
            }
            // the reflector zeroed the bulge column below the subdiagonal
            if (k > l) {
                h(k + 1, k - 1) = 0.0;
                if (!last) h(k + 2, k - 1) = 0.0;
            }
            if (k + 2 < m) {
                x = h(k + 1, k);
                y = h(k + 2, k);
                z = (k + 3 < m) ? h(k + 3, k) : 0.0;
            }
        }
    }
    return eig;
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
    if (!m.square()) throw DimensionError("eigenvalues: matrix must be square");
    m.check_finite("eigenvalues");
    Matrix work = m;
    balance(work);
    hessenberg(work);
    return hqr(work);
}

std::vector<double> symmetric_eigenvalues(const Matrix& m) {
    if (!m.square()) throw DimensionError("symmetric_eigenvalues: matrix must be square");
    m.check_finite("symmetric_eigenvalues");
    const std::size_t n = m.rows();
    Matrix a = m;
    // cyclic Jacobi sweeps
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (std::sqrt(off) <= 1e-15 * (1.0 + frobenius_norm(a))) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

double spectral_norm(const Matrix& m) {
    m.check_finite("spectral_norm");
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    // Gram matrix of the smaller dimension keeps Jacobi cheap.
    const Matrix mt = m.transpose();
    const Matrix gram = (m.rows() >= m.cols()) ? mt * m : m * mt;
    const std::vector<double> eig = symmetric_eigenvalues(gram);
    const double lmax = std::max(0.0, eig.back());
    return std::sqrt(lmax);
}

double spectral_abscissa(const Matrix& m) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& l : eigenvalues(m)) best = std::max(best, l.real());
    return best;
}

HurwitzResult is_hurwitz(const Matrix& m) {
    HurwitzResult res;
    res.abscissa = spectral_abscissa(m);
    res.hurwitz = res.abscissa < 0.0;
    return res;
}

}  // namespace delaymargin
