#include "delaymargin/expm.hpp"

#include <cmath>

namespace delaymargin {

Matrix mat_exp(const Matrix& m, double t) {
    if (!m.square()) throw DimensionError("mat_exp: matrix must be square");
    m.check_finite("mat_exp");
    if (!std::isfinite(t)) throw ValidationError("mat_exp: t must be finite");

    const std::size_t n = m.rows();
    Matrix a = m * t;

    // scale so that |A|_1 <= theta_13, square back afterwards
    const double theta13 = 5.371920351148152;
    const double nrm = one_norm(a);
    int squarings = 0;
    if (nrm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
        a *= std::ldexp(1.0, -squarings);
    }

    static const double b[14] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0,  129060195264000.0,   10559470521600.0,
        670442572800.0,      33522128640.0,       1323241920.0,
        40840800.0,          960960.0,            16380.0,
        182.0,               1.0};

    const Matrix ident = Matrix::identity(n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a2 * a4;

    // u = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    Matrix w1 = a6 * b[13] + a4 * b[11] + a2 * b[9];
    Matrix w2 = a6 * b[7] + a4 * b[5] + a2 * b[3] + ident * b[1];
    Matrix u = a * (a6 * w1 + w2);
    // v = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    Matrix z1 = a6 * b[12] + a4 * b[10] + a2 * b[8];
    Matrix v = a6 * z1 + a6 * b[6] + a4 * b[4] + a2 * b[2] + ident * b[0];

    // (v - u) X = (v + u)
    Matrix result = solve(v - u, v + u);
    for (int i = 0; i < squarings; ++i) result = result * result;
    return result;
}

}  // namespace delaymargin
