#pragma once

#include <complex>
#include <vector>

#include "delaymargin/matrix.hpp"

namespace delaymargin {

/// All eigenvalues of a square real matrix (balanced Hessenberg reduction
/// followed by Francis double-shift QR). Throws NumericalError with the
/// iteration count if the QR iteration stalls.
std::vector<std::complex<double>> eigenvalues(const Matrix& m);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(const Matrix& m);

/// Largest singular value (induced Euclidean norm).
double spectral_norm(const Matrix& m);

/// Maximum real part over all eigenvalues.
double spectral_abscissa(const Matrix& m);

struct HurwitzResult {
    bool hurwitz = false;
    double abscissa = 0.0;  // max real part of the spectrum
};

/// True iff every eigenvalue has negative real part.
HurwitzResult is_hurwitz(const Matrix& m);

}  // namespace delaymargin
