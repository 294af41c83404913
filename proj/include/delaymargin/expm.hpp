#pragma once

#include "delaymargin/matrix.hpp"

namespace delaymargin {

/// exp(M t) by scaling-and-squaring with a degree-13 Pade approximant.
Matrix mat_exp(const Matrix& m, double t = 1.0);

}  // namespace delaymargin
