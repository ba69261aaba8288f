#pragma once

#include "otrank/types.hpp"

namespace otrank::linalg {

constexpr double kEigenFloor = 1e-12;

// Symmetric positive-definite square root and inverse square root via the
// symmetric eigendecomposition. Throws std::invalid_argument when the matrix
// is not square, not symmetric, or has an eigenvalue below kEigenFloor.
Matrix sym_sqrt(const Matrix& a);
Matrix sym_inv_sqrt(const Matrix& a);

// Throws as above without returning a factor.
void require_positive_definite(const Matrix& a, const char* what);

}  // namespace otrank::linalg
