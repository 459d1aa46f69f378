#pragma once

#include <Eigen/Core>

#include "fosi/objective.hpp"

namespace fosi {

// Dense symmetric eigendecomposition by cyclic Jacobi rotations. Accurate and
// simple; intended for verification work at n <= a few hundred, not as a
// performance path. Eigenvalues come back sorted descending with matching
// eigenvector columns.
void jacobi_eigh(const Matrix& a, Vector& eigenvalues, Matrix& eigenvectors);

// Convenience wrappers for spectrum-level checks.
Vector jacobi_eigenvalues(const Matrix& a);

}  // namespace fosi
