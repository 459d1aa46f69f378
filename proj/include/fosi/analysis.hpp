#pragma once

#include <string>

#include <Eigen/Core>

#include "fosi/dense_eigh.hpp"
#include "fosi/objective.hpp"
#include "fosi/spectral.hpp"

namespace fosi {

// Classification of the effective condition number against the original one,
// by where the Newton rate alpha falls relative to the scaled complement
// spectrum [eta lam_{n-l}, eta lam_{k+1}].
struct ConditionNumberReport {
  int case_label = 0;  // 1, 2, or 3
  bool improved = false;
  double kappa = 0.0;
  double kappa_tilde = 0.0;
};

ConditionNumberReport condition_number_cases(double lam_1, double lam_k1,
                                             double lam_nl, double lam_n,
                                             double alpha, double eta);

// Dense verification record for the effective inverse preconditioner
// P^{-1} = alpha V diag(u) V' + eta (I - V V') Q (I - V V'), built from the
// exact eigendecomposition of H (never from estimates).
struct EffectivePreconditionerReport {
  int n = 0;
  int k = 0;
  int l = 0;
  double alpha = 0.0;
  double eta = 0.0;
  Matrix p_inv;
  Vector p_inv_eigenvalues;       // descending
  Vector effective_eigenvalues;   // eigenvalues of P^{-1} H, descending
  double symmetry_residual = 0.0; // max |P^{-1} - P^{-T}|
  double min_p_inv_eigenvalue = 0.0;
  double alpha_eigenspace_residual = 0.0;  // max_i |P^{-1} H v_i - alpha v_i|
  double kappa = 0.0;
  double kappa_tilde = 0.0;
  int case_label = 0;  // 1|2|3 when the improvement condition holds, else 0
  bool improved = false;

  std::string to_text(const std::string& label) const;
  static std::string csv_header();
  std::string to_csv_row(const std::string& label) const;
};

// Identity base preconditioner (GD / Heavy-Ball).
EffectivePreconditionerReport effective_preconditioner_identity(
    const Matrix& hessian, int k, int l, double alpha, double eta);

// Positive diagonal base preconditioner q (Adam-like).
EffectivePreconditionerReport effective_preconditioner_diagonal(
    const Matrix& hessian, const Vector& q, int k, int l, double alpha,
    double eta);

// Closed-form spectrum of the identity-case effective Hessian:
// {alpha with multiplicity k + l} followed by eta * (middle eigenvalues),
// sorted descending.
Vector expected_identity_effective_spectrum(const Vector& spectrum, int k,
                                            int l, double alpha, double eta);

// Spectrum of the unscaled preconditioner V diag(u) V' + (I-VV') Q (I-VV')
// assembled from a spectrum estimate and a base q; used to check that it
// stays inside [1/z, 1/eps_div] along runs.
Vector unscaled_preconditioner_spectrum(const SpectrumEstimate& estimate,
                                        const Vector& q);

}  // namespace fosi
