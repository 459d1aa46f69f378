#include "fosi/analysis.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fosi/trace.hpp"

namespace fosi {

ConditionNumberReport condition_number_cases(double lam_1, double lam_k1,
                                             double lam_nl, double lam_n,
                                             double alpha, double eta) {
  if (!(lam_1 >= lam_k1 && lam_k1 >= lam_nl && lam_nl >= lam_n && lam_n > 0.0))
    throw std::invalid_argument(
        "condition_number_cases: need lam_1 >= lam_{k+1} >= lam_{n-l} >= lam_n > 0");
  if (!(alpha > 0.0) || !(eta > 0.0))
    throw std::invalid_argument("condition_number_cases: alpha, eta must be positive");

  ConditionNumberReport report;
  report.kappa = lam_1 / lam_n;
  if (alpha < eta * lam_nl) {
    report.case_label = 1;
    report.kappa_tilde = eta * lam_k1 / alpha;
  } else if (alpha <= eta * lam_k1) {
    report.case_label = 2;
    report.kappa_tilde = lam_k1 / lam_nl;
  } else {
    report.case_label = 3;
    report.kappa_tilde = alpha / (eta * lam_nl);
  }
  report.improved = report.kappa_tilde <= report.kappa;
  return report;
}

namespace {

// Symmetric eigenvalues of P^{-1} H via the similar matrix
// P^{-1/2} H P^{-1/2}; requires P^{-1} positive definite.
Vector effective_spectrum(const Matrix& p_inv, const Matrix& hessian,
                          const Vector& p_inv_eigenvalues,
                          const Matrix& p_inv_eigenvectors) {
  if (p_inv_eigenvalues[p_inv_eigenvalues.size() - 1] <= 0.0) {
    // Not PD: fall back to the (then possibly complex) product's symmetric
    // part; callers surface min_p_inv_eigenvalue <= 0 separately.
    const Matrix product = p_inv * hessian;
    return jacobi_eigenvalues((product + product.transpose()) / 2.0);
  }
  const Matrix sqrt_p_inv = p_inv_eigenvectors *
                            p_inv_eigenvalues.array().sqrt().matrix().asDiagonal() *
                            p_inv_eigenvectors.transpose();
  return jacobi_eigenvalues(sqrt_p_inv * hessian * sqrt_p_inv);
}

EffectivePreconditionerReport build_report(const Matrix& hessian,
                                           const Vector* q, int k, int l,
                                           double alpha, double eta) {
  const Eigen::Index n = hessian.rows();
  if (k < 0 || l < 0 || k + l < 1 || k + l > n)
    throw std::invalid_argument("effective_preconditioner: bad k, l");
  if (!(alpha > 0.0) || !(eta > 0.0))
    throw std::invalid_argument("effective_preconditioner: alpha, eta must be positive");
  if (n > 200)
    throw std::invalid_argument("effective_preconditioner: dense analysis capped at n = 200");
  if (q && (q->size() != n || q->minCoeff() <= 0.0))
    throw std::invalid_argument("effective_preconditioner: q must be positive, length n");

  Vector lam;
  Matrix v;
  jacobi_eigh(hessian, lam, v);

  Matrix v_hat(n, k + l);
  Vector u(k + l);
  for (int i = 0; i < k; ++i) {
    v_hat.col(i) = v.col(i);
    u[i] = 1.0 / std::max(std::abs(lam[i]), kEseDivisorFloor);
  }
  for (int i = 0; i < l; ++i) {
    v_hat.col(k + i) = v.col(n - l + i);
    u[k + i] = 1.0 / std::max(std::abs(lam[n - l + i]), kEseDivisorFloor);
  }

  const Matrix projector = Matrix::Identity(n, n) - v_hat * v_hat.transpose();
  Matrix complement_part;
  if (q) {
    complement_part = projector * q->asDiagonal() * projector;
  } else {
    complement_part = projector;
  }

  EffectivePreconditionerReport report;
  report.n = static_cast<int>(n);
  report.k = k;
  report.l = l;
  report.alpha = alpha;
  report.eta = eta;
  report.p_inv = alpha * (v_hat * u.asDiagonal() * v_hat.transpose()) +
                 eta * complement_part;
  report.symmetry_residual =
      (report.p_inv - report.p_inv.transpose()).cwiseAbs().maxCoeff();

  Matrix p_inv_vectors;
  jacobi_eigh((report.p_inv + report.p_inv.transpose()) / 2.0,
              report.p_inv_eigenvalues, p_inv_vectors);
  report.min_p_inv_eigenvalue =
      report.p_inv_eigenvalues[report.p_inv_eigenvalues.size() - 1];

  report.effective_eigenvalues = effective_spectrum(
      report.p_inv, hessian, report.p_inv_eigenvalues, p_inv_vectors);

  double residual = 0.0;
  for (Eigen::Index i = 0; i < v_hat.cols(); ++i) {
    const Vector col = v_hat.col(i);
    residual = std::max(
        residual, (report.p_inv * (hessian * col) - alpha * col).norm());
  }
  report.alpha_eigenspace_residual = residual;

  report.kappa = lam[0] / lam[n - 1];
  report.kappa_tilde =
      report.effective_eigenvalues[0] /
      report.effective_eigenvalues[report.effective_eigenvalues.size() - 1];

  // The closed-form case classification covers the identity base optimizer.
  if (!q) {
    const ConditionNumberReport cases = condition_number_cases(
        lam[0], lam[k], lam[n - l - 1], lam[n - 1], alpha, eta);
    report.improved = cases.improved;
    report.case_label = cases.improved ? cases.case_label : 0;
  } else {
    report.improved = report.kappa_tilde <= report.kappa;
    report.case_label = 0;
  }
  return report;
}

}  // namespace

EffectivePreconditionerReport effective_preconditioner_identity(
    const Matrix& hessian, int k, int l, double alpha, double eta) {
  return build_report(hessian, nullptr, k, l, alpha, eta);
}

EffectivePreconditionerReport effective_preconditioner_diagonal(
    const Matrix& hessian, const Vector& q, int k, int l, double alpha,
    double eta) {
  return build_report(hessian, &q, k, l, alpha, eta);
}

Vector expected_identity_effective_spectrum(const Vector& spectrum, int k,
                                            int l, double alpha, double eta) {
  const Eigen::Index n = spectrum.size();
  Vector expected(n);
  for (int i = 0; i < k + l; ++i) expected[i] = alpha;
  for (Eigen::Index i = k; i < n - l; ++i) expected[k + l + (i - k)] = eta * spectrum[i];
  std::sort(expected.data(), expected.data() + n, std::greater<double>());
  return expected;
}

Vector unscaled_preconditioner_spectrum(const SpectrumEstimate& estimate,
                                        const Vector& q) {
  const Eigen::Index n = estimate.v_hat.rows();
  const Matrix projector =
      Matrix::Identity(n, n) - estimate.v_hat * estimate.v_hat.transpose();
  const Matrix p_inv =
      estimate.v_hat * estimate.u.asDiagonal() * estimate.v_hat.transpose() +
      projector * q.asDiagonal() * projector;
  return jacobi_eigenvalues((p_inv + p_inv.transpose()) / 2.0);
}

std::string EffectivePreconditionerReport::to_text(const std::string& label) const {
  std::ostringstream os;
  os << "effective preconditioner [" << label << "]\n"
     << "  n=" << n << " k=" << k << " l=" << l << " alpha=" << alpha
     << " eta=" << eta << "\n"
     << "  symmetry residual:     " << symmetry_residual << "\n"
     << "  min eigenvalue of P^-1: " << min_p_inv_eigenvalue << "\n"
     << "  alpha-eigenspace residual: " << alpha_eigenspace_residual << "\n"
     << "  kappa:  " << kappa << "\n"
     << "  kappa~: " << kappa_tilde << "\n"
     << "  case:   " << (case_label ? std::to_string(case_label) : "none")
     << "  improved: " << (improved ? "yes" : "no") << "\n";
  return os.str();
}

std::string EffectivePreconditionerReport::csv_header() {
  return "label,n,k,l,alpha,eta,kappa,kappa_tilde,case,improved,"
         "symmetry_residual,min_p_inv_eigenvalue,alpha_eigenspace_residual";
}

std::string EffectivePreconditionerReport::to_csv_row(
    const std::string& label) const {
  std::ostringstream os;
  os << label << ',' << n << ',' << k << ',' << l << ','
     << format_double(alpha) << ',' << format_double(eta) << ','
     << format_double(kappa) << ',' << format_double(kappa_tilde) << ','
     << (case_label ? std::to_string(case_label) : "none") << ','
     << (improved ? 1 : 0) << ',' << format_double(symmetry_residual) << ','
     << format_double(min_p_inv_eigenvalue) << ','
     << format_double(alpha_eigenspace_residual);
  return os.str();
}

}  // namespace fosi
