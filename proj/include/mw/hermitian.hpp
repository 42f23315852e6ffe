#pragma once

#include <Eigen/Dense>
#include <complex>

namespace mw {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Relative eigenvalue floor: matrices whose smallest eigenvalue falls below
/// floor * spectral radius are treated as near-singular rather than clamped,
/// so downstream divergence detection sees the blow-up.
inline constexpr double kEigenvalueFloor = 1e-13;

/// Hermitian matrix with conjugate-symmetry enforced on construction
/// (symmetrized; rejects inputs that are not Hermitian within 1e-12 relative).
class HermitianMatrix {
public:
    explicit HermitianMatrix(const CMatrix& m);
    static HermitianMatrix identity(int n);

    int dim() const { return static_cast<int>(m_.rows()); }
    const CMatrix& matrix() const { return m_; }
    Complex entry(int i, int j) const { return m_(i, j); }

    /// Eigenvalues in ascending order.
    RVector eigenvalues() const;
    double min_eigenvalue() const;
    double frobenius_norm() const { return m_.norm(); }
    /// Largest singular value (= largest |eigenvalue| for Hermitian input).
    double spectral_norm() const;

private:
    CMatrix m_;
};

/// Ascending eigensystem of a Hermitian matrix. Columns of `vectors` are the
/// eigenvectors, each with its largest-modulus entry rotated real positive
/// (deterministic branch for eigenvector fields).
struct Eigensystem {
    RVector values;
    CMatrix vectors;
};

Eigensystem hermitian_eigensystem(const HermitianMatrix& m);

/// M^s through the Hermitian eigendecomposition U diag(lambda^s) U*.
/// Throws NearSingularError when the spectrum touches the relative floor.
HermitianMatrix fractional_power(const HermitianMatrix& m, double s);

/// M^s from an already-computed eigensystem.
HermitianMatrix fractional_power(const Eigensystem& es, double s);

/// Largest singular value of a general (non-Hermitian) product matrix.
double spectral_norm(const CMatrix& m);

/// |M^s x| computed from M's eigensystem without forming M^s.
double weighted_vector_norm(const Eigensystem& es, double s, const CVector& x);

}  // namespace mw
