#include "mw/hermitian.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "mw/errors.hpp"

namespace mw {

HermitianMatrix::HermitianMatrix(const CMatrix& m) {
    if (m.rows() != m.cols() || m.rows() < 1)
        throw ShapeMismatchError("HermitianMatrix requires a square matrix");
    const double scale = m.norm();
    const double dev = (m - m.adjoint()).norm();
    if (dev > 1e-12 * std::max(scale, 1.0)) {
        std::ostringstream os;
        os << "matrix is not Hermitian: deviation " << dev << " at scale " << scale;
        throw ShapeMismatchError(os.str());
    }
    m_ = 0.5 * (m + m.adjoint().eval());
}

HermitianMatrix HermitianMatrix::identity(int n) {
    return HermitianMatrix(CMatrix::Identity(n, n));
}

RVector HermitianMatrix::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

double HermitianMatrix::min_eigenvalue() const { return eigenvalues().minCoeff(); }

double HermitianMatrix::spectral_norm() const {
    return eigenvalues().cwiseAbs().maxCoeff();
}

Eigensystem hermitian_eigensystem(const HermitianMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m.matrix());
    Eigensystem es;
    es.values = solver.eigenvalues();
    es.vectors = solver.eigenvectors();
    // phase fix: largest-modulus entry real positive
    for (int j = 0; j < es.vectors.cols(); ++j) {
        int imax = 0;
        double best = 0;
        for (int i = 0; i < es.vectors.rows(); ++i) {
            const double a = std::abs(es.vectors(i, j));
            if (a > best) {
                best = a;
                imax = i;
            }
        }
        const Complex z = es.vectors(imax, j);
        if (std::abs(z) > 0) es.vectors.col(j) *= std::conj(z) / std::abs(z);
    }
    return es;
}

HermitianMatrix fractional_power(const Eigensystem& es, double s) {
    const double lmax = es.values.cwiseAbs().maxCoeff();
    const double lmin = es.values.minCoeff();
    if (!(lmin > kEigenvalueFloor * lmax)) {
        std::ostringstream os;
        os << "near-singular matrix: min eigenvalue " << lmin << " below relative floor "
           << kEigenvalueFloor << " * " << lmax;
        throw NearSingularError(os.str(), lmin);
    }
    RVector powered(es.values.size());
    for (int i = 0; i < es.values.size(); ++i) powered[i] = std::pow(es.values[i], s);
    CMatrix out = es.vectors * powered.asDiagonal() * es.vectors.adjoint();
    return HermitianMatrix(0.5 * (out + out.adjoint().eval()));
}

HermitianMatrix fractional_power(const HermitianMatrix& m, double s) {
    return fractional_power(hermitian_eigensystem(m), s);
}

double spectral_norm(const CMatrix& m) {
    // largest singular value via the Hermitian eigenvalues of M* M
    const CMatrix mm = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(mm, Eigen::EigenvaluesOnly);
    const double top = solver.eigenvalues().maxCoeff();
    return std::sqrt(std::max(top, 0.0));
}

double weighted_vector_norm(const Eigensystem& es, double s, const CVector& x) {
    const CVector g = es.vectors.adjoint() * x;
    double acc = 0;
    for (int i = 0; i < es.values.size(); ++i)
        acc += std::pow(es.values[i], 2.0 * s) * std::norm(g[i]);
    return std::sqrt(acc);
}

}  // namespace mw
