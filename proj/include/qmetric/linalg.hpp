#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "qmetric/errors.hpp"

namespace qmetric {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Tangent vectors at a base point are arbitrary complex matrices.
using TangentVector = Matrix;

// ---------------------------------------------------------------------------
// Basic predicates and tolerances
// ---------------------------------------------------------------------------

inline double max_abs(const Matrix& M) {
    return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

inline bool has_finite_entries(const Matrix& M) {
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            if (!std::isfinite(M(i, j).real()) || !std::isfinite(M(i, j).imag()))
                return false;
    return true;
}

// Hermiticity tolerance, relative to the largest entry.
inline double herm_tol(const Matrix& M) {
    return 1e-12 * std::max(1.0, max_abs(M));
}

inline bool is_hermitian(const Matrix& M, double tol) {
    if (M.rows() != M.cols()) return false;
    return (M - M.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_hermitian(const Matrix& M) { return is_hermitian(M, herm_tol(M)); }

inline Matrix hermitize(const Matrix& M) { return 0.5 * (M + M.adjoint()); }

inline void require_square(const Matrix& M, const char* who) {
    if (M.rows() != M.cols())
        throw DimensionMismatch(std::string(who) + ": matrix is not square (" +
                                std::to_string(M.rows()) + "x" + std::to_string(M.cols()) + ")");
}

inline void require_same_shape(const Matrix& A, const Matrix& B, const char* who) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw DimensionMismatch(std::string(who) + ": shape mismatch");
}

// Largest singular value.
inline double spectral_norm(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition and spectral calculus
// ---------------------------------------------------------------------------

struct SpectralDecomposition {
    RealVector eigenvalues;  // ascending
    Matrix eigenvectors;     // unitary, columns matching eigenvalues

    Matrix reconstruct() const {
        return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
    }
};

inline SpectralDecomposition eig_hermitian(const Matrix& M) {
    require_square(M, "eig_hermitian");
    if (!has_finite_entries(M)) throw NumericalFailure("eig_hermitian: non-finite entries");
    if (!is_hermitian(M, herm_tol(M)))
        throw NonHermitian("eig_hermitian: asymmetry exceeds tolerance");
    // Symmetrize first; inputs within herm_tol may still carry tiny skew parts.
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(M));
    if (solver.info() != Eigen::Success)
        throw NumericalFailure("eig_hermitian: eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

template <typename F>
Matrix apply_spectral(const SpectralDecomposition& sd, F&& f) {
    RealVector mapped(sd.eigenvalues.size());
    for (Eigen::Index i = 0; i < mapped.size(); ++i) mapped(i) = f(sd.eigenvalues(i));
    return sd.eigenvectors * mapped.cast<Complex>().asDiagonal() * sd.eigenvectors.adjoint();
}

// f applied to a Hermitian matrix through its spectral decomposition.
template <typename F>
Matrix matrix_function(const Matrix& M, F&& f) {
    return apply_spectral(eig_hermitian(M), std::forward<F>(f));
}

inline double min_eigenvalue(const Matrix& M) { return eig_hermitian(M).eigenvalues(0); }

inline double max_eigenvalue(const Matrix& M) {
    const auto sd = eig_hermitian(M);
    return sd.eigenvalues(sd.eigenvalues.size() - 1);
}

// ---------------------------------------------------------------------------
// Positivity checks
// ---------------------------------------------------------------------------

inline double default_positivity_tol(const Matrix& M) {
    return 1e-9 * std::max(1.0, spectral_norm(M));
}

inline bool is_psd(const Matrix& M, double tol) { return min_eigenvalue(M) >= -tol; }

inline bool is_psd(const Matrix& M) { return is_psd(M, default_positivity_tol(M)); }

inline bool is_strictly_positive(const Matrix& M, double tol) {
    return min_eigenvalue(M) >= tol;
}

inline bool is_strictly_positive(const Matrix& M) {
    return is_strictly_positive(M, default_positivity_tol(M));
}

// ---------------------------------------------------------------------------
// Tensor and block constructions
// ---------------------------------------------------------------------------

inline Matrix kron(const Matrix& A, const Matrix& B) {
    Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

inline Matrix direct_sum(const Matrix& A, const Matrix& B) {
    Matrix out = Matrix::Zero(A.rows() + B.rows(), A.cols() + B.cols());
    out.topLeftCorner(A.rows(), A.cols()) = A;
    out.bottomRightCorner(B.rows(), B.cols()) = B;
    return out;
}

// E_ij with a single unit entry; zero-based indices.
inline Matrix matrix_unit(int n, int i, int j) {
    if (n <= 0 || i < 0 || j < 0 || i >= n || j >= n)
        throw DimensionMismatch("matrix_unit: index out of range");
    Matrix out = Matrix::Zero(n, n);
    out(i, j) = 1.0;
    return out;
}

// Trace over the second factor of C^n (x) C^m: (out)_ab = sum_k M_{(a,k),(b,k)}.
inline Matrix partial_trace_second(const Matrix& M, int m) {
    require_square(M, "partial_trace_second");
    if (m <= 0 || M.rows() % m != 0)
        throw DimensionMismatch("partial_trace_second: dim not divisible by m");
    const Eigen::Index n = M.rows() / m;
    Matrix out = Matrix::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            for (Eigen::Index k = 0; k < m; ++k) out(a, b) += M(a * m + k, b * m + k);
    return out;
}

// ---------------------------------------------------------------------------
// Schur complement
// ---------------------------------------------------------------------------

// Lower Schur complement C - B A^{-1} B* of the Hermitian block [[A, B*], [B, C]],
// split at half the dimension. The block is PSD iff A >= 0 and the result is PSD.
inline Matrix schur_complement_lower(const Matrix& block) {
    require_square(block, "schur_complement_lower");
    if (block.rows() % 2 != 0)
        throw DimensionMismatch("schur_complement_lower: odd block dimension");
    const Eigen::Index n = block.rows() / 2;
    const Matrix A = block.topLeftCorner(n, n);
    const Matrix B = block.bottomLeftCorner(n, n);
    const Matrix C = block.bottomRightCorner(n, n);
    if (!is_strictly_positive(hermitize(A)))
        throw SingularBlock("schur_complement_lower: top-left block not strictly positive");
    const Matrix AinvBadj = hermitize(A).llt().solve(B.adjoint());
    return hermitize(C - B * AinvBadj);
}

} // namespace qmetric
