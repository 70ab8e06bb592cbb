#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qmetric/linalg.hpp"
#include "qmetric/random.hpp"

namespace qmetric {

enum class ChannelClass { cptp, cptni_strict, invalid };

inline std::string to_string(ChannelClass c) {
    switch (c) {
        case ChannelClass::cptp: return "CPTP";
        case ChannelClass::cptni_strict: return "CPTNI-strict";
        default: return "invalid";
    }
}

// Classification threshold on || sum A*A - I || and max-eig(sum A*A - I).
inline constexpr double kChannelClassTol = 1e-10;

// Operator-sum map X -> sum_i A_i X A_i*. Immutable after construction;
// the Kraus gram sum and the CPTP/CPTNI classification are cached.
class KrausChannel {
public:
    explicit KrausChannel(std::vector<Matrix> ops) : ops_(std::move(ops)) {
        if (ops_.empty()) throw DimensionMismatch("KrausChannel: empty Kraus list");
        out_dim_ = static_cast<int>(ops_.front().rows());
        in_dim_ = static_cast<int>(ops_.front().cols());
        if (out_dim_ == 0 || in_dim_ == 0)
            throw DimensionMismatch("KrausChannel: zero-dimensional Kraus operator");
        gram_ = Matrix::Zero(in_dim_, in_dim_);
        for (const auto& A : ops_) {
            if (A.rows() != out_dim_ || A.cols() != in_dim_)
                throw DimensionMismatch("KrausChannel: inconsistent Kraus shapes");
            if (!has_finite_entries(A))
                throw NumericalFailure("KrausChannel: non-finite Kraus entries");
            gram_ += A.adjoint() * A;
        }
        gram_ = hermitize(gram_);
        const Matrix defect = gram_ - Matrix::Identity(in_dim_, in_dim_);
        defect_norm_ = spectral_norm(defect);
        defect_max_eig_ = max_eigenvalue(defect);
        if (defect_norm_ <= kChannelClassTol)
            class_ = ChannelClass::cptp;
        else if (defect_max_eig_ <= kChannelClassTol)
            class_ = ChannelClass::cptni_strict;
        else
            class_ = ChannelClass::invalid;
    }

    int in_dim() const { return in_dim_; }
    int out_dim() const { return out_dim_; }
    const std::vector<Matrix>& kraus() const { return ops_; }
    const Matrix& gram() const { return gram_; }
    ChannelClass classification() const { return class_; }
    bool is_cptni() const { return class_ != ChannelClass::invalid; }
    double defect_norm() const { return defect_norm_; }
    double defect_max_eig() const { return defect_max_eig_; }

    Matrix apply(const Matrix& X) const {
        if (X.rows() != in_dim_ || X.cols() != in_dim_)
            throw DimensionMismatch("KrausChannel::apply: operand must be in_dim x in_dim");
        Matrix out = Matrix::Zero(out_dim_, out_dim_);
        for (const auto& A : ops_) out += A * X * A.adjoint();
        return out;
    }

    // Hilbert-Schmidt adjoint: <Y, T(X)> = <T*(Y), X>.
    Matrix adjoint_apply(const Matrix& Y) const {
        if (Y.rows() != out_dim_ || Y.cols() != out_dim_)
            throw DimensionMismatch("KrausChannel::adjoint_apply: operand must be out_dim x out_dim");
        Matrix out = Matrix::Zero(in_dim_, in_dim_);
        for (const auto& A : ops_) out += A.adjoint() * Y * A;
        return out;
    }

private:
    std::vector<Matrix> ops_;
    int in_dim_ = 0;
    int out_dim_ = 0;
    Matrix gram_;
    double defect_norm_ = 0.0;
    double defect_max_eig_ = 0.0;
    ChannelClass class_ = ChannelClass::invalid;
};

inline KrausChannel identity_channel(int n) {
    return KrausChannel({Matrix::Identity(n, n)});
}

// C^2 -> C^2 (x) C^m, E -> E (x) I/m. Kraus list {(1/sqrt m) I_2 (x) |k>}.
inline KrausChannel embed_channel_S1(int m) {
    if (m < 1) throw DimensionMismatch("embed_channel_S1: m must be >= 1");
    std::vector<Matrix> ops;
    const double w = 1.0 / std::sqrt(static_cast<double>(m));
    for (int k = 0; k < m; ++k) {
        Matrix ket = Matrix::Zero(m, 1);
        ket(k, 0) = 1.0;
        ops.push_back(w * kron(Matrix::Identity(2, 2), ket));
    }
    return KrausChannel(std::move(ops));
}

// C^2 (x) C^m -> C^2, trace over the second factor. Kraus list {I_2 (x) <k|}.
inline KrausChannel partial_trace_channel_S2(int m) {
    if (m < 1) throw DimensionMismatch("partial_trace_channel_S2: m must be >= 1");
    std::vector<Matrix> ops;
    for (int k = 0; k < m; ++k) {
        Matrix bra = Matrix::Zero(1, m);
        bra(0, k) = 1.0;
        ops.push_back(kron(Matrix::Identity(2, 2), bra));
    }
    return KrausChannel(std::move(ops));
}

// C^n -> C^2, keep the leading 2x2 corner. Trace non-increasing for n > 2.
inline KrausChannel corner_channel_T1(int n) {
    if (n < 2) throw DimensionMismatch("corner_channel_T1: n must be >= 2");
    Matrix P = Matrix::Zero(2, n);
    P(0, 0) = 1.0;
    P(1, 1) = 1.0;
    return KrausChannel({P});
}

// C^2 -> C^n, embed into the leading corner. Isometry, hence CPTP.
inline KrausChannel inject_channel_T2(int n) {
    if (n < 2) throw DimensionMismatch("inject_channel_T2: n must be >= 2");
    Matrix J = Matrix::Zero(n, 2);
    J(0, 0) = 1.0;
    J(1, 1) = 1.0;
    return KrausChannel({J});
}

// Extend a CPTNI map to the CPTP map rho -> T(rho) + (Tr rho - Tr T(rho)) sigma
// by adding Kraus operators sqrt(lambda_s) |e_s><t| sqrt(I - sum A*A), where
// sigma = sum_s lambda_s |e_s><e_s| and {<t|} runs over the computational
// basis of the input space.
inline KrausChannel complete_to_cptp(const KrausChannel& T, const Matrix& sigma) {
    if (sigma.rows() != T.out_dim() || sigma.cols() != T.out_dim())
        throw DimensionMismatch("complete_to_cptp: sigma must live on the output space");
    const auto sd = eig_hermitian(sigma);
    if (sd.eigenvalues(0) < -default_positivity_tol(sigma))
        throw DomainViolation("complete_to_cptp: sigma is not positive semidefinite");
    if (std::abs(sigma.trace().real() - 1.0) > 1e-10 || std::abs(sigma.trace().imag()) > 1e-10)
        throw NotUnitTrace("complete_to_cptp: sigma must have unit trace");

    const int n = T.in_dim();
    const Matrix defect = Matrix::Identity(n, n) - T.gram();
    const auto dd = eig_hermitian(defect);
    if (dd.eigenvalues(0) < -kChannelClassTol)
        throw NotCptni("complete_to_cptp: channel increases trace");
    const Matrix root_defect =
        apply_spectral(dd, [](double x) { return std::sqrt(std::max(x, 0.0)); });

    std::vector<Matrix> ops = T.kraus();
    for (Eigen::Index s = 0; s < sd.eigenvalues.size(); ++s) {
        const double lam = std::max(sd.eigenvalues(s), 0.0);
        if (lam == 0.0) continue;
        const double w = std::sqrt(lam);
        for (int t = 0; t < n; ++t) {
            Matrix B = w * sd.eigenvectors.col(s) * root_defect.row(t);
            if (B.norm() >= 1e-14) ops.push_back(std::move(B));
        }
    }
    return KrausChannel(std::move(ops));
}

// Haar isometry C^n -> C^{mk} cut into k blocks of m rows, all shrunk by
// sqrt(1 - slack * u). CPTP at slack 0, strictly trace-decreasing otherwise.
inline KrausChannel random_cptni(int n, int m, int k, double slack, Rng& rng) {
    if (k < 1) throw DimensionMismatch("random_cptni: need at least one Kraus operator");
    if (m * k < n) throw DimensionMismatch("random_cptni: m*k must be >= n for an isometry");
    if (slack < 0.0 || slack > 1.0) throw DomainViolation("random_cptni: slack outside [0,1]");
    const Matrix V = random_isometry(m * k, n, rng);
    const double scale = (slack == 0.0) ? 1.0 : std::sqrt(1.0 - slack * rng.uniform());
    std::vector<Matrix> ops;
    ops.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) ops.push_back(scale * V.middleRows(i * m, m));
    return KrausChannel(std::move(ops));
}

// Choi matrix sum_ij E_ij (x) action(E_ij); PSD iff the map is completely positive.
inline Matrix choi_matrix(int n, const std::function<Matrix(const Matrix&)>& action) {
    const Matrix probe = action(matrix_unit(n, 0, 0));
    const Eigen::Index m = probe.rows();
    Matrix choi = Matrix::Zero(n * m, n * m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            choi.block(i * m, j * m, m, m) = action(matrix_unit(n, i, j));
    return choi;
}

inline Matrix choi_matrix(const KrausChannel& T) {
    return choi_matrix(T.in_dim(), [&T](const Matrix& X) { return T.apply(X); });
}

} // namespace qmetric
