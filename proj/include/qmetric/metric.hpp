#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "qmetric/linalg.hpp"
#include "qmetric/monotone_function.hpp"
#include "qmetric/operator_mean.hpp"

namespace qmetric {

enum class TraceMode { unit_bounded, unconstrained };

// Strictly positive base point of the metric, with cached spectral data.
// Unit-bounded mode additionally enforces Tr rho <= 1.
class DensityLikeOperator {
public:
    explicit DensityLikeOperator(const Matrix& rho, TraceMode mode = TraceMode::unit_bounded)
        : mode_(mode) {
        require_square(rho, "DensityLikeOperator");
        spectral_ = eig_hermitian(rho);
        rho_ = hermitize(rho);
        trace_ = spectral_.eigenvalues.sum();
        if (!(spectral_.eigenvalues(0) > eig_floor()))
            throw NotStrictlyPositive("DensityLikeOperator: eigenvalue at or below floor");
        if (mode_ == TraceMode::unit_bounded && trace_ > 1.0 + 1e-12)
            throw TraceBoundExceeded("DensityLikeOperator: trace exceeds 1 in unit-bounded mode");
    }

    int dim() const { return static_cast<int>(rho_.rows()); }
    const Matrix& matrix() const { return rho_; }
    const SpectralDecomposition& spectral() const { return spectral_; }
    double trace() const { return trace_; }
    TraceMode mode() const { return mode_; }
    double eig_floor() const { return 1e-12 * trace_; }

private:
    Matrix rho_;
    SpectralDecomposition spectral_;
    double trace_ = 0.0;
    TraceMode mode_;
};

namespace testing {
// Additive perturbation applied to every kernel entry; used by the harness
// mutation check to prove the suites can detect a broken kernel.
inline double& kernel_perturbation() {
    static double value = 0.0;
    return value;
}
} // namespace testing

// Eigenbasis weights c_ij = 1 / (p_j f(p_i / p_j)).
struct MetricKernel {
    RealVector eigenvalues;
    RealMatrix entries;
};

// The two evaluation routes agree algebraically: p_j f(p_i/p_j) = p_i f'(p_j/p_i).
// Picking the route whose ratio is <= 1 keeps f on (0,1] where it is tame.
inline MetricKernel metric_kernel(const RealVector& p, const MonotoneFunction& f) {
    const Eigen::Index n = p.size();
    RealMatrix c(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double v;
            if (p(i) <= p(j))
                v = 1.0 / (p(j) * f.eval(p(i) / p(j)));
            else
                v = 1.0 / (p(i) * f.prime_eval(p(j) / p(i)));
            v += testing::kernel_perturbation();
            if (!std::isfinite(v) || v <= 0.0)
                throw NumericalFailure("metric_kernel: entry not positive finite");
            c(i, j) = v;
        }
    }
    return {p, c};
}

namespace detail {

inline void require_tangent(const DensityLikeOperator& rho, const Matrix& X, const char* who) {
    if (X.rows() != rho.dim() || X.cols() != rho.dim())
        throw DimensionMismatch(std::string(who) + ": tangent dimension mismatch");
    if (!has_finite_entries(X))
        throw NumericalFailure(std::string(who) + ": non-finite tangent entries");
}

// Real part must dominate when X = Y; a sizable imaginary part means a bug.
inline void assert_real_when_diagonal(Complex value, bool same_operand, const char* who) {
    if (!same_operand) return;
    if (std::abs(value.imag()) > 1e-10 * std::max(1.0, std::abs(value.real())))
        throw NumericalFailure(std::string(who) + ": K(X,X) has a non-real value");
}

inline Vector vec(const Matrix& M) {
    return Eigen::Map<const Vector>(M.data(), M.size());
}

} // namespace detail

// ---------------------------------------------------------------------------
// CPTNI metric: kernel path
// ---------------------------------------------------------------------------

// Tr X* [(R_rho f(L_rho R_rho^{-1}))^{-1} Y], evaluated entrywise in the
// eigenbasis of rho through the kernel weights.
inline Complex cptni_metric_kernel(const DensityLikeOperator& rho, const MonotoneFunction& f,
                                   const Matrix& X, const Matrix& Y) {
    detail::require_tangent(rho, X, "cptni_metric_kernel");
    detail::require_tangent(rho, Y, "cptni_metric_kernel");
    const auto& sd = rho.spectral();
    const MetricKernel kernel = metric_kernel(sd.eigenvalues, f);
    const Matrix Xt = sd.eigenvectors.adjoint() * X * sd.eigenvectors;
    const Matrix Yt = sd.eigenvectors.adjoint() * Y * sd.eigenvectors;
    Complex sum = 0.0;
    const Eigen::Index n = Xt.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            sum += std::conj(Xt(i, j)) * Yt(i, j) * kernel.entries(i, j);
    detail::assert_real_when_diagonal(sum, (X - Y).squaredNorm() == 0.0, "cptni_metric_kernel");
    return sum;
}

// ---------------------------------------------------------------------------
// CPTNI metric: superoperator path
// ---------------------------------------------------------------------------

inline constexpr int kSuperopDimCap = 16;

// Left/right multiplication as n^2 x n^2 matrices in the column-major
// vectorization, where vec(A X B) = (B^T (x) A) vec(X).
inline Matrix left_multiplication_superop(const Matrix& rho) {
    const Eigen::Index n = rho.rows();
    return kron(Matrix::Identity(n, n), rho);
}

inline Matrix right_multiplication_superop(const Matrix& rho) {
    const Eigen::Index n = rho.rows();
    return kron(rho.transpose(), Matrix::Identity(n, n));
}

// Assemble R_rho f(L_rho R_rho^{-1}) explicitly and solve against vec(Y).
// Deliberately brute force: this is the oracle the kernel path is checked against.
inline Complex cptni_metric_superop(const DensityLikeOperator& rho, const MonotoneFunction& f,
                                    const Matrix& X, const Matrix& Y, int dim_cap = kSuperopDimCap) {
    detail::require_tangent(rho, X, "cptni_metric_superop");
    detail::require_tangent(rho, Y, "cptni_metric_superop");
    if (rho.dim() > dim_cap)
        throw DimCapExceeded("cptni_metric_superop: dimension exceeds cap");
    const Matrix L = left_multiplication_superop(rho.matrix());
    const Matrix R = right_multiplication_superop(rho.matrix());
    // L and R commute and are positive definite, so Delta is too.
    const Matrix delta = hermitize(L * hermitize(R).llt().solve(Matrix::Identity(R.rows(), R.cols())));
    const Matrix M = hermitize(R * matrix_apply(f, delta));
    const Vector z = M.llt().solve(detail::vec(Y));
    const Complex value = detail::vec(X).dot(z);
    detail::assert_real_when_diagonal(value, (X - Y).squaredNorm() == 0.0, "cptni_metric_superop");
    return value;
}

// ---------------------------------------------------------------------------
// CPTNI metric: operator-mean path
// ---------------------------------------------------------------------------

// Tr X* [(L_rho^{-1} m_h R_rho^{-1}) X] with h(x) = x / f(x); third
// independent path, through the operator-mean module on superoperators.
inline double cptni_metric_meanform(const DensityLikeOperator& rho, const MonotoneFunction& f,
                                    const Matrix& X, int dim_cap = kSuperopDimCap) {
    detail::require_tangent(rho, X, "cptni_metric_meanform");
    if (rho.dim() > dim_cap)
        throw DimCapExceeded("cptni_metric_meanform: dimension exceeds cap");
    const MonotoneFunction h = h_transform(f);
    const Matrix rho_inv =
        apply_spectral(rho.spectral(), [](double x) { return 1.0 / x; });
    const Matrix L_inv = left_multiplication_superop(rho_inv);
    const Matrix R_inv = right_multiplication_superop(rho_inv);
    const Matrix M = mean_strict(L_inv, R_inv, h);
    const Vector x = detail::vec(X);
    const Complex value = x.dot(M * x);
    detail::assert_real_when_diagonal(value, true, "cptni_metric_meanform");
    return value.real();
}

// Sesquilinear extension by polarization (conjugate-linear in X).
inline Complex cptni_metric_meanform(const DensityLikeOperator& rho, const MonotoneFunction& f,
                                     const Matrix& X, const Matrix& Y,
                                     int dim_cap = kSuperopDimCap) {
    const Complex i(0.0, 1.0);
    const double pp = cptni_metric_meanform(rho, f, X + Y, dim_cap);
    const double pm = cptni_metric_meanform(rho, f, X - Y, dim_cap);
    const double qp = cptni_metric_meanform(rho, f, X + i * Y, dim_cap);
    const double qm = cptni_metric_meanform(rho, f, X - i * Y, dim_cap);
    return 0.25 * Complex(pp - pm, qm - qp);
}

// ---------------------------------------------------------------------------
// CPTP metric families
// ---------------------------------------------------------------------------

// Parameters of the trace-sensitive CPTP families: a (possibly t-dependent)
// operator monotone f, a scalar coefficient b(t) on (Tr X)*(Tr Y), and the
// non-negative constant c of the unit-trace variant.
struct CptpMetricSpec {
    std::vector<std::pair<double, MonotoneFunction>> f_table;  // ascending in t
    std::function<double(double)> b = [](double) { return 0.0; };
    double c = 0.0;

    static CptpMetricSpec constant(const MonotoneFunction& f, double b_value = 0.0,
                                   double c_value = 0.0) {
        CptpMetricSpec spec;
        spec.f_table = {{1.0, f}};
        spec.b = [b_value](double) { return b_value; };
        spec.c = c_value;
        return spec;
    }

    // Pointwise affine interpolation between tabulated specs, clamped at the
    // ends. Convex combinations preserve operator monotonicity, and the
    // transpose transform is linear, so the native prime combines the same way.
    MonotoneFunction f_at(double t) const {
        if (f_table.empty()) throw DomainViolation("CptpMetricSpec: empty f table");
        if (f_table.size() == 1 || t <= f_table.front().first) return f_table.front().second;
        if (t >= f_table.back().first) return f_table.back().second;
        std::size_t hi = 1;
        while (f_table[hi].first < t) ++hi;
        const auto& [t0, f0] = f_table[hi - 1];
        const auto& [t1, f1] = f_table[hi];
        const double w = (t - t0) / (t1 - t0);
        MonotoneFunction g;
        g.name = f0.name + "~" + f1.name;
        const auto e0 = f0.eval, e1 = f1.eval;
        const auto p0 = f0.prime_eval, p1 = f1.prime_eval;
        g.eval = [e0, e1, w](double x) { return (1.0 - w) * e0(x) + w * e1(x); };
        g.prime_eval = [p0, p1, w](double x) { return (1.0 - w) * p0(x) + w * p1(x); };
        g.f_at_0 = (1.0 - w) * f0.f_at_0 + w * f1.f_at_0;
        g.claimed_operator_monotone =
            f0.claimed_operator_monotone && f1.claimed_operator_monotone;
        return g;
    }
};

// Unit-trace family: kernel value plus c (Tr X)*(Tr Y).
inline Complex petz_cptp_metric(const DensityLikeOperator& rho, const CptpMetricSpec& spec,
                                const Matrix& X, const Matrix& Y) {
    if (std::abs(rho.trace() - 1.0) > 1e-10)
        throw NotUnitTrace("petz_cptp_metric: base point must have unit trace");
    if (spec.c < 0.0) throw SpecViolation("petz_cptp_metric: c must be non-negative");
    const Complex kernel = cptni_metric_kernel(rho, spec.f_at(rho.trace()), X, Y);
    const Complex value = kernel + spec.c * std::conj(X.trace()) * Y.trace();
    detail::assert_real_when_diagonal(value, (X - Y).squaredNorm() == 0.0, "petz_cptp_metric");
    return value;
}

// Trace-parameterized family: kernel with f_{Tr rho} plus b(Tr rho)(Tr X)*(Tr Y).
// The positivity constraint f_t(1)^{-1} + t b(t) > 0 keeps K(X,X) > 0.
inline Complex kumagai_cptp_metric(const DensityLikeOperator& rho, const CptpMetricSpec& spec,
                                   const Matrix& X, const Matrix& Y) {
    const double t = rho.trace();
    const MonotoneFunction f = spec.f_at(t);
    const double b = spec.b(t);
    if (1.0 / f.eval(1.0) + t * b <= 0.0)
        throw SpecViolation("kumagai_cptp_metric: f_t(1)^{-1} + t b(t) must be positive");
    const Complex kernel = cptni_metric_kernel(rho, f, X, Y);
    const Complex value = kernel + b * std::conj(X.trace()) * Y.trace();
    detail::assert_real_when_diagonal(value, (X - Y).squaredNorm() == 0.0, "kumagai_cptp_metric");
    return value;
}

} // namespace qmetric
