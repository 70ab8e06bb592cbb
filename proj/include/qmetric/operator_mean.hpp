#pragma once

#include <cmath>
#include <vector>

#include "qmetric/linalg.hpp"
#include "qmetric/monotone_function.hpp"
#include "qmetric/random.hpp"

namespace qmetric {

// Shift schedule for extending means to singular operands. Iterates along the
// schedule decrease monotonically in PSD order, so a coarse decade sweep with
// an early-exit Cauchy gap is safe.
struct EpsSchedule {
    std::vector<double> steps;
    double cauchy_rel = 1e-6;

    static EpsSchedule standard() {
        return {{1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}, 1e-6};
    }
};

struct MeanResult {
    Matrix value;
    double cauchy_gap = 0.0;          // ||M_k - M_{k+1}|| at the final step taken
    int steps = 0;                    // schedule entries evaluated
    bool converged = false;           // gap fell under cauchy_rel * scale
    double worst_monotone_margin = 0.0;  // min over steps of min-eig(M_k - M_{k+1}) / scale
};

namespace mean_detail {

// root(A) f(inv_root(A) B inv_root(A)) root(A) with A given spectrally.
// The exact inner spectrum is bounded below by lam_min(B)/lam_max(A); inner
// eigenvalues computed below inner_floor are eigensolver noise (the inner
// product has norm ~ lam_max(B)/lam_min(A), so its small eigenvalues carry
// large absolute error) and are lifted to the floor.
inline Matrix congruence_mean(const SpectralDecomposition& sa, const Matrix& B,
                              const MonotoneFunction& f, double inner_floor) {
    const Matrix root = apply_spectral(sa, [](double x) { return std::sqrt(x); });
    const Matrix inv_root = apply_spectral(sa, [](double x) { return 1.0 / std::sqrt(x); });
    const auto si = eig_hermitian(hermitize(inv_root * B * inv_root));
    const Eigen::Index n = si.eigenvalues.size();
    RealVector mapped(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lam = std::max(si.eigenvalues(i), inner_floor);
        if (lam <= 0.0) throw DomainViolation(f.name + ": operand not strictly positive");
        mapped(i) = f.eval(lam);
    }
    const Matrix inner_f =
        si.eigenvectors * mapped.cast<Complex>().asDiagonal() * si.eigenvectors.adjoint();
    return hermitize(root * inner_f * root);
}

} // namespace mean_detail

// A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2} for strictly positive A, B.
inline Matrix mean_strict(const Matrix& A, const Matrix& B, const MonotoneFunction& f) {
    require_square(A, "mean");
    require_same_shape(A, B, "mean");
    const auto sa = eig_hermitian(A);
    const auto sb = eig_hermitian(B);
    const double floor_a = 1e-12 * std::max(sa.eigenvalues.sum(), 0.0);
    const double floor_b = 1e-12 * std::max(sb.eigenvalues.sum(), 0.0);
    if (sa.eigenvalues(0) <= floor_a)
        throw NotStrictlyPositive("mean: first operand has an eigenvalue at or below floor");
    if (sb.eigenvalues(0) <= floor_b)
        throw NotStrictlyPositive("mean: second operand has an eigenvalue at or below floor");
    return mean_detail::congruence_mean(sa, B, f, 0.0);
}

// Mean of PSD operands as the decreasing limit of mean(A + eps I, B + eps I).
inline MeanResult regularized_mean_detailed(const Matrix& A, const Matrix& B,
                                            const MonotoneFunction& f,
                                            const EpsSchedule& schedule = EpsSchedule::standard()) {
    require_square(A, "regularized_mean");
    require_same_shape(A, B, "regularized_mean");
    if (schedule.steps.empty()) throw DomainViolation("regularized_mean: empty schedule");
    if (!is_psd(A) || !is_psd(B))
        throw DomainViolation("regularized_mean: operands must be positive semidefinite");
    const Eigen::Index n = A.rows();
    const Matrix id = Matrix::Identity(n, n);
    const double scale = std::max({1.0, spectral_norm(A), spectral_norm(B)});
    const auto sa = eig_hermitian(A);
    const auto sb = eig_hermitian(B);
    const double b_min = std::max(0.0, sb.eigenvalues(0));
    const double a_max = std::max(0.0, sa.eigenvalues(sa.eigenvalues.size() - 1));

    MeanResult out;
    Matrix prev;
    for (double eps : schedule.steps) {
        SpectralDecomposition sa_eps = sa;
        sa_eps.eigenvalues.array() += eps;
        // Certified bound for the shifted inner spectrum, kept strictly under
        // the exact value so lifting noisy eigenvalues to it stays sound.
        const double inner_floor = 0.5 * (b_min + eps) / (a_max + eps);
        const Matrix cur = mean_detail::congruence_mean(sa_eps, B + eps * id, f, inner_floor);
        ++out.steps;
        if (out.steps > 1) {
            const Matrix diff = prev - cur;
            const double gap = spectral_norm(diff);
            out.cauchy_gap = gap;
            const double mono = min_eigenvalue(diff);
            out.worst_monotone_margin = std::min(out.worst_monotone_margin, mono / scale);
            // Gap growth alone proves nothing: nearly-aligned rank-deficient
            // operands sit on a plateau near their aligned-case value before
            // descending to the range-intersection limit, so decade gaps can
            // spike mid-schedule. What a true mean cannot do is grow: shrinking
            // eps shrinks both operands, so exact iterates decrease in PSD
            // order. Roundoff at the smallest shifts can fake an upward step of
            // order u * scale / eps^(3/2) (the A^(-1/2) congruence and f' at
            // the inner floor each contribute ~eps^(-1/2)), hence the flat
            // 0.05 * scale allowance; genuine non-means grow geometrically in
            // 1/eps and clear it within a step or two.
            if (mono < -(0.5 * spectral_norm(prev) + 0.05 * scale))
                throw NonConvergence(
                    "regularized_mean: iterates increased in PSD order by " +
                    std::to_string(-mono) + ", no decreasing limit for these operands");
        }
        prev = cur;
    }
    out.value = prev;
    out.converged = out.cauchy_gap <= schedule.cauchy_rel * scale;
    return out;
}

inline Matrix regularized_mean(const Matrix& A, const Matrix& B, const MonotoneFunction& f,
                               const EpsSchedule& schedule = EpsSchedule::standard()) {
    return regularized_mean_detailed(A, B, f, schedule).value;
}

// Strict formula when both operands are safely positive, shifted limit otherwise.
inline Matrix mean(const Matrix& A, const Matrix& B, const MonotoneFunction& f) {
    require_square(A, "mean");
    require_same_shape(A, B, "mean");
    const auto sa = eig_hermitian(A);
    const auto sb = eig_hermitian(B);
    const bool strict_a = sa.eigenvalues(0) > 1e-12 * std::max(sa.eigenvalues.sum(), 0.0);
    const bool strict_b = sb.eigenvalues(0) > 1e-12 * std::max(sb.eigenvalues.sum(), 0.0);
    if (strict_a && strict_b) return mean_strict(A, B, f);
    return regularized_mean(A, B, f);
}

// ---------------------------------------------------------------------------
// Randomized checkers
// ---------------------------------------------------------------------------

// A m_f B = B m_{f'} A on strictly positive pairs.
inline CheckReport check_transposition(const MonotoneFunction& f, int trials, int dim,
                                       std::uint64_t rng_seed) {
    const MonotoneFunction fp = prime_transform(f);
    CheckReport report;
    report.name = f.name + " transposition";
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::substream(rng_seed, static_cast<std::uint64_t>(t));
        const Matrix A = random_strictly_positive(dim, rng);
        const Matrix B = random_strictly_positive(dim, rng);
        const Matrix lhs = mean_strict(A, B, f);
        const Matrix rhs = mean_strict(B, A, fp);
        const double scale = std::max({1.0, spectral_norm(lhs), spectral_norm(rhs)});
        report.record(-spectral_norm(lhs - rhs) / scale, 1e-9);
    }
    return report;
}

// A1 <= A2 and B1 <= B2 imply A1 m_f B1 <= A2 m_f B2.
inline CheckReport check_joint_monotonicity(const MonotoneFunction& f, int trials, int dim,
                                            std::uint64_t rng_seed) {
    CheckReport report;
    report.name = f.name + " joint monotonicity";
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::substream(rng_seed, static_cast<std::uint64_t>(t));
        const Matrix A1 = random_strictly_positive(dim, rng);
        const Matrix B1 = random_strictly_positive(dim, rng);
        const int rank_p = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(dim)));
        const int rank_q = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(dim)));
        const Matrix A2 = A1 + random_psd(dim, rng, rank_p);
        const Matrix B2 = B1 + random_psd(dim, rng, rank_q);
        const Matrix lo = mean_strict(A1, B1, f);
        const Matrix hi = mean_strict(A2, B2, f);
        const double scale = std::max(1.0, spectral_norm(hi));
        report.record(min_eigenvalue(hermitize(hi - lo)) / scale, kCheckSlack);
    }
    return report;
}

// Joint monotonicity with rank-deficient lower operands. The small side
// goes through the shifted limit; its last iterate uses the final epsilon
// shift, which stays below the strictly positive increment, so the
// comparison against the exact upper mean remains valid.
inline CheckReport check_joint_monotonicity_regularized(const MonotoneFunction& f, int trials,
                                                        int dim, std::uint64_t rng_seed) {
    CheckReport report;
    report.name = f.name + " joint monotonicity (regularized)";
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::substream(rng_seed, static_cast<std::uint64_t>(t));
        const int rank_a = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(dim - 1)));
        const int rank_b = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(dim - 1)));
        const Matrix A1 = random_psd(dim, rng, rank_a);
        const Matrix B1 = random_psd(dim, rng, rank_b);
        const Matrix A2 = A1 + random_strictly_positive(dim, rng);
        const Matrix B2 = B1 + random_strictly_positive(dim, rng);
        const Matrix lo = mean(A1, B1, f);
        const Matrix hi = mean_strict(A2, B2, f);
        const double scale = std::max(1.0, spectral_norm(hi));
        report.record(min_eigenvalue(hermitize(hi - lo)) / scale, kCheckSlack);
    }
    return report;
}

// C (A m_f B) C* <= (C A C*) m_f (C B C*) for arbitrary rectangular C.
// Operands are sampled strictly positive so the inner mean is exact; the
// conjugated mean may still need the shifted limit (m > n), which only
// enlarges the large side of the inequality.
inline CheckReport check_mean_transformer(const MonotoneFunction& f, int trials, int n, int m,
                                          std::uint64_t rng_seed) {
    CheckReport report;
    report.name = f.name + " mean transformer";
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::substream(rng_seed, static_cast<std::uint64_t>(t));
        const Matrix A = random_strictly_positive(n, rng);
        const Matrix B = random_strictly_positive(n, rng);
        const Matrix C = random_complex_matrix(m, n, rng);
        const Matrix inner = mean_strict(A, B, f);
        const Matrix lhs = hermitize(C * inner * C.adjoint());
        const Matrix rhs = mean(hermitize(C * A * C.adjoint()), hermitize(C * B * C.adjoint()), f);
        const double scale = std::max({1.0, spectral_norm(lhs), spectral_norm(rhs)});
        report.record(min_eigenvalue(hermitize(rhs - lhs)) / scale, 1e-7);
    }
    return report;
}

} // namespace qmetric
