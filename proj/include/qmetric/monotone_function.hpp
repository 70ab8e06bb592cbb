#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qmetric/linalg.hpp"
#include "qmetric/random.hpp"

namespace qmetric {

// Scalar function f:(0,inf)->(0,inf) together with its extension f(0+) and the
// algebraic form of its transpose x*f(1/x). prime_eval lets kernel code keep
// f's argument inside (0,1] instead of evaluating at huge ratios.
struct MonotoneFunction {
    std::string name;
    std::function<double(double)> eval;
    double f_at_0 = 0.0;
    bool claimed_operator_monotone = false;
    std::function<double(double)> prime_eval;
};

// ---------------------------------------------------------------------------
// Boundary extrapolation
// ---------------------------------------------------------------------------

struct ZeroExtrapolation {
    double value = 0.0;
    double gap = std::numeric_limits<double>::infinity();
    bool certified = false;
};

// Limit of eval at 0+ via eps = 2^-k, k = 10..40. Two candidate sequences are
// tracked: the raw values (good for geometric decay) and a c + b/k model fit
// (good for logarithmic decay, e.g. 1/ln eps). Whichever has the smaller
// final Cauchy gap wins; certification needs that gap <= 1e-6 relative.
inline ZeroExtrapolation extrapolate_at_zero(const std::function<double(double)>& eval) {
    constexpr int k_min = 10, k_max = 40;
    const double inf = std::numeric_limits<double>::infinity();

    double a_prev = 0.0, c_prev = 0.0;
    double a_cur = 0.0, c_cur = 0.0;
    double raw_gap = inf, acc_gap = inf;
    for (int k = k_min; k <= k_max; ++k) {
        const double a = eval(std::ldexp(1.0, -k));
        if (!std::isfinite(a)) return {inf, inf, true};
        if (k > k_min) {
            const double c = a - (k - 1) * (a_prev - a);
            if (k > k_min + 1) {
                raw_gap = std::abs(a - a_prev);
                acc_gap = std::abs(c - c_prev);
            }
            c_prev = c_cur = c;
        }
        a_prev = a_cur = a;
    }
    if (a_cur > 1e8) return {inf, inf, true};  // diverging toward +inf

    ZeroExtrapolation out;
    if (acc_gap <= raw_gap) {
        out.value = c_cur;
        out.gap = acc_gap;
    } else {
        out.value = a_cur;
        out.gap = raw_gap;
    }
    out.certified = out.gap <= 1e-6 * std::max(1.0, std::abs(out.value));
    return out;
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

inline double kmb_eval(double x) {
    const double t = x - 1.0;
    // Removable singularity at 1: three-term series avoids cancellation.
    if (std::abs(t) < 1e-8) return 1.0 + t / 2.0 - t * t / 12.0;
    return t / std::log(x);
}

inline const std::vector<MonotoneFunction>& catalog() {
    static const std::vector<MonotoneFunction> entries = [] {
        const auto one = [](double) { return 1.0; };
        const auto id = [](double x) { return x; };
        const auto sld = [](double x) { return 0.5 * (1.0 + x); };
        const auto wy = [](double x) {
            const double s = 0.5 * (std::sqrt(x) + 1.0);
            return s * s;
        };
        const auto geo = [](double x) { return std::sqrt(x); };
        const auto harm = [](double x) { return 2.0 * x / (1.0 + x); };
        const auto sq = [](double x) { return x * x; };
        const auto inv = [](double x) { return 1.0 / x; };
        std::vector<MonotoneFunction> v;
        v.push_back({"right", one, 1.0, true, id});
        v.push_back({"left", id, 0.0, true, one});
        v.push_back({"sld", sld, 0.5, true, sld});
        v.push_back({"kmb", kmb_eval, 0.0, true, kmb_eval});
        v.push_back({"wy", wy, 0.25, true, wy});
        v.push_back({"geo", geo, 0.0, true, geo});
        v.push_back({"harm", harm, 0.0, true, harm});
        v.push_back({"sq", sq, 0.0, false, inv});
        return v;
    }();
    return entries;
}

// The entries whose operator monotonicity the checkers are expected to confirm.
inline std::vector<MonotoneFunction> claimed_catalog() {
    std::vector<MonotoneFunction> v;
    for (const auto& f : catalog())
        if (f.claimed_operator_monotone) v.push_back(f);
    return v;
}

inline const MonotoneFunction& catalog_entry(const std::string& name) {
    for (const auto& f : catalog())
        if (f.name == name) return f;
    throw ParseError("unknown function name: " + name);
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

namespace detail {
// A certified limit below 1e-6 is indistinguishable from 0 at every tolerance
// used here; snapping keeps boundary clamps from biasing inequality margins.
inline double boundary_value(const ZeroExtrapolation& z) {
    if (!std::isfinite(z.value)) return z.value;
    if (z.certified && z.value <= 1e-6) return 0.0;
    return std::max(0.0, z.value);
}
} // namespace detail

inline MonotoneFunction perp_transform(const MonotoneFunction& f) {
    MonotoneFunction g;
    g.name = f.name + "_perp";
    const auto fe = f.eval;
    g.eval = [fe](double x) { return x / fe(x); };
    // (f^perp)'(x) = x * (1/x) / f(1/x) = 1 / f(1/x).
    g.prime_eval = [fe](double x) { return 1.0 / fe(1.0 / x); };
    g.claimed_operator_monotone = f.claimed_operator_monotone;
    g.f_at_0 = detail::boundary_value(extrapolate_at_zero(g.eval));
    return g;
}

inline MonotoneFunction prime_transform(const MonotoneFunction& f) {
    MonotoneFunction g;
    g.name = f.name + "'";
    const auto fe = f.eval;
    g.eval = [fe](double x) { return x * fe(1.0 / x); };
    g.prime_eval = fe;  // the transpose is an involution
    g.claimed_operator_monotone = f.claimed_operator_monotone;
    g.f_at_0 = detail::boundary_value(extrapolate_at_zero(g.eval));
    return g;
}

// Alias: the mean-form metric consumes x/f(x) under this name.
inline MonotoneFunction h_transform(const MonotoneFunction& f) { return perp_transform(f); }

// ---------------------------------------------------------------------------
// Matrix evaluation
// ---------------------------------------------------------------------------

// f applied spectrally. Strict mode requires every eigenvalue positive.
// Extended mode clamps eigenvalues in [-1e-9, 1e-12]*scale to 0 and uses
// f(0+) there; more negative spectra are rejected.
inline Matrix matrix_apply(const MonotoneFunction& f, const Matrix& M, bool extend_to_zero = false) {
    const auto sd = eig_hermitian(M);
    const Eigen::Index n = sd.eigenvalues.size();
    const double scale =
        std::max({1.0, std::abs(sd.eigenvalues(0)), std::abs(sd.eigenvalues(n - 1))});
    RealVector mapped(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lam = sd.eigenvalues(i);
        if (extend_to_zero) {
            if (lam < -1e-9 * scale)
                throw DomainViolation(f.name + ": operand has a negative eigenvalue");
            if (lam <= 1e-12 * scale) {
                if (!std::isfinite(f.f_at_0))
                    throw DomainViolation(f.name + ": unbounded at 0, operand singular");
                mapped(i) = f.f_at_0;
            } else {
                mapped(i) = f.eval(lam);
            }
        } else {
            if (lam <= 0.0)
                throw DomainViolation(f.name + ": operand not strictly positive");
            mapped(i) = f.eval(lam);
        }
    }
    return sd.eigenvectors * mapped.cast<Complex>().asDiagonal() * sd.eigenvectors.adjoint();
}

// ---------------------------------------------------------------------------
// Randomized checkers
// ---------------------------------------------------------------------------

struct CheckReport {
    std::string name;
    int trials = 0;
    int passes = 0;
    int failures = 0;
    double worst_margin = std::numeric_limits<double>::infinity();

    bool passed() const { return failures == 0 && trials > 0; }

    void record(double margin, double slack) {
        ++trials;
        worst_margin = std::min(worst_margin, margin);
        if (margin >= -slack)
            ++passes;
        else
            ++failures;
    }
};

// Slack absorbing eigensolver error; the inequalities are exact in theory.
inline constexpr double kCheckSlack = 1e-8;

// min-eig(f(A+P) - f(A)) relative to ||f(A+P)||.
inline double monotone_margin(const MonotoneFunction& f, const Matrix& A, const Matrix& P) {
    const Matrix fA = matrix_apply(f, A);
    const Matrix fB = matrix_apply(f, A + P);
    const double scale = std::max(spectral_norm(fB), 1e-30);
    return min_eigenvalue(hermitize(fB - fA)) / scale;
}

// min-eig(f(pA+(1-p)B) - p f(A) - (1-p) f(B)) relative to operand norms.
inline double concavity_margin(const MonotoneFunction& f, const Matrix& A, const Matrix& B,
                               double p) {
    const Matrix lhs = matrix_apply(f, p * A + (1.0 - p) * B);
    const Matrix rhs = p * matrix_apply(f, A) + (1.0 - p) * matrix_apply(f, B);
    const double scale = std::max({spectral_norm(lhs), spectral_norm(rhs), 1e-30});
    return min_eigenvalue(hermitize(lhs - rhs)) / scale;
}

// min-eig(fbar(C*AC) - C* fbar(A) C) relative to operand norms; ||C|| <= 1.
inline double transformer_margin(const MonotoneFunction& f, const Matrix& A, const Matrix& C) {
    const Matrix lhs = matrix_apply(f, hermitize(C.adjoint() * A * C), true);
    const Matrix rhs = C.adjoint() * matrix_apply(f, A, true) * C;
    const double scale = std::max({spectral_norm(lhs), spectral_norm(rhs), 1e-30});
    return min_eigenvalue(hermitize(lhs - rhs)) / scale;
}

// 0 < A <= B implies f(A) <= f(B), sampled as B = A + P with P >= 0.
inline CheckReport check_operator_monotone(const MonotoneFunction& f, int trials, int dim,
                                           std::uint64_t rng_seed) {
    CheckReport report;
    report.name = f.name + " monotone";
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::substream(rng_seed, static_cast<std::uint64_t>(t));
        const Matrix A = random_strictly_positive(dim, rng);
        const int rank = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(dim)));
        const Matrix P = random_psd(dim, rng, rank);
        report.record(monotone_margin(f, A, P), kCheckSlack);
    }
    return report;
}

// f(pA + (1-p)B) >= p f(A) + (1-p) f(B) on strictly positive operands.
inline CheckReport check_operator_concave(const MonotoneFunction& f, int trials, int dim,
                                          std::uint64_t rng_seed) {
    CheckReport report;
    report.name = f.name + " concave";
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::substream(rng_seed, static_cast<std::uint64_t>(t));
        const Matrix A = random_strictly_positive(dim, rng);
        const Matrix B = random_strictly_positive(dim, rng);
        const double p = rng.uniform();
        report.record(concavity_margin(f, A, B, p), kCheckSlack);
    }
    return report;
}

// fbar(C*AC) >= C* fbar(A) C for A >= 0 (rank varied) and ||C|| <= 1.
inline CheckReport check_transformer_inequality(const MonotoneFunction& f, int trials, int dim,
                                                std::uint64_t rng_seed) {
    if (!std::isfinite(f.f_at_0))
        throw DomainViolation(f.name + ": transformer check needs a finite value at 0");
    CheckReport report;
    report.name = f.name + " transformer";
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::substream(rng_seed, static_cast<std::uint64_t>(t));
        const int rank = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(dim)));
        const Matrix A = random_psd(dim, rng, rank);
        const Matrix C = random_contraction(dim, dim, rng);
        report.record(transformer_margin(f, A, C), kCheckSlack);
    }
    return report;
}

} // namespace qmetric
