#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "qmetric/channel.hpp"
#include "qmetric/io.hpp"
#include "qmetric/metric.hpp"
#include "qmetric/monotone_function.hpp"
#include "qmetric/operator_mean.hpp"
#include "qmetric/random.hpp"

namespace qmetric {

struct TrialConfig {
    int trials = 200;
    int dim_min = 2;
    int dim_max = 5;
    std::vector<std::string> f_names;  // empty means every claimed catalog entry
    std::uint64_t seed = 42;
    double tol = 1e-8;
    TraceMode trace_mode = TraceMode::unit_bounded;
};

inline std::string to_string(TraceMode m) {
    return m == TraceMode::unit_bounded ? "bounded" : "free";
}

inline TraceMode trace_mode_from_string(const std::string& s) {
    if (s == "bounded") return TraceMode::unit_bounded;
    if (s == "free") return TraceMode::unconstrained;
    throw ParseError("unknown trace mode: " + s + " (expected bounded or free)");
}

struct SuiteReport {
    std::string suite;
    int trials = 0;
    int passes = 0;
    int failures = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    json failing_instances = json::array();
    std::string note;

    bool passed() const { return trials > 0 && failures == 0; }

    // dump is only invoked on failure; at most 8 instances are kept.
    void record(double margin, double slack, const std::function<json()>& dump = nullptr) {
        ++trials;
        worst_margin = std::min(worst_margin, margin);
        if (margin >= -slack) {
            ++passes;
        } else {
            ++failures;
            if (dump && failing_instances.size() < 8) failing_instances.push_back(dump());
        }
    }

    json to_json() const {
        json doc;
        doc["suite"] = suite;
        doc["trials"] = trials;
        doc["passes"] = passes;
        doc["failures"] = failures;
        doc["worst_margin"] = worst_margin;
        if (!note.empty()) doc["note"] = note;
        doc["failing_instances"] = failing_instances;
        return doc;
    }
};

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace harness_detail {

enum SuiteId {
    kMonotonicity = 1,
    kAdditivity,
    kConvexity,
    kRhoDecrease,
    kScaling,
    kSchur,
    kDemo,
    kFunctions,
    kMeans,
};

// Decorrelated per-trial stream: suite and function index in the high bits,
// trial index in the low bits.
inline Rng trial_rng(std::uint64_t seed, int suite, std::size_t f_idx, std::uint64_t trial) {
    const std::uint64_t hi = (static_cast<std::uint64_t>(suite) * 64 + f_idx) << 32;
    return Rng::substream(seed, hi | trial);
}

inline std::vector<MonotoneFunction> selected_functions(const TrialConfig& cfg) {
    if (cfg.f_names.empty()) return claimed_catalog();
    std::vector<MonotoneFunction> out;
    for (const auto& name : cfg.f_names) out.push_back(catalog_entry(name));
    return out;
}

inline int sample_dim(const TrialConfig& cfg, Rng& rng) {
    return cfg.dim_min +
           static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cfg.dim_max - cfg.dim_min + 1)));
}

// Strictly positive base point; trace in (0,1] when bounded, up to 2 when free.
inline Matrix sample_density_matrix(int n, Rng& rng, TraceMode mode) {
    const Matrix W = random_strictly_positive(n, rng);
    const double hi = mode == TraceMode::unit_bounded ? 1.0 : 2.0;
    return (rng.uniform(0.1, hi) / W.trace().real()) * W;
}

inline KrausChannel sample_cptni(int n, int m, Rng& rng) {
    const int k = (n + m - 1) / m + static_cast<int>(rng.uniform_int(2));
    // Hit the CPTP boundary on a quarter of draws, the strict interior otherwise.
    const double slack = rng.uniform() < 0.25 ? 0.0 : rng.uniform();
    return random_cptni(n, m, k, slack, rng);
}

// sigma = s W / Tr W with s budgeted so that Tr(T(rho) + sigma) <= 1 when bounded.
inline Matrix sample_sigma(int m, double t_rho_trace, Rng& rng, TraceMode mode) {
    const Matrix W = random_strictly_positive(m, rng);
    const double budget =
        mode == TraceMode::unit_bounded ? std::max(0.0, 1.0 - t_rho_trace) : 1.0;
    return (rng.uniform(0.0, budget) / W.trace().real()) * W;
}

inline double guarded_ratio(double num, double den) { return num / std::max(den, 1e-300); }

} // namespace harness_detail

// ---------------------------------------------------------------------------
// Margins (shared between suites and instance replay)
// ---------------------------------------------------------------------------

// K_{T(rho)+sigma}(T(X), T(X)) <= K_rho(X, X); returns (RHS - LHS) / |RHS|.
inline double monotonicity_margin(const MonotoneFunction& f, const Matrix& rho, const Matrix& X,
                                  const KrausChannel& T, const Matrix& sigma, TraceMode mode) {
    const DensityLikeOperator base(rho, mode);
    const DensityLikeOperator mapped(T.apply(rho) + sigma, mode);
    const Matrix TX = T.apply(X);
    const double lhs = cptni_metric_kernel(mapped, f, TX, TX).real();
    const double rhs = cptni_metric_kernel(base, f, X, X).real();
    return harness_detail::guarded_ratio(rhs - lhs, std::abs(rhs));
}

// Direct-sum additivity as a relative equality margin (negative of deviation).
inline double additivity_margin(const MonotoneFunction& f, const Matrix& rho1, const Matrix& rho2,
                                const Matrix& X1, const Matrix& X2, const Matrix& Y1,
                                const Matrix& Y2, TraceMode mode) {
    const DensityLikeOperator a(rho1, mode), b(rho2, mode), ab(direct_sum(rho1, rho2), mode);
    const Complex sum = cptni_metric_kernel(a, f, X1, Y1) + cptni_metric_kernel(b, f, X2, Y2);
    const Complex whole = cptni_metric_kernel(ab, f, direct_sum(X1, X2), direct_sum(Y1, Y2));
    return -harness_detail::guarded_ratio(std::abs(whole - sum), std::abs(sum));
}

inline double convexity_margin(const MonotoneFunction& f, const Matrix& rho1, const Matrix& rho2,
                               const Matrix& X1, const Matrix& X2, TraceMode mode) {
    const DensityLikeOperator a(rho1, mode), b(rho2, mode), mid(0.5 * (rho1 + rho2), mode);
    const Matrix Xm = 0.5 * (X1 + X2);
    const double lhs = cptni_metric_kernel(mid, f, Xm, Xm).real();
    const double rhs = 0.5 * (cptni_metric_kernel(a, f, X1, X1).real() +
                              cptni_metric_kernel(b, f, X2, X2).real());
    return harness_detail::guarded_ratio(rhs - lhs, std::abs(rhs));
}

// Decrease under rho -> rho + delta and midpoint convexity along the segment.
inline double rho_decrease_margin(const MonotoneFunction& f, const Matrix& rho,
                                  const Matrix& delta, const Matrix& X, TraceMode mode) {
    const DensityLikeOperator lo(rho, mode), hi(rho + delta, mode), mid(rho + 0.5 * delta, mode);
    const double k_lo = cptni_metric_kernel(lo, f, X, X).real();
    const double k_hi = cptni_metric_kernel(hi, f, X, X).real();
    const double k_mid = cptni_metric_kernel(mid, f, X, X).real();
    const double decrease = harness_detail::guarded_ratio(k_lo - k_hi, std::abs(k_lo));
    const double convex =
        harness_detail::guarded_ratio(0.5 * (k_lo + k_hi) - k_mid, 0.5 * std::abs(k_lo + k_hi));
    return std::min(decrease, convex);
}

inline double scaling_margin(const MonotoneFunction& f, const Matrix& rho, const Matrix& X,
                             double q, TraceMode mode) {
    const DensityLikeOperator base(rho, mode), scaled(q * rho, mode);
    const double k = cptni_metric_kernel(base, f, X, X).real();
    const double kq = cptni_metric_kernel(scaled, f, X, X).real();
    return -harness_detail::guarded_ratio(std::abs(q * kq - k), std::abs(k));
}

// T(X)(T(rho)+sigma)^{-1} T(X)* <= T(X rho^{-1} X*) via min-eigenvalue.
inline double schur_margin(const Matrix& rho, const Matrix& X, const KrausChannel& T,
                           const Matrix& sigma, TraceMode mode) {
    const DensityLikeOperator base(rho, mode);
    const DensityLikeOperator mapped(T.apply(rho) + sigma, mode);
    const Matrix rho_inv = apply_spectral(base.spectral(), [](double x) { return 1.0 / x; });
    const Matrix g_inv = apply_spectral(mapped.spectral(), [](double x) { return 1.0 / x; });
    const Matrix TX = T.apply(X);
    const Matrix lhs = hermitize(TX * g_inv * TX.adjoint());
    const Matrix rhs = hermitize(T.apply(hermitize(X * rho_inv * X.adjoint())));
    return harness_detail::guarded_ratio(min_eigenvalue(hermitize(rhs - lhs)),
                                         spectral_norm(rhs));
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

inline SuiteReport suite_cptni_monotonicity(const TrialConfig& cfg) {
    using namespace harness_detail;
    SuiteReport rep;
    rep.suite = "monotonicity";
    const auto fs = selected_functions(cfg);
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
        const auto& f = fs[fi];
        for (int t = 0; t < cfg.trials; ++t) {
            Rng rng = trial_rng(cfg.seed, kMonotonicity, fi, static_cast<std::uint64_t>(t));
            Matrix rho, X, sigma;
            std::vector<Matrix> kraus;
            for (int attempt = 0;; ++attempt) {
                const int n = sample_dim(cfg, rng);
                const int m = sample_dim(cfg, rng);
                rho = sample_density_matrix(n, rng, cfg.trace_mode);
                X = random_complex_matrix(n, n, rng);
                const KrausChannel T = sample_cptni(n, m, rng);
                const Matrix t_rho = T.apply(rho);
                sigma = sample_sigma(m, t_rho.trace().real(), rng, cfg.trace_mode);
                const Matrix out = hermitize(t_rho + sigma);
                if (min_eigenvalue(out) > 1e-12 * out.trace().real()) {
                    kraus = T.kraus();
                    break;
                }
                // Resample rather than shift: a shift would change the inequality.
                if (attempt >= 100)
                    throw NumericalFailure("monotonicity suite: no strictly positive T(rho)+sigma");
            }
            const KrausChannel T{std::move(kraus)};
            const double margin = monotonicity_margin(f, rho, X, T, sigma, cfg.trace_mode);
            rep.record(margin, cfg.tol, [&] {
                json inst;
                inst["suite"] = rep.suite;
                inst["f"] = f.name;
                inst["trace_mode"] = to_string(cfg.trace_mode);
                inst["rho"] = matrix_to_json(rho, "density");
                inst["X"] = matrix_to_json(X);
                inst["T"] = channel_to_json(T);
                inst["sigma"] = matrix_to_json(sigma, "hermitian");
                inst["margin"] = margin;
                return inst;
            });
        }
    }
    return rep;
}

inline SuiteReport suite_direct_sum_additivity(const TrialConfig& cfg) {
    using namespace harness_detail;
    SuiteReport rep;
    rep.suite = "additivity";
    const double slack = 1e-10;  // additivity is an exact identity, slack is roundoff only
    const auto fs = selected_functions(cfg);
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
        const auto& f = fs[fi];
        for (int t = 0; t < cfg.trials; ++t) {
            Rng rng = trial_rng(cfg.seed, kAdditivity, fi, static_cast<std::uint64_t>(t));
            const int n1 = sample_dim(cfg, rng);
            const int n2 = sample_dim(cfg, rng);
            // Split a common trace budget so the direct sum stays admissible.
            const double total = rng.uniform(0.2, 1.0);
            const double split = rng.uniform(0.2, 0.8);
            const Matrix W1 = random_strictly_positive(n1, rng);
            const Matrix W2 = random_strictly_positive(n2, rng);
            const Matrix rho1 = (total * split / W1.trace().real()) * W1;
            const Matrix rho2 = (total * (1.0 - split) / W2.trace().real()) * W2;
            const Matrix X1 = random_complex_matrix(n1, n1, rng);
            const Matrix X2 = random_complex_matrix(n2, n2, rng);
            const Matrix Y1 = random_complex_matrix(n1, n1, rng);
            const Matrix Y2 = random_complex_matrix(n2, n2, rng);
            const double margin =
                additivity_margin(f, rho1, rho2, X1, X2, Y1, Y2, cfg.trace_mode);
            rep.record(margin, slack, [&] {
                json inst;
                inst["suite"] = rep.suite;
                inst["f"] = f.name;
                inst["trace_mode"] = to_string(cfg.trace_mode);
                inst["rho1"] = matrix_to_json(rho1, "density");
                inst["rho2"] = matrix_to_json(rho2, "density");
                inst["X1"] = matrix_to_json(X1);
                inst["X2"] = matrix_to_json(X2);
                inst["Y1"] = matrix_to_json(Y1);
                inst["Y2"] = matrix_to_json(Y2);
                inst["margin"] = margin;
                return inst;
            });
        }
    }
    return rep;
}

inline SuiteReport suite_convexity(const TrialConfig& cfg) {
    using namespace harness_detail;
    SuiteReport rep;
    rep.suite = "convexity";
    const auto fs = selected_functions(cfg);
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
        const auto& f = fs[fi];
        for (int t = 0; t < cfg.trials; ++t) {
            Rng rng = trial_rng(cfg.seed, kConvexity, fi, static_cast<std::uint64_t>(t));
            const int n = sample_dim(cfg, rng);
            const Matrix rho1 = sample_density_matrix(n, rng, cfg.trace_mode);
            const Matrix rho2 = sample_density_matrix(n, rng, cfg.trace_mode);
            const Matrix X1 = random_complex_matrix(n, n, rng);
            const Matrix X2 = random_complex_matrix(n, n, rng);
            const double margin = convexity_margin(f, rho1, rho2, X1, X2, cfg.trace_mode);
            rep.record(margin, cfg.tol, [&] {
                json inst;
                inst["suite"] = rep.suite;
                inst["f"] = f.name;
                inst["trace_mode"] = to_string(cfg.trace_mode);
                inst["rho1"] = matrix_to_json(rho1, "density");
                inst["rho2"] = matrix_to_json(rho2, "density");
                inst["X1"] = matrix_to_json(X1);
                inst["X2"] = matrix_to_json(X2);
                inst["margin"] = margin;
                return inst;
            });
        }
    }
    return rep;
}

inline SuiteReport suite_rho_monotone_decrease(const TrialConfig& cfg) {
    using namespace harness_detail;
    SuiteReport rep;
    rep.suite = "rho-decrease";
    const auto fs = selected_functions(cfg);
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
        const auto& f = fs[fi];
        for (int t = 0; t < cfg.trials; ++t) {
            Rng rng = trial_rng(cfg.seed, kRhoDecrease, fi, static_cast<std::uint64_t>(t));
            const int n = sample_dim(cfg, rng);
            const Matrix W = random_strictly_positive(n, rng);
            const Matrix rho = (rng.uniform(0.1, 0.6) / W.trace().real()) * W;
            const int rank = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
            const Matrix P = random_psd(n, rng, rank);
            const double budget = cfg.trace_mode == TraceMode::unit_bounded
                                      ? 1.0 - rho.trace().real()
                                      : 1.0;
            const double ptr = P.trace().real();
            const Matrix delta = ptr > 0 ? Matrix((rng.uniform(0.0, budget) / ptr) * P)
                                         : Matrix(Matrix::Zero(n, n));
            const Matrix X = random_complex_matrix(n, n, rng);
            const double margin = rho_decrease_margin(f, rho, delta, X, cfg.trace_mode);
            rep.record(margin, cfg.tol, [&] {
                json inst;
                inst["suite"] = rep.suite;
                inst["f"] = f.name;
                inst["trace_mode"] = to_string(cfg.trace_mode);
                inst["rho"] = matrix_to_json(rho, "density");
                inst["delta"] = matrix_to_json(delta, "hermitian");
                inst["X"] = matrix_to_json(X);
                inst["margin"] = margin;
                return inst;
            });
        }
    }
    return rep;
}

inline SuiteReport suite_scaling_law(const TrialConfig& cfg) {
    using namespace harness_detail;
    SuiteReport rep;
    rep.suite = "scaling";
    const double slack = 1e-10;  // exact identity
    const auto fs = selected_functions(cfg);
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
        const auto& f = fs[fi];
        for (int t = 0; t < cfg.trials; ++t) {
            Rng rng = trial_rng(cfg.seed, kScaling, fi, static_cast<std::uint64_t>(t));
            const int n = sample_dim(cfg, rng);
            const Matrix rho = sample_density_matrix(n, rng, cfg.trace_mode);
            const Matrix X = random_complex_matrix(n, n, rng);
            double q;
            switch (t % 3) {
                case 0: q = 1.0 / std::sqrt(2.0); break;
                case 1: q = 1.0 / std::numbers::pi; break;
                default: q = rng.uniform(0.05, 1.0); break;
            }
            const double margin = scaling_margin(f, rho, X, q, cfg.trace_mode);
            rep.record(margin, slack, [&] {
                json inst;
                inst["suite"] = rep.suite;
                inst["f"] = f.name;
                inst["trace_mode"] = to_string(cfg.trace_mode);
                inst["rho"] = matrix_to_json(rho, "density");
                inst["X"] = matrix_to_json(X);
                inst["q"] = q;
                inst["margin"] = margin;
                return inst;
            });
        }
    }
    return rep;
}

inline SuiteReport suite_schur_positivity(const TrialConfig& cfg) {
    using namespace harness_detail;
    SuiteReport rep;
    rep.suite = "schur";
    for (int t = 0; t < cfg.trials; ++t) {
        Rng rng = trial_rng(cfg.seed, kSchur, 0, static_cast<std::uint64_t>(t));
        Matrix rho, X, sigma;
        std::vector<Matrix> kraus;
        for (int attempt = 0;; ++attempt) {
            const int n = sample_dim(cfg, rng);
            const int m = sample_dim(cfg, rng);
            rho = sample_density_matrix(n, rng, cfg.trace_mode);
            X = random_complex_matrix(n, n, rng);
            const KrausChannel T = sample_cptni(n, m, rng);
            const Matrix t_rho = T.apply(rho);
            sigma = sample_sigma(m, t_rho.trace().real(), rng, cfg.trace_mode);
            const Matrix out = hermitize(t_rho + sigma);
            if (min_eigenvalue(out) > 1e-12 * out.trace().real()) {
                kraus = T.kraus();
                break;
            }
            if (attempt >= 100)
                throw NumericalFailure("schur suite: no strictly positive T(rho)+sigma");
        }
        const KrausChannel T{std::move(kraus)};
        const double margin = schur_margin(rho, X, T, sigma, cfg.trace_mode);
        rep.record(margin, cfg.tol, [&] {
            json inst;
            inst["suite"] = rep.suite;
            inst["trace_mode"] = to_string(cfg.trace_mode);
            inst["rho"] = matrix_to_json(rho, "density");
            inst["X"] = matrix_to_json(X);
            inst["T"] = channel_to_json(T);
            inst["sigma"] = matrix_to_json(sigma, "hermitian");
            inst["margin"] = margin;
            return inst;
        });
    }
    return rep;
}

// Direct-sum gap of the trace-parameterized CPTP family with f_t constant:
// the kernel term stays additive, so the gap is exactly the b cross term
// b * (|Tr X1 + Tr X2|^2 - |Tr X1|^2 - |Tr X2|^2) = 2 b Re(conj(Tr X1) Tr X2).
inline SuiteReport demo_cptp_non_additivity(const TrialConfig& cfg = {}, double b = 1.0) {
    using namespace harness_detail;
    SuiteReport rep;
    rep.suite = "cptp-demo";
    const double slack = 1e-10;
    const CptpMetricSpec spec = CptpMetricSpec::constant(catalog_entry("sld"), b);

    const auto gap_of = [&spec](const Matrix& rho1, const Matrix& rho2, const Matrix& X1,
                                const Matrix& X2) {
        const DensityLikeOperator a(rho1, TraceMode::unconstrained);
        const DensityLikeOperator bb(rho2, TraceMode::unconstrained);
        const DensityLikeOperator ab(direct_sum(rho1, rho2), TraceMode::unconstrained);
        const Complex whole = kumagai_cptp_metric(ab, spec, direct_sum(X1, X2), direct_sum(X1, X2));
        const Complex sum =
            kumagai_cptp_metric(a, spec, X1, X1) + kumagai_cptp_metric(bb, spec, X2, X2);
        return (whole - sum).real();
    };
    const auto predicted_gap = [b](const Matrix& X1, const Matrix& X2) {
        return 2.0 * b * (std::conj(X1.trace()) * X2.trace()).real();
    };
    const auto record_instance = [&](const Matrix& rho1, const Matrix& rho2, const Matrix& X1,
                                     const Matrix& X2) {
        const double gap = gap_of(rho1, rho2, X1, X2);
        const double want = predicted_gap(X1, X2);
        const double margin = -guarded_ratio(std::abs(gap - want), std::max(1.0, std::abs(want)));
        rep.record(margin, slack, [&] {
            json inst;
            inst["suite"] = rep.suite;
            inst["b"] = b;
            inst["rho1"] = matrix_to_json(rho1, "density");
            inst["rho2"] = matrix_to_json(rho2, "density");
            inst["X1"] = matrix_to_json(X1);
            inst["X2"] = matrix_to_json(X2);
            inst["gap"] = gap;
            inst["predicted"] = want;
            inst["margin"] = margin;
            return inst;
        });
        return gap;
    };

    // Pinned witness: unit-trace traceful tangents make the cross term 2b.
    const Matrix rho_fix = 0.25 * Matrix::Identity(2, 2);
    const Matrix e11 = matrix_unit(2, 0, 0);
    const double fixed_gap = record_instance(rho_fix, rho_fix, e11, e11);
    if (b != 0.0 && std::abs(fixed_gap) < 1e-12)
        throw DemoFailure("cptp-demo: no direct-sum gap with b != 0");
    rep.note = b == 0.0 ? "degenerate: b = 0 restores additivity"
                        : "fixed instance gap " + format_double(fixed_gap) + ", predicted " +
                              format_double(2.0 * b);

    const int extra = std::min(cfg.trials, 100);
    for (int t = 0; t < extra; ++t) {
        Rng rng = trial_rng(cfg.seed, kDemo, 0, static_cast<std::uint64_t>(t));
        const int n1 = 2 + static_cast<int>(rng.uniform_int(3));
        const int n2 = 2 + static_cast<int>(rng.uniform_int(3));
        const Matrix rho1 = sample_density_matrix(n1, rng, TraceMode::unconstrained);
        const Matrix rho2 = sample_density_matrix(n2, rng, TraceMode::unconstrained);
        const Matrix X1 = random_complex_matrix(n1, n1, rng);
        const Matrix X2 = random_complex_matrix(n2, n2, rng);
        record_instance(rho1, rho2, X1, X2);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Function and mean check aggregation
// ---------------------------------------------------------------------------

namespace harness_detail {

struct CheckUnit {
    std::string check;      // monotone | concave | transformer | transposition |
                            // joint | joint-regularized | mean-transformer
    std::string f_name;     // catalog name
    std::string transform;  // none | perp | prime
    int dim = 0;            // n (and m where applicable)
    int m_dim = 0;
    int trials = 0;
    std::uint64_t seed_index = 0;
    bool expect_violation = false;  // true for the non-monotone control
};

inline MonotoneFunction unit_function(const CheckUnit& u) {
    const MonotoneFunction& base = catalog_entry(u.f_name);
    if (u.transform == "none") return base;
    if (u.transform == "perp") return perp_transform(base);
    if (u.transform == "prime") return prime_transform(base);
    throw ParseError("unknown transform: " + u.transform);
}

inline CheckReport run_check_unit(const CheckUnit& u, std::uint64_t seed) {
    const MonotoneFunction g = unit_function(u);
    const std::uint64_t s = splitmix64(seed + 0x9e3779b97f4a7c15ULL * (u.seed_index + 1));
    if (u.check == "monotone") return check_operator_monotone(g, u.trials, u.dim, s);
    if (u.check == "concave") return check_operator_concave(g, u.trials, u.dim, s);
    if (u.check == "transformer") return check_transformer_inequality(g, u.trials, u.dim, s);
    if (u.check == "transposition") return check_transposition(g, u.trials, u.dim, s);
    if (u.check == "joint") return check_joint_monotonicity(g, u.trials, u.dim, s);
    if (u.check == "joint-regularized")
        return check_joint_monotonicity_regularized(g, u.trials, u.dim, s);
    if (u.check == "mean-transformer")
        return check_mean_transformer(g, u.trials, u.dim, u.m_dim, s);
    throw ParseError("unknown check: " + u.check);
}

inline json unit_to_json(const CheckUnit& u, const CheckReport& r, const char* suite,
                         std::uint64_t suite_seed) {
    json inst;
    inst["suite"] = suite;
    inst["check"] = u.check;
    inst["f"] = u.f_name;
    inst["transform"] = u.transform;
    inst["dim"] = u.dim;
    if (u.m_dim > 0) inst["m_dim"] = u.m_dim;
    inst["trials"] = u.trials;
    inst["seed_index"] = u.seed_index;
    inst["suite_seed"] = suite_seed;
    inst["expect_violation"] = u.expect_violation;
    inst["worst_margin"] = r.worst_margin;
    inst["violations"] = r.failures;
    return inst;
}

inline void run_units(SuiteReport& rep, const std::vector<CheckUnit>& units,
                      std::uint64_t seed, const char* suite) {
    for (const auto& u : units) {
        const CheckReport r = run_check_unit(u, seed);
        ++rep.trials;
        const bool ok = u.expect_violation ? r.failures > 0 : r.passed();
        if (!u.expect_violation) rep.worst_margin = std::min(rep.worst_margin, r.worst_margin);
        if (ok) {
            ++rep.passes;
        } else {
            ++rep.failures;
            if (rep.failing_instances.size() < 8)
                rep.failing_instances.push_back(unit_to_json(u, r, suite, seed));
        }
    }
    if (rep.trials > 0 && rep.worst_margin == std::numeric_limits<double>::infinity())
        rep.worst_margin = 0.0;
}

} // namespace harness_detail

// Operator monotonicity, concavity, and the transformer bound for every
// selected f and its perp/prime transforms, plus violation searches on the
// deliberately non-monotone control.
inline SuiteReport suite_function_checks(const TrialConfig& cfg) {
    using namespace harness_detail;
    SuiteReport rep;
    rep.suite = "functions";
    std::vector<CheckUnit> units;
    std::uint64_t idx = 0;
    const int dims = cfg.dim_max - cfg.dim_min + 1;
    const int per_dim = std::max(1, (cfg.trials + dims - 1) / dims);
    for (const auto& f : selected_functions(cfg)) {
        for (const char* tr : {"none", "perp", "prime"}) {
            for (const char* ck : {"monotone", "concave", "transformer"}) {
                for (int d = cfg.dim_min; d <= cfg.dim_max; ++d)
                    units.push_back({ck, f.name, tr, d, 0, per_dim, idx++, false});
            }
        }
    }
    // x^2 control: the checks must be able to find violations.
    units.push_back({"monotone", "sq", "none", 2, 0, 1000, idx++, true});
    units.push_back({"concave", "sq", "none", 2, 0, 1000, idx++, true});
    run_units(rep, units, cfg.seed ^ 0x66756e63ULL, "functions");
    rep.note = "includes perp and prime transforms; control expects violations";
    return rep;
}

// Transposition, joint monotonicity (strict and through the regularized
// mean), and the conjugation bound for operator means.
inline SuiteReport suite_mean_checks(const TrialConfig& cfg) {
    using namespace harness_detail;
    SuiteReport rep;
    rep.suite = "means";
    std::vector<CheckUnit> units;
    std::uint64_t idx = 0;
    const int dims = cfg.dim_max - cfg.dim_min + 1;
    const int per_dim = std::max(1, (cfg.trials + dims - 1) / dims);
    for (const auto& f : selected_functions(cfg)) {
        for (int d = cfg.dim_min; d <= cfg.dim_max; ++d) {
            units.push_back({"transposition", f.name, "none", d, 0, per_dim, idx++, false});
            units.push_back({"joint", f.name, "none", d, 0, per_dim, idx++, false});
            units.push_back({"joint-regularized", f.name, "none", d, 0, per_dim, idx++, false});
            // Alternate wide and tall conjugations; tall ones make the
            // conjugated operands rank-deficient.
            const int m = (d - cfg.dim_min) % 2 == 0 ? d + 1 : std::max(2, d - 1);
            units.push_back({"mean-transformer", f.name, "none", d, m, per_dim, idx++, false});
        }
    }
    run_units(rep, units, cfg.seed ^ 0x6d65616eULL, "means");
    rep.note = "joint-regularized covers rank-deficient operands";
    return rep;
}

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {
        "monotonicity", "additivity", "convexity", "rho-decrease", "scaling",
        "schur",        "cptp-demo",  "functions", "means",
    };
    return names;
}

inline SuiteReport run_suite(const std::string& name, const TrialConfig& cfg, double demo_b = 1.0) {
    if (name == "monotonicity") return suite_cptni_monotonicity(cfg);
    if (name == "additivity") return suite_direct_sum_additivity(cfg);
    if (name == "convexity") return suite_convexity(cfg);
    if (name == "rho-decrease") return suite_rho_monotone_decrease(cfg);
    if (name == "scaling") return suite_scaling_law(cfg);
    if (name == "schur") return suite_schur_positivity(cfg);
    if (name == "cptp-demo") return demo_cptp_non_additivity(cfg, demo_b);
    if (name == "functions") return suite_function_checks(cfg);
    if (name == "means") return suite_mean_checks(cfg);
    throw ParseError("unknown suite: " + name);
}

inline std::vector<SuiteReport> run_all(const TrialConfig& cfg) {
    std::vector<SuiteReport> reports;
    for (const auto& name : suite_names()) reports.push_back(run_suite(name, cfg));
    return reports;
}

inline bool all_passed(const std::vector<SuiteReport>& reports) {
    for (const auto& r : reports)
        if (!r.passed()) return false;
    return true;
}

// Hash of the canonical report serialization; no timing data is included,
// so equal seeds give equal hashes.
inline std::string report_set_hash(const std::vector<SuiteReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(r.to_json());
    const std::uint64_t h = fnv1a_hash(arr.dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// Recompute the margin of a dumped failing instance.
inline double replay_instance(const json& inst) {
    const std::string suite = inst.at("suite").get<std::string>();
    const auto mode = [&inst] {
        return inst.contains("trace_mode")
                   ? trace_mode_from_string(inst.at("trace_mode").get<std::string>())
                   : TraceMode::unconstrained;
    };
    if (suite == "monotonicity") {
        return monotonicity_margin(catalog_entry(inst.at("f").get<std::string>()),
                                   matrix_from_json(inst.at("rho")), matrix_from_json(inst.at("X")),
                                   channel_from_json(inst.at("T")),
                                   matrix_from_json(inst.at("sigma")), mode());
    }
    if (suite == "additivity") {
        return additivity_margin(catalog_entry(inst.at("f").get<std::string>()),
                                 matrix_from_json(inst.at("rho1")),
                                 matrix_from_json(inst.at("rho2")), matrix_from_json(inst.at("X1")),
                                 matrix_from_json(inst.at("X2")), matrix_from_json(inst.at("Y1")),
                                 matrix_from_json(inst.at("Y2")), mode());
    }
    if (suite == "convexity") {
        return convexity_margin(catalog_entry(inst.at("f").get<std::string>()),
                                matrix_from_json(inst.at("rho1")),
                                matrix_from_json(inst.at("rho2")), matrix_from_json(inst.at("X1")),
                                matrix_from_json(inst.at("X2")), mode());
    }
    if (suite == "rho-decrease") {
        return rho_decrease_margin(catalog_entry(inst.at("f").get<std::string>()),
                                   matrix_from_json(inst.at("rho")),
                                   matrix_from_json(inst.at("delta")),
                                   matrix_from_json(inst.at("X")), mode());
    }
    if (suite == "scaling") {
        return scaling_margin(catalog_entry(inst.at("f").get<std::string>()),
                              matrix_from_json(inst.at("rho")), matrix_from_json(inst.at("X")),
                              inst.at("q").get<double>(), mode());
    }
    if (suite == "schur") {
        return schur_margin(matrix_from_json(inst.at("rho")), matrix_from_json(inst.at("X")),
                            channel_from_json(inst.at("T")), matrix_from_json(inst.at("sigma")),
                            mode());
    }
    if (suite == "functions" || suite == "means") {
        harness_detail::CheckUnit u;
        u.check = inst.at("check").get<std::string>();
        u.f_name = inst.at("f").get<std::string>();
        u.transform = inst.at("transform").get<std::string>();
        u.dim = inst.at("dim").get<int>();
        u.m_dim = inst.value("m_dim", 0);
        u.trials = inst.at("trials").get<int>();
        u.seed_index = inst.at("seed_index").get<std::uint64_t>();
        // The caller compares against the dumped worst_margin.
        return harness_detail::run_check_unit(u, inst.at("suite_seed").get<std::uint64_t>())
            .worst_margin;
    }
    throw ParseError("replay_instance: unknown suite " + suite);
}

} // namespace qmetric
