// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "qmetric/harness.hpp"
#include "qmetric/io.hpp"

using namespace qmetric;

namespace {

int g_failures = 0;

void report(int idx, bool ok, const std::string& what, const std::string& detail) {
    if (!ok) ++g_failures;
    std::printf("%s  %2d  %s: %s\n", ok ? "PASS" : "FAIL", idx, what.c_str(), detail.c_str());
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) { return format_double(v); }

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

// --------------------------------------------------------------------------
// 1. Kernel, superoperator, and mean-form paths agree to 1e-8 relative.
// --------------------------------------------------------------------------
void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    const double tol = 1e-8;
    double worst = 0.0;
    std::string where;
    const auto fs = claimed_catalog();
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
        for (int t = 0; t < 200; ++t) {
            Rng rng = Rng::substream(911, fi * 4096 + static_cast<std::uint64_t>(t));
            const int n = 2 + t % 5;  // 2..6
            const Matrix rho_m = rng.uniform(0.1, 1.0) * random_unit_trace_psd(n, rng);
            const DensityLikeOperator rho(rho_m);
            const Matrix X = random_complex_matrix(n, n, rng);
            const Matrix Y = random_complex_matrix(n, n, rng);
            const Complex a = cptni_metric_kernel(rho, fs[fi], X, Y);
            const Complex b = cptni_metric_superop(rho, fs[fi], X, Y);
            const Complex c = cptni_metric_meanform(rho, fs[fi], X, Y);
            const double dev =
                std::max(std::abs(a - b), std::abs(a - c)) / std::max(1.0, std::abs(a));
            if (dev > worst) {
                worst = dev;
                where = fs[fi].name + " n=" + std::to_string(n);
            }
        }
    }
    const double dt = seconds_since(t0);
    const bool ok = worst <= tol && dt < 30.0;
    report(1, ok, "three evaluation paths agree",
           "7 functions x 200 trials, dims 2-6, worst rel dev " + fmt(worst) + " (" + where +
               "), tol 1e-8, " + fmt(dt) + " s of 30");
}

// --------------------------------------------------------------------------
// 2. Contraction monotonicity: 500 trials per f, dims up to 6, no violations.
// --------------------------------------------------------------------------
void criterion_2() {
    const auto t0 = std::chrono::steady_clock::now();
    TrialConfig cfg;
    cfg.trials = 500;
    cfg.dim_min = 2;
    cfg.dim_max = 6;
    cfg.seed = 42;
    cfg.tol = 1e-8;
    const SuiteReport rep = suite_cptni_monotonicity(cfg);
    const double dt = seconds_since(t0);
    const bool ok = rep.passed() && dt < 60.0;
    report(2, ok, "monotonicity under CPTNI maps",
           std::to_string(rep.trials) + " trials, " + std::to_string(rep.failures) +
               " violations, worst margin " + fmt(rep.worst_margin) + ", " + fmt(dt) +
               " s of 60");
}

// --------------------------------------------------------------------------
// 3. Additivity, convexity, decrease in rho, and the scaling law at 500 trials.
// --------------------------------------------------------------------------
void criterion_3() {
    TrialConfig cfg;
    cfg.trials = 500;
    cfg.seed = 42;
    std::string detail;
    bool ok = true;
    for (const char* name : {"additivity", "convexity", "rho-decrease", "scaling"}) {
        const SuiteReport rep = run_suite(name, cfg);
        ok = ok && rep.passed();
        if (!detail.empty()) detail += "; ";
        detail += std::string(name) + " " + std::to_string(rep.failures) + "/" +
                  std::to_string(rep.trials) + " fail, worst " + fmt(rep.worst_margin);
    }
    report(3, ok, "additivity, convexity, rho-decrease, scaling at 500 trials", detail);
}

// --------------------------------------------------------------------------
// 4. Closed-form fixtures to 1e-12.
// --------------------------------------------------------------------------
void criterion_4() {
    const double tol = 1e-12;
    double worst = 0.0;
    const Matrix e12 = matrix_unit(2, 0, 1);
    const Matrix e11 = matrix_unit(2, 0, 0);

    const DensityLikeOperator half(diag2(0.5, 0.5));
    const auto& right = catalog_entry("right");
    worst = std::max(worst, std::abs(cptni_metric_kernel(half, right, e12, e12) - 2.0));
    worst = std::max(worst, std::abs(cptni_metric_superop(half, right, e12, e12) - 2.0));
    worst = std::max(worst, std::abs(cptni_metric_meanform(half, right, e12, e12) - 2.0));

    const DensityLikeOperator quarter(diag2(0.25, 0.5));
    const auto& left = catalog_entry("left");
    worst = std::max(worst, std::abs(cptni_metric_kernel(quarter, left, e12, e12) - 4.0));
    worst = std::max(worst, std::abs(cptni_metric_superop(quarter, left, e12, e12) - 4.0));
    worst = std::max(worst, std::abs(cptni_metric_meanform(quarter, left, e12, e12) - 4.0));

    // K(E11, E11) = 1 / (p_1 f(1)) for every catalog f, including the control.
    for (const auto& f : catalog())
        worst = std::max(worst, std::abs(cptni_metric_kernel(quarter, f, e11, e11) - 4.0));

    report(4, worst <= tol, "closed-form fixtures",
           "three paths on two pinned values plus 8 f-independent diagonals, worst dev " +
               fmt(worst) + ", tol 1e-12");
}

// --------------------------------------------------------------------------
// 5. Operator monotonicity / concavity / transformer bound for the catalog,
//    its perp and prime transforms, and a control that must fail.
// --------------------------------------------------------------------------
void criterion_5() {
    TrialConfig cfg;
    cfg.trials = 200;
    cfg.seed = 42;
    const SuiteReport rep = suite_function_checks(cfg);
    report(5, rep.passed(), "scalar function checks with transforms and control",
           std::to_string(rep.trials) + " units (" + std::to_string(rep.failures) +
               " failed), worst margin " + fmt(rep.worst_margin) + "; " + rep.note);
}

// --------------------------------------------------------------------------
// 6. Mean identities: transposition, joint monotonicity (including
//    rank-deficient operands through the shifted limit), conjugation bound.
// --------------------------------------------------------------------------
void criterion_6() {
    TrialConfig cfg;
    cfg.trials = 200;
    cfg.seed = 42;
    const SuiteReport rep = suite_mean_checks(cfg);
    report(6, rep.passed(), "operator mean checks",
           std::to_string(rep.trials) + " units (" + std::to_string(rep.failures) +
               " failed), worst margin " + fmt(rep.worst_margin) + "; " + rep.note);
}

// --------------------------------------------------------------------------
// 7. CPTP completion: exact gram, affine action, Choi positivity; the
//    transpose control must fail the Choi test.
// --------------------------------------------------------------------------
void criterion_7() {
    Rng rng(7007);
    double worst_gram = 0.0, worst_affine = 0.0, worst_choi = 0.0;
    bool ok = true;
    for (int t = 0; t < 100; ++t) {
        const int n = 2 + static_cast<int>(rng.uniform_int(3));
        const int m = 2 + static_cast<int>(rng.uniform_int(3));
        const int k = (n + m - 1) / m + static_cast<int>(rng.uniform_int(2));
        const double slack = t % 4 == 0 ? 0.0 : rng.uniform();
        const KrausChannel T = random_cptni(n, m, k, slack, rng);
        const Matrix sigma = random_unit_trace_psd(m, rng);
        const KrausChannel full = complete_to_cptp(T, sigma);

        worst_gram = std::max(
            worst_gram, max_abs(full.gram() - Matrix(Matrix::Identity(n, n))));
        const Matrix A = random_complex_matrix(n, n, rng);
        const Matrix affine = T.apply(A) + (A.trace() - T.apply(A).trace()) * sigma;
        worst_affine =
            std::max(worst_affine, max_abs(full.apply(A) - affine) /
                                       std::max(1.0, max_abs(affine)));
        worst_choi = std::max({worst_choi, -min_eigenvalue(choi_matrix(T)),
                               -min_eigenvalue(choi_matrix(full))});
    }
    ok = ok && worst_gram <= 1e-10 && worst_affine <= 1e-10 && worst_choi <= 1e-9;

    // Embedding then tracing out is the identity channel.
    double worst_rt = 0.0;
    for (int m = 1; m <= 4; ++m) {
        const KrausChannel s1 = embed_channel_S1(m);
        const KrausChannel s2 = partial_trace_channel_S2(m);
        std::vector<Matrix> composed;
        for (const auto& B : s2.kraus())
            for (const auto& A : s1.kraus()) composed.push_back(B * A);
        const KrausChannel S(std::move(composed));
        const Matrix X = random_complex_matrix(2, 2, rng);
        worst_rt = std::max(worst_rt, max_abs(S.apply(X) - X));
    }
    ok = ok && worst_rt <= 1e-12;

    const double transpose_eig = min_eigenvalue(
        choi_matrix(2, [](const Matrix& X) { return Matrix(X.transpose()); }));
    ok = ok && transpose_eig < -0.5;

    report(7, ok, "CPTP completion and Choi certificates",
           "100 channels: gram dev " + fmt(worst_gram) + ", affine dev " + fmt(worst_affine) +
               ", Choi min-eig defect " + fmt(worst_choi) + ", embed-trace roundtrip " +
               fmt(worst_rt) + ", transpose Choi eig " + fmt(transpose_eig));
}

// --------------------------------------------------------------------------
// 8. The b-term breaks direct-sum additivity by exactly 2 b Tr(X1) Tr(X2).
// --------------------------------------------------------------------------
void criterion_8() {
    TrialConfig cfg;
    cfg.trials = 100;
    cfg.seed = 42;
    const SuiteReport rep = demo_cptp_non_additivity(cfg, 1.0);

    const CptpMetricSpec spec = CptpMetricSpec::constant(catalog_entry("sld"), 1.0);
    const Matrix rho = 0.25 * Matrix::Identity(2, 2);
    const Matrix e11 = matrix_unit(2, 0, 0);
    const DensityLikeOperator one(rho, TraceMode::unconstrained);
    const DensityLikeOperator two(direct_sum(rho, rho), TraceMode::unconstrained);
    const double gap = (kumagai_cptp_metric(two, spec, direct_sum(e11, e11), direct_sum(e11, e11)) -
                        2.0 * kumagai_cptp_metric(one, spec, e11, e11))
                           .real();
    const bool ok = rep.passed() && std::abs(gap - 2.0) <= 1e-10;
    report(8, ok, "direct-sum gap of the trace-sensitive family",
           std::to_string(rep.trials) + " instances, worst margin " + fmt(rep.worst_margin) +
               ", pinned witness gap " + fmt(gap) + " vs predicted 2.0");
}

// --------------------------------------------------------------------------
// 9. Verification runs are reproducible end to end through the CLI.
// --------------------------------------------------------------------------
std::string run_cli_hash(const std::string& cmd, int& exit_code) {
    std::string output;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        exit_code = -1;
        return output;
    }
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, got);
    const int status = pclose(pipe);
    exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    const std::string key = "\"hash\": \"";
    const auto pos = output.rfind(key);
    if (pos == std::string::npos) return "";
    return output.substr(pos + key.size(), 16);
}

void criterion_9() {
    const std::string cmd = std::string(QMETRIC_CLI_PATH) + " verify all --seed 42";
    int code1 = -1, code2 = -1;
    const std::string h1 = run_cli_hash(cmd, code1);
    const std::string h2 = run_cli_hash(cmd, code2);
    const bool ok = code1 == 0 && code2 == 0 && h1.size() == 16 && h1 == h2;
    report(9, ok, "seeded verification is reproducible",
           "two `verify all --seed 42` runs: exit " + std::to_string(code1) + "/" +
               std::to_string(code2) + ", hashes " + (h1.empty() ? "<none>" : h1) + " and " +
               (h2.empty() ? "<none>" : h2));
}

// --------------------------------------------------------------------------
// 10. A deliberately broken kernel is detected, and removal heals the run.
// --------------------------------------------------------------------------
void criterion_10() {
    TrialConfig cfg;
    cfg.trials = 10;
    cfg.dim_max = 3;
    cfg.seed = 42;
    cfg.f_names = {"sld", "geo"};

    testing::kernel_perturbation() = 1e-3;
    int broken_suites = 0;
    std::string names;
    try {
        for (const auto& rep : run_all(cfg)) {
            if (!rep.passed()) {
                ++broken_suites;
                if (!names.empty()) names += ",";
                names += rep.suite;
            }
        }
    } catch (...) {
        testing::kernel_perturbation() = 0.0;
        throw;
    }
    testing::kernel_perturbation() = 0.0;
    const bool healed = all_passed(run_all(cfg));
    const bool ok = broken_suites >= 1 && healed;
    report(10, ok, "kernel mutation is detected and healing restores green",
           "perturbation 1e-3 broke " + std::to_string(broken_suites) + " suite(s) [" + names +
               "], clean rerun " + (healed ? "passed" : "failed"));
}

} // namespace

int main() {
    std::printf("acceptance: quantum monotone metric library\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    if (g_failures == 0)
        std::printf("acceptance: all 10 criteria passed\n");
    else
        std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
