#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmetric/harness.hpp"

namespace {

using namespace qmetric;

int emit_error(const std::string& type, const std::string& message, int code) {
    json err;
    err["type"] = type;
    err["message"] = message;
    json doc;
    doc["error"] = err;
    std::cout << doc.dump() << "\n";
    return code;
}

void parse_dims(const std::string& s, int& lo, int& hi) {
    try {
        const auto dash = s.find('-');
        if (dash == std::string::npos) {
            lo = hi = std::stoi(s);
        } else {
            lo = std::stoi(s.substr(0, dash));
            hi = std::stoi(s.substr(dash + 1));
        }
    } catch (const std::exception&) {
        throw ParseError("bad --dims '" + s + "' (expected N or MIN-MAX)");
    }
    if (lo < 1 || hi < lo) throw ParseError("bad --dims range '" + s + "'");
}

struct EvalOpts {
    std::vector<std::string> operands;
    std::string metric = "cptni";
    std::string f_name = "sld";
    std::string trace_mode = "bounded";
    double b = 1.0;
    double c = 0.0;
    bool cross_check = false;
};

int cmd_eval(const EvalOpts& o) {
    std::string metric = o.metric;
    Matrix rho, X, Y;
    bool have_rho = false, have_x = false, have_y = false;
    for (const auto& tok : o.operands) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) {
            metric = tok;
            continue;
        }
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "rho") {
            rho = parse_matrix_spec(val);
            have_rho = true;
        } else if (key == "X") {
            X = parse_matrix_spec(val);
            have_x = true;
        } else if (key == "Y") {
            Y = parse_matrix_spec(val);
            have_y = true;
        } else {
            throw ParseError("eval: unknown operand '" + key + "' (expected rho=, X=, Y=)");
        }
    }
    if (!have_rho || !have_x) throw ParseError("eval: rho= and X= operands are required");
    if (!have_y) Y = X;
    if (o.cross_check && metric != "cptni")
        throw ParseError("eval: --cross-check applies to the cptni metric only");

    const MonotoneFunction f = catalog_entry(o.f_name);
    const DensityLikeOperator d(rho, trace_mode_from_string(o.trace_mode));
    Complex v;
    if (metric == "cptni") {
        v = cptni_metric_kernel(d, f, X, Y);
    } else if (metric == "petz") {
        v = petz_cptp_metric(d, CptpMetricSpec::constant(f, 0.0, o.c), X, Y);
    } else if (metric == "kumagai") {
        v = kumagai_cptp_metric(d, CptpMetricSpec::constant(f, o.b), X, Y);
    } else {
        throw ParseError("eval: unknown metric '" + metric +
                         "' (expected cptni, petz, or kumagai)");
    }
    std::cout << format_double(v.real()) << " " << format_double(v.imag()) << "\n";
    if (o.cross_check) {
        const Complex vs = cptni_metric_superop(d, f, X, Y);
        const Complex vm = cptni_metric_meanform(d, f, X, Y);
        const double dev = std::max(std::abs(v - vs), std::abs(v - vm)) /
                           std::max(std::abs(v), 1e-300);
        std::cout << "cross-check " << format_double(dev) << "\n";
    }
    return 0;
}

int cmd_validate_channel(const std::string& path) {
    const json doc = load_json_file(path);
    json report;
    if (is_transpose_pseudo_channel(doc)) {
        const int n = transpose_pseudo_channel_dim(doc);
        const Matrix choi =
            choi_matrix(n, [](const Matrix& x) { return Matrix(x.transpose()); });
        report["map"] = "transpose";
        report["classification"] = "invalid";
        report["dim"] = n;
        report["choi_min_eigenvalue"] = min_eigenvalue(choi);
    } else {
        const KrausChannel T = channel_from_json(doc);
        const Matrix defect =
            Matrix(Matrix::Identity(T.in_dim(), T.in_dim())) - T.gram();
        report["classification"] = to_string(T.classification());
        report["in_dim"] = T.in_dim();
        report["out_dim"] = T.out_dim();
        report["kraus_count"] = T.kraus().size();
        report["defect_norm"] = T.defect_norm();
        report["defect_max_eigenvalue"] = max_eigenvalue(defect);
        report["choi_min_eigenvalue"] = min_eigenvalue(choi_matrix(T));
    }
    std::cout << report.dump(2) << "\n";
    return 0;
}

struct HarnessOpts {
    std::vector<std::string> suites;
    std::vector<std::string> f_names;
    std::uint64_t seed = 42;
    int trials = 200;
    double tol = 1e-8;
    double b = 1.0;
    std::string dims = "2-5";
    std::string trace_mode = "bounded";
    std::string dump_dir;
};

TrialConfig make_config(const HarnessOpts& o) {
    TrialConfig cfg;
    cfg.trials = o.trials;
    parse_dims(o.dims, cfg.dim_min, cfg.dim_max);
    cfg.f_names = o.f_names;
    cfg.seed = o.seed;
    cfg.tol = o.tol;
    cfg.trace_mode = trace_mode_from_string(o.trace_mode);
    for (const auto& name : cfg.f_names) catalog_entry(name);  // validate early
    return cfg;
}

int cmd_verify(const HarnessOpts& o) {
    const TrialConfig cfg = make_config(o);
    std::vector<std::string> names = o.suites;
    if (names.empty()) names = {"all"};
    if (names.size() == 1 && names[0] == "all") names = suite_names();
    for (const auto& name : names)
        if (std::find(suite_names().begin(), suite_names().end(), name) == suite_names().end())
            throw ParseError("unknown suite: " + name);

    std::vector<SuiteReport> reports;
    reports.reserve(names.size());
    for (const auto& name : names) reports.push_back(run_suite(name, cfg, o.b));

    json out;
    out["reports"] = json::array();
    for (const auto& r : reports) out["reports"].push_back(r.to_json());
    out["hash"] = report_set_hash(reports);
    if (!o.dump_dir.empty()) {
        std::filesystem::create_directories(o.dump_dir);
        json paths = json::array();
        for (const auto& r : reports) {
            int k = 0;
            for (const auto& inst : r.failing_instances) {
                const std::string p =
                    o.dump_dir + "/" + r.suite + "-" + std::to_string(k++) + ".json";
                save_json_file(p, inst);
                paths.push_back(p);
            }
        }
        out["dumps"] = paths;
    }
    std::cout << out.dump(2) << "\n";
    return all_passed(reports) ? 0 : 1;
}

int cmd_demo(const HarnessOpts& o) {
    const TrialConfig cfg = make_config(o);
    const SuiteReport rep = demo_cptp_non_additivity(cfg, o.b);
    std::cout << rep.to_json().dump(2) << "\n";
    return rep.passed() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"monotone metrics on positive operators: evaluation and verification"};
    app.require_subcommand(1);

    EvalOpts eo;
    CLI::App* eval = app.add_subcommand("eval", "evaluate a metric on explicit operands");
    eval->add_option("operands", eo.operands,
                     "metric name and key=value operands (rho=, X=, Y=; "
                     "values are diag(...), Eij(n,i,j), or a JSON file path)");
    eval->add_option("--metric", eo.metric, "cptni | petz | kumagai");
    eval->add_option("--f", eo.f_name, "monotone function catalog name");
    eval->add_option("--b", eo.b, "trace-term coefficient of the kumagai metric");
    eval->add_option("--c", eo.c, "trace-term constant of the petz metric");
    eval->add_option("--trace-mode", eo.trace_mode, "bounded | free");
    eval->add_flag("--cross-check", eo.cross_check,
                   "also run the superoperator and mean-form paths");

    std::string channel_path;
    CLI::App* validate =
        app.add_subcommand("validate-channel", "classify a Kraus channel file");
    validate->add_option("file", channel_path, "channel JSON document")->required();

    HarnessOpts vo;
    CLI::App* verify = app.add_subcommand("verify", "run randomized verification suites");
    verify->add_option("suites", vo.suites, "suite names (default: all)");
    verify->add_option("--seed", vo.seed, "RNG seed")->envname("QMETRIC_SEED");
    verify->add_option("--trials", vo.trials, "trials per function per suite");
    verify->add_option("--tol", vo.tol, "relative slack for inequality suites");
    verify->add_option("--dims", vo.dims, "dimension range, N or MIN-MAX");
    verify->add_option("--f", vo.f_names, "restrict to these catalog functions");
    verify->add_option("--b", vo.b, "trace-term coefficient for cptp-demo");
    verify->add_option("--trace-mode", vo.trace_mode, "bounded | free");
    verify->add_option("--dump-dir", vo.dump_dir, "write failing instances here");

    HarnessOpts dopt;
    CLI::App* demo = app.add_subcommand("demo", "show the CPTP direct-sum additivity gap");
    demo->add_option("--b", dopt.b, "trace-term coefficient");
    demo->add_option("--seed", dopt.seed, "RNG seed")->envname("QMETRIC_SEED");
    demo->add_option("--trials", dopt.trials, "random instances to test");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(eval)) return cmd_eval(eo);
        if (app.got_subcommand(validate)) return cmd_validate_channel(channel_path);
        if (app.got_subcommand(verify)) return cmd_verify(vo);
        if (app.got_subcommand(demo)) return cmd_demo(dopt);
    } catch (const DemoFailure& e) {
        emit_error("demo-failure", e.what(), 1);
        return 1;
    } catch (const ParseError& e) {
        return emit_error("parse-error", e.what(), 2);
    } catch (const Error& e) {
        return emit_error("validation-error", e.what(), 2);
    } catch (const std::exception& e) {
        return emit_error("internal-error", e.what(), 2);
    }
    return 2;
}
