// Command-line front end: validate configs, report landmark quantities,
// solve single premiums into contract curves, and sweep premium menus.
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "indemnity/config.hpp"
#include "indemnity/curve.hpp"
#include "indemnity/landmarks.hpp"
#include "indemnity/oracle.hpp"
#include "indemnity/rdu.hpp"
#include "indemnity/yaari.hpp"

namespace {

constexpr const char* kToolVersion = "1.0.0";

using namespace indemnity;
using nlohmann::json;

const char* regime_name(const Contract& c) {
    switch (c.shape) {
        case Contract::Shape::Full: return "Full";
        case Contract::Shape::NoCoverage: return "NoCoverage";
        case Contract::Shape::Deductible: return "Deductible";
        case Contract::Shape::Threefold: return "Threefold";
    }
    return "?";
}

json finite_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

// One solved premium, utility-dispatched: identity goes through the
// closed-form dual-criterion solver, concave utilities through the general
// one. Objective and certainty equivalent use the common quadrature.
struct SolveOutcome {
    Contract contract;
    double lambda_star = 0.0;
    bool boundary = false;
    double premium_residual = 0.0;
    double inner_residual = 0.0;
    double objective = 0.0;
    double certainty_equivalent = 0.0;
    double expected_ind = 0.0;
};

SolveOutcome solve_one(const RunConfig& cfg, double pi) {
    const ProblemSpec problem = make_problem(cfg.W0, pi, cfg.rho, cfg.loss);
    SolveOutcome out;
    if (cfg.utility.ara_class() == UtilitySpec::AraClass::Identity) {
        const YaariSolution sol =
            solve_yaari_detailed(problem, cfg.weighting, cfg.loss, cfg.tol);
        out.contract = sol.contract;
        out.lambda_star = sol.lambda_star;
        out.boundary = sol.boundary;
        out.premium_residual = sol.premium_residual;
    } else {
        const RduSolution sol = solve_rdu_detailed(problem, cfg.utility,
                                                  cfg.weighting, cfg.loss,
                                                  cfg.tol);
        out.contract = sol.contract;
        out.lambda_star = sol.lambda_star;
        out.boundary = sol.boundary;
        out.premium_residual = sol.residual.premium_residual;
        out.inner_residual = sol.residual.inner_residual;
    }
    out.objective = contract_objective(problem, cfg.utility, cfg.weighting,
                                       cfg.loss, out.contract, cfg.tol);
    out.certainty_equivalent = cfg.utility.inverse(out.objective);
    out.expected_ind = expected_indemnity(cfg.loss, out.contract, cfg.tol);
    return out;
}

json thresholds_json(const RunConfig& cfg, const Contract& c) {
    const auto [x_lo, x_hi] = loss_breakpoints(c, cfg.loss);
    json t;
    t["shape"] = regime_name(c);
    if (c.shape == Contract::Shape::Deductible) {
        t["q_z"] = c.q;
        t["x_deductible"] = x_lo;
    } else if (c.shape == Contract::Shape::Threefold) {
        t["lower_z"] = c.lower;
        t["upper_z"] = c.upper;
        t["x_lo"] = x_lo;
        t["x_hi"] = x_hi;
    }
    return t;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char ch : s) {
        quoted += ch;
        if (ch == '"') quoted += '"';
    }
    quoted += '"';
    return quoted;
}

// ---------------------------------------------------------------- validate

int cmd_validate(const RunConfig& cfg) {
    std::vector<ValidationClause> clauses;

    const ValidationReport wrep = validate_weighting(cfg.weighting, 1000);
    clauses.insert(clauses.end(), wrep.clauses.begin(), wrep.clauses.end());

    double floor = cfg.W0 - cfg.loss.M;
    for (double pi : cfg.premiums) floor = std::min(floor, cfg.W0 - pi - cfg.loss.M);
    const bool needs_positive = cfg.utility.requires_positive_wealth();
    {
        ValidationClause c;
        c.name = "wealth_floor";
        const double uniform =
            cfg.W0 - (1.0 + cfg.rho) * cfg.loss.mean - cfg.loss.M;
        c.pass = !needs_positive || floor > 0.0;
        c.detail = "worst-case wealth W0 - pi - M = " + format_number(floor) +
                   " at the largest configured premium; premium-independent "
                   "floor W0 - (1+rho)E[X] - M = " +
                   format_number(uniform) +
                   (needs_positive ? " (binding: utility needs positive wealth)"
                                   : " (informational: utility is defined on "
                                     "all wealth levels)");
        clauses.push_back(c);
    }
    {
        const double lo = needs_positive ? std::max(floor, 1e-9) : floor;
        const ValidationReport urep =
            validate_utility(cfg.utility, lo, cfg.W0, 200);
        clauses.insert(clauses.end(), urep.clauses.begin(), urep.clauses.end());
    }
    if (wrep.all_pass()) {
        try {
            const LandmarkCertificate cert =
                compute_landmarks(cfg.weighting, cfg.tol);
            const double W = cfg.W0 - (1.0 + cfg.rho) * cfg.loss.mean;
            const ValidationReport drep = validate_weighting_dominance(
                cfg.utility, cfg.weighting, cfg.loss, W, cert.a, 400);
            clauses.insert(clauses.end(), drep.clauses.begin(),
                           drep.clauses.end());
        } catch (const SolverError& e) {
            clauses.push_back({"weighting_landmarks", false, e.what()});
        }
    } else {
        clauses.push_back({"weighting_landmarks", false,
                           "skipped: weighting shape checks failed"});
    }

    bool all = true;
    for (const ValidationClause& c : clauses) {
        all = all && c.pass;
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " — "
                  << c.detail << "\n";
    }
    std::cout << (all ? "all assumption checks passed"
                      : "assumption checks FAILED")
              << "\n";
    return all ? 0 : 1;
}

// --------------------------------------------------------------- landmarks

int cmd_landmarks(const RunConfig& cfg) {
    const LandmarkCertificate cert = compute_landmarks(cfg.weighting, cfg.tol);
    auto line = [](const std::string& k, double v) {
        std::cout << k << " = " << format_number(v) << "\n";
    };
    line("a", cert.a);
    line("b", cert.b);
    line("c", cert.c);
    line("lambda_hat", cert.lambda_hat);

    const double load = 1.0 + cfg.rho;
    if (cfg.utility.ara_class() == UtilitySpec::AraClass::Identity) {
        const double K_c = k_of(cert.c, cfg.loss, cfg.tol);
        line("K_c", K_c);
        line("pi_c", load * (cfg.loss.mean - K_c));
        return 0;
    }
    const ProblemSpec problem =
        make_problem(cfg.W0, cfg.premiums.front(), cfg.rho, cfg.loss);
    const RduLandmarks rl = compute_rdu_landmarks(problem, cfg.utility,
                                                  cfg.weighting, cfg.loss,
                                                  cfg.tol);
    std::cout << "premium = " << format_number(problem.pi) << "\n";
    line("l_Delta", rl.l_Delta);
    line("K_Delta", rl.K_Delta);
    line("pi_hat", load * (cfg.loss.mean - rl.K_Delta));
    if (cfg.utility.ara_class() == UtilitySpec::AraClass::StrictlyDecreasingARA) {
        line("l_Delta_a", rl.l_Delta_a);
        line("l_Delta_c", rl.l_Delta_c);
        line("Delta_tilde", rl.Delta_tilde);
        line("Delta_bar", rl.Delta_bar);
        line("deductible_below_premium", load * (cfg.loss.mean - rl.Delta_bar));
        line("threefold_above_premium", load * (cfg.loss.mean - rl.Delta_tilde));
    }
    return 0;
}

// ------------------------------------------------------------------- solve

int cmd_solve(const RunConfig& cfg, const std::string& out_path,
              const std::string& format, bool oracle_flag, int oracle_n,
              int samples) {
    if (cfg.premium_is_grid)
        throw ConfigError(
            "solve needs a single 'premium'; use the menu command for "
            "'premium_grid'");
    const double pi = cfg.premiums.front();
    const SolveOutcome outcome = solve_one(cfg, pi);
    const ContractCurve curve =
        build_curve(cfg.loss, outcome.contract, samples);

    const bool run_oracle = oracle_flag || cfg.oracle.enabled;
    const ProblemSpec problem = make_problem(cfg.W0, pi, cfg.rho, cfg.loss);
    OptimalityReport opt;
    OracleSolution osol;
    double oracle_gap = 0.0;
    if (run_oracle) {
        opt = check_optimality(problem, cfg.utility, cfg.weighting, cfg.loss,
                               outcome.contract, cfg.tol);
        const int n = oracle_n > 0 ? oracle_n : cfg.oracle.n;
        osol = oracle_solve(problem, cfg.utility, cfg.weighting, cfg.loss, n,
                            cfg.tol);
        oracle_gap = outcome.objective - osol.objective;
    }

    std::ostringstream summary;
    summary << "regime = " << regime_name(outcome.contract)
            << (outcome.boundary ? " (regime boundary)" : "") << "\n"
            << "lambda_star = " << format_number(outcome.lambda_star) << "\n"
            << "expected_indemnity = " << format_number(outcome.expected_ind)
            << "\n"
            << "objective = " << format_number(outcome.objective) << "\n"
            << "certainty_equivalent = "
            << format_number(outcome.certainty_equivalent) << "\n"
            << "premium_residual = " << format_number(outcome.premium_residual)
            << "\n";
    const auto [x_lo, x_hi] = loss_breakpoints(outcome.contract, cfg.loss);
    if (outcome.contract.shape == Contract::Shape::Deductible)
        summary << "deductible: q_z = " << format_number(outcome.contract.q)
                << ", x = " << format_number(x_lo) << "\n";
    if (outcome.contract.shape == Contract::Shape::Threefold)
        summary << "threefold: z = [" << format_number(outcome.contract.lower)
                << ", " << format_number(outcome.contract.upper) << "], x = ["
                << format_number(x_lo) << ", " << format_number(x_hi) << "]\n";
    if (run_oracle) {
        summary << "optimality: " << (opt.verdict ? "pass" : "FAIL")
                << ", max_violation = " << format_number(opt.max_violation)
                << ", tolerance = " << format_number(opt.tolerance) << "\n"
                << "oracle: n = " << osol.program.n
                << ", objective = " << format_number(osol.objective)
                << ", solver - oracle = " << format_number(oracle_gap) << "\n";
    }

    if (format == "csv") {
        if (out_path.empty()) {
            write_curve_csv(std::cout, curve);
            std::cerr << summary.str();
        } else {
            std::ofstream f(out_path, std::ios::binary);
            if (!f)
                throw ConfigError("cannot open output file '" + out_path + "'");
            write_curve_csv(f, curve);
            std::cout << summary.str();
        }
    } else {
        json doc;
        doc["tool"] = {{"name", "indemnity"}, {"version", kToolVersion}};
        doc["premium"] = pi;
        doc["regime"] = regime_name(outcome.contract);
        doc["boundary"] = outcome.boundary;
        doc["thresholds"] = thresholds_json(cfg, outcome.contract);
        doc["lambda_star"] = finite_or_null(outcome.lambda_star);
        doc["objective"] = outcome.objective;
        doc["certainty_equivalent"] = outcome.certainty_equivalent;
        doc["expected_indemnity"] = outcome.expected_ind;
        doc["residuals"] = {{"premium", outcome.premium_residual},
                            {"inner", outcome.inner_residual}};
        const LandmarkCertificate cert =
            compute_landmarks(cfg.weighting, cfg.tol);
        doc["landmarks"] = {{"a", cert.a},
                            {"b", cert.b},
                            {"c", cert.c},
                            {"lambda_hat", cert.lambda_hat}};
        if (cfg.utility.ara_class() == UtilitySpec::AraClass::Identity &&
            outcome.contract.shape == Contract::Shape::Threefold) {
            doc["diagnostics"] = {
                {"f_lower", f_value(cfg.weighting, outcome.contract.lower)},
                {"f_upper", f_value(cfg.weighting, outcome.contract.upper)}};
        }
        if (run_oracle) {
            json viols = json::array();
            for (const OptimalityViolation& v : opt.violations)
                viols.push_back({{"z", v.z},
                                 {"n_value", v.n_value},
                                 {"regime", v.regime},
                                 {"severity", v.severity}});
            doc["optimality"] = {{"verdict", opt.verdict ? "pass" : "fail"},
                                 {"lambda_star", finite_or_null(opt.lambda_star)},
                                 {"max_violation", opt.max_violation},
                                 {"tolerance", opt.tolerance},
                                 {"premium_residual", opt.premium_residual},
                                 {"violations", viols}};
            doc["oracle"] = {{"n", osol.program.n},
                             {"objective", osol.objective},
                             {"solver_minus_oracle", oracle_gap},
                             {"lambda", osol.lambda}};
        }
        json rows = json::array();
        for (const CurveSample& s : curve.samples)
            rows.push_back({{"x", s.x},
                            {"indemnity", s.indemnity},
                            {"retention", s.retention},
                            {"quantile_z", s.quantile_z}});
        doc["samples"] = rows;
        const std::string text = doc.dump(2) + "\n";
        if (out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream f(out_path, std::ios::binary);
            if (!f)
                throw ConfigError("cannot open output file '" + out_path + "'");
            f << text;
            std::cout << summary.str();
        }
    }
    return run_oracle && !opt.verdict ? 1 : 0;
}

// -------------------------------------------------------------------- menu

struct MenuRow {
    double premium = 0.0;
    bool ok = false;
    std::string message;
    SolveOutcome outcome;
};

int menu_thread_count(std::size_t rows) {
    if (const char* env = std::getenv("INDEMNITY_MENU_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return static_cast<int>(std::min<std::size_t>(v, rows));
    }
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    return static_cast<int>(std::min<std::size_t>(hw, rows));
}

int cmd_menu(const RunConfig& cfg, const std::string& out_path,
             const std::string& format) {
    if (!cfg.premium_is_grid)
        throw ConfigError(
            "menu needs a 'premium_grid'; use the solve command for a single "
            "'premium'");
    compute_landmarks(cfg.weighting, cfg.tol);  // warm the shared memo

    std::vector<MenuRow> rows(cfg.premiums.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= rows.size()) return;
            rows[i].premium = cfg.premiums[i];
            try {
                rows[i].outcome = solve_one(cfg, cfg.premiums[i]);
                rows[i].ok = true;
            } catch (const std::exception& e) {
                rows[i].message = e.what();
            }
        }
    };
    const int n_threads = menu_thread_count(rows.size());
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    std::ostringstream body;
    bool any_failed = false;
    if (format == "csv") {
        body << "premium,status,regime,lower_z,upper_z,deductible_z,x_lo,x_hi,"
                "expected_indemnity,lambda_star,certainty_equivalent,boundary,"
                "message\n";
        for (const MenuRow& r : rows) {
            body << format_number(r.premium) << ',';
            if (!r.ok) {
                any_failed = true;
                body << "failed,,,,,,,,,,," << csv_escape(r.message) << "\n";
                continue;
            }
            const Contract& c = r.outcome.contract;
            const auto [x_lo, x_hi] = loss_breakpoints(c, cfg.loss);
            body << "ok," << regime_name(c) << ',';
            if (c.shape == Contract::Shape::Threefold)
                body << format_number(c.lower) << ',' << format_number(c.upper);
            else
                body << ',';
            body << ',';
            if (c.shape == Contract::Shape::Deductible) body << format_number(c.q);
            body << ',' << format_number(x_lo) << ',' << format_number(x_hi)
                 << ',' << format_number(r.outcome.expected_ind) << ','
                 << format_number(r.outcome.lambda_star) << ','
                 << format_number(r.outcome.certainty_equivalent) << ','
                 << (r.outcome.boundary ? "true" : "false") << ",\n";
        }
    } else {
        json doc;
        doc["tool"] = {{"name", "indemnity"}, {"version", kToolVersion}};
        json jrows = json::array();
        for (const MenuRow& r : rows) {
            json row;
            row["premium"] = r.premium;
            if (!r.ok) {
                any_failed = true;
                row["status"] = "failed";
                row["message"] = r.message;
            } else {
                row["status"] = "ok";
                row["regime"] = regime_name(r.outcome.contract);
                row["thresholds"] = thresholds_json(cfg, r.outcome.contract);
                row["expected_indemnity"] = r.outcome.expected_ind;
                row["lambda_star"] = finite_or_null(r.outcome.lambda_star);
                row["certainty_equivalent"] = r.outcome.certainty_equivalent;
                row["boundary"] = r.outcome.boundary;
            }
            jrows.push_back(row);
        }
        doc["rows"] = jrows;
        body << doc.dump(2) << "\n";
    }

    if (out_path.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw ConfigError("cannot open output file '" + out_path + "'");
        f << body.str();
        std::cout << rows.size() << " premiums solved, "
                  << (any_failed ? "with failures" : "all ok") << "\n";
    }
    return any_failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal insurance indemnity schedules under probability "
                 "weighting: solver, landmark analysis, and verification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::string config_path, out_path, format = "csv";
    double tol_override = 0.0;
    bool oracle_flag = false;
    int oracle_n = 0, samples = 501;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "path to the JSON run config")
            ->required();
        sub->add_option("--tol", tol_override,
                        "override both absolute and relative tolerance");
    };
    CLI::App* validate = app.add_subcommand(
        "validate", "check the configured preferences and loss assumptions");
    add_common(validate);
    CLI::App* landmarks = app.add_subcommand(
        "landmarks", "print the weighting landmarks and regime thresholds");
    add_common(landmarks);
    CLI::App* solve = app.add_subcommand(
        "solve", "solve one premium and emit the contract curve");
    add_common(solve);
    solve->add_option("--out", out_path, "output file (default: stdout)");
    solve->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    solve->add_flag("--oracle", oracle_flag,
                    "run the optimality check and the brute-force maximizer");
    solve->add_option("--oracle-n", oracle_n, "oracle grid size (>= 100)");
    solve->add_option("--samples", samples, "curve samples (default 501)")
        ->check(CLI::Range(2, 1000000));
    CLI::App* menu = app.add_subcommand(
        "menu", "solve a premium grid into a contract menu");
    add_common(menu);
    menu->add_option("--out", out_path, "output file (default: stdout)");
    menu->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = load_config(config_path);
        if (tol_override > 0.0) {
            cfg.tol.abs_tol = tol_override;
            cfg.tol.rel_tol = tol_override;
        }
        if (oracle_n != 0 && oracle_n < 100)
            throw ConfigError("--oracle-n must be >= 100");
        if (validate->parsed()) return cmd_validate(cfg);
        if (landmarks->parsed()) return cmd_landmarks(cfg);
        if (solve->parsed())
            return cmd_solve(cfg, out_path, format, oracle_flag, oracle_n,
                             samples);
        return cmd_menu(cfg, out_path, format);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
