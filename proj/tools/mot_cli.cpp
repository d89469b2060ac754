// Command-line front end: robust prices, hedges, closed-form oracles, the
// built-in counterexample suite, and convergence studies. JSON in, JSON
// reports and CSV series out.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mot/auxiliary.hpp"
#include "mot/closed_forms.hpp"
#include "mot/counterexamples.hpp"
#include "mot/hedging.hpp"
#include "mot/json_io.hpp"
#include "mot/simulation.hpp"

namespace {

using mot::Json;

struct Config {
    std::string mu_path, nu_path, payoff_path;
    std::string payoff_type;  // empty = from file; else risk-reversal|butterfly
    std::string a_text, b_text, h_text;
    std::string averaging = "fixed:0.5";
    std::string n_list = "4,16,64,256";
    std::string out_path;
    std::string potentials_csv, slacks_csv, paths_csv, convergence_csv;
    std::string perturb_dual;
    int grid_refine = 1;
    int n = 16;
    std::string horizon = "1";
    bool exact = false;
    bool to_stdout = false;
    double tol_override = 0;  // 0 = keep defaults
};

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void emit(const Config& cfg, const std::string& default_name, Json report) {
    report["generatedAt"] = timestamp();
    const std::string path = cfg.out_path.empty() ? default_name : cfg.out_path;
    if (cfg.to_stdout) {
        std::cout << report.dump(2) << "\n";
        if (!cfg.out_path.empty()) mot::write_text_file(path, report.dump(2) + "\n");
    } else {
        mot::write_text_file(path, report.dump(2) + "\n");
        std::cout << path << "\n";
    }
}

template <class S>
struct Problem {
    mot::DiscreteMeasure<S> mu;
    mot::DiscreteMeasure<S> nu;
    mot::PiecewiseLinear<S> payoff;
};

template <class S>
mot::PiecewiseLinear<S> payoff_from_config(const Config& cfg) {
    if (!cfg.payoff_type.empty()) {
        const S a = mot::scalar_from_string<S>(cfg.a_text);
        if (cfg.payoff_type == "risk-reversal")
            return mot::risk_reversal_payoff(a, mot::scalar_from_string<S>(cfg.b_text));
        if (cfg.payoff_type == "butterfly")
            return mot::butterfly_payoff(a, mot::scalar_from_string<S>(cfg.h_text));
        throw mot::ConfigError("unknown payoff type: " + cfg.payoff_type);
    }
    if (cfg.payoff_path.empty()) throw mot::ConfigError("missing --payoff");
    const Json j = mot::load_json_file(cfg.payoff_path);
    if (j.contains("builtin")) {
        const std::string kind = j.at("builtin").get<std::string>();
        const S a = mot::detail::scalar_from_json<S>(j.at("a"));
        if (kind == "risk-reversal")
            return mot::risk_reversal_payoff(a, mot::detail::scalar_from_json<S>(j.at("b")));
        if (kind == "butterfly")
            return mot::butterfly_payoff(a, mot::detail::scalar_from_json<S>(j.at("h")));
        throw mot::ConfigError("unknown builtin payoff: " + kind);
    }
    return mot::pwl_from_json<S>(j);
}

template <class S>
Problem<S> load_problem(const Config& cfg) {
    if (cfg.mu_path.empty() || cfg.nu_path.empty())
        throw mot::ConfigError("missing --mu/--nu");
    return Problem<S>{mot::measure_from_json<S>(mot::load_json_file(cfg.mu_path)),
                      mot::measure_from_json<S>(mot::load_json_file(cfg.nu_path)),
                      payoff_from_config<S>(cfg)};
}

template <class S>
mot::AveragingProcess<S> averaging_from_config(const Config& cfg) {
    const S horizon = mot::scalar_from_string<S>(cfg.horizon);
    const std::string& a = cfg.averaging;
    if (a == "asian") return mot::AveragingProcess<S>::asian(horizon);
    if (a.rfind("fixed:", 0) == 0)
        return mot::AveragingProcess<S>::fixed_time(mot::scalar_from_string<S>(a.substr(6)),
                                                    horizon);
    if (a.rfind("european:", 0) == 0)
        return mot::AveragingProcess<S>::european_at(mot::scalar_from_string<S>(a.substr(9)),
                                                     horizon);
    throw mot::ConfigError("unknown averaging spec: " + a +
                           " (use asian | fixed:<t0> | european:<T'>)");
}

template <class S>
mot::AuxOptions<S> aux_options(const Config& cfg) {
    mot::AuxOptions<S> opts;
    if (cfg.tol_override > 0 && !mot::scalar_traits<S>::exact) {
        opts.check_tol = S(cfg.tol_override);
        opts.lp.feas_tol = S(cfg.tol_override);
    }
    return opts;
}

template <class S>
Json value_json(const S& v) {
    Json j;
    j["value"] = mot::to_double(v);
    j["valueString"] = mot::scalar_to_string(v);
    return j;
}

template <class S>
Json diagnostics_json(const mot::DiagnosticsReport<S>& diag) {
    Json arr = Json::array();
    for (const auto& c : diag.clauses) {
        Json j;
        j["clause"] = c.name;
        j["pass"] = c.pass;
        if (!c.witness.empty()) j["witness"] = c.witness;
        arr.push_back(j);
    }
    return arr;
}

std::string csv_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

template <class S>
int cmd_price(const Config& cfg) {
    const Problem<S> prob = load_problem<S>(cfg);
    const auto opts = aux_options<S>(cfg);
    Json report;
    report["command"] = "price";
    report["mode"] = mot::scalar_traits<S>::exact ? "exact" : "float";

    bool irreducible = true;
    try {
        mot::domain_of(prob.mu, prob.nu);
    } catch (const mot::NotIrreducible&) {
        irreducible = false;
    }

    if (irreducible) {
        const auto dom = mot::domain_of(prob.mu, prob.nu);
        auto sol = mot::solve_primal(prob.mu, prob.nu, prob.payoff, cfg.grid_refine, opts);
        report.update(value_json(sol.value));
        report["theta"] = mot::measure_to_json(sol.theta);
        report["dual"] = Json{{"phi", mot::pwl_to_json(sol.dual.phi)},
                              {"psi", mot::pwl_to_json(sol.dual.psi)}};
        report["gridSize"] = sol.grid.size();
        report["domain"] = Json{{"left", mot::to_double(dom.left)},
                                {"right", mot::to_double(dom.right)},
                                {"leftClosed", dom.left_closed},
                                {"rightClosed", dom.right_closed}};
        auto diag = mot::dual_diagnostics(sol, prob.mu, prob.nu, prob.payoff, dom,
                                          opts.check_tol);
        report["diagnostics"] = diagnostics_json(diag);
        report["diagnosticsPass"] = diag.all_pass();

        if (!cfg.potentials_csv.empty()) {
            std::ostringstream csv;
            csv << "x,u_mu,u_theta,u_nu\n";
            for (const S& g : sol.grid)
                csv << csv_number(mot::to_double(g)) << ","
                    << csv_number(mot::to_double(prob.mu.potential(g))) << ","
                    << csv_number(mot::to_double(sol.theta.potential(g))) << ","
                    << csv_number(mot::to_double(prob.nu.potential(g))) << "\n";
            mot::write_text_file(cfg.potentials_csv, csv.str());
        }
    } else {
        const auto dom_grid = mot::merged_support(prob.mu, prob.nu);
        auto grid = dom_grid;
        for (const S& b : prob.payoff.breakpoints())
            if (b >= dom_grid.front() && b <= dom_grid.back()) grid.push_back(b);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        for (int r = 0; r < cfg.grid_refine; ++r) mot::detail::refine_once(grid);
        auto sol = mot::solve_nonirreducible(prob.mu, prob.nu, prob.payoff, grid, opts);
        report.update(value_json(sol.total));
        report["reducible"] = true;
        report["staticValue"] = mot::to_double(sol.static_value);
        Json comps = Json::array();
        for (std::size_t i = 0; i < sol.components.size(); ++i) {
            Json c;
            c["domain"] = Json{{"left", mot::to_double(sol.components[i].domain.left)},
                               {"right", mot::to_double(sol.components[i].domain.right)}};
            c.update(value_json(sol.solutions[i].value));
            c["theta"] = mot::measure_to_json(sol.solutions[i].theta);
            comps.push_back(c);
        }
        report["components"] = comps;
    }
    emit(cfg, "price-report.json", std::move(report));
    return 0;
}

template <class S>
int cmd_hedge(const Config& cfg) {
    const Problem<S> prob = load_problem<S>(cfg);
    const auto opts = aux_options<S>(cfg);
    const auto A = averaging_from_config<S>(cfg);
    const auto dom = mot::domain_of(prob.mu, prob.nu);

    auto sol = mot::solve_primal(prob.mu, prob.nu, prob.payoff, cfg.grid_refine, opts);
    if (!cfg.perturb_dual.empty()) {
        const S delta = mot::scalar_from_string<S>(cfg.perturb_dual);
        sol.dual.psi = sol.dual.psi.shifted(delta);
    }
    auto coupling = mot::build_two_step(prob.mu, sol.theta, prob.nu, opts.lp);
    auto paths = mot::embed_paths(coupling, cfg.n, mot::scalar_from_string<S>(cfg.horizon));
    const S slack_tol = mot::scalar_traits<S>::exact
                            ? S(0)
                            : (cfg.tol_override > 0 ? S(cfg.tol_override) : S(1e-9));
    auto rep = mot::verify_superhedge(sol.dual, prob.payoff, A, paths, dom, prob.mu, prob.nu,
                                      slack_tol);

    if (!cfg.slacks_csv.empty()) {
        std::ostringstream csv;
        csv << "pathId,X0,XT,avg,payoff,staticLeg,dynamicLeg,slack\n";
        for (const auto& row : rep.rows)
            csv << row.path_id << "," << csv_number(mot::to_double(row.x0)) << ","
                << csv_number(mot::to_double(row.xT)) << ","
                << csv_number(mot::to_double(row.average)) << ","
                << csv_number(mot::to_double(row.payoff)) << ","
                << csv_number(mot::to_double(row.static_leg)) << ","
                << csv_number(mot::to_double(row.dynamic_leg)) << ","
                << csv_number(mot::to_double(row.slack)) << "\n";
        mot::write_text_file(cfg.slacks_csv, csv.str());
    }
    if (!cfg.paths_csv.empty()) {
        std::ostringstream csv;
        csv << "pathId,weight,jumpTimes,values\n";
        for (std::size_t i = 0; i < paths.size(); ++i) {
            csv << i << "," << csv_number(mot::to_double(paths[i].weight)) << ",";
            for (std::size_t k = 0; k < paths[i].path.jump_times().size(); ++k)
                csv << (k ? ";" : "") << csv_number(mot::to_double(paths[i].path.jump_times()[k]));
            csv << ",";
            for (std::size_t k = 0; k < paths[i].path.values().size(); ++k)
                csv << (k ? ";" : "") << csv_number(mot::to_double(paths[i].path.values()[k]));
            csv << "\n";
        }
        mot::write_text_file(cfg.paths_csv, csv.str());
    }

    Json report;
    report["command"] = "hedge";
    report["mode"] = mot::scalar_traits<S>::exact ? "exact" : "float";
    report.update(value_json(sol.value));
    report["paths"] = paths.size();
    report["minSlack"] = mot::to_double(rep.min_slack);
    report["staticCost"] = mot::to_double(rep.static_cost);
    report["portfolioMean"] = mot::to_double(rep.portfolio_mean);
    report["admissibilityGap"] = mot::to_double(rep.admissibility_gap);
    report["pathwiseOk"] = rep.pathwise_ok;
    report["admissible"] = rep.admissible;

    if (!rep.ok()) {
        std::size_t witness = 0;
        for (const auto& row : rep.rows)
            if (row.slack < rep.rows[witness].slack) witness = row.path_id;
        std::cerr << "superhedge violated: path " << witness << " slack "
                  << mot::to_double(rep.rows[witness].slack) << "\n";
        emit(cfg, "hedge-report.json", std::move(report));
        throw mot::SuperhedgeViolation();
    }
    emit(cfg, "hedge-report.json", std::move(report));
    return 0;
}

template <class S>
int cmd_closed_form(const Config& cfg) {
    Config cfg2 = cfg;
    if (cfg2.payoff_type.empty())
        throw mot::ConfigError("closed-form requires --type risk-reversal|butterfly");
    const Problem<S> prob = load_problem<S>(cfg2);
    const auto opts = aux_options<S>(cfg);

    mot::AuxiliarySolution<S> oracle = [&]() {
        const S a = mot::scalar_from_string<S>(cfg.a_text);
        if (cfg.payoff_type == "risk-reversal")
            return mot::risk_reversal_closed_form(prob.mu, prob.nu, a,
                                                  mot::scalar_from_string<S>(cfg.b_text));
        return mot::butterfly_closed_form(prob.mu, prob.nu, a,
                                          mot::scalar_from_string<S>(cfg.h_text));
    }();
    auto lp_sol = mot::solve_primal(prob.mu, prob.nu, prob.payoff, oracle.grid, opts);
    const S gap = mot::abs_value(oracle.value - lp_sol.value);

    Json report;
    report["command"] = "closed-form";
    report["type"] = cfg.payoff_type;
    report["closedForm"] = value_json(oracle.value);
    report["lp"] = value_json(lp_sol.value);
    report["gap"] = mot::to_double(gap);
    report["theta"] = mot::measure_to_json(oracle.theta);
    emit(cfg, "closed-form-report.json", std::move(report));
    return 0;
}

template <class S>
int cmd_convergence(const Config& cfg) {
    const Problem<S> prob = load_problem<S>(cfg);
    const auto opts = aux_options<S>(cfg);
    const S horizon = mot::scalar_from_string<S>(cfg.horizon);
    auto sol = mot::solve_primal(prob.mu, prob.nu, prob.payoff, cfg.grid_refine, opts);
    auto coupling = mot::build_two_step(prob.mu, sol.theta, prob.nu, opts.lp);
    const S target = sol.theta.integrate([&](const S& x) { return prob.payoff(x); });

    std::vector<int> ns;
    std::stringstream ss(cfg.n_list);
    for (std::string item; std::getline(ss, item, ',');) ns.push_back(std::stoi(item));

    std::ostringstream csv;
    csv << "n,price,gap\n";
    Json rows = Json::array();
    for (int n : ns) {
        const S p = mot::price(coupling, n, horizon, prob.payoff,
                               mot::AveragingProcess<S>::asian(horizon));
        const S gap = mot::abs_value(target - p);
        csv << n << "," << csv_number(mot::to_double(p)) << ","
            << csv_number(mot::to_double(gap)) << "\n";
        rows.push_back(Json{{"n", n},
                            {"price", mot::to_double(p)},
                            {"gap", mot::to_double(gap)}});
    }
    if (!cfg.convergence_csv.empty()) mot::write_text_file(cfg.convergence_csv, csv.str());

    Json report;
    report["command"] = "convergence";
    report["target"] = mot::to_double(target);
    report["rows"] = rows;
    emit(cfg, "convergence-report.json", std::move(report));
    return 0;
}

int cmd_counterexamples() {
    const auto results = mot::run_counterexamples();
    bool all = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "\n"
                  << "       expected: " << r.expected << "\n"
                  << "       computed: " << r.computed << "\n";
        all = all && r.pass;
    }
    return all ? 0 : 6;
}

int dispatch(const std::string& command, const Config& cfg) {
    if (command == "price") return cfg.exact ? cmd_price<mot::Rational>(cfg) : cmd_price<double>(cfg);
    if (command == "hedge") return cfg.exact ? cmd_hedge<mot::Rational>(cfg) : cmd_hedge<double>(cfg);
    if (command == "closed-form")
        return cfg.exact ? cmd_closed_form<mot::Rational>(cfg) : cmd_closed_form<double>(cfg);
    if (command == "convergence")
        return cfg.exact ? cmd_convergence<mot::Rational>(cfg) : cmd_convergence<double>(cfg);
    if (command == "counterexamples") return cmd_counterexamples();
    throw mot::ConfigError("unknown command");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust pricing and semi-static hedging for average-style payoffs"};
    app.set_help_flag("--help", "print help");  // keep --h free for the butterfly width
    app.require_subcommand(1);
    Config cfg;

    if (const char* env = std::getenv("MOT_TOL")) cfg.tol_override = std::atof(env);

    auto add_common = [&cfg](CLI::App* sub) {
        sub->add_option("--mu", cfg.mu_path, "lower marginal JSON");
        sub->add_option("--nu", cfg.nu_path, "upper marginal JSON");
        sub->add_option("--payoff", cfg.payoff_path, "payoff JSON (function or builtin)");
        sub->add_option("--grid-refine", cfg.grid_refine, "midpoint refinement rounds");
        sub->add_flag("--exact", cfg.exact, "exact rational arithmetic");
        sub->add_flag("--stdout", cfg.to_stdout, "print the JSON report to stdout");
        sub->add_option("--out", cfg.out_path, "report path");
    };

    auto* price = app.add_subcommand("price", "robust price and dual hedge legs");
    add_common(price);
    price->add_option("--potentials-csv", cfg.potentials_csv, "potential functions CSV");

    auto* hedge = app.add_subcommand("hedge", "pathwise superhedge verification");
    add_common(hedge);
    hedge->add_option("--A", cfg.averaging, "asian | fixed:<t0> | european:<T'>");
    hedge->add_option("--n", cfg.n, "embedding steps");
    hedge->add_option("--T", cfg.horizon, "horizon");
    hedge->add_option("--slacks-csv", cfg.slacks_csv, "per-path slack CSV");
    hedge->add_option("--paths-csv", cfg.paths_csv, "path dump CSV");
    hedge->add_option("--perturb-dual", cfg.perturb_dual, "shift the convex leg (testing)");

    auto* closed = app.add_subcommand("closed-form", "geometric oracle vs LP");
    add_common(closed);
    closed->add_option("--type", cfg.payoff_type, "risk-reversal | butterfly");
    closed->add_option("--a", cfg.a_text, "payoff parameter a");
    closed->add_option("--b", cfg.b_text, "payoff parameter b (risk reversal)");
    closed->add_option("--h", cfg.h_text, "payoff parameter h (butterfly)");

    auto* conv = app.add_subcommand("convergence", "running-average price convergence study");
    add_common(conv);
    conv->add_option("--n-list", cfg.n_list, "comma-separated embedding steps");
    conv->add_option("--T", cfg.horizon, "horizon");
    conv->add_option("--csv", cfg.convergence_csv, "convergence CSV");

    app.add_subcommand("counterexamples", "reproduce the built-in boundary cases");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        return dispatch(app.get_subcommands().front()->get_name(), cfg);
    } catch (const mot::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const mot::NotInConvexOrder& e) {
        std::cerr << "marginals not in convex order: " << e.what() << "\n";
        return 3;
    } catch (const mot::NotIrreducible& e) {
        std::cerr << "marginals not irreducible: " << e.what() << "\n";
        return 3;
    } catch (const mot::SuperhedgeViolation& e) {
        std::cerr << "superhedge violation: " << e.what() << "\n";
        return 5;
    } catch (const mot::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
