#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fouest/errors.hpp"
#include "fouest/estimators.hpp"
#include "fouest/fou.hpp"
#include "fouest/harness.hpp"
#include "fouest/pathio.hpp"
#include "fouest/theory.hpp"
#include "fouest/types.hpp"

namespace fouest::cli {

// 0 success / all checks passed, 1 usage error, 2 numerical error
// (overflow, zero denominator, ...), 3 check failure.
enum ExitStatus : int { kOk = 0, kUsage = 1, kNumerical = 2, kCheckFailed = 3 };

inline nlohmann::json check_report_json(const CheckReport& report) {
    return {
        {"name", report.name},
        {"passed", report.passed},
        {"observed", report.observed},
        {"bound-or-target", report.bound_or_target},
        {"detail", report.detail},
    };
}

namespace detail {

struct SimulateArgs {
    double theta = 0.0;
    double x0 = 1.0;
    double hurst = 0.45;
    std::int64_t n = 10;
    double m = 2.0;
    std::string scheme = "exact-representation";
    std::int64_t oversample = 8;
    std::uint64_t seed = 0;
    std::int64_t max_points = kDefaultMaxRefinedPoints;
    std::string out_x;
    std::string out_b;
};

struct EstimateArgs {
    std::string input;
    std::int64_t n = 0;
    std::string method = "theta-hat";
    std::optional<double> hurst;
    std::optional<double> delta;
};

struct ExperimentArgs {
    std::string config_path;
    int table = 0;
    std::uint64_t seed = 0;
    std::string out;
    std::string csv;
    unsigned threads = 1;
};

struct VerifyArgs {
    std::vector<std::string> checks;
    double hurst = 0.45;
    std::int64_t n = 10;
    double m = 2.0;
    double theta = -3.0;
    std::int64_t replications = 10000;
    std::int64_t samples = 1000000;
    std::int64_t oversample = 32;
    std::optional<std::uint64_t> seed;
};

inline void run_simulate(const SimulateArgs& args, std::ostream& diag) {
    const FouParams params(args.theta, args.x0, HurstIndex(args.hurst));
    const GridSpec grid(args.n, args.m);
    const Scheme scheme(scheme_kind_from_name(args.scheme), args.oversample);
    const SimulatedPair pair = simulate_fou(params, grid, scheme, RngSeed{args.seed},
                                            /*keep_refined=*/false, args.max_points);
    write_path_csv(pair.fou, args.out_x);
    write_path_csv(pair.driver, args.out_b);
    diag << "wrote " << grid.steps() + 1 << " points to " << args.out_x << " and "
         << args.out_b << "\n";
}

inline void run_estimate(const EstimateArgs& args, std::ostream& out) {
    const SampledPath path = read_path_csv(args.input);
    const Method method = method_from_name(args.method);
    const double delta = args.delta ? *args.delta : 1.0 / static_cast<double>(args.n);

    Estimate estimate = [&] {
        switch (method) {
            case Method::theta_hat: return theta_hat(path, args.n);
            case Method::lse: return theta_lse(path, delta);
            case Method::terminal: return theta_terminal(path, delta);
            case Method::hu_song:
                if (!args.hurst)
                    throw InvalidParameter("estimate: --hurst is required for hu-song");
                return theta_hu_song(path, delta, HurstIndex(*args.hurst));
        }
        throw InvalidParameter("estimate: bad method");
    }();

    nlohmann::json j = {
        {"method", method_name(estimate.method)},
        {"value", estimate.value},
        {"n", args.n},
    };
    if (estimate.m) j["m"] = *estimate.m;
    out << j.dump() << "\n";
}

inline void run_experiment_cmd(const ExperimentArgs& args, std::ostream& diag) {
    const ProgressFn progress = [&diag](const CellResult& cell, std::size_t done,
                                        std::size_t total) {
        diag << "cell " << done << "/" << total << " (h=" << cell.h << ", n=" << cell.n
             << ") mean=" << cell.mean << "\n";
    };

    ExperimentReport report = [&] {
        if (args.table != 0)
            return reproduce_table(args.table, RngSeed{args.seed}, args.threads, progress);
        std::ifstream in(args.config_path);
        if (!in)
            throw InvalidParameter("experiment: cannot open config '" + args.config_path + "'");
        nlohmann::json j;
        in >> j;
        ExperimentConfig config = config_from_json(j);
        config.seed = args.seed;
        return run_experiment(config, args.threads, progress);
    }();

    {
        std::ofstream out(args.out);
        if (!out) throw InvalidParameter("experiment: cannot open '" + args.out + "'");
        out << report_json_text(report);
    }
    if (!args.csv.empty()) {
        std::ofstream out(args.csv);
        if (!out) throw InvalidParameter("experiment: cannot open '" + args.csv + "'");
        out << report_csv_text(report);
    }
}

inline bool run_verify(const VerifyArgs& args, std::ostream& out) {
    bool all_passed = true;
    auto emit = [&](const CheckReport& report) {
        out << check_report_json(report).dump() << "\n";
        all_passed = all_passed && report.passed;
    };
    const HurstIndex h(args.hurst);
    for (const std::string& check : args.checks) {
        const bool randomized =
            check == "isserlis" || check == "var-bound" || check == "decomposition";
        if (randomized && !args.seed)
            throw InvalidParameter("verify: --seed is required for check '" + check + "'");
        const RngSeed seed{args.seed.value_or(0)};
        if (check == "isserlis") {
            emit(check_isserlis({0.5, 0.2, 0.1, 0.3, 0.4, 0.6}, args.samples, seed));
        } else if (check == "neg-corr") {
            emit(check_negative_increment_correlation(args.n, args.m, h));
        } else if (check == "lemma-sums") {
            emit(check_lemma_ratios(args.m, h));
        } else if (check == "var-bound") {
            emit(check_variance_lower_bound(args.n, args.m, h, args.theta, args.replications,
                                            seed));
        } else if (check == "decomposition") {
            emit(check_decomposition(args.theta, h, args.n, args.m, args.oversample, seed));
        } else {
            throw InvalidParameter("verify: unknown check '" + check + "'");
        }
    }
    return all_passed;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& diag = std::cerr) {
    CLI::App app{"fractional Ornstein-Uhlenbeck simulation and drift estimation"};
    app.require_subcommand(0, 1);

    detail::SimulateArgs sim;
    detail::EstimateArgs est;
    detail::ExperimentArgs exp;
    detail::VerifyArgs ver;

    CLI::App* sim_cmd =
        app.add_subcommand("simulate", "simulate a fOU path and its driving fBm, CSV output");
    sim_cmd->add_option("--theta", sim.theta, "drift parameter")->required();
    sim_cmd->add_option("--x0", sim.x0, "initial value")->capture_default_str();
    sim_cmd->add_option("--hurst", sim.hurst, "Hurst index in (0,1)")->required();
    sim_cmd->add_option("--n", sim.n, "sampling frequency (grid step 1/n)")->required();
    sim_cmd->add_option("--m", sim.m, "horizon exponent (floor(n^m) steps)")->required();
    sim_cmd->add_option("--scheme", sim.scheme, "exact-representation|euler")
        ->capture_default_str();
    sim_cmd->add_option("--oversample", sim.oversample, "refinement factor")
        ->capture_default_str();
    sim_cmd->add_option("--seed", sim.seed, "RNG seed (required; no wall-clock seeding)")
        ->required();
    sim_cmd->add_option("--max-points", sim.max_points, "refined-grid point budget")
        ->capture_default_str();
    sim_cmd->add_option("--out-x", sim.out_x, "output CSV for the fOU path")->required();
    sim_cmd->add_option("--out-b", sim.out_b, "output CSV for the driving fBm")->required();

    CLI::App* est_cmd =
        app.add_subcommand("estimate", "evaluate a drift estimator on a path CSV");
    est_cmd->add_option("--input", est.input, "path CSV (t,x)")->required();
    est_cmd->add_option("--n", est.n, "sampling frequency of the grid")->required();
    est_cmd->add_option("--method", est.method, "theta-hat|lse|terminal|hu-song")
        ->capture_default_str();
    est_cmd->add_option("--hurst", est.hurst, "Hurst index (hu-song only)");
    est_cmd->add_option("--delta", est.delta, "observation step (defaults to 1/n)");

    CLI::App* exp_cmd =
        app.add_subcommand("experiment", "run a Monte Carlo experiment grid, JSON report");
    CLI::Option* cfg_opt =
        exp_cmd->add_option("--config", exp.config_path, "experiment config JSON");
    CLI::Option* table_opt =
        exp_cmd->add_option("--table", exp.table, "reference table preset (1..5)")
            ->check(CLI::Range(1, 5));
    cfg_opt->excludes(table_opt);
    exp_cmd->add_option("--seed", exp.seed, "RNG seed (required)")->required();
    exp_cmd->add_option("--out", exp.out, "report JSON path")->required();
    exp_cmd->add_option("--csv", exp.csv, "optional per-cell CSV path");
    exp_cmd->add_option("--threads", exp.threads, "worker threads for replications")
        ->capture_default_str();

    CLI::App* ver_cmd = app.add_subcommand("verify", "run closed-form/Monte Carlo checks");
    ver_cmd
        ->add_option("--check", ver.checks,
                     "isserlis|neg-corr|lemma-sums|var-bound|decomposition (repeatable)")
        ->required();
    ver_cmd->add_option("--hurst", ver.hurst, "Hurst index")->capture_default_str();
    ver_cmd->add_option("--n", ver.n, "sampling frequency")->capture_default_str();
    ver_cmd->add_option("--m", ver.m, "horizon exponent")->capture_default_str();
    ver_cmd->add_option("--theta", ver.theta, "drift (var-bound, decomposition)")
        ->capture_default_str();
    ver_cmd->add_option("--replications", ver.replications, "var-bound replications")
        ->capture_default_str();
    ver_cmd->add_option("--samples", ver.samples, "isserlis MC samples")
        ->capture_default_str();
    ver_cmd->add_option("--oversample", ver.oversample, "decomposition refinement")
        ->capture_default_str();
    ver_cmd->add_option("--seed", ver.seed, "RNG seed (randomized checks)");

    int exit_code = kOk;
    sim_cmd->callback([&] { detail::run_simulate(sim, diag); });
    est_cmd->callback([&] { detail::run_estimate(est, out); });
    exp_cmd->callback([&] {
        if (exp.table == 0 && exp.config_path.empty())
            throw InvalidParameter("experiment: one of --config or --table is required");
        detail::run_experiment_cmd(exp, diag);
    });
    ver_cmd->callback([&] {
        if (!detail::run_verify(ver, out)) exit_code = kCheckFailed;
    });

    try {
        app.parse(argc, argv);
        if (app.get_subcommands().empty()) {
            out << app.help();
            return kOk;
        }
        return exit_code;
    } catch (const CLI::CallForHelp&) {
        CLI::App* active = &app;
        while (!active->get_subcommands().empty()) active = active->get_subcommands().back();
        out << active->help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        diag << e.what() << "\n" << app.help();
        return kUsage;
    } catch (const InvalidParameter& e) {
        diag << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ExperimentAborted& e) {
        diag << "error: " << e.what() << "\n";
        diag << "completed cells before failure:\n";
        for (const CellResult& cell : e.partial.cells)
            diag << "  h=" << cell.h << " n=" << cell.n << " mean=" << cell.mean << "\n";
        return kNumerical;
    } catch (const Error& e) {
        diag << "error: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return kNumerical;
    }
}

}  // namespace fouest::cli
