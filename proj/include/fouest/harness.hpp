#pragma once

#include <bit>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fouest/errors.hpp"
#include "fouest/estimators.hpp"
#include "fouest/fou.hpp"
#include "fouest/parallel.hpp"
#include "fouest/pathio.hpp"
#include "fouest/rng.hpp"
#include "fouest/types.hpp"

namespace fouest {

// One Monte Carlo experiment: a (h-list x n-list) grid of cells, each cell
// aggregating `replications` independent estimator evaluations.
struct ExperimentConfig {
    double theta = 2.0;
    std::vector<double> h_list;
    std::vector<std::int64_t> n_list;
    double m = 2.0;
    double x0 = 1.0;
    std::int64_t replications = 20;
    Scheme scheme{};
    std::uint64_t seed = 0;
    bool common_random_numbers = false;
    Method estimator = Method::theta_hat;

    void validate() const {
        if (!(m > 1.0)) throw InvalidParameter("ExperimentConfig: m must be > 1");
        if (replications < 1)
            throw InvalidParameter("ExperimentConfig: replications must be >= 1");
        for (std::int64_t n : n_list)
            if (n < 2) throw InvalidParameter("ExperimentConfig: all n must be >= 2");
        for (double h : h_list) HurstIndex{h};  // range check
    }
};

struct CellResult {
    double theta = 0.0;
    double h = 0.0;
    std::int64_t n = 0;
    double m = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    std::int64_t count = 0;
    std::uint64_t seed_base = 0;
    std::optional<double> paper_mean;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<CellResult> cells;
    std::string timestamp;  // provenance only; scrub before comparing runs
};

// Aborted grid run: carries whatever cells completed before the failure.
struct ExperimentAborted : Error {
    ExperimentAborted(const std::string& what, ExperimentReport partial_)
        : Error(what), partial(std::move(partial_)) {}
    ExperimentReport partial;
};

// ---------------- seed derivation ----------------
// Documented: the cell stream is keyed by the h bit pattern (or 0 in
// common-random-numbers mode, which is what makes innovations shared across
// the h-list) and by n; the replication stream folds in the replication
// index. No positional counters, so extending h-list/n-list never perturbs
// existing cells.

inline std::uint64_t cell_seed_base(const ExperimentConfig& config, double h, std::int64_t n) {
    const std::uint64_t h_key =
        config.common_random_numbers ? 0 : std::bit_cast<std::uint64_t>(h);
    return derive_seed(config.seed, h_key, static_cast<std::uint64_t>(n));
}

inline std::uint64_t replication_seed(std::uint64_t cell_base, std::int64_t replication) {
    return derive_seed(cell_base, static_cast<std::uint64_t>(replication));
}

// ---------------- execution ----------------

inline Estimate evaluate_estimator(Method method, const SampledPath& path, std::int64_t n,
                                   HurstIndex h) {
    const double delta = 1.0 / static_cast<double>(n);
    switch (method) {
        case Method::theta_hat: return theta_hat(path, n);
        case Method::lse: return theta_lse(path, delta);
        case Method::terminal: return theta_terminal(path, delta);
        case Method::hu_song: return theta_hu_song(path, delta, h);
    }
    throw InvalidParameter("evaluate_estimator: bad method");
}

inline CellResult run_cell(const ExperimentConfig& config, HurstIndex h, std::int64_t n,
                           unsigned threads = 1) {
    config.validate();
    const GridSpec grid(n, config.m);
    const FouParams params(config.theta, config.x0, h);
    const std::int64_t refined = grid.steps() * config.scheme.oversample;
    if (refined > kDefaultMaxRefinedPoints)
        throw MemoryBudgetExceeded("run_cell: refined grid exceeds point budget");
    const CirculantFgnSampler sampler(
        refined, grid.dt() / static_cast<double>(config.scheme.oversample), h);

    const std::uint64_t base = cell_seed_base(config, h.value(), n);
    const std::size_t reps = static_cast<std::size_t>(config.replications);
    std::vector<double> estimates(reps);

    parallel_for_index(reps, threads, [&](std::size_t r) {
        try {
            const SimulatedPair pair =
                simulate_fou_with(sampler, params, grid, config.scheme,
                                  RngSeed{replication_seed(base, static_cast<std::int64_t>(r))});
            estimates[r] = evaluate_estimator(config.estimator, pair.fou, n, h).value;
        } catch (const Error& e) {
            throw Error(std::string(e.what()) + " [h=" + std::to_string(h.value()) +
                        ", n=" + std::to_string(n) + ", replication=" + std::to_string(r) + "]");
        }
    });

    // fixed pairwise tree keeps the aggregate identical under any threading
    const double mean = pairwise_sum(estimates) / static_cast<double>(reps);
    double sd = 0.0;
    if (reps > 1) {
        std::vector<double> sq(reps);
        for (std::size_t r = 0; r < reps; ++r)
            sq[r] = (estimates[r] - mean) * (estimates[r] - mean);
        sd = std::sqrt(pairwise_sum(sq) / static_cast<double>(reps - 1));
    }

    CellResult cell;
    cell.theta = config.theta;
    cell.h = h.value();
    cell.n = n;
    cell.m = config.m;
    cell.mean = mean;
    cell.sd = sd;
    cell.count = config.replications;
    cell.seed_base = base;
    return cell;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

using ProgressFn = std::function<void(const CellResult&, std::size_t done, std::size_t total)>;

inline ExperimentReport run_experiment(const ExperimentConfig& config, unsigned threads = 1,
                                       const ProgressFn& progress = {}) {
    config.validate();
    ExperimentReport report;
    report.config = config;
    const std::size_t total = config.h_list.size() * config.n_list.size();
    for (double h : config.h_list) {
        for (std::int64_t n : config.n_list) {
            try {
                report.cells.push_back(run_cell(config, HurstIndex(h), n, threads));
            } catch (const Error& e) {
                report.timestamp = utc_timestamp();
                throw ExperimentAborted(e.what(), report);
            }
            if (progress) progress(report.cells.back(), report.cells.size(), total);
        }
    }
    report.timestamp = utc_timestamp();
    return report;
}

// ---------------- published reference tables ----------------
// Monte Carlo means reported in the source study; carried for side-by-side
// comparison columns, never asserted bit-exactly.

struct TablePreset {
    ExperimentConfig config;
    // published_means[i][j]: h_list[i] x n_list[j]
    std::vector<std::vector<double>> published_means;
};

inline TablePreset table_preset(int table_id) {
    TablePreset preset;
    ExperimentConfig& c = preset.config;
    c.x0 = 1.0;
    c.replications = 20;
    switch (table_id) {
        case 1:
            c.theta = 2.0;
            c.m = 2.0;
            c.h_list = {0.05, 0.25, 0.45};
            c.n_list = {5, 10, 50, 100, 500, 1000};
            // means coincide across H to ~5 digits in the source
            c.common_random_numbers = true;
            preset.published_means = {
                {2.45763, 2.21281, 2.0395, 2.01911, 2.00300, 2.00100},
                {2.45766, 2.21281, 2.0395, 2.01911, 2.00300, 2.00100},
                {2.45794, 2.21281, 2.0395, 2.01911, 2.00300, 2.00100},
            };
            break;
        case 2:
            c.theta = 2.0;
            c.m = 3.0;
            c.h_list = {0.05, 0.25, 0.45};
            c.n_list = {5, 10, 20, 25};
            preset.published_means = {
                {2.45763, 2.21281, 2.10231, 2.08109},
                {2.45763, 2.21281, 2.10231, 2.08109},
                {2.45763, 2.21281, 2.10231, 2.08109},
            };
            break;
        case 3:
            c.theta = 2.0;
            c.m = 4.0;
            c.h_list = {0.05, 0.25, 0.45};
            c.n_list = {5, 8, 10, 12, 15};
            preset.published_means = {
                {2.45763, 2.27092, 2.21281, 2.17240, 2.13566},
                {2.45763, 2.27092, 2.21281, 2.17240, 2.13566},
                {2.45763, 2.27092, 2.21281, 2.17240, 2.13566},
            };
            break;
        case 4:
            c.theta = -3.0;
            c.m = 4.0;
            c.h_list = {0.45};
            c.n_list = {2, 4, 6, 8, 10};
            preset.published_means = {{-1.50913, -2.41157, -2.71411, -2.9546, -3.12058}};
            break;
        case 5:
            c.theta = -3.0;
            c.m = 5.0;
            c.h_list = {0.45};
            c.n_list = {2, 3, 4, 5, 6};
            preset.published_means = {{-1.63396, -2.04297, -2.38237, -2.5595, -2.72538}};
            break;
        default:
            throw InvalidParameter("table_preset: table id must be 1..5");
    }
    return preset;
}

inline ExperimentReport reproduce_table(int table_id, RngSeed seed, unsigned threads = 1,
                                        const ProgressFn& progress = {}) {
    TablePreset preset = table_preset(table_id);
    preset.config.seed = seed.value;
    ExperimentReport report = run_experiment(preset.config, threads, progress);
    for (CellResult& cell : report.cells) {
        for (std::size_t i = 0; i < preset.config.h_list.size(); ++i) {
            for (std::size_t j = 0; j < preset.config.n_list.size(); ++j) {
                if (preset.config.h_list[i] == cell.h && preset.config.n_list[j] == cell.n)
                    cell.paper_mean = preset.published_means[i][j];
            }
        }
    }
    return report;
}

// ---------------- serialization ----------------

inline nlohmann::json scheme_to_json(const Scheme& scheme) {
    return {{"kind", scheme_kind_name(scheme.kind)}, {"oversample", scheme.oversample}};
}

inline nlohmann::json config_to_json(const ExperimentConfig& config) {
    return {
        {"theta", config.theta},
        {"h-list", config.h_list},
        {"n-list", config.n_list},
        {"m", config.m},
        {"x0", config.x0},
        {"replications", config.replications},
        {"scheme", scheme_to_json(config.scheme)},
        {"seed", config.seed},
        {"common-random-numbers", config.common_random_numbers},
        {"estimator", method_name(config.estimator)},
    };
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    static const std::vector<std::string> known = {
        "theta", "h-list", "n-list", "m", "x0", "replications",
        "scheme", "seed", "common-random-numbers", "estimator"};
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const auto& k : known) ok = ok || k == key;
        if (!ok) throw InvalidParameter("experiment config: unknown field '" + key + "'");
    }
    ExperimentConfig config;
    config.theta = j.at("theta").get<double>();
    config.h_list = j.at("h-list").get<std::vector<double>>();
    config.n_list = j.at("n-list").get<std::vector<std::int64_t>>();
    config.m = j.at("m").get<double>();
    if (j.contains("x0")) config.x0 = j.at("x0").get<double>();
    if (j.contains("replications"))
        config.replications = j.at("replications").get<std::int64_t>();
    if (j.contains("scheme")) {
        const auto& s = j.at("scheme");
        Scheme scheme;
        if (s.contains("kind"))
            scheme.kind = scheme_kind_from_name(s.at("kind").get<std::string>());
        if (s.contains("oversample")) {
            scheme.oversample = s.at("oversample").get<std::int64_t>();
            if (scheme.oversample < 1)
                throw InvalidParameter("experiment config: oversample must be >= 1");
        }
        config.scheme = scheme;
    }
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("common-random-numbers"))
        config.common_random_numbers = j.at("common-random-numbers").get<bool>();
    if (j.contains("estimator"))
        config.estimator = method_from_name(j.at("estimator").get<std::string>());
    config.validate();
    return config;
}

inline nlohmann::json report_to_json(const ExperimentReport& report) {
    nlohmann::json cells = nlohmann::json::array();
    for (const CellResult& cell : report.cells) {
        nlohmann::json c = {
            {"theta", cell.theta}, {"h", cell.h},   {"n", cell.n},
            {"m", cell.m},         {"mean", cell.mean}, {"sd", cell.sd},
            {"count", cell.count}, {"seed-base", cell.seed_base},
        };
        if (cell.paper_mean) c["paper-mean"] = *cell.paper_mean;
        cells.push_back(std::move(c));
    }
    return {
        {"cells", std::move(cells)},
        {"provenance",
         {{"artifact", kArtifactVersion},
          {"config", config_to_json(report.config)},
          {"timestamp", report.timestamp}}},
    };
}

inline std::string report_json_text(const ExperimentReport& report) {
    return report_to_json(report).dump(2) + "\n";
}

inline std::string report_csv_text(const ExperimentReport& report) {
    std::string out = "theta,h,n,m,mean,sd,count,paper_mean\n";
    for (const CellResult& cell : report.cells) {
        out += format_g17(cell.theta) + ',' + format_g17(cell.h) + ',' +
               std::to_string(cell.n) + ',' + format_g17(cell.m) + ',' +
               format_g17(cell.mean) + ',' + format_g17(cell.sd) + ',' +
               std::to_string(cell.count) + ',';
        if (cell.paper_mean) out += format_g17(*cell.paper_mean);
        out += '\n';
    }
    return out;
}

}  // namespace fouest
