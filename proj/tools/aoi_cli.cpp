// aoi: closed-form age-of-information queries, simulation runs, figure data
// and the acceptance suite.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "aoi/acceptance.hpp"
#include "aoi/commands.hpp"

namespace {

using namespace aoi;
using cli::ExitCode;

int usage_error(const std::string& msg) {
    std::cerr << "error: " << msg << '\n';
    return cli::kUsageError;
}

QueueModel model_or_throw(const std::string& name) {
    auto m = parse_model(name);
    if (!m) throw Error(ErrorKind::InvalidArgument, "unknown model: " + name);
    return *m;
}

bool write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary);
    f << bytes;
    return static_cast<bool>(f);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Age of information for status-update queues"};
    app.require_subcommand(1);

    // analytic
    auto* an = app.add_subcommand("analytic", "Evaluate a closed form");
    std::string an_model, an_metric;
    double an_lambda = 0, an_mu = 0;
    std::vector<double> an_grid;
    an->add_option("--model", an_model, "mm1, mm11, mm12 or mm12star")->required();
    an->add_option("--lambda", an_lambda, "Arrival rate")->required();
    an->add_option("--mu", an_mu, "Service rate")->required();
    an->add_option("--metric", an_metric,
                   "avg-age, avg-peak, peak-ccdf, peak-pdf, steady-state, sojourn-mean, effective-rate")
        ->required();
    an->add_option("--a", an_grid, "Peak-age arguments for peak-ccdf/peak-pdf (default 0, 0.5, ..., 10)")
        ->delimiter(',');

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run one seeded simulation");
    std::string sim_model, trace_path;
    double sim_lambda = 0, sim_mu = 0, sim_age0 = 0;
    std::optional<std::uint64_t> departures;
    std::optional<double> horizon;
    std::optional<std::uint64_t> seed;
    std::uint64_t burn_in = 0;
    std::size_t batches = 32;
    sim->add_option("--model", sim_model, "mm1, mm11, mm12 or mm12star")->required();
    sim->add_option("--lambda", sim_lambda, "Arrival rate")->required();
    sim->add_option("--mu", sim_mu, "Service rate")->required();
    auto* dep_opt = sim->add_option("--departures", departures, "Stop after this many deliveries");
    auto* hor_opt = sim->add_option("--horizon", horizon, "Stop at this time");
    dep_opt->excludes(hor_opt);
    sim->add_option("--seed", seed, "Seed (default: AOI_SEED or 0xA0E01234)");
    sim->add_option("--initial-age", sim_age0, "Age at time zero");
    sim->add_option("--burn-in", burn_in, "Departures discarded before the observation window");
    sim->add_option("--batches", batches, "Batches for standard errors");
    sim->add_option("--trace", trace_path, "Write the event trace to this file");

    // figure
    auto* fig = app.add_subcommand("figure", "Write the data behind a figure as CSV");
    std::string fig_id, fig_out;
    bool with_sim = false;
    fig->add_option("id", fig_id, "avg-vs-lambda, compare-mm1, avg-vs-mu, peak-ccdf, peak-vs-lambda")->required();
    fig->add_flag("--with-sim", with_sim, "Add simulation columns (1e5 departures per point)");
    fig->add_option("--out", fig_out, "Directory for <id>.csv (default: standard output)");

    // validate
    auto* val = app.add_subcommand("validate", "Run the acceptance suite");
    bool quick = false;
    std::string val_out, mutate;
    val->add_flag("--quick", quick, "1e5 departures per point instead of 1e6");
    val->add_option("--out", val_out, "Directory for the suite's CSV artifacts");
    val->add_option("--mutate", mutate, "Perturb a closed form (avg-age, avg-peak, peak-ccdf)")->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kUsageError;
    }

    const std::uint64_t base_seed = cli::base_seed_from_env();

    try {
        if (*an) {
            if (!cli::is_metric(an_metric)) return usage_error("unknown metric: " + an_metric);
            cli::AnalyticRequest req{model_or_throw(an_model), an_lambda, an_mu, an_metric,
                                     an_grid.empty() ? cli::default_a_grid() : an_grid};
            cli::run_analytic(req, std::cout);
            return cli::kSuccess;
        }

        if (*sim) {
            if (!departures && !horizon) return usage_error("one of --departures or --horizon is required");
            SimConfig cfg{model_or_throw(sim_model), RateParams(sim_lambda, sim_mu),
                          departures ? std::variant<StopByDepartures, StopByHorizon>(StopByDepartures{*departures})
                                     : std::variant<StopByDepartures, StopByHorizon>(StopByHorizon{*horizon}),
                          seed.value_or(base_seed)};
            cfg.initial_age = sim_age0;
            cfg.burn_in_departures = burn_in;
            cfg.batches = batches;
            cfg.record_trace = !trace_path.empty();
            const auto result = simulate(cfg);
            for (const auto& w : result.summary.warnings) std::cerr << "warning: " << w << '\n';
            if (result.trace) {
                std::ofstream f(trace_path, std::ios::binary);
                write_trace(f, *result.trace);
                if (!f) return usage_error("cannot write trace file " + trace_path);
            }
            cli::write_summary(cfg, result.summary, std::cout);
            return cli::kSuccess;
        }

        if (*fig) {
            if (!cli::is_figure(fig_id)) return usage_error("unknown figure id: " + fig_id);
            cli::FigureOptions opt;
            opt.with_sim = with_sim;
            opt.base_seed = base_seed;
            std::ostringstream csv;
            cli::run_figure(fig_id, opt, csv);
            if (fig_out.empty()) {
                std::cout << csv.str();
            } else {
                std::filesystem::create_directories(fig_out);
                const auto path = std::filesystem::path(fig_out) / (fig_id + ".csv");
                if (!write_file(path, csv.str())) return usage_error("cannot write " + path.string());
            }
            return cli::kSuccess;
        }

        if (*val) {
            acceptance::Options opt;
            opt.base_seed = base_seed;
            opt.departures = quick ? 100000 : 1000000;
            if (mutate == "avg-age") {
                opt.formulas.avg_age = [](QueueModel m, const RateParams& r) { return 1.01 * analytic::avg_age(m, r); };
            } else if (mutate == "avg-peak") {
                opt.formulas.avg_peak_age = [](QueueModel m, const RateParams& r) {
                    return analytic::avg_peak_age(m, r) + 0.05;
                };
            } else if (mutate == "peak-ccdf") {
                opt.formulas.peak_ccdf = [](QueueModel m, const RateParams& r, double a) {
                    return analytic::peak_law(m, r).ccdf(1.02 * a);
                };
            } else if (!mutate.empty()) {
                return usage_error("unknown mutation: " + mutate);
            }
            const auto report = acceptance::run_suite(opt);
            acceptance::print_report(report, std::cout);
            if (!val_out.empty()) {
                std::filesystem::create_directories(val_out);
                for (const auto& [name, bytes] : report.artifacts) {
                    if (!write_file(std::filesystem::path(val_out) / name, bytes)) {
                        return usage_error("cannot write artifacts to " + val_out);
                    }
                }
            }
            return report.all_passed() ? cli::kSuccess : cli::kValidationFailure;
        }
    } catch (const Error& e) {
        return usage_error(e.what());
    }
    return cli::kUsageError;
}
