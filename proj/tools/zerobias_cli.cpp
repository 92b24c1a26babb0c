// Command-line front end: stage audits, analytical-density tables, coverage
// curves and shifted-optimum benchmark experiments. Every command is
// deterministic given its seed; rerunning writes byte-identical files.
//
// Exit codes: 0 success, 2 usage/validation, 3 I/O.

#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zerobias/zerobias.hpp"

namespace fs = std::filesystem;
using namespace zerobias;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(std::uint64_t requested) {
    if (requested != 0) return requested;
    std::random_device rd;  // --seed 0 asks for entropy explicitly
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

fs::path prepare_out_dir(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory: " + dir.string());
    }
    return dir;
}

std::vector<StageId> parse_stages(const std::vector<std::string>& names) {
    std::vector<StageId> stages;
    for (const std::string& name : names) {
        if (name == "all") {
            return {kAllStages.begin(), kAllStages.end()};
        }
        auto id = stage_from_name(name);
        if (!id) {
            std::string known;
            for (StageId s : kAllStages) {
                known += std::string(stage_name(s)) + " ";
            }
            throw UsageError("unknown stage '" + name + "' (known: " + known + "all)");
        }
        stages.push_back(*id);
    }
    return stages;
}

int cmd_audit(const AuditProtocol& protocol, const std::string& out) {
    const fs::path dir = prepare_out_dir(out);
    nlohmann::json summary = nlohmann::json::array();
    for (StageId stage : protocol.stages) {
        const StageAudit audit = stage_audit(stage, protocol);
        const std::string name(stage_name(stage));
        write_density_csv(dir / (name + "_density.csv"), audit.density);
        write_json(dir / (name + "_bias.json"), bias_report_to_json(audit.report, protocol));
        summary.push_back({{"stage", name},
                           {"concentration_ratio", audit.report.concentration_ratio},
                           {"near_zero_mass", audit.report.near_zero_mass},
                           {"mode_bin_center", audit.report.mode_bin_center},
                           {"nonfinite", audit.report.nonfinite}});
        std::cout << name << ": concentration_ratio="
                  << format_double(audit.report.concentration_ratio) << '\n';
    }
    write_json(dir / "summary.json",
               nlohmann::json{{"protocol", protocol_echo_json(protocol)},
                              {"stages", summary}});
    return kExitOk;
}

int cmd_pdf(const std::string& kind, std::uint64_t samples, double resolution,
            std::uint64_t seed, const std::string& out) {
    const fs::path dir = prepare_out_dir(out);
    if (kind == "arcsine-analytic") {
        write_analytic_pdf_csv(dir / "pdf_arcsine.csv", resolution);
        std::cout << "wrote " << (dir / "pdf_arcsine.csv").string() << '\n';
        return kExitOk;
    }
    if (kind != "sin" && kind != "cos") {
        throw UsageError("pdf kind must be sin, cos or arcsine-analytic");
    }
    RandomStream stream(seed, kind == "sin" ? 1 : 2);
    const std::vector<double> values =
        (kind == "sin") ? sine_of_uniform_samples(stream, samples)
                        : cosine_of_uniform_samples(stream, samples);
    const EmpiricalDensity density = estimate_density(values, -1.0, 1.0, resolution);
    const fs::path path = dir / ("pdf_" + kind + ".csv");
    write_pdf_csv(path, density);
    std::cout << "wrote " << path.string() << '\n';
    return kExitOk;
}

int cmd_coverage(double ratio, std::uint64_t horizon, const std::string& out) {
    const fs::path dir = prepare_out_dir(out);
    CoverageModel model{ratio, horizon};
    model.validate();
    write_coverage_csv(dir / "coverage.csv", model);
    std::cout << "wrote " << (dir / "coverage.csv").string() << '\n';
    return kExitOk;
}

int cmd_bench(const std::string& spec_path, const std::string& out, unsigned threads) {
    if (!fs::exists(spec_path)) throw UsageError("no such experiment file: " + spec_path);
    ExperimentSpec spec;
    try {
        spec = experiment_spec_from_json(read_json(spec_path));
    } catch (const IoError& e) {
        throw UsageError(e.what());
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed experiment JSON: ") + e.what());
    }
    const fs::path dir = prepare_out_dir(out);

    EngineConfig config;
    config.population = spec.population;
    config.iterations = spec.iterations;
    config.dimension = spec.dimension;
    config.box = SearchBox::cube(spec.dimension, spec.box_lo, spec.box_hi);
    config.boundary = BoundaryPolicy::clamp;  // keep objective values finite

    const double origin_shift =
        (spec.box_lo < 0.0 && spec.box_hi > 0.0) ? 0.0 : 0.5 * (spec.box_lo + spec.box_hi);
    const auto origin_problem = BenchmarkProblem::shifted_cube(
        spec.base, spec.dimension, spec.box_lo, spec.box_hi, origin_shift);
    const auto shifted_problem = BenchmarkProblem::shifted_cube(
        spec.base, spec.dimension, spec.box_lo, spec.box_hi, spec.shift_magnitude);

    const std::vector<std::uint64_t> seeds = spec.seed_list();
    const ExperimentResult origin =
        run_experiment(spec.engine, origin_problem, config, seeds, threads);
    const ExperimentResult shifted =
        run_experiment(spec.engine, shifted_problem, config, seeds, threads);
    const VerdictRecord verdict =
        zero_bias_verdict(origin, shifted, spec.threshold_factor, spec.alpha);

    write_json(dir / "origin_result.json", experiment_result_to_json(origin));
    write_runs_csv(dir / "origin_runs.csv", origin);
    write_json(dir / "shifted_result.json", experiment_result_to_json(shifted));
    write_runs_csv(dir / "shifted_runs.csv", shifted);
    write_json(dir / "verdict.json", verdict_to_json(verdict));

    std::cout << engine_name(spec.engine) << " on " << base_function_name(spec.base)
              << ": verdict=" << verdict_name(verdict.verdict)
              << " median_origin=" << format_double(verdict.median_origin)
              << " median_shifted=" << format_double(verdict.median_shifted)
              << " p=" << format_double(verdict.p_value) << '\n';
    return kExitOk;  // the verdict is data, not a failure
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zerobias: distribution audits and shifted-optimum benchmarks "
                 "for the STOA and TSA population updates"};
    app.require_subcommand(1);

    std::uint64_t seed = kDefaultSeed;
    std::string out = ".";
    unsigned threads = 1;
    app.add_option("--seed", seed,
                   "RNG seed; 0 draws entropy (default " + std::to_string(kDefaultSeed) + ")");
    app.add_option("--out", out, "output directory (default .)");
    app.add_option("--threads", threads, "worker threads (default 1)")
        ->check(CLI::PositiveNumber);

    // audit
    auto* audit = app.add_subcommand("audit", "stage-isolated density + bias reports");
    std::vector<std::string> stage_names{"all"};
    AuditProtocol protocol;
    audit->add_option("--stages", stage_names, "comma-separated stage names or 'all'")
        ->delimiter(',');
    audit->add_option("--samples", protocol.samples, "Monte Carlo samples per stage");
    audit->add_option("--span-lo", protocol.span_lo, "histogram lower edge");
    audit->add_option("--span-hi", protocol.span_hi, "histogram upper edge");
    audit->add_option("--resolution", protocol.resolution, "histogram bin width");
    audit->add_option("--angle-resolution", protocol.angle_resolution,
                      "angle-domain bin width (radians)");
    audit->add_option("--window", protocol.window, "near-zero window half-width");

    // pdf
    auto* pdf = app.add_subcommand("pdf", "trigonometric-channel densities vs closed form");
    std::string pdf_kind;
    std::uint64_t pdf_samples = 1'000'000;
    double pdf_resolution = 0.01;
    pdf->add_option("kind", pdf_kind, "sin | cos | arcsine-analytic")->required();
    pdf->add_option("--samples", pdf_samples, "Monte Carlo samples");
    pdf->add_option("--resolution", pdf_resolution, "value-domain bin width");

    // coverage
    auto* coverage = app.add_subcommand("coverage", "random-search coverage curve");
    double ratio = 0.01;
    std::uint64_t horizon = 100;
    coverage->add_option("--ratio", ratio, "volume ratio Va/Vs in (0,1]")->required();
    coverage->add_option("--horizon", horizon, "iterations T >= 1")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "origin vs shifted-optimum experiment");
    std::string spec_path;
    bench->add_option("experiment", spec_path, "experiment definition JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (audit->parsed()) {
            protocol.seed = resolve_seed(seed);
            protocol.threads = threads;
            protocol.stages = parse_stages(stage_names);
            protocol.validate();
            return cmd_audit(protocol, out);
        }
        if (pdf->parsed()) {
            if (pdf_samples == 0) throw UsageError("--samples must be >= 1");
            if (!(pdf_resolution > 0.0)) throw UsageError("--resolution must be > 0");
            return cmd_pdf(pdf_kind, pdf_samples, pdf_resolution, resolve_seed(seed), out);
        }
        if (coverage->parsed()) {
            return cmd_coverage(ratio, horizon, out);
        }
        if (bench->parsed()) {
            return cmd_bench(spec_path, out, threads);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidRange& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitUsage;
}
