#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "zerobias/audit.hpp"
#include "zerobias/bench.hpp"
#include "zerobias/density.hpp"
#include "zerobias/engine.hpp"
#include "zerobias/taps.hpp"

namespace zerobias {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest decimal representation that round-trips exactly, so emitted
/// files diff cleanly and parse back to the same bits.
inline std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw IoError("failed to format double");
    return std::string(buf, ptr);
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        rows.push_back(std::move(fields));
    }
    return rows;
}

inline double parse_double(const std::string& s) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw IoError("not a number: " + s);
    }
}

inline std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw IoError("not an unsigned integer: " + s);
    }
    return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Density / pdf / coverage / trace CSV
// ---------------------------------------------------------------------------

struct DensityCsvRow {
    double bin_center;
    double density;
    std::uint64_t count;
};

inline void write_density_csv(const std::filesystem::path& path,
                              const EmpiricalDensity& d) {
    auto out = detail::open_output(path);
    out << "bin_center,density,count\n";
    for (std::size_t i = 0; i < d.bin_count(); ++i) {
        out << format_double(d.bin_center(i)) << ',' << format_double(d.density(i))
            << ',' << d.counts[i] << '\n';
    }
    if (!out) throw IoError("failed while writing " + path.string());
}

inline std::vector<DensityCsvRow> read_density_csv(const std::filesystem::path& path) {
    auto rows = detail::read_csv(path);
    if (rows.empty() || rows.front() != std::vector<std::string>{"bin_center", "density", "count"}) {
        throw IoError("bad density csv header in " + path.string());
    }
    std::vector<DensityCsvRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 3) throw IoError("bad density csv row in " + path.string());
        out.push_back({detail::parse_double(rows[i][0]), detail::parse_double(rows[i][1]),
                       detail::parse_u64(rows[i][2])});
    }
    return out;
}

struct PdfCsvRow {
    double bin_center;
    double mc_density;
    double analytic_density;
};

/// Monte Carlo density with the closed-form arcsine overlay.
inline void write_pdf_csv(const std::filesystem::path& path, const EmpiricalDensity& d) {
    auto out = detail::open_output(path);
    out << "bin_center,mc_density,analytic_density\n";
    for (std::size_t i = 0; i < d.bin_count(); ++i) {
        const double center = d.bin_center(i);
        const double analytic = (std::abs(center) < 1.0) ? arcsine_density(center) : 0.0;
        out << format_double(center) << ',' << format_double(d.density(i)) << ','
            << format_double(analytic) << '\n';
    }
    if (!out) throw IoError("failed while writing " + path.string());
}

/// Closed form only, tabulated on the same grid an MC run would use.
inline void write_analytic_pdf_csv(const std::filesystem::path& path, double bin_width) {
    EmpiricalDensity grid(-1.0, 1.0, bin_width);
    auto out = detail::open_output(path);
    out << "bin_center,analytic_density\n";
    for (std::size_t i = 0; i < grid.bin_count(); ++i) {
        const double center = grid.bin_center(i);
        const double analytic = (std::abs(center) < 1.0) ? arcsine_density(center) : 0.0;
        out << format_double(center) << ',' << format_double(analytic) << '\n';
    }
    if (!out) throw IoError("failed while writing " + path.string());
}

inline std::vector<PdfCsvRow> read_pdf_csv(const std::filesystem::path& path) {
    auto rows = detail::read_csv(path);
    if (rows.empty() ||
        rows.front() != std::vector<std::string>{"bin_center", "mc_density", "analytic_density"}) {
        throw IoError("bad pdf csv header in " + path.string());
    }
    std::vector<PdfCsvRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 3) throw IoError("bad pdf csv row in " + path.string());
        out.push_back({detail::parse_double(rows[i][0]), detail::parse_double(rows[i][1]),
                       detail::parse_double(rows[i][2])});
    }
    return out;
}

struct CoverageCsvRow {
    std::uint64_t t;
    double probability;
};

inline void write_coverage_csv(const std::filesystem::path& path, const CoverageModel& model) {
    model.validate();
    auto out = detail::open_output(path);
    out << "t,probability\n";
    for (std::uint64_t t = 1; t <= model.horizon; ++t) {
        out << t << ',' << format_double(coverage_probability(model, t)) << '\n';
    }
    if (!out) throw IoError("failed while writing " + path.string());
}

inline std::vector<CoverageCsvRow> read_coverage_csv(const std::filesystem::path& path) {
    auto rows = detail::read_csv(path);
    if (rows.empty() || rows.front() != std::vector<std::string>{"t", "probability"}) {
        throw IoError("bad coverage csv header in " + path.string());
    }
    std::vector<CoverageCsvRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 2) throw IoError("bad coverage csv row in " + path.string());
        out.push_back({detail::parse_u64(rows[i][0]), detail::parse_double(rows[i][1])});
    }
    return out;
}

inline void write_trace_csv(const std::filesystem::path& path, const TapSet& taps) {
    auto out = detail::open_output(path);
    out << "iteration,agent,dim,stage,value\n";
    for (const TraceRow& row : taps.rows()) {
        out << row.iteration << ',' << row.agent << ',' << row.dim << ','
            << stage_name(row.stage) << ',' << format_double(row.value) << '\n';
    }
    if (!out) throw IoError("failed while writing " + path.string());
}

inline std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path) {
    auto rows = detail::read_csv(path);
    if (rows.empty() ||
        rows.front() != std::vector<std::string>{"iteration", "agent", "dim", "stage", "value"}) {
        throw IoError("bad trace csv header in " + path.string());
    }
    std::vector<TraceRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 5) throw IoError("bad trace csv row in " + path.string());
        auto stage = stage_from_name(rows[i][3]);
        if (!stage) throw IoError("unknown stage in trace csv: " + rows[i][3]);
        out.push_back({static_cast<std::uint32_t>(detail::parse_u64(rows[i][0])),
                       static_cast<std::uint32_t>(detail::parse_u64(rows[i][1])),
                       static_cast<std::uint32_t>(detail::parse_u64(rows[i][2])), *stage,
                       detail::parse_double(rows[i][4])});
    }
    return out;
}

struct RunCsvRow {
    std::uint64_t run;
    std::uint64_t seed;
    double final_best_value;
    double distance_to_optimum;
};

inline void write_runs_csv(const std::filesystem::path& path, const ExperimentResult& r) {
    auto out = detail::open_output(path);
    out << "run,seed,final_best_value,distance_to_optimum\n";
    for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
        const RunOutcome& o = r.outcomes[i];
        out << i << ',' << o.seed << ',' << format_double(o.final_best_value) << ','
            << format_double(o.distance_to_optimum) << '\n';
    }
    if (!out) throw IoError("failed while writing " + path.string());
}

inline std::vector<RunCsvRow> read_runs_csv(const std::filesystem::path& path) {
    auto rows = detail::read_csv(path);
    if (rows.empty() ||
        rows.front() != std::vector<std::string>{"run", "seed", "final_best_value",
                                                 "distance_to_optimum"}) {
        throw IoError("bad runs csv header in " + path.string());
    }
    std::vector<RunCsvRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 4) throw IoError("bad runs csv row in " + path.string());
        out.push_back({detail::parse_u64(rows[i][0]), detail::parse_u64(rows[i][1]),
                       detail::parse_double(rows[i][2]), detail::parse_double(rows[i][3])});
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json engine_config_to_json(const EngineConfig& c) {
    nlohmann::json taps = nlohmann::json::array();
    for (StageId id : c.taps) taps.push_back(std::string(stage_name(id)));
    return nlohmann::json{
        {"population", c.population},
        {"iterations", c.iterations},
        {"dimension", c.dimension},
        {"box", {{"lower", c.box.lower}, {"upper", c.box.upper}}},
        {"seed", c.seed},
        {"boundary_policy", std::string(boundary_name(c.boundary))},
        {"taps", taps},
    };
}

inline EngineConfig engine_config_from_json(const nlohmann::json& j) {
    EngineConfig c{
        .population = j.at("population").get<std::size_t>(),
        .iterations = j.at("iterations").get<std::size_t>(),
        .dimension = j.at("dimension").get<std::size_t>(),
        .box = SearchBox(j.at("box").at("lower").get<std::vector<double>>(),
                         j.at("box").at("upper").get<std::vector<double>>()),
        .seed = j.at("seed").get<std::uint64_t>(),
    };
    if (j.contains("boundary_policy")) {
        auto policy = boundary_from_name(j.at("boundary_policy").get<std::string>());
        if (!policy) throw IoError("unknown boundary policy");
        c.boundary = *policy;
    }
    if (j.contains("taps")) {
        for (const auto& name : j.at("taps")) {
            auto id = stage_from_name(name.get<std::string>());
            if (!id) throw IoError("unknown tap stage: " + name.get<std::string>());
            c.taps.push_back(*id);
        }
    }
    c.validate();
    return c;
}

inline nlohmann::json protocol_echo_json(const AuditProtocol& p) {
    return nlohmann::json{
        {"seed", p.seed},
        {"samples", p.samples},
        {"span", {p.span_lo, p.span_hi}},
        {"resolution", p.resolution},
        {"angle_resolution", p.angle_resolution},
        {"window", p.window},
    };
}

inline nlohmann::json bias_report_to_json(const BiasReport& r, const AuditProtocol& p) {
    return nlohmann::json{
        {"stage", r.stage},
        {"window", r.window},
        {"near_zero_mass", r.near_zero_mass},
        {"uniform_baseline", r.uniform_baseline},
        {"concentration_ratio", r.concentration_ratio},
        {"mode_bin_center", r.mode_bin_center},
        {"l1_distance_to_uniform", r.l1_distance_to_uniform},
        {"nonfinite", r.nonfinite},
        {"overflow_low", r.overflow_low},
        {"overflow_high", r.overflow_high},
        {"protocol", protocol_echo_json(p)},
    };
}

inline nlohmann::json experiment_result_to_json(const ExperimentResult& r) {
    nlohmann::json outcomes = nlohmann::json::array();
    for (const RunOutcome& o : r.outcomes) {
        outcomes.push_back({{"seed", o.seed},
                            {"final_best_value", o.final_best_value},
                            {"distance_to_optimum", o.distance_to_optimum}});
    }
    return nlohmann::json{
        {"engine", std::string(engine_name(r.engine))},
        {"base_function", std::string(base_function_name(r.base))},
        {"problem", r.problem_name},
        {"shift_magnitude", r.shift_magnitude},
        {"runs", r.runs},
        {"outcomes", outcomes},
        {"mean_best", r.mean_best},
        {"median_best", r.median_best},
        {"stddev_best", r.stddev_best},
        {"mean_distance_to_optimum", r.mean_distance},
    };
}

inline nlohmann::json verdict_to_json(const VerdictRecord& v) {
    nlohmann::json j{
        {"verdict", std::string(verdict_name(v.verdict))},
        {"engine", std::string(engine_name(v.engine))},
        {"base_function", std::string(base_function_name(v.base))},
        {"runs", v.runs},
        {"median_origin", v.median_origin},
        {"median_shifted", v.median_shifted},
        {"p_value", v.p_value},
        {"threshold_factor", v.threshold_factor},
        {"alpha", v.alpha},
    };
    // JSON has no literal for infinity; serialize as string in that case.
    if (std::isfinite(v.degradation_factor)) {
        j["degradation_factor"] = v.degradation_factor;
    } else {
        j["degradation_factor"] = "inf";
    }
    return j;
}

/// Desk-scale experiment definition consumed by the bench command.
struct ExperimentSpec {
    EngineKind engine = EngineKind::stoa;
    BaseFunction base = BaseFunction::sphere;
    std::size_t dimension = 10;
    std::size_t population = 30;
    std::size_t iterations = 500;
    std::size_t runs = 30;
    double box_lo = -100.0;
    double box_hi = 100.0;
    double shift_magnitude = 50.0;
    std::uint64_t seed_base = kDefaultSeed;
    std::vector<std::uint64_t> seeds;  // optional; derived from seed_base when empty
    double threshold_factor = 10.0;
    double alpha = 0.01;

    void validate() const {
        if (runs == 0) throw InvalidRange("experiment needs runs >= 1");
        if (!seeds.empty() && seeds.size() != runs) {
            throw InvalidRange("seed list length must equal runs");
        }
        if (!(box_lo < box_hi)) throw InvalidRange("experiment needs box_lo < box_hi");
        if (!(shift_magnitude > box_lo && shift_magnitude < box_hi)) {
            throw InvalidRange("shift must lie strictly inside the box");
        }
        if (dimension == 0 || population == 0 || iterations == 0) {
            throw InvalidRange("dimension, population and iterations must be >= 1");
        }
    }

    std::vector<std::uint64_t> seed_list() const {
        if (!seeds.empty()) return seeds;
        std::vector<std::uint64_t> out(runs);
        for (std::size_t i = 0; i < runs; ++i) out[i] = seed_base + i;
        return out;
    }
};

inline nlohmann::json experiment_spec_to_json(const ExperimentSpec& s) {
    nlohmann::json j{
        {"engine", std::string(engine_name(s.engine))},
        {"base_function", std::string(base_function_name(s.base))},
        {"dimension", s.dimension},
        {"population", s.population},
        {"iterations", s.iterations},
        {"runs", s.runs},
        {"box", {s.box_lo, s.box_hi}},
        {"shift_magnitude", s.shift_magnitude},
        {"seed_base", s.seed_base},
        {"threshold_factor", s.threshold_factor},
        {"alpha", s.alpha},
    };
    if (!s.seeds.empty()) j["seeds"] = s.seeds;
    return j;
}

inline ExperimentSpec experiment_spec_from_json(const nlohmann::json& j) {
    ExperimentSpec s;
    auto engine = engine_from_name(j.at("engine").get<std::string>());
    if (!engine) throw IoError("unknown engine: " + j.at("engine").get<std::string>());
    s.engine = *engine;
    if (j.contains("base_function")) {
        auto base = base_function_from_name(j.at("base_function").get<std::string>());
        if (!base) throw IoError("unknown base function");
        s.base = *base;
    }
    if (j.contains("dimension")) s.dimension = j.at("dimension").get<std::size_t>();
    if (j.contains("population")) s.population = j.at("population").get<std::size_t>();
    if (j.contains("iterations")) s.iterations = j.at("iterations").get<std::size_t>();
    if (j.contains("runs")) s.runs = j.at("runs").get<std::size_t>();
    if (j.contains("box")) {
        s.box_lo = j.at("box").at(0).get<double>();
        s.box_hi = j.at("box").at(1).get<double>();
    }
    if (j.contains("shift_magnitude")) s.shift_magnitude = j.at("shift_magnitude").get<double>();
    if (j.contains("seed_base")) s.seed_base = j.at("seed_base").get<std::uint64_t>();
    if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("threshold_factor")) s.threshold_factor = j.at("threshold_factor").get<double>();
    if (j.contains("alpha")) s.alpha = j.at("alpha").get<double>();
    s.validate();
    return s;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    auto out = detail::open_output(path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed while writing " + path.string());
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

}  // namespace zerobias
