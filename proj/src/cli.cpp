#include "sgdelta/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "sgdelta/acceptance.hpp"
#include "sgdelta/error.hpp"
#include "sgdelta/experiments.hpp"
#include "sgdelta/spectrum.hpp"
#include "sgdelta/waves.hpp"

namespace sgd {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

class Artifacts {
public:
    explicit Artifacts(const RunConfig& config) : config_(config), hash_(config_hash(config)) {
        fs::create_directories(config.out_dir);
    }

    void csv(const std::string& name, const std::vector<std::string>& header,
             const std::vector<std::vector<std::string>>& rows) const {
        std::ofstream f = open(name);
        f << "# config_hash=" << hash_ << " version=" << kArtifactVersion << '\n';
        write_row(f, header);
        for (const auto& r : rows) write_row(f, r);
    }

    void report(const std::string& name, json body) const {
        body["config_hash"] = hash_;
        body["version"] = kArtifactVersion;
        body["config"] = json::parse(serialize_config(config_));
        std::ofstream f = open(name);
        f << body.dump(2) << '\n';
    }

    const std::string& hash() const { return hash_; }

private:
    std::ofstream open(const std::string& name) const {
        const fs::path path = fs::path(config_.out_dir) / name;
        std::ofstream f(path, std::ios::out | std::ios::trunc);
        if (!f) throw InvalidArgument(fmt::format("cannot open {} for writing", path.string()));
        return f;
    }

    static void write_row(std::ostream& os, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << '\n';
    }

    const RunConfig& config_;
    std::string hash_;
};

void require_sharp(const RunConfig& c, const std::string& command) {
    if (c.delta_mode != DeltaMode::Sharp) {
        throw ConfigError(fmt::format("config: '{}' supports delta_mode 'sharp' only", command));
    }
}

[[noreturn]] void unsupported(const RunConfig& c, const std::string& command) {
    throw ConfigError(fmt::format("config: scenario '{}' is not available for '{}'", to_string(c.scenario), command));
}

StationaryWave stationary_of(const RunConfig& c, const std::string& command) {
    if (c.scenario == Scenario::Kink) return StationaryWave::Kink;
    if (c.scenario == Scenario::GroundState) return StationaryWave::GroundState;
    unsupported(c, command);
}

FieldState initial_state(const RunConfig& c, const std::string& command) {
    const Grid1D g = c.grid();
    switch (c.scenario) {
        case Scenario::Zero: return FieldState::zeros(g);
        case Scenario::Kink: return kink_profile(g, c.center);
        case Scenario::GroundState: return ground_state(g, c.q);
        case Scenario::BoostedKink: return boosted_kink_state(g, c.speed, c.center, 0.0);
        case Scenario::Scatter: break;
    }
    unsupported(c, command);
}

ExperimentGrid experiment_grid(const RunConfig& c) {
    ExperimentGrid e;
    e.half_width = c.half_width;
    e.nodes = c.nodes;
    e.dt = c.dt;
    e.seed = c.seed;
    e.threads = c.threads;
    return e;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_run(const RunConfig& c, const Artifacts& art, std::ostream& out) {
    const FieldState start = initial_state(c, "run");
    std::vector<double> deviation;
    std::vector<double> center;
    EvolveOptions opt;
    opt.output_stride = c.output_stride;
    opt.store_states = false;
    opt.observer = [&](const FieldState& s) {
        deviation.push_back(deviation_norm(s, start).total);
        center.push_back(kink_center(s).value_or(NAN));
    };
    const auto tr = evolve(start, c.impurity(), c.horizon, c.dt, opt);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        const auto& e = tr.energies[k];
        rows.push_back({num(tr.times[k]), num(e.kinetic), num(e.gradient), num(e.potential), num(e.delta_term),
                        num(e.total), num(tr.bound_series[k]), num(deviation[k]), num(center[k])});
    }
    art.csv("run_series.csv",
            {"t", "kinetic", "gradient", "potential", "delta_term", "total", "bound", "deviation", "kink_center"}, rows);

    rows.clear();
    const auto& g = tr.final_state.grid;
    for (std::size_t i = 0; i < g.size(); ++i) {
        rows.push_back({num(g.x(i)), num(tr.final_state.u1[i]), num(tr.final_state.u2[i])});
    }
    art.csv("run_final.csv", {"x", "u1", "u2"}, rows);

    const double max_dev = *std::max_element(deviation.begin(), deviation.end());
    art.report("run.json", {{"final_time", tr.final_state.t},
                            {"energy_initial", tr.energies.front().total},
                            {"energy_final", tr.energies.back().total},
                            {"max_relative_energy_drift", tr.max_relative_energy_drift()},
                            {"bound_ratio", tr.bound_ratio()},
                            {"max_deviation", max_dev},
                            {"final_deviation", deviation.back()}});
    out << fmt::format("run {} q={} T={}: E0 = {:.10f}, drift {:.3e}, max deviation {:.3e}, bound ratio {:.4f} "
                       "({:.2f} s)\n",
                       to_string(c.scenario), c.q, c.horizon, tr.energies.front().total,
                       tr.max_relative_energy_drift(), max_dev, tr.bound_ratio(), tr.wall_clock_seconds);
    return kExitOk;
}

int cmd_spectrum(const RunConfig& c, const Artifacts& art, std::ostream& out) {
    require_sharp(c, "spectrum");
    if (c.scenario != Scenario::Zero && c.scenario != Scenario::Kink && c.scenario != Scenario::GroundState) {
        unsupported(c, "spectrum");
    }
    const auto op = assemble_linearized(initial_state(c, "spectrum"), c.q);
    const auto r = eigen_bottom(op, c.eigen_count);

    json body = {{"eigenvalues", r.eigenvalues},
                 {"residuals", r.residuals},
                 {"morse_index", r.morse_index},
                 {"has_zero_mode", r.has_zero_mode},
                 {"tol_zero", r.tol_zero},
                 {"growth_rate", r.growth_rate},
                 {"interface_coefficient", op.interface_coefficient()}};
    body["ess_edge_estimate"] = r.ess_edge_estimate ? json(*r.ess_edge_estimate) : json(nullptr);
    art.report("spectrum.json", body);

    std::vector<std::string> header = {"x"};
    for (std::size_t k = 0; k < r.eigenvectors.size(); ++k) header.push_back(fmt::format("v{}", k + 1));
    std::vector<std::vector<std::string>> rows;
    const auto& g = op.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::vector<std::string> row = {num(g.x(i))};
        for (const auto& v : r.eigenvectors) row.push_back(num(v[i]));
        rows.push_back(std::move(row));
    }
    art.csv("spectrum_vectors.csv", header, rows);

    out << fmt::format("spectrum {} q={}: morse index {}, zero mode {}, tol_zero {:.2e}\n", to_string(c.scenario),
                       c.q, r.morse_index, r.has_zero_mode, r.tol_zero);
    for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) {
        out << fmt::format("  lambda_{} = {:.10f}  (residual {:.1e})\n", k + 1, r.eigenvalues[k], r.residuals[k]);
    }
    if (r.growth_rate > 0.0) out << fmt::format("  growth rate sigma = {:.10f}\n", r.growth_rate);
    return kExitOk;
}

int cmd_stability(const RunConfig& c, const Artifacts& art, std::ostream& out) {
    require_sharp(c, "stability");
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = stability_trial(stationary_of(c, "stability"), c.q, c.amplitudes, c.horizon, experiment_grid(c));

    std::vector<std::vector<std::string>> rows;
    json entries = json::array();
    for (const auto& e : r.entries) {
        rows.push_back({num(e.amplitude), num(e.sup_deviation), num(e.ratio), e.escaped ? "1" : "0",
                        num(e.energy_drift), num(e.bound_ratio)});
        entries.push_back({{"amplitude", e.amplitude},
                           {"sup_deviation", e.sup_deviation},
                           {"ratio", e.ratio},
                           {"escaped", e.escaped},
                           {"energy_drift", e.energy_drift},
                           {"bound_ratio", e.bound_ratio}});
    }
    art.csv("stability.csv", {"amplitude", "sup_deviation", "ratio", "escaped", "energy_drift", "bound_ratio"}, rows);
    art.report("stability.json", {{"wave", to_string(r.wave)},
                                  {"q", r.q},
                                  {"horizon", r.horizon},
                                  {"seed", r.seed},
                                  {"entries", entries},
                                  {"max_ratio", r.max_ratio},
                                  {"stability_constant", kStabilityConstant},
                                  {"stable", r.stable}});
    out << fmt::format("stability {} q={} T={}: max C = {:.4f}, stable {} ({:.2f} s)\n", to_string(r.wave), r.q,
                       r.horizon, r.max_ratio, r.stable, seconds_since(t0));
    return kExitOk;
}

int cmd_instability(const RunConfig& c, const Artifacts& art, std::ostream& out) {
    require_sharp(c, "instability");
    const auto t0 = std::chrono::steady_clock::now();
    const auto r =
        instability_trial(stationary_of(c, "instability"), c.q, c.seed_amplitude, c.horizon, experiment_grid(c));

    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < r.times.size(); ++k) rows.push_back({num(r.times[k]), num(r.deviations[k])});
    art.csv("instability_series.csv", {"t", "deviation"}, rows);
    art.report("instability.json",
               {{"wave", to_string(r.wave)},
                {"q", r.q},
                {"seed_amplitude", r.seed_amplitude},
                {"lambda1", r.lambda1},
                {"predicted_rate", r.predicted_rate},
                {"fitted_rate", r.fitted_rate},
                {"relative_mismatch", r.relative_mismatch},
                {"fit_window", {r.fit_start, r.fit_end}},
                {"escape_time", r.escape_time ? json(*r.escape_time) : json(nullptr)},
                {"degenerate", r.degenerate}});
    if (r.degenerate) {
        out << fmt::format("instability {} q={}: zero seed, nothing to measure\n", to_string(r.wave), r.q);
    } else {
        out << fmt::format("instability {} q={}: fitted {:.6f} vs predicted {:.6f} ({:.2f}% off), escape {} ({:.2f} s)\n",
                           to_string(r.wave), r.q, r.fitted_rate, r.predicted_rate, 100.0 * r.relative_mismatch,
                           r.escape_time ? fmt::format("t = {:.3f}", *r.escape_time) : std::string("none"),
                           seconds_since(t0));
    }
    return kExitOk;
}

int cmd_sweep(const RunConfig& c, const Artifacts& art, std::ostream& out) {
    require_sharp(c, "sweep");
    const auto t0 = std::chrono::steady_clock::now();
    ScatterSetup setup;
    setup.half_width = c.half_width;
    setup.nodes = c.nodes;
    setup.dt = c.dt;
    setup.threads = c.threads;
    const auto outcomes = scattering_sweep(c.q, c.speeds, setup);

    std::vector<std::vector<std::string>> rows;
    json list = json::array();
    for (const auto& o : outcomes) {
        rows.push_back({num(o.q), num(o.speed), num(o.horizon), num(o.final_center), num(o.mean_velocity),
                        to_string(o.outcome), num(o.energy_drift)});
        list.push_back({{"speed", o.speed},
                        {"horizon", o.horizon},
                        {"final_center", o.final_center},
                        {"mean_velocity", o.mean_velocity},
                        {"outcome", to_string(o.outcome)},
                        {"energy_drift", o.energy_drift}});
    }
    art.csv("sweep.csv", {"q", "speed", "horizon", "final_center", "mean_velocity", "outcome", "energy_drift"}, rows);
    art.report("sweep.json", {{"q", c.q},
                              {"start_center", kScatterStart},
                              {"threshold", kScatterThreshold},
                              {"outcomes", list}});
    out << fmt::format("sweep q={} ({:.2f} s)\n", c.q, seconds_since(t0));
    for (const auto& o : outcomes) {
        out << fmt::format("  v = {:<6g} {:<9} center {:8.3f}  velocity {:8.4f}\n", o.speed, to_string(o.outcome),
                           o.final_center, o.mean_velocity);
    }
    return kExitOk;
}

int cmd_minimize(const RunConfig& c, const Artifacts& art, std::ostream& out) {
    require_sharp(c, "minimize");
    const auto t0 = std::chrono::steady_clock::now();
    const Grid1D g = c.grid();
    FieldState init = FieldState::zeros(g);
    Sector sector = Sector::FreeH1;
    switch (c.scenario) {
        case Scenario::Zero:
            init.u1 = band_limited_noise(g, c.seed);
            for (auto& v : init.u1) v *= 0.1;
            break;
        case Scenario::GroundState:
            init = ground_state(g, c.q);
            for (auto& v : init.u1) v *= 0.9;
            break;
        case Scenario::Kink:
            init = kink_profile(g, c.center);
            sector = Sector::Degree1;
            break;
        default: unsupported(c, "minimize");
    }
    const auto r = minimize_energy(c.q, sector, init);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < r.energy_history.size(); ++k) {
        rows.push_back({std::to_string(k), num(r.energy_history[k])});
    }
    art.csv("minimize_history.csv", {"iteration", "energy"}, rows);
    rows.clear();
    for (std::size_t i = 0; i < g.size(); ++i) rows.push_back({num(g.x(i)), num(r.profile.u1[i])});
    art.csv("minimize_profile.csv", {"x", "u"}, rows);
    art.report("minimize.json", {{"sector", to_string(r.sector)},
                                 {"q", r.q},
                                 {"final_energy", r.final_energy},
                                 {"nearest_wave", r.nearest_wave},
                                 {"nearest_distance", r.nearest_distance},
                                 {"iterations", r.iterations},
                                 {"interior_residual", r.interior_residual},
                                 {"gluing_residual", r.gluing_residual}});
    out << fmt::format("minimize {} q={}: E = {:.10f} after {} iterations, nearest {} (distance {:.2e}) ({:.2f} s)\n",
                       to_string(r.sector), r.q, r.final_energy, r.iterations, r.nearest_wave, r.nearest_distance,
                       seconds_since(t0));
    return kExitOk;
}

int cmd_validate(const RunConfig& c, const Artifacts& art, std::ostream& out) {
    out << "acceptance suite\n";
    const auto results = run_acceptance(c.threads, [&](const CriterionResult& r) {
        out << fmt::format("  [{}] {:>2}. {:<32} {:7.2f} s  {}\n", r.passed ? "PASS" : "FAIL", r.id, r.name, r.seconds,
                           r.detail)
            << std::flush;
    });
    json list = json::array();
    std::size_t passed = 0;
    for (const auto& r : results) {
        passed += r.passed ? 1 : 0;
        list.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    }
    const bool all = passed == results.size();
    art.report("acceptance.json", {{"criteria", list}, {"passed", passed}, {"total", results.size()}, {"all_passed", all}});
    out << fmt::format("{}/{} criteria passed\n", passed, results.size());
    return all ? kExitOk : kExitValidationFailure;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(fmt::format("config: cannot read '{}'", path));
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int dispatch(const std::string& command, const RunConfig& config, std::ostream& out) {
    using Handler = int (*)(const RunConfig&, const Artifacts&, std::ostream&);
    static const std::pair<const char*, Handler> table[] = {
        {"run", cmd_run},           {"spectrum", cmd_spectrum}, {"stability", cmd_stability},
        {"instability", cmd_instability}, {"sweep", cmd_sweep}, {"minimize", cmd_minimize},
        {"validate", cmd_validate},
    };
    for (const auto& [name, handler] : table) {
        if (command == name) {
            const Artifacts art(config);
            return handler(config, art, out);
        }
    }
    throw ConfigError(fmt::format("unknown command '{}'", command));
}

std::string error_record(const std::exception& e, int exit_code) {
    json rec = {{"message", e.what()}, {"exit_code", exit_code}};
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        rec["kind"] = err->kind();
        rec["category"] = err->category() == ErrorCategory::Rejected ? "rejected" : "numeric";
        if (const auto* blow = dynamic_cast<const BlowUp*>(&e)) rec["time"] = blow->time();
    } else {
        rec["kind"] = "runtime";
        rec["category"] = "numeric";
    }
    return json{{"error", rec}}.dump();
}

int run_command(const CommandLine& cmd, std::ostream& out, std::ostream& err) {
    try {
        RunConfig config = parse_config(cmd.config_path ? read_file(*cmd.config_path) : std::string());
        if (cmd.out_dir) config.out_dir = *cmd.out_dir;
        if (cmd.seed) config.seed = *cmd.seed;
        if (cmd.threads) config.threads = *cmd.threads;
        validate_config(config);
        return dispatch(cmd.command, config, out);
    } catch (const Error& e) {
        const int code = e.category() == ErrorCategory::Rejected ? kExitRejected : kExitNumeric;
        err << error_record(e, code) << '\n';
        return code;
    } catch (const std::exception& e) {
        err << error_record(e, kExitNumeric) << '\n';
        return kExitNumeric;
    }
}

}  // namespace sgd
