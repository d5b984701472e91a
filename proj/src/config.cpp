#include "sgdelta/config.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "sgdelta/dynamics.hpp"
#include "sgdelta/error.hpp"

namespace sgd {

using nlohmann::json;

namespace {

constexpr std::pair<Scenario, const char*> kScenarioNames[] = {
    {Scenario::Zero, "zero"},
    {Scenario::Kink, "kink"},
    {Scenario::GroundState, "ground_state"},
    {Scenario::BoostedKink, "boosted_kink"},
    {Scenario::Scatter, "scatter"},
};

// Pulls typed fields out of one JSON object and remembers which keys were
// seen, so leftovers can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const json& object, std::string prefix) : obj_(object), prefix_(std::move(prefix)) {
        if (!obj_.is_object()) throw ConfigError(fmt::format("config: '{}' must be an object", name("")));
    }

    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw type_error(key, "a number");
            out = v->get<double>();
        }
    }

    template <class Int>
    void integer(const std::string& key, Int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned()) {
                throw type_error(key, "a non-negative integer");
            }
            out = static_cast<Int>(v->get<std::uint64_t>());
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw type_error(key, "a string");
            out = v->get<std::string>();
        }
    }

    void numbers(const std::string& key, std::vector<double>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) throw type_error(key, "an array of numbers");
            std::vector<double> values;
            for (const auto& e : *v) {
                if (!e.is_number()) throw type_error(key, "an array of numbers");
                values.push_back(e.get<double>());
            }
            out = std::move(values);
        }
    }

    std::optional<ObjectReader> child(const std::string& key) {
        if (const json* v = find(key)) return ObjectReader(*v, name(key));
        return std::nullopt;
    }

    void reject_unknown() const {
        for (const auto& item : obj_.items()) {
            if (!seen_.count(item.key())) throw ConfigError(fmt::format("config: unknown key '{}'", name(item.key())));
        }
    }

    std::string name(const std::string& key) const {
        if (prefix_.empty()) return key.empty() ? "<root>" : key;
        return key.empty() ? prefix_ : prefix_ + "." + key;
    }

private:
    ConfigError type_error(const std::string& key, const char* what) const {
        return ConfigError(fmt::format("config: field '{}' must be {}", name(key), what));
    }

    const json& obj_;
    std::string prefix_;
    std::set<std::string> seen_;
};

template <class Enum, std::size_t N>
Enum lookup(const std::pair<Enum, const char*> (&table)[N], const std::string& text, const char* field) {
    for (const auto& [value, label] : table) {
        if (text == label) return value;
    }
    std::string allowed;
    for (const auto& [value, label] : table) allowed += fmt::format("{}{}", allowed.empty() ? "" : ", ", label);
    throw ConfigError(fmt::format("config: field '{}' has unknown value '{}' (allowed: {})", field, text, allowed));
}

template <class Enum, std::size_t N>
const char* label_of(const std::pair<Enum, const char*> (&table)[N], Enum value) {
    for (const auto& [v, label] : table) {
        if (v == value) return label;
    }
    return "?";
}

constexpr std::pair<DeltaMode, const char*> kModeNames[] = {{DeltaMode::Sharp, "sharp"},
                                                            {DeltaMode::Mollified, "mollified"}};
constexpr std::pair<MollifiedCoupling, const char*> kCouplingNames[] = {{MollifiedCoupling::Paired, "paired"},
                                                                        {MollifiedCoupling::Pointwise, "pointwise"}};

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError("config: " + message);
}

json to_json(const RunConfig& c, bool execution_fields) {
    json j;
    j["scenario"] = to_string(c.scenario);
    j["q"] = c.q;
    j["delta_mode"] = label_of(kModeNames, c.delta_mode);
    j["epsilon"] = c.epsilon;
    j["coupling"] = label_of(kCouplingNames, c.coupling);
    j["grid"] = {{"L", c.half_width}, {"N", c.nodes}};
    j["dt"] = c.dt;
    j["horizon"] = c.horizon;
    j["wave"] = {{"center", c.center}, {"speed", c.speed}};
    j["speeds"] = c.speeds;
    j["amplitudes"] = c.amplitudes;
    j["seed_amplitude"] = c.seed_amplitude;
    j["eigen_count"] = c.eigen_count;
    j["output"] = {{"stride", c.output_stride}};
    j["seed"] = c.seed;
    if (execution_fields) {
        j["output"]["dir"] = c.out_dir;
        j["threads"] = c.threads;
    }
    return j;
}

}  // namespace

std::string to_string(Scenario s) { return label_of(kScenarioNames, s); }

ImpurityParams RunConfig::impurity() const {
    return delta_mode == DeltaMode::Sharp ? ImpurityParams::sharp(q) : ImpurityParams::mollified(q, epsilon, coupling);
}

RunConfig parse_config(const std::string& text) {
    json doc;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        doc = json::object();
    } else {
        try {
            doc = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(fmt::format("config: malformed document: {}", e.what()));
        }
    }

    RunConfig c;
    ObjectReader root(doc, "");
    std::string label = to_string(c.scenario);
    root.string("scenario", label);
    c.scenario = lookup(kScenarioNames, label, "scenario");
    root.number("q", c.q);
    label = label_of(kModeNames, c.delta_mode);
    root.string("delta_mode", label);
    c.delta_mode = lookup(kModeNames, label, "delta_mode");
    root.number("epsilon", c.epsilon);
    label = label_of(kCouplingNames, c.coupling);
    root.string("coupling", label);
    c.coupling = lookup(kCouplingNames, label, "coupling");
    if (auto grid = root.child("grid")) {
        grid->number("L", c.half_width);
        grid->integer("N", c.nodes);
        grid->reject_unknown();
    }
    bool has_dt = false;
    if (root.find("dt")) {
        has_dt = true;
        root.number("dt", c.dt);
    }
    root.number("horizon", c.horizon);
    if (auto wave = root.child("wave")) {
        wave->number("center", c.center);
        wave->number("speed", c.speed);
        wave->reject_unknown();
    }
    root.numbers("speeds", c.speeds);
    root.numbers("amplitudes", c.amplitudes);
    root.number("seed_amplitude", c.seed_amplitude);
    root.integer("eigen_count", c.eigen_count);
    if (auto out = root.child("output")) {
        out->string("dir", c.out_dir);
        out->integer("stride", c.output_stride);
        out->reject_unknown();
    }
    root.integer("seed", c.seed);
    root.integer("threads", c.threads);
    root.reject_unknown();

    // Grid first: dt defaults to dx / 2.
    const Grid1D grid = c.grid();
    if (!has_dt) c.dt = default_time_step(grid);
    validate_config(c);
    return c;
}

void validate_config(const RunConfig& c) {
    const Grid1D grid = c.grid();
    const double dx = grid.spacing();

    require(std::isfinite(c.q), "field 'q' must be finite");
    require(std::isfinite(c.dt) && c.dt > 0.0, fmt::format("field 'dt' must be positive, got {}", c.dt));
    if (c.dt > kCflLimit * dx * (1.0 + 1e-12)) {
        throw CflViolation(fmt::format("config: dt = {} violates the CFL condition dt <= 0.9*dx = {}", c.dt,
                                       kCflLimit * dx));
    }
    require(std::isfinite(c.horizon) && c.horizon > 0.0,
            fmt::format("field 'horizon' must be positive, got {}", c.horizon));
    require(std::isfinite(c.center) && std::abs(c.center) < c.half_width,
            fmt::format("field 'wave.center' must lie inside (-L, L), got {}", c.center));
    require(c.output_stride >= 1, "field 'output.stride' must be at least 1");
    require(c.eigen_count >= 1, "field 'eigen_count' must be at least 1");
    require(c.threads >= 1, "field 'threads' must be at least 1");
    require(!c.out_dir.empty(), "field 'output.dir' must not be empty");

    if (c.delta_mode == DeltaMode::Mollified) {
        if (!(c.epsilon < c.half_width)) {
            throw InvalidArgument(fmt::format("config: mollifier width epsilon = {} must be below L", c.epsilon));
        }
        c.impurity().validate(grid);
    }

    if (c.scenario == Scenario::GroundState && !(std::abs(c.q) > 2.0)) {
        throw NoH1Wave(fmt::format(
            "config: scenario 'ground_state' needs |q| > 2; for |q| <= 2 there is no stationary H1 wave (got q = {})",
            c.q));
    }
    if (!(std::abs(c.speed) < 1.0)) {
        throw SuperluminalSpeed(
            fmt::format("config: kink speed must be subluminal, |v| < 1 (got wave.speed = {})", c.speed));
    }
    require(!c.speeds.empty(), "field 'speeds' must not be empty");
    for (double v : c.speeds) {
        if (!(std::abs(v) < 1.0)) {
            throw SuperluminalSpeed(fmt::format("config: kink speed must be subluminal, |v| < 1 (got {} in 'speeds')", v));
        }
        require(v > 0.0, fmt::format("field 'speeds' entries must be positive, got {}", v));
    }
    for (std::size_t i = 0; i < c.amplitudes.size(); ++i) {
        require(std::isfinite(c.amplitudes[i]) && c.amplitudes[i] >= 0.0,
                "field 'amplitudes' entries must be non-negative");
        require(i == 0 || c.amplitudes[i] > c.amplitudes[i - 1], "field 'amplitudes' must be increasing");
    }
    require(std::isfinite(c.seed_amplitude) && c.seed_amplitude >= 0.0,
            "field 'seed_amplitude' must be non-negative");
}

std::string serialize_config(const RunConfig& config) { return to_json(config, true).dump(2); }

std::string config_hash(const RunConfig& config) {
    const std::string canonical = to_json(config, false).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

}  // namespace sgd
