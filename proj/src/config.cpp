#include "bdex/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

namespace bdex {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

json boundary_to_json(const BoundaryProfile& b) {
    if (b.modes().empty()) return b.constant();
    json modes = json::array();
    for (const auto& m : b.modes()) modes.push_back({{"wave", m.wave}, {"cos", m.cos_amp}, {"sin", m.sin_amp}});
    return {{"constant", b.constant()}, {"modes", modes}};
}

BoundaryProfile boundary_from_json(const json& j, const std::string& where) {
    if (j.is_number()) return BoundaryProfile(j.get<double>());
    reject_unknown(j, where, {"constant", "modes"});
    double c = 0.5;
    read(j, "constant", c, where);
    std::vector<FourierMode> modes;
    if (j.contains("modes")) {
        if (!j["modes"].is_array()) throw ConfigError(where + ".modes: expected an array");
        for (const auto& m : j["modes"]) {
            reject_unknown(m, where + ".modes[]", {"wave", "cos", "sin"});
            FourierMode f;
            read(m, "wave", f.wave, where + ".modes[]");
            read(m, "cos", f.cos_amp, where + ".modes[]");
            read(m, "sin", f.sin_amp, where + ".modes[]");
            modes.push_back(std::move(f));
        }
    }
    return BoundaryProfile(c, std::move(modes));
}

const char* engine_name(EngineKind k) { return k == EngineKind::Gillespie ? "gillespie" : "thinning"; }

void set_path(json& root, const std::string& dotted, const json& value) {
    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError("override: empty key in '" + dotted + "'");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = json::object();
        node = &(*node)[key];
        start = dot + 1;
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), experiment) == names.end())
        throw ConfigError("experiment: unknown name '" + experiment + "'");
    if (d < 1) throw ConfigError("geometry.d must be >= 1");
    if (N < 2) throw ConfigError("geometry.N must be >= 2");
    for (int n : N_list)
        if (n < 2) throw ConfigError("geometry.N_list entries must be >= 2");
    try {
        params.validate(d);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("params: ") + e.what());
    }
    if (grid.M1 < 0 || grid.Mp < 0) throw ConfigError("grid.M1 and grid.Mp must be >= 0");
    if (grid.dt < 0.0) throw ConfigError("grid.dt must be >= 0");
    if (grid.stride < 1) throw ConfigError("grid.stride must be >= 1");
    if (!(run.T > 0.0)) throw ConfigError("run.T must be > 0");
    if (!(run.burn_in >= 0.0 && run.burn_in < run.T)) throw ConfigError("run.burn_in must lie in [0, T)");
    if (run.replicas < 1) throw ConfigError("run.replicas must be >= 1");
    if (run.batches < 1) throw ConfigError("run.batches must be >= 1");
    for (double t : run.probe_times)
        if (!(t >= 0.0 && t <= run.T)) throw ConfigError("run.probe_times must lie in [0, T]");
    static const std::set<std::string> kinds{"hydrostatic", "step", "constant", "smooth"};
    if (!kinds.count(initial.kind)) throw ConfigError("initial.kind: unknown kind '" + initial.kind + "'");
    for (double v : {initial.left, initial.right})
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("initial densities must lie in [0,1]");
    if (tilt.window < 0.0) throw ConfigError("tilt.window must be >= 0");
    static const std::set<std::string> paths{"hydrodynamic", "controlled", "perturbed", "file"};
    if (!paths.count(rate.path)) throw ConfigError("rate.path: unknown kind '" + rate.path + "'");
    if (rate.path == "file" && rate.trajectory_dir.empty()) throw ConfigError("rate.trajectory_dir is required");
    if (!(local_eq.eps > 0.0)) throw ConfigError("local_eq.eps must be > 0");
    static const std::set<std::string> fns{"density", "h", "g"};
    if (!fns.count(local_eq.function)) throw ConfigError("local_eq.function: unknown '" + local_eq.function + "'");
    if (local_eq.dir < 0 || local_eq.dir >= d) throw ConfigError("local_eq.dir out of range");
    if (checks.smoothing_l < 0) throw ConfigError("checks.smoothing_l must be >= 0");
    if (!(checks.l1_tolerance > 0.0 && checks.current_tolerance > 0.0 && checks.z_tolerance > 0.0 &&
          checks.rate_tolerance > 0.0 && checks.control_tolerance > 0.0 && checks.perturb_factor > 0.0))
        throw ConfigError("checks: tolerances must be > 0");
    if (output.empty()) throw ConfigError("output must be non-empty");
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = c.experiment;
    j["geometry"] = {{"d", c.d}, {"N", c.N}, {"N_list", c.N_list}};
    j["params"] = {{"a", c.params.a},
                   {"b_minus", boundary_to_json(c.params.b_minus)},
                   {"b_plus", boundary_to_json(c.params.b_plus)}};
    j["grid"] = {{"M1", c.grid.M1}, {"Mp", c.grid.Mp}, {"dt", c.grid.dt}, {"stride", c.grid.stride}};
    j["run"] = {{"T", c.run.T},
                {"burn_in", c.run.burn_in},
                {"replicas", c.run.replicas},
                {"batches", c.run.batches},
                {"seed", c.run.seed},
                {"engine", engine_name(c.run.engine)},
                {"probe_times", c.run.probe_times}};
    j["initial"] = {{"kind", c.initial.kind},
                    {"left", c.initial.left},
                    {"right", c.initial.right},
                    {"position", c.initial.position}};
    j["tilt"] = {{"amplitude", c.tilt.amplitude}, {"wave", c.tilt.wave}, {"window", c.tilt.window}};
    j["rate"] = {{"path", c.rate.path}, {"trajectory_dir", c.rate.trajectory_dir},
                 {"perturbation", c.rate.perturbation}};
    j["oracle"] = {{"fixtures", c.oracle.fixtures}};
    j["local_eq"] = {{"eps", c.local_eq.eps}, {"function", c.local_eq.function}, {"dir", c.local_eq.dir}};
    j["checks"] = {{"smoothing_l", c.checks.smoothing_l},
                   {"l1_tolerance", c.checks.l1_tolerance},
                   {"current_tolerance", c.checks.current_tolerance},
                   {"z_tolerance", c.checks.z_tolerance},
                   {"rate_tolerance", c.checks.rate_tolerance},
                   {"control_tolerance", c.checks.control_tolerance},
                   {"perturb_factor", c.checks.perturb_factor}};
    j["output"] = c.output;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    reject_unknown(j, "config", {"experiment", "geometry", "params", "grid", "run", "initial", "tilt", "rate",
                                 "oracle", "local_eq", "checks", "output"});
    read(j, "experiment", c.experiment, "config");
    read(j, "output", c.output, "config");
    if (j.contains("geometry")) {
        const auto& g = j["geometry"];
        reject_unknown(g, "geometry", {"d", "N", "N_list"});
        read(g, "d", c.d, "geometry");
        read(g, "N", c.N, "geometry");
        read(g, "N_list", c.N_list, "geometry");
    }
    if (j.contains("params")) {
        const auto& p = j["params"];
        reject_unknown(p, "params", {"a", "b_minus", "b_plus"});
        read(p, "a", c.params.a, "params");
        if (p.contains("b_minus")) c.params.b_minus = boundary_from_json(p["b_minus"], "params.b_minus");
        if (p.contains("b_plus")) c.params.b_plus = boundary_from_json(p["b_plus"], "params.b_plus");
    }
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        reject_unknown(g, "grid", {"M1", "Mp", "dt", "stride"});
        read(g, "M1", c.grid.M1, "grid");
        read(g, "Mp", c.grid.Mp, "grid");
        read(g, "dt", c.grid.dt, "grid");
        read(g, "stride", c.grid.stride, "grid");
    }
    if (j.contains("run")) {
        const auto& r = j["run"];
        reject_unknown(r, "run", {"T", "burn_in", "replicas", "batches", "seed", "engine", "probe_times"});
        read(r, "T", c.run.T, "run");
        read(r, "burn_in", c.run.burn_in, "run");
        read(r, "replicas", c.run.replicas, "run");
        read(r, "batches", c.run.batches, "run");
        read(r, "seed", c.run.seed, "run");
        read(r, "probe_times", c.run.probe_times, "run");
        if (r.contains("engine")) {
            std::string e;
            read(r, "engine", e, "run");
            if (e == "gillespie") c.run.engine = EngineKind::Gillespie;
            else if (e == "thinning") c.run.engine = EngineKind::Thinning;
            else throw ConfigError("run.engine: expected 'gillespie' or 'thinning'");
        }
    }
    if (j.contains("initial")) {
        const auto& i = j["initial"];
        reject_unknown(i, "initial", {"kind", "left", "right", "position"});
        read(i, "kind", c.initial.kind, "initial");
        read(i, "left", c.initial.left, "initial");
        read(i, "right", c.initial.right, "initial");
        read(i, "position", c.initial.position, "initial");
    }
    if (j.contains("tilt")) {
        const auto& t = j["tilt"];
        reject_unknown(t, "tilt", {"amplitude", "wave", "window"});
        read(t, "amplitude", c.tilt.amplitude, "tilt");
        read(t, "wave", c.tilt.wave, "tilt");
        read(t, "window", c.tilt.window, "tilt");
    }
    if (j.contains("rate")) {
        const auto& r = j["rate"];
        reject_unknown(r, "rate", {"path", "trajectory_dir", "perturbation"});
        read(r, "path", c.rate.path, "rate");
        read(r, "trajectory_dir", c.rate.trajectory_dir, "rate");
        read(r, "perturbation", c.rate.perturbation, "rate");
    }
    if (j.contains("oracle")) {
        const auto& o = j["oracle"];
        reject_unknown(o, "oracle", {"fixtures"});
        read(o, "fixtures", c.oracle.fixtures, "oracle");
    }
    if (j.contains("local_eq")) {
        const auto& l = j["local_eq"];
        reject_unknown(l, "local_eq", {"eps", "function", "dir"});
        read(l, "eps", c.local_eq.eps, "local_eq");
        read(l, "function", c.local_eq.function, "local_eq");
        read(l, "dir", c.local_eq.dir, "local_eq");
    }
    if (j.contains("checks")) {
        const auto& k = j["checks"];
        reject_unknown(k, "checks", {"smoothing_l", "l1_tolerance", "current_tolerance", "z_tolerance",
                                     "rate_tolerance", "control_tolerance", "perturb_factor"});
        read(k, "smoothing_l", c.checks.smoothing_l, "checks");
        read(k, "l1_tolerance", c.checks.l1_tolerance, "checks");
        read(k, "current_tolerance", c.checks.current_tolerance, "checks");
        read(k, "z_tolerance", c.checks.z_tolerance, "checks");
        read(k, "rate_tolerance", c.checks.rate_tolerance, "checks");
        read(k, "control_tolerance", c.checks.control_tolerance, "checks");
        read(k, "perturb_factor", c.checks.perturb_factor, "checks");
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

ExperimentConfig apply_overrides(const ExperimentConfig& c, const std::vector<std::string>& overrides) {
    json j = to_json(c);
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + o);
        const std::string key = o.substr(0, eq);
        const std::string raw = o.substr(eq + 1);
        json value = json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;
        set_path(j, key, value);
    }
    return config_from_json(j);
}

std::uint64_t fnv1a64(const std::string& bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const ExperimentConfig& c) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(c).dump())));
    return buf;
}

}  // namespace bdex
