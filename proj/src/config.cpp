#include "driftlab/config.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>

#include <json.hpp>

namespace driftlab::config {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
    }
}

double get_number(const json& obj, const char* key, double fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw std::invalid_argument("'" + where + "." + key + "' must be a number");
    return v.get<double>();
}

int get_int(const json& obj, const char* key, int fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer())
        throw std::invalid_argument("'" + where + "." + key + "' must be an integer");
    return v.get<int>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback,
                       const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) throw std::invalid_argument("'" + where + "." + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> get_array(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) return {};
    const auto& v = obj.at(key);
    if (!v.is_array()) throw std::invalid_argument("'" + where + "." + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            throw std::invalid_argument("'" + where + "." + key + "' must hold numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

fields::Params get_params(const json& obj, const char* key, const std::string& where) {
    fields::Params out;
    if (!obj.contains(key)) return out;
    const auto& v = obj.at(key);
    if (!v.is_object())
        throw std::invalid_argument("'" + where + "." + key + "' must be an object of numbers");
    for (auto it = v.begin(); it != v.end(); ++it) {
        if (!it.value().is_number())
            throw std::invalid_argument("'" + where + "." + key + "." + it.key() +
                                        "' must be a number");
        out[it.key()] = it.value().get<double>();
    }
    return out;
}

FieldConfig parse_field(const json& obj, const std::string& where) {
    check_keys(obj, where, {"drift", "params", "diffusion", "diffusion_params"});
    FieldConfig fc;
    fc.drift = get_string(obj, "drift", "", where);
    fc.params = get_params(obj, "params", where);
    fc.diffusion = get_string(obj, "diffusion", "", where);
    fc.diffusion_params = get_params(obj, "diffusion_params", where);
    if (!fc.drift.empty() && !fields::is_catalog_drift(fc.drift))
        throw std::invalid_argument("unknown drift catalog name '" + fc.drift + "' in " + where);
    if (!fc.diffusion.empty() && !fields::is_catalog_diffusion(fc.diffusion))
        throw std::invalid_argument("unknown diffusion catalog name '" + fc.diffusion + "' in " +
                                    where);
    return fc;
}

InitialConfig parse_initial(const json& obj, const std::string& where) {
    check_keys(obj, where, {"kind", "center", "var", "lo", "hi", "radius"});
    InitialConfig ic;
    ic.kind = get_string(obj, "kind", "point", where);
    if (ic.kind != "point" && ic.kind != "gaussian" && ic.kind != "box" && ic.kind != "ball")
        throw std::invalid_argument("'" + where +
                                    ".kind' must be one of point, gaussian, box, ball");
    ic.center = get_array(obj, "center", where);
    ic.var = get_number(obj, "var", 1.0, where);
    ic.lo = get_array(obj, "lo", where);
    ic.hi = get_array(obj, "hi", where);
    ic.radius = get_number(obj, "radius", 1.0, where);
    if (ic.kind == "gaussian" && !(ic.var > 0))
        throw std::invalid_argument("'" + where + ".var' must be positive");
    if (ic.kind == "ball" && !(ic.radius > 0))
        throw std::invalid_argument("'" + where + ".radius' must be positive");
    if (ic.kind == "box" && (ic.lo.empty() || ic.lo.size() != ic.hi.size()))
        throw std::invalid_argument("'" + where + "' box needs lo and hi of equal length");
    return ic;
}

json field_to_json(const FieldConfig& fc) {
    json j = json::object();
    j["drift"] = fc.drift;
    j["params"] = json::object();
    for (const auto& [k, v] : fc.params) j["params"][k] = v;
    j["diffusion"] = fc.diffusion;
    j["diffusion_params"] = json::object();
    for (const auto& [k, v] : fc.diffusion_params) j["diffusion_params"][k] = v;
    return j;
}

json initial_to_json(const InitialConfig& ic) {
    json j = json::object();
    j["kind"] = ic.kind;
    j["center"] = ic.center;
    j["var"] = ic.var;
    j["lo"] = ic.lo;
    j["hi"] = ic.hi;
    j["radius"] = ic.radius;
    return j;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::simulate: return "simulate";
        case ExperimentKind::stationary: return "stationary";
        case ExperimentKind::wasserstein: return "wasserstein";
        case ExperimentKind::verify: return "verify";
        case ExperimentKind::hopfield_demo: return "hopfield-demo";
        case ExperimentKind::fpe_solve: return "fpe-solve";
        case ExperimentKind::lemma_report: return "lemma-report";
    }
    return "unknown";
}

ExperimentKind experiment_from_string(const std::string& name) {
    for (auto k : {ExperimentKind::simulate, ExperimentKind::stationary,
                   ExperimentKind::wasserstein, ExperimentKind::verify,
                   ExperimentKind::hopfield_demo, ExperimentKind::fpe_solve,
                   ExperimentKind::lemma_report})
        if (name == to_string(k)) return k;
    throw std::invalid_argument(
        "unknown experiment '" + name +
        "'; expected one of simulate, stationary, wasserstein, verify, hopfield-demo, "
        "fpe-solve, lemma-report");
}

ExperimentConfig load_config_string(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("config parse error: ") + e.what());
    }
    if (!root.is_object()) throw std::invalid_argument("config root must be a JSON object");
    check_keys(root, "config",
               {"experiment", "claim", "field", "field_b", "initial", "initial_b", "numerics",
                "grid", "w2", "equilibrium", "output_dir"});

    ExperimentConfig cfg;
    if (!root.contains("experiment"))
        throw std::invalid_argument("config is missing the required key 'experiment'");
    cfg.experiment = experiment_from_string(get_string(root, "experiment", "", "config"));
    cfg.claim = get_string(root, "claim", "", "config");
    if (cfg.experiment == ExperimentKind::verify) {
        if (cfg.claim != "thm1_decay" && cfg.claim != "prop1_chi_bound" &&
            cfg.claim != "prop2_mass_sink" && cfg.claim != "thm2_concentration")
            throw std::invalid_argument(
                "unknown claim '" + cfg.claim +
                "': verify needs one of thm1_decay, prop1_chi_bound, "
                "prop2_mass_sink, thm2_concentration");
    }

    if (root.contains("field")) cfg.field = parse_field(root.at("field"), "field");
    if (root.contains("field_b")) cfg.field_b = parse_field(root.at("field_b"), "field_b");
    if (root.contains("initial")) cfg.initial = parse_initial(root.at("initial"), "initial");
    if (root.contains("initial_b"))
        cfg.initial_b = parse_initial(root.at("initial_b"), "initial_b");

    if (root.contains("numerics")) {
        const auto& n = root.at("numerics");
        check_keys(n, "numerics",
                   {"dt", "T", "N", "seed", "threads", "tolerance", "checkpoint", "kernel_var"});
        cfg.numerics.dt = get_number(n, "dt", cfg.numerics.dt, "numerics");
        cfg.numerics.T = get_number(n, "T", cfg.numerics.T, "numerics");
        cfg.numerics.N = get_int(n, "N", cfg.numerics.N, "numerics");
        if (n.contains("seed")) {
            const auto& s = n.at("seed");
            if (!s.is_number_integer() && !s.is_number_unsigned())
                throw std::invalid_argument("'numerics.seed' must be an integer");
            cfg.numerics.seed = s.get<std::uint64_t>();
        }
        cfg.numerics.threads = get_int(n, "threads", cfg.numerics.threads, "numerics");
        cfg.numerics.tolerance = get_number(n, "tolerance", cfg.numerics.tolerance, "numerics");
        cfg.numerics.checkpoint = get_number(n, "checkpoint", cfg.numerics.checkpoint, "numerics");
        cfg.numerics.kernel_var = get_number(n, "kernel_var", cfg.numerics.kernel_var, "numerics");
        if (!(cfg.numerics.kernel_var > 0))
            throw std::invalid_argument("'numerics.kernel_var' must be positive");
        if (!(cfg.numerics.dt > 0)) throw std::invalid_argument("'numerics.dt' must be positive");
        if (!(cfg.numerics.T > 0)) throw std::invalid_argument("'numerics.T' must be positive");
        if (cfg.numerics.N < 1) throw std::invalid_argument("'numerics.N' must be >= 1");
        if (cfg.numerics.threads < 0)
            throw std::invalid_argument("'numerics.threads' must be >= 0");
        if (!(cfg.numerics.tolerance > 0))
            throw std::invalid_argument("'numerics.tolerance' must be positive");
        if (!(cfg.numerics.checkpoint > 0))
            throw std::invalid_argument("'numerics.checkpoint' must be positive");
    }

    if (root.contains("grid")) {
        const auto& g = root.at("grid");
        check_keys(g, "grid", {"x_min", "x_max", "y_min", "y_max", "nx", "ny"});
        GridConfig gc;
        gc.x_min = get_number(g, "x_min", gc.x_min, "grid");
        gc.x_max = get_number(g, "x_max", gc.x_max, "grid");
        gc.y_min = get_number(g, "y_min", gc.y_min, "grid");
        gc.y_max = get_number(g, "y_max", gc.y_max, "grid");
        gc.nx = get_int(g, "nx", gc.nx, "grid");
        gc.ny = get_int(g, "ny", gc.ny, "grid");
        if (!(gc.x_max > gc.x_min) || !(gc.y_max > gc.y_min))
            throw std::invalid_argument("'grid' bounds must satisfy max > min");
        if (gc.nx < 2 || gc.ny < 2) throw std::invalid_argument("'grid' needs nx, ny >= 2");
        cfg.grid = gc;
    }

    if (root.contains("w2")) {
        const auto& w = root.at("w2");
        check_keys(w, "w2", {"method", "epsilon", "n_projections", "max_points"});
        cfg.w2.method = get_string(w, "method", cfg.w2.method, "w2");
        if (cfg.w2.method != "exact" && cfg.w2.method != "entropic" && cfg.w2.method != "sliced")
            throw std::invalid_argument("'w2.method' must be exact, entropic, or sliced");
        cfg.w2.epsilon = get_number(w, "epsilon", cfg.w2.epsilon, "w2");
        cfg.w2.n_projections = get_int(w, "n_projections", cfg.w2.n_projections, "w2");
        cfg.w2.max_points = get_int(w, "max_points", cfg.w2.max_points, "w2");
        if (cfg.w2.n_projections < 1)
            throw std::invalid_argument("'w2.n_projections' must be >= 1");
        if (cfg.w2.max_points < 1) throw std::invalid_argument("'w2.max_points' must be >= 1");
    }

    cfg.equilibrium = get_array(root, "equilibrium", "config");
    cfg.output_dir = get_string(root, "output_dir", cfg.output_dir, "config");
    if (cfg.output_dir.empty()) throw std::invalid_argument("'output_dir' must not be empty");
    return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_config_string(text);
}

std::string save_config(const ExperimentConfig& cfg) {
    json root = json::object();
    root["experiment"] = to_string(cfg.experiment);
    if (!cfg.claim.empty()) root["claim"] = cfg.claim;
    root["field"] = field_to_json(cfg.field);
    if (cfg.field_b) root["field_b"] = field_to_json(*cfg.field_b);
    root["initial"] = initial_to_json(cfg.initial);
    if (cfg.initial_b) root["initial_b"] = initial_to_json(*cfg.initial_b);
    root["numerics"] = {{"dt", cfg.numerics.dt},
                        {"T", cfg.numerics.T},
                        {"N", cfg.numerics.N},
                        {"seed", cfg.numerics.seed},
                        {"threads", cfg.numerics.threads},
                        {"tolerance", cfg.numerics.tolerance},
                        {"checkpoint", cfg.numerics.checkpoint},
                        {"kernel_var", cfg.numerics.kernel_var}};
    if (cfg.grid)
        root["grid"] = {{"x_min", cfg.grid->x_min}, {"x_max", cfg.grid->x_max},
                        {"y_min", cfg.grid->y_min}, {"y_max", cfg.grid->y_max},
                        {"nx", cfg.grid->nx},       {"ny", cfg.grid->ny}};
    root["w2"] = {{"method", cfg.w2.method},
                  {"epsilon", cfg.w2.epsilon},
                  {"n_projections", cfg.w2.n_projections},
                  {"max_points", cfg.w2.max_points}};
    if (!cfg.equilibrium.empty()) root["equilibrium"] = cfg.equilibrium;
    root["output_dir"] = cfg.output_dir;
    return root.dump(2) + "\n";
}

}  // namespace driftlab::config
