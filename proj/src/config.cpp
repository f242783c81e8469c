#include "umdp/config.hpp"

#include "umdp/errors.hpp"
#include "umdp/ltlf.hpp"

#include <fstream>

namespace umdp {

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& why) {
    throw Error(ErrorCode::ConfigInvalid, path + ": " + why);
}

const nlohmann::json& field(const nlohmann::json& j, const std::string& path, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) invalid(path + "." + key, "missing");
    return *it;
}

Vec vec_field(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) invalid(path, "expected a nonempty array of numbers");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) invalid(path, "expected numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Box box_field(const nlohmann::json& j, const std::string& path) {
    return Box(vec_field(field(j, path, "lo"), path + ".lo"), vec_field(field(j, path, "hi"), path + ".hi"));
}

std::vector<Index> counts_field(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) invalid(path, "expected a nonempty integer array");
    std::vector<Index> out;
    for (const auto& v : j) {
        if (!v.is_number_integer() || v.get<Index>() < 1) invalid(path, "counts must be positive integers");
        out.push_back(v.get<Index>());
    }
    return out;
}

double param(const nlohmann::json& params, const char* key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->get<double>();
}

Dynamics build_dynamics(const std::string& name, const nlohmann::json& params, double lipschitz) {
    if (name == "thermal1d")
        return make_thermal1d(param(params, "tau_alpha_e", 0.06), param(params, "tau_alpha_h", 0.08),
                              param(params, "t_env", 15.0), param(params, "t_heater", 45.0), lipschitz);
    if (name == "expander1d") return make_expander1d(param(params, "slope", 1.5), lipschitz);
    if (name == "cart2d")
        return make_cart2d(param(params, "v_lin", 0.08), param(params, "c_dist", 0.25), lipschitz);
    invalid("system.name", "unknown builtin '" + name + "' (expected thermal1d, cart2d or expander1d)");
}

} // namespace

SynthesisSpec RunConfig::synthesis_spec(int threads) const {
    SynthesisSpec spec;
    spec.x_abs = domain;
    spec.initial_counts = initial_counts;
    spec.initial_w_counts = initial_w_counts;
    spec.factor = factor;
    spec.max_iterations = max_iterations;
    spec.horizon = horizon;
    spec.epsilon = epsilon;
    spec.kind = kind;
    spec.threads = threads;
    return spec;
}

RunConfig parse_config(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.raw = j;

    const auto& system = field(j, "config", "system");
    cfg.system_name = field(system, "system", "name").get<std::string>();
    const double lipschitz = field(system, "system", "lipschitz").get<double>();
    if (!(lipschitz >= 0.0)) invalid("system.lipschitz", "must be >= 0");
    const nlohmann::json params =
        system.contains("params") ? system["params"] : nlohmann::json::object();
    cfg.dynamics = build_dynamics(cfg.system_name, params, lipschitz);

    const auto& dist = field(j, "config", "disturbance");
    const std::string dist_kind = field(dist, "disturbance", "kind").get<std::string>();
    const Box support = box_field(field(dist, "disturbance", "support"), "disturbance.support");
    if (support.dim() != cfg.dynamics.disturbance_dim)
        invalid("disturbance.support", "dimension mismatch with the system");
    if (dist_kind == "uniform") {
        cfg.disturbance = uniform_disturbance(support);
    } else if (dist_kind == "truncated_gaussian") {
        cfg.disturbance = truncated_gaussian(vec_field(field(dist, "disturbance", "mean"), "disturbance.mean"),
                                             vec_field(field(dist, "disturbance", "sigma"), "disturbance.sigma"),
                                             support);
    } else {
        invalid("disturbance.kind", "expected 'uniform' or 'truncated_gaussian'");
    }

    cfg.domain = box_field(field(j, "config", "domain"), "domain");
    if (cfg.domain.dim() != cfg.dynamics.state_dim) invalid("domain", "dimension mismatch with the system");

    std::vector<Box> safe_boxes;
    const auto& safe = field(j, "config", "safe");
    if (!safe.is_array() || safe.empty()) invalid("safe", "expected a nonempty array of boxes");
    for (std::size_t i = 0; i < safe.size(); ++i)
        safe_boxes.push_back(box_field(safe[i], "safe[" + std::to_string(i) + "]"));

    std::vector<std::string> extra_atoms;
    std::vector<LabeledRegion> regions;
    if (j.contains("regions")) {
        for (std::size_t i = 0; i < j["regions"].size(); ++i) {
            const auto& r = j["regions"][i];
            const std::string path = "regions[" + std::to_string(i) + "]";
            LabeledRegion lr;
            lr.name = field(r, path, "name").get<std::string>();
            for (const auto& atom : field(r, path, "atoms")) {
                const std::string a = atom.get<std::string>();
                if (a != "safe" &&
                    std::find(extra_atoms.begin(), extra_atoms.end(), a) == extra_atoms.end())
                    extra_atoms.push_back(a);
            }
            for (const auto& b : field(r, path, "boxes"))
                lr.boxes.push_back(box_field(b, path + ".boxes"));
            regions.push_back(std::move(lr));
        }
    }
    cfg.regions = make_region_set(extra_atoms, std::move(regions), std::move(safe_boxes));
    // atom masks resolve against the final atom order
    for (std::size_t i = 0; i < cfg.regions.regions.size(); ++i) {
        const auto& r = cfg.raw["regions"][i];
        std::uint32_t mask = 0;
        for (const auto& atom : r["atoms"]) {
            const int idx = cfg.regions.atom_index(atom.get<std::string>());
            if (idx < 0) invalid("regions", "atom resolution failed");
            mask |= 1u << idx;
        }
        cfg.regions.regions[i].atom_mask = mask;
    }

    cfg.formula_text = field(j, "config", "formula").get<std::string>();
    {
        // UnknownAtom surfaces here when the formula references undeclared atoms
        FormulaArena arena(cfg.regions.atoms);
        parse_formula(arena, cfg.formula_text);
    }

    cfg.horizon = field(j, "config", "horizon").get<Index>();
    cfg.epsilon = field(j, "config", "epsilon").get<double>();
    cfg.kind = abstraction_kind_from_string(field(j, "config", "abstraction").get<std::string>());

    const auto& schedule = field(j, "config", "schedule");
    cfg.initial_counts = counts_field(field(schedule, "schedule", "initial_counts"), "schedule.initial_counts");
    cfg.initial_w_counts =
        counts_field(field(schedule, "schedule", "disturbance_counts"), "schedule.disturbance_counts");
    if (static_cast<int>(cfg.initial_counts.size()) != cfg.dynamics.state_dim)
        invalid("schedule.initial_counts", "dimension mismatch with the system");
    if (static_cast<int>(cfg.initial_w_counts.size()) != cfg.dynamics.disturbance_dim)
        invalid("schedule.disturbance_counts", "dimension mismatch with the disturbance");
    cfg.factor = schedule.contains("factor") ? schedule["factor"].get<Index>() : 2;
    cfg.max_iterations = field(schedule, "schedule", "max_iterations").get<int>();
    cfg.seed = j.contains("seed") ? j["seed"].get<std::uint64_t>() : 0;
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("JSON parse failure: ") + e.what());
    }
    return parse_config(j);
}

std::string canonical_json(const nlohmann::json& j) { return j.dump(); }

std::uint64_t config_hash(const nlohmann::json& j) {
    const std::string s = canonical_json(j);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace umdp
