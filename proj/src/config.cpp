#include "liemidpoint/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "liemidpoint/toml.hpp"

namespace lmp {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw ConfigError("config: " + msg); }

double get_number(const json& j, const std::string& where) {
    if (!j.is_number()) bad(where + " must be a number");
    return j.get<double>();
}

Vec3 get_vec3(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) bad(where + " must be an array of three numbers");
    return {get_number(j[0], where), get_number(j[1], where), get_number(j[2], where)};
}

Mat3 get_inertia(const json& j) {
    if (j.is_array() && j.size() == 3 && j[0].is_number()) {
        const Vec3 d = get_vec3(j, "model.inertia");
        return Mat3::diagonal(d.x, d.y, d.z);
    }
    if (j.is_array() && j.size() == 3) {
        Mat3 m;
        for (int r = 0; r < 3; ++r) {
            const Vec3 row = get_vec3(j[r], "model.inertia row");
            m(r, 0) = row.x;
            m(r, 1) = row.y;
            m(r, 2) = row.z;
        }
        return m;
    }
    bad("model.inertia must be a diagonal triple or a 3x3 matrix");
}

NoiseHamiltonian get_noise(const json& j) {
    if (!j.is_object()) bad("each [[noise]] entry must be a table");
    if (!j.contains("kind") || !j["kind"].is_string()) bad("noise entry needs a string 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    auto coeff = [&](const char* name = "k") {
        if (!j.contains(name)) bad("noise '" + kind + "' needs coefficient '" + name + "'");
        return get_number(j[name], "noise coefficient");
    };
    if (kind == "linear_momentum") {
        if (!j.contains("chi")) bad("noise 'linear_momentum' needs a 'chi' vector");
        return NoiseHamiltonian::linear_momentum(get_vec3(j["chi"], "noise.chi"));
    }
    if (kind == "momentum_x") return NoiseHamiltonian::momentum_x(coeff());
    if (kind == "momentum_y") return NoiseHamiltonian::momentum_y(coeff());
    if (kind == "momentum_z") return NoiseHamiltonian::momentum_z(coeff());
    if (kind == "momentum_norm_sq") return NoiseHamiltonian::momentum_norm_sq(coeff());
    if (kind == "gamma_x") return NoiseHamiltonian::gamma_x(coeff());
    if (kind == "gamma_y") return NoiseHamiltonian::gamma_y(coeff());
    if (kind == "gamma_z") return NoiseHamiltonian::gamma_z(coeff());
    bad("unknown noise kind '" + kind + "'");
}

json noise_to_json(const NoiseHamiltonian& n) {
    json j;
    j["kind"] = n.name();
    if (n.kind == NoiseHamiltonian::Kind::linear_momentum) {
        j["chi"] = {n.chi.x, n.chi.y, n.chi.z};
    } else {
        j["k"] = n.k;
    }
    return j;
}

json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json mat_to_json(const Mat3& m) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
    return rows;
}

GuardMode get_guard(const std::string& s) {
    if (s == "off") return GuardMode::off;
    if (s == "advise") return GuardMode::advise;
    if (s == "strict") return GuardMode::strict;
    bad("solver.guard must be one of off|advise|strict");
}

const char* guard_name(GuardMode g) {
    switch (g) {
        case GuardMode::off: return "off";
        case GuardMode::advise: return "advise";
        case GuardMode::strict: return "strict";
    }
    return "advise";
}

} // namespace

RunConfig RunConfig::from_toml(const std::string& text) {
    const json doc = toml::parse(text);
    RunConfig cfg;

    if (!doc.contains("model") || !doc["model"].is_object()) bad("missing [model] table");
    const json& model = doc["model"];
    if (!model.contains("kind") || !model["kind"].is_string()) bad("model.kind is required");
    const std::string kind = model["kind"].get<std::string>();
    if (kind == "rigid_body") {
        cfg.model = ModelKind::rigid_body;
    } else if (kind == "heavy_top") {
        cfg.model = ModelKind::heavy_top;
    } else {
        bad("model.kind must be rigid_body or heavy_top");
    }
    if (!model.contains("inertia")) bad("model.inertia is required");
    cfg.inertia = get_inertia(model["inertia"]);
    if (cfg.model == ModelKind::heavy_top) {
        if (!model.contains("mass")) bad("heavy_top needs model.mass");
        if (!model.contains("gravity")) bad("heavy_top needs model.gravity");
        if (!model.contains("lever")) bad("heavy_top needs model.lever");
        cfg.mass = get_number(model["mass"], "model.mass");
        cfg.gravity = get_number(model["gravity"], "model.gravity");
        cfg.lever = get_vec3(model["lever"], "model.lever");
    }

    if (doc.contains("noise")) {
        if (!doc["noise"].is_array()) bad("[[noise]] must be an array of tables");
        for (const auto& n : doc["noise"]) cfg.noise.push_back(get_noise(n));
    }

    if (!doc.contains("initial") || !doc["initial"].is_object()) bad("missing [initial] table");
    const json& initial = doc["initial"];
    if (!initial.contains("mu")) bad("initial.mu is required");
    cfg.mu0 = get_vec3(initial["mu"], "initial.mu");
    if (initial.contains("alpha0")) cfg.alpha0 = get_vec3(initial["alpha0"], "initial.alpha0");
    if (initial.contains("rotation") && initial.contains("rotation_euler")) {
        bad("give initial.rotation or initial.rotation_euler, not both");
    }
    try {
        if (initial.contains("rotation")) {
            const json& rj = initial["rotation"];
            if (!rj.is_array() || rj.size() != 3) bad("initial.rotation must be a 3x3 matrix");
            Mat3 m;
            for (int r = 0; r < 3; ++r) {
                const Vec3 row = get_vec3(rj[r], "initial.rotation row");
                m(r, 0) = row.x;
                m(r, 1) = row.y;
                m(r, 2) = row.z;
            }
            cfg.rotation0 = Rotation(m);
        } else if (initial.contains("rotation_euler")) {
            const Vec3 e = get_vec3(initial["rotation_euler"], "initial.rotation_euler");
            // Forward ZXZ composition; validity is independent of gimbal issues.
            const double cf = std::cos(e.x), sf = std::sin(e.x);
            const double ct = std::cos(e.y), st = std::sin(e.y);
            const double cp = std::cos(e.z), sp = std::sin(e.z);
            Mat3 m;
            m.a = {cf * cp - ct * sf * sp, -cf * sp - ct * sf * cp, st * sf,
                   sf * cp + ct * cf * sp, -sf * sp + ct * cf * cp, -st * cf,
                   st * sp,                st * cp,                 ct};
            cfg.rotation0 = Rotation(m);
        }
    } catch (const DomainError& e) {
        bad(std::string("initial rotation is not a valid rotation matrix: ") + e.what());
    }

    if (!doc.contains("run") || !doc["run"].is_object()) bad("missing [run] table");
    const json& run = doc["run"];
    if (!run.contains("dt") || !run.contains("t_final")) bad("[run] needs dt and t_final");
    cfg.dt = get_number(run["dt"], "run.dt");
    cfg.t_final = get_number(run["t_final"], "run.t_final");
    if (run.contains("seed")) {
        if (!run["seed"].is_number_integer() && !run["seed"].is_number_unsigned()) {
            bad("run.seed must be an integer");
        }
        const long long s = run["seed"].get<long long>();
        if (s < 0) bad("run.seed must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
    }

    if (doc.contains("solver")) {
        const json& solver = doc["solver"];
        if (solver.contains("tol")) cfg.tol = get_number(solver["tol"], "solver.tol");
        if (solver.contains("max_iter")) cfg.max_iter = solver["max_iter"].get<int>();
        if (solver.contains("guard")) {
            if (!solver["guard"].is_string()) bad("solver.guard must be a string");
            cfg.guard = get_guard(solver["guard"].get<std::string>());
        }
    }

    if (doc.contains("output")) {
        const json& out = doc["output"];
        if (out.contains("directory")) cfg.output.directory = out["directory"].get<std::string>();
        if (out.contains("trajectory")) cfg.output.trajectory = out["trajectory"].get<std::string>();
        if (out.contains("summary")) cfg.output.summary = out["summary"].get<std::string>();
        if (out.contains("stride")) cfg.output.stride = out["stride"].get<std::int64_t>();
        if (out.contains("diagnostics")) {
            for (const auto& d : out["diagnostics"]) {
                cfg.output.diagnostics.push_back(d.get<std::string>());
            }
        }
    }

    if (doc.contains("ensemble")) {
        EnsembleOptions e;
        const json& ens = doc["ensemble"];
        if (!ens.contains("size")) bad("[ensemble] needs size");
        e.size = ens["size"].get<int>();
        if (ens.contains("snapshot_times")) {
            for (const auto& t : ens["snapshot_times"]) e.snapshot_times.push_back(t.get<double>());
        }
        cfg.ensemble = e;
    }

    if (doc.contains("convergence")) {
        ConvergenceOptions c;
        const json& conv = doc["convergence"];
        if (!conv.contains("dt_fine") || !conv.contains("factors") || !conv.contains("samples")) {
            bad("[convergence] needs dt_fine, factors, samples");
        }
        c.dt_fine = get_number(conv["dt_fine"], "convergence.dt_fine");
        for (const auto& f : conv["factors"]) c.factors.push_back(f.get<std::int64_t>());
        c.samples = conv["samples"].get<int>();
        c.horizon = conv.contains("horizon") ? get_number(conv["horizon"], "convergence.horizon")
                                             : cfg.t_final;
        cfg.convergence = c;
    }

    if (doc.contains("check")) {
        const json& chk = doc["check"];
        auto opt = [&](const char* name, double& slot) {
            if (chk.contains(name)) slot = get_number(chk[name], std::string("check.") + name);
        };
        opt("orbit_radius", cfg.check.orbit_radius);
        opt("energy_rigid", cfg.check.energy_rigid);
        opt("spatial_momentum", cfg.check.spatial_momentum);
        opt("p_phi", cfg.check.p_phi);
        opt("p_psi", cfg.check.p_psi);
        opt("p_psi_stochastic", cfg.check.p_psi_stochastic);
        opt("gamma_norm_sq", cfg.check.gamma_norm_sq);
        opt("pi_dot_gamma", cfg.check.pi_dot_gamma);
        opt("energy_heavy_top", cfg.check.energy_heavy_top);
    }

    // Semantic validation.
    if (!(cfg.dt > 0.0)) bad("run.dt must be positive");
    if (!(cfg.t_final >= cfg.dt)) bad("run.t_final must be at least one step");
    if (!(cfg.tol > 0.0)) bad("solver.tol must be positive");
    if (cfg.max_iter < 1) bad("solver.max_iter must be at least 1");
    if (cfg.output.stride < 1) bad("output.stride must be at least 1");
    if (cfg.model == ModelKind::rigid_body) {
        for (const auto& n : cfg.noise) {
            if (n.needs_gamma()) {
                bad("noise '" + n.name() + "' depends on Gamma and requires model.kind = heavy_top");
            }
        }
    }
    if (cfg.ensemble && cfg.ensemble->size < 1) bad("ensemble.size must be at least 1");
    if (cfg.convergence) {
        if (!(cfg.convergence->dt_fine > 0.0)) bad("convergence.dt_fine must be positive");
        if (cfg.convergence->samples < 1) bad("convergence.samples must be at least 1");
        if (cfg.convergence->factors.empty()) bad("convergence.factors must be non-empty");
    }
    // Exercise the model constructors so malformed parameters fail here, not mid-run.
    try {
        if (cfg.model == ModelKind::rigid_body) {
            (void)cfg.rigid_body();
        } else {
            (void)cfg.heavy_top();
        }
    } catch (const DomainError& e) {
        bad(e.what());
    }

    // Canonical form: defaults materialized, key order normalized.
    json canon;
    canon["model"]["kind"] = kind;
    canon["model"]["inertia"] = mat_to_json(cfg.inertia);
    if (cfg.model == ModelKind::heavy_top) {
        canon["model"]["mass"] = cfg.mass;
        canon["model"]["gravity"] = cfg.gravity;
        canon["model"]["lever"] = vec_to_json(cfg.lever);
    }
    canon["initial"]["mu"] = vec_to_json(cfg.mu0);
    canon["initial"]["alpha0"] = vec_to_json(cfg.alpha0);
    if (cfg.rotation0) canon["initial"]["rotation"] = mat_to_json(cfg.rotation0->matrix());
    if (!cfg.noise.empty()) {
        canon["noise"] = json::array();
        for (const auto& n : cfg.noise) canon["noise"].push_back(noise_to_json(n));
    }
    canon["run"]["dt"] = cfg.dt;
    canon["run"]["t_final"] = cfg.t_final;
    canon["run"]["seed"] = cfg.seed;
    canon["solver"]["tol"] = cfg.tol;
    canon["solver"]["max_iter"] = cfg.max_iter;
    canon["solver"]["guard"] = guard_name(cfg.guard);
    canon["output"]["directory"] = cfg.output.directory;
    canon["output"]["trajectory"] = cfg.output.trajectory;
    canon["output"]["summary"] = cfg.output.summary;
    canon["output"]["stride"] = cfg.output.stride;
    if (!cfg.output.diagnostics.empty()) canon["output"]["diagnostics"] = cfg.output.diagnostics;
    if (cfg.ensemble) {
        canon["ensemble"]["size"] = cfg.ensemble->size;
        if (!cfg.ensemble->snapshot_times.empty()) {
            canon["ensemble"]["snapshot_times"] = cfg.ensemble->snapshot_times;
        }
    }
    if (cfg.convergence) {
        canon["convergence"]["dt_fine"] = cfg.convergence->dt_fine;
        canon["convergence"]["factors"] = cfg.convergence->factors;
        canon["convergence"]["samples"] = cfg.convergence->samples;
        canon["convergence"]["horizon"] = cfg.convergence->horizon;
    }
    cfg.canonical = std::move(canon);
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_toml(buf.str());
}

std::string RunConfig::to_toml() const { return toml::serialize(canonical); }

std::string RunConfig::hash() const {
    const std::string text = canonical.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::int64_t RunConfig::steps() const {
    return static_cast<std::int64_t>(std::llround(t_final / dt));
}

RigidBody RunConfig::rigid_body() const { return RigidBody(inertia); }

HeavyTop RunConfig::heavy_top() const { return HeavyTop(inertia, mass, gravity, lever, alpha0); }

Rotation RunConfig::initial_rotation() const {
    return rotation0 ? *rotation0 : Rotation::identity();
}

Vec3 RunConfig::initial_gamma() const {
    return initial_rotation().matrix().transposed() * alpha0;
}

StepControls RunConfig::controls() const {
    StepControls c;
    c.tol = tol;
    c.max_iter = max_iter;
    c.guard = guard;
    return c;
}

} // namespace lmp
