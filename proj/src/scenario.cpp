#include "qlimit/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "qlimit/errors.hpp"
#include "qlimit/limit_theory.hpp"
#include "qlimit/svg.hpp"

namespace qlimit {

using nlohmann::json;

namespace {

const std::map<std::string, ScenarioKind, std::less<>> kKinds = {
    {"kerr", ScenarioKind::Kerr},
    {"chi2", ScenarioKind::Chi2},
    {"chi2-dispersive", ScenarioKind::Chi2Dispersive},
    {"tpa", ScenarioKind::Tpa},
    {"qubit-limit", ScenarioKind::QubitLimit},
    {"compare", ScenarioKind::Compare},
    {"sweep", ScenarioKind::Sweep},
    {"wigner", ScenarioKind::Wigner},
    {"nongauss", ScenarioKind::NonGauss},
};

const std::map<std::string, Family, std::less<>> kFamilies = {
    {"kerr", Family::Kerr},
    {"chi2", Family::Chi2},
    {"chi2-dispersive", Family::Chi2Dispersive},
    {"tpa", Family::Tpa},
    {"qubit-limit", Family::QubitLimit},
};

// Required and defaulted parameters per family. delta and kappa_a2 default to 0.
struct FamilyParams {
    std::vector<std::string> required;
    std::vector<std::string> defaulted;
};

FamilyParams family_params(Family f)
{
    switch (f) {
    case Family::Kerr:
        return {{"chi", "kappa_a1", "alpha"}, {"delta", "kappa_a2"}};
    case Family::Chi2:
        return {{"g", "kappa_a1", "kappa_b", "alpha"}, {"delta", "kappa_a2"}};
    case Family::Chi2Dispersive:
        return {{"g", "kappa_a1", "kappa_b", "delta_b", "alpha"}, {"delta", "kappa_a2"}};
    case Family::Tpa:
        return {{"gamma", "kappa_a1", "alpha"}, {"delta", "kappa_a2"}};
    case Family::QubitLimit:
        return {{"kappa_a1", "alpha"}, {"delta", "kappa_a2"}};
    }
    return {};
}

const std::set<std::string, std::less<>> kRates = {"kappa_a1", "kappa_a2", "kappa_b", "gamma"};
const std::set<std::string, std::less<>> kSweepable = {"chi", "g", "gamma", "kappa_b", "delta_b"};

[[noreturn]] void fail(const std::string& path, const std::string& msg)
{
    throw ConfigError(path + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed)
{
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) {
            fail(path + "." + key, "unknown key");
        }
    }
}

double get_number(const json& v, const std::string& path)
{
    if (!v.is_number()) {
        fail(path, "expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        fail(path, "must be finite");
    }
    return d;
}

double get_positive(const json& v, const std::string& path)
{
    const double d = get_number(v, path);
    if (!(d > 0.0)) {
        fail(path, "must be positive");
    }
    return d;
}

complex get_complex(const json& v, const std::string& path)
{
    if (v.is_number()) {
        return {get_number(v, path), 0.0};
    }
    if (v.is_array() && v.size() == 2) {
        return {get_number(v[0], path + "[0]"), get_number(v[1], path + "[1]")};
    }
    fail(path, "expected a number or [re, im]");
}

std::string get_string(const json& v, const std::string& path)
{
    if (!v.is_string()) {
        fail(path, "expected a string");
    }
    return v.get<std::string>();
}

const json& require_object(const json& v, const std::string& path)
{
    if (!v.is_object()) {
        fail(path, "expected an object");
    }
    return v;
}

json complex_to_json(complex z)
{
    if (z.imag() == 0.0) {
        return z.real();
    }
    return json::array({z.real(), z.imag()});
}

bool is_model_kind(ScenarioKind k)
{
    return k == ScenarioKind::Kerr || k == ScenarioKind::Chi2 || k == ScenarioKind::Chi2Dispersive ||
           k == ScenarioKind::Tpa || k == ScenarioKind::QubitLimit;
}

} // namespace

std::string_view to_string(ScenarioKind kind)
{
    for (const auto& [name, k] : kKinds) {
        if (k == kind) {
            return name;
        }
    }
    return "unknown";
}

std::string_view to_string(Family family)
{
    for (const auto& [name, f] : kFamilies) {
        if (f == family) {
            return name;
        }
    }
    return "unknown";
}

std::string_view to_string(Action action)
{
    switch (action) {
    case Action::Simulate: return "simulate";
    case Action::Compare: return "compare";
    case Action::Sweep: return "sweep";
    case Action::Steady: return "steady";
    case Action::Wigner: return "wigner";
    case Action::NonGauss: return "nongauss";
    }
    return "unknown";
}

Action parse_action(std::string_view name)
{
    for (const Action a : {Action::Simulate, Action::Compare, Action::Sweep, Action::Steady,
                           Action::Wigner, Action::NonGauss}) {
        if (to_string(a) == name) {
            return a;
        }
    }
    throw ConfigError("unknown subcommand '" + std::string(name) + "'");
}

std::optional<double>* ModelParams::find(std::string_view name)
{
    if (name == "delta") return &delta;
    if (name == "chi") return &chi;
    if (name == "g") return &g;
    if (name == "kappa_a1") return &kappa_a1;
    if (name == "kappa_a2") return &kappa_a2;
    if (name == "kappa_b") return &kappa_b;
    if (name == "gamma") return &gamma;
    if (name == "delta_b") return &delta_b;
    return nullptr;
}

Action default_action(ScenarioKind kind)
{
    switch (kind) {
    case ScenarioKind::Compare: return Action::Compare;
    case ScenarioKind::Sweep: return Action::Sweep;
    case ScenarioKind::Wigner: return Action::Wigner;
    case ScenarioKind::NonGauss: return Action::NonGauss;
    default: return Action::Simulate;
    }
}

ScenarioConfig parse_config(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("$: malformed JSON: ") + e.what());
    }
    require_object(doc, "$");
    reject_unknown(doc, "$",
                   {"name", "kind", "model", "params", "dims", "integrator", "observable", "sweep",
                    "wigner", "bounds", "plot"});
    std::vector<std::string> missing;
    for (const char* key : {"kind", "params"}) {
        if (!doc.contains(key)) {
            missing.emplace_back(key);
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) {
            list += (list.empty() ? "" : ", ") + m;
        }
        fail("$", "missing required keys: " + list);
    }

    ScenarioConfig cfg;
    json echo = json::object();
    if (doc.contains("name")) {
        cfg.name = get_string(doc["name"], "$.name");
    }
    echo["name"] = cfg.name;

    const std::string kind = get_string(doc["kind"], "$.kind");
    const auto kit = kKinds.find(kind);
    if (kit == kKinds.end()) {
        fail("$.kind", "unknown kind '" + kind + "'");
    }
    cfg.kind = kit->second;
    echo["kind"] = kind;

    std::string family_name;
    if (is_model_kind(cfg.kind)) {
        family_name = kind;
        if (doc.contains("model") && get_string(doc["model"], "$.model") != kind) {
            fail("$.model", "must match kind '" + kind + "' when given");
        }
    } else {
        if (!doc.contains("model")) {
            fail("$.model", "required for kind '" + kind + "'");
        }
        family_name = get_string(doc["model"], "$.model");
    }
    const auto fit = kFamilies.find(family_name);
    if (fit == kFamilies.end()) {
        fail("$.model", "unknown model family '" + family_name + "'");
    }
    cfg.family = fit->second;
    echo["model"] = family_name;

    // Sweep first: the swept parameter may be omitted from params.
    if (cfg.kind == ScenarioKind::Sweep) {
        if (!doc.contains("sweep")) {
            fail("$.sweep", "required for kind 'sweep'");
        }
        const json& s = require_object(doc["sweep"], "$.sweep");
        reject_unknown(s, "$.sweep", {"parameter", "values", "steady"});
        if (!s.contains("parameter") || !s.contains("values")) {
            fail("$.sweep", "missing required keys: parameter, values");
        }
        SweepSpec spec;
        spec.parameter = get_string(s["parameter"], "$.sweep.parameter");
        if (!kSweepable.contains(spec.parameter)) {
            fail("$.sweep.parameter", "cannot sweep '" + spec.parameter + "'");
        }
        const auto fp = family_params(cfg.family);
        if (std::find(fp.required.begin(), fp.required.end(), spec.parameter) == fp.required.end()) {
            fail("$.sweep.parameter", "'" + spec.parameter + "' is not a parameter of " + family_name);
        }
        if (!s["values"].is_array() || s["values"].empty()) {
            fail("$.sweep.values", "expected a non-empty array");
        }
        for (std::size_t k = 0; k < s["values"].size(); ++k) {
            spec.values.push_back(
                get_number(s["values"][k], "$.sweep.values[" + std::to_string(k) + "]"));
            if (kRates.contains(spec.parameter) && spec.values.back() < 0.0) {
                fail("$.sweep.values[" + std::to_string(k) + "]", "must be a non-negative rate");
            }
        }
        if (s.contains("steady")) {
            if (!s["steady"].is_boolean()) {
                fail("$.sweep.steady", "expected a boolean");
            }
            spec.steady = s["steady"].get<bool>();
        }
        echo["sweep"] = {{"parameter", spec.parameter}, {"values", spec.values}, {"steady", spec.steady}};
        cfg.sweep = std::move(spec);
    } else if (doc.contains("sweep")) {
        fail("$.sweep", "only valid for kind 'sweep'");
    }

    const json& params = require_object(doc["params"], "$.params");
    const FamilyParams fp = family_params(cfg.family);
    std::set<std::string> allowed(fp.required.begin(), fp.required.end());
    allowed.insert(fp.defaulted.begin(), fp.defaulted.end());
    for (const auto& [key, value] : params.items()) {
        if (!allowed.contains(key)) {
            ModelParams probe;
            if (probe.find(key) != nullptr || key == "alpha") {
                fail("$.params." + key, "not a parameter of model '" + family_name + "'");
            }
            fail("$.params." + key, "unknown key");
        }
    }
    std::vector<std::string> missing_params;
    for (const auto& key : fp.required) {
        const bool swept = cfg.sweep && cfg.sweep->parameter == key;
        if (!params.contains(key) && !swept) {
            missing_params.push_back(key);
        }
    }
    if (!missing_params.empty()) {
        std::string list;
        for (const auto& m : missing_params) {
            list += (list.empty() ? "" : ", ") + m;
        }
        fail("$.params", "missing required parameters: " + list);
    }
    json echo_params = json::object();
    for (const auto& key : allowed) {
        const std::string path = "$.params." + key;
        if (key == "alpha") {
            if (params.contains(key)) {
                cfg.params.alpha = get_complex(params[key], path);
                echo_params[key] = complex_to_json(*cfg.params.alpha);
            }
            continue;
        }
        std::optional<double>* slot = cfg.params.find(key);
        if (params.contains(key)) {
            *slot = get_number(params[key], path);
            if (kRates.contains(key) && **slot < 0.0) {
                fail(path, "must be a non-negative rate");
            }
        } else if (std::find(fp.defaulted.begin(), fp.defaulted.end(), key) != fp.defaulted.end()) {
            *slot = 0.0;
        }
        if (slot->has_value()) {
            echo_params[key] = **slot;
        }
    }
    echo["params"] = echo_params;

    if (doc.contains("dims")) {
        const json& d = doc["dims"];
        const std::size_t modes =
            (cfg.family == Family::Chi2 || cfg.family == Family::Chi2Dispersive) ? 2 : 1;
        if (!d.is_array() || d.size() != modes) {
            fail("$.dims", "expected an array of " + std::to_string(modes) + " integers");
        }
        for (std::size_t k = 0; k < d.size(); ++k) {
            const std::string path = "$.dims[" + std::to_string(k) + "]";
            if (!d[k].is_number_integer() || d[k].get<long long>() < 2) {
                fail(path, "expected an integer >= 2");
            }
            cfg.dims.push_back(static_cast<Index>(d[k].get<long long>()));
        }
        if (cfg.family == Family::QubitLimit && cfg.dims[0] != 2) {
            fail("$.dims[0]", "qubit-limit model is two-dimensional");
        }
        if (cfg.family == Family::Tpa && cfg.dims[0] < 3) {
            fail("$.dims[0]", "TPA model needs dim >= 3");
        }
        echo["dims"] = cfg.dims;
    } else {
        echo["dims"] = "auto";
    }

    IntegratorConfig& ic = cfg.integrator;
    if (doc.contains("integrator")) {
        const json& it = require_object(doc["integrator"], "$.integrator");
        reject_unknown(it, "$.integrator",
                       {"method", "dt", "rtol", "atol", "t_end", "output_dt", "checkpoint_stride"});
        if (it.contains("method")) {
            const std::string m = get_string(it["method"], "$.integrator.method");
            if (m == "rk4") {
                ic.method = Method::RK4;
            } else if (m == "rk45") {
                ic.method = Method::RK45;
            } else {
                fail("$.integrator.method", "expected 'rk4' or 'rk45'");
            }
        }
        if (it.contains("dt")) ic.dt = get_positive(it["dt"], "$.integrator.dt");
        if (it.contains("rtol")) ic.rtol = get_positive(it["rtol"], "$.integrator.rtol");
        if (it.contains("atol")) ic.atol = get_positive(it["atol"], "$.integrator.atol");
        if (it.contains("t_end")) ic.t_end = get_positive(it["t_end"], "$.integrator.t_end");
        if (it.contains("output_dt")) {
            ic.output_dt = get_positive(it["output_dt"], "$.integrator.output_dt");
        }
        if (it.contains("checkpoint_stride")) {
            if (!it["checkpoint_stride"].is_number_unsigned()) {
                fail("$.integrator.checkpoint_stride", "expected a non-negative integer");
            }
            ic.checkpoint_stride = it["checkpoint_stride"].get<std::size_t>();
        }
    }
    if (ic.output_dt > ic.t_end) {
        fail("$.integrator.output_dt", "must not exceed t_end");
    }
    echo["integrator"] = {{"method", ic.method == Method::RK4 ? "rk4" : "rk45"},
                          {"dt", ic.dt},
                          {"rtol", ic.rtol},
                          {"atol", ic.atol},
                          {"t_end", ic.t_end},
                          {"output_dt", ic.output_dt},
                          {"checkpoint_stride", ic.checkpoint_stride}};

    if (doc.contains("observable")) {
        cfg.observable = get_string(doc["observable"], "$.observable");
        try {
            (void)parse_observable(cfg.observable);
        } catch (const InvalidArgument& e) {
            fail("$.observable", e.what());
        }
    }
    echo["observable"] = cfg.observable;

    if (doc.contains("wigner")) {
        const json& w = require_object(doc["wigner"], "$.wigner");
        reject_unknown(w, "$.wigner", {"time", "x_min", "x_max", "p_min", "p_max", "nx", "np"});
        WignerGridSpec& g = cfg.wigner.grid;
        if (w.contains("time")) cfg.wigner.time = get_positive(w["time"], "$.wigner.time");
        if (w.contains("x_min")) g.x_min = get_number(w["x_min"], "$.wigner.x_min");
        if (w.contains("x_max")) g.x_max = get_number(w["x_max"], "$.wigner.x_max");
        if (w.contains("p_min")) g.p_min = get_number(w["p_min"], "$.wigner.p_min");
        if (w.contains("p_max")) g.p_max = get_number(w["p_max"], "$.wigner.p_max");
        for (const char* key : {"nx", "np"}) {
            if (w.contains(key)) {
                if (!w[key].is_number_integer() || w[key].get<long long>() < 2) {
                    fail(std::string("$.wigner.") + key, "expected an integer >= 2");
                }
                (std::string(key) == "nx" ? g.nx : g.np) = static_cast<Index>(w[key].get<long long>());
            }
        }
        try {
            g.validate();
        } catch (const InvalidArgument& e) {
            fail("$.wigner", e.what());
        }
    }
    if (cfg.wigner.time && *cfg.wigner.time > ic.t_end) {
        fail("$.wigner.time", "must not exceed integrator.t_end");
    }
    {
        const WignerGridSpec& g = cfg.wigner.grid;
        json w = {{"x_min", g.x_min}, {"x_max", g.x_max}, {"p_min", g.p_min},
                  {"p_max", g.p_max}, {"nx", g.nx},       {"np", g.np}};
        w["time"] = cfg.wigner.time ? json(*cfg.wigner.time) : json("peak");
        echo["wigner"] = w;
    }

    if (doc.contains("bounds")) {
        const json& b = require_object(doc["bounds"], "$.bounds");
        reject_unknown(b, "$.bounds", {"trace_drift_per_time", "truncation", "min_eigenvalue",
                                       "truncation_top_k"});
        if (b.contains("trace_drift_per_time")) {
            cfg.bounds.trace_drift_per_time =
                get_positive(b["trace_drift_per_time"], "$.bounds.trace_drift_per_time");
        }
        if (b.contains("truncation")) {
            cfg.bounds.truncation = get_positive(b["truncation"], "$.bounds.truncation");
        }
        if (b.contains("min_eigenvalue")) {
            cfg.bounds.min_eigenvalue = get_number(b["min_eigenvalue"], "$.bounds.min_eigenvalue");
        }
        if (b.contains("truncation_top_k")) {
            if (!b["truncation_top_k"].is_number_unsigned() || b["truncation_top_k"] == 0) {
                fail("$.bounds.truncation_top_k", "expected a positive integer");
            }
            cfg.bounds.truncation_top_k = b["truncation_top_k"].get<std::size_t>();
        }
    }
    ic.trace_drift_per_time = cfg.bounds.trace_drift_per_time;
    echo["bounds"] = {{"trace_drift_per_time", cfg.bounds.trace_drift_per_time},
                      {"truncation", cfg.bounds.truncation},
                      {"min_eigenvalue", cfg.bounds.min_eigenvalue},
                      {"truncation_top_k", cfg.bounds.truncation_top_k}};

    if (doc.contains("plot")) {
        const json& p = doc["plot"];
        if (!p.is_array()) {
            fail("$.plot", "expected an array of column names");
        }
        for (std::size_t k = 0; k < p.size(); ++k) {
            cfg.plot.push_back(get_string(p[k], "$.plot[" + std::to_string(k) + "]"));
        }
    }
    echo["plot"] = cfg.plot;
    cfg.echo = std::move(echo);
    return cfg;
}

ScenarioConfig parse_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(path.string() + ": cannot open config file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::vector<Index> default_dims(Family family, const ModelParams& params)
{
    switch (family) {
    case Family::Kerr:
        return {15};
    case Family::Chi2:
    case Family::Chi2Dispersive:
        return {10, 5};
    case Family::Tpa: {
        const double gamma = params.gamma.value_or(0.0);
        if (gamma >= 1000.0) {
            return {12};
        }
        return {gamma >= 8.0 ? Index{30} : Index{60}};
    }
    case Family::QubitLimit:
        return {2};
    }
    return {};
}

namespace {

double need(const std::optional<double>& v, const char* name)
{
    if (!v) {
        throw ConfigError(std::string("$.params.") + name + ": missing");
    }
    return *v;
}

} // namespace

SLHModel build_model(Family family, const ModelParams& p, const std::vector<Index>& dims_in)
{
    const std::vector<Index> dims = dims_in.empty() ? default_dims(family, p) : dims_in;
    const complex alpha = p.alpha.value_or(complex(0.0, 0.0));
    switch (family) {
    case Family::Kerr:
        return build_kerr({need(p.delta, "delta"), need(p.chi, "chi"), need(p.kappa_a1, "kappa_a1"),
                           need(p.kappa_a2, "kappa_a2"), alpha, dims.at(0)});
    case Family::Chi2:
    case Family::Chi2Dispersive: {
        const Chi2Params c{need(p.delta, "delta"), need(p.g, "g"),
                           need(p.kappa_a1, "kappa_a1"), need(p.kappa_a2, "kappa_a2"),
                           need(p.kappa_b, "kappa_b"), alpha, dims.at(0), dims.at(1)};
        return family == Family::Chi2 ? build_chi2(c)
                                      : build_chi2_dispersive(c, need(p.delta_b, "delta_b"));
    }
    case Family::Tpa:
        return build_tpa({need(p.delta, "delta"), need(p.kappa_a1, "kappa_a1"),
                          need(p.kappa_a2, "kappa_a2"), need(p.gamma, "gamma"), alpha, dims.at(0)});
    case Family::QubitLimit:
        return build_qubit_limit(
            {need(p.delta, "delta"), need(p.kappa_a1, "kappa_a1"), need(p.kappa_a2, "kappa_a2"), alpha});
    }
    throw ConfigError("unknown model family");
}

SLHModel build_limit_model(const ModelParams& p)
{
    return build_qubit_limit({p.delta.value_or(0.0), need(p.kappa_a1, "kappa_a1"),
                              p.kappa_a2.value_or(0.0), p.alpha.value_or(complex(0.0, 0.0))});
}

void InvariantSummary::absorb(const Trajectory& traj, std::size_t top_k)
{
    max_trace_error = std::max(max_trace_error, traj.max_trace_error);
    const double span = traj.times.empty() ? 1.0 : std::max(1.0, traj.times.back());
    trace_drift_per_time = std::max(trace_drift_per_time, traj.max_trace_error / span);
    min_eigenvalue = std::min(min_eigenvalue, traj.min_eigenvalue);
    truncation = std::max(truncation, truncation_check(traj, top_k));
}

bool InvariantSummary::within(const Bounds& b) const
{
    return trace_drift_per_time <= b.trace_drift_per_time && min_eigenvalue >= b.min_eigenvalue &&
           truncation <= b.truncation;
}

json RunManifest::to_json() const
{
    json j;
    j["tool"] = "qlimit";
    j["tool_version"] = tool_version;
    j["action"] = action;
    j["config"] = config;
    j["wall_time_s"] = wall_time_s;
    j["invariants"] = {{"max_trace_error", invariants.max_trace_error},
                       {"trace_drift_per_time", invariants.trace_drift_per_time},
                       {"min_eigenvalue", invariants.min_eigenvalue},
                       {"truncation_check", invariants.truncation},
                       {"within_bounds", within_bounds}};
    j["results"] = results;
    json outs = json::array();
    for (const auto& o : outputs) {
        outs.push_back({{"file", o.file}, {"sha256", o.sha256}});
    }
    j["outputs"] = outs;
    return j;
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sha256_hex(std::string_view bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[digest[k] >> 4];
        out += hex[digest[k] & 0xf];
    }
    return out;
}

namespace {

class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir, RunManifest& manifest)
        : dir_(std::move(dir)), manifest_(manifest)
    {
        std::filesystem::create_directories(dir_);
    }

    void write(const std::string& file, const std::string& content)
    {
        std::ofstream out(dir_ / file, std::ios::binary);
        if (!out) {
            throw Error("cannot write " + (dir_ / file).string());
        }
        out << content;
        manifest_.outputs.push_back({file, sha256_hex(content)});
    }

    void write_manifest()
    {
        std::ofstream out(dir_ / "manifest.json", std::ios::binary);
        if (!out) {
            throw Error("cannot write manifest");
        }
        out << manifest_.to_json().dump(2) << '\n';
    }

private:
    std::filesystem::path dir_;
    RunManifest& manifest_;
};

std::string csv(const std::vector<std::string>& header, const std::vector<const std::vector<double>*>& cols)
{
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c) {
        out += (c ? "," : "") + header[c];
    }
    out += '\n';
    const std::size_t rows = cols.empty() ? 0 : cols.front()->size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) {
                out += ',';
            }
            out += format_double((*cols[c])[r]);
        }
        out += '\n';
    }
    return out;
}

std::string trajectory_csv(const Trajectory& traj)
{
    std::vector<std::string> header{"t"};
    std::vector<const std::vector<double>*> cols{&traj.times};
    for (std::size_t k = 0; k < traj.columns.size(); ++k) {
        header.push_back(traj.columns[k]);
        cols.push_back(&traj.values[k]);
    }
    return csv(header, cols);
}

std::vector<std::string> plot_columns(const ScenarioConfig& cfg, const Trajectory& traj)
{
    if (!cfg.plot.empty()) {
        for (const auto& c : cfg.plot) {
            if (!traj.has_column(c)) {
                throw ConfigError("$.plot: trajectory has no column '" + c + "'");
            }
        }
        return cfg.plot;
    }
    return {traj.columns[0], traj.columns[1], "leakage"};
}

std::string trajectory_svg(const ScenarioConfig& cfg, const Trajectory& traj, const std::string& title)
{
    PlotSpec spec;
    spec.title = title;
    spec.y_label = "population";
    for (const auto& c : plot_columns(cfg, traj)) {
        spec.series.push_back({c, traj.times, traj.column(c)});
    }
    return render_svg(spec);
}

std::vector<Index> resolved_dims(const ScenarioConfig& cfg, const ModelParams& p)
{
    return cfg.dims.empty() ? default_dims(cfg.family, p) : cfg.dims;
}

std::string wigner_csv(const WignerGrid& w)
{
    std::string out = "x,p,W\n";
    for (std::size_t ix = 0; ix < w.xs.size(); ++ix) {
        for (std::size_t ip = 0; ip < w.ps.size(); ++ip) {
            out += format_double(w.xs[ix]) + ',' + format_double(w.ps[ip]) + ',' +
                   format_double(w.values(static_cast<Index>(ip), static_cast<Index>(ix))) + '\n';
        }
    }
    return out;
}

} // namespace

RunManifest run(const ScenarioConfig& cfg, Action action, const RunOptions& options)
{
    const auto start = std::chrono::steady_clock::now();
    RunManifest manifest;
    manifest.tool_version = QLIMIT_VERSION;
    manifest.action = std::string(to_string(action));
    manifest.config = cfg.echo;
    ArtifactWriter out(options.out_dir, manifest);
    InvariantSummary& inv = manifest.invariants;
    json& res = manifest.results;
    const std::size_t top_k = cfg.bounds.truncation_top_k;

    if (cfg.sweep && action != Action::Sweep) {
        throw ConfigError("$.kind: sweep configs only support the 'sweep' subcommand");
    }

    switch (action) {
    case Action::Simulate: {
        const auto dims = resolved_dims(cfg, cfg.params);
        const SLHModel model = build_model(cfg.family, cfg.params, dims);
        const Trajectory traj = integrate(model, vacuum(model.sig), cfg.integrator);
        inv.absorb(traj, top_k);
        res["dims"] = dims;
        res["steps"] = traj.accepted_steps;
        out.write("trajectory.csv", trajectory_csv(traj));
        if (options.svg) {
            out.write("trajectory.svg", trajectory_svg(cfg, traj, cfg.name));
        }
        break;
    }
    case Action::Compare: {
        if (cfg.family == Family::QubitLimit) {
            throw ConfigError("$.model: compare needs a pre-limit model");
        }
        const auto dims = resolved_dims(cfg, cfg.params);
        const SLHModel pre = build_model(cfg.family, cfg.params, dims);
        const SLHModel lim = build_limit_model(cfg.params);
        const Observable obs = parse_observable(cfg.observable);
        const Comparison c = compare_prelimit_limit(pre, lim, obs, cfg.integrator);
        inv.absorb(c.pre_trajectory, top_k);
        inv.absorb(c.limit_trajectory, top_k);
        std::vector<double> diff(c.pre.size());
        for (std::size_t k = 0; k < diff.size(); ++k) {
            diff[k] = std::abs(c.pre[k] - c.limit[k]);
        }
        const std::string name(observable_column(obs, SpaceSignature{2}));
        out.write("prelimit.csv", trajectory_csv(c.pre_trajectory));
        out.write("limit.csv", trajectory_csv(c.limit_trajectory));
        out.write("compare.csv", csv({"t", "pre_" + name, "limit_" + name, "abs_diff"},
                                     {&c.times, &c.pre, &c.limit, &diff}));
        if (options.svg) {
            PlotSpec spec;
            spec.title = cfg.name + ": pre-limit vs limit";
            spec.y_label = name;
            spec.series = {{"pre-limit " + name, c.times, c.pre},
                           {"limit " + name, c.times, c.limit},
                           {"pre-limit leakage", c.times, c.pre_trajectory.column("leakage")}};
            out.write("compare.svg", render_svg(spec));
        }
        res["dims"] = dims;
        res["observable"] = name;
        res["deviation"] = c.deviation;
        res["max_leakage"] = c.max_leakage_pre;
        std::cout << "deviation = " << format_double(c.deviation) << '\n';
        std::cout << "max_leakage = " << format_double(c.max_leakage_pre) << '\n';
        break;
    }
    case Action::Sweep: {
        if (!cfg.sweep) {
            throw ConfigError("$.sweep: sweep subcommand needs a sweep block");
        }
        const SweepSpec& sw = *cfg.sweep;
        const Observable obs = parse_observable(cfg.observable);
        std::vector<std::vector<Index>> dims_per;
        const ModelFactory factory = [&](double v) {
            ModelParams p = cfg.params;
            *p.find(sw.parameter) = v;
            dims_per.push_back(resolved_dims(cfg, p));
            return build_model(cfg.family, p, dims_per.back());
        };
        const ConvergenceReport rep =
            convergence_sweep(factory, sw.values, build_limit_model(cfg.params), obs, cfg.integrator);
        std::vector<double> idx;
        std::vector<double> osc;
        std::vector<double> steady_n;
        PlotSpec spec;
        spec.title = cfg.name + ": sweep over " + sw.parameter;
        spec.y_label = "n_expect";
        for (std::size_t k = 0; k < rep.parameters.size(); ++k) {
            const Comparison& c = rep.comparisons[k];
            inv.absorb(c.pre_trajectory, top_k);
            out.write("sweep_" + std::to_string(k) + ".csv", trajectory_csv(c.pre_trajectory));
            spec.series.push_back({sw.parameter + "=" + format_double(rep.parameters[k]), c.times,
                                   c.pre_trajectory.column("n_expect")});
            osc.push_back(static_cast<double>(rep.oscillations[k]));
            if (sw.steady) {
                ModelParams p = cfg.params;
                *p.find(sw.parameter) = rep.parameters[k];
                const SLHModel m = build_model(cfg.family, p, resolved_dims(cfg, p));
                const DensityMatrix ss = steady_state(m);
                steady_n.push_back(expectation(ss, number(m.sig, 0)).real());
            }
        }
        std::vector<std::string> header{sw.parameter, "deviation", "max_leakage", "oscillations"};
        std::vector<const std::vector<double>*> cols{&rep.parameters, &rep.deviations,
                                                     &rep.max_leakages, &osc};
        if (sw.steady) {
            header.emplace_back("steady_n");
            cols.push_back(&steady_n);
        }
        out.write("sweep_summary.csv", csv(header, cols));
        if (options.svg) {
            out.write("sweep.svg", render_svg(spec));
        }
        res["parameter"] = sw.parameter;
        res["values"] = rep.parameters;
        res["dims"] = dims_per;
        res["deviations"] = rep.deviations;
        res["max_leakages"] = rep.max_leakages;
        res["oscillations"] = rep.oscillations;
        res["deviations_nonincreasing"] = rep.deviations_nonincreasing();
        if (sw.steady) {
            res["steady_n"] = steady_n;
        }
        break;
    }
    case Action::Steady: {
        const auto dims = resolved_dims(cfg, cfg.params);
        const SLHModel model = build_model(cfg.family, cfg.params, dims);
        const DensityMatrix ss = steady_state(model);
        const SpaceSignature& sig = model.sig;
        std::vector<std::string> header{"index"};
        for (std::size_t m = 0; m < sig.mode_count(); ++m) {
            header.push_back("n" + std::to_string(m));
        }
        header.emplace_back("population");
        std::string body;
        for (std::size_t c = 0; c < header.size(); ++c) {
            body += (c ? "," : "") + header[c];
        }
        body += '\n';
        for (Index i = 0; i < sig.total(); ++i) {
            body += std::to_string(i);
            for (const Index n : sig.occupations(i)) {
                body += ',' + std::to_string(n);
            }
            body += ',' + format_double(ss.matrix()(i, i).real()) + '\n';
        }
        out.write("steady.csv", body);
        std::vector<Index> one(sig.mode_count(), 0);
        one[0] = 1;
        const double rho11 = ss.matrix()(sig.flat_index(one), sig.flat_index(one)).real();
        const double n = expectation(ss, number(sig, 0)).real();
        double top = 0.0;
        if (model.truncated_fock) {
            for (std::size_t m = 0; m < sig.mode_count(); ++m) {
                const auto pops = mode_population(ss.matrix(), sig, m);
                double acc = 0.0;
                for (std::size_t j = pops.size() - std::min(top_k, pops.size()); j < pops.size(); ++j) {
                    acc += pops[j];
                }
                top = std::max(top, acc);
            }
        }
        const auto diag = DensityMatrix::diagnose(ss.matrix());
        inv.max_trace_error = diag.trace_error;
        inv.trace_drift_per_time = diag.trace_error;
        inv.min_eigenvalue = diag.min_eigenvalue;
        inv.truncation = top;
        res["dims"] = dims;
        res["rho11"] = rho11;
        res["n_expect"] = n;
        std::cout << "rho11 = " << format_double(rho11) << '\n';
        std::cout << "n_expect = " << format_double(n) << '\n';
        break;
    }
    case Action::Wigner:
    case Action::NonGauss: {
        const auto dims = resolved_dims(cfg, cfg.params);
        const SLHModel model = build_model(cfg.family, cfg.params, dims);
        IntegratorConfig ic = cfg.integrator;
        const bool fixed_time = action == Action::Wigner && cfg.wigner.time.has_value();
        if (fixed_time) {
            ic.t_end = *cfg.wigner.time;
            ic.output_dt = std::min(ic.output_dt, ic.t_end);
        }
        const NonGaussTrace s = nongauss_trace(model, ic);
        inv.absorb(s.trajectory, top_k);
        res["dims"] = dims;
        std::size_t pick = s.times.size() - 1;
        if (!fixed_time) {
            const Peak pk = peak_find(s.times, s.delta_b);
            pick = pk.index;
            res["peak"] = {{"t", pk.t}, {"delta_b", pk.value}, {"at_endpoint", pk.at_endpoint},
                           {"pop2", s.pop2[pk.index]}};
        }
        if (action == Action::NonGauss) {
            out.write("nongauss.csv",
                      csv({"t", "delta_b", "entropy", "gaussian_entropy", "n_expect", "pop0", "pop1",
                           "pop2"},
                          {&s.times, &s.delta_b, &s.entropy, &s.gaussian_entropy, &s.n_expect,
                           &s.pop0, &s.pop1, &s.pop2}));
            if (options.svg) {
                PlotSpec spec;
                spec.title = cfg.name + ": non-Gaussianity";
                spec.y_label = "delta_B (nats)";
                spec.series = {{"delta_B", s.times, s.delta_b}};
                out.write("nongauss.svg", render_svg(spec));
            }
        }
        const WignerGrid w = wigner(s.states[pick], cfg.wigner.grid);
        out.write(action == Action::NonGauss ? "wigner_peak.csv" : "wigner.csv", wigner_csv(w));
        res["wigner"] = {{"t", s.times[pick]}, {"min", w.min()}, {"integral", w.integral()},
                         {"pop2", s.pop2[pick]}};
        std::cout << "t = " << format_double(s.times[pick]) << '\n';
        std::cout << "wigner_min = " << format_double(w.min()) << '\n';
        break;
    }
    }

    manifest.within_bounds = inv.within(cfg.bounds);
    manifest.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.write_manifest();
    return manifest;
}

} // namespace qlimit
