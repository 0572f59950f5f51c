#include "fracreg/cli.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "fracreg/design.hpp"
#include "fracreg/errors.hpp"

namespace fracreg::cli {

using nlohmann::json;

namespace {

const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ConfigError(path + key, "missing required key");
    }
    return obj.at(key);
}

double number(const json& obj, const std::string& key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number()) {
        throw ConfigError(path + key, "expected a number");
    }
    return v.get<double>();
}

std::optional<double> optional_number(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key) || obj.at(key).is_null()) {
        return std::nullopt;
    }
    return number(obj, key, path);
}

std::string text(const json& obj, const std::string& key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_string()) {
        throw ConfigError(path + key, "expected a string");
    }
    return v.get<std::string>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& path) {
    for (const auto& item : obj.items()) {
        if (std::find_if(known.begin(), known.end(), [&](const char* k) { return item.key() == k; }) ==
            known.end()) {
            throw ConfigError(path + item.key(), "unknown key");
        }
    }
}

const json& object(const json& doc, const std::string& key, const std::string& path) {
    const json& v = require(doc, key, path);
    if (!v.is_object()) {
        throw ConfigError(path + key, "expected an object");
    }
    return v;
}

Plant parse_plant(const json& j) {
    reject_unknown(j, {"a0", "a1", "a2", "alpha", "beta"}, "plant.");
    Plant p{number(j, "a0", "plant."), number(j, "a1", "plant."), number(j, "a2", "plant."),
            number(j, "alpha", "plant."), number(j, "beta", "plant.")};
    try {
        p.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError("plant", e.what());
    }
    return p;
}

Controller parse_controller(const json& j) {
    const std::string type = text(j, "type", "controller.");
    if (type == "pd") {
        reject_unknown(j, {"type", "K", "Td", "delta"}, "controller.");
        PdController c{number(j, "K", "controller."), number(j, "Td", "controller."),
                       number(j, "delta", "controller.")};
        return c;
    }
    if (type == "pi") {
        reject_unknown(j, {"type", "K", "Ti", "lambda"}, "controller.");
        PiController c{number(j, "K", "controller."), number(j, "Ti", "controller."),
                       number(j, "lambda", "controller.")};
        if (!(c.lambda > 0.0)) {
            throw ConfigError("controller.lambda", "must be positive");
        }
        return c;
    }
    throw ConfigError("controller.type", "expected \"pd\" or \"pi\"");
}

DesignBlock parse_design(const json& j) {
    reject_unknown(j, {"type", "poles", "ess_percent", "K", "integer"}, "design.");
    DesignBlock d;
    if (j.contains("type")) {
        const std::string type = text(j, "type", "design.");
        if (type == "pi") {
            d.kind = DesignKind::Pi;
        } else if (type != "pd") {
            throw ConfigError("design.type", "expected \"pd\" or \"pi\"");
        }
    }
    const json& poles = require(j, "poles", "design.");
    if (!poles.is_array() || poles.empty()) {
        throw ConfigError("design.poles", "expected a non-empty array");
    }
    for (std::size_t i = 0; i < poles.size(); ++i) {
        const std::string path = "design.poles[" + std::to_string(i) + "].";
        reject_unknown(poles[i], {"re", "im"}, path);
        d.poles.emplace_back(number(poles[i], "re", path),
                             poles[i].contains("im") ? number(poles[i], "im", path) : 0.0);
    }
    d.ess_percent = optional_number(j, "ess_percent", "design.");
    d.K = optional_number(j, "K", "design.");
    if (j.contains("integer")) {
        if (!j.at("integer").is_boolean()) {
            throw ConfigError("design.integer", "expected a boolean");
        }
        d.integer = j.at("integer").get<bool>();
    }
    if (d.kind == DesignKind::Pd) {
        if (std::none_of(d.poles.begin(), d.poles.end(), [](auto p) { return p.imag() != 0.0; })) {
            throw ConfigError("design.poles", "PD design needs a complex pole");
        }
        if (!d.integer && d.ess_percent.has_value() == d.K.has_value()) {
            throw ConfigError("design.ess_percent", "give exactly one of ess_percent and K");
        }
    } else if (d.poles.size() != 3) {
        throw ConfigError("design.poles", "PI design needs exactly three poles");
    }
    return d;
}

SimConfig parse_sim(const json& j) {
    reject_unknown(j, {"h", "t_end", "memory_len", "input"}, "sim.");
    SimConfig s;
    if (j.contains("h")) {
        s.step = number(j, "h", "sim.");
    }
    if (j.contains("t_end")) {
        s.t_end = number(j, "t_end", "sim.");
    }
    s.memory_len = optional_number(j, "memory_len", "sim.");
    if (j.contains("input")) {
        const json& in = object(j, "input", "sim.");
        const std::string type = text(in, "type", "sim.input.");
        if (type == "step") {
            reject_unknown(in, {"type", "amplitude"}, "sim.input.");
            s.input = StepInput{in.contains("amplitude") ? number(in, "amplitude", "sim.input.") : 1.0};
        } else if (type == "samples") {
            reject_unknown(in, {"type", "values"}, "sim.input.");
            const json& v = require(in, "values", "sim.input.");
            if (!v.is_array()) {
                throw ConfigError("sim.input.values", "expected an array");
            }
            SampledInput samples;
            for (const auto& x : v) {
                if (!x.is_number()) {
                    throw ConfigError("sim.input.values", "expected numbers");
                }
                samples.values.push_back(x.get<double>());
            }
            s.input = std::move(samples);
        } else {
            throw ConfigError("sim.input.type", "expected \"step\" or \"samples\"");
        }
    }
    try {
        s.validate();
    } catch (const std::exception& e) {
        throw ConfigError("sim", e.what());
    }
    return s;
}

RootFindConfig parse_roots(const json& j) {
    reject_unknown(j, {"search_radius", "grid_density", "newton_tol", "max_iter", "dedupe_tol",
                       "commensurate_max_denominator", "stability_margin"},
                   "roots.");
    RootFindConfig r;
    r.search_radius = optional_number(j, "search_radius", "roots.");
    auto integer = [&](const char* key, int& out) {
        if (j.contains(key)) {
            if (!j.at(key).is_number_integer()) {
                throw ConfigError(std::string("roots.") + key, "expected an integer");
            }
            out = j.at(key).get<int>();
        }
    };
    integer("grid_density", r.grid_density);
    integer("max_iter", r.max_iter);
    integer("commensurate_max_denominator", r.commensurate_max_denominator);
    r.newton_tol = optional_number(j, "newton_tol", "roots.").value_or(r.newton_tol);
    r.dedupe_tol = optional_number(j, "dedupe_tol", "roots.").value_or(r.dedupe_tol);
    r.stability_margin = optional_number(j, "stability_margin", "roots.").value_or(r.stability_margin);
    try {
        r.validate();
    } catch (const std::exception& e) {
        throw ConfigError("roots", e.what());
    }
    return r;
}

OutputBlock parse_output(const json& j) {
    reject_unknown(j, {"dir", "trajectory", "report"}, "output.");
    OutputBlock o;
    if (j.contains("dir")) {
        o.dir = text(j, "dir", "output.");
    }
    if (j.contains("trajectory")) {
        o.trajectory = text(j, "trajectory", "output.");
    }
    if (j.contains("report")) {
        o.report = text(j, "report", "output.");
    }
    return o;
}

json controller_json(const Controller& c) {
    if (const auto* pd = std::get_if<PdController>(&c)) {
        return {{"type", "pd"}, {"K", pd->K}, {"Td", pd->Td}, {"delta", pd->delta}};
    }
    const auto& pi = std::get<PiController>(c);
    return {{"type", "pi"}, {"K", pi.K}, {"Ti", pi.Ti}, {"lambda", pi.lambda}};
}

json poly_json(const FracPoly& p) {
    json out = json::array();
    for (const auto& t : p.terms()) {
        out.push_back({{"coeff", t.coeff}, {"exponent", t.exponent}});
    }
    return out;
}

json stability_json(const StabilityReport& r) {
    json roots = json::array();
    for (const auto& root : r.roots) {
        roots.push_back({{"re", root.value.real()}, {"im", root.value.imag()}, {"residual", root.residual}});
    }
    return {{"roots", roots},
            {"method", to_string(r.method)},
            {"verdict", to_string(r.verdict)},
            {"coverage_caveat", r.coverage_caveat},
            {"search_radius", r.search_radius},
            {"residual_bound", r.residual_bound}};
}

std::filesystem::path output_dir(const RunConfig& cfg, const CommandOptions& opts) {
    return opts.out_dir.value_or(std::filesystem::path(cfg.output.dir));
}

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("output.report", "cannot write " + path.string());
    }
    out << doc.dump(2) << '\n';
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// Loads the config and applies the environment step cap.
RunConfig prepare(const CommandOptions& opts) {
    RunConfig cfg = load_config(opts.config);
    cfg.sim.max_steps = max_steps_from_env();
    return cfg;
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "config error: output not writable: " << e.what() << '\n';
        return kConfigError;
    } catch (const NoSolution& e) {
        err << "solver failure: " << e.what() << '\n';
        return kSolverFailure;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ResourceLimit& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "solver failure: " << e.what() << '\n';
        return kSolverFailure;
    }
}

} // namespace

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) {
        throw ConfigError("(root)", "expected a JSON object");
    }
    reject_unknown(doc, {"plant", "controller", "design", "sim", "roots", "output"}, "");
    RunConfig cfg;
    cfg.plant = parse_plant(object(doc, "plant", ""));
    const bool has_controller = doc.contains("controller");
    const bool has_design = doc.contains("design");
    if (has_controller == has_design) {
        throw ConfigError("controller", "give exactly one of \"controller\" and \"design\"");
    }
    if (has_controller) {
        cfg.controller = parse_controller(object(doc, "controller", ""));
    } else {
        cfg.design = parse_design(object(doc, "design", ""));
    }
    if (doc.contains("sim")) {
        cfg.sim = parse_sim(object(doc, "sim", ""));
    }
    if (doc.contains("roots")) {
        cfg.roots = parse_roots(object(doc, "roots", ""));
    }
    if (doc.contains("output")) {
        cfg.output = parse_output(object(doc, "output", ""));
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("--config", "cannot read " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
    json doc;
    const Plant& p = cfg.plant;
    doc["plant"] = {{"a0", p.a0}, {"a1", p.a1}, {"a2", p.a2}, {"alpha", p.alpha}, {"beta", p.beta}};
    if (cfg.controller) {
        doc["controller"] = controller_json(*cfg.controller);
    }
    if (cfg.design) {
        const DesignBlock& d = *cfg.design;
        json poles = json::array();
        for (const auto& pole : d.poles) {
            poles.push_back({{"re", pole.real()}, {"im", pole.imag()}});
        }
        json block = {{"type", d.kind == DesignKind::Pd ? "pd" : "pi"}, {"poles", poles}, {"integer", d.integer}};
        if (d.ess_percent) {
            block["ess_percent"] = *d.ess_percent;
        }
        if (d.K) {
            block["K"] = *d.K;
        }
        doc["design"] = block;
    }
    json sim = {{"h", cfg.sim.step}, {"t_end", cfg.sim.t_end}};
    sim["memory_len"] = cfg.sim.memory_len ? json(*cfg.sim.memory_len) : json(nullptr);
    if (const auto* s = std::get_if<SampledInput>(&cfg.sim.input)) {
        sim["input"] = {{"type", "samples"}, {"values", s->values}};
    } else {
        sim["input"] = {{"type", "step"}, {"amplitude", std::get<StepInput>(cfg.sim.input).amplitude}};
    }
    doc["sim"] = sim;
    if (cfg.roots) {
        const RootFindConfig& r = *cfg.roots;
        doc["roots"] = {{"search_radius", r.search_radius ? json(*r.search_radius) : json(nullptr)},
                        {"grid_density", r.grid_density},
                        {"newton_tol", r.newton_tol},
                        {"max_iter", r.max_iter},
                        {"dedupe_tol", r.dedupe_tol},
                        {"commensurate_max_denominator", r.commensurate_max_denominator},
                        {"stability_margin", r.stability_margin}};
    }
    doc["output"] = {{"dir", cfg.output.dir}, {"trajectory", cfg.output.trajectory}, {"report", cfg.output.report}};
    return doc;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t dim) {
    out << "t,w,y";
    for (std::size_t i = 0; i < dim; ++i) {
        out << ",x" << (i + 1);
    }
    out << '\n';
    char buf[64];
    auto put = [&](double v) {
        const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
        out.write(buf, res.ptr - buf);
    };
    for (std::size_t k = 0; k < traj.size(); ++k) {
        put(traj.time(k));
        out << ',';
        put(traj.input[k]);
        out << ',';
        put(traj.output[k]);
        for (std::size_t i = 0; i < dim; ++i) {
            out << ',';
            put(k < traj.states[i].size() ? traj.states[i][k] : 0.0);
        }
        out << '\n';
    }
}

std::size_t max_steps_from_env() {
    const char* raw = std::getenv("FRACREG_MAX_STEPS");
    if (raw == nullptr || *raw == '\0') {
        return SimConfig::kDefaultMaxSteps;
    }
    std::size_t value = 0;
    const std::string_view sv(raw);
    const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), value);
    if (res.ec != std::errc() || res.ptr != sv.data() + sv.size() || value == 0) {
        throw ConfigError("FRACREG_MAX_STEPS", "expected a positive integer");
    }
    return value;
}

int cmd_simulate(const CommandOptions& opts, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = prepare(opts);
        if (!cfg.controller) {
            throw ConfigError("controller", "simulate needs a concrete controller block");
        }
        const StateModel model = std::visit(
            [&](const auto& c) {
                if constexpr (std::is_same_v<std::decay_t<decltype(c)>, PdController>) {
                    return build_pd_model(cfg.plant, c);
                } else {
                    return build_pi_model(cfg.plant, c);
                }
            },
            *cfg.controller);
        cfg.sim.validate();

        const auto dir = output_dir(cfg, opts);
        std::filesystem::create_directories(dir);
        const auto path = dir / cfg.output.trajectory;
        std::ofstream out(path);
        if (!out) {
            throw ConfigError("output.trajectory", "cannot write " + path.string());
        }
        try {
            write_trajectory_csv(out, simulate_state_space(model, cfg.sim), model.dim);
        } catch (const Diverged& e) {
            write_trajectory_csv(out, e.partial(), model.dim);
            err << "diverged: |state| exceeded " << kDivergenceBound << " at step " << e.index()
                << " (t = " << e.partial().time(e.index()) << ")\n";
            return static_cast<int>(kDiverged);
        }
        return static_cast<int>(kOk);
    });
}

int cmd_design(const CommandOptions& opts, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = prepare(opts);
        if (!cfg.design) {
            throw ConfigError("design", "design needs a design block");
        }
        const DesignBlock& d = *cfg.design;
        const auto dir = output_dir(cfg, opts);
        std::filesystem::create_directories(dir);
        const auto report_path = dir / cfg.output.report;

        json report;
        report["command"] = "design";
        report["config"] = to_json(cfg);
        const auto t0 = std::chrono::steady_clock::now();
        Controller controller;
        try {
            if (d.kind == DesignKind::Pd) {
                const auto pole = *std::find_if(d.poles.begin(), d.poles.end(),
                                                [](auto p) { return p.imag() != 0.0; });
                const DesignSpecPd spec{cfg.plant, pole, d.ess_percent, d.K};
                controller = d.integer ? design_pd_integer(spec) : design_pd_fractional(spec);
            } else {
                controller = design_pi(DesignSpecPi{cfg.plant, {d.poles[0], d.poles[1], d.poles[2]}});
            }
        } catch (const NoSolution& e) {
            report["error"] = e.what();
            report["residual"] = e.residual();
            write_json(report_path, report);
            err << "solver failure: " << e.what() << '\n';
            return static_cast<int>(kSolverFailure);
        }
        const double design_ms = elapsed_ms(t0);

        const FracPoly poly = char_poly(cfg.plant, controller);
        const auto t1 = std::chrono::steady_clock::now();
        const StabilityReport stability = find_roots(poly, cfg.roots.value_or(RootFindConfig::around(d.poles)));
        report["controller"] = controller_json(controller);
        report["char_poly"] = poly_json(poly);
        report.update(stability_json(stability));
        report["timings_ms"] = {{"design", design_ms}, {"roots", elapsed_ms(t1)}};
        write_json(report_path, report);

        switch (stability.verdict) {
        case Verdict::Stable: return static_cast<int>(kOk);
        case Verdict::Unstable:
            err << "design is unstable: closed loop has a root in the right half plane\n";
            return static_cast<int>(kUnstableDesign);
        case Verdict::Inconclusive: break;
        }
        err << "root search inconclusive\n";
        return static_cast<int>(kSolverFailure);
    });
}

int cmd_poles(const CommandOptions& opts, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = prepare(opts);
        if (!cfg.controller) {
            throw ConfigError("controller", "poles needs a concrete controller block");
        }
        const FracPoly poly = char_poly(cfg.plant, *cfg.controller);
        const auto dir = output_dir(cfg, opts);
        std::filesystem::create_directories(dir);

        const auto t0 = std::chrono::steady_clock::now();
        const StabilityReport stability = find_roots(poly, cfg.roots.value_or(RootFindConfig{}));
        json report;
        report["command"] = "poles";
        report["config"] = to_json(cfg);
        report["controller"] = controller_json(*cfg.controller);
        report["char_poly"] = poly_json(poly);
        report.update(stability_json(stability));
        report["timings_ms"] = {{"roots", elapsed_ms(t0)}};
        write_json(dir / cfg.output.report, report);
        if (stability.verdict == Verdict::Inconclusive) {
            err << "root search inconclusive: no Newton start converged\n";
            return static_cast<int>(kSolverFailure);
        }
        return static_cast<int>(kOk);
    });
}

} // namespace fracreg::cli
