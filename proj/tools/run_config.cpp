#include "run_config.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

#include "accelgates/errors.hpp"

namespace accelgates::cli {

using nlohmann::json;

ConfigError::ConfigError(const std::string& key, const std::string& why)
    : std::runtime_error(fmt::format("config key '{}': {}", key, why)), key_(key) {}

namespace {

// Walks one JSON object, remembering which keys were consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string key(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }

    bool has(const std::string& name) const { return j_.contains(name); }

    template <class T>
    void get(const std::string& name, T& out) {
        seen_.insert(name);
        if (!j_.contains(name)) return;
        try {
            out = j_.at(name).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(key(name), "wrong type");
        }
    }

    Section sub(const std::string& name) {
        seen_.insert(name);
        return Section(j_.contains(name) ? j_.at(name) : empty(), key(name));
    }

    const json& raw(const std::string& name) {
        seen_.insert(name);
        return j_.at(name);
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.count(k)) throw ConfigError(key(k), "unknown key");
        }
    }

private:
    static const json& empty() {
        static const json e = json::object();
        return e;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<double> linspace(double start, double stop, int count) {
    std::vector<double> v;
    for (int i = 0; i < count; ++i) {
        v.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
    }
    return v;
}

void require(bool ok, const std::string& key, const std::string& why) {
    if (!ok) throw ConfigError(key, why);
}

}  // namespace

TrajectorySegment TrajectoryConfig::segment() const {
    if (kind == "inertial") return TrajectorySegment::inertial(x0, duration);
    return TrajectorySegment::accelerated(a, x0, duration);
}

FieldPrep FieldConfig::prep() const {
    if (kind == "vacuum") return FieldPrep::vacuum();
    return FieldPrep::coherent_state(coherent());
}

NetRotation TargetConfig::rotation() const {
    if (!from_unitary) return NetRotation::from_axis_angle({axis[0], axis[1], axis[2]}, angle);
    Mat2 u;
    u << cplx(unitary[0][0], unitary[0][1]), cplx(unitary[0][2], unitary[0][3]), cplx(unitary[1][0], unitary[1][1]),
        cplx(unitary[1][2], unitary[1][3]);
    return NetRotation::from_unitary(u);
}

RunConfig RunConfig::defaults() {
    RunConfig c;
    c.scan.values = linspace(0.0, 2.0, 21);
    c.synthesis.target.angle = std::numbers::pi / 2;
    c.synthesis.constraints.a_max = 2.0;
    c.synthesis.constraints.T_max = 20.0;
    c.synthesis.constraints.alpha_max = 5.0;
    return c;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c = defaults();
    Section root(j, "");

    {
        Section s = root.sub("cavity");
        s.get("length", c.cavity.length);
        s.get("n_modes", c.cavity.n_modes);
        s.get("omega_gap", c.cavity.omega_gap);
        s.get("lambda", c.cavity.lambda);
        s.finish();
    }
    {
        Section s = root.sub("trajectory");
        s.get("kind", c.trajectory.kind);
        s.get("a", c.trajectory.a);
        s.get("x0", c.trajectory.x0);
        s.get("duration", c.trajectory.duration);
        s.finish();
    }
    {
        Section s = root.sub("field");
        s.get("kind", c.field.kind);
        s.get("mode", c.field.mode);
        s.get("alpha_abs", c.field.alpha_abs);
        s.get("alpha_arg", c.field.alpha_arg);
        s.finish();
    }
    {
        Section s = root.sub("qubit");
        s.get("bloch", c.qubit_bloch);
        s.finish();
    }
    {
        Section s = root.sub("scan");
        s.get("parameter", c.scan.parameter);
        if (s.has("values") && s.has("range")) throw ConfigError(s.key("range"), "give either values or range");
        s.get("values", c.scan.values);
        if (s.has("range")) {
            Section r = s.sub("range");
            double start = 0.0, stop = 0.0;
            int count = 0;
            r.get("start", start);
            r.get("stop", stop);
            r.get("count", count);
            r.finish();
            require(count >= 1, r.key("count"), "must be >= 1");
            c.scan.values = linspace(start, stop, count);
        }
        s.finish();
    }
    {
        Section s = root.sub("integrals");
        s.get("nested", c.nested);
        s.finish();
    }
    {
        Section s = root.sub("synthesis");
        auto& k = c.synthesis.constraints;
        s.get("a_max", k.a_max);
        s.get("T_max", k.T_max);
        s.get("alpha_max", k.alpha_max);
        s.get("max_segments", k.max_segments);
        s.get("grid_a", k.grid_a);
        s.get("grid_T", k.grid_T);
        s.get("alpha_phase", k.alpha_phase);
        s.get("tol_fidelity", c.synthesis.tol_fidelity);
        Section t = s.sub("target");
        auto& tg = c.synthesis.target;
        if (t.has("unitary")) {
            if (t.has("axis") || t.has("angle")) throw ConfigError(t.key("unitary"), "give either axis/angle or unitary");
            tg.from_unitary = true;
            const json& u = t.raw("unitary");
            try {
                for (int r = 0; r < 2; ++r) {
                    for (int col = 0; col < 2; ++col) {
                        const auto pair = u.at(r).at(col).get<std::array<double, 2>>();
                        tg.unitary[r][2 * col] = pair[0];
                        tg.unitary[r][2 * col + 1] = pair[1];
                    }
                }
                if (u.size() != 2 || u.at(0).size() != 2 || u.at(1).size() != 2) throw std::out_of_range("shape");
            } catch (const std::exception&) {
                throw ConfigError(t.key("unitary"), "expected [[[re,im],[re,im]],[[re,im],[re,im]]]");
            }
        }
        t.get("axis", tg.axis);
        t.get("angle", tg.angle);
        t.finish();
        s.finish();
    }
    {
        Section s = root.sub("oracle");
        auto& o = c.oracle;
        s.get("n_modes", o.n_modes);
        s.get("n_max", o.n_max);
        s.get("coherent_lambda_alpha", o.coherent_lambda_alpha);
        s.get("vacuum_lambda", o.vacuum_lambda);
        s.get("match_tolerance", o.match_tolerance);
        s.get("coherent_band", o.coherent_band);
        s.get("vacuum_band", o.vacuum_band);
        s.get("ladder", o.ladder);
        s.get("ladder_threshold", o.ladder_threshold);
        s.get("tol", o.tol);
        s.finish();
    }
    {
        Section s = root.sub("units");
        s.get("gap_hz", c.units.gap_hz);
        s.get("a", c.units.a);
        s.finish();
    }
    {
        Section s = root.sub("output");
        s.get("path", c.output);
        s.finish();
    }
    {
        Section s = root.sub("tolerances");
        s.get("quadrature", c.quadrature_tol);
        s.finish();
    }
    root.finish();
    c.validate();
    return c;
}

void RunConfig::validate() const {
    try {
        cavity.validate();
    } catch (const DomainError& e) {
        throw ConfigError("cavity", e.what());
    }
    require(trajectory.kind == "inertial" || trajectory.kind == "accelerated", "trajectory.kind",
            "must be 'inertial' or 'accelerated'");
    require(std::isfinite(trajectory.a), "trajectory.a", "must be finite");
    require(trajectory.duration >= 0.0, "trajectory.duration", "must be >= 0");
    require(trajectory.x0 >= 0.0 && trajectory.x0 <= cavity.length, "trajectory.x0", "must lie in [0, L]");
    if (trajectory.kind == "accelerated") require(trajectory.a != 0.0, "trajectory.a", "must be nonzero when accelerated");
    try {
        trajectory.segment().validate();
    } catch (const DomainError& e) {
        throw ConfigError("trajectory", e.what());
    }
    require(field.kind == "vacuum" || field.kind == "coherent", "field.kind", "must be 'vacuum' or 'coherent'");
    require(field.mode >= 1 && field.mode <= cavity.n_modes, "field.mode", "must lie in [1, cavity.n_modes]");
    require(field.alpha_abs >= 0.0 && std::isfinite(field.alpha_abs), "field.alpha_abs", "must be >= 0");
    require(std::isfinite(field.alpha_arg), "field.alpha_arg", "must be finite");
    const double bn = std::hypot(qubit_bloch[0], qubit_bloch[1], qubit_bloch[2]);
    require(bn <= 1.0 + 1e-10, "qubit.bloch", "length must be <= 1");
    require(scan.parameter == "a" || scan.parameter == "T", "scan.parameter", "must be 'a' or 'T'");
    require(!scan.values.empty(), "scan.values", "must not be empty");
    for (double v : scan.values) require(std::isfinite(v), "scan.values", "must be finite");
    if (scan.parameter == "T") {
        for (double v : scan.values) require(v >= 0.0, "scan.values", "times must be >= 0");
    }
    const auto& t = synthesis.target;
    if (!t.from_unitary) {
        require(std::isfinite(t.angle), "synthesis.target.angle", "must be finite");
        require(std::hypot(t.axis[0], t.axis[1], t.axis[2]) > 0.0 || t.angle == 0.0, "synthesis.target.axis",
                "must be nonzero");
    } else {
        try {
            t.rotation();
        } catch (const DomainError& e) {
            throw ConfigError("synthesis.target.unitary", e.what());
        }
    }
    require(synthesis.tol_fidelity > 0.0 && synthesis.tol_fidelity < 1.0, "synthesis.tol_fidelity",
            "must lie in (0, 1)");
    require(oracle.n_modes >= 1, "oracle.n_modes", "must be >= 1");
    require(oracle.n_max >= 1, "oracle.n_max", "must be >= 1");
    require(oracle.coherent_lambda_alpha > 0.0, "oracle.coherent_lambda_alpha", "must be > 0");
    require(oracle.vacuum_lambda > 0.0, "oracle.vacuum_lambda", "must be > 0");
    require(oracle.match_tolerance > 0.0, "oracle.match_tolerance", "must be > 0");
    require(oracle.coherent_band[0] < oracle.coherent_band[1], "oracle.coherent_band", "must be increasing");
    require(oracle.vacuum_band[0] < oracle.vacuum_band[1], "oracle.vacuum_band", "must be increasing");
    require(!oracle.ladder.empty(), "oracle.ladder", "must not be empty");
    for (std::size_t i = 0; i < oracle.ladder.size(); ++i) {
        require(oracle.ladder[i] >= 1 && (i == 0 || oracle.ladder[i] > oracle.ladder[i - 1]), "oracle.ladder",
                "cutoffs must be >= 1 and increasing");
    }
    require(oracle.ladder_threshold > 0.0, "oracle.ladder_threshold", "must be > 0");
    require(oracle.tol > 0.0, "oracle.tol", "must be > 0");
    require(units.gap_hz > 0.0 && std::isfinite(units.gap_hz), "units.gap_hz", "must be > 0");
    require(std::isfinite(units.a), "units.a", "must be finite");
    require(quadrature_tol > 0.0, "tolerances.quadrature", "must be > 0");
}

json RunConfig::to_json() const {
    json j;
    j["cavity"] = {{"length", cavity.length},
                   {"n_modes", cavity.n_modes},
                   {"omega_gap", cavity.omega_gap},
                   {"lambda", cavity.lambda}};
    j["trajectory"] = {{"kind", trajectory.kind},
                       {"a", trajectory.a},
                       {"x0", trajectory.x0},
                       {"duration", trajectory.duration}};
    j["field"] = {{"kind", field.kind},
                  {"mode", field.mode},
                  {"alpha_abs", field.alpha_abs},
                  {"alpha_arg", field.alpha_arg}};
    j["qubit"] = {{"bloch", qubit_bloch}};
    j["scan"] = {{"parameter", scan.parameter}, {"values", scan.values}};
    j["integrals"] = {{"nested", nested}};
    const auto& k = synthesis.constraints;
    json target;
    if (synthesis.target.from_unitary) {
        const auto& u = synthesis.target.unitary;
        target["unitary"] = {{{u[0][0], u[0][1]}, {u[0][2], u[0][3]}}, {{u[1][0], u[1][1]}, {u[1][2], u[1][3]}}};
    } else {
        target["axis"] = synthesis.target.axis;
        target["angle"] = synthesis.target.angle;
    }
    j["synthesis"] = {{"a_max", k.a_max},
                      {"T_max", k.T_max},
                      {"alpha_max", k.alpha_max},
                      {"max_segments", k.max_segments},
                      {"grid_a", k.grid_a},
                      {"grid_T", k.grid_T},
                      {"alpha_phase", k.alpha_phase},
                      {"tol_fidelity", synthesis.tol_fidelity},
                      {"target", target}};
    j["oracle"] = {{"n_modes", oracle.n_modes},
                   {"n_max", oracle.n_max},
                   {"coherent_lambda_alpha", oracle.coherent_lambda_alpha},
                   {"vacuum_lambda", oracle.vacuum_lambda},
                   {"match_tolerance", oracle.match_tolerance},
                   {"coherent_band", oracle.coherent_band},
                   {"vacuum_band", oracle.vacuum_band},
                   {"ladder", oracle.ladder},
                   {"ladder_threshold", oracle.ladder_threshold},
                   {"tol", oracle.tol}};
    j["units"] = {{"gap_hz", units.gap_hz}, {"a", units.a}};
    j["output"] = {{"path", output}};
    j["tolerances"] = {{"quadrature", quadrature_tol}};
    return j;
}

}  // namespace accelgates::cli
