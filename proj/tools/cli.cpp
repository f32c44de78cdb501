#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "accelgates/errors.hpp"
#include "accelgates/execution.hpp"
#include "accelgates/oracle.hpp"
#include "accelgates/oscillatory.hpp"

#ifndef ACCELGATES_VERSION_STRING
#define ACCELGATES_VERSION_STRING "0.0.0"
#endif

namespace accelgates::cli {

using nlohmann::json;

namespace {

QuadratureOptions quadrature(const RunConfig& cfg) {
    QuadratureOptions opts = QuadratureOptions::from_environment();
    opts.tol = cfg.quadrature_tol;
    return opts;
}

json vec(const BlochVector& b) { return json::array({b.x, b.y, b.z}); }

json rotation_json(const NetRotation& r) {
    return {{"quaternion", {r.w, r.x, r.y, r.z}}, {"axis", vec(r.axis())}, {"angle", r.angle()}};
}

json diagnostics_json(const OracleDiagnostics& d) {
    return {{"steps", d.steps},
            {"min_step", d.min_step},
            {"max_step", d.max_step},
            {"step_bound", d.step_bound},
            {"norm_drift", d.norm_drift},
            {"initial_norm_weight", d.initial_norm_weight},
            {"dimension", d.dimension},
            {"pure_runs", d.pure_runs}};
}

bool in_band(double v, const std::array<double, 2>& band) { return v >= band[0] && v <= band[1]; }

RunConfig load(const std::string& path) {
    if (path.empty()) return RunConfig::defaults();
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", fmt::format("cannot open '{}'", path));
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", fmt::format("'{}' is not valid JSON: {}", path, e.what()));
    }
    return RunConfig::from_json(j);
}

}  // namespace

const char* tool_version() { return ACCELGATES_VERSION_STRING; }

std::string csv_metadata(const std::string& command, const RunConfig& cfg) {
    return fmt::format("# tool: {} {}\n# command: {}\n# config: {}\n", kToolName, tool_version(), command,
                       cfg.to_json().dump());
}

json json_metadata(const std::string& command, const RunConfig& cfg) {
    return {{"tool", kToolName}, {"version", tool_version()}, {"command", command}, {"config", cfg.to_json()}};
}

void cmd_integrals(const RunConfig& cfg, std::ostream& os) {
    const TrajectorySegment seg = cfg.trajectory.segment();
    const double T = cfg.trajectory.duration;
    const IntegralTables tables = compute_tables(seg, cfg.cavity, T, cfg.nested, quadrature(cfg));
    os << csv_metadata("integrals", cfg);
    write_table_csv(os, tables.phase);
    if (tables.nested) {
        for (const auto& m : tables.nested->modes) {
            os << fmt::format("{},M++,{:.17g},{:.17g},{:.17g},{:.6g},\n", m.mode, T, m.m_plus_plus.real(),
                              m.m_plus_plus.imag(), m.err_plus_plus);
            os << fmt::format("{},M--,{:.17g},{:.17g},{:.17g},{:.6g},\n", m.mode, T, m.m_minus_minus.real(),
                              m.m_minus_minus.imag(), m.err_minus_minus);
        }
    }
}

void cmd_scan(const RunConfig& cfg, std::ostream& os) {
    if (cfg.field.kind != "coherent") throw ConfigError("field.kind", "scan needs a coherent field");
    const CoherentPrep prep = cfg.field.coherent();
    const double lambda = cfg.cavity.lambda;
    ScanTable table;
    if (cfg.scan.parameter == "a") {
        table = azimuth_scan(cfg.cavity, prep, lambda, cfg.trajectory.duration, cfg.scan.values, cfg.trajectory.x0,
                             quadrature(cfg));
    } else {
        TrajectorySegment seg = cfg.trajectory.segment();
        for (double T : cfg.scan.values) seg.duration = std::max(seg.duration, T);
        table = axis_vs_time(cfg.cavity, prep, lambda, seg, cfg.scan.values, quadrature(cfg));
    }
    os << csv_metadata("scan", cfg);
    write_scan_csv(os, table);
    write_scan_footer(os, table);
}

bool cmd_synthesize(const RunConfig& cfg, std::ostream& os) {
    const CavityTemplate tpl{cfg.cavity, cfg.field.mode};
    SynthesisConstraints c = cfg.synthesis.constraints;
    c.lambda = cfg.cavity.lambda;
    const NetRotation target = cfg.synthesis.target.rotation();
    const GateSequence seq = synthesize(target, tpl, c, cfg.synthesis.tol_fidelity, quadrature(cfg));

    json segments = json::array();
    for (std::size_t i = 0; i < seq.segments.size(); ++i) {
        const GateSegment& s = seq.segments[i];
        const RotationSpec& r = seq.rotations[i];
        segments.push_back({{"index", i},
                            {"a", s.a},
                            {"T", s.T},
                            {"alpha_abs", std::abs(s.alpha)},
                            {"alpha_arg", std::arg(s.alpha)},
                            {"mode", s.mode},
                            {"cavity_length", s.cavity.length},
                            {"x0", s.trajectory().x0},
                            {"axis", vec(r.unit_axis())},
                            {"azimuth", r.azimuth},
                            {"angle", r.angle}});
    }
    json doc;
    doc["meta"] = json_metadata("synthesize", cfg);
    doc["success"] = seq.success;
    doc["method"] = seq.method;
    doc["fidelity"] = seq.fidelity;
    doc["target"] = rotation_json(seq.target);
    doc["composed"] = rotation_json(seq.predicted);
    doc["axis_spread_deg"] = seq.axis_spread * 180.0 / std::numbers::pi;
    doc["axis_separation_deg"] = seq.axis_separation * 180.0 / std::numbers::pi;
    doc["grid_points"] = seq.grid_points;
    doc["notes"] = seq.notes;
    doc["segments"] = segments;
    os << doc.dump(2) << "\n";
    return seq.success;
}

bool cmd_oracle_verify(const RunConfig& cfg, std::ostream& os) {
    const auto& o = cfg.oracle;
    const OracleOptions oopts{o.tol};
    const QuadratureOptions qopts = quadrature(cfg);
    const TrajectorySegment seg = cfg.trajectory.segment();
    const double T = cfg.trajectory.duration;
    const BlochVector b0{cfg.qubit_bloch[0], cfg.qubit_bloch[1], cfg.qubit_bloch[2]};
    const QubitState rho0 = QubitState::from_bloch(b0);
    json checks = json::array();
    json runs = json::array();
    bool all = true;

    const double alpha_abs = (cfg.field.kind == "coherent" && cfg.field.alpha_abs > 0.0) ? cfg.field.alpha_abs : 1.0;
    const CoherentPrep prep = CoherentPrep::polar(cfg.field.mode, alpha_abs, cfg.field.alpha_arg);
    TruncatedFieldSpec coherent_field;
    coherent_field.modes = {{prep.mode, coherent_cutoff(alpha_abs)}};
    coherent_field.initial = FieldPrep::coherent_state(prep);

    {
        CavityConfig cav = cfg.cavity;
        cav.lambda = 0.0;
        const OracleResult r = exact_evolve(seg, cav, coherent_field, rho0, T, oopts);
        const double dev = (r.reduced.matrix() - rho0.matrix()).cwiseAbs().maxCoeff();
        const bool ok = dev <= 1e-12;
        all = all && ok;
        checks.push_back({{"name", "zero_coupling"}, {"passed", ok}, {"max_deviation", dev}});
        runs.push_back({{"label", "zero_coupling"}, {"lambda", 0.0}, {"diagnostics", diagnostics_json(r.diagnostics)}});
    }
    {
        const IntegralResult ip = phase_integral(seg, cfg.cavity, prep.mode, Sign::Plus, T, qopts);
        const IntegralResult im = phase_integral(seg, cfg.cavity, prep.mode, Sign::Minus, T, qopts);
        std::array<double, 2> rel{};
        for (int h = 0; h < 2; ++h) {
            CavityConfig cav = cfg.cavity;
            cav.lambda = o.coherent_lambda_alpha / alpha_abs / (h == 0 ? 1.0 : 2.0);
            const OracleResult r = exact_evolve(seg, cav, coherent_field, rho0, T, oopts);
            const BlochVector exact = r.reduced.bloch() - b0;
            const BlochVector pert = coherent_first_order(ip.value, im.value, prep, cav.lambda, rho0).delta;
            rel[h] = exact.norm() > 0.0 ? (pert - exact).norm() / exact.norm() : std::nan("");
            runs.push_back({{"label", "coherent"}, {"lambda", cav.lambda}, {"diagnostics", diagnostics_json(r.diagnostics)}});
        }
        const double ratio = rel[0] / rel[1];
        const bool ok = rel[0] <= o.match_tolerance && in_band(ratio, o.coherent_band);
        all = all && ok;
        checks.push_back({{"name", "coherent_first_order"},
                          {"passed", ok},
                          {"relative_residual", rel},
                          {"tolerance", o.match_tolerance},
                          {"halving_ratio", ratio},
                          {"band", o.coherent_band}});
    }
    {
        CavityConfig cav = cfg.cavity;
        cav.n_modes = o.n_modes;
        cav.lambda = o.vacuum_lambda;
        const IntegralTables tables = compute_tables(seg, cav, T, true, qopts);
        const VacuumCoefficients coeffs = vacuum_coefficients(tables.phase, *tables.nested);
        const TruncatedFieldSpec field = TruncatedFieldSpec::uniform(o.n_modes, o.n_max, FieldPrep::vacuum());
        std::array<double, 2> residual{};
        std::array<double, 2> size{};
        for (int h = 0; h < 2; ++h) {
            cav.lambda = o.vacuum_lambda / (h == 0 ? 1.0 : 2.0);
            const OracleResult r = exact_evolve(seg, cav, field, rho0, T, oopts);
            const BlochVector exact = r.reduced.bloch() - b0;
            const BlochVector pert = vacuum_bloch_delta(coeffs, b0, cav.lambda);
            residual[h] = (pert - exact).norm();
            size[h] = exact.norm();
            runs.push_back({{"label", "vacuum"}, {"lambda", cav.lambda}, {"diagnostics", diagnostics_json(r.diagnostics)}});
        }
        const double ratio = residual[0] / residual[1];
        const bool ok = in_band(ratio, o.vacuum_band);
        all = all && ok;
        checks.push_back({{"name", "vacuum_second_order"},
                          {"passed", ok},
                          {"residual", residual},
                          {"halving_ratio", ratio},
                          {"observed_order", std::log2(ratio)},
                          {"band", o.vacuum_band}});
        const double size_ratio = size[0] / size[1];
        const bool ok2 = size_ratio >= 3.0 && size_ratio <= 5.0;
        all = all && ok2;
        checks.push_back({{"name", "vacuum_first_order_vanishing"},
                          {"passed", ok2},
                          {"change", size},
                          {"halving_ratio", size_ratio},
                          {"band", {3.0, 5.0}}});
    }
    {
        CavityConfig cav = cfg.cavity;
        cav.n_modes = o.n_modes;
        cav.lambda = o.vacuum_lambda;
        std::vector<LadderRung> ladder;
        for (int n : o.ladder) ladder.push_back({o.n_modes, n});
        const ConvergenceReport rep = convergence_check(seg, cav, FieldPrep::vacuum(), rho0, T, ladder, o.ladder_threshold, oopts);
        json rows = json::array();
        for (const auto& r : rep.rows) {
            rows.push_back({{"n_modes", r.rung.n_modes},
                            {"n_max", r.rung.n_max},
                            {"bloch", vec(r.bloch)},
                            {"change", r.change_from_previous},
                            {"diagnostics", diagnostics_json(r.diagnostics)}});
        }
        const bool ok = rep.passed && rep.monotone;
        all = all && ok;
        checks.push_back({{"name", "cutoff_ladder"},
                          {"passed", ok},
                          {"monotone", rep.monotone},
                          {"final_change", rep.final_change},
                          {"threshold", o.ladder_threshold},
                          {"rows", rows}});
    }

    json doc;
    doc["meta"] = json_metadata("oracle-verify", cfg);
    doc["passed"] = all;
    doc["checks"] = checks;
    doc["runs"] = runs;
    os << doc.dump(2) << "\n";
    return all;
}

void cmd_units(const RunConfig& cfg, std::ostream& os) {
    const UnitSystem units = UnitSystem::from_gap_hz(cfg.units.gap_hz);
    const SiAcceleration si = natural_to_si_acceleration(cfg.units.a, units);
    os << csv_metadata("units", cfg);
    os << "gap_hz,omega_si,a_natural,m_per_s2,g\n";
    os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", cfg.units.gap_hz, units.omega_si, cfg.units.a,
                      si.meters_per_s2, si.in_g);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Accelerated-detector qubit rotations in cavities"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    std::string out_path;
    double tol = 0.0;
    int jobs = 0;
    bool emit = false;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_path, "output file ('-' for stdout)");
    app.add_option("--tol", tol, "absolute tolerance per phase integral");
    app.add_option("--jobs", jobs, "worker threads");
    app.add_flag("--emit-config", emit, "print the resolved config and exit");
    CLI::App* integrals = app.add_subcommand("integrals", "phase integrals I(T) and nested M-integrals");
    CLI::App* scan = app.add_subcommand("scan", "rotation-axis azimuth versus a or T");
    CLI::App* synth = app.add_subcommand("synthesize", "plan a segment sequence for a target rotation");
    CLI::App* verify = app.add_subcommand("oracle-verify", "check perturbation theory against exact evolution");
    CLI::App* units = app.add_subcommand("units", "natural acceleration in SI units");
    double gap_hz = 0.0;
    double a_nat = std::nan("");
    units->add_option("--gap-hz", gap_hz, "detector gap Omega/(2 pi) in Hz");
    units->add_option("--a", a_nat, "acceleration in natural units");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigFailure;
    }

    std::ostringstream buffer;
    RunConfig cfg;
    try {
        cfg = load(config_path);
        if (!out_path.empty()) cfg.output = out_path;
        if (app.count("--tol")) cfg.quadrature_tol = tol;
        if (units->count("--gap-hz")) cfg.units.gap_hz = gap_hz;
        if (units->count("--a")) cfg.units.a = a_nat;
        cfg.validate();
        if (app.count("--jobs")) {
            if (jobs < 1) throw ConfigError("--jobs", "must be >= 1");
            set_worker_count(jobs);
        }
        if (emit) {
            out << cfg.to_json().dump(2) << "\n";
            return kOk;
        }

        int code = kOk;
        if (integrals->parsed()) {
            cmd_integrals(cfg, buffer);
        } else if (scan->parsed()) {
            cmd_scan(cfg, buffer);
        } else if (synth->parsed()) {
            if (!cmd_synthesize(cfg, buffer)) code = kPlanningFailure;
        } else if (verify->parsed()) {
            if (!cmd_oracle_verify(cfg, buffer)) code = kAccuracyFailure;
        } else if (units->parsed()) {
            cmd_units(cfg, buffer);
        }

        if (cfg.output == "-") {
            out << buffer.str();
        } else {
            std::ofstream f(cfg.output, std::ios::binary);
            if (!f) throw ConfigError("output.path", fmt::format("cannot write '{}'", cfg.output));
            f << buffer.str();
        }
        if (code == kPlanningFailure) err << "error: only a best-effort plan was found\n";
        if (code == kAccuracyFailure) err << "error: oracle verification failed\n";
        return code;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigFailure;
    } catch (const PlanningError& e) {
        err << "planning error: " << e.what() << "\n";
        return kPlanningFailure;
    } catch (const AccuracyError& e) {
        err << fmt::format("accuracy error: {} (best estimate {}{:+}i, error {:.3g})\n", e.what(),
                           e.best_estimate().real(), e.best_estimate().imag(), e.error_estimate());
        return kAccuracyFailure;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kAccuracyFailure;
    }
}

}  // namespace accelgates::cli
