// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "accelgates/oracle.hpp"
#include "accelgates/perturbation.hpp"
#include "accelgates/rotation.hpp"
#include "accelgates/synthesis.hpp"

using namespace accelgates;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kDeg = 180.0 / pi;

// Pinned thresholds.
constexpr double kFig1SpreadDeg = 50.0;
constexpr double kFig2HundredDeg = 100.0;
constexpr double kFig2SoftDeg = 80.0;
constexpr double kCoherentMatch = 0.05;
constexpr double kCoherentBandLo = 1.5;
constexpr double kCoherentBandHi = 2.5;
constexpr double kVacuumBandLo = 5.0;
constexpr double kVacuumBandHi = 11.0;
constexpr double kAngleIdentityTol = 1e-12;
constexpr double kAzimuthInvarianceTol = 1e-10;
constexpr double kOrderInvariantTol = 1e-12;
constexpr double kSynthesisFidelity = 0.999;
constexpr double kUnitsTargetG = 1e16;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double wrap_diff(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * pi)); }

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

Outcome fig1_acceleration_scan() {
    const CavityConfig cfg{pi, 1, 1.0, 0.01};
    const auto prep = CoherentPrep::polar(1, 1.0, 0.0);
    const auto as = linspace(0.0, 2.0, 201);
    double best = 0.0;
    double best_T = 0.0;
    std::string per_T;
    for (double T : {2.0, 5.0, 10.0, 20.0}) {
        const auto s = azimuth_scan(cfg, prep, cfg.lambda, T, as, 0.0).spread();
        per_T += fmt::format(" T={}:{:.1f}deg({} rows)", T, s.total * kDeg, s.valid_rows);
        if (s.total > best) {
            best = s.total;
            best_T = T;
        }
    }
    return {best * kDeg > kFig1SpreadDeg,
            fmt::format("max spread {:.2f} deg at T={} (need > {});{}", best * kDeg, best_T, kFig1SpreadDeg, per_T)};
}

Outcome fig2_time_scan() {
    // Long cavity so the accelerated run stays inside; mode 25 is resonant with the gap.
    const double L = 25 * pi;
    const CavityConfig cfg{L, 25, 1.0, 0.01};
    const auto prep = CoherentPrep::polar(25, 1.0, 0.0);
    const auto Ts = linspace(0.5, 5.0, 91);
    const auto inertial = axis_vs_time(cfg, prep, cfg.lambda, TrajectorySegment::inertial(L / 2, 5.0), Ts).spread();
    const auto accel = axis_vs_time(cfg, prep, cfg.lambda, TrajectorySegment::accelerated(1.0, 0.0, 5.0), Ts).spread();
    const bool exceeds = accel.total > inertial.total;
    const bool stagnates = inertial.second_half < inertial.first_half;
    const double acc_deg = accel.total * kDeg;
    const bool hundred = acc_deg > kFig2HundredDeg;
    const bool soft = !hundred && acc_deg >= kFig2SoftDeg;
    std::string detail = fmt::format(
        "accelerated {:.2f} deg vs inertial {:.2f} deg; inertial halves {:.2f} -> {:.2f} deg; "
        "time-control spread {:.2f} deg (need > {}){}; failed rows {}/{}",
        acc_deg, inertial.total * kDeg, inertial.first_half * kDeg, inertial.second_half * kDeg, acc_deg,
        kFig2HundredDeg, soft ? " soft-pass" : "", accel.failed_rows, inertial.failed_rows);
    return {exceeds && stagnates && (hundred || soft), detail};
}

Outcome coherent_oracle() {
    const double L = 25 * pi;
    const auto prep = CoherentPrep::polar(25, 1.0, 0.0);
    TruncatedFieldSpec field;
    field.modes = {{25, coherent_cutoff(1.0)}};
    field.initial = FieldPrep::coherent_state(prep);
    const auto rho0 = QubitState::from_bloch({0.0, 0.0, -1.0});
    const double T = 5.0;
    bool ok = true;
    std::string detail;
    for (double a : {0.0, 1.0}) {
        const auto seg = a == 0.0 ? TrajectorySegment::inertial(pi / 2, T) : TrajectorySegment::accelerated(a, pi / 2, T);
        CavityConfig cfg{L, 25, 1.0, 0.0};
        const auto ip = phase_integral(seg, cfg, 25, Sign::Plus, T).value;
        const auto im = phase_integral(seg, cfg, 25, Sign::Minus, T).value;
        double rel[2];
        for (int h = 0; h < 2; ++h) {
            cfg.lambda = 1e-3 / (1 << h);
            const auto exact = exact_evolve(seg, cfg, field, rho0, T).reduced.bloch() - rho0.bloch();
            const auto pert = coherent_first_order(ip, im, prep, cfg.lambda, rho0).delta;
            rel[h] = (pert - exact).norm() / exact.norm();
        }
        const double ratio = rel[0] / rel[1];
        ok = ok && rel[0] <= kCoherentMatch && ratio >= kCoherentBandLo && ratio <= kCoherentBandHi;
        detail += fmt::format("a={}: residual {:.3e}, halving ratio {:.3f}; ", a, rel[0], ratio);
    }
    detail += fmt::format("need residual <= {} and ratio in [{}, {}]", kCoherentMatch, kCoherentBandLo, kCoherentBandHi);
    return {ok, detail};
}

Outcome vacuum_oracle() {
    const double L = 25 * pi;
    const double T = 5.0;
    CavityConfig cfg{L, 3, 1.0, 1e-2};
    const auto seg = TrajectorySegment::accelerated(1.0, pi / 2, T);
    const auto tables = compute_tables(seg, cfg, T, true);
    const auto coeffs = vacuum_coefficients(tables.phase, *tables.nested);
    const auto field = TruncatedFieldSpec::uniform(3, 3, FieldPrep::vacuum());
    const BlochVector b0{0.6, 0.0, 0.8};
    double residual[2];
    for (int h = 0; h < 2; ++h) {
        cfg.lambda = 1e-2 / (1 << h);
        const auto exact = exact_evolve(seg, cfg, field, QubitState::from_bloch(b0), T).reduced.bloch() - b0;
        residual[h] = (vacuum_bloch_delta(coeffs, b0, cfg.lambda) - exact).norm();
    }
    const double ratio = residual[0] / residual[1];
    return {ratio >= kVacuumBandLo && ratio <= kVacuumBandHi,
            fmt::format("residual {:.3e} -> {:.3e}, halving ratio {:.3f} (observed order {:.2f}); need ratio in [{}, {}]",
                        residual[0], residual[1], ratio, std::log2(ratio), kVacuumBandLo, kVacuumBandHi)};
}

Outcome rotation_identities() {
    std::mt19937_64 rng(20261016);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const CavityConfig cfg{pi, 3, 1.0, 0.01};
    double worst_angle = 0.0;
    double worst_nz = 0.0;
    double worst_phi = 0.0;
    int degenerate = 0;
    for (int n = 0; n < 1000; ++n) {
        const double a = 2.0 * u(rng);
        const double x0 = 0.05 + 3.0 * u(rng);
        const double room = pi - x0;
        const double t_exit = a == 0.0 ? 10.0 : std::acosh(1.0 + a * room) / a;
        const double T = 0.05 + (std::min(t_exit, 10.0) - 0.05) * u(rng) * 0.999;
        const int mode = 1 + n % 3;
        const auto seg = TrajectorySegment::accelerated(a, x0, T);
        const auto ip = phase_integral(seg, cfg, mode, Sign::Plus, T).value;
        const auto im = phase_integral(seg, cfg, mode, Sign::Minus, T).value;
        const double lambda = 0.001 + 0.02 * u(rng);
        const auto prep = CoherentPrep::polar(mode, 0.1 + 2.0 * u(rng), 2.0 * pi * u(rng));
        const auto r = extract_rotation(ip, im, prep, lambda);
        const double four_lambda_a = 4.0 * lambda * std::abs(r.amplitude);
        worst_angle = std::max(worst_angle, std::abs(r.angle - four_lambda_a) / std::max(1.0, four_lambda_a));
        worst_nz = std::max(worst_nz, std::abs(r.unit_axis().z));
        if (r.degenerate) {
            ++degenerate;
            continue;
        }
        const double s1 = 0.1 + 5.0 * u(rng);
        const double s2 = 0.1 + 5.0 * u(rng);
        const auto by_lambda = extract_rotation(ip, im, prep, s1 * lambda);
        const auto by_alpha = extract_rotation(ip, im, CoherentPrep{mode, s2 * prep.alpha}, lambda);
        worst_phi = std::max({worst_phi, wrap_diff(by_lambda.azimuth, r.azimuth), wrap_diff(by_alpha.azimuth, r.azimuth)});
    }
    const bool ok = worst_angle <= kAngleIdentityTol && worst_nz <= kAngleIdentityTol && worst_phi <= kAzimuthInvarianceTol;
    return {ok, fmt::format("max |delta - 4 lambda |A|| {:.2e}, max |n_z| {:.2e}, max azimuth shift {:.2e} "
                            "({} degenerate skipped)",
                            worst_angle, worst_nz, worst_phi, degenerate)};
}

Outcome order_invariants() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_trace = 0.0;
    double worst_herm = 0.0;
    double worst_vacuum = 0.0;
    for (int n = 0; n < 50; ++n) {
        const CavityConfig cfg{pi, 1 + n % 4, 0.5 + 1.5 * u(rng), 0.01 + 0.04 * u(rng)};
        const double a = 1.5 * u(rng);
        const double t_exit = a == 0.0 ? 10.0 : std::acosh(1.0 + a * (pi - 0.1)) / a;
        const double T = 0.2 + (std::min(t_exit, 10.0) - 0.2) * u(rng) * 0.999;
        const auto seg = TrajectorySegment::accelerated(a, 0.1, T);
        const auto tables = compute_tables(seg, cfg, T, true);
        const auto coeffs = vacuum_coefficients(tables.phase, *tables.nested);
        BlochVector b{2 * u(rng) - 1, 2 * u(rng) - 1, 2 * u(rng) - 1};
        if (b.norm() > 1.0) b = b * (1.0 / b.norm());
        const Mat2 rho0 = QubitState::from_bloch(b).matrix();
        const auto prep = CoherentPrep::polar(1, 1.0 + u(rng), 2 * pi * u(rng));
        const Mat2 first = first_order_correction(tables.phase, FieldPrep::coherent_state(prep), cfg.lambda, rho0);
        const Mat2 second = second_order_correction(coeffs, rho0, cfg.lambda);
        for (const Mat2* m : {&first, &second}) {
            worst_trace = std::max(worst_trace, std::abs(m->trace()));
            worst_herm = std::max(worst_herm, (*m - m->adjoint()).cwiseAbs().maxCoeff());
        }
        const Mat2 vac = vacuum_first_order_check(tables.phase, FieldPrep::vacuum(), cfg.lambda, QubitState::from_bloch(b));
        worst_vacuum = std::max(worst_vacuum, vac.cwiseAbs().maxCoeff());
    }
    const bool ok = worst_trace <= kOrderInvariantTol && worst_herm <= kOrderInvariantTol && worst_vacuum == 0.0;
    return {ok, fmt::format("max |trace| {:.2e}, max hermiticity defect {:.2e}, max vacuum first order {:.1e}",
                            worst_trace, worst_herm, worst_vacuum)};
}

Outcome north_pole() {
    std::mt19937_64 rng(20261016);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int violations = 0;
    double worst = -std::numeric_limits<double>::infinity();
    std::string example;
    for (int n = 0; n < 100; ++n) {
        const int modes = 1 + static_cast<int>(5 * u(rng)) % 5;
        const double omega = 0.5 + 1.5 * u(rng);
        const CavityConfig cfg{pi, modes, omega, 0.01};
        const double x0 = pi * (0.05 + 0.9 * u(rng));
        const double T = 1.0 + 49.0 * u(rng);
        const double bz = 1.0 - u(rng);  // (0, 1]
        const double r = std::sqrt(1.0 - bz * bz) * u(rng);
        const double phi = 2.0 * pi * u(rng);
        const BlochVector b{r * std::cos(phi), r * std::sin(phi), bz};
        const auto seg = TrajectorySegment::inertial(x0, T);
        const auto tables = compute_tables(seg, cfg, T, true);
        const double dz = vacuum_bloch_delta(vacuum_coefficients(tables.phase, *tables.nested), b, cfg.lambda).z;
        if (dz > worst) worst = dz;
        if (dz > 0.0) {
            ++violations;
            if (example.empty()) {
                example = fmt::format("; first violation: modes={} Omega={:.4f} x0={:.4f} T={:.3f} b=({:.3f},{:.3f},{:.3f}) "
                                      "delta b_z={:.3e}",
                                      modes, omega, x0, T, b.x, b.y, b.z, dz);
            }
        }
    }
    return {violations == 0, fmt::format("{} of 100 configurations with delta b_z > 0, max delta b_z {:.3e}{}",
                                          violations, worst, example)};
}

Outcome synthesis_round_trip() {
    const CavityConfig cav{pi, 1, 1.0, 0.01};
    const CavityTemplate tpl{cav, 1};
    SynthesisConstraints c;
    c.a_max = 2.0;
    c.T_max = 20.0;
    c.alpha_max = 5.0;
    c.lambda = cav.lambda;
    const std::vector<GateSegment> forward{{0.5, 3.0, std::polar(5.0, 0.0), 1, cav},
                                           {1.5, 1.2, std::polar(5.0, 1.0), 1, cav},
                                           {1.0, 2.0, std::polar(3.0, -0.5), 1, cav}};
    const NetRotation target = simulate_sequence(forward);
    const auto plan = synthesize(target, tpl, c, 1.0 - kSynthesisFidelity);
    const double f1 = gate_fidelity(target, simulate_sequence(plan.segments));
    const NetRotation z90 = NetRotation::from_axis_angle({0, 0, 1}, pi / 2);
    const auto plan_z = synthesize(z90, tpl, c, 1.0 - kSynthesisFidelity);
    const double f2 = gate_fidelity(z90, simulate_sequence(plan_z.segments));
    bool equatorial = true;
    for (const auto& r : plan_z.rotations) equatorial = equatorial && r.axis.z == 0.0;
    return {f1 >= kSynthesisFidelity && f2 >= kSynthesisFidelity && equatorial,
            fmt::format("3-segment target (angle {:.3f} rad): fidelity {:.9f} with {} segments ({}); "
                        "z90: fidelity {:.9f} with {} equatorial segments ({}); need >= {}",
                        target.angle(), f1, plan.segments.size(), plan.method, f2, plan_z.segments.size(),
                        plan_z.method, kSynthesisFidelity)};
}

Outcome units() {
    const auto si = natural_to_si_acceleration(1.0, UnitSystem::from_gap_hz(1e9));
    const double decades = std::abs(std::log10(si.in_g / kUnitsTargetG));
    return {decades <= 1.0, fmt::format("a = 1 at a 1 GHz gap is {:.3e} g ({:.2f} decades from 1e16 g)", si.in_g, decades)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 axis controllability by acceleration", fig1_acceleration_scan},
        {"2 inertial stagnation vs accelerated variation", fig2_time_scan},
        {"3 oracle equivalence, coherent first order", coherent_oracle},
        {"4 oracle equivalence, vacuum second order", vacuum_oracle},
        {"5 rotation algebra identities", rotation_identities},
        {"6 perturbative-order invariants", order_invariants},
        {"7 inertial north-pole property", north_pole},
        {"8 synthesis round trip", synthesis_round_trip},
        {"9 units check", units},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failed;
        fmt::print("[{}] {}: {} ({:.1f} s)\n", o.pass ? "PASS" : "FAIL", name, o.detail, secs);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
