#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "accelgates/errors.hpp"
#include "accelgates/synthesis.hpp"

using namespace accelgates;
constexpr double pi = std::numbers::pi;

namespace {

CavityTemplate unit_cavity() { return {CavityConfig{pi, 1, 1.0, 0.0}, 1}; }

SynthesisConstraints roomy() {
    SynthesisConstraints c;
    c.a_max = 2.0;
    c.T_max = 20.0;
    c.alpha_max = 5.0;
    return c;
}

void check_plan(const GateSequence& seq, const SynthesisConstraints& c) {
    const double amax = std::min(c.alpha_max, kCoherentValidityLimit / c.lambda);
    CHECK(seq.segments.size() <= static_cast<std::size_t>(c.max_segments));
    CHECK(seq.rotations.size() == seq.segments.size());
    for (const auto& s : seq.segments) {
        CHECK_NOTHROW(s.validate());
        CHECK(std::abs(s.a) <= c.a_max * (1.0 + 1e-12));
        CHECK(s.T <= c.T_max * (1.0 + 1e-12));
        CHECK(std::abs(s.alpha) <= amax * (1.0 + 1e-12));
        CHECK(s.cavity.lambda == c.lambda);
    }
}

}  // namespace

TEST_CASE("segment rotation is the extracted rotation of its own integrals") {
    GateSegment seg{1.0, 2.0, std::polar(0.8, 0.3), 1, CavityConfig{pi, 1, 1.0, 0.01}};
    const auto r = segment_rotation(seg);
    const auto traj = seg.trajectory();
    CHECK(traj.x0 == 0.0);
    const auto ip = phase_integral(traj, seg.cavity, 1, Sign::Plus, 2.0);
    const auto im = phase_integral(traj, seg.cavity, 1, Sign::Minus, 2.0);
    const auto ref = extract_rotation(ip.value, im.value, CoherentPrep{1, seg.alpha}, 0.01);
    CHECK(r.angle == ref.angle);
    CHECK(r.azimuth == ref.azimuth);
    GateSegment back = seg;
    back.a = -1.0;
    CHECK(back.trajectory().x0 == pi);
    // Mirror image: same angle.
    CHECK(segment_rotation(back).angle == doctest::Approx(r.angle).epsilon(1e-9));
}

TEST_CASE("segment validity bounds") {
    const CavityConfig cfg{pi, 1, 1.0, 0.01};
    CHECK_NOTHROW((GateSegment{1.0, 2.0, 5.0, 1, cfg}.validate()));
    CHECK_THROWS_AS((GateSegment{1.0, 2.0, 5.1, 1, cfg}.validate()), DomainError);
    CHECK_THROWS_AS((GateSegment{1.0, 3.0, 1.0, 1, cfg}.validate()), DomainError);
    CHECK_THROWS_AS((GateSegment{0.0, 101.0, 1.0, 1, cfg}.validate()), DomainError);
    CHECK_THROWS_AS((GateSegment{1.0, -1.0, 1.0, 1, cfg}.validate()), DomainError);
    CHECK_THROWS_AS((GateSegment{1.0, 2.0, 1.0, 2, cfg}.validate()), DomainError);
}

TEST_CASE("infeasible constraints") {
    const auto z90 = NetRotation::from_axis_angle({0, 0, 1}, pi / 2);
    auto c = roomy();
    c.a_max = 0.0;
    CHECK_THROWS_AS(synthesize(z90, unit_cavity(), c), PlanningError);
    c = roomy();
    c.alpha_max = 0.0;
    CHECK_THROWS_AS(synthesize(z90, unit_cavity(), c), PlanningError);
    c = roomy();
    c.max_segments = 0;
    CHECK_THROWS_AS(synthesize(z90, unit_cavity(), c), PlanningError);
    CHECK_THROWS_AS(synthesize(z90, unit_cavity(), roomy(), 0.0), PlanningError);
    CHECK_THROWS_AS(synthesize(NetRotation{2.0, 0.0, 0.0, 0.0}, unit_cavity(), roomy()), PlanningError);
}

TEST_CASE("nearly parallel axes are refused") {
    // One interaction time and tiny accelerations: every axis points the same way.
    auto c = roomy();
    c.a_max = 1e-3;
    c.T_max = 2.0;
    c.grid_T = 1;
    CHECK(build_rotation_grid(unit_cavity(), c).axis_spread < 10.0 * pi / 180.0);
    CHECK_THROWS_AS(synthesize(NetRotation::from_axis_angle({0, 0, 1}, pi / 2), unit_cavity(), c), PlanningError);
}

TEST_CASE("identity needs no segments") {
    const auto seq = synthesize(NetRotation::identity(), unit_cavity(), roomy());
    CHECK(seq.method == "identity");
    CHECK(seq.segments.empty());
    CHECK(seq.fidelity == 1.0);
    CHECK(seq.success);
}

TEST_CASE("quarter turn about z") {
    const auto c = roomy();
    const auto target = NetRotation::from_axis_angle({0, 0, 1}, pi / 2);
    const auto seq = synthesize(target, unit_cavity(), c);
    CHECK(seq.success);
    CHECK(seq.fidelity >= 1.0 - 1e-3);
    CHECK(seq.axis_spread >= 10.0 * pi / 180.0);
    check_plan(seq, c);
    const auto replay = simulate_sequence(seq.segments);
    CHECK(gate_fidelity(replay, seq.predicted) >= 1.0 - 1e-8);
    CHECK(gate_fidelity(replay, target) >= 1.0 - 1e-3);
}

TEST_CASE("random targets round trip") {
    const auto c = roomy();
    std::mt19937_64 rng(41);
    std::normal_distribution<double> g;
    for (int n = 0; n < 3; ++n) {
        NetRotation t{g(rng), g(rng), g(rng), g(rng)};
        const double norm = t.norm();
        t = {t.w / norm, t.x / norm, t.y / norm, t.z / norm};
        const auto seq = synthesize(t, unit_cavity(), c);
        CHECK(seq.success);
        CHECK(gate_fidelity(simulate_sequence(seq.segments), t) >= 1.0 - 1e-3);
        check_plan(seq, c);
    }
}

TEST_CASE("unitary target with a global phase") {
    Mat2 h;
    h << 1.0, 1.0, 1.0, -1.0;
    h *= cplx(0.0, 1.0) / std::sqrt(2.0);
    const auto target = NetRotation::from_unitary(h);
    const auto seq = synthesize(target, unit_cavity(), roomy());
    CHECK(seq.success);
    const Mat2 u = simulate_sequence(seq.segments).unitary();
    CHECK(std::abs((h.adjoint() * u).trace()) / 2.0 >= 1.0 - 1e-3);
}

TEST_CASE("segment budget") {
    const auto target = NetRotation::from_axis_angle({0, 0, 1}, pi / 2);
    double previous = 0.0;
    for (int budget : {1, 4, 16, 64, 256}) {
        auto c = roomy();
        c.max_segments = budget;
        const auto seq = synthesize(target, unit_cavity(), c);
        CHECK(seq.segments.size() <= static_cast<std::size_t>(budget));
        CHECK(seq.fidelity >= previous);
        CHECK(seq.fidelity >= gate_fidelity(target, NetRotation::identity()));
        if (!seq.success) CHECK(seq.method == "best-effort");
        previous = seq.fidelity;
    }
}

TEST_CASE("planning is deterministic and execution independent") {
    const auto target = NetRotation::from_axis_angle({1, 1, 0}, 1.0);
    const auto a = synthesize(target, unit_cavity(), roomy(), 1e-3, {}, Execution::Parallel);
    const auto b = synthesize(target, unit_cavity(), roomy(), 1e-3, {}, Execution::Serial);
    REQUIRE(a.segments.size() == b.segments.size());
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
        CHECK(a.segments[i].a == b.segments[i].a);
        CHECK(a.segments[i].T == b.segments[i].T);
        CHECK(a.segments[i].alpha == b.segments[i].alpha);
    }
    CHECK(a.fidelity == b.fidelity);
    CHECK(a.method == b.method);
}

TEST_CASE("grid points carry their own rotations") {
    const auto c = roomy();
    const auto tpl = unit_cavity();
    const auto grid = build_rotation_grid(tpl, c);
    REQUIRE(!grid.points.empty());
    CHECK(grid.axis_spread <= pi / 2 + 1e-12);
    const double amax = std::min(c.alpha_max, kCoherentValidityLimit / c.lambda);
    for (const auto& p : grid.points) {
        const auto r = extract_rotation(p.i_plus, p.i_minus, CoherentPrep::polar(tpl.mode, amax, c.alpha_phase), c.lambda);
        CHECK(r.angle == doctest::Approx(p.max_angle).epsilon(1e-14));
        CHECK(p.a > 0.0);
        CHECK(p.T > 0.0);
    }
}

TEST_CASE("trivial segments") {
    const CavityConfig cfg{pi, 1, 1.0, 0.01};
    const auto silent = segment_rotation(GateSegment{1.0, 2.0, 0.0, 1, cfg});
    CHECK(silent.angle == 0.0);
    CHECK(silent.degenerate);
    const auto instant = segment_rotation(GateSegment{1.0, 0.0, 3.0, 1, cfg});
    CHECK(instant.angle == 0.0);
    CHECK(gate_fidelity(NetRotation::from_spec(instant), NetRotation::identity()) == 1.0);
}

TEST_CASE("forward-simulated sequence is recovered") {
    const auto c = roomy();
    const CavityConfig cav{pi, 1, 1.0, c.lambda};
    const std::vector<GateSegment> forward{{0.5, 3.0, std::polar(5.0, 0.0), 1, cav},
                                           {1.5, 1.2, std::polar(5.0, 1.0), 1, cav},
                                           {1.0, 2.0, std::polar(3.0, -0.5), 1, cav}};
    const auto target = simulate_sequence(forward);
    CHECK(target.angle() > 0.1);
    const auto seq = synthesize(target, unit_cavity(), c);
    CHECK(seq.success);
    CHECK(gate_fidelity(simulate_sequence(seq.segments), target) >= 0.999);
}
