#include "accelgates/worldline.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "accelgates/errors.hpp"

namespace accelgates {

namespace {

// Below this |a tau| the hyperbolic functions are replaced by their series.
constexpr double kSeriesThreshold = 1e-4;

void check_tau(const TrajectorySegment& seg, double tau) {
    if (!(tau >= 0.0) || tau > seg.duration) {
        throw DomainError("proper time " + std::to_string(tau) + " outside segment [0, " +
                          std::to_string(seg.duration) + "]");
    }
}

bool is_accelerated(const TrajectorySegment& seg) {
    return seg.kind == TrajectoryKind::UniformAcceleration && seg.a != 0.0;
}

}  // namespace

TrajectorySegment TrajectorySegment::inertial(double x0, double duration, double t0) {
    TrajectorySegment seg{TrajectoryKind::Inertial, 0.0, x0, t0, duration};
    seg.validate();
    return seg;
}

TrajectorySegment TrajectorySegment::accelerated(double a, double x0, double duration, double t0) {
    TrajectorySegment seg{TrajectoryKind::UniformAcceleration, a, x0, t0, duration};
    seg.validate();
    return seg;
}

void TrajectorySegment::validate() const {
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
        throw DomainError("segment duration must be finite and >= 0");
    }
    if (!std::isfinite(a) || !std::isfinite(x0) || !std::isfinite(t0)) {
        throw DomainError("segment parameters must be finite");
    }
    if (kind == TrajectoryKind::Inertial && a != 0.0) {
        throw DomainError("inertial segment with nonzero acceleration");
    }
}

SpacetimePoint position(const TrajectorySegment& seg, double tau) {
    check_tau(seg, tau);
    if (!is_accelerated(seg)) {
        return {seg.t0 + tau, seg.x0};
    }
    const double a = seg.a;
    const double u = a * tau;
    if (std::abs(u) < kSeriesThreshold) {
        const double u2 = u * u;
        const double dt = tau * (1.0 + u2 / 6.0 * (1.0 + u2 / 20.0));
        const double dx = 0.5 * a * tau * tau * (1.0 + u2 / 12.0 * (1.0 + u2 / 30.0));
        return {seg.t0 + dt, seg.x0 + dx};
    }
    const double sh = std::sinh(0.5 * u);
    return {seg.t0 + std::sinh(u) / a, seg.x0 + 2.0 * sh * sh / a};
}

double velocity(const TrajectorySegment& seg, double tau) {
    check_tau(seg, tau);
    if (!is_accelerated(seg)) {
        return 0.0;
    }
    return std::tanh(seg.a * tau);
}

double time_dilation(const TrajectorySegment& seg, double tau) {
    check_tau(seg, tau);
    return is_accelerated(seg) ? std::cosh(seg.a * tau) : 1.0;
}

double proper_velocity(const TrajectorySegment& seg, double tau) {
    check_tau(seg, tau);
    return is_accelerated(seg) ? std::sinh(seg.a * tau) : 0.0;
}

double max_displacement(const TrajectorySegment& seg) {
    return std::abs(position(seg, seg.duration).x - seg.x0);
}

TrajectorySegment chain(const TrajectorySegment& prev, TrajectorySegment next) {
    const SpacetimePoint end = position(prev, prev.duration);
    next.x0 = end.x;
    next.t0 = end.t;
    next.validate();
    return next;
}

std::vector<TrajectorySegment> chain_all(std::span<const TrajectorySegment> segments) {
    std::vector<TrajectorySegment> out;
    out.reserve(segments.size());
    for (const auto& seg : segments) {
        out.push_back(out.empty() ? seg : chain(out.back(), seg));
    }
    return out;
}

UnitSystem UnitSystem::from_gap_hz(double hz) { return UnitSystem{2.0 * std::numbers::pi * hz}; }

SiAcceleration natural_to_si_acceleration(double a_natural, const UnitSystem& units) {
    if (!(units.omega_si > 0.0)) {
        throw DomainError("omega_si must be > 0");
    }
    // a~ = a (Omega c / pi)
    const double si = a_natural * units.omega_si * kSpeedOfLight / std::numbers::pi;
    return {si, si / kStandardGravity};
}

}  // namespace accelgates
