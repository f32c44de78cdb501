#pragma once

#include <span>
#include <vector>

namespace accelgates {

// Natural units throughout: c = 1, times in units of 1/Omega.

enum class TrajectoryKind { Inertial, UniformAcceleration };

struct TrajectorySegment {
    TrajectoryKind kind = TrajectoryKind::Inertial;
    double a = 0.0;         // signed proper acceleration; a < 0 accelerates toward -x
    double x0 = 0.0;
    double t0 = 0.0;
    double duration = 0.0;  // proper time

    static TrajectorySegment inertial(double x0, double duration, double t0 = 0.0);
    static TrajectorySegment accelerated(double a, double x0, double duration, double t0 = 0.0);

    void validate() const;
};

struct SpacetimePoint {
    double t;
    double x;
};

// Rindler worldline starting at rest: t = t0 + sinh(a tau)/a, x = x0 + (cosh(a tau) - 1)/a.
SpacetimePoint position(const TrajectorySegment& seg, double tau);

// Coordinate velocity dx/dt.
double velocity(const TrajectorySegment& seg, double tau);

// dt/dtau and dx/dtau (the latter is the proper velocity).
double time_dilation(const TrajectorySegment& seg, double tau);
double proper_velocity(const TrajectorySegment& seg, double tau);

// Largest |x - x0| reached on [0, duration]; motion is monotone so this is the end point.
double max_displacement(const TrajectorySegment& seg);

// Copy of `next` whose (x0, t0) are moved to where `prev` ends.
TrajectorySegment chain(const TrajectorySegment& prev, TrajectorySegment next);
std::vector<TrajectorySegment> chain_all(std::span<const TrajectorySegment> segments);

struct UnitSystem {
    double omega_si = 0.0;  // detector gap as an angular frequency, rad/s

    static UnitSystem from_gap_hz(double hz);
};

struct SiAcceleration {
    double meters_per_s2;
    double in_g;
};

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kStandardGravity = 9.80665;

SiAcceleration natural_to_si_acceleration(double a_natural, const UnitSystem& units);

}  // namespace accelgates
