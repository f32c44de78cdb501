#pragma once

#include <string>
#include <vector>

#include "accelgates/cavity.hpp"
#include "accelgates/execution.hpp"
#include "accelgates/oscillatory.hpp"
#include "accelgates/rotation.hpp"

namespace accelgates {

// One cavity of the array: geometry, gap and the mode carrying the coherent state.
struct CavityTemplate {
    CavityConfig cavity;  // lambda is taken from the constraints
    int mode = 1;

    void validate() const;
};

// Detector crosses one cavity starting at rest at a wall: x0 = 0 for a >= 0, x0 = L for a < 0.
struct GateSegment {
    double a = 0.0;
    double T = 0.0;
    cplx alpha{};
    int mode = 1;
    CavityConfig cavity;

    TrajectorySegment trajectory() const;
    // Validity bounds: lambda |alpha| <= 0.05, 0 <= T <= 100, inside the cavity. Throws DomainError.
    void validate() const;
};

RotationSpec segment_rotation(const GateSegment& seg, const QuadratureOptions& opts = {});

struct SynthesisConstraints {
    double a_max = 1.0;
    double T_max = 10.0;
    double lambda = 1e-2;
    double alpha_max = 1.0;  // clamped so that lambda alpha_max <= 0.05
    int max_segments = 256;
    int grid_a = 16;         // grid points along (0, a_max]
    int grid_T = 16;         // grid points along (0, T_max]
    double alpha_phase = 0.0;

    // Throws PlanningError on infeasible values.
    void validate() const;
};

// One cached grid point of phase 1.
struct GridPoint {
    double a = 0.0;
    double T = 0.0;
    cplx i_plus{};
    cplx i_minus{};
    double azimuth = 0.0;    // axis azimuth at alpha phase = alpha_phase
    double max_angle = 0.0;  // rotation angle at |alpha| = alpha_max
};

struct RotationGrid {
    std::vector<GridPoint> points;  // ordered by a, then T
    int skipped = 0;                // grid points outside the cavity or failing to integrate
    double axis_spread = 0.0;       // largest separation between axis lines (radians, <= pi/2)
};

RotationGrid build_rotation_grid(const CavityTemplate& tpl, const SynthesisConstraints& c,
                                 const QuadratureOptions& opts = {}, Execution exec = Execution::Parallel);

struct GateSequence {
    std::vector<GateSegment> segments;       // time order
    std::vector<RotationSpec> rotations;     // per segment, recomputed from the segments
    NetRotation target;
    NetRotation predicted;
    double fidelity = 1.0;
    bool success = true;
    std::string method;                      // "identity", "euler", "alternating", "best-effort"
    double axis_spread = 0.0;
    double axis_separation = 0.0;            // between the two axes used
    int grid_points = 0;
    std::vector<std::string> notes;
};

// Plans a segment sequence whose composed rotation approximates the target.
// Throws PlanningError when constraints are infeasible or the axes are too close to parallel.
GateSequence synthesize(const NetRotation& target, const CavityTemplate& tpl, const SynthesisConstraints& c,
                        double tol_fidelity = 1e-3, const QuadratureOptions& opts = {},
                        Execution exec = Execution::Parallel);

// Re-simulates every segment and composes the results (element 0 first).
NetRotation simulate_sequence(const std::vector<GateSegment>& segments, const QuadratureOptions& opts = {});

}  // namespace accelgates
