#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "accelgates/oscillatory.hpp"
#include "accelgates/perturbation.hpp"
#include "accelgates/qubit.hpp"

namespace accelgates {

// Rotations below this angle have no meaningful axis.
inline constexpr double kDegenerateAngle = 1e-14;

// Small Bloch rotation produced by one interaction segment with a coherent field.
struct RotationSpec {
    BlochVector axis;     // unnormalized n = (A + A^*, i(A - A^*), 0)
    double angle = 0.0;   // delta = 2 lambda |n|
    double azimuth = 0.0; // atan2(n_y, n_x) in (-pi, pi]; NaN when degenerate
    bool degenerate = true;
    cplx amplitude{};     // A

    BlochVector unit_axis() const;
};

RotationSpec extract_rotation(cplx i_plus, cplx i_minus, const CoherentPrep& prep, double lambda);

// delta = 4 lambda |alpha| |e^{-i arg alpha} I_+ + e^{i arg alpha} I_-^*|
double rotation_angle_closed_form(cplx i_plus, cplx i_minus, const CoherentPrep& prep, double lambda);

// Unit quaternion (w, x, y, z) for U = w 1 - i (x sigma_x + y sigma_y + z sigma_z).
struct NetRotation {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    static NetRotation identity() { return {}; }
    // R_n(theta) = exp(-i theta/2 n.sigma); axis need not be normalized.
    static NetRotation from_axis_angle(const BlochVector& axis, double angle);
    static NetRotation from_spec(const RotationSpec& spec);
    // Any 2x2 unitary, global phase discarded.
    static NetRotation from_unitary(const Mat2& u);

    // Apply *this first, then `next`.
    NetRotation then(const NetRotation& next) const;
    NetRotation inverse() const { return {w, -x, -y, -z}; }
    double norm() const;
    double angle() const;       // in [0, 2 pi]
    BlochVector axis() const;   // unit; +z when the angle vanishes
    Mat2 unitary() const;
};

// Hamilton product a * b (b acts first).
NetRotation operator*(const NetRotation& a, const NetRotation& b);

// Exact group composition; element 0 acts first. Empty list is the identity.
NetRotation compose(std::span<const RotationSpec> rotations);
NetRotation compose(std::span<const NetRotation> rotations);

// |Tr(U_target^dagger U)| / 2
double gate_fidelity(const NetRotation& target, const NetRotation& actual);

BlochVector rotate(const NetRotation& r, const BlochVector& b);

struct ScanRow {
    double parameter = 0.0;
    double a = 0.0;
    double T = 0.0;
    bool ok = false;
    std::string error;
    cplx i_plus{};
    cplx i_minus{};
    double err_plus = 0.0;
    double err_minus = 0.0;
    RotationSpec rotation;
    double phi_wrapped = 0.0;
    double phi_unwrapped = 0.0;
};

struct SpreadStats {
    double total = 0.0;        // max - min of the unwrapped azimuth over valid rows (radians)
    double first_half = 0.0;   // rows with parameter <= midpoint of the scanned window
    double second_half = 0.0;  // rows with parameter >= midpoint
    int valid_rows = 0;
    int failed_rows = 0;
};

struct ScanTable {
    std::string parameter;  // "a" or "T"
    std::vector<ScanRow> rows;

    SpreadStats spread() const;
};

// Adds multiples of 2 pi so consecutive defined azimuths differ by less than pi.
void unwrap_azimuths(std::vector<ScanRow>& rows);

// Scan over acceleration at fixed T. a = 0 gives an inertial detector at x0;
// a != 0 starts at rest at x0. Rows that leave the cavity are flagged, not fatal.
ScanTable azimuth_scan(const CavityConfig& cfg, const CoherentPrep& prep, double lambda, double T,
                       std::span<const double> a_values, double x0, const QuadratureOptions& opts = {},
                       Execution exec = Execution::Parallel);

// Scan over interaction time on one worldline (inertial or fixed a). T values
// need not be sorted; rows come back in input order.
ScanTable axis_vs_time(const CavityConfig& cfg, const CoherentPrep& prep, double lambda,
                       const TrajectorySegment& trajectory, std::span<const double> T_values,
                       const QuadratureOptions& opts = {}, Execution exec = Execution::Parallel);

// Columns: <parameter>,phi_wrapped,phi_unwrapped,delta,ip_re,ip_im,im_re,im_im,err_flag
void write_scan_csv(std::ostream& os, const ScanTable& table);
// '#'-prefixed footer lines with the spread statistics in degrees.
void write_scan_footer(std::ostream& os, const ScanTable& table);

}  // namespace accelgates
