#pragma once

#include <complex>

#include <Eigen/Core>

namespace accelgates {

// 2x2 operators on the detector. Index 0 is the excited state |e>, index 1 the
// ground state |g>, so sigma_z |e> = +|e> and b_z = +1 is the north pole.
using Mat2 = Eigen::Matrix2cd;

namespace pauli {
const Mat2& identity();
const Mat2& x();
const Mat2& y();
const Mat2& z();
// Monopole ladder operators in the unnormalized convention sigma_pm = sigma_x +/- i sigma_y.
const Mat2& raising();
const Mat2& lowering();
}  // namespace pauli

struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const;
    BlochVector operator+(const BlochVector& o) const { return {x + o.x, y + o.y, z + o.z}; }
    BlochVector operator-(const BlochVector& o) const { return {x - o.x, y - o.y, z - o.z}; }
    BlochVector operator*(double s) const { return {x * s, y * s, z * s}; }
};

BlochVector cross(const BlochVector& a, const BlochVector& b);
double dot(const BlochVector& a, const BlochVector& b);

// b_k = Tr(sigma_k M) (real parts; M need not have unit trace).
BlochVector bloch_components(const Mat2& m);
// (t 1 + b . sigma) / 2
Mat2 from_components(double trace, const BlochVector& b);

struct StateDefects {
    double trace_error;       // |Tr rho - 1|
    double hermiticity_error; // max |rho - rho^dagger|
    double min_eigenvalue;
};

class QubitState {
public:
    QubitState() : rho_(from_components(1.0, {0.0, 0.0, -1.0})) {}

    // Both factories enforce the density-operator invariants.
    static QubitState from_bloch(const BlochVector& b);
    static QubitState from_matrix(const Mat2& rho);
    // Perturbative results may leave the Bloch ball at higher order; no positivity check.
    static QubitState perturbative(const Mat2& rho);

    const Mat2& matrix() const { return rho_; }
    BlochVector bloch() const { return bloch_components(rho_); }
    StateDefects defects() const;
    bool is_pure(double tol = 1e-12) const;

private:
    explicit QubitState(const Mat2& rho) : rho_(rho) {}
    Mat2 rho_;
};

StateDefects defects_of(const Mat2& rho);

}  // namespace accelgates
