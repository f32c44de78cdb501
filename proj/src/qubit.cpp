#include "accelgates/qubit.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "accelgates/errors.hpp"

namespace accelgates {

namespace pauli {

namespace {
using c = std::complex<double>;
Mat2 make(c a, c b, c d, c e) {
    Mat2 m;
    m << a, b, d, e;
    return m;
}
}  // namespace

const Mat2& identity() {
    static const Mat2 m = make(1, 0, 0, 1);
    return m;
}
const Mat2& x() {
    static const Mat2 m = make(0, 1, 1, 0);
    return m;
}
const Mat2& y() {
    static const Mat2 m = make(0, c(0, -1), c(0, 1), 0);
    return m;
}
const Mat2& z() {
    static const Mat2 m = make(1, 0, 0, -1);
    return m;
}
const Mat2& raising() {
    static const Mat2 m = x() + c(0, 1) * y();
    return m;
}
const Mat2& lowering() {
    static const Mat2 m = x() - c(0, 1) * y();
    return m;
}

}  // namespace pauli

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

BlochVector cross(const BlochVector& a, const BlochVector& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double dot(const BlochVector& a, const BlochVector& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

BlochVector bloch_components(const Mat2& m) {
    // Tr(sigma_x M) = M01 + M10, Tr(sigma_y M) = i(M01 - M10), Tr(sigma_z M) = M00 - M11
    const auto bx = m(0, 1) + m(1, 0);
    const auto by = std::complex<double>(0, 1) * (m(0, 1) - m(1, 0));
    const auto bz = m(0, 0) - m(1, 1);
    return {bx.real(), by.real(), bz.real()};
}

Mat2 from_components(double trace, const BlochVector& b) {
    using c = std::complex<double>;
    Mat2 m;
    m << c(0.5 * (trace + b.z), 0.0), c(0.5 * b.x, -0.5 * b.y), c(0.5 * b.x, 0.5 * b.y),
        c(0.5 * (trace - b.z), 0.0);
    return m;
}

StateDefects defects_of(const Mat2& rho) {
    StateDefects d{};
    d.trace_error = std::abs(rho.trace() - 1.0);
    d.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    const Mat2 herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat2> es(herm, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    return d;
}

QubitState QubitState::from_bloch(const BlochVector& b) {
    if (!(b.norm() <= 1.0 + 1e-10)) throw DomainError("Bloch vector longer than 1");
    return QubitState(from_components(1.0, b));
}

QubitState QubitState::from_matrix(const Mat2& rho) {
    const StateDefects d = defects_of(rho);
    if (d.trace_error > 1e-12) throw DomainError("density matrix trace differs from 1");
    if (d.hermiticity_error > 1e-12) throw DomainError("density matrix is not Hermitian");
    if (d.min_eigenvalue < -1e-10) throw DomainError("density matrix has a negative eigenvalue");
    return QubitState(rho);
}

QubitState QubitState::perturbative(const Mat2& rho) { return QubitState(rho); }

StateDefects QubitState::defects() const { return defects_of(rho_); }

bool QubitState::is_pure(double tol) const { return std::abs(bloch().norm() - 1.0) <= tol; }

}  // namespace accelgates
