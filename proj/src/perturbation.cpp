#include "accelgates/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "accelgates/errors.hpp"

namespace accelgates {

namespace {

const cplx kI{0.0, 1.0};

}  // namespace

CoherentPrep CoherentPrep::polar(int mode, double magnitude, double phase) {
    if (!(magnitude >= 0.0)) throw DomainError("coherent amplitude magnitude must be >= 0");
    return {mode, std::polar(magnitude, phase)};
}

void CoherentPrep::validate(int n_modes) const {
    if (mode < 1 || mode > n_modes) {
        throw DomainError(fmt::format("coherent mode {} outside [1, {}]", mode, n_modes));
    }
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) throw DomainError("alpha must be finite");
}

bool CoherentPrep::perturbative(double lambda) const { return lambda * std::abs(alpha) <= kCoherentValidityLimit; }

ModeVacuumCoefficients mode_vacuum_coefficients(int mode, cplx ip, cplx im, cplx mpp, cplx mmm) {
    ModeVacuumCoefficients c;
    c.mode = mode;
    const double pp = std::norm(ip);
    const double mm = std::norm(im);
    const cplx cross = ip * std::conj(im);  // I+ I-^*
    c.a_x = pp + mm + 2.0 * cross.real();
    c.a_y = pp + mm - 2.0 * cross.real();
    c.a_xy = kI * ((cross - std::conj(cross)) - pp + mm);
    c.a_yx = std::conj(c.a_xy);
    c.b_plus = 2.0 * cross.real();
    c.b_minus = cplx(0.0, 2.0 * cross.imag());
    c.d_plus = pp + mm;
    c.d_minus = pp - mm;
    c.c_one = -2.0 * (mmm + mpp);
    c.c_z = -2.0 * (mmm - mpp);
    return c;
}

VacuumCoefficients vacuum_coefficients(const PhaseIntegralTable& table, const MIntegralTable& nested) {
    if (table.T != nested.T) {
        throw ConsistencyError(fmt::format("phase table at T = {} but nested table at T = {}", table.T, nested.T));
    }
    if (table.modes.size() != nested.modes.size()) {
        throw ConsistencyError("phase and nested tables cover different numbers of modes");
    }
    VacuumCoefficients out;
    out.T = table.T;
    out.modes.reserve(table.modes.size());
    for (std::size_t r = 0; r < table.modes.size(); ++r) {
        const auto& i = table.modes[r];
        const auto& m = nested.modes[r];
        if (i.mode != m.mode) {
            throw ConsistencyError(fmt::format("mode {} of the phase table paired with mode {}", i.mode, m.mode));
        }
        out.modes.push_back(mode_vacuum_coefficients(i.mode, i.i_plus, i.i_minus, m.m_plus_plus, m.m_minus_minus));
    }
    return out;
}

BlochVector vacuum_bloch_delta(const VacuumCoefficients& coeffs, const BlochVector& b0, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("coupling must be >= 0");
    double sx = 0.0;
    double sy = 0.0;
    double sz = 0.0;
    for (const auto& c : coeffs.modes) {
        // i B_- is real since B_- is purely imaginary.
        const double ib_minus = (kI * c.b_minus).real();
        sx += (c.b_plus + c.c_one.real()) * b0.x + (ib_minus + c.c_z.imag()) * b0.y;
        sy += (c.c_one.real() - c.b_plus) * b0.y + (ib_minus - c.c_z.imag()) * b0.x;
        sz += (c.c_one.real() - c.d_plus) * b0.z + c.d_minus + c.c_z.real();
    }
    const double f = 2.0 * lambda * lambda;
    return {f * sx, f * sy, f * sz};
}

Mat2 second_order_correction(const VacuumCoefficients& coeffs, const Mat2& rho0, double lambda) {
    using namespace pauli;
    Mat2 out = Mat2::Zero();
    for (const auto& c : coeffs.modes) {
        out += c.a_x * (x() * rho0 * x()) + c.a_y * (y() * rho0 * y()) + c.a_xy * (x() * rho0 * y()) +
               c.a_yx * (y() * rho0 * x());
        out += 2.0 * c.c_one.real() * rho0 + c.c_z * (z() * rho0) + std::conj(c.c_z) * (rho0 * z());
    }
    return lambda * lambda * out;
}

Mat2 first_order_correction(const PhaseIntegralTable& table, const FieldPrep& field, double lambda,
                            const Mat2& rho0) {
    Mat2 gen = Mat2::Zero();
    for (const auto& m : table.modes) {
        cplx a{};
        if (field.kind == FieldKind::Coherent && field.coherent.mode == m.mode) a = field.coherent.alpha;
        const cplx a_dag = std::conj(a);
        gen += (m.i_plus * a_dag + std::conj(m.i_minus) * a) * pauli::raising() +
               (std::conj(m.i_plus) * a + m.i_minus * a_dag) * pauli::lowering();
    }
    const Mat2 half = (lambda / kI) * gen * rho0;
    return half + half.adjoint();
}

Mat2 vacuum_first_order_check(const PhaseIntegralTable& table, const FieldPrep& field, double lambda,
                              const QubitState& rho0) {
    if (field.kind != FieldKind::Vacuum) {
        throw DomainError("first-order vanishing only holds for a vacuum field");
    }
    return first_order_correction(table, field, lambda, rho0.matrix());
}

cplx rotation_amplitude(cplx i_plus, cplx i_minus, cplx alpha) {
    return std::conj(alpha) * i_plus + alpha * std::conj(i_minus);
}

CoherentEvolution coherent_first_order(cplx i_plus, cplx i_minus, const CoherentPrep& prep, double lambda,
                                       const QubitState& rho0) {
    if (!(lambda >= 0.0)) throw DomainError("coupling must be >= 0");
    const cplx A = rotation_amplitude(i_plus, i_minus, prep.alpha);
    // The commutator with n.sigma, n = (A + A^*, i(A - A^*), 0), moves b by 2 lambda n x b.
    const BlochVector n{2.0 * A.real(), -2.0 * A.imag(), 0.0};
    const BlochVector b0 = rho0.bloch();
    const BlochVector delta = cross(n, b0) * (2.0 * lambda);
    const double trace = rho0.matrix().trace().real();
    return {QubitState::perturbative(from_components(trace, b0 + delta)), delta, prep.perturbative(lambda)};
}

CoherentEvolution coherent_with_vacuum_correction(const PhaseIntegralTable& table, const CoherentPrep& prep,
                                                  const VacuumCoefficients& coeffs, double lambda,
                                                  const QubitState& rho0) {
    const auto& m = table.mode(prep.mode);
    CoherentEvolution first = coherent_first_order(m.i_plus, m.i_minus, prep, lambda, rho0);
    const Mat2 second = second_order_correction(coeffs, rho0.matrix(), lambda);
    const Mat2 rho = first.state.matrix() + second;
    return {QubitState::perturbative(rho), bloch_components(rho - rho0.matrix()), first.within_validity};
}

ModeSumResult vacuum_delta_mode_sum(const TrajectorySegment& seg, const CavityConfig& cfg, double T,
                                    const BlochVector& b0, int max_modes, double rel_tol,
                                    const QuadratureOptions& opts, Execution exec) {
    if (max_modes < cfg.n_modes) throw DomainError("max_modes below the starting mode count");
    ModeSumResult out;
    VacuumCoefficients coeffs;
    coeffs.T = T;
    CavityConfig grow = cfg;
    int computed = 0;
    BlochVector previous{};
    bool have_previous = false;
    int n = cfg.n_modes;
    while (true) {
        grow.n_modes = n;
        const IntegralTables tables = compute_tables(seg, grow, T, true, opts, exec, computed + 1);
        const VacuumCoefficients added = vacuum_coefficients(tables.phase, *tables.nested);
        coeffs.modes.insert(coeffs.modes.end(), added.modes.begin(), added.modes.end());
        computed = n;
        const BlochVector delta = vacuum_bloch_delta(coeffs, b0, grow.lambda);
        out.history.emplace_back(n, delta);
        out.delta = delta;
        out.modes_used = n;
        if (have_previous) {
            const double scale = std::max(delta.norm(), std::numeric_limits<double>::min());
            if ((delta - previous).norm() <= rel_tol * scale || delta.norm() == 0.0) {
                out.converged = true;
                break;
            }
        }
        previous = delta;
        have_previous = true;
        if (n >= max_modes) break;
        n = std::min(2 * n, max_modes);
    }
    return out;
}

std::vector<std::string> validity_warnings(double lambda, double alpha_magnitude, double T) {
    std::vector<std::string> out;
    if (lambda * alpha_magnitude > kCoherentValidityLimit) {
        out.push_back(fmt::format("lambda*|alpha| = {:.3g} exceeds the perturbative limit {}",
                                  lambda * alpha_magnitude, kCoherentValidityLimit));
    }
    if (T > kInteractionTimeLimit) {
        out.push_back(fmt::format("interaction time T = {:.3g} exceeds {}", T, kInteractionTimeLimit));
    }
    return out;
}

}  // namespace accelgates
