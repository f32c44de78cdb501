#pragma once

#include <complex>
#include <string>
#include <vector>

#include "accelgates/oscillatory.hpp"
#include "accelgates/qubit.hpp"

namespace accelgates {

// Upper end of the perturbative regime for lambda |alpha|, and for the interaction time.
inline constexpr double kCoherentValidityLimit = 0.05;
inline constexpr double kInteractionTimeLimit = 100.0;

struct CoherentPrep {
    int mode = 1;
    cplx alpha{};

    static CoherentPrep polar(int mode, double magnitude, double phase);
    void validate(int n_modes) const;
    // lambda |alpha| <= 0.05
    bool perturbative(double lambda) const;
};

enum class FieldKind { Vacuum, Coherent };

struct FieldPrep {
    FieldKind kind = FieldKind::Vacuum;
    CoherentPrep coherent{};

    static FieldPrep vacuum() { return {}; }
    static FieldPrep coherent_state(const CoherentPrep& prep) { return {FieldKind::Coherent, prep}; }
};

// Per-mode algebra of the second-order vacuum block.
struct ModeVacuumCoefficients {
    int mode = 0;
    double a_x = 0.0;
    double a_y = 0.0;
    cplx a_xy{};
    cplx a_yx{};
    double b_plus = 0.0;  // I+ I-^* + I+^* I-
    cplx b_minus{};       // I+ I-^* - I+^* I-, purely imaginary
    double d_plus = 0.0;  // |I+|^2 + |I-|^2
    double d_minus = 0.0; // |I+|^2 - |I-|^2
    cplx c_one{};         // -2 (M_{--} + M_{++})
    cplx c_z{};           // -2 (M_{--} - M_{++})
};

struct VacuumCoefficients {
    double T = 0.0;
    std::vector<ModeVacuumCoefficients> modes;
};

ModeVacuumCoefficients mode_vacuum_coefficients(int mode, cplx i_plus, cplx i_minus, cplx m_plus_plus,
                                                cplx m_minus_minus);

// Throws ConsistencyError when the two tables disagree on T or on the mode set.
VacuumCoefficients vacuum_coefficients(const PhaseIntegralTable& table, const MIntegralTable& nested);

// Bloch-vector change at second order for a field starting in the vacuum, summed over modes.
BlochVector vacuum_bloch_delta(const VacuumCoefficients& coeffs, const BlochVector& b0, double lambda);

// Tr_F rho^(2) as an operator: lambda^2 sum_j [A-block + C-block + h.c. of the C-block].
Mat2 second_order_correction(const VacuumCoefficients& coeffs, const Mat2& rho0, double lambda);

// Tr_F rho^(1) for any product field state built from vacuum and one coherent mode,
// assembled from <a_j> and <a_j^dagger> of the field.
Mat2 first_order_correction(const PhaseIntegralTable& table, const FieldPrep& field, double lambda,
                            const Mat2& rho0);

// Returns the (identically zero) first-order reduced correction for a vacuum field.
// Refuses coherent preparations.
Mat2 vacuum_first_order_check(const PhaseIntegralTable& table, const FieldPrep& field, double lambda,
                              const QubitState& rho0);

// A = alpha^* I_+ + alpha I_-^*
cplx rotation_amplitude(cplx i_plus, cplx i_minus, cplx alpha);

struct CoherentEvolution {
    QubitState state;
    BlochVector delta;
    bool within_validity = true;  // lambda |alpha| <= 0.05
};

// rho_T = rho0 + (lambda/i)[(A + A^*) sigma_x rho0 + i(A - A^*) sigma_y rho0 - h.c.]
CoherentEvolution coherent_first_order(cplx i_plus, cplx i_minus, const CoherentPrep& prep, double lambda,
                                       const QubitState& rho0);

// Coherent first order plus the vacuum-like second-order block of every mode,
// for estimating the mixedness introduced along with the rotation.
CoherentEvolution coherent_with_vacuum_correction(const PhaseIntegralTable& table, const CoherentPrep& prep,
                                                  const VacuumCoefficients& coeffs, double lambda,
                                                  const QubitState& rho0);

struct ModeSumResult {
    BlochVector delta;
    int modes_used = 0;
    bool converged = false;
    std::vector<std::pair<int, BlochVector>> history;  // (n_modes, delta) per doubling
};

// Doubles the number of modes from cfg.n_modes until ||delta b|| moves by less
// than rel_tol (relative), or max_modes is reached (converged = false).
ModeSumResult vacuum_delta_mode_sum(const TrajectorySegment& seg, const CavityConfig& cfg, double T,
                                    const BlochVector& b0, int max_modes, double rel_tol = 1e-6,
                                    const QuadratureOptions& opts = {}, Execution exec = Execution::Parallel);

// Human-readable warnings for runs outside the perturbative regime.
std::vector<std::string> validity_warnings(double lambda, double alpha_magnitude, double T);

}  // namespace accelgates
