#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "accelgates/cavity.hpp"
#include "accelgates/execution.hpp"
#include "accelgates/worldline.hpp"

namespace accelgates {

using cplx = std::complex<double>;

// Sign of the gap term in the phase: +1 pairs sigma+ with a_j^dagger
// (counter-rotating), -1 pairs sigma- with a_j^dagger (rotating).
enum class Sign : int { Plus = 1, Minus = -1 };

inline constexpr double kMaxPhasePerPanel = 0.78539816339744830962;  // pi/4

struct QuadratureOptions {
    double tol = 1e-10;                // absolute target for the whole integral
    std::int64_t max_evals = 10'000'000;
    bool record_panels = false;

    // max_evals from ACCELGATES_MAX_EVALS when set and valid.
    static QuadratureOptions from_environment();
};

struct Panel {
    double start;
    double width;
};

struct IntegralResult {
    cplx value{};
    double error = 0.0;
    std::int64_t evaluations = 0;
    std::vector<Panel> panels;  // accepted panels, only with record_panels
};

// e^{i[s Omega tau + omega_j t(tau)]} sin(k_j x(tau))
cplx integrand(const TrajectorySegment& seg, const CavityConfig& cfg, int j, Sign s, double tau);

// Upper bound of the total instantaneous phase rate of the integrand
// (gap term, field term and the spatial oscillation of the mode profile).
double phase_rate_bound(const TrajectorySegment& seg, const CavityConfig& cfg, int j, double tau);

// I_{s,j}(T) = int_0^T integrand dtau.
IntegralResult phase_integral(const TrajectorySegment& seg, const CavityConfig& cfg, int j, Sign s,
                              double T, const QuadratureOptions& opts = {});

// Same integrand over [tau_begin, tau_end] of the segment's proper time.
IntegralResult phase_integral(const TrajectorySegment& seg, const CavityConfig& cfg, int j, Sign s,
                              double tau_begin, double tau_end, const QuadratureOptions& opts);

// I_{s,j}(tau) at every requested time (sorted, within the segment), in one forward sweep.
std::vector<IntegralResult> phase_integral_grid(const TrajectorySegment& seg, const CavityConfig& cfg,
                                                int j, Sign s, std::span<const double> taus,
                                                const QuadratureOptions& opts = {});

struct NestedIntegralResult {
    cplx value{};          // M_{j,outer,inner}(T)
    cplx inner_total{};    // I_{inner,j}(T), a by-product of the sweep
    double error = 0.0;
    double inner_error = 0.0;
    std::int64_t evaluations = 0;
    std::vector<Panel> panels;
};

// M_{j,outer,inner} = int_0^T I_{inner,j}(tau) d/dtau I_{outer,j}(tau)^* dtau,
// computed in a single sweep that carries the cumulative inner integral.
NestedIntegralResult m_integral(const TrajectorySegment& seg, const CavityConfig& cfg, int j, Sign outer,
                                Sign inner, double T, const QuadratureOptions& opts = {});

struct ModeIntegrals {
    int mode = 0;
    cplx i_plus{};
    cplx i_minus{};
    double err_plus = 0.0;
    double err_minus = 0.0;
    std::int64_t evals_plus = 0;
    std::int64_t evals_minus = 0;
};

struct PhaseIntegralTable {
    double T = 0.0;
    std::vector<ModeIntegrals> modes;

    const ModeIntegrals& mode(int j) const;
};

struct ModeNestedIntegrals {
    int mode = 0;
    cplx m_plus_plus{};
    cplx m_minus_minus{};
    double err_plus_plus = 0.0;
    double err_minus_minus = 0.0;
};

struct MIntegralTable {
    double T = 0.0;
    std::vector<ModeNestedIntegrals> modes;
};

struct IntegralTables {
    PhaseIntegralTable phase;
    std::optional<MIntegralTable> nested;
};

// I_{+/-,j}(T) for j = first_mode..cfg.n_modes, and the diagonal M-integrals when with_nested.
IntegralTables compute_tables(const TrajectorySegment& seg, const CavityConfig& cfg, double T,
                              bool with_nested, const QuadratureOptions& opts = {},
                              Execution exec = Execution::Parallel, int first_mode = 1);

// Columns: j,sign,T,re,im,err,evals
void write_table_csv(std::ostream& os, const PhaseIntegralTable& table);

}  // namespace accelgates
