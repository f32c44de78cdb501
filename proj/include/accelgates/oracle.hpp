#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "accelgates/cavity.hpp"
#include "accelgates/execution.hpp"
#include "accelgates/perturbation.hpp"
#include "accelgates/qubit.hpp"
#include "accelgates/worldline.hpp"

namespace accelgates {

struct FieldModeCutoff {
    int mode = 1;
    int n_max = 1;  // highest retained Fock level
};

// Qubit (x) truncated multimode Fock space, with the field starting in the
// vacuum or in a coherent state of one retained mode.
struct TruncatedFieldSpec {
    std::vector<FieldModeCutoff> modes;
    FieldPrep initial = FieldPrep::vacuum();

    // Modes 1..n_modes, each cut at n_max; a coherent mode is raised to the cutoff rule if needed.
    static TruncatedFieldSpec uniform(int n_modes, int n_max, const FieldPrep& initial);

    void validate(const CavityConfig& cfg) const;
    std::size_t field_dimension() const;
};

// Sum_{n <= n_max} e^{-|alpha|^2} |alpha|^{2n} / n!
double coherent_weight(double alpha_abs, int n_max);

// Smallest n_max with coherent_weight >= 1 - tail, plus `guard` extra levels.
int coherent_cutoff(double alpha_abs, double tail = 1e-12, int guard = 2);

struct OracleOptions {
    double tol = 1e-12;  // absolute and relative step-error target
};

struct OracleDiagnostics {
    std::int64_t steps = 0;
    double min_step = 0.0;
    double max_step = 0.0;
    double step_bound = 0.0;
    double norm_drift = 0.0;
    double initial_norm_weight = 1.0;  // weight captured by the truncated initial field state
    std::size_t dimension = 0;
    int pure_runs = 0;
};

struct OracleResult {
    QubitState reduced;
    OracleDiagnostics diagnostics;
};

// Integrates i d|psi>/dtau = H_I(tau)|psi> over [0, T] and traces out the field.
OracleResult exact_evolve(const TrajectorySegment& seg, const CavityConfig& cfg, const TruncatedFieldSpec& field,
                          const QubitState& rho0, double T, const OracleOptions& opts = {});

struct LadderRung {
    int n_modes = 1;
    int n_max = 1;
};

struct LadderRow {
    LadderRung rung;
    BlochVector bloch;
    double change_from_previous = 0.0;  // 0 for the first rung
    OracleDiagnostics diagnostics;
};

struct ConvergenceReport {
    std::vector<LadderRow> rows;
    double max_change = 0.0;    // over consecutive rungs
    double final_change = 0.0;  // between the last two rungs
    bool monotone = true;       // changes never grow along the ladder
    bool passed = false;        // final_change < threshold
};

ConvergenceReport convergence_check(const TrajectorySegment& seg, const CavityConfig& cfg, const FieldPrep& initial,
                                    const QubitState& rho0, double T, const std::vector<LadderRung>& ladder,
                                    double threshold = 1e-6, const OracleOptions& opts = {},
                                    Execution exec = Execution::Parallel);

}  // namespace accelgates
