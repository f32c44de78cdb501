#pragma once

#include <numbers>

namespace accelgates {

// One-dimensional Dirichlet cavity [0, L] holding a massless scalar field, plus
// the detector gap and coupling. Mode functions are the bare sin(k_j x); any
// normalization is absorbed into lambda.
struct CavityConfig {
    double length = std::numbers::pi;
    int n_modes = 1;
    double omega_gap = 1.0;
    double lambda = 0.0;

    void validate() const;
};

double mode_wavenumber(const CavityConfig& cfg, int j);
// omega_j = k_j = j pi / L
double mode_frequency(const CavityConfig& cfg, int j);
double mode_profile(const CavityConfig& cfg, int j, double x);

void require_inside(const CavityConfig& cfg, double x);

}  // namespace accelgates
