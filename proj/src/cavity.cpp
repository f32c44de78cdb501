#include "accelgates/cavity.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "accelgates/errors.hpp"

namespace accelgates {

OutOfCavityError::OutOfCavityError(double x, double length)
    : DomainError("detector left the cavity: x = " + std::to_string(x) + " not in [0, " +
                  std::to_string(length) + "]"),
      x_(x),
      length_(length) {}

void CavityConfig::validate() const {
    if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("cavity length must be > 0");
    if (n_modes < 1) throw DomainError("cavity needs at least one mode");
    if (!(omega_gap > 0.0) || !std::isfinite(omega_gap)) throw DomainError("detector gap must be > 0");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("coupling must be >= 0");
}

double mode_wavenumber(const CavityConfig& cfg, int j) {
    if (j < 1 || j > cfg.n_modes) {
        throw DomainError("mode index " + std::to_string(j) + " outside [1, " +
                          std::to_string(cfg.n_modes) + "]");
    }
    return j * std::numbers::pi / cfg.length;
}

double mode_frequency(const CavityConfig& cfg, int j) { return mode_wavenumber(cfg, j); }

void require_inside(const CavityConfig& cfg, double x) {
    // Allow a few ulps at the walls so a detector released at x = L is not rejected by rounding.
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() * cfg.length;
    if (!(x >= -slack && x <= cfg.length + slack)) {
        throw OutOfCavityError(x, cfg.length);
    }
}

double mode_profile(const CavityConfig& cfg, int j, double x) {
    const double k = mode_wavenumber(cfg, j);
    require_inside(cfg, x);
    if (x <= 0.0) return 0.0;
    if (x >= cfg.length) return 0.0;
    return std::sin(k * x);
}

}  // namespace accelgates
