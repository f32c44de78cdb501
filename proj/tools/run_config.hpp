#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "accelgates/cavity.hpp"
#include "accelgates/perturbation.hpp"
#include "accelgates/rotation.hpp"
#include "accelgates/synthesis.hpp"
#include "accelgates/worldline.hpp"

namespace accelgates::cli {

// Bad or unknown configuration entry; `key` is the dotted path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& why);
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

struct TrajectoryConfig {
    std::string kind = "accelerated";  // or "inertial"
    double a = 1.0;
    double x0 = 0.0;
    double duration = 2.0;

    TrajectorySegment segment() const;
};

struct FieldConfig {
    std::string kind = "coherent";  // or "vacuum"
    int mode = 1;
    double alpha_abs = 1.0;
    double alpha_arg = 0.0;

    CoherentPrep coherent() const { return CoherentPrep::polar(mode, alpha_abs, alpha_arg); }
    FieldPrep prep() const;
};

struct ScanConfig {
    std::string parameter = "a";  // or "T"
    std::vector<double> values;
};

struct TargetConfig {
    bool from_unitary = false;
    std::array<double, 3> axis{0.0, 0.0, 1.0};
    double angle = 0.0;
    std::array<std::array<double, 4>, 2> unitary{};  // rows of (re, im, re, im)

    NetRotation rotation() const;
};

struct SynthesisConfig {
    TargetConfig target;
    SynthesisConstraints constraints;
    double tol_fidelity = 1e-3;
};

struct OracleConfig {
    int n_modes = 3;
    int n_max = 3;
    double coherent_lambda_alpha = 1e-3;
    double vacuum_lambda = 1e-2;
    double match_tolerance = 0.05;
    std::array<double, 2> coherent_band{1.5, 2.5};
    std::array<double, 2> vacuum_band{5.0, 11.0};
    std::vector<int> ladder{1, 2, 3};
    double ladder_threshold = 1e-6;
    double tol = 1e-12;
};

struct UnitsConfig {
    double gap_hz = 1e9;
    double a = 1.0;
};

struct RunConfig {
    CavityConfig cavity{std::numbers::pi, 1, 1.0, 0.01};
    TrajectoryConfig trajectory;
    FieldConfig field;
    std::array<double, 3> qubit_bloch{0.0, 0.0, -1.0};
    ScanConfig scan;
    bool nested = false;
    SynthesisConfig synthesis;
    OracleConfig oracle;
    UnitsConfig units;
    std::string output = "-";
    double quadrature_tol = 1e-10;

    static RunConfig defaults();
    // Rejects unknown keys and type errors; missing keys keep their defaults.
    static RunConfig from_json(const nlohmann::json& j);
    // Enforces the cross-field constraints of the library.
    void validate() const;
    nlohmann::json to_json() const;
};

}  // namespace accelgates::cli
