#include "accelgates/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include <Eigen/LU>
#include <fmt/format.h>

#include "accelgates/errors.hpp"

namespace accelgates {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

void fill_rotation(ScanRow& row, const CoherentPrep& prep, double lambda) {
    row.rotation = extract_rotation(row.i_plus, row.i_minus, prep, lambda);
    row.phi_wrapped = row.rotation.azimuth;
    row.phi_unwrapped = row.rotation.azimuth;
    row.ok = true;
}

double range_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

}  // namespace

BlochVector RotationSpec::unit_axis() const {
    const double n = axis.norm();
    if (n == 0.0) return {kNaN, kNaN, kNaN};
    return axis * (1.0 / n);
}

RotationSpec extract_rotation(cplx i_plus, cplx i_minus, const CoherentPrep& prep, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("coupling must be >= 0");
    RotationSpec r;
    r.amplitude = rotation_amplitude(i_plus, i_minus, prep.alpha);
    r.axis = {2.0 * r.amplitude.real(), -2.0 * r.amplitude.imag(), 0.0};
    r.angle = 2.0 * lambda * r.axis.norm();
    r.degenerate = r.angle < kDegenerateAngle;
    r.azimuth = r.degenerate ? kNaN : std::atan2(r.axis.y, r.axis.x);
    return r;
}

double rotation_angle_closed_form(cplx i_plus, cplx i_minus, const CoherentPrep& prep, double lambda) {
    const double mag = std::abs(prep.alpha);
    const double arg = std::arg(prep.alpha);
    return 4.0 * lambda * mag * std::abs(std::polar(1.0, -arg) * i_plus + std::polar(1.0, arg) * std::conj(i_minus));
}

NetRotation NetRotation::from_axis_angle(const BlochVector& axis, double angle) {
    const double n = axis.norm();
    if (n == 0.0) {
        if (std::abs(angle) < kDegenerateAngle) return identity();
        throw DomainError("rotation axis has zero length");
    }
    const double s = std::sin(0.5 * angle) / n;
    return {std::cos(0.5 * angle), s * axis.x, s * axis.y, s * axis.z};
}

NetRotation NetRotation::from_spec(const RotationSpec& spec) {
    if (spec.degenerate) return identity();
    return from_axis_angle(spec.axis, spec.angle);
}

NetRotation NetRotation::from_unitary(const Mat2& u) {
    const cplx det = u.determinant();
    if (std::abs(std::abs(det) - 1.0) > 1e-8) throw DomainError("matrix is not unitary");
    const Mat2 v = u / std::sqrt(det);
    const cplx i{0.0, 1.0};
    NetRotation r{((v(0, 0) + v(1, 1)) * 0.5).real(), (i * (v(0, 1) + v(1, 0)) * 0.5).real(),
                  ((v(1, 0) - v(0, 1)) * 0.5).real(), (i * (v(0, 0) - v(1, 1)) * 0.5).real()};
    const Mat2 check = r.unitary();
    if ((check.adjoint() * check - Mat2::Identity()).cwiseAbs().maxCoeff() > 1e-8 ||
        std::abs(r.norm() - 1.0) > 1e-8) {
        throw DomainError("matrix is not unitary");
    }
    const double n = r.norm();
    return {r.w / n, r.x / n, r.y / n, r.z / n};
}

NetRotation operator*(const NetRotation& a, const NetRotation& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z, a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x, a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

NetRotation NetRotation::then(const NetRotation& next) const { return next * *this; }

double NetRotation::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

double NetRotation::angle() const {
    const double v = std::sqrt(x * x + y * y + z * z);
    return 2.0 * std::atan2(v, w);
}

BlochVector NetRotation::axis() const {
    const double v = std::sqrt(x * x + y * y + z * z);
    if (v == 0.0) return {0.0, 0.0, 1.0};
    return {x / v, y / v, z / v};
}

Mat2 NetRotation::unitary() const {
    Mat2 u;
    u << cplx(w, -z), cplx(-y, -x), cplx(y, -x), cplx(w, z);
    return u;
}

NetRotation compose(std::span<const RotationSpec> rotations) {
    NetRotation acc = NetRotation::identity();
    for (const auto& r : rotations) acc = NetRotation::from_spec(r) * acc;
    return acc;
}

NetRotation compose(std::span<const NetRotation> rotations) {
    NetRotation acc = NetRotation::identity();
    for (const auto& r : rotations) acc = r * acc;
    return acc;
}

double gate_fidelity(const NetRotation& t, const NetRotation& a) {
    return std::min(1.0, std::abs(t.w * a.w + t.x * a.x + t.y * a.y + t.z * a.z));
}

BlochVector rotate(const NetRotation& r, const BlochVector& b) {
    const BlochVector v{r.x, r.y, r.z};
    const BlochVector vb = cross(v, b);
    return b + vb * (2.0 * r.w) + cross(v, vb) * 2.0;
}

void unwrap_azimuths(std::vector<ScanRow>& rows) {
    bool have = false;
    double prev = 0.0;
    for (auto& row : rows) {
        if (!row.ok || row.rotation.degenerate) continue;
        double phi = row.phi_wrapped;
        if (have) {
            phi += kTwoPi * std::round((prev - phi) / kTwoPi);
        }
        row.phi_unwrapped = phi;
        prev = phi;
        have = true;
    }
}

SpreadStats ScanTable::spread() const {
    SpreadStats s;
    std::vector<double> all;
    std::vector<double> params;
    for (const auto& r : rows) {
        if (!r.ok) {
            ++s.failed_rows;
            continue;
        }
        if (r.rotation.degenerate) continue;
        ++s.valid_rows;
        all.push_back(r.phi_unwrapped);
        params.push_back(r.parameter);
    }
    s.total = range_of(all);
    if (!params.empty()) {
        const auto [lo, hi] = std::minmax_element(params.begin(), params.end());
        const double mid = 0.5 * (*lo + *hi);
        std::vector<double> first;
        std::vector<double> second;
        for (std::size_t i = 0; i < all.size(); ++i) {
            if (params[i] <= mid) first.push_back(all[i]);
            if (params[i] >= mid) second.push_back(all[i]);
        }
        s.first_half = range_of(first);
        s.second_half = range_of(second);
    }
    return s;
}

ScanTable azimuth_scan(const CavityConfig& cfg, const CoherentPrep& prep, double lambda, double T,
                       std::span<const double> a_values, double x0, const QuadratureOptions& opts,
                       Execution exec) {
    cfg.validate();
    prep.validate(cfg.n_modes);
    ScanTable table;
    table.parameter = "a";
    table.rows.resize(a_values.size());
    auto work = [&](int i) {
        ScanRow& row = table.rows[i];
        row.parameter = a_values[i];
        row.a = a_values[i];
        row.T = T;
        try {
            const TrajectorySegment seg = a_values[i] == 0.0 ? TrajectorySegment::inertial(x0, T)
                                                             : TrajectorySegment::accelerated(a_values[i], x0, T);
            const IntegralResult ip = phase_integral(seg, cfg, prep.mode, Sign::Plus, T, opts);
            const IntegralResult im = phase_integral(seg, cfg, prep.mode, Sign::Minus, T, opts);
            row.i_plus = ip.value;
            row.i_minus = im.value;
            row.err_plus = ip.error;
            row.err_minus = im.error;
            fill_rotation(row, prep, lambda);
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    };
    const int n = static_cast<int>(a_values.size());
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) work(i);
    } else {
        for (int i = 0; i < n; ++i) work(i);
    }
    unwrap_azimuths(table.rows);
    return table;
}

ScanTable axis_vs_time(const CavityConfig& cfg, const CoherentPrep& prep, double lambda,
                       const TrajectorySegment& trajectory, std::span<const double> T_values,
                       const QuadratureOptions& opts, Execution exec) {
    cfg.validate();
    prep.validate(cfg.n_modes);
    ScanTable table;
    table.parameter = "T";
    const std::size_t n = T_values.size();
    table.rows.resize(n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return T_values[l] < T_values[r]; });

    // Motion is monotone, so the in-cavity rows form a prefix of the sorted grid.
    TrajectorySegment seg = trajectory;
    std::vector<double> valid_T;
    std::vector<std::size_t> valid_idx;
    for (std::size_t k : order) {
        ScanRow& row = table.rows[k];
        row.parameter = T_values[k];
        row.a = trajectory.a;
        row.T = T_values[k];
        try {
            if (!(T_values[k] >= 0.0)) throw DomainError("interaction time must be >= 0");
            seg.duration = std::max(seg.duration, T_values[k]);
            TrajectorySegment probe = trajectory;
            probe.duration = T_values[k];
            require_inside(cfg, position(probe, T_values[k]).x);
            require_inside(cfg, trajectory.x0);
            valid_T.push_back(T_values[k]);
            valid_idx.push_back(k);
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    }
    seg.duration = valid_T.empty() ? 0.0 : valid_T.back();

    std::vector<IntegralResult> plus;
    std::vector<IntegralResult> minus;
    std::exception_ptr failure;
    auto sweep = [&](int which) {
        try {
            auto res = phase_integral_grid(seg, cfg, prep.mode, which == 0 ? Sign::Plus : Sign::Minus, valid_T, opts);
            (which == 0 ? plus : minus) = std::move(res);
        } catch (...) {
#pragma omp critical(accelgates_axis_vs_time)
            failure = std::current_exception();
        }
    };
    if (exec == Execution::Parallel) {
#pragma omp parallel for
        for (int w = 0; w < 2; ++w) sweep(w);
    } else {
        sweep(0);
        sweep(1);
    }
    if (failure) {
        std::string msg = "integration failed";
        try {
            std::rethrow_exception(failure);
        } catch (const std::exception& e) {
            msg = e.what();
        }
        for (std::size_t k : valid_idx) {
            table.rows[k].ok = false;
            table.rows[k].error = msg;
        }
        return table;
    }
    for (std::size_t v = 0; v < valid_idx.size(); ++v) {
        ScanRow& row = table.rows[valid_idx[v]];
        row.i_plus = plus[v].value;
        row.i_minus = minus[v].value;
        row.err_plus = plus[v].error;
        row.err_minus = minus[v].error;
        fill_rotation(row, prep, lambda);
    }
    // Unwrap along increasing T, then restore input order.
    std::vector<ScanRow> sorted;
    sorted.reserve(n);
    for (std::size_t k : order) sorted.push_back(table.rows[k]);
    unwrap_azimuths(sorted);
    for (std::size_t i = 0; i < n; ++i) table.rows[order[i]] = sorted[i];
    return table;
}

void write_scan_csv(std::ostream& os, const ScanTable& table) {
    os << table.parameter << ",phi_wrapped,phi_unwrapped,delta,ip_re,ip_im,im_re,im_im,err_flag\n";
    for (const auto& r : table.rows) {
        if (!r.ok) {
            os << fmt::format("{:.17g},nan,nan,nan,nan,nan,nan,nan,\"{}\"\n", r.parameter, r.error);
            continue;
        }
        const char* flag = r.rotation.degenerate ? "degenerate" : "ok";
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.parameter,
                          r.phi_wrapped, r.phi_unwrapped, r.rotation.angle, r.i_plus.real(), r.i_plus.imag(),
                          r.i_minus.real(), r.i_minus.imag(), flag);
    }
}

void write_scan_footer(std::ostream& os, const ScanTable& table) {
    const SpreadStats s = table.spread();
    os << fmt::format("# phi_spread_deg={:.6f}\n", degrees(s.total));
    os << fmt::format("# phi_spread_first_half_deg={:.6f}\n", degrees(s.first_half));
    os << fmt::format("# phi_spread_second_half_deg={:.6f}\n", degrees(s.second_half));
    os << fmt::format("# valid_rows={} failed_rows={}\n", s.valid_rows, s.failed_rows);
}

}  // namespace accelgates
