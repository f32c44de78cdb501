#include "accelgates/synthesis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>
#include <fmt/format.h>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include "accelgates/errors.hpp"
#include "accelgates/perturbation.hpp"

namespace accelgates {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinAxisSpread = 10.0 * kPi / 180.0;
constexpr double kAlternatingTarget = 1e-12;

double effective_alpha_max(const SynthesisConstraints& c) {
    return std::min(c.alpha_max, kCoherentValidityLimit / c.lambda);
}

// Separation of two axis lines, in [0, pi/2].
double line_separation(double phi1, double phi2) { return std::abs(std::remainder(phi1 - phi2, kPi)); }

BlochVector equatorial(double phi) { return {std::cos(phi), std::sin(phi), 0.0}; }

double wrap_angle(double theta) {
    double t = std::remainder(theta, 2.0 * kPi);
    if (t <= -kPi) t += 2.0 * kPi;
    return t;
}

GridPoint make_point(const CavityTemplate& tpl, const SynthesisConstraints& c, double a, double T, cplx ip,
                     cplx im) {
    const CoherentPrep unit{tpl.mode, std::polar(1.0, c.alpha_phase)};
    const RotationSpec r = extract_rotation(ip, im, unit, c.lambda);
    GridPoint g{a, T, ip, im, r.azimuth, r.angle * effective_alpha_max(c)};
    if (r.degenerate) g.max_angle = 0.0;
    return g;
}

GridPoint evaluate_point(const CavityTemplate& tpl, const SynthesisConstraints& c, double a, double T,
                         const QuadratureOptions& opts) {
    const TrajectorySegment seg = TrajectorySegment::accelerated(a, 0.0, T);
    CavityConfig cfg = tpl.cavity;
    cfg.lambda = c.lambda;
    const cplx ip = phase_integral(seg, cfg, tpl.mode, Sign::Plus, T, opts).value;
    const cplx im = phase_integral(seg, cfg, tpl.mode, Sign::Minus, T, opts).value;
    return make_point(tpl, c, a, T, ip, im);
}

struct Factor {
    GridPoint point;
    double angle;  // about the point's axis
};

// U = R1(t1) R2(t2) R1(t3) for orthogonal unit axes e1, e2; returns {t1, t2, t3}.
std::array<double, 3> euler_orthogonal(const NetRotation& u, const BlochVector& e1, const BlochVector& e2) {
    const BlochVector e3 = cross(e1, e2);
    const BlochVector v{u.x, u.y, u.z};
    const double w = u.w;
    const double vx = dot(v, e1);
    const double vy = dot(v, e2);
    const double vz = dot(v, e3);
    const double cb = std::sqrt(w * w + vx * vx);
    const double sb = std::sqrt(vy * vy + vz * vz);
    const double sum = std::atan2(vx, w);
    const double diff = (sb > 0.0) ? std::atan2(vz, vy) : 0.0;
    const double half1 = 0.5 * (sum + diff);
    const double half3 = 0.5 * (sum - diff);
    return {2.0 * half1, 2.0 * std::atan2(sb, cb), 2.0 * half3};
}

// Operator product R_{axis[0]}(t0) R_{axis[1]}(t1) ... (last factor acts first).
NetRotation alternating_product(const Eigen::VectorXd& theta, const BlochVector& e1, const BlochVector& e2) {
    NetRotation acc = NetRotation::identity();
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        acc = acc * NetRotation::from_axis_angle(i % 2 == 0 ? e1 : e2, theta[i]);
    }
    return acc;
}

struct AlternatingResidual : Eigen::DenseFunctor<double> {
    AlternatingResidual(int k, const NetRotation& target, double sign, const BlochVector& e1, const BlochVector& e2,
                        double reg)
        : Eigen::DenseFunctor<double>(k, 4 + k), target(target), sign(sign), e1(e1), e2(e2), reg(reg) {}

    int operator()(const InputType& x, ValueType& f) const {
        const NetRotation q = alternating_product(x, e1, e2);
        f[0] = q.w - sign * target.w;
        f[1] = q.x - sign * target.x;
        f[2] = q.y - sign * target.y;
        f[3] = q.z - sign * target.z;
        for (Eigen::Index i = 0; i < x.size(); ++i) f[4 + i] = reg * x[i];
        return 0;
    }

    NetRotation target;
    double sign;
    BlochVector e1;
    BlochVector e2;
    double reg;
};

Eigen::VectorXd minimize_alternating(Eigen::VectorXd x, const NetRotation& target, double sign, const BlochVector& e1,
                                     const BlochVector& e2, double reg) {
    AlternatingResidual f(static_cast<int>(x.size()), target, sign, e1, e2, reg);
    Eigen::NumericalDiff<AlternatingResidual> diff(f);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<AlternatingResidual>> lm(diff);
    lm.setMaxfev(400 * (static_cast<int>(x.size()) + 1));
    lm.setXtol(1e-15);
    lm.setFtol(1e-15);
    lm.minimize(x);
    return x;
}

// Angles of an alternating product about two non-parallel equatorial axes, shortest total first.
std::vector<double> decompose_alternating(const NetRotation& target, const BlochVector& e1, const BlochVector& e2) {
    constexpr int kStarts = 8;
    for (int k = 3; k <= 12; ++k) {
        std::vector<double> best;
        double best_cost = std::numeric_limits<double>::infinity();
        for (int s = 0; s < kStarts; ++s) {
            Eigen::VectorXd x(k);
            for (int i = 0; i < k; ++i) {
                const double u = std::fmod((i + 1) * 0.6180339887498949 * (s + 1) + 0.5 * s, 1.0);
                x[i] = kPi * (2.0 * u - 1.0);
            }
            for (double sign : {1.0, -1.0}) {
                Eigen::VectorXd y = minimize_alternating(x, target, sign, e1, e2, 1e-3);
                y = minimize_alternating(y, target, sign, e1, e2, 0.0);
                if (1.0 - gate_fidelity(target, alternating_product(y, e1, e2)) > kAlternatingTarget) continue;
                double cost = 0.0;
                for (int i = 0; i < k; ++i) {
                    y[i] = wrap_angle(y[i]);
                    cost += std::abs(y[i]);
                }
                if (cost < best_cost) {
                    best_cost = cost;
                    best.assign(y.data(), y.data() + k);
                }
            }
        }
        if (!best.empty()) return best;
    }
    return {};
}

std::vector<GateSegment> realize(const std::vector<Factor>& factors, const CavityTemplate& tpl,
                                 const SynthesisConstraints& c) {
    CavityConfig cfg = tpl.cavity;
    cfg.lambda = c.lambda;
    const double alpha_max = effective_alpha_max(c);
    std::vector<GateSegment> out;
    for (const auto& f : factors) {
        const double theta = wrap_angle(f.angle);
        if (std::abs(theta) < kDegenerateAngle) continue;
        const double phase = c.alpha_phase + (theta < 0.0 ? kPi : 0.0);
        const int pieces = static_cast<int>(std::ceil(std::abs(theta) / f.point.max_angle - 1e-12));
        const double magnitude = alpha_max * (std::abs(theta) / pieces) / f.point.max_angle;
        for (int p = 0; p < pieces; ++p) {
            out.push_back({f.point.a, f.point.T, std::polar(magnitude, phase), tpl.mode, cfg});
        }
    }
    return out;
}

}  // namespace

void CavityTemplate::validate() const {
    cavity.validate();
    if (mode < 1 || mode > cavity.n_modes) {
        throw DomainError(fmt::format("template mode {} outside [1, {}]", mode, cavity.n_modes));
    }
}

TrajectorySegment GateSegment::trajectory() const {
    if (a == 0.0) return TrajectorySegment::inertial(0.0, T);
    return TrajectorySegment::accelerated(a, a > 0.0 ? 0.0 : cavity.length, T);
}

void GateSegment::validate() const {
    cavity.validate();
    if (mode < 1 || mode > cavity.n_modes) throw DomainError(fmt::format("segment mode {} out of range", mode));
    if (!(T >= 0.0) || T > kInteractionTimeLimit) {
        throw DomainError(fmt::format("segment time T = {} outside [0, {}]", T, kInteractionTimeLimit));
    }
    if (cavity.lambda * std::abs(alpha) > kCoherentValidityLimit * (1.0 + 1e-12)) {
        throw DomainError(fmt::format("lambda*|alpha| = {} exceeds {}", cavity.lambda * std::abs(alpha),
                                      kCoherentValidityLimit));
    }
    const TrajectorySegment seg = trajectory();
    require_inside(cavity, position(seg, T).x);
}

RotationSpec segment_rotation(const GateSegment& seg, const QuadratureOptions& opts) {
    seg.validate();
    const TrajectorySegment traj = seg.trajectory();
    const cplx ip = phase_integral(traj, seg.cavity, seg.mode, Sign::Plus, seg.T, opts).value;
    const cplx im = phase_integral(traj, seg.cavity, seg.mode, Sign::Minus, seg.T, opts).value;
    return extract_rotation(ip, im, CoherentPrep{seg.mode, seg.alpha}, seg.cavity.lambda);
}

NetRotation simulate_sequence(const std::vector<GateSegment>& segments, const QuadratureOptions& opts) {
    std::vector<RotationSpec> rotations;
    rotations.reserve(segments.size());
    for (const auto& s : segments) rotations.push_back(segment_rotation(s, opts));
    return compose(rotations);
}

void SynthesisConstraints::validate() const {
    if (!(a_max > 0.0)) throw PlanningError(fmt::format("a_max = {} leaves no acceleration to control the axis", a_max));
    if (!(T_max > 0.0)) throw PlanningError(fmt::format("T_max = {} must be positive", T_max));
    if (!(lambda > 0.0)) throw PlanningError(fmt::format("lambda = {} produces no rotation", lambda));
    if (!(alpha_max > 0.0)) throw PlanningError(fmt::format("alpha_max = {} produces no rotation", alpha_max));
    if (max_segments < 1) throw PlanningError("max_segments must be >= 1");
    if (grid_a < 2 || grid_T < 1) throw PlanningError("grid needs at least 2 accelerations and 1 time");
    if (!std::isfinite(alpha_phase)) throw PlanningError("alpha_phase must be finite");
}

RotationGrid build_rotation_grid(const CavityTemplate& tpl, const SynthesisConstraints& c,
                                 const QuadratureOptions& opts, Execution exec) {
    tpl.validate();
    c.validate();
    CavityConfig cfg = tpl.cavity;
    cfg.lambda = c.lambda;
    const double T_max = std::min(c.T_max, kInteractionTimeLimit);
    std::vector<std::vector<GridPoint>> rows(c.grid_a);
    std::vector<int> skipped(c.grid_a, 0);

    auto work = [&](int k) {
        const double a = c.a_max * (k + 1) / c.grid_a;
        std::vector<double> taus;
        for (int m = 1; m <= c.grid_T; ++m) {
            const double T = T_max * m / c.grid_T;
            const TrajectorySegment probe = TrajectorySegment::accelerated(a, 0.0, T);
            if (position(probe, T).x > cfg.length) break;
            taus.push_back(T);
        }
        skipped[k] = c.grid_T - static_cast<int>(taus.size());
        if (taus.empty()) return;
        const TrajectorySegment seg = TrajectorySegment::accelerated(a, 0.0, taus.back());
        try {
            const auto plus = phase_integral_grid(seg, cfg, tpl.mode, Sign::Plus, taus, opts);
            const auto minus = phase_integral_grid(seg, cfg, tpl.mode, Sign::Minus, taus, opts);
            for (std::size_t m = 0; m < taus.size(); ++m) {
                GridPoint g = make_point(tpl, c, a, taus[m], plus[m].value, minus[m].value);
                if (g.max_angle > kDegenerateAngle) {
                    rows[k].push_back(g);
                } else {
                    ++skipped[k];
                }
            }
        } catch (const std::exception&) {
            skipped[k] = c.grid_T;
        }
    };
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int k = 0; k < c.grid_a; ++k) work(k);
    } else {
        for (int k = 0; k < c.grid_a; ++k) work(k);
    }

    RotationGrid grid;
    for (int k = 0; k < c.grid_a; ++k) {
        grid.points.insert(grid.points.end(), rows[k].begin(), rows[k].end());
        grid.skipped += skipped[k];
    }
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        for (std::size_t j = i + 1; j < grid.points.size(); ++j) {
            grid.axis_spread =
                std::max(grid.axis_spread, line_separation(grid.points[i].azimuth, grid.points[j].azimuth));
        }
    }
    return grid;
}

GateSequence synthesize(const NetRotation& target_in, const CavityTemplate& tpl, const SynthesisConstraints& c,
                        double tol_fidelity, const QuadratureOptions& opts, Execution exec) {
    tpl.validate();
    c.validate();
    if (!(tol_fidelity > 0.0 && tol_fidelity < 1.0)) throw PlanningError("tol_fidelity must lie in (0, 1)");
    const double norm = target_in.norm();
    if (!(std::abs(norm - 1.0) < 1e-6)) throw PlanningError(fmt::format("target is not a unit quaternion (norm {})", norm));
    const NetRotation target{target_in.w / norm, target_in.x / norm, target_in.y / norm, target_in.z / norm};

    GateSequence seq;
    seq.target = target;
    if (1.0 - std::abs(target.w) < 1e-15) {
        seq.method = "identity";
        seq.predicted = NetRotation::identity();
        seq.fidelity = gate_fidelity(target, seq.predicted);
        return seq;
    }

    const RotationGrid grid = build_rotation_grid(tpl, c, opts, exec);
    seq.grid_points = static_cast<int>(grid.points.size());
    seq.axis_spread = grid.axis_spread;
    if (grid.points.size() < 2) {
        throw PlanningError(fmt::format("only {} usable grid points ({} skipped); relax a_max or T_max",
                                        grid.points.size(), grid.skipped));
    }
    if (grid.axis_spread < kMinAxisSpread) {
        throw PlanningError(fmt::format("achievable axis spread {:.3f} deg is below {:.0f} deg",
                                        grid.axis_spread * 180.0 / kPi, kMinAxisSpread * 180.0 / kPi));
    }
    const auto& pts = grid.points;

    // Look for q on a fixed-T line with an a-bracket where its axis turns perpendicular to p.
    struct Bracket {
        std::size_t p = 0, q1 = 0, q2 = 0;
        double score = -1.0;
    } best;
    for (std::size_t p = 0; p < pts.size(); ++p) {
        for (std::size_t q1 = 0; q1 < pts.size(); ++q1) {
            for (std::size_t q2 = q1 + 1; q2 < pts.size(); ++q2) {
                if (pts[q2].T != pts[q1].T) continue;
                const double d1 = std::cos(pts[q1].azimuth - pts[p].azimuth);
                const double d2 = std::cos(pts[q2].azimuth - pts[p].azimuth);
                if (d1 * d2 <= 0.0) {
                    const double score = std::min({pts[p].max_angle, pts[q1].max_angle, pts[q2].max_angle});
                    if (score > best.score) best = {p, q1, q2, score};
                }
                break;  // only the next a on the same T line
            }
        }
    }

    std::vector<Factor> factors;
    if (best.score > 0.0) {
        const GridPoint& p = pts[best.p];
        const double T = pts[best.q1].T;
        auto f = [&](double a) { return std::cos(evaluate_point(tpl, c, a, T, opts).azimuth - p.azimuth); };
        double lo = pts[best.q1].a;
        double hi = pts[best.q2].a;
        double flo = std::cos(pts[best.q1].azimuth - p.azimuth);
        double fhi = std::cos(pts[best.q2].azimuth - p.azimuth);
        double root = flo == 0.0 ? lo : hi;
        if (flo != 0.0 && fhi != 0.0) {
            std::uintmax_t iters = 80;
            const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                             boost::math::tools::eps_tolerance<double>(50), iters);
            root = 0.5 * (r.first + r.second);
        }
        const GridPoint q = evaluate_point(tpl, c, root, T, opts);
        if (q.max_angle > kDegenerateAngle) {
            const BlochVector e1 = equatorial(p.azimuth);
            const BlochVector e2 = equatorial(q.azimuth);
            const auto angles = euler_orthogonal(target, e1, e2);
            // Time order: the rightmost factor acts first.
            factors = {{p, angles[2]}, {q, angles[1]}, {p, angles[0]}};
            seq.method = "euler";
            seq.axis_separation = line_separation(p.azimuth, q.azimuth);
        }
    }
    if (factors.empty()) {
        double best_score = -1.0;
        std::size_t bp = 0, bq = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                const double score = std::sin(line_separation(pts[i].azimuth, pts[j].azimuth)) *
                                     std::min(pts[i].max_angle, pts[j].max_angle);
                if (score > best_score) {
                    best_score = score;
                    bp = i;
                    bq = j;
                }
            }
        }
        const std::vector<double> angles =
            decompose_alternating(target, equatorial(pts[bp].azimuth), equatorial(pts[bq].azimuth));
        if (angles.empty()) throw PlanningError("alternating decomposition did not converge");
        for (std::size_t i = angles.size(); i-- > 0;) factors.push_back({i % 2 == 0 ? pts[bp] : pts[bq], angles[i]});
        seq.method = "alternating";
        seq.axis_separation = line_separation(pts[bp].azimuth, pts[bq].azimuth);
    }

    std::vector<GateSegment> plan = realize(factors, tpl, c);
    std::vector<RotationSpec> rotations;
    rotations.reserve(plan.size());
    for (const auto& s : plan) rotations.push_back(segment_rotation(s, opts));

    if (plan.size() > static_cast<std::size_t>(c.max_segments)) {
        std::size_t keep = 0;
        double best_fid = gate_fidelity(target, NetRotation::identity());
        NetRotation acc = NetRotation::identity();
        for (std::size_t n = 1; n <= static_cast<std::size_t>(c.max_segments); ++n) {
            acc = NetRotation::from_spec(rotations[n - 1]) * acc;
            const double fid = gate_fidelity(target, acc);
            if (fid > best_fid) {
                best_fid = fid;
                keep = n;
            }
        }
        seq.notes.push_back(fmt::format("full plan needs {} segments, budget is {}", plan.size(), c.max_segments));
        plan.resize(keep);
        rotations.resize(keep);
        seq.method = "best-effort";
    }
    seq.segments = std::move(plan);
    seq.rotations = std::move(rotations);
    seq.predicted = compose(seq.rotations);
    seq.fidelity = gate_fidelity(target, seq.predicted);
    seq.success = seq.fidelity >= 1.0 - tol_fidelity;
    if (!seq.success) seq.notes.push_back(fmt::format("fidelity {:.6f} below 1 - {}", seq.fidelity, tol_fidelity));
    return seq;
}

}  // namespace accelgates
