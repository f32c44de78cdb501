#include "accelgates/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "accelgates/errors.hpp"

namespace accelgates {

namespace {

using StateVector = std::vector<cplx>;

struct ModeLayout {
    int mode;
    int n_max;
    std::size_t stride;
    double omega;
};

// H_I(tau) = lambda mu(tau) (x) X(tau), mu = sigma+ e^{i Omega tau} + h.c. with sigma+ = 2|e><g|,
// X = sum_j sin(k_j x) (a_j^dagger e^{i omega_j t} + a_j e^{-i omega_j t}).
// The joint vector stores the |e> block first, then the |g> block.
class InteractionHamiltonian {
public:
    InteractionHamiltonian(const TrajectorySegment& seg, const CavityConfig& cfg, const TruncatedFieldSpec& field)
        : seg_(seg), cfg_(cfg) {
        std::size_t stride = 1;
        for (const auto& m : field.modes) {
            layout_.push_back({m.mode, m.n_max, stride, mode_frequency(cfg, m.mode)});
            stride *= static_cast<std::size_t>(m.n_max + 1);
        }
        field_dim_ = stride;
        for (const auto& m : layout_) {
            sqrt_n_.resize(std::max<std::size_t>(sqrt_n_.size(), m.n_max + 2));
        }
        for (std::size_t n = 0; n < sqrt_n_.size(); ++n) sqrt_n_[n] = std::sqrt(static_cast<double>(n));
    }

    std::size_t field_dimension() const { return field_dim_; }

    // out = -i H(tau) psi
    void apply(const StateVector& psi, StateVector& out, double tau) const {
        const SpacetimePoint p = position(seg_, tau);
        const std::size_t F = field_dim_;
        std::fill(out.begin(), out.end(), cplx{});
        const cplx* pe = psi.data();
        const cplx* pg = psi.data() + F;
        cplx* oe = out.data();
        cplx* og = out.data() + F;
        const double lam2 = 2.0 * cfg_.lambda;
        // -i * lambda * 2 e^{+i Omega tau} on the |e> row, conjugate phase on the |g> row.
        const cplx up = cplx(0.0, -1.0) * std::polar(lam2, cfg_.omega_gap * tau);
        const cplx down = cplx(0.0, -1.0) * std::polar(lam2, -cfg_.omega_gap * tau);
        for (const auto& m : layout_) {
            const double amp = mode_profile(cfg_, m.mode, p.x);
            if (amp == 0.0) continue;
            const cplx create = std::polar(amp, m.omega * p.t);
            const cplx annihilate = std::conj(create);
            const std::size_t levels = static_cast<std::size_t>(m.n_max) + 1;
            for (std::size_t f = 0; f < F; ++f) {
                const std::size_t n = (f / m.stride) % levels;
                if (n + 1 < levels) {
                    const cplx c = create * sqrt_n_[n + 1];
                    oe[f + m.stride] += up * c * pg[f];
                    og[f + m.stride] += down * c * pe[f];
                }
                if (n > 0) {
                    const cplx c = annihilate * sqrt_n_[n];
                    oe[f - m.stride] += up * c * pg[f];
                    og[f - m.stride] += down * c * pe[f];
                }
            }
        }
    }

    // Fastest phase rate reached on [0, T] plus a bound on ||H||.
    double rate_bound(const TrajectorySegment& seg, double T) const {
        const double growth =
            seg.kind == TrajectoryKind::UniformAcceleration ? std::exp(std::abs(seg.a) * T) : 1.0;
        double omega_max = 0.0;
        double h_norm = 0.0;
        for (const auto& m : layout_) {
            omega_max = std::max(omega_max, m.omega);
            h_norm += 2.0 * sqrt_n_[m.n_max];
        }
        return std::abs(cfg_.omega_gap) + omega_max * growth + 2.0 * cfg_.lambda * h_norm;
    }

private:
    const TrajectorySegment& seg_;
    const CavityConfig& cfg_;
    std::vector<ModeLayout> layout_;
    std::vector<double> sqrt_n_;
    std::size_t field_dim_ = 1;
};

std::vector<cplx> initial_field(const TruncatedFieldSpec& field, double& weight) {
    std::vector<std::vector<cplx>> per_mode;
    weight = 1.0;
    for (const auto& m : field.modes) {
        std::vector<cplx> amps(m.n_max + 1, cplx{});
        if (field.initial.kind == FieldKind::Coherent && field.initial.coherent.mode == m.mode) {
            const cplx alpha = field.initial.coherent.alpha;
            const double a2 = std::norm(alpha);
            cplx term = std::exp(-0.5 * a2);
            double norm2 = 0.0;
            for (int n = 0; n <= m.n_max; ++n) {
                if (n > 0) term *= alpha / std::sqrt(static_cast<double>(n));
                amps[n] = term;
                norm2 += std::norm(term);
            }
            weight *= norm2;
            const double s = 1.0 / std::sqrt(norm2);
            for (auto& a : amps) a *= s;
        } else {
            amps[0] = 1.0;
        }
        per_mode.push_back(std::move(amps));
    }
    // Product state in the mixed-radix layout (first mode fastest).
    std::vector<cplx> out{1.0};
    for (auto it = per_mode.rbegin(); it != per_mode.rend(); ++it) {
        std::vector<cplx> next;
        next.reserve(out.size() * it->size());
        for (const cplx& outer : out) {
            for (const cplx& inner : *it) next.push_back(outer * inner);
        }
        out = std::move(next);
    }
    return out;
}

struct PureRun {
    Mat2 reduced;
    OracleDiagnostics diag;
};

PureRun evolve_pure(const TrajectorySegment& seg, const CavityConfig& cfg, const TruncatedFieldSpec& field,
                    const Eigen::Vector2cd& qubit, double T, const OracleOptions& opts) {
    namespace odeint = boost::numeric::odeint;
    InteractionHamiltonian ham(seg, cfg, field);
    double weight = 1.0;
    const std::vector<cplx> f0 = initial_field(field, weight);
    const std::size_t F = ham.field_dimension();
    StateVector psi(2 * F);
    for (std::size_t f = 0; f < F; ++f) {
        psi[f] = qubit(0) * f0[f];
        psi[F + f] = qubit(1) * f0[f];
    }

    PureRun run;
    run.diag.dimension = psi.size();
    run.diag.initial_norm_weight = weight;

    if (T > 0.0 && cfg.lambda > 0.0) {
        using stepper_t = odeint::runge_kutta_fehlberg78<StateVector, double, StateVector, double>;
        const double max_dt = kMaxPhasePerPanel / ham.rate_bound(seg, T);
        run.diag.step_bound = max_dt;
        auto controlled = odeint::make_controlled(opts.tol, opts.tol, max_dt, stepper_t());
        double last_t = 0.0;
        double min_step = std::numeric_limits<double>::infinity();
        double max_step = 0.0;
        std::int64_t steps = 0;
        auto observer = [&](const StateVector&, double t) {
            if (t > last_t) {
                const double h = t - last_t;
                // The final step is clipped to land on T; keep it out of the minimum.
                if (t < T) min_step = std::min(min_step, h);
                max_step = std::max(max_step, h);
                ++steps;
            }
            last_t = t;
        };
        auto rhs = [&ham](const StateVector& x, StateVector& dxdt, double tau) { ham.apply(x, dxdt, tau); };
        odeint::integrate_adaptive(controlled, rhs, psi, 0.0, T, std::min(max_dt, 1e-3), observer);
        run.diag.steps = steps;
        run.diag.min_step = std::isfinite(min_step) ? min_step : max_step;
        run.diag.max_step = max_step;
    }

    double norm2 = 0.0;
    for (const auto& c : psi) norm2 += std::norm(c);
    run.diag.norm_drift = std::abs(std::sqrt(norm2) - 1.0);

    // Partial trace over the field.
    Mat2 rho = Mat2::Zero();
    for (std::size_t f = 0; f < F; ++f) {
        const cplx e = psi[f];
        const cplx g = psi[F + f];
        rho(0, 0) += e * std::conj(e);
        rho(0, 1) += e * std::conj(g);
        rho(1, 0) += g * std::conj(e);
        rho(1, 1) += g * std::conj(g);
    }
    run.reduced = rho;
    return run;
}

}  // namespace

TruncatedFieldSpec TruncatedFieldSpec::uniform(int n_modes, int n_max, const FieldPrep& initial) {
    TruncatedFieldSpec spec;
    spec.initial = initial;
    for (int j = 1; j <= n_modes; ++j) {
        int cut = n_max;
        if (initial.kind == FieldKind::Coherent && initial.coherent.mode == j) {
            cut = std::max(cut, coherent_cutoff(std::abs(initial.coherent.alpha)));
        }
        spec.modes.push_back({j, cut});
    }
    return spec;
}

void TruncatedFieldSpec::validate(const CavityConfig& cfg) const {
    if (modes.empty()) throw DomainError("truncated field needs at least one mode");
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i].n_max < 1) throw DomainError("Fock cutoff must be >= 1");
        (void)mode_frequency(cfg, modes[i].mode);
        for (std::size_t k = 0; k < i; ++k) {
            if (modes[k].mode == modes[i].mode) throw DomainError("mode listed twice in truncated field");
        }
    }
    if (initial.kind == FieldKind::Coherent) {
        const auto it = std::find_if(modes.begin(), modes.end(),
                                     [&](const FieldModeCutoff& m) { return m.mode == initial.coherent.mode; });
        if (it == modes.end()) throw DomainError("coherent mode is not retained in the truncated field");
        const double w = coherent_weight(std::abs(initial.coherent.alpha), it->n_max);
        if (w < 1.0 - 1e-12) {
            throw DomainError(fmt::format("Fock cutoff {} keeps only {:.15f} of the coherent state", it->n_max, w));
        }
    }
}

std::size_t TruncatedFieldSpec::field_dimension() const {
    std::size_t d = 1;
    for (const auto& m : modes) d *= static_cast<std::size_t>(m.n_max + 1);
    return d;
}

double coherent_weight(double alpha_abs, int n_max) {
    const double a2 = alpha_abs * alpha_abs;
    double term = std::exp(-a2);
    double sum = term;
    for (int n = 1; n <= n_max; ++n) {
        term *= a2 / n;
        sum += term;
    }
    return sum;
}

int coherent_cutoff(double alpha_abs, double tail, int guard) {
    if (!(alpha_abs >= 0.0)) throw DomainError("|alpha| must be >= 0");
    // Accumulate the tail directly: 1 - cdf loses everything below ~1e-16.
    const double a2 = alpha_abs * alpha_abs;
    int n = 0;
    double term = std::exp(-a2);
    double cdf = term;
    while (1.0 - cdf >= tail) {
        ++n;
        term *= a2 / n;
        cdf += term;
        if (n > 10000) throw DomainError("coherent amplitude too large for the Fock cutoff rule");
    }
    return std::max(n, 1) + guard;
}

OracleResult exact_evolve(const TrajectorySegment& seg, const CavityConfig& cfg, const TruncatedFieldSpec& field,
                          const QubitState& rho0, double T, const OracleOptions& opts) {
    cfg.validate();
    seg.validate();
    field.validate(cfg);
    if (!(T >= 0.0) || T > seg.duration) throw DomainError("evolution time outside the segment");

    // Mixed states run as the convex combination of their eigenvectors.
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (rho0.matrix() + rho0.matrix().adjoint()));
    OracleResult out{QubitState::perturbative(Mat2::Zero()), {}};
    Mat2 rho = Mat2::Zero();
    OracleDiagnostics agg;
    agg.min_step = std::numeric_limits<double>::infinity();
    for (int k = 1; k >= 0; --k) {
        const double p = es.eigenvalues()(k);
        if (p <= 1e-15) continue;
        const PureRun run = evolve_pure(seg, cfg, field, es.eigenvectors().col(k), T, opts);
        rho += p * run.reduced;
        agg.steps += run.diag.steps;
        agg.min_step = std::min(agg.min_step, run.diag.min_step);
        agg.max_step = std::max(agg.max_step, run.diag.max_step);
        agg.step_bound = run.diag.step_bound;
        agg.norm_drift = std::max(agg.norm_drift, run.diag.norm_drift);
        agg.initial_norm_weight = run.diag.initial_norm_weight;
        agg.dimension = run.diag.dimension;
        ++agg.pure_runs;
    }
    if (!std::isfinite(agg.min_step)) agg.min_step = 0.0;
    if (agg.norm_drift > 1e-9) {
        throw AccuracyError(fmt::format("state norm drifted by {:.3g}", agg.norm_drift));
    }
    out.reduced = QubitState::perturbative(rho);
    out.diagnostics = agg;
    return out;
}

ConvergenceReport convergence_check(const TrajectorySegment& seg, const CavityConfig& cfg, const FieldPrep& initial,
                                    const QubitState& rho0, double T, const std::vector<LadderRung>& ladder,
                                    double threshold, const OracleOptions& opts, Execution exec) {
    if (ladder.size() < 2) throw DomainError("convergence ladder needs at least two rungs");
    ConvergenceReport report;
    report.rows.resize(ladder.size());
    std::vector<std::exception_ptr> errors(ladder.size());
    auto work = [&](int i) {
        try {
            CavityConfig c = cfg;
            c.n_modes = std::max(c.n_modes, ladder[i].n_modes);
            const auto spec = TruncatedFieldSpec::uniform(ladder[i].n_modes, ladder[i].n_max, initial);
            const OracleResult r = exact_evolve(seg, c, spec, rho0, T, opts);
            report.rows[i].rung = ladder[i];
            report.rows[i].bloch = r.reduced.bloch();
            report.rows[i].diagnostics = r.diagnostics;
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const int n = static_cast<int>(ladder.size());
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) work(i);
    } else {
        for (int i = 0; i < n; ++i) work(i);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        const double change = (report.rows[i].bloch - report.rows[i - 1].bloch).norm();
        report.rows[i].change_from_previous = change;
        report.max_change = std::max(report.max_change, change);
        if (i >= 2 && change > report.rows[i - 1].change_from_previous) report.monotone = false;
    }
    report.final_change = report.rows.back().change_from_previous;
    report.passed = report.final_change < threshold;
    return report;
}

}  // namespace accelgates
