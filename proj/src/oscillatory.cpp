#include "accelgates/oscillatory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <ostream>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <fmt/format.h>

#include "accelgates/errors.hpp"

namespace accelgates {

namespace {

constexpr int kNodes = 16;
constexpr int kMaxDepth = 40;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Gauss-Legendre rule on [-1, 1] together with the spectral integration
// matrix S(k, j) = int_{-1}^{x_k} l_j(x) dx of its Lagrange basis.
struct PanelRule {
    std::array<double, kNodes> x{};
    std::array<double, kNodes> w{};
    std::array<std::array<double, kNodes>, kNodes> S{};

    PanelRule() {
        using rule = boost::math::quadrature::gauss<double, kNodes>;
        const auto& abs = rule::abscissa();
        const auto& wts = rule::weights();
        // boost stores the non-negative half; kNodes is even so there is no zero node.
        constexpr int half = kNodes / 2;
        for (int i = 0; i < half; ++i) {
            x[half - 1 - i] = -abs[i];
            w[half - 1 - i] = wts[i];
            x[half + i] = abs[i];
            w[half + i] = wts[i];
        }
        for (int k = 0; k < kNodes; ++k) {
            for (int j = 0; j < kNodes; ++j) {
                double acc = 0.5 * (x[k] + 1.0);
                for (int n = 1; n < kNodes; ++n) {
                    const double pn_j = boost::math::legendre_p(n, x[j]);
                    const double prim = boost::math::legendre_p(n + 1, x[k]) - boost::math::legendre_p(n - 1, x[k]);
                    acc += 0.5 * pn_j * prim;
                }
                S[k][j] = w[j] * acc;
            }
        }
    }
};

const PanelRule& panel_rule() {
    static const PanelRule rule;
    return rule;
}

struct ModeData {
    double omega;
    double k;
};

ModeData mode_data(const CavityConfig& cfg, int j) {
    const double k = mode_wavenumber(cfg, j);
    return {k, k};
}

cplx evaluate(const TrajectorySegment& seg, const CavityConfig& cfg, const ModeData& md, Sign s,
              double tau) {
    const SpacetimePoint p = position(seg, tau);
    require_inside(cfg, p.x);
    const double amp = std::sin(md.k * p.x);
    const double phase = static_cast<int>(s) * cfg.omega_gap * tau + md.omega * p.t;
    return std::polar(amp, phase);
}

double rate_bound(const TrajectorySegment& seg, const CavityConfig& cfg, double omega, double tau) {
    const double growth = (seg.kind == TrajectoryKind::UniformAcceleration) ? std::exp(std::abs(seg.a) * tau) : 1.0;
    return std::abs(cfg.omega_gap) + omega * growth;
}

// Width of the next panel starting at tau so that rate_bound * width <= pi/4.
// rate_bound grows with tau, so evaluating it at the far end keeps the bound.
double next_width(const TrajectorySegment& seg, const CavityConfig& cfg, double omega, double tau, double end) {
    double h = kMaxPhasePerPanel / rate_bound(seg, cfg, omega, tau);
    h = std::min(h, end - tau);
    const double far = rate_bound(seg, cfg, omega, tau + h);
    return std::min(end - tau, kMaxPhasePerPanel / far);
}

// Planned panel count for the phase cap over [begin, end].
double planned_panels(const TrajectorySegment& seg, const CavityConfig& cfg, double omega, double begin,
                      double end) {
    double phase = std::abs(cfg.omega_gap) * (end - begin);
    if (seg.kind == TrajectoryKind::UniformAcceleration && seg.a != 0.0) {
        const double aa = std::abs(seg.a);
        phase += omega * (std::exp(aa * end) - std::exp(aa * begin)) / aa;
    } else {
        phase += omega * (end - begin);
    }
    return phase / kMaxPhasePerPanel + 1.0;
}

constexpr std::int64_t kEvalsPerPanel = 3 * kNodes;

void check_budget(const TrajectorySegment& seg, const CavityConfig& cfg, double omega, double begin, double end,
                  std::int64_t max_evals, int sweeps) {
    const double planned = planned_panels(seg, cfg, omega, begin, end) * kEvalsPerPanel * sweeps;
    if (planned > static_cast<double>(max_evals)) {
        throw AccuracyError(fmt::format("oscillatory integral needs about {:.3g} integrand evaluations, "
                                        "budget is {}",
                                        planned, max_evals));
    }
}

// Forward sweep over [begin, end] with one integrand (plain) or an inner/outer
// pair (nested). The sweep stops at every requested checkpoint.
class Sweep {
public:
    Sweep(const TrajectorySegment& seg, const CavityConfig& cfg, int j, Sign inner,
          std::optional<Sign> outer, const QuadratureOptions& opts, double begin, double end)
        : seg_(seg), cfg_(cfg), md_(mode_data(cfg, j)), inner_(inner), outer_(outer), opts_(opts),
          begin_(begin), span_(end - begin) {
        if (!(opts.tol > 0.0)) throw DomainError("quadrature tolerance must be > 0");
    }

    // Advance the sweep to `until`, accumulating.
    void advance_to(double until) {
        while (pos_ < until) {
            const double h = next_width(seg_, cfg_, md_.omega, pos_, until);
            const double b = (until - (pos_ + h) <= 1e-14 * std::max(1.0, until)) ? until : pos_ + h;
            refine(pos_, b, 0);
            pos_ = b;
        }
    }

    cplx inner_value() const { return inner_sum_; }
    cplx nested_value() const { return nested_sum_; }
    double inner_error() const { return inner_err_ + roundoff(inner_abs_); }
    double nested_error() const { return nested_err_ + roundoff(nested_abs_); }
    std::int64_t evaluations() const { return evals_; }
    std::vector<Panel>&& take_panels() { return std::move(panels_); }
    bool exhausted() const { return failed_; }

private:
    struct PanelSums {
        cplx d_inner;
        cplx d_nested;
        double abs_inner;
        double abs_nested;
    };

    double roundoff(double abs_sum) const { return 64.0 * kEps * abs_sum; }

    // Plain / nested contribution of [a, b], starting from cumulative inner value `start`.
    PanelSums panel(double a, double b, cplx start) {
        const auto& rule = panel_rule();
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        std::array<cplx, kNodes> fi{};
        std::array<cplx, kNodes> fo{};
        for (int k = 0; k < kNodes; ++k) {
            const double tau = mid + half * rule.x[k];
            fi[k] = evaluate(seg_, cfg_, md_, inner_, tau);
            if (outer_) {
                fo[k] = (*outer_ == inner_) ? fi[k] : evaluate(seg_, cfg_, md_, *outer_, tau);
            }
        }
        evals_ += outer_ && *outer_ != inner_ ? 2 * kNodes : kNodes;
        PanelSums out{};
        for (int k = 0; k < kNodes; ++k) {
            out.d_inner += rule.w[k] * fi[k];
            out.abs_inner += rule.w[k] * std::abs(fi[k]);
        }
        out.d_inner *= half;
        out.abs_inner *= half;
        if (outer_) {
            for (int k = 0; k < kNodes; ++k) {
                cplx cum{};
                for (int m = 0; m < kNodes; ++m) cum += rule.S[k][m] * fi[m];
                const cplx inner_at = start + half * cum;
                const cplx term = inner_at * std::conj(fo[k]);
                out.d_nested += rule.w[k] * term;
                out.abs_nested += rule.w[k] * std::abs(term);
            }
            out.d_nested *= half;
            out.abs_nested *= half;
        }
        return out;
    }

    void refine(double a, double b, int depth) {
        if (evals_ > opts_.max_evals) {
            throw AccuracyError(fmt::format("integrand budget of {} evaluations exhausted", opts_.max_evals),
                                inner_sum_, std::numeric_limits<double>::infinity());
        }
        const double m = 0.5 * (a + b);
        const PanelSums whole = panel(a, b, inner_sum_);
        const PanelSums left = panel(a, m, inner_sum_);
        const PanelSums right = panel(m, b, inner_sum_ + left.d_inner);
        const cplx fine_inner = left.d_inner + right.d_inner;
        const cplx fine_nested = left.d_nested + right.d_nested;
        const double err_inner = std::abs(whole.d_inner - fine_inner);
        const double err_nested = std::abs(whole.d_nested - fine_nested);
        const double local = opts_.tol * (b - a) / span_;
        const bool converged = err_inner <= local && (!outer_ || err_nested <= local);
        if (!converged && depth < kMaxDepth) {
            refine(a, m, depth + 1);
            refine(m, b, depth + 1);
            return;
        }
        if (!converged) failed_ = true;
        inner_sum_ += fine_inner;
        nested_sum_ += fine_nested;
        inner_err_ += err_inner + roundoff(left.abs_inner + right.abs_inner);
        nested_err_ += err_nested + roundoff(left.abs_nested + right.abs_nested);
        inner_abs_ += left.abs_inner + right.abs_inner;
        nested_abs_ += left.abs_nested + right.abs_nested;
        if (opts_.record_panels) panels_.push_back({a, b - a});
    }

    const TrajectorySegment& seg_;
    const CavityConfig& cfg_;
    ModeData md_;
    Sign inner_;
    std::optional<Sign> outer_;
    QuadratureOptions opts_;
    double begin_;
    double span_;
    double pos_ = begin_;
    cplx inner_sum_{};
    cplx nested_sum_{};
    double inner_err_ = 0.0;
    double nested_err_ = 0.0;
    double inner_abs_ = 0.0;
    double nested_abs_ = 0.0;
    std::int64_t evals_ = 0;
    bool failed_ = false;
    std::vector<Panel> panels_;
};

void check_interval(const TrajectorySegment& seg, double begin, double end) {
    if (!(begin >= 0.0) || !(end >= begin) || end > seg.duration) {
        throw DomainError(fmt::format("integration interval [{}, {}] outside segment [0, {}]", begin, end,
                                      seg.duration));
    }
}

}  // namespace

QuadratureOptions QuadratureOptions::from_environment() {
    QuadratureOptions opts;
    if (const char* env = std::getenv("ACCELGATES_MAX_EVALS")) {
        char* endp = nullptr;
        const long long v = std::strtoll(env, &endp, 10);
        if (endp != env && *endp == '\0' && v > 0) opts.max_evals = v;
    }
    return opts;
}

cplx integrand(const TrajectorySegment& seg, const CavityConfig& cfg, int j, Sign s, double tau) {
    return evaluate(seg, cfg, mode_data(cfg, j), s, tau);
}

double phase_rate_bound(const TrajectorySegment& seg, const CavityConfig& cfg, int j, double tau) {
    return rate_bound(seg, cfg, mode_frequency(cfg, j), tau);
}

IntegralResult phase_integral(const TrajectorySegment& seg, const CavityConfig& cfg, int j, Sign s, double T,
                              const QuadratureOptions& opts) {
    return phase_integral(seg, cfg, j, s, 0.0, T, opts);
}

IntegralResult phase_integral(const TrajectorySegment& seg, const CavityConfig& cfg, int j, Sign s,
                              double tau_begin, double tau_end, const QuadratureOptions& opts) {
    check_interval(seg, tau_begin, tau_end);
    IntegralResult out;
    if (tau_end == tau_begin) {
        (void)mode_data(cfg, j);
        return out;
    }
    check_budget(seg, cfg, mode_frequency(cfg, j), tau_begin, tau_end, opts.max_evals, 1);
    Sweep sweep(seg, cfg, j, s, std::nullopt, opts, tau_begin, tau_end);
    sweep.advance_to(tau_end);
    out.value = sweep.inner_value();
    out.error = sweep.inner_error();
    out.evaluations = sweep.evaluations();
    out.panels = sweep.take_panels();
    if (sweep.exhausted() || out.error > opts.tol) {
        throw AccuracyError(fmt::format("phase integral error {:.3g} exceeds tolerance {:.3g}", out.error, opts.tol),
                            out.value, out.error);
    }
    return out;
}

std::vector<IntegralResult> phase_integral_grid(const TrajectorySegment& seg, const CavityConfig& cfg, int j,
                                                Sign s, std::span<const double> taus,
                                                const QuadratureOptions& opts) {
    std::vector<IntegralResult> out(taus.size());
    if (taus.empty()) return out;
    if (!std::is_sorted(taus.begin(), taus.end())) throw DomainError("time grid must be sorted");
    check_interval(seg, taus.front(), taus.back());
    check_budget(seg, cfg, mode_frequency(cfg, j), 0.0, taus.back(), opts.max_evals, 1);
    Sweep sweep(seg, cfg, j, s, std::nullopt, opts, 0.0, std::max(taus.back(), 1e-300));
    for (std::size_t i = 0; i < taus.size(); ++i) {
        sweep.advance_to(taus[i]);
        out[i].value = sweep.inner_value();
        out[i].error = sweep.inner_error();
        out[i].evaluations = sweep.evaluations();
        if (sweep.exhausted() || out[i].error > opts.tol) {
            throw AccuracyError(fmt::format("phase integral error {:.3g} exceeds tolerance {:.3g} at tau = {}",
                                            out[i].error, opts.tol, taus[i]),
                                out[i].value, out[i].error);
        }
    }
    return out;
}

NestedIntegralResult m_integral(const TrajectorySegment& seg, const CavityConfig& cfg, int j, Sign outer,
                                Sign inner, double T, const QuadratureOptions& opts) {
    check_interval(seg, 0.0, T);
    NestedIntegralResult out;
    if (T == 0.0) {
        (void)mode_data(cfg, j);
        return out;
    }
    check_budget(seg, cfg, mode_frequency(cfg, j), 0.0, T, opts.max_evals, outer == inner ? 1 : 2);
    Sweep sweep(seg, cfg, j, inner, outer, opts, 0.0, T);
    sweep.advance_to(T);
    out.value = sweep.nested_value();
    out.inner_total = sweep.inner_value();
    out.error = sweep.nested_error();
    out.inner_error = sweep.inner_error();
    out.evaluations = sweep.evaluations();
    out.panels = sweep.take_panels();
    if (sweep.exhausted() || out.error > opts.tol || out.inner_error > opts.tol) {
        throw AccuracyError(fmt::format("nested integral error {:.3g} exceeds tolerance {:.3g}", out.error, opts.tol),
                            out.value, out.error);
    }
    return out;
}

const ModeIntegrals& PhaseIntegralTable::mode(int j) const {
    for (const auto& m : modes) {
        if (m.mode == j) return m;
    }
    throw DomainError("mode " + std::to_string(j) + " not in integral table");
}

IntegralTables compute_tables(const TrajectorySegment& seg, const CavityConfig& cfg, double T, bool with_nested,
                              const QuadratureOptions& opts, Execution exec, int first_mode) {
    cfg.validate();
    seg.validate();
    if (first_mode < 1 || first_mode > cfg.n_modes) throw DomainError("first mode outside the cavity's mode range");
    const int n = cfg.n_modes - first_mode + 1;
    // Work items: (mode, sign) pairs; results land in fixed slots.
    const int items = 2 * n;
    std::vector<IntegralResult> plain(with_nested ? 0 : items);
    std::vector<NestedIntegralResult> nested(with_nested ? items : 0);
    std::vector<std::exception_ptr> errors(items);

    auto work = [&](int item) {
        const int j = item / 2 + first_mode;
        const Sign s = (item % 2 == 0) ? Sign::Plus : Sign::Minus;
        try {
            if (with_nested) {
                nested[item] = m_integral(seg, cfg, j, s, s, T, opts);
            } else {
                plain[item] = phase_integral(seg, cfg, j, s, T, opts);
            }
        } catch (...) {
            errors[item] = std::current_exception();
        }
    };

    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int item = 0; item < items; ++item) work(item);
    } else {
        for (int item = 0; item < items; ++item) work(item);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    IntegralTables out;
    out.phase.T = T;
    out.phase.modes.resize(n);
    if (with_nested) {
        out.nested.emplace();
        out.nested->T = T;
        out.nested->modes.resize(n);
    }
    for (int r = 0; r < n; ++r) {
        const int j = r + first_mode;
        auto& row = out.phase.modes[r];
        row.mode = j;
        const int ip = 2 * r;
        const int im = ip + 1;
        if (with_nested) {
            row.i_plus = nested[ip].inner_total;
            row.i_minus = nested[im].inner_total;
            row.err_plus = nested[ip].inner_error;
            row.err_minus = nested[im].inner_error;
            row.evals_plus = nested[ip].evaluations;
            row.evals_minus = nested[im].evaluations;
            auto& mrow = out.nested->modes[r];
            mrow.mode = j;
            mrow.m_plus_plus = nested[ip].value;
            mrow.m_minus_minus = nested[im].value;
            mrow.err_plus_plus = nested[ip].error;
            mrow.err_minus_minus = nested[im].error;
        } else {
            row.i_plus = plain[ip].value;
            row.i_minus = plain[im].value;
            row.err_plus = plain[ip].error;
            row.err_minus = plain[im].error;
            row.evals_plus = plain[ip].evaluations;
            row.evals_minus = plain[im].evaluations;
        }
    }
    return out;
}

void write_table_csv(std::ostream& os, const PhaseIntegralTable& table) {
    os << "j,sign,T,re,im,err,evals\n";
    for (const auto& m : table.modes) {
        os << fmt::format("{},+,{:.17g},{:.17g},{:.17g},{:.6g},{}\n", m.mode, table.T, m.i_plus.real(),
                          m.i_plus.imag(), m.err_plus, m.evals_plus);
        os << fmt::format("{},-,{:.17g},{:.17g},{:.17g},{:.6g},{}\n", m.mode, table.T, m.i_minus.real(),
                          m.i_minus.imag(), m.err_minus, m.evals_minus);
    }
}

}  // namespace accelgates
