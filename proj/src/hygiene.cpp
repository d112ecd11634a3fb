#include "qlimit/hygiene.hpp"

#include <algorithm>
#include <cmath>

#include "qlimit/errors.hpp"

namespace qlimit {

namespace {

double inf_norm(const Matrix& m)
{
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double trajectory_difference(const Trajectory& a, const Trajectory& b)
{
    if (a.times.size() != b.times.size() || a.values.size() != b.values.size()) {
        throw InvariantViolation("trajectories sampled on different grids");
    }
    double diff = (a.final_state - b.final_state).cwiseAbs().maxCoeff();
    for (std::size_t c = 0; c < a.values.size(); ++c) {
        for (std::size_t s = 0; s < a.values[c].size(); ++s) {
            diff = std::max(diff, std::abs(a.values[c][s] - b.values[c][s]));
        }
    }
    return diff;
}

} // namespace

double generator_scale(const SLHModel& model)
{
    double scale = 2.0 * inf_norm(model.H.matrix());
    for (const auto& l : model.L) {
        const double n = inf_norm(l.matrix());
        scale += 2.0 * n * n;
    }
    return scale;
}

DensityMatrix probe_state(const SpaceSignature& sig)
{
    Vector psi = Vector::Zero(sig.total());
    for (Index k = 0; k < sig.total(); ++k) {
        const auto occ = sig.occupations(k);
        if (std::all_of(occ.begin(), occ.end(), [](Index n) { return n <= 2; })) {
            Index total = 0;
            for (const Index n : occ) {
                total += n;
            }
            psi(k) = std::polar(1.0 / (1.0 + static_cast<double>(total)), 0.3 * static_cast<double>(k));
        }
    }
    psi.normalize();
    return DensityMatrix::pure(StateVector(sig, psi));
}

double OrderMeasurement::order() const
{
    return std::log2(error_coarse / error_fine);
}

namespace {

OrderMeasurement order_at(const SLHModel& model, const DensityMatrix& rho0, double dt, std::size_t steps)
{
    OrderMeasurement m;
    m.dt = dt;
    m.t_end = dt * static_cast<double>(steps);

    IntegratorConfig ref;
    ref.t_end = m.t_end;
    ref.output_dt = m.t_end;
    ref.rtol = 1e-12;
    ref.atol = 1e-14;
    ref.trace_drift_per_time = 1e-6;
    const Matrix exact = integrate(model, rho0, ref).final_state;

    IntegratorConfig fixed = ref;
    fixed.method = Method::RK4;
    fixed.dt = m.dt;
    m.error_coarse = (integrate(model, rho0, fixed).final_state - exact).norm();
    fixed.dt = 0.5 * m.dt;
    m.error_fine = (integrate(model, rho0, fixed).final_state - exact).norm();
    return m;
}

} // namespace

OrderMeasurement measure_rk4_order(const SLHModel& model, const DensityMatrix& rho0, double step_scale,
                                   std::size_t steps)
{
    const double scale = generator_scale(model);
    if (!(scale > 0.0) || !(step_scale > 0.0) || steps == 0) {
        throw InvalidArgument("order measurement needs a nonzero generator and step");
    }
    // The bound is loose when the probe never reaches the fastest levels;
    // grow dt until the fine error clears rounding. With `steps` fixed the
    // span doubles with dt, so asymptotic errors grow 32x per doubling; a
    // larger jump or a failed run marks the edge of the stability region.
    constexpr double kErrorFloor = 1e-11;
    constexpr double kRoundingLevel = 1e-13;
    double dt = step_scale / scale;
    OrderMeasurement m = order_at(model, rho0, dt, steps);
    for (int k = 0; k < 24 && m.error_fine < kErrorFloor; ++k) {
        dt *= 2.0;
        OrderMeasurement next;
        try {
            next = order_at(model, rho0, dt, steps);
        } catch (const Error&) {
            break;
        }
        if (!std::isfinite(next.error_coarse) || next.error_coarse > 1e-3
            || (m.error_coarse > kRoundingLevel && next.error_coarse > 64.0 * m.error_coarse)) {
            break;
        }
        m = next;
    }
    return m;
}

SLHModel with_channel_phases(const SLHModel& model, const std::vector<double>& theta)
{
    if (theta.size() != model.channels()) {
        throw DimensionMismatch("one phase per channel required");
    }
    SLHModel out = model;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        out.L[i] = std::polar(1.0, theta[i]) * model.L[i];
    }
    return out;
}

double phase_invariance_deviation(const SLHModel& model, const DensityMatrix& rho0,
                                  const IntegratorConfig& config)
{
    std::vector<double> theta(model.channels());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        theta[i] = 0.7 + static_cast<double>(i);
    }
    return trajectory_difference(integrate(model, rho0, config),
                                 integrate(with_channel_phases(model, theta), rho0, config));
}

double steady_fixed_point_displacement(const SLHModel& model, const DensityMatrix& rho_ss,
                                       const IntegratorConfig& config, double window)
{
    IntegratorConfig cfg = config;
    cfg.t_end = window;
    cfg.output_dt = window;
    return (integrate(model, rho_ss, cfg).final_state - rho_ss.matrix()).norm();
}

} // namespace qlimit
