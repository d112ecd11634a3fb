#include "qlimit/limit_theory.hpp"

#include <algorithm>
#include <cmath>

#include "qlimit/errors.hpp"

namespace qlimit {

namespace {

double max_abs(const Matrix& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

} // namespace

ScalingSetup kerr_setup(double chi, Index dim)
{
    if (chi == 0.0 || !std::isfinite(chi)) {
        throw InvalidArgument("Kerr setup needs finite nonzero chi");
    }
    if (dim < 3) {
        throw InvalidArgument("Kerr setup needs dim >= 3");
    }
    const SpaceSignature sig{dim};
    const Operator a = annihilation(sig, 0);
    const Operator ad = dagger(a);
    ScalingSetup s;
    s.Y = complex(0.0, chi) * (ad * ad * a * a);
    s.A = zero(sig);
    s.F = {zero(sig), zero(sig)};
    s.P0 = mode_diagonal(sig, 0, [](Index m) { return m < 2 ? 1.0 : 0.0; });
    s.Ytilde = mode_diagonal(sig, 0, [chi](Index m) {
        if (m < 2) {
            return complex(0.0, 0.0);
        }
        const auto mm = static_cast<double>(m * (m - 1));
        return complex(0.0, -1.0 / (mm * chi));
    });
    return s;
}

ScalingSetup chi2_setup(double kappa_b, double g, Index dim_a, Index dim_b)
{
    if (!(kappa_b > 0.0) || !std::isfinite(kappa_b)) {
        throw InvalidArgument("chi2 setup needs kappa_b > 0");
    }
    if (dim_a < 3 || dim_b < 2) {
        throw InvalidArgument("chi2 setup needs dim_a >= 3 and dim_b >= 2");
    }
    const SpaceSignature sig{dim_a, dim_b};
    const Operator a = annihilation(sig, 0);
    const Operator b = annihilation(sig, 1);
    const Operator ad = dagger(a);
    const Operator bd = dagger(b);
    ScalingSetup s;
    s.Y = -0.5 * kappa_b * (bd * b);
    s.A = 0.5 * g * (a * a * bd - ad * ad * b);
    s.F = {zero(sig), zero(sig), std::sqrt(kappa_b) * bd};
    s.P0 = mode_diagonal(sig, 1, [](Index m) { return m == 0 ? 1.0 : 0.0; });
    s.Ytilde = mode_diagonal(sig, 1, [kappa_b](Index m) {
        return m == 0 ? 0.0 : -2.0 / (static_cast<double>(m) * kappa_b);
    });
    return s;
}

ScalingSetup tpa_setup(double gamma, Index dim)
{
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidArgument("TPA setup needs gamma > 0");
    }
    if (dim < 3) {
        throw InvalidArgument("TPA setup needs dim >= 3");
    }
    const SpaceSignature sig{dim};
    const Operator a = annihilation(sig, 0);
    const Operator ad = dagger(a);
    ScalingSetup s;
    s.Y = -0.5 * gamma * (ad * ad * a * a);
    s.A = zero(sig);
    s.F = {zero(sig), zero(sig), std::sqrt(gamma) * (ad * ad)};
    s.P0 = mode_diagonal(sig, 0, [](Index m) { return m < 2 ? 1.0 : 0.0; });
    s.Ytilde = mode_diagonal(sig, 0, [gamma](Index m) {
        if (m < 2) {
            return 0.0;
        }
        return -2.0 / (static_cast<double>(m * (m - 1)) * gamma);
    });
    return s;
}

double StructuralReport::max_residual() const
{
    return std::max({projector, y_annihilates, ytilde_inverts, ytilde_retained});
}

StructuralReport verify_structural(const ScalingSetup& setup)
{
    const SpaceSignature& sig = setup.Y.sig();
    require_same_space(sig, setup.P0.sig(), "structural check");
    require_same_space(sig, setup.Ytilde.sig(), "structural check");
    const Matrix& y = setup.Y.matrix();
    const Matrix& p = setup.P0.matrix();
    const Matrix& yt = setup.Ytilde.matrix();
    const Matrix complement = Matrix::Identity(p.rows(), p.cols()) - p;

    StructuralReport r;
    r.projector = std::max(max_abs(p * p - p), max_abs(p - p.adjoint()));
    r.y_annihilates = std::max(max_abs(y * p), max_abs(p * y)) / std::max(1.0, max_abs(y));
    r.ytilde_inverts = std::max(max_abs(yt * y - complement), max_abs(y * yt - complement));
    r.ytilde_retained = std::max(max_abs(yt * p), max_abs(p * yt)) / std::max(1.0, max_abs(yt));
    return r;
}

std::string_view observable_column(Observable obs, const SpaceSignature& sig)
{
    const bool single = sig.mode_count() == 1;
    switch (obs) {
    case Observable::Pop0:
        return single ? "pop0" : "pop0a0b";
    case Observable::Pop1:
        return single ? "pop1" : "pop1a0b";
    case Observable::Leakage:
        return "leakage";
    case Observable::PhotonNumber:
        return "n_expect";
    }
    throw InvalidArgument("unknown observable");
}

Observable parse_observable(std::string_view name)
{
    if (name == "pop0" || name == "pop0a0b") {
        return Observable::Pop0;
    }
    if (name == "pop1" || name == "pop1a0b") {
        return Observable::Pop1;
    }
    if (name == "leakage") {
        return Observable::Leakage;
    }
    if (name == "n_expect") {
        return Observable::PhotonNumber;
    }
    throw InvalidArgument("unknown observable '" + std::string(name) + "'");
}

DensityMatrix vacuum(const SpaceSignature& sig)
{
    const std::vector<Index> occ(sig.mode_count(), 0);
    return DensityMatrix::pure(fock_state(sig, occ));
}

double sup_deviation(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size()) {
        throw DimensionMismatch("sup deviation: series lengths differ");
    }
    double dev = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dev = std::max(dev, std::abs(a[k] - b[k]));
    }
    return dev;
}

double peak_prominence(const std::vector<double>& values, std::size_t k)
{
    const double peak = values[k];
    double left = peak;
    for (std::size_t j = k; j-- > 0 && values[j] <= peak;) {
        left = std::min(left, values[j]);
    }
    double right = peak;
    for (std::size_t j = k + 1; j < values.size() && values[j] <= peak; ++j) {
        right = std::min(right, values[j]);
    }
    return peak - std::max(left, right);
}

std::size_t count_local_maxima(const std::vector<double>& times, const std::vector<double>& values,
                               double t_max, double min_prominence)
{
    if (times.size() != values.size()) {
        throw DimensionMismatch("local maxima: series lengths differ");
    }
    if (!(min_prominence >= 0.0)) {
        throw InvalidArgument("local maxima: prominence threshold must be non-negative");
    }
    std::size_t count = 0;
    for (std::size_t k = 1; k + 1 < values.size() && times[k + 1] <= t_max + 1e-12; ++k) {
        if (values[k] > values[k - 1] && values[k] > values[k + 1]
            && (min_prominence == 0.0 || peak_prominence(values, k) >= min_prominence)) {
            ++count;
        }
    }
    return count;
}

namespace {

Comparison assemble(Trajectory pre, Trajectory limit, Observable observable)
{
    Comparison c;
    c.pre_trajectory = std::move(pre);
    c.limit_trajectory = std::move(limit);
    c.times = c.pre_trajectory.times;
    c.pre = c.pre_trajectory.column(observable_column(observable, c.pre_trajectory.sig));
    c.limit = c.limit_trajectory.column(observable_column(observable, c.limit_trajectory.sig));
    c.deviation = sup_deviation(c.pre, c.limit);
    const auto& leak = c.pre_trajectory.column("leakage");
    c.max_leakage_pre = *std::max_element(leak.begin(), leak.end());
    return c;
}

} // namespace

Comparison compare_prelimit_limit(const SLHModel& pre_model, const SLHModel& limit_model,
                                  Observable observable, const IntegratorConfig& config)
{
    return assemble(integrate(pre_model, vacuum(pre_model.sig), config),
                    integrate(limit_model, vacuum(limit_model.sig), config), observable);
}

bool ConvergenceReport::deviations_nonincreasing() const
{
    return std::is_sorted(deviations.rbegin(), deviations.rend());
}

bool ConvergenceReport::leakages_nonincreasing() const
{
    return std::is_sorted(max_leakages.rbegin(), max_leakages.rend());
}

ConvergenceReport convergence_sweep(const ModelFactory& family, const std::vector<double>& parameters,
                                    const SLHModel& limit_model, Observable observable,
                                    const IntegratorConfig& config)
{
    ConvergenceReport report;
    report.parameters = parameters;
    const Trajectory limit_traj = integrate(limit_model, vacuum(limit_model.sig), config);
    for (const double p : parameters) {
        const SLHModel pre = family(p);
        Comparison c = assemble(integrate(pre, vacuum(pre.sig), config), limit_traj, observable);
        report.deviations.push_back(c.deviation);
        report.max_leakages.push_back(c.max_leakage_pre);
        report.oscillations.push_back(count_local_maxima(
            c.times, c.pre_trajectory.column("n_expect"), config.t_end));
        report.comparisons.push_back(std::move(c));
    }
    return report;
}

std::vector<double> mode_level_series(const Trajectory& traj, std::size_t mode, std::size_t level)
{
    std::vector<double> out;
    out.reserve(traj.mode_populations.size());
    for (const auto& sample : traj.mode_populations) {
        if (mode >= sample.size() || level >= sample[mode].size()) {
            throw DimensionMismatch("mode/level outside trajectory space");
        }
        out.push_back(sample[mode][level]);
    }
    return out;
}

} // namespace qlimit
