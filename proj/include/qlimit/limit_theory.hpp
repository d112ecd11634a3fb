#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "qlimit/fock.hpp"
#include "qlimit/master_equation.hpp"
#include "qlimit/slh.hpp"

namespace qlimit {

// Data of one singular-perturbation limit: Y is the fast generator, A the
// intermediate coupling, F the fast channel couplings, P0 the projector onto
// the retained subspace and Ytilde the inverse of Y on its complement.
struct ScalingSetup {
    Operator Y;
    Operator A;
    std::vector<Operator> F;
    Operator P0;
    Operator Ytilde;
};

[[nodiscard]] ScalingSetup kerr_setup(double chi, Index dim);
// A = (g/2)(a a b^dag - a^dag a^dag b) carries the coupling that is scaled up
// alongside kappa_b.
[[nodiscard]] ScalingSetup chi2_setup(double kappa_b, double g, Index dim_a, Index dim_b);
// gamma = g^2 / kappa_b.
[[nodiscard]] ScalingSetup tpa_setup(double gamma, Index dim);

struct StructuralReport {
    double projector = 0.0;       // max(|P0^2 - P0|, |P0 - P0^dag|)
    double y_annihilates = 0.0;   // max(|Y P0|, |P0 Y|) / max(1, |Y|)
    double ytilde_inverts = 0.0;  // max(|Yt Y - (I - P0)|, |Y Yt - (I - P0)|)
    double ytilde_retained = 0.0; // max(|Yt P0|, |P0 Yt|) / max(1, |Yt|)

    [[nodiscard]] double max_residual() const;
    [[nodiscard]] bool passed(double tolerance = 1e-12) const { return max_residual() <= tolerance; }
};

// Residuals are entrywise max-abs norms.
[[nodiscard]] StructuralReport verify_structural(const ScalingSetup& setup);

enum class Observable { Pop0, Pop1, Leakage, PhotonNumber };

// Column of the standard trajectory record holding `obs` on space `sig`.
[[nodiscard]] std::string_view observable_column(Observable obs, const SpaceSignature& sig);
[[nodiscard]] Observable parse_observable(std::string_view name);

struct Comparison {
    double deviation = 0.0; // sup_t |obs_pre - obs_limit|
    double max_leakage_pre = 0.0;
    std::vector<double> times;
    std::vector<double> pre;
    std::vector<double> limit;
    Trajectory pre_trajectory;
    Trajectory limit_trajectory;
};

// Both models start from their vacuum and are sampled on the same output grid.
[[nodiscard]] Comparison compare_prelimit_limit(const SLHModel& pre_model, const SLHModel& limit_model,
                                                Observable observable, const IntegratorConfig& config);

[[nodiscard]] double sup_deviation(const std::vector<double>& a, const std::vector<double>& b);

// Height of values[k] above the higher of the two minima separating it from
// a taller sample (or the series end) on each side.
[[nodiscard]] double peak_prominence(const std::vector<double>& values, std::size_t k);

// Strict interior local maxima of `values` over samples with time <= t_max.
// With min_prominence > 0, maxima less prominent than the threshold are skipped.
[[nodiscard]] std::size_t count_local_maxima(const std::vector<double>& times,
                                             const std::vector<double>& values, double t_max,
                                             double min_prominence = 0.0);

struct ConvergenceReport {
    std::vector<double> parameters;
    std::vector<double> deviations;
    std::vector<double> max_leakages;
    std::vector<std::size_t> oscillations; // local maxima of n_expect on the pre-limit run
    std::vector<Comparison> comparisons;

    // Deviation does not increase along the parameter list.
    [[nodiscard]] bool deviations_nonincreasing() const;
    [[nodiscard]] bool leakages_nonincreasing() const;
};

using ModelFactory = std::function<SLHModel(double)>;

[[nodiscard]] ConvergenceReport convergence_sweep(const ModelFactory& family,
                                                  const std::vector<double>& parameters,
                                                  const SLHModel& limit_model, Observable observable,
                                                  const IntegratorConfig& config);

// Vacuum state on a model's space.
[[nodiscard]] DensityMatrix vacuum(const SpaceSignature& sig);

// Series of one level of one mode's marginal photon-number distribution.
[[nodiscard]] std::vector<double> mode_level_series(const Trajectory& traj, std::size_t mode,
                                                    std::size_t level);

} // namespace qlimit
