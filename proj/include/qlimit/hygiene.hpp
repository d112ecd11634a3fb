#pragma once

#include <cstddef>
#include <vector>

#include "qlimit/master_equation.hpp"
#include "qlimit/slh.hpp"

namespace qlimit {

// Upper bound on the spectral radius of the Liouvillian:
// 2 |H| + 2 sum_i |L_i|^2 in the induced infinity norm.
[[nodiscard]] double generator_scale(const SLHModel& model);

// Normalized superposition over occupations <= 2 in every mode, with
// distinct phases; populates coherences as well as populations.
[[nodiscard]] DensityMatrix probe_state(const SpaceSignature& sig);

struct OrderMeasurement {
    double dt = 0.0;
    double t_end = 0.0;
    double error_coarse = 0.0; // Frobenius error at dt
    double error_fine = 0.0;   // at dt / 2
    [[nodiscard]] double order() const;
};

// Fixed-step RK4 at dt and dt / 2 over `steps` coarse steps, against an RK45
// reference at rtol 1e-12. dt starts at step_scale / generator_scale and is
// doubled while the fine error stays below 1e-11, stopping before RK4 leaves
// its asymptotic regime.
[[nodiscard]] OrderMeasurement measure_rk4_order(const SLHModel& model, const DensityMatrix& rho0,
                                                 double step_scale = 0.1, std::size_t steps = 40);

// Multiplies L_i by exp(i theta_i); S and H are unchanged.
[[nodiscard]] SLHModel with_channel_phases(const SLHModel& model, const std::vector<double>& theta);

// Max abs difference of every trajectory column and of the final state between
// the model and its channel-rotated copy (theta_i = 0.7 + i).
[[nodiscard]] double phase_invariance_deviation(const SLHModel& model, const DensityMatrix& rho0,
                                                const IntegratorConfig& config);

// Frobenius displacement after integrating from rho_ss for `window`.
[[nodiscard]] double steady_fixed_point_displacement(const SLHModel& model, const DensityMatrix& rho_ss,
                                                     const IntegratorConfig& config, double window = 1.0);

} // namespace qlimit
