#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>

#include "qlimit/fock.hpp"
#include "qlimit/slh.hpp"

namespace qlimit {

// Hermitian, unit-trace, positive-semidefinite state. The constructor checks
// all three at the tolerances below and throws InvariantViolation otherwise.
class DensityMatrix {
public:
    static constexpr double kHermiticityTolerance = 1e-10;
    static constexpr double kTraceTolerance = 1e-8;
    static constexpr double kPositivityTolerance = 1e-8;

    DensityMatrix(SpaceSignature sig, Matrix entries);
    static DensityMatrix pure(const StateVector& psi);

    [[nodiscard]] const SpaceSignature& sig() const noexcept { return sig_; }
    [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }
    [[nodiscard]] Index dim() const noexcept { return m_.rows(); }

    struct Diagnostics {
        double hermiticity = 0.0; // max |rho - rho^dag|
        double trace_error = 0.0; // |Tr rho - 1|
        double min_eigenvalue = 0.0;
    };
    [[nodiscard]] static Diagnostics diagnose(const Matrix& rho);

private:
    SpaceSignature sig_;
    Matrix m_;
};

// Precompiled right-hand side of the master equation for one SLH model:
//   drho/dt = -i(Heff rho - rho Heff^dag) + sum_i L_i^dag rho L_i,
//   Heff = H - (i/2) sum_i L_i L_i^dag.
// Zero channels contribute nothing and are skipped.
class Liouvillian {
public:
    using Sparse = Eigen::SparseMatrix<complex>;

    explicit Liouvillian(const SLHModel& model);

    [[nodiscard]] const SpaceSignature& sig() const noexcept { return sig_; }
    [[nodiscard]] Matrix apply(const Matrix& rho) const;
    // Allocation-free variant; `out` and `scratch` are resized as needed.
    void apply(const Matrix& rho, Matrix& out, Matrix& scratch) const;
    // Same result for hermitian rho, at lower cost; used by the integrator,
    // whose stage states are hermitian up to rounding.
    void apply_hermitian(const Matrix& rho, Matrix& out, Matrix& scratch) const;

    // Dense d^2 x d^2 superoperator acting on column-stacked vec(rho).
    [[nodiscard]] Matrix superoperator() const;

private:
    SpaceSignature sig_;
    Sparse heff_;
    Sparse heff_adj_;
    std::vector<Sparse> l_;     // stored L (conjugate convention)
    std::vector<Sparse> l_adj_; // L^dag
};

[[nodiscard]] Matrix liouvillian_apply(const SLHModel& model, const Matrix& rho);

enum class Method { RK4, RK45 };

struct IntegratorConfig {
    Method method = Method::RK45;
    double dt = 1e-3;  // fixed step (RK4)
    double rtol = 1e-8; // adaptive tolerances (RK45)
    double atol = 1e-10;
    double t_end = 2.0;
    double output_dt = 0.005;
    // Store the full state every `checkpoint_stride` output samples (0 = never;
    // the final state is always kept).
    std::size_t checkpoint_stride = 10;
    // Abort when |Tr rho - 1| exceeds 100x this bound times max(t, 1).
    double trace_drift_per_time = 1e-8;

    void validate() const;
};

struct Trajectory {
    SpaceSignature sig;
    bool truncated_fock = true;
    std::vector<double> times;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> values; // values[column][sample]
    // Marginal photon-number distribution per mode: [sample][mode][level].
    std::vector<std::vector<std::vector<double>>> mode_populations;
    std::vector<std::size_t> checkpoint_samples;
    std::vector<Matrix> checkpoints;
    Matrix final_state;

    double max_trace_error = 0.0;
    double min_eigenvalue = 0.0; // over checkpoints
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    [[nodiscard]] const std::vector<double>& column(std::string_view name) const;
    [[nodiscard]] bool has_column(std::string_view name) const;
};

// Called once per output sample with the (hermitized) state.
using SampleCallback = std::function<void(double t, const Matrix& rho)>;

[[nodiscard]] Trajectory integrate(const SLHModel& model, const DensityMatrix& rho0,
                                   const IntegratorConfig& config,
                                   const SampleCallback& on_sample = {});

struct SteadyStateOptions {
    Index dense_limit = 64; // max Hilbert-space dimension
};

[[nodiscard]] DensityMatrix steady_state(const SLHModel& model, const SteadyStateOptions& options = {});

[[nodiscard]] complex expectation(const Matrix& rho, const Operator& x);
[[nodiscard]] complex expectation(const DensityMatrix& rho, const Operator& x);
// <n|rho|n> for each occupation tuple.
[[nodiscard]] std::vector<double> populations(const DensityMatrix& rho,
                                              const std::vector<std::vector<Index>>& basis_labels);
// Tr rho - Tr[P rho P].
[[nodiscard]] double leakage(const DensityMatrix& rho, const Operator& qubit_projector);
[[nodiscard]] double leakage(const Matrix& rho, const Operator& qubit_projector);
// Projector onto span{|0,0,..>, |1,0,..>}.
[[nodiscard]] Operator qubit_projector(const SpaceSignature& sig);
// Marginal photon-number distribution of one mode.
[[nodiscard]] std::vector<double> mode_population(const Matrix& rho, const SpaceSignature& sig,
                                                  std::size_t mode);

// Max over samples and modes of the population held in the top `top_k` Fock
// levels. Zero for models that are not Fock truncations.
[[nodiscard]] double truncation_check(const Trajectory& trajectory, std::size_t top_k = 1);

} // namespace qlimit
