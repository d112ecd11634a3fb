#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qlimit/fock.hpp"
#include "qlimit/master_equation.hpp"
#include "qlimit/slh.hpp"

namespace qlimit {

// Partial trace down to one mode.
[[nodiscard]] Matrix reduce_to_mode(const Matrix& rho, const SpaceSignature& sig, std::size_t mode);
[[nodiscard]] DensityMatrix reduce_to_mode(const DensityMatrix& rho, std::size_t mode);

// Quadratures x = (a + a^dag)/sqrt2, p = (a - a^dag)/(i sqrt2); alpha = (x + ip)/sqrt2.
struct WignerGridSpec {
    double x_min = -4.0;
    double x_max = 4.0;
    double p_min = -4.0;
    double p_max = 4.0;
    Index nx = 101;
    Index np = 101;

    void validate() const;
};

struct WignerGrid {
    std::vector<double> xs;
    std::vector<double> ps;
    Eigen::MatrixXd values; // values(ip, ix) = W(xs[ix], ps[ip])

    // Area element in the alpha plane, dx dp / 2: W is normalized so that its
    // integral over d^2 alpha is one.
    [[nodiscard]] double cell_area() const;
    [[nodiscard]] double integral() const;
    [[nodiscard]] double min() const { return values.minCoeff(); }
};

// W(alpha) = (2/pi) Tr[rho D(alpha) Pi D(alpha)^dag]. Throws NumericalError when
// the top Fock level of rho holds more than 1e-6 population.
[[nodiscard]] WignerGrid wigner(const Matrix& rho, const WignerGridSpec& grid = {});
[[nodiscard]] WignerGrid wigner(const DensityMatrix& rho, const WignerGridSpec& grid = {});
[[nodiscard]] double wigner_min(const DensityMatrix& rho, const WignerGridSpec& grid = {});

struct MomentSet {
    complex mean{0.0, 0.0};      // <a>
    complex second{0.0, 0.0};    // <a a>
    double number = 0.0;         // <a^dag a>
    Eigen::Matrix2d covariance;  // quadrature covariance, vacuum = I/2

    // nu = 2 sqrt(det sigma); 1 for pure Gaussian states.
    [[nodiscard]] double symplectic_eigenvalue() const;
    // sigma + (i/2) Omega >= 0 up to `tolerance`.
    [[nodiscard]] bool satisfies_uncertainty(double tolerance = 1e-8) const;
};

[[nodiscard]] MomentSet moments(const Matrix& rho);
[[nodiscard]] MomentSet moments(const DensityMatrix& rho);

// In nats. Eigenvalues below 1e-14 are dropped.
[[nodiscard]] double von_neumann_entropy(const Matrix& rho);
[[nodiscard]] double von_neumann_entropy(const DensityMatrix& rho);

// Entropy of the Gaussian state with the given moments; nu < 1 from rounding
// is clamped to 1.
[[nodiscard]] double gaussian_reference_entropy(const MomentSet& m);
[[nodiscard]] double gaussian_entropy_from_nu(double nu);

// Relative-entropy non-Gaussianity S(tau_rho) - S(rho).
[[nodiscard]] double delta_B(const Matrix& rho);
[[nodiscard]] double delta_B(const DensityMatrix& rho);

struct Peak {
    double t = 0.0;
    double value = 0.0;
    std::size_t index = 0;
    bool at_endpoint = false;
};

// Grid argmax (first occurrence).
[[nodiscard]] Peak peak_find(const std::vector<double>& times, const std::vector<double>& values);

// Per-sample statistics of the mode-0 reduced state along a run from vacuum.
struct NonGaussTrace {
    std::vector<double> times, delta_b, entropy, gaussian_entropy, n_expect, pop0, pop1, pop2;
    std::vector<Matrix> states; // reduced mode-0 states
    Trajectory trajectory;
};

[[nodiscard]] NonGaussTrace nongauss_trace(const SLHModel& model, const IntegratorConfig& config);

} // namespace qlimit
