#include "qlimit/analysis.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "qlimit/errors.hpp"

namespace qlimit {

namespace {

void require_single_mode(const Matrix& rho)
{
    if (rho.rows() != rho.cols() || rho.rows() < 2) {
        throw DimensionMismatch("single-mode analysis needs a square state of dim >= 2");
    }
}

std::vector<double> linspace(double lo, double hi, Index n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
        v[static_cast<std::size_t>(k)] =
            n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    }
    return v;
}

} // namespace

Matrix reduce_to_mode(const Matrix& rho, const SpaceSignature& sig, std::size_t mode)
{
    if (rho.rows() != sig.total() || rho.cols() != sig.total()) {
        throw DimensionMismatch("partial trace: state does not match " + sig.to_string());
    }
    const Index d = sig.mode_dim(mode);
    Index inner = 1;
    Index outer = 1;
    for (std::size_t k = 0; k < sig.mode_count(); ++k) {
        if (k < mode) {
            outer *= sig.dims()[k];
        } else if (k > mode) {
            inner *= sig.dims()[k];
        }
    }
    Matrix out = Matrix::Zero(d, d);
    for (Index o = 0; o < outer; ++o) {
        for (Index i = 0; i < d; ++i) {
            for (Index j = 0; j < d; ++j) {
                complex acc(0.0, 0.0);
                for (Index q = 0; q < inner; ++q) {
                    acc += rho((o * d + i) * inner + q, (o * d + j) * inner + q);
                }
                out(i, j) += acc;
            }
        }
    }
    return out;
}

DensityMatrix reduce_to_mode(const DensityMatrix& rho, std::size_t mode)
{
    const Index d = rho.sig().mode_dim(mode);
    return DensityMatrix(SpaceSignature{d}, reduce_to_mode(rho.matrix(), rho.sig(), mode));
}

void WignerGridSpec::validate() const
{
    if (nx < 2 || np < 2 || !(x_max > x_min) || !(p_max > p_min)) {
        throw InvalidArgument("Wigner grid needs nx, np >= 2 and increasing ranges");
    }
}

double WignerGrid::cell_area() const
{
    const double dx = xs.size() > 1 ? xs[1] - xs[0] : 0.0;
    const double dp = ps.size() > 1 ? ps[1] - ps[0] : 0.0;
    return 0.5 * dx * dp;
}

double WignerGrid::integral() const
{
    return values.sum() * cell_area();
}

WignerGrid wigner(const Matrix& rho, const WignerGridSpec& grid)
{
    grid.validate();
    require_single_mode(rho);
    const Index n = rho.rows();
    if (std::abs(rho(n - 1, n - 1)) > 1e-6) {
        throw NumericalError("Wigner: truncation too small, top Fock level holds " +
                             std::to_string(std::abs(rho(n - 1, n - 1))));
    }

    WignerGrid w;
    w.xs = linspace(grid.x_min, grid.x_max, grid.nx);
    w.ps = linspace(grid.p_min, grid.p_max, grid.np);
    w.values.resize(grid.np, grid.nx);

    // D(x + ip) Pi D^dag = D(x) [D(ip) Pi D(ip)^dag] D(x)^dag; the
    // displacements are built on a padded space so that their action on the
    // support of rho is not distorted by the truncation.
    const double r = std::max({std::abs(grid.x_min), std::abs(grid.x_max), std::abs(grid.p_min),
                               std::abs(grid.p_max)});
    const double rmax = r; // |alpha| <= sqrt(x^2 + p^2)/sqrt2 <= r
    const Index work = n + static_cast<Index>(std::ceil(rmax * rmax + 6.0 * rmax)) + 16;
    const Operator parity = parity_operator(work);
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

    std::vector<Matrix> kernels;
    kernels.reserve(w.ps.size());
    for (const double p : w.ps) {
        const Matrix dp = displacement_operator(work, complex(0.0, p * inv_sqrt2)).matrix();
        // Stored transposed so that Tr[R K] becomes an elementwise sum.
        kernels.emplace_back((dp * parity.matrix() * dp.adjoint()).transpose());
    }
    for (std::size_t ix = 0; ix < w.xs.size(); ++ix) {
        const Matrix dx = displacement_operator(work, complex(w.xs[ix] * inv_sqrt2, 0.0)).matrix();
        const Matrix top = dx.topRows(n);
        const Matrix rx = top.adjoint() * rho * top;
        for (std::size_t ip = 0; ip < w.ps.size(); ++ip) {
            const double tr = rx.cwiseProduct(kernels[ip]).sum().real();
            w.values(static_cast<Index>(ip), static_cast<Index>(ix)) = 2.0 / std::numbers::pi * tr;
        }
    }
    return w;
}

WignerGrid wigner(const DensityMatrix& rho, const WignerGridSpec& grid)
{
    if (rho.sig().mode_count() != 1) {
        throw DimensionMismatch("Wigner function needs a single-mode state; reduce first");
    }
    return wigner(rho.matrix(), grid);
}

double wigner_min(const DensityMatrix& rho, const WignerGridSpec& grid)
{
    return wigner(rho, grid).min();
}

double MomentSet::symplectic_eigenvalue() const
{
    return 2.0 * std::sqrt(std::max(0.0, covariance.determinant()));
}

bool MomentSet::satisfies_uncertainty(double tolerance) const
{
    // For a real symmetric 2x2 sigma, sigma + (i/2) Omega >= 0 iff
    // sigma > 0 and det sigma >= 1/4.
    return covariance(0, 0) > 0.0 && covariance(1, 1) > 0.0 &&
           covariance.determinant() >= 0.25 - tolerance;
}

MomentSet moments(const Matrix& rho)
{
    require_single_mode(rho);
    const SpaceSignature sig{rho.rows()};
    const Operator a = annihilation(sig, 0);
    MomentSet m;
    m.mean = expectation(rho, a);
    m.second = expectation(rho, a * a);
    m.number = expectation(rho, number(sig, 0)).real();

    const double x = std::numbers::sqrt2 * m.mean.real();
    const double p = std::numbers::sqrt2 * m.mean.imag();
    // Second moments written with [a, a^dag] = 1 so that the truncation edge
    // does not enter.
    const double xx = m.second.real() + m.number + 0.5;
    const double pp = -m.second.real() + m.number + 0.5;
    const double xp = m.second.imag();
    m.covariance << xx - x * x, xp - x * p, xp - x * p, pp - p * p;
    return m;
}

MomentSet moments(const DensityMatrix& rho)
{
    if (rho.sig().mode_count() != 1) {
        throw DimensionMismatch("moments need a single-mode state");
    }
    return moments(rho.matrix());
}

double von_neumann_entropy(const Matrix& rho)
{
    const Matrix herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (const double p : es.eigenvalues()) {
        if (p > 1e-14) {
            s -= p * std::log(p);
        }
    }
    return s;
}

double von_neumann_entropy(const DensityMatrix& rho)
{
    return von_neumann_entropy(rho.matrix());
}

double gaussian_entropy_from_nu(double nu)
{
    if (nu <= 1.0) {
        return 0.0;
    }
    const double up = 0.5 * (nu + 1.0);
    const double down = 0.5 * (nu - 1.0);
    return up * std::log(up) - down * std::log(down);
}

double gaussian_reference_entropy(const MomentSet& m)
{
    return gaussian_entropy_from_nu(m.symplectic_eigenvalue());
}

double delta_B(const Matrix& rho)
{
    const MomentSet m = moments(rho);
    if (!m.satisfies_uncertainty()) {
        throw InvariantViolation("delta_B: covariance violates the uncertainty relation (nu = " +
                                 std::to_string(m.symplectic_eigenvalue()) + ")");
    }
    return gaussian_reference_entropy(m) - von_neumann_entropy(rho);
}

double delta_B(const DensityMatrix& rho)
{
    if (rho.sig().mode_count() != 1) {
        throw DimensionMismatch("delta_B needs a single-mode state");
    }
    return delta_B(rho.matrix());
}

Peak peak_find(const std::vector<double>& times, const std::vector<double>& values)
{
    if (times.size() != values.size() || values.empty()) {
        throw DimensionMismatch("peak_find: series must be non-empty and aligned");
    }
    Peak pk;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k == 0 || values[k] > pk.value) {
            pk.value = values[k];
            pk.index = k;
        }
    }
    pk.t = times[pk.index];
    pk.at_endpoint = pk.index == 0 || pk.index + 1 == values.size();
    return pk;
}

NonGaussTrace nongauss_trace(const SLHModel& model, const IntegratorConfig& config)
{
    NonGaussTrace s;
    const std::vector<Index> ground(model.sig.mode_count(), 0);
    const DensityMatrix rho0 = DensityMatrix::pure(fock_state(model.sig, ground));
    s.trajectory = integrate(model, rho0, config, [&](double t, const Matrix& rho) {
        Matrix red = model.sig.mode_count() == 1 ? rho : reduce_to_mode(rho, model.sig, 0);
        const MomentSet m = moments(red);
        s.times.push_back(t);
        s.entropy.push_back(von_neumann_entropy(red));
        s.gaussian_entropy.push_back(gaussian_reference_entropy(m));
        s.delta_b.push_back(delta_B(red));
        s.n_expect.push_back(m.number);
        s.pop0.push_back(red(0, 0).real());
        s.pop1.push_back(red(1, 1).real());
        s.pop2.push_back(red.rows() > 2 ? red(2, 2).real() : 0.0);
        s.states.push_back(std::move(red));
    });
    return s;
}

} // namespace qlimit
