#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

#include "qlimit/analysis.hpp"
#include "qlimit/errors.hpp"
#include "qlimit/slh.hpp"

using namespace qlimit;

namespace {

constexpr double kTwoOverPi = 2.0 / std::numbers::pi;

Matrix projector(const Vector& v)
{
    return v * v.adjoint();
}

Matrix random_state(std::mt19937& gen, Index d)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix g(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            g(i, j) = complex(n(gen), n(gen));
        }
    }
    Matrix rho = g * g.adjoint();
    return rho / rho.trace();
}

// 3 x 3 grid whose centre sample is (x, p).
WignerGridSpec centred_grid(double x, double p)
{
    WignerGridSpec g;
    g.x_min = x - 1.0;
    g.x_max = x + 1.0;
    g.p_min = p - 1.0;
    g.p_max = p + 1.0;
    g.nx = g.np = 3;
    return g;
}

} // namespace

TEST_CASE("reduce_to_mode")
{
    const SpaceSignature sig{3, 2};
    Vector a(3);
    a << 0.6, complex(0.0, 0.8), 0.0;
    Vector b(2);
    b << std::sqrt(0.3), std::sqrt(0.7);
    const Vector ab = Eigen::kroneckerProduct(a, b);
    const Matrix rho = projector(ab);
    CHECK((reduce_to_mode(rho, sig, 0) - projector(a)).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((reduce_to_mode(rho, sig, 1) - projector(b)).cwiseAbs().maxCoeff() <= 1e-15);

    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::numbers::sqrt2;
    const Matrix r = reduce_to_mode(projector(bell), SpaceSignature{2, 2}, 0);
    CHECK((r - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-15);

    std::mt19937 gen(7);
    const Matrix mixed = random_state(gen, 6);
    CHECK(std::abs(reduce_to_mode(mixed, sig, 1).trace() - 1.0) <= 1e-14);
}

TEST_CASE("Wigner function anchors")
{
    const DensityMatrix vac = DensityMatrix::pure(fock_state(SpaceSignature{20}, {0}));
    const WignerGrid w0 = wigner(vac);
    CHECK(w0.values(50, 50) == doctest::Approx(kTwoOverPi).epsilon(1e-12));
    CHECK(w0.integral() == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(w0.min() >= 0.0);

    const DensityMatrix one = DensityMatrix::pure(fock_state(SpaceSignature{20}, {1}));
    CHECK(wigner(one, centred_grid(0.0, 0.0)).values(1, 1) == doctest::Approx(-kTwoOverPi).epsilon(1e-12));
    CHECK(wigner_min(one) == doctest::Approx(-kTwoOverPi).epsilon(1e-12));

    // Coherent beta = 1 is centred at x = sqrt2, p = 0.
    const DensityMatrix coh = DensityMatrix::pure(coherent_state(30, {1.0, 0.0}));
    WignerGridSpec g;
    g.x_min = 0.0;
    g.x_max = 2.0 * std::numbers::sqrt2;
    g.nx = 81;
    g.p_min = -1.0;
    g.p_max = 1.0;
    g.np = 21;
    const WignerGrid wc = wigner(coh, g);
    Index ip = 0;
    Index ix = 0;
    wc.values.maxCoeff(&ip, &ix);
    CHECK(wc.xs[static_cast<std::size_t>(ix)] == doctest::Approx(std::numbers::sqrt2));
    CHECK(wc.ps[static_cast<std::size_t>(ip)] == doctest::Approx(0.0));
}

TEST_CASE("Wigner rejects under-resolved states and bad grids")
{
    const DensityMatrix top = DensityMatrix::pure(fock_state(SpaceSignature{5}, {4}));
    CHECK_THROWS_AS((void)wigner(top), NumericalError);
    WignerGridSpec g;
    g.nx = 0;
    CHECK_THROWS_AS(g.validate(), InvalidArgument);
}

TEST_CASE("moments")
{
    const MomentSet v = moments(fock_state(SpaceSignature{10}, {0}).projector().matrix());
    CHECK(std::abs(v.mean) == 0.0);
    CHECK((v.covariance - 0.5 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(v.symplectic_eigenvalue() == doctest::Approx(1.0));

    const complex beta{0.8, -0.3};
    const MomentSet c = moments(projector(coherent_state(40, beta).amplitudes()));
    CHECK(std::abs(c.mean - beta) <= 1e-12);
    CHECK((c.covariance - 0.5 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);

    Matrix half = Matrix::Zero(2, 2);
    half(0, 0) = half(1, 1) = 0.5;
    const MomentSet t = moments(half);
    CHECK(t.number == doctest::Approx(0.5));
    CHECK((t.covariance - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(t.satisfies_uncertainty());
}

TEST_CASE("von Neumann entropy")
{
    CHECK(von_neumann_entropy(fock_state(SpaceSignature{4}, {2}).projector().matrix()) == doctest::Approx(0.0));
    CHECK(von_neumann_entropy(Matrix(0.5 * Matrix::Identity(2, 2))) == doctest::Approx(std::log(2.0)));
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 0.75;
    d(1, 1) = 0.25;
    CHECK(von_neumann_entropy(d) == doctest::Approx(0.5623).epsilon(1e-4));
    CHECK(von_neumann_entropy(d) == doctest::Approx(-0.75 * std::log(0.75) - 0.25 * std::log(0.25)));

    std::mt19937 gen(2024);
    for (int k = 0; k < 20; ++k) {
        const Matrix r1 = random_state(gen, 4);
        const Matrix r2 = random_state(gen, 4);
        const double mix = von_neumann_entropy(Matrix(0.5 * (r1 + r2)));
        CHECK(mix >= 0.5 * (von_neumann_entropy(r1) + von_neumann_entropy(r2)) - 1e-9);
    }
}

TEST_CASE("Gaussian reference entropy")
{
    CHECK(gaussian_entropy_from_nu(1.0) == 0.0);
    CHECK(gaussian_entropy_from_nu(1.0 - 1e-12) == 0.0);
    CHECK(gaussian_entropy_from_nu(2.0) == doctest::Approx(1.5 * std::log(1.5) - 0.5 * std::log(0.5)));
    CHECK(gaussian_entropy_from_nu(2.0) == doctest::Approx(0.9548).epsilon(1e-4));
    const MomentSet v = moments(fock_state(SpaceSignature{6}, {0}).projector().matrix());
    CHECK(gaussian_reference_entropy(v) == 0.0);
}

TEST_CASE("delta_B")
{
    CHECK(std::abs(delta_B(projector(coherent_state(40, {1.2, 0.7}).amplitudes()))) <= 1e-9);
    // |1>: sigma = (3/2) I, nu = 3, S(tau) = 2 ln 2.
    CHECK(delta_B(fock_state(SpaceSignature{6}, {1}).projector().matrix()) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));

    Matrix bogus = Matrix::Zero(2, 2);
    bogus(0, 0) = 1.5;
    bogus(1, 1) = -0.5;
    CHECK_THROWS_AS((void)delta_B(bogus), InvariantViolation);
    CHECK_THROWS_AS((void)delta_B(DensityMatrix(SpaceSignature{2, 2}, Matrix::Identity(4, 4) / 4.0)),
                    DimensionMismatch);
}

TEST_CASE("delta_B is invariant under phase-space displacement")
{
    const Index dim = 50;
    Vector cat = Vector::Zero(dim);
    cat(0) = cat(2) = 1.0 / std::numbers::sqrt2;
    Matrix rho = 0.8 * projector(cat);
    rho(1, 1) += 0.2;
    const double reference = delta_B(rho);
    CHECK(reference > 0.1);
    for (const complex beta : {complex(1.0, 0.0), complex(0.0, -1.0), complex(0.6, 0.6), complex(-0.3, 0.2)}) {
        const Matrix d = displacement_operator(dim, beta).matrix();
        CHECK(delta_B(Matrix(d * rho * d.adjoint())) == doctest::Approx(reference).epsilon(1e-6));
    }
}

TEST_CASE("peak_find")
{
    const std::vector<double> t{0.0, 0.1, 0.2, 0.3};
    const Peak mono = peak_find(t, {0.0, 1.0, 2.0, 3.0});
    CHECK(mono.at_endpoint);
    CHECK(mono.index == 3);

    std::vector<double> ts;
    std::vector<double> vs;
    for (int k = 0; k <= 100; ++k) {
        const double x = 0.01 * k;
        ts.push_back(x);
        vs.push_back(1.0 - (x - 0.37) * (x - 0.37));
    }
    const Peak pk = peak_find(ts, vs);
    CHECK_FALSE(pk.at_endpoint);
    CHECK(std::abs(pk.t - 0.37) <= 0.005);
    CHECK_THROWS_AS((void)peak_find({0.0}, {}), DimensionMismatch);
}

TEST_CASE("TPA non-Gaussianity at gamma = 20 (golden)")
{
    TpaParams p;
    p.kappa_a1 = 0.5;
    p.alpha = {10.0, 0.0};
    p.gamma = 20.0;
    p.dim = 30;
    IntegratorConfig cfg;
    cfg.t_end = 1.0;
    cfg.output_dt = 0.001;
    cfg.checkpoint_stride = 50;
    const NonGaussTrace s = nongauss_trace(build_tpa(p), cfg);

    for (const double d : s.delta_b) {
        CHECK(d >= -1e-9);
    }
    const Peak pk = peak_find(s.times, s.delta_b);
    CHECK_FALSE(pk.at_endpoint);
    CHECK(pk.t == doctest::Approx(0.223));
    CHECK(pk.value == doctest::Approx(0.3597434809829625).epsilon(1e-6));
    CHECK(s.pop2[pk.index] == doctest::Approx(0.1017245222137766).epsilon(1e-6));

    const WignerGrid w = wigner(s.states[pk.index]);
    CHECK(w.min() == doctest::Approx(-0.12509411715952914).epsilon(1e-6));
    CHECK(w.integral() == doctest::Approx(1.0).epsilon(0.02));
}
