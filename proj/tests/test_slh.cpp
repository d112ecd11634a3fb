#include "doctest.h"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "qlimit/errors.hpp"
#include "qlimit/hygiene.hpp"
#include "qlimit/limit_theory.hpp"
#include "qlimit/master_equation.hpp"
#include "qlimit/slh.hpp"

using namespace qlimit;

namespace {

double max_abs(const Matrix& m)
{
    return m.cwiseAbs().maxCoeff();
}

KerrParams fig1_kerr(double chi)
{
    KerrParams p;
    p.chi = chi;
    p.kappa_a1 = 0.5;
    p.alpha = {10.0, 0.0};
    return p;
}

// Deterministic mixed test state with coherences.
Matrix test_state(const SpaceSignature& sig)
{
    return probe_state(sig).matrix();
}

double rhs_difference(const SLHModel& a, const SLHModel& b, const Matrix& rho)
{
    return max_abs(liouvillian_apply(a, rho) - liouvillian_apply(b, rho));
}

std::vector<double> hamiltonian_spectrum(const SLHModel& m)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.H.matrix());
    const auto& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

} // namespace

TEST_CASE("coherent drive through the series product reproduces the driven Kerr coefficients")
{
    const KerrParams p = fig1_kerr(-100.0);
    const SLHModel undriven = build_kerr_undriven(p);
    const SLHModel driven = apply_coherent_drive(undriven, {0, p.alpha});
    const SpaceSignature& sig = undriven.sig;
    const Operator a = annihilation(sig, 0);
    const Operator ad = creation(sig, 0);
    const double s = std::sqrt(p.kappa_a1);

    const Operator l1 = s * ad + std::conj(p.alpha) * identity(sig);
    CHECK(max_abs(driven.L[0].matrix() - l1.matrix()) <= 1e-14);
    CHECK(driven.L[1] == undriven.L[1]);

    const Operator drive_term = complex(0.0, -0.5 * s) * (p.alpha * ad - std::conj(p.alpha) * a);
    CHECK(max_abs(driven.H.matrix() - (undriven.H + drive_term).matrix()) <= 1e-12);
}

TEST_CASE("build_kerr is bit-identical to driving the undriven model")
{
    const KerrParams p = fig1_kerr(-20.0);
    const SLHModel direct = build_kerr(p);
    const SLHModel composed = apply_coherent_drive(build_kerr_undriven(p), {0, p.alpha});
    CHECK(direct.H.matrix() == composed.H.matrix());
    REQUIRE(direct.channels() == composed.channels());
    for (std::size_t i = 0; i < direct.channels(); ++i) {
        CHECK(direct.L[i].matrix() == composed.L[i].matrix());
    }
}

TEST_CASE("zero drive is the identity of the series product")
{
    const SLHModel g = build_kerr_undriven(fig1_kerr(-50.0));
    const SLHModel h = apply_coherent_drive(g, {0, {0.0, 0.0}});
    CHECK(max_abs(h.H.matrix() - g.H.matrix()) == 0.0);
    for (std::size_t i = 0; i < g.channels(); ++i) {
        CHECK(max_abs(h.L[i].matrix() - g.L[i].matrix()) == 0.0);
    }
}

TEST_CASE("cascaded Weyl drives add their displacements")
{
    const SpaceSignature sig{3};
    const complex alpha{1.5, -0.5};
    const complex beta{-0.25, 2.0};
    const SLHModel total = series_product(weyl_drive(sig, 1, {0, alpha}), weyl_drive(sig, 1, {0, beta}));
    CHECK(max_abs(total.L[0].matrix() - (std::conj(alpha + beta) * identity(sig)).matrix()) <= 1e-15);
    // Scalar cascades add only a multiple of the identity to H.
    const Matrix h = total.H.matrix();
    CHECK(max_abs(h - h(0, 0) * Matrix::Identity(3, 3)) <= 1e-15);
}

TEST_CASE("series product is associative")
{
    const KerrParams p = fig1_kerr(-30.0);
    const SLHModel g1 = build_kerr_undriven(p);
    KerrParams q = p;
    q.delta = 0.7;
    q.kappa_a2 = 0.2;
    const SLHModel g2 = build_kerr_undriven(q);
    const SLHModel g3 = weyl_drive(g1.sig, 2, {1, {0.3, 0.4}});
    const SLHModel left = series_product(series_product(g3, g2), g1);
    const SLHModel right = series_product(g3, series_product(g2, g1));
    CHECK(max_abs(left.H.matrix() - right.H.matrix()) <= 1e-12);
    for (std::size_t i = 0; i < left.channels(); ++i) {
        CHECK(max_abs(left.L[i].matrix() - right.L[i].matrix()) <= 1e-12);
    }
}

TEST_CASE("series product rejects incompatible models")
{
    const SLHModel g = build_kerr_undriven(fig1_kerr(-30.0));
    CHECK_THROWS_AS((void)series_product(weyl_drive(g.sig, 3, {0, {1.0, 0.0}}), g), DimensionMismatch);
    CHECK_THROWS_AS((void)series_product(weyl_drive(SpaceSignature{4}, 2, {0, {1.0, 0.0}}), g),
                    DimensionMismatch);
    CHECK_THROWS_AS((void)weyl_drive(g.sig, 2, {2, {1.0, 0.0}}), DimensionMismatch);
}

TEST_CASE("drive carried by L1 equals the same drive written in H alone")
{
    const KerrParams p = fig1_kerr(-100.0);
    const SLHModel driven = build_kerr(p);
    SLHModel h_form = build_kerr_undriven(p);
    const Operator a = annihilation(h_form.sig, 0);
    const Operator ad = creation(h_form.sig, 0);
    h_form.H = h_form.H + complex(0.0, -std::sqrt(p.kappa_a1)) * (p.alpha * ad - std::conj(p.alpha) * a);
    CHECK(rhs_difference(driven, h_form, test_state(driven.sig)) <= 1e-9);
}

TEST_CASE("Kerr spectra")
{
    SUBCASE("delta = chi = c gives 0, c, 4c on the lowest levels")
    {
        KerrParams p;
        p.delta = 3.0;
        p.chi = 3.0;
        p.dim = 3;
        const auto ev = hamiltonian_spectrum(build_kerr(p));
        CHECK(ev[0] == doctest::Approx(0.0));
        CHECK(ev[1] == doctest::Approx(3.0));
        CHECK(ev[2] == doctest::Approx(12.0));
    }
    SUBCASE("delta = 0, chi = -100 gives 0, 0, -200, -600")
    {
        KerrParams p;
        p.chi = -100.0;
        p.dim = 4;
        const Matrix h = build_kerr(p).H.matrix();
        CHECK(std::abs(h(0, 0)) == 0.0);
        CHECK(std::abs(h(1, 1)) == 0.0);
        CHECK(h(2, 2).real() == doctest::Approx(-200.0));
        CHECK(h(3, 3).real() == doctest::Approx(-600.0));
        CHECK(max_abs(h - Matrix(h.diagonal().asDiagonal())) == 0.0);
    }
}

TEST_CASE("undriven single-channel Kerr keeps an explicit zero second channel")
{
    KerrParams p = fig1_kerr(-100.0);
    p.alpha = {0.0, 0.0};
    const SLHModel m = build_kerr(p);
    REQUIRE(m.channels() == 2);
    CHECK(m.L[1].is_zero());
}

TEST_CASE("negative rates are rejected")
{
    KerrParams k = fig1_kerr(-100.0);
    k.kappa_a1 = -0.5;
    CHECK_THROWS_AS((void)build_kerr(k), InvalidArgument);
    Chi2Params c;
    c.kappa_b = -1.0;
    CHECK_THROWS_AS((void)build_chi2(c), InvalidArgument);
    TpaParams t;
    t.gamma = -1.0;
    CHECK_THROWS_AS((void)build_tpa(t), InvalidArgument);
    QubitLimitParams q;
    q.kappa_a2 = -0.1;
    CHECK_THROWS_AS((void)build_qubit_limit(q), InvalidArgument);
}

TEST_CASE("chi2 model")
{
    Chi2Params p;
    p.kappa_a1 = 0.5;
    p.kappa_b = 5000.0;
    p.alpha = {10.0, 0.0};
    p.g = -3000.0;
    p.dim_a = 8;
    p.dim_b = 4;
    const SLHModel m = build_chi2(p);
    CHECK(m.channels() == 3);
    CHECK(std::isfinite(m.H.matrix().norm()));
    CHECK(max_abs(m.H.matrix() - m.H.matrix().adjoint()) == 0.0);
    CHECK_NOTHROW(m.validate());

    SUBCASE("dispersive form with delta_b = 2 delta is the same model")
    {
        p.delta = 0.3;
        const SLHModel a = build_chi2(p);
        const SLHModel b = build_chi2_dispersive(p, 2.0 * p.delta);
        CHECK(a.H.matrix() == b.H.matrix());
        for (std::size_t i = 0; i < a.channels(); ++i) {
            CHECK(a.L[i].matrix() == b.L[i].matrix());
        }
    }
}

TEST_CASE("chi2 with g = 0 leaves the a mode a linear driven cavity")
{
    Chi2Params p;
    p.kappa_a1 = 0.5;
    p.kappa_b = 40.0;
    p.alpha = {1.0, 0.0};
    p.dim_a = 8;
    p.dim_b = 3;
    const SLHModel chi2 = build_chi2(p);
    KerrParams k;
    k.kappa_a1 = 0.5;
    k.alpha = p.alpha;
    k.dim = 8;
    const SLHModel kerr = build_kerr(k);

    IntegratorConfig cfg;
    cfg.t_end = 1.0;
    cfg.output_dt = 0.05;
    const Trajectory tc = integrate(chi2, vacuum(chi2.sig), cfg);
    const Trajectory tk = integrate(kerr, vacuum(kerr.sig), cfg);
    double dev = 0.0;
    for (std::size_t s = 0; s < tc.times.size(); ++s) {
        for (std::size_t n = 0; n < 8; ++n) {
            dev = std::max(dev, std::abs(tc.mode_populations[s][0][n] - tk.mode_populations[s][0][n]));
        }
    }
    CHECK(dev <= 1e-7);
}

TEST_CASE("dispersive chi2 approaches Kerr with chi = -g^2 / (4 delta_b)")
{
    // chi_eff = -5 along a doubling sequence of (g, delta_b).
    KerrParams k;
    k.chi = -5.0;
    k.kappa_a1 = 0.5;
    k.alpha = {1.0, 0.0};
    k.dim = 6;
    const SLHModel kerr = build_kerr(k);
    IntegratorConfig cfg;
    cfg.t_end = 2.0;
    cfg.output_dt = 0.01;
    const Trajectory tk = integrate(kerr, vacuum(kerr.sig), cfg);

    std::vector<double> deviations;
    for (const double g : {20.0, 40.0, 80.0}) {
        Chi2Params p;
        p.g = g;
        p.kappa_a1 = 0.5;
        p.kappa_b = 1.0;
        p.alpha = k.alpha;
        p.dim_a = 6;
        p.dim_b = 3;
        const double delta_b = g * g / (4.0 * -k.chi);
        const SLHModel m = build_chi2_dispersive(p, delta_b);
        const Trajectory tm = integrate(m, vacuum(m.sig), cfg);
        double dev = 0.0;
        for (std::size_t s = 0; s < tm.times.size(); ++s) {
            for (std::size_t n = 0; n < 6; ++n) {
                dev = std::max(dev, std::abs(tm.mode_populations[s][0][n] - tk.mode_populations[s][0][n]));
            }
        }
        deviations.push_back(dev);
    }
    CHECK(deviations[1] < deviations[0]);
    CHECK(deviations[2] < deviations[1]);
    CHECK(deviations[2] < 0.02);
}

TEST_CASE("TPA model")
{
    SUBCASE("two-photon loss from |2> feeds |0> at rate 2 gamma")
    {
        TpaParams p;
        p.gamma = 7.0;
        p.dim = 4;
        const SLHModel m = build_tpa(p);
        const Matrix rho = fock_state(m.sig, {2}).projector().matrix();
        const Matrix d = liouvillian_apply(m, rho);
        CHECK(d(0, 0).real() == doctest::Approx(2.0 * p.gamma).epsilon(1e-14));
        CHECK(d(2, 2).real() == doctest::Approx(-2.0 * p.gamma).epsilon(1e-14));
    }
    SUBCASE("gamma = 0 is the linear driven cavity")
    {
        TpaParams t;
        t.kappa_a1 = 0.5;
        t.alpha = {1.0, 0.5};
        t.dim = 10;
        KerrParams k;
        k.kappa_a1 = 0.5;
        k.alpha = t.alpha;
        k.dim = 10;
        CHECK(rhs_difference(build_tpa(t), build_kerr(k), test_state(SpaceSignature{10})) <= 1e-12);
    }
    SUBCASE("the gamma = 5000 parameter set constructs at dim 12")
    {
        TpaParams t;
        t.kappa_a1 = 0.5;
        t.alpha = {10.0, 0.0};
        t.gamma = 5000.0;
        t.dim = 12;
        CHECK_NOTHROW(build_tpa(t).validate());
    }
}

TEST_CASE("qubit limit model")
{
    QubitLimitParams p;
    p.kappa_a1 = 0.5;
    p.alpha = {10.0, 0.0};
    const SLHModel m = build_qubit_limit(p);
    CHECK(m.sig == SpaceSignature{2});
    CHECK_FALSE(m.truncated_fock);

    SUBCASE("steady excited population 50 / 100.0625")
    {
        const DensityMatrix ss = steady_state(m);
        CHECK(std::abs(ss.matrix()(1, 1).real() - 50.0 / 100.0625) <= 1e-12);
    }
    SUBCASE("undriven decay is exponential at the total rate")
    {
        QubitLimitParams q;
        q.delta = 1.3;
        q.kappa_a1 = 0.3;
        q.kappa_a2 = 0.2;
        const SLHModel decay = build_qubit_limit(q);
        IntegratorConfig cfg;
        cfg.t_end = 3.0;
        cfg.output_dt = 0.1;
        const Trajectory t = integrate(decay, DensityMatrix::pure(fock_state(decay.sig, {1})), cfg);
        const auto& pop1 = t.column("pop1");
        for (std::size_t s = 0; s < t.times.size(); ++s) {
            CHECK(std::abs(pop1[s] - std::exp(-0.5 * t.times[s])) <= 1e-8);
        }
    }
}

TEST_CASE("every builder yields a hermitian H and channel-phase invariant dynamics")
{
    KerrParams k = fig1_kerr(-100.0);
    k.kappa_a2 = 0.1;
    k.delta = 0.4;
    Chi2Params c;
    c.g = -300.0;
    c.kappa_a1 = 0.5;
    c.kappa_a2 = 0.1;
    c.kappa_b = 500.0;
    c.alpha = {3.0, 1.0};
    c.dim_a = 6;
    c.dim_b = 3;
    TpaParams t;
    t.gamma = 20.0;
    t.kappa_a1 = 0.5;
    t.alpha = {2.0, -1.0};
    t.dim = 10;
    QubitLimitParams q;
    q.kappa_a1 = 0.5;
    q.alpha = {10.0, 0.0};

    const std::vector<SLHModel> models{build_kerr(k), build_chi2(c), build_chi2_dispersive(c, 17.0),
                                       build_tpa(t), build_qubit_limit(q)};
    for (const auto& m : models) {
        CAPTURE(m.name);
        CHECK_NOTHROW(m.validate());
        std::vector<double> theta(m.channels());
        for (std::size_t i = 0; i < theta.size(); ++i) {
            theta[i] = 0.9 * static_cast<double>(i + 1);
        }
        const Matrix rho = test_state(m.sig);
        const double scale = std::max(1.0, max_abs(liouvillian_apply(m, rho)));
        CHECK(rhs_difference(m, with_channel_phases(m, theta), rho) <= 1e-12 * scale);
    }
}
