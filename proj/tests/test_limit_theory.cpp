#include "doctest.h"

#include <cmath>

#include "qlimit/errors.hpp"
#include "qlimit/limit_theory.hpp"
#include "qlimit/slh.hpp"

using namespace qlimit;

namespace {

KerrParams fig1_kerr(double chi)
{
    KerrParams p;
    p.chi = chi;
    p.kappa_a1 = 0.5;
    p.alpha = {10.0, 0.0};
    return p;
}

SLHModel fig1_limit()
{
    QubitLimitParams q;
    q.kappa_a1 = 0.5;
    q.alpha = {10.0, 0.0};
    return build_qubit_limit(q);
}

Index rank(const Operator& p)
{
    return static_cast<Index>(std::llround(p.matrix().trace().real()));
}

} // namespace

TEST_CASE("Kerr setup")
{
    const ScalingSetup s = kerr_setup(-100.0, 10);
    CHECK(verify_structural(s).passed());
    CHECK(s.Ytilde.matrix()(2, 2) == complex(0.0, 1.0 / 200.0));
    CHECK(rank(s.P0) == 2);
    CHECK(s.A.is_zero());
    for (const auto& f : s.F) {
        CHECK(f.is_zero());
    }
}

TEST_CASE("chi2 setup")
{
    const ScalingSetup s = chi2_setup(5000.0, -3000.0, 6, 4);
    CHECK(verify_structural(s).passed());
    const std::vector<Index> occ{0, 1};
    const Index k = s.Y.sig().flat_index(occ);
    CHECK(s.Ytilde.matrix()(k, k).real() == doctest::Approx(-4e-4));
    CHECK(rank(s.P0) == 6);
}

TEST_CASE("TPA setup")
{
    const double gamma = 200.0;
    const ScalingSetup s = tpa_setup(gamma, 12);
    CHECK(verify_structural(s).passed());
    CHECK(s.Ytilde.matrix()(2, 2).real() == doctest::Approx(-1.0 / gamma));
    REQUIRE(s.F.size() == 3);
    const Vector v = s.F[2].matrix() * fock_state(s.Y.sig(), {0}).amplitudes();
    CHECK(std::abs(v(2) - std::sqrt(2.0 * gamma)) <= 1e-12);
    CHECK(rank(s.P0) == 2);
}

TEST_CASE("all setups pass at default dims; exact projectors are idempotent")
{
    for (const auto& s : {kerr_setup(-100.0, 15), chi2_setup(5000.0, -3000.0, 10, 5), tpa_setup(200.0, 30)}) {
        const StructuralReport r = verify_structural(s);
        CHECK(r.passed(1e-12));
        CHECK(r.projector == 0.0);
    }
}

TEST_CASE("a corrupted Ytilde fails the inversion requirement")
{
    ScalingSetup s = kerr_setup(-100.0, 10);
    Matrix yt = s.Ytilde.matrix();
    yt(3, 3) = 0.0;
    s.Ytilde = Operator(s.Ytilde.sig(), yt);
    const StructuralReport r = verify_structural(s);
    CHECK_FALSE(r.passed());
    CHECK(r.ytilde_inverts == doctest::Approx(1.0));
}

TEST_CASE("setup arguments are validated")
{
    CHECK_THROWS_AS((void)kerr_setup(0.0, 10), InvalidArgument);
    CHECK_THROWS_AS((void)chi2_setup(0.0, 1.0, 5, 3), InvalidArgument);
    CHECK_THROWS_AS((void)tpa_setup(1.0, 2), InvalidArgument);
}

TEST_CASE("identical models have zero deviation")
{
    IntegratorConfig cfg;
    cfg.t_end = 1.0;
    const SLHModel q = fig1_limit();
    const Comparison c = compare_prelimit_limit(q, q, Observable::Pop1, cfg);
    CHECK(c.deviation == 0.0);
    CHECK(c.max_leakage_pre <= 1e-15);
}

TEST_CASE("strong and weak Kerr against the two-level limit (golden)")
{
    IntegratorConfig cfg;
    const Comparison strong = compare_prelimit_limit(build_kerr(fig1_kerr(-100.0)), fig1_limit(),
                                                     Observable::Pop1, cfg);
    CHECK(strong.deviation == doctest::Approx(0.0053848801317943895).epsilon(1e-6));
    CHECK(strong.max_leakage_pre == doctest::Approx(0.00252717619022369).epsilon(1e-6));
    CHECK(strong.max_leakage_pre < 3e-3);

    const Comparison weak = compare_prelimit_limit(build_kerr(fig1_kerr(-20.0)), fig1_limit(),
                                                   Observable::Pop1, cfg);
    CHECK(weak.deviation == doctest::Approx(0.12783155871361668).epsilon(1e-6));
    CHECK(weak.deviation > strong.deviation);
    CHECK(weak.max_leakage_pre > strong.max_leakage_pre);

    // pop1 of the pre-limit run peaks first near the Rabi half period.
    const std::vector<double>& p = strong.pre;
    std::size_t k = 1;
    while (k + 1 < p.size() && !(p[k] > p[k - 1] && p[k] >= p[k + 1])) {
        ++k;
    }
    CHECK(strong.times[k] == doctest::Approx(0.222).epsilon(0.05));
}

TEST_CASE("Kerr sweep converges as |chi| doubles")
{
    IntegratorConfig cfg;
    const std::vector<double> chis{-20.0, -40.0, -80.0, -160.0, -320.0};
    const ConvergenceReport r = convergence_sweep(
        [](double chi) { return build_kerr(fig1_kerr(chi)); }, chis, fig1_limit(), Observable::Pop1, cfg);
    REQUIRE(r.deviations.size() == chis.size());
    CHECK(r.deviations_nonincreasing());
    CHECK(r.leakages_nonincreasing());
    for (const double d : r.deviations) {
        CHECK(d >= 0.0);
    }

    SUBCASE("a single-element sweep equals the direct comparison")
    {
        const ConvergenceReport one = convergence_sweep(
            [](double chi) { return build_kerr(fig1_kerr(chi)); }, {-80.0}, fig1_limit(), Observable::Pop1, cfg);
        const Comparison c = compare_prelimit_limit(build_kerr(fig1_kerr(-80.0)), fig1_limit(),
                                                    Observable::Pop1, cfg);
        CHECK(one.deviations[0] == c.deviation);
        CHECK(one.max_leakages[0] == c.max_leakage_pre);
    }
}

TEST_CASE("local maxima and prominence")
{
    const std::vector<double> t{0, 1, 2, 3, 4, 5, 6};
    const std::vector<double> v{0.0, 1.0, 0.5, 2.0, 1.9, 1.95, 1.0};
    CHECK(count_local_maxima(t, v, 6.0) == 3);
    CHECK(count_local_maxima(t, v, 2.0) == 1);
    CHECK(peak_prominence(v, 1) == doctest::Approx(0.5));
    CHECK(peak_prominence(v, 3) == doctest::Approx(1.0));
    CHECK(peak_prominence(v, 5) == doctest::Approx(0.05));
    CHECK(count_local_maxima(t, v, 6.0, 0.1) == 2);

    const std::vector<double> flat{1.0, 1.0, 1.0};
    CHECK(count_local_maxima({0, 1, 2}, flat, 2.0) == 0);
    CHECK_THROWS_AS((void)count_local_maxima({0, 1}, flat, 2.0), DimensionMismatch);
}

TEST_CASE("observable names")
{
    CHECK(parse_observable("pop1") == Observable::Pop1);
    CHECK(parse_observable("n_expect") == Observable::PhotonNumber);
    CHECK_THROWS_AS((void)parse_observable("bogus"), InvalidArgument);
    CHECK(observable_column(Observable::Pop1, SpaceSignature{4}) == "pop1");
    CHECK(observable_column(Observable::Pop1, SpaceSignature{4, 3}) == "pop1a0b");
}
