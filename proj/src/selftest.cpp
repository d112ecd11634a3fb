#include <cmath>
#include <numbers>

#include "qlimit/analysis.hpp"
#include "qlimit/limit_theory.hpp"
#include "qlimit/scenario.hpp"

namespace qlimit {

namespace {

// Deterministic full-rank density matrix.
Matrix test_state(Index d)
{
    Matrix m(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            const auto k = static_cast<double>(i * d + j);
            m(i, j) = complex(std::sin(1.0 + 0.7 * k), std::cos(2.0 + 1.3 * k)) /
                      (1.0 + static_cast<double>(i + j));
        }
    }
    Matrix rho = m * m.adjoint();
    return rho / rho.trace();
}

double max_abs(const Matrix& m)
{
    return m.cwiseAbs().maxCoeff();
}

} // namespace

std::vector<SelftestCheck> selftest()
{
    std::vector<SelftestCheck> checks;
    auto check = [&](std::string name, double value, double bound) {
        checks.push_back({std::move(name), value <= bound, value, bound});
    };

    {
        const SpaceSignature sig{6};
        const Operator a = annihilation(sig, 0);
        Matrix expected = Matrix::Identity(6, 6);
        expected(5, 5) = -5.0;
        check("truncated commutator [a, a^dag]", max_abs(commutator(a, dagger(a)).matrix() - expected),
              1e-12);
    }

    const complex alpha(10.0, 0.0);
    const KerrParams kp{0.0, -100.0, 0.5, 0.0, alpha, 8};
    {
        const SLHModel driven = build_kerr(kp);
        const SpaceSignature sig{8};
        const Operator a = annihilation(sig, 0);
        const Operator ad = dagger(a);
        const Operator h = kp.chi * (ad * ad * a * a) +
                           complex(0.0, -0.5 * std::sqrt(kp.kappa_a1)) * (alpha * ad - std::conj(alpha) * a);
        const Operator l1 = std::sqrt(kp.kappa_a1) * ad + std::conj(alpha) * identity(sig);
        check("series product reproduces driven Kerr coefficients",
              std::max(max_abs(driven.H.matrix() - h.matrix()), max_abs(driven.L[0].matrix() - l1.matrix())),
              1e-12);
    }

    {
        // Drive carried by (H, L1) versus drive written entirely in H.
        const TpaParams tp{0.3, 0.5, 0.1, 2.0, complex(1.5, -0.5), 8};
        const SLHModel a_form = build_tpa(tp);
        SLHModel h_form = a_form;
        const Operator a = annihilation(h_form.sig, 0);
        const Operator ad = dagger(a);
        h_form.L[0] = std::sqrt(tp.kappa_a1) * ad;
        h_form.H = tp.delta * (ad * a) +
                   complex(0.0, -std::sqrt(tp.kappa_a1)) * (tp.alpha * ad - std::conj(tp.alpha) * a);
        const Matrix rho = test_state(8);
        check("drive in L1 equals drive in H",
              max_abs(liouvillian_apply(a_form, rho) - liouvillian_apply(h_form, rho)), 1e-12);
    }

    {
        const std::vector<SLHModel> models = {
            build_kerr(kp),
            build_chi2({0.2, -30.0, 0.5, 0.1, 50.0, alpha, 5, 3}),
            build_chi2_dispersive({0.2, -30.0, 0.5, 0.1, 50.0, alpha, 5, 3}, 7.0),
            build_tpa({0.0, 0.5, 0.0, 20.0, alpha, 8}),
            build_qubit_limit({0.0, 0.5, 0.0, alpha}),
        };
        for (const auto& m : models) {
            const Matrix rho = test_state(m.sig.total());
            const Matrix d = liouvillian_apply(m, rho);
            const double scale = std::max(1.0, max_abs(d));
            check(m.name + ": trace preserved", std::abs(d.trace()) / scale, 1e-12);
            check(m.name + ": hermiticity preserved", max_abs(d - d.adjoint()) / scale, 1e-12);
            SLHModel rotated = m;
            for (std::size_t k = 0; k < rotated.L.size(); ++k) {
                rotated.L[k] = complex(std::cos(0.7 + k), std::sin(0.7 + k)) * rotated.L[k];
            }
            check(m.name + ": channel phase invariance",
                  max_abs(liouvillian_apply(rotated, rho) - d) / scale, 1e-12);
        }
    }

    check("kerr setup structural", verify_structural(kerr_setup(-100.0, 15)).max_residual(), 1e-12);
    check("chi2 setup structural", verify_structural(chi2_setup(5000.0, -3000.0, 10, 5)).max_residual(),
          1e-12);
    check("tpa setup structural", verify_structural(tpa_setup(200.0, 30)).max_residual(), 1e-12);

    {
        const DensityMatrix ss = steady_state(build_qubit_limit({0.0, 0.5, 0.0, alpha}));
        // (Omega^2/4) / (Delta^2 + kappa^2/4 + Omega^2/2) with Omega = 2 sqrt(k1)|alpha|.
        const double om2 = 4.0 * 0.5 * 100.0;
        const double expected = (om2 / 4.0) / (0.25 * 0.25 + om2 / 2.0);
        check("qubit steady-state excited population", std::abs(ss.matrix()(1, 1).real() - expected),
              1e-9);
    }

    {
        const DensityMatrix vac = DensityMatrix::pure(fock_state(SpaceSignature{12}, {0}));
        const WignerGrid w = wigner(vac, WignerGridSpec{-4, 4, -4, 4, 41, 41});
        check("vacuum Wigner W(0) = 2/pi", std::abs(w.values(20, 20) - 2.0 / std::numbers::pi), 1e-9);
        check("vacuum Wigner integral", std::abs(w.integral() - 1.0), 2e-2);
        check("coherent state delta_B",
              std::abs(delta_B(DensityMatrix::pure(coherent_state(40, complex(1.0, 0.5))))), 1e-9);
    }

    {
        IntegratorConfig ic;
        ic.t_end = 0.2;
        ic.output_dt = 0.01;
        const Trajectory traj = integrate(build_kerr(kp), vacuum(SpaceSignature{8}), ic);
        check("short Kerr run trace drift", traj.max_trace_error, 1e-8 * 0.2);
        check("short Kerr run positivity", -traj.min_eigenvalue, 1e-7);
    }
    return checks;
}

} // namespace qlimit
