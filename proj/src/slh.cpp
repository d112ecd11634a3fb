#include "qlimit/slh.hpp"

#include <cmath>

#include "qlimit/errors.hpp"

namespace qlimit {

namespace {

void require_nonnegative(double value, const char* name)
{
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw InvalidArgument(std::string(name) + " must be a finite non-negative rate");
    }
}

void require_finite(double value, const char* name)
{
    if (!std::isfinite(value)) {
        throw InvalidArgument(std::string(name) + " must be finite");
    }
}

std::vector<std::vector<Operator>> identity_scattering(const SpaceSignature& sig, std::size_t n)
{
    std::vector<std::vector<Operator>> S(n, std::vector<Operator>(n, zero(sig)));
    for (std::size_t i = 0; i < n; ++i) {
        S[i][i] = identity(sig);
    }
    return S;
}

} // namespace

void SLHModel::validate() const
{
    if (L.empty()) {
        throw InvariantViolation(name + ": model needs at least one channel");
    }
    if (S.size() != L.size()) {
        throw InvariantViolation(name + ": scattering matrix size does not match channel count");
    }
    require_same_space(sig, H.sig(), "SLH Hamiltonian");
    for (const auto& l : L) {
        require_same_space(sig, l.sig(), "SLH coupling");
    }
    const double hnorm = std::max(1.0, H.matrix().norm());
    if ((H.matrix() - H.matrix().adjoint()).norm() > 1e-12 * hnorm) {
        throw InvariantViolation(name + ": Hamiltonian is not hermitian");
    }
    const std::size_t n = L.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (S[i].size() != n) {
            throw InvariantViolation(name + ": scattering matrix is not square");
        }
        for (std::size_t j = 0; j < n; ++j) {
            require_same_space(sig, S[i][j].sig(), "SLH scattering entry");
            Matrix acc = Matrix::Zero(sig.total(), sig.total());
            for (std::size_t k = 0; k < n; ++k) {
                acc += S[k][i].matrix().adjoint() * S[k][j].matrix();
            }
            if (i == j) {
                acc -= Matrix::Identity(sig.total(), sig.total());
            }
            if (acc.norm() > 1e-12) {
                throw InvariantViolation(name + ": scattering matrix is not unitary");
            }
        }
    }
}

SLHModel weyl_drive(const SpaceSignature& sig, std::size_t channels, const DriveSpec& drive)
{
    if (drive.channel >= channels) {
        throw DimensionMismatch("drive channel " + std::to_string(drive.channel) + " >= " +
                                std::to_string(channels));
    }
    SLHModel w;
    w.sig = sig;
    w.S = identity_scattering(sig, channels);
    w.L.assign(channels, zero(sig));
    w.L[drive.channel] = std::conj(drive.alpha) * identity(sig);
    w.H = zero(sig);
    w.name = "weyl";
    return w;
}

SLHModel series_product(const SLHModel& downstream, const SLHModel& upstream)
{
    if (downstream.channels() != upstream.channels()) {
        throw DimensionMismatch("series product: channel counts " +
                                std::to_string(downstream.channels()) + " vs " +
                                std::to_string(upstream.channels()));
    }
    require_same_space(downstream.sig, upstream.sig, "series product");
    const std::size_t n = downstream.channels();
    const SpaceSignature& sig = downstream.sig;

    // Gough-James composition on usual-convention couplings c = L^dag:
    //   S = S2 S1, c = c2 + S2 c1,
    //   H = H1 + H2 + (1/2i) sum_ij (c2_i^dag S2_ij c1_j - c1_j^dag S2_ij^dag c2_i).
    std::vector<Operator> c1;
    std::vector<Operator> c2;
    c1.reserve(n);
    c2.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        c1.push_back(dagger(upstream.L[i]));
        c2.push_back(dagger(downstream.L[i]));
    }

    SLHModel out;
    out.sig = sig;
    out.name = downstream.name;
    out.truncated_fock = downstream.truncated_fock && upstream.truncated_fock;
    out.S.assign(n, std::vector<Operator>(n, zero(sig)));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Matrix acc = Matrix::Zero(sig.total(), sig.total());
            for (std::size_t k = 0; k < n; ++k) {
                acc += downstream.S[i][k].matrix() * upstream.S[k][j].matrix();
            }
            out.S[i][j] = Operator(sig, std::move(acc));
        }
    }

    Matrix cross = Matrix::Zero(sig.total(), sig.total());
    out.L.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Matrix c = c2[i].matrix();
        for (std::size_t j = 0; j < n; ++j) {
            const Matrix s2c1 = downstream.S[i][j].matrix() * c1[j].matrix();
            c += s2c1;
            cross += c2[i].matrix().adjoint() * s2c1;
        }
        out.L.emplace_back(sig, c.adjoint());
    }
    const complex half_over_i(0.0, -0.5);
    out.H = Operator(sig, upstream.H.matrix() + downstream.H.matrix() +
                              half_over_i * (cross - cross.adjoint()));
    return out;
}

SLHModel apply_coherent_drive(const SLHModel& model, const DriveSpec& drive)
{
    return series_product(model, weyl_drive(model.sig, model.channels(), drive));
}

SLHModel build_kerr_undriven(const KerrParams& p)
{
    require_finite(p.delta, "delta");
    require_finite(p.chi, "chi");
    require_nonnegative(p.kappa_a1, "kappa_a1");
    require_nonnegative(p.kappa_a2, "kappa_a2");
    if (p.dim < 2) {
        throw InvalidArgument("Kerr model needs dim >= 2");
    }
    const SpaceSignature sig{p.dim};
    const Operator a = annihilation(sig, 0);
    const Operator ad = dagger(a);
    SLHModel m;
    m.sig = sig;
    m.name = "kerr";
    m.S = identity_scattering(sig, 2);
    m.L = {std::sqrt(p.kappa_a1) * ad, std::sqrt(p.kappa_a2) * ad};
    m.H = p.delta * (ad * a) + p.chi * (ad * ad * a * a);
    return m;
}

SLHModel build_kerr(const KerrParams& p)
{
    return apply_coherent_drive(build_kerr_undriven(p), DriveSpec{0, p.alpha});
}

namespace {

SLHModel chi2_model(const Chi2Params& p, double pump_detuning, const char* name)
{
    require_finite(p.delta, "delta");
    require_finite(p.g, "g");
    require_finite(pump_detuning, "delta_b");
    require_nonnegative(p.kappa_a1, "kappa_a1");
    require_nonnegative(p.kappa_a2, "kappa_a2");
    require_nonnegative(p.kappa_b, "kappa_b");
    if (p.dim_a < 2 || p.dim_b < 2) {
        throw InvalidArgument("chi2 model needs both mode dimensions >= 2");
    }
    const SpaceSignature sig{p.dim_a, p.dim_b};
    const Operator a = annihilation(sig, 0);
    const Operator b = annihilation(sig, 1);
    const Operator ad = dagger(a);
    const Operator bd = dagger(b);
    SLHModel m;
    m.sig = sig;
    m.name = name;
    m.S = identity_scattering(sig, 3);
    m.L = {std::sqrt(p.kappa_a1) * ad, std::sqrt(p.kappa_a2) * ad, std::sqrt(p.kappa_b) * bd};
    m.H = p.delta * (ad * a) + pump_detuning * (bd * b) +
          complex(0.0, 0.5 * p.g) * (ad * ad * b - a * a * bd);
    return apply_coherent_drive(m, DriveSpec{0, p.alpha});
}

} // namespace

SLHModel build_chi2(const Chi2Params& p)
{
    return chi2_model(p, 2.0 * p.delta, "chi2");
}

SLHModel build_chi2_dispersive(const Chi2Params& p, double delta_b)
{
    return chi2_model(p, delta_b, "chi2-dispersive");
}

SLHModel build_tpa(const TpaParams& p)
{
    require_finite(p.delta, "delta");
    require_nonnegative(p.kappa_a1, "kappa_a1");
    require_nonnegative(p.kappa_a2, "kappa_a2");
    require_nonnegative(p.gamma, "gamma");
    if (p.dim < 3) {
        throw InvalidArgument("TPA model needs dim >= 3");
    }
    const SpaceSignature sig{p.dim};
    const Operator a = annihilation(sig, 0);
    const Operator ad = dagger(a);
    SLHModel m;
    m.sig = sig;
    m.name = "tpa";
    m.S = identity_scattering(sig, 3);
    m.L = {std::sqrt(p.kappa_a1) * ad, std::sqrt(p.kappa_a2) * ad, std::sqrt(p.gamma) * (ad * ad)};
    m.H = p.delta * (ad * a);
    return apply_coherent_drive(m, DriveSpec{0, p.alpha});
}

SLHModel build_qubit_limit(const QubitLimitParams& p)
{
    require_finite(p.delta, "delta");
    require_nonnegative(p.kappa_a1, "kappa_a1");
    require_nonnegative(p.kappa_a2, "kappa_a2");
    const SpaceSignature sig{2};
    const Operator s = annihilation(sig, 0); // |0><1|
    const Operator sd = dagger(s);
    SLHModel m;
    m.sig = sig;
    m.name = "qubit-limit";
    m.truncated_fock = false;
    m.S = identity_scattering(sig, 1);
    m.L = {std::sqrt(p.kappa_a1 + p.kappa_a2) * sd};
    m.H = p.delta * (sd * s) +
          complex(0.0, -std::sqrt(p.kappa_a1)) * (p.alpha * sd - std::conj(p.alpha) * s);
    return m;
}

} // namespace qlimit
