#pragma once

#include <string>
#include <vector>

#include "qlimit/fock.hpp"

namespace qlimit {

// Open-system coefficients (S, L, H). L is stored in the conjugate convention:
// a cavity channel of rate kappa holds sqrt(kappa) a^dag, and the master
// equation reads
//   drho/dt = -i[H, rho] + sum_i (L_i^dag rho L_i - 1/2 L_i L_i^dag rho - 1/2 rho L_i L_i^dag).
struct SLHModel {
    SpaceSignature sig;
    std::vector<std::vector<Operator>> S; // n x n
    std::vector<Operator> L;              // n
    Operator H;
    std::string name;
    // False for models whose space is not a truncation of a Fock space (the
    // two-level limit model); truncation diagnostics are skipped for those.
    bool truncated_fock = true;

    [[nodiscard]] std::size_t channels() const noexcept { return L.size(); }

    // Throws InvariantViolation if H is not hermitian, S is not unitary, or
    // the operators do not share one signature.
    void validate() const;
};

struct DriveSpec {
    std::size_t channel = 0;
    complex alpha{0.0, 0.0}; // |alpha|^2 in photons per unit time
};

// Pure coherent displacement on `channels` channels: S = I, L_drive = alpha^* I
// (conjugate convention), H = 0.
[[nodiscard]] SLHModel weyl_drive(const SpaceSignature& sig, std::size_t channels, const DriveSpec& drive);

// Cascade `downstream` after `upstream` (upstream outputs feed downstream inputs).
[[nodiscard]] SLHModel series_product(const SLHModel& downstream, const SLHModel& upstream);

// downstream = model, upstream = weyl_drive(...).
[[nodiscard]] SLHModel apply_coherent_drive(const SLHModel& model, const DriveSpec& drive);

struct KerrParams {
    double delta = 0.0;
    double chi = 0.0;
    double kappa_a1 = 0.0;
    double kappa_a2 = 0.0;
    complex alpha{0.0, 0.0};
    Index dim = 15;
};

struct Chi2Params {
    double delta = 0.0;
    double g = 0.0;
    double kappa_a1 = 0.0;
    double kappa_a2 = 0.0;
    double kappa_b = 0.0;
    complex alpha{0.0, 0.0};
    Index dim_a = 10;
    Index dim_b = 5;
};

struct TpaParams {
    double delta = 0.0;
    double kappa_a1 = 0.0;
    double kappa_a2 = 0.0;
    double gamma = 0.0; // g^2 / kappa_b
    complex alpha{0.0, 0.0};
    Index dim = 30;
};

struct QubitLimitParams {
    double delta = 0.0;
    double kappa_a1 = 0.0;
    double kappa_a2 = 0.0;
    complex alpha{0.0, 0.0};
};

// H = D a^dag a + chi a^dag a^dag a a, L = (sqrt(k1) a^dag, sqrt(k2) a^dag),
// then driven on channel 0.
[[nodiscard]] SLHModel build_kerr(const KerrParams& p);
[[nodiscard]] SLHModel build_kerr_undriven(const KerrParams& p);

// Degenerate two-mode model with pump detuning 2*delta on mode b.
[[nodiscard]] SLHModel build_chi2(const Chi2Params& p);
// Same, but with an independent pump detuning delta_b b^dag b.
[[nodiscard]] SLHModel build_chi2_dispersive(const Chi2Params& p, double delta_b);

// Adiabatically eliminated pump: third channel sqrt(gamma) a^dag a^dag.
[[nodiscard]] SLHModel build_tpa(const TpaParams& p);

// Two-level limit: H = D s^dag s - i sqrt(k1)(alpha s^dag - alpha^* s),
// single channel sqrt(k1 + k2) s^dag with s = |0><1|.
[[nodiscard]] SLHModel build_qubit_limit(const QubitLimitParams& p);

} // namespace qlimit
