#include "qlimit/master_equation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <unsupported/Eigen/KroneckerProduct>

#include "qlimit/errors.hpp"

namespace qlimit {

DensityMatrix::DensityMatrix(SpaceSignature sig, Matrix entries)
    : sig_(std::move(sig)), m_(std::move(entries))
{
    if (m_.rows() != sig_.total() || m_.cols() != sig_.total()) {
        throw DimensionMismatch("density matrix does not match space " + sig_.to_string());
    }
    const Diagnostics d = diagnose(m_);
    if (d.hermiticity > kHermiticityTolerance) {
        throw InvariantViolation("density matrix not hermitian (residual " +
                                 std::to_string(d.hermiticity) + ")");
    }
    if (d.trace_error > kTraceTolerance) {
        throw InvariantViolation("density matrix trace off by " + std::to_string(d.trace_error));
    }
    if (d.min_eigenvalue < -kPositivityTolerance) {
        throw InvariantViolation("density matrix has eigenvalue " +
                                 std::to_string(d.min_eigenvalue));
    }
}

DensityMatrix DensityMatrix::pure(const StateVector& psi)
{
    return DensityMatrix(psi.sig(), psi.projector().matrix());
}

DensityMatrix::Diagnostics DensityMatrix::diagnose(const Matrix& rho)
{
    Diagnostics d;
    d.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    d.trace_error = std::abs(rho.trace() - complex(1.0, 0.0));
    const Matrix herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    return d;
}

Liouvillian::Liouvillian(const SLHModel& model) : sig_(model.sig)
{
    model.validate();
    Matrix heff = model.H.matrix();
    for (const auto& l : model.L) {
        if (l.is_zero()) {
            continue;
        }
        heff -= complex(0.0, 0.5) * (l.matrix() * l.matrix().adjoint());
        l_.push_back(l.matrix().sparseView());
        l_adj_.push_back(Matrix(l.matrix().adjoint()).sparseView());
    }
    heff_ = heff.sparseView();
    heff_adj_ = Matrix(heff.adjoint()).sparseView();
}

namespace {

// out += s * (A x), A column-major sparse.
void add_left_product(const Liouvillian::Sparse& A, const Matrix& x, complex s, Matrix& out)
{
    for (Index j = 0; j < x.cols(); ++j) {
        for (Index k = 0; k < A.outerSize(); ++k) {
            const complex xk = s * x(k, j);
            for (Liouvillian::Sparse::InnerIterator it(A, k); it; ++it) {
                out(it.row(), j) += it.value() * xk;
            }
        }
    }
}

// out += s * (x B), B column-major sparse.
void add_right_product(const Matrix& x, const Liouvillian::Sparse& B, complex s, Matrix& out)
{
    for (Index c = 0; c < B.outerSize(); ++c) {
        for (Liouvillian::Sparse::InnerIterator it(B, c); it; ++it) {
            out.col(c) += (s * it.value()) * x.col(it.row());
        }
    }
}

} // namespace

void Liouvillian::apply(const Matrix& rho, Matrix& out, Matrix& scratch) const
{
    if (rho.rows() != sig_.total() || rho.cols() != sig_.total()) {
        throw DimensionMismatch("liouvillian: state does not match space " + sig_.to_string());
    }
    const Index d = sig_.total();
    out.setZero(d, d);
    add_left_product(heff_, rho, complex(0.0, -1.0), out);
    add_right_product(rho, heff_adj_, complex(0.0, 1.0), out);
    for (std::size_t k = 0; k < l_.size(); ++k) {
        scratch.setZero(d, d);
        add_left_product(l_adj_[k], rho, complex(1.0, 0.0), scratch);
        add_right_product(scratch, l_[k], complex(1.0, 0.0), out);
    }
}

void Liouvillian::apply_hermitian(const Matrix& rho, Matrix& out, Matrix& scratch) const
{
    if (rho.rows() != sig_.total() || rho.cols() != sig_.total()) {
        throw DimensionMismatch("liouvillian: state does not match space " + sig_.to_string());
    }
    const Index d = sig_.total();
    // -i(Heff rho - rho Heff^dag) = X + X^dag with X = -i Heff rho.
    scratch.setZero(d, d);
    add_left_product(heff_, rho, complex(0.0, -1.0), scratch);
    out = scratch + scratch.adjoint();
    for (std::size_t k = 0; k < l_.size(); ++k) {
        scratch.setZero(d, d);
        add_left_product(l_adj_[k], rho, complex(1.0, 0.0), scratch);
        add_right_product(scratch, l_[k], complex(1.0, 0.0), out);
    }
}

Matrix Liouvillian::apply(const Matrix& rho) const
{
    Matrix out;
    Matrix scratch;
    apply(rho, out, scratch);
    return out;
}

Matrix Liouvillian::superoperator() const
{
    // vec(A X B) = (B^T kron A) vec(X), column stacking.
    const Index d = sig_.total();
    const Matrix id = Matrix::Identity(d, d);
    const Matrix heff = Matrix(heff_);
    const complex i(0.0, 1.0);
    Matrix sup = -i * Matrix(Eigen::kroneckerProduct(id, heff)) +
                 i * Matrix(Eigen::kroneckerProduct(heff.conjugate(), id));
    for (std::size_t k = 0; k < l_.size(); ++k) {
        const Matrix l = Matrix(l_[k]);
        sup += Eigen::kroneckerProduct(l.transpose(), l.adjoint()).eval();
    }
    return sup;
}

Matrix liouvillian_apply(const SLHModel& model, const Matrix& rho)
{
    return Liouvillian(model).apply(rho);
}

void IntegratorConfig::validate() const
{
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw InvalidArgument("integrator t_end must be positive");
    }
    if (!(output_dt > 0.0) || output_dt > t_end) {
        throw InvalidArgument("integrator output_dt must lie in (0, t_end]");
    }
    if (method == Method::RK4 && !(dt > 0.0)) {
        throw InvalidArgument("RK4 needs dt > 0");
    }
    if (method == Method::RK45 && (!(rtol > 0.0) || !(atol > 0.0))) {
        throw InvalidArgument("RK45 needs rtol > 0 and atol > 0");
    }
}

const std::vector<double>& Trajectory::column(std::string_view name) const
{
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (columns[k] == name) {
            return values[k];
        }
    }
    throw InvalidArgument("trajectory has no column '" + std::string(name) + "'");
}

bool Trajectory::has_column(std::string_view name) const
{
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

namespace {

void hermitize(Matrix& rho)
{
    rho = 0.5 * (rho + rho.adjoint()).eval();
}

struct Recorder {
    const SpaceSignature& sig;
    Index idx0 = 0;
    Index idx1 = 0;
    Operator projector;
    Eigen::VectorXd number_diag;

    explicit Recorder(const SpaceSignature& s) : sig(s), projector(qubit_projector(s))
    {
        std::vector<Index> occ(sig.mode_count(), 0);
        idx0 = sig.flat_index(occ);
        occ[0] = 1;
        idx1 = sig.flat_index(occ);
        number_diag = number(sig, 0).matrix().diagonal().real();
    }

    [[nodiscard]] std::vector<std::string> names() const
    {
        if (sig.mode_count() == 1) {
            return {"pop0", "pop1", "leakage", "n_expect", "trace_err"};
        }
        return {"pop0a0b", "pop1a0b", "leakage", "n_expect", "trace_err"};
    }

    void record(const Matrix& rho, Trajectory& traj) const
    {
        const double p0 = rho(idx0, idx0).real();
        const double p1 = rho(idx1, idx1).real();
        const double tr = rho.trace().real();
        traj.values[0].push_back(p0);
        traj.values[1].push_back(p1);
        traj.values[2].push_back(tr - p0 - p1);
        traj.values[3].push_back(rho.diagonal().real().dot(number_diag));
        const double terr = std::abs(rho.trace() - complex(1.0, 0.0));
        traj.values[4].push_back(terr);
        traj.max_trace_error = std::max(traj.max_trace_error, terr);
        std::vector<std::vector<double>> pops;
        pops.reserve(sig.mode_count());
        for (std::size_t m = 0; m < sig.mode_count(); ++m) {
            pops.push_back(mode_population(rho, sig, m));
        }
        traj.mode_populations.push_back(std::move(pops));
    }
};

// Dormand-Prince 5(4) tableau (autonomous system, nodes not needed).
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b* (embedded fourth-order weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

class Stepper {
public:
    Stepper(const Liouvillian& lv, const IntegratorConfig& cfg) : lv_(lv), cfg_(cfg) {}

    // Advances rho from t to t_target exactly.
    void advance(Matrix& rho, double& t, double t_target, Trajectory& traj)
    {
        if (cfg_.method == Method::RK4) {
            const double span = t_target - t;
            const auto n = static_cast<long>(std::ceil(span / cfg_.dt - 1e-9));
            const double h = span / static_cast<double>(std::max(1L, n));
            for (long s = 0; s < std::max(1L, n); ++s) {
                rk4_step(rho, h);
                hermitize(rho);
                ++traj.accepted_steps;
            }
            t = t_target;
            return;
        }
        while (t < t_target) {
            if (!have_k1_) {
                lv_.apply_hermitian(rho, k1_, scratch_);
                have_k1_ = true;
            }
            if (h_ <= 0.0) {
                h_ = initial_step(rho, t_target - t);
            }
            const bool clipped = h_ >= t_target - t;
            const double h = clipped ? t_target - t : h_;
            if (h < 1e-14 * std::max(1.0, std::abs(t))) {
                throw NumericalError("adaptive step size underflow at t = " + std::to_string(t));
            }
            const double err = dp_trial(rho, h);
            if (!std::isfinite(err)) {
                throw NumericalError("non-finite state in adaptive step at t = " + std::to_string(t));
            }
            const double factor = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
            if (err <= 1.0) {
                rho.swap(ynew_);
                hermitize(rho);
                // The Liouvillian maps rho^dag to L(rho)^dag, so the derivative
                // of the hermitized state is the hermitized derivative.
                k1_ = 0.5 * (k7_ + k7_.adjoint());
                t = clipped ? t_target : t + h;
                ++traj.accepted_steps;
                if (!clipped || factor < 1.0) {
                    h_ = h * factor;
                }
            } else {
                ++traj.rejected_steps;
                h_ = h * std::min(1.0, factor);
            }
        }
    }

private:
    void rk4_step(Matrix& rho, double h)
    {
        lv_.apply_hermitian(rho, k1_, scratch_);
        tmp_ = rho + (0.5 * h) * k1_;
        lv_.apply_hermitian(tmp_, k2_, scratch_);
        tmp_ = rho + (0.5 * h) * k2_;
        lv_.apply_hermitian(tmp_, k3_, scratch_);
        tmp_ = rho + h * k3_;
        lv_.apply_hermitian(tmp_, k4_, scratch_);
        rho += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }

    double initial_step(const Matrix& rho, double span) const
    {
        const double y = rho.cwiseAbs().maxCoeff();
        const double f = k1_.cwiseAbs().maxCoeff();
        double h = (f > 0.0) ? 0.01 * std::max(y, cfg_.atol) / f : span;
        return std::min(h, span);
    }

    double dp_trial(const Matrix& y, double h)
    {
        tmp_ = y + (h * a21) * k1_;
        lv_.apply_hermitian(tmp_, k2_, scratch_);
        tmp_ = y + h * (a31 * k1_ + a32 * k2_);
        lv_.apply_hermitian(tmp_, k3_, scratch_);
        tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        lv_.apply_hermitian(tmp_, k4_, scratch_);
        tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        lv_.apply_hermitian(tmp_, k5_, scratch_);
        tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        lv_.apply_hermitian(tmp_, k6_, scratch_);
        ynew_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
        lv_.apply_hermitian(ynew_, k7_, scratch_);
        tmp_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
        double err = 0.0;
        for (Index j = 0; j < y.cols(); ++j) {
            for (Index i = 0; i < y.rows(); ++i) {
                const double scale =
                    cfg_.atol + cfg_.rtol * std::max(std::abs(y(i, j)), std::abs(ynew_(i, j)));
                err = std::max(err, std::abs(tmp_(i, j)) / scale);
            }
        }
        return err;
    }

    const Liouvillian& lv_;
    const IntegratorConfig& cfg_;
    Matrix k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_, scratch_;
    bool have_k1_ = false;
    double h_ = 0.0;
};

} // namespace

Trajectory integrate(const SLHModel& model, const DensityMatrix& rho0, const IntegratorConfig& config,
                     const SampleCallback& on_sample)
{
    config.validate();
    require_same_space(model.sig, rho0.sig(), "integrate");
    const Liouvillian lv(model);
    const Recorder recorder(model.sig);

    Trajectory traj;
    traj.sig = model.sig;
    traj.truncated_fock = model.truncated_fock;
    traj.columns = recorder.names();
    traj.values.assign(traj.columns.size(), {});
    traj.min_eigenvalue = std::numeric_limits<double>::infinity();

    const auto n_intervals =
        static_cast<std::size_t>(std::ceil(config.t_end / config.output_dt - 1e-9));
    Matrix rho = rho0.matrix();
    double t = 0.0;
    Stepper stepper(lv, config);

    auto sample = [&](std::size_t k) {
        traj.times.push_back(t);
        recorder.record(rho, traj);
        const bool last = k == n_intervals;
        if ((config.checkpoint_stride > 0 && k % config.checkpoint_stride == 0) || last) {
            const auto diag = DensityMatrix::diagnose(rho);
            traj.min_eigenvalue = std::min(traj.min_eigenvalue, diag.min_eigenvalue);
            if (config.checkpoint_stride > 0 && k % config.checkpoint_stride == 0) {
                traj.checkpoint_samples.push_back(k);
                traj.checkpoints.push_back(rho);
            }
            if (diag.min_eigenvalue < -100.0 * 1e-7) {
                throw InvariantViolation("state lost positivity at t = " + std::to_string(t) +
                                         " (min eigenvalue " +
                                         std::to_string(diag.min_eigenvalue) + ")");
            }
        }
        const double terr = traj.values[4].back();
        if (terr > 100.0 * config.trace_drift_per_time * std::max(1.0, t)) {
            throw InvariantViolation("trace drift " + std::to_string(terr) + " at t = " +
                                     std::to_string(t));
        }
        if (on_sample) {
            on_sample(t, rho);
        }
    };

    sample(0);
    for (std::size_t k = 1; k <= n_intervals; ++k) {
        const double target = std::min(static_cast<double>(k) * config.output_dt, config.t_end);
        stepper.advance(rho, t, target, traj);
        if (!rho.allFinite()) {
            throw NumericalError("integration produced non-finite entries at t = " +
                                 std::to_string(t));
        }
        sample(k);
    }
    traj.final_state = std::move(rho);
    return traj;
}

DensityMatrix steady_state(const SLHModel& model, const SteadyStateOptions& options)
{
    const Index d = model.sig.total();
    if (d > options.dense_limit) {
        throw InvalidArgument("steady state: dimension " + std::to_string(d) +
                              " exceeds dense limit " + std::to_string(options.dense_limit));
    }
    const Liouvillian lv(model);
    const Matrix sup = lv.superoperator();
    const Index n = d * d;
    const double scale = std::max(1.0, sup.cwiseAbs().maxCoeff());

    // Row 0 (the rho_00 equation) is a linear combination of the other
    // diagonal rows because the dynamics preserve the trace; replace it by
    // the normalization condition.
    Matrix bordered = sup;
    bordered.row(0).setZero();
    for (Index k = 0; k < d; ++k) {
        bordered(0, k * d + k) = scale;
    }
    Vector rhs = Vector::Zero(n);
    rhs(0) = scale;

    const Eigen::PartialPivLU<Matrix> lu(bordered);
    // rcond() is unreliable for exactly zero pivots; check them directly too.
    const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double pivot_ratio = pivots.minCoeff() / pivots.maxCoeff();
    if (!(lu.rcond() > 1e-13) || !(pivot_ratio > 1e-13)) {
        Eigen::ColPivHouseholderQR<Matrix> qr(sup);
        qr.setThreshold(1e-10);
        const Index multiplicity = n - qr.rank();
        throw NumericalError("steady state: degenerate null space of multiplicity " +
                             std::to_string(multiplicity));
    }
    const Vector x = lu.solve(rhs);
    Matrix rho = Eigen::Map<const Matrix>(x.data(), d, d);
    hermitize(rho);
    rho /= rho.trace();

    const double residual = lv.apply(rho).norm();
    if (residual > 1e-9 * sup.norm()) {
        throw NumericalError("steady state residual " + std::to_string(residual) +
                             " exceeds tolerance");
    }
    return DensityMatrix(model.sig, std::move(rho));
}

complex expectation(const Matrix& rho, const Operator& x)
{
    if (rho.rows() != x.dim()) {
        throw DimensionMismatch("expectation: state and operator dimensions differ");
    }
    return (rho.transpose().cwiseProduct(x.matrix())).sum();
}

complex expectation(const DensityMatrix& rho, const Operator& x)
{
    require_same_space(rho.sig(), x.sig(), "expectation");
    return expectation(rho.matrix(), x);
}

std::vector<double> populations(const DensityMatrix& rho,
                                const std::vector<std::vector<Index>>& basis_labels)
{
    std::vector<double> out;
    out.reserve(basis_labels.size());
    for (const auto& label : basis_labels) {
        const Index k = rho.sig().flat_index(label);
        out.push_back(rho.matrix()(k, k).real());
    }
    return out;
}

double leakage(const Matrix& rho, const Operator& qubit_projector)
{
    if (rho.rows() != qubit_projector.dim()) {
        throw DimensionMismatch("leakage: state and projector dimensions differ");
    }
    const Matrix& p = qubit_projector.matrix();
    return (rho.trace() - (p * rho * p).trace()).real();
}

double leakage(const DensityMatrix& rho, const Operator& qubit_projector)
{
    require_same_space(rho.sig(), qubit_projector.sig(), "leakage");
    return leakage(rho.matrix(), qubit_projector);
}

Operator qubit_projector(const SpaceSignature& sig)
{
    Matrix p = Matrix::Zero(sig.total(), sig.total());
    std::vector<Index> occ(sig.mode_count(), 0);
    p(sig.flat_index(occ), sig.flat_index(occ)) = 1.0;
    if (sig.mode_dim(0) >= 2) {
        occ[0] = 1;
        p(sig.flat_index(occ), sig.flat_index(occ)) = 1.0;
    }
    return Operator(sig, std::move(p));
}

std::vector<double> mode_population(const Matrix& rho, const SpaceSignature& sig, std::size_t mode)
{
    const Index d = sig.mode_dim(mode);
    Index stride = 1;
    for (std::size_t k = mode + 1; k < sig.mode_count(); ++k) {
        stride *= sig.dims()[k];
    }
    std::vector<double> pops(static_cast<std::size_t>(d), 0.0);
    for (Index i = 0; i < sig.total(); ++i) {
        pops[static_cast<std::size_t>((i / stride) % d)] += rho(i, i).real();
    }
    return pops;
}

double truncation_check(const Trajectory& trajectory, std::size_t top_k)
{
    if (!trajectory.truncated_fock || top_k == 0) {
        return 0.0;
    }
    double worst = 0.0;
    for (const auto& sample : trajectory.mode_populations) {
        for (const auto& pops : sample) {
            const std::size_t k = std::min(top_k, pops.size());
            double top = 0.0;
            for (std::size_t j = pops.size() - k; j < pops.size(); ++j) {
                top += pops[j];
            }
            worst = std::max(worst, top);
        }
    }
    return worst;
}

} // namespace qlimit
