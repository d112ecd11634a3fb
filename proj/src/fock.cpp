#include "qlimit/fock.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "qlimit/errors.hpp"

namespace qlimit {

SpaceSignature::SpaceSignature(std::initializer_list<Index> dims)
    : SpaceSignature(std::vector<Index>(dims))
{
}

SpaceSignature::SpaceSignature(std::vector<Index> dims) : dims_(std::move(dims)), total_(1)
{
    if (dims_.empty()) {
        throw InvalidArgument("space signature needs at least one mode");
    }
    for (const Index d : dims_) {
        if (d < 1) {
            throw InvalidArgument("mode dimension must be >= 1, got " + std::to_string(d));
        }
        total_ *= d;
    }
}

Index SpaceSignature::mode_dim(std::size_t mode) const
{
    if (mode >= dims_.size()) {
        throw DimensionMismatch("mode index " + std::to_string(mode) + " out of range for " +
                                to_string());
    }
    return dims_[mode];
}

Index SpaceSignature::flat_index(std::span<const Index> occupations) const
{
    if (occupations.size() != dims_.size()) {
        throw DimensionMismatch("occupation tuple has " + std::to_string(occupations.size()) +
                                " entries for " + to_string());
    }
    Index flat = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        if (occupations[k] < 0 || occupations[k] >= dims_[k]) {
            throw DimensionMismatch("occupation " + std::to_string(occupations[k]) +
                                    " outside mode " + std::to_string(k) + " of " + to_string());
        }
        flat = flat * dims_[k] + occupations[k];
    }
    return flat;
}

std::vector<Index> SpaceSignature::occupations(Index flat) const
{
    if (flat < 0 || flat >= total_) {
        throw DimensionMismatch("flat index out of range for " + to_string());
    }
    std::vector<Index> occ(dims_.size());
    for (std::size_t k = dims_.size(); k-- > 0;) {
        occ[k] = flat % dims_[k];
        flat /= dims_[k];
    }
    return occ;
}

std::string SpaceSignature::to_string() const
{
    std::ostringstream os;
    os << '[';
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        os << (k ? "," : "") << dims_[k];
    }
    os << ']';
    return os.str();
}

void require_same_space(const SpaceSignature& a, const SpaceSignature& b, const char* what)
{
    if (!(a == b)) {
        throw DimensionMismatch(std::string(what) + ": signature " + a.to_string() + " vs " +
                                b.to_string());
    }
}

Operator::Operator(SpaceSignature sig, Matrix entries) : sig_(std::move(sig)), m_(std::move(entries))
{
    if (m_.rows() != m_.cols() || m_.rows() != sig_.total()) {
        throw DimensionMismatch("operator matrix is " + std::to_string(m_.rows()) + "x" +
                                std::to_string(m_.cols()) + " on space " + sig_.to_string());
    }
}

Operator& Operator::operator+=(const Operator& rhs)
{
    require_same_space(sig_, rhs.sig_, "operator sum");
    m_ += rhs.m_;
    return *this;
}

Operator& Operator::operator-=(const Operator& rhs)
{
    require_same_space(sig_, rhs.sig_, "operator difference");
    m_ -= rhs.m_;
    return *this;
}

Operator& Operator::operator*=(complex s)
{
    m_ *= s;
    return *this;
}

Operator operator*(const Operator& lhs, const Operator& rhs)
{
    require_same_space(lhs.sig_, rhs.sig_, "operator product");
    return Operator(lhs.sig_, lhs.m_ * rhs.m_);
}

StateVector::StateVector(SpaceSignature sig, Vector amplitudes)
    : sig_(std::move(sig)), v_(std::move(amplitudes))
{
    if (v_.size() != sig_.total()) {
        throw DimensionMismatch("state vector length does not match " + sig_.to_string());
    }
    if (std::abs(v_.norm() - 1.0) > 1e-12) {
        throw InvalidArgument("state vector is not normalized");
    }
}

Operator StateVector::projector() const
{
    return Operator(sig_, v_ * v_.adjoint());
}

Matrix embed_single_mode(const SpaceSignature& sig, std::size_t mode, const Matrix& local)
{
    const Index d = sig.mode_dim(mode);
    if (local.rows() != d || local.cols() != d) {
        throw DimensionMismatch("local operator does not match mode dimension");
    }
    Index before = 1;
    Index after = 1;
    for (std::size_t k = 0; k < sig.mode_count(); ++k) {
        if (k < mode) {
            before *= sig.dims()[k];
        } else if (k > mode) {
            after *= sig.dims()[k];
        }
    }
    Matrix out = local;
    if (after > 1) {
        out = Eigen::kroneckerProduct(local, Matrix::Identity(after, after)).eval();
    }
    if (before > 1) {
        out = Eigen::kroneckerProduct(Matrix::Identity(before, before), out).eval();
    }
    return out;
}

Operator annihilation(const SpaceSignature& sig, std::size_t mode)
{
    const Index d = sig.mode_dim(mode);
    if (d < 2) {
        throw DimensionMismatch("annihilation needs mode dimension >= 2");
    }
    Matrix a = Matrix::Zero(d, d);
    for (Index m = 1; m < d; ++m) {
        a(m - 1, m) = std::sqrt(static_cast<double>(m));
    }
    return Operator(sig, embed_single_mode(sig, mode, a));
}

Operator creation(const SpaceSignature& sig, std::size_t mode)
{
    return dagger(annihilation(sig, mode));
}

Operator number(const SpaceSignature& sig, std::size_t mode)
{
    return mode_diagonal(sig, mode, [](Index m) { return static_cast<double>(m); });
}

Operator identity(const SpaceSignature& sig)
{
    return Operator(sig, Matrix::Identity(sig.total(), sig.total()));
}

Operator zero(const SpaceSignature& sig)
{
    return Operator(sig, Matrix::Zero(sig.total(), sig.total()));
}

Operator dagger(const Operator& x)
{
    return Operator(x.sig(), x.matrix().adjoint());
}

Operator commutator(const Operator& x, const Operator& y)
{
    return x * y - y * x;
}

Operator tensor(const Operator& x, const Operator& y)
{
    std::vector<Index> dims = x.sig().dims();
    dims.insert(dims.end(), y.sig().dims().begin(), y.sig().dims().end());
    return Operator(SpaceSignature(std::move(dims)),
                    Eigen::kroneckerProduct(x.matrix(), y.matrix()).eval());
}

StateVector fock_state(const SpaceSignature& sig, std::span<const Index> occupations)
{
    Vector v = Vector::Zero(sig.total());
    v(sig.flat_index(occupations)) = 1.0;
    return StateVector(sig, std::move(v));
}

StateVector fock_state(const SpaceSignature& sig, std::initializer_list<Index> occupations)
{
    return fock_state(sig, std::span<const Index>(occupations.begin(), occupations.size()));
}

StateVector coherent_state(Index dim, complex beta)
{
    if (dim < 1) {
        throw InvalidArgument("coherent state needs dim >= 1");
    }
    Vector v(dim);
    complex term(1.0, 0.0);
    v(0) = term;
    for (Index m = 1; m < dim; ++m) {
        term *= beta / std::sqrt(static_cast<double>(m));
        v(m) = term;
    }
    v /= v.norm();
    return StateVector(SpaceSignature{dim}, std::move(v));
}

Operator displacement_operator(Index dim, complex beta)
{
    const SpaceSignature sig{dim};
    if (dim == 1) {
        return identity(sig);
    }
    const Matrix a = annihilation(sig, 0).matrix();
    const Matrix generator = beta * a.adjoint() - std::conj(beta) * a;
    return Operator(sig, generator.exp());
}

Operator parity_operator(Index dim)
{
    return mode_diagonal(SpaceSignature{dim}, 0, [](Index m) { return m % 2 == 0 ? 1.0 : -1.0; });
}

} // namespace qlimit
