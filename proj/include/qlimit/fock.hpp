#pragma once

#include <complex>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qlimit {

using complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

// Per-mode truncation dimensions of a (tensor product of) truncated Fock
// space(s). Mode 0 is the most significant factor of the Kronecker product.
class SpaceSignature {
public:
    SpaceSignature() = default;
    SpaceSignature(std::initializer_list<Index> dims);
    explicit SpaceSignature(std::vector<Index> dims);

    [[nodiscard]] const std::vector<Index>& dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t mode_count() const noexcept { return dims_.size(); }
    [[nodiscard]] Index mode_dim(std::size_t mode) const;
    [[nodiscard]] Index total() const noexcept { return total_; }

    // Flat basis index of an occupation-number tuple.
    [[nodiscard]] Index flat_index(std::span<const Index> occupations) const;
    // Occupation numbers of a flat basis index.
    [[nodiscard]] std::vector<Index> occupations(Index flat) const;

    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const SpaceSignature&, const SpaceSignature&) = default;

private:
    std::vector<Index> dims_;
    Index total_ = 0;
};

void require_same_space(const SpaceSignature& a, const SpaceSignature& b, const char* what);

// Dense operator on a truncated Fock space.
class Operator {
public:
    Operator() = default;
    Operator(SpaceSignature sig, Matrix entries);

    [[nodiscard]] const SpaceSignature& sig() const noexcept { return sig_; }
    [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }
    [[nodiscard]] Index dim() const noexcept { return m_.rows(); }
    [[nodiscard]] complex operator()(Index r, Index c) const { return m_(r, c); }

    [[nodiscard]] bool is_zero() const { return m_.isZero(0.0); }

    Operator& operator+=(const Operator& rhs);
    Operator& operator-=(const Operator& rhs);
    Operator& operator*=(complex s);

    friend Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
    friend Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }
    friend Operator operator*(Operator lhs, complex s) { return lhs *= s; }
    friend Operator operator*(complex s, Operator rhs) { return rhs *= s; }
    friend Operator operator*(double s, Operator rhs) { return rhs *= complex(s, 0.0); }
    friend Operator operator*(const Operator& lhs, const Operator& rhs);
    friend Operator operator-(const Operator& x) { return complex(-1.0, 0.0) * x; }

    friend bool operator==(const Operator& a, const Operator& b)
    {
        return a.sig_ == b.sig_ && a.m_ == b.m_;
    }

private:
    SpaceSignature sig_;
    Matrix m_;
};

class StateVector {
public:
    StateVector(SpaceSignature sig, Vector amplitudes);

    [[nodiscard]] const SpaceSignature& sig() const noexcept { return sig_; }
    [[nodiscard]] const Vector& amplitudes() const noexcept { return v_; }

    // |psi><psi|
    [[nodiscard]] Operator projector() const;

private:
    SpaceSignature sig_;
    Vector v_;
};

[[nodiscard]] Operator annihilation(const SpaceSignature& sig, std::size_t mode);
[[nodiscard]] Operator creation(const SpaceSignature& sig, std::size_t mode);
// a^dag a on the selected mode.
[[nodiscard]] Operator number(const SpaceSignature& sig, std::size_t mode);
[[nodiscard]] Operator identity(const SpaceSignature& sig);
[[nodiscard]] Operator zero(const SpaceSignature& sig);
[[nodiscard]] Operator dagger(const Operator& x);
[[nodiscard]] Operator commutator(const Operator& x, const Operator& y);
// Kronecker product; the result's signature concatenates both mode lists.
[[nodiscard]] Operator tensor(const Operator& x, const Operator& y);
// Diagonal operator sum_m f(m) |m><m| acting on one mode, identity elsewhere.
template <class F>
[[nodiscard]] Operator mode_diagonal(const SpaceSignature& sig, std::size_t mode, F&& f);

[[nodiscard]] StateVector fock_state(const SpaceSignature& sig, std::span<const Index> occupations);
[[nodiscard]] StateVector fock_state(const SpaceSignature& sig, std::initializer_list<Index> occupations);
// Normalized truncated expansion e^{-|b|^2/2} sum b^m/sqrt(m!) |m>.
[[nodiscard]] StateVector coherent_state(Index dim, complex beta);
// exp(beta a^dag - beta^* a) on a single mode of dimension dim.
[[nodiscard]] Operator displacement_operator(Index dim, complex beta);
// diag((-1)^m)
[[nodiscard]] Operator parity_operator(Index dim);

// Embeds a single-mode matrix into mode `mode` of sig (identity on the rest).
[[nodiscard]] Matrix embed_single_mode(const SpaceSignature& sig, std::size_t mode, const Matrix& local);

template <class F>
Operator mode_diagonal(const SpaceSignature& sig, std::size_t mode, F&& f)
{
    const Index d = sig.mode_dim(mode);
    Matrix local = Matrix::Zero(d, d);
    for (Index m = 0; m < d; ++m) {
        local(m, m) = complex(f(m));
    }
    return Operator(sig, embed_single_mode(sig, mode, local));
}

} // namespace qlimit
