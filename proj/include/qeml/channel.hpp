#pragma once

// Mixed-unitary quantum channels T(x) = (1/d) sum_j u_j x u_j^*, their
// superoperators, and generic linear maps on M(N).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qeml/errors.hpp"
#include "qeml/linalg.hpp"
#include "qeml/random.hpp"

namespace qeml {

/// A d-tuple of N x N unitaries. Immutable after construction.
class Channel {
public:
    explicit Channel(std::vector<ComplexMatrix> unitaries) : unitaries_(std::move(unitaries)) {
        if (unitaries_.empty()) throw ValidationError("channel: at least one unitary is required");
        dim_ = static_cast<int>(unitaries_.front().rows());
        if (dim_ <= 0) throw ValidationError("channel: dimension must be positive");
        for (std::size_t j = 0; j < unitaries_.size(); ++j) {
            const ComplexMatrix& u = unitaries_[j];
            if (u.rows() != dim_ || u.cols() != dim_) {
                throw ValidationError("channel: unitary " + std::to_string(j) + " is " + std::to_string(u.rows()) +
                                      "x" + std::to_string(u.cols()) + ", expected " + std::to_string(dim_) +
                                      "x" + std::to_string(dim_));
            }
            if (!u.allFinite()) throw ValidationError("channel: unitary " + std::to_string(j) + " has non-finite entries");
            if (!is_unitary(u)) {
                const double defect = (u * u.adjoint() - ComplexMatrix::Identity(dim_, dim_)).norm();
                throw ValidationError("channel: unitary " + std::to_string(j) + " fails ||uu* - I||_2 <= 1e-10 sqrt(N) (defect " +
                                      std::to_string(defect) + ")");
            }
        }
    }

    int dim() const { return dim_; }
    int degree() const { return static_cast<int>(unitaries_.size()); }
    const std::vector<ComplexMatrix>& unitaries() const { return unitaries_; }

private:
    std::vector<ComplexMatrix> unitaries_;
    int dim_ = 0;
};

/// N^2 x N^2 matrix of a map on M(N) in the row-major vectorization
/// vec(x)[i*N + j] = x(i, j).
struct Superoperator {
    int dim = 0;
    ComplexMatrix matrix;
};

inline ComplexVector vec(const ComplexMatrix& x) {
    const auto n = x.rows();
    ComplexVector v(n * x.cols());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) v(i * x.cols() + j) = x(i, j);
    return v;
}

inline ComplexMatrix unvec(const ComplexVector& v, int n) {
    if (v.size() != static_cast<Eigen::Index>(n) * n) {
        throw DimensionError("unvec: vector of length " + std::to_string(v.size()) + " is not " + std::to_string(n) + "^2");
    }
    ComplexMatrix x(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) x(i, j) = v(static_cast<Eigen::Index>(i) * n + j);
    return x;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

namespace detail {

inline void require_dim(const ComplexMatrix& x, int n, const char* what) {
    if (x.rows() != n || x.cols() != n) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(n) + "x" + std::to_string(n) +
                             " input, got " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
    }
}

inline void require_superoperator_fits(int n) {
    // N^4 complex doubles; refuse above 2 GiB.
    const double entries = std::pow(static_cast<double>(n), 4);
    if (entries * sizeof(Complex) > 2.0 * 1024 * 1024 * 1024) {
        throw ResourceError("superoperator for N = " + std::to_string(n) + " needs " +
                            std::to_string(entries * sizeof(Complex) / (1024.0 * 1024 * 1024)) + " GiB");
    }
}

}  // namespace detail

/// (1/d) sum_j u_j eta u_j^*
inline ComplexMatrix apply(const Channel& t, const ComplexMatrix& eta) {
    detail::require_dim(eta, t.dim(), "apply");
    ComplexMatrix out = ComplexMatrix::Zero(t.dim(), t.dim());
    for (const ComplexMatrix& u : t.unitaries()) out.noalias() += u * eta * u.adjoint();
    return out / static_cast<double>(t.degree());
}

/// Hilbert-Schmidt adjoint: (1/d) sum_j u_j^* eta u_j
inline ComplexMatrix adjoint_apply(const Channel& t, const ComplexMatrix& eta) {
    detail::require_dim(eta, t.dim(), "adjoint_apply");
    ComplexMatrix out = ComplexMatrix::Zero(t.dim(), t.dim());
    for (const ComplexMatrix& u : t.unitaries()) out.noalias() += u.adjoint() * eta * u;
    return out / static_cast<double>(t.degree());
}

/// Orthogonal projection onto span{I}: (tr(eta)/N) I.
inline ComplexMatrix e_map(const ComplexMatrix& eta) {
    require_square(eta, "e_map");
    const auto n = eta.rows();
    return (eta.trace() / static_cast<double>(n)) * ComplexMatrix::Identity(n, n);
}

/// (T - E)(eta)
inline ComplexMatrix delta_apply(const Channel& t, const ComplexMatrix& eta) {
    return qeml::apply(t, eta) - e_map(eta);
}

inline Superoperator superoperator(const Channel& t) {
    const int n = t.dim();
    detail::require_superoperator_fits(n);
    try {
        ComplexMatrix s = ComplexMatrix::Zero(n * n, n * n);
        for (const ComplexMatrix& u : t.unitaries()) s += kron(u, u.conjugate());
        s /= static_cast<double>(t.degree());
        return Superoperator{n, std::move(s)};
    } catch (const std::bad_alloc&) {
        throw ResourceError("superoperator allocation failed for N = " + std::to_string(n));
    }
}

/// A linear map on M(N) given by its action and the action of its
/// Hilbert-Schmidt adjoint.
class LinearMap {
public:
    using Action = std::function<ComplexMatrix(const ComplexMatrix&)>;

    LinearMap(int dim, Action forward, Action backward, std::string name = "map")
        : dim_(dim), forward_(std::move(forward)), backward_(std::move(backward)), name_(std::move(name)) {
        if (dim_ <= 0) throw DomainError("linear map: dimension must be positive");
    }

    int dim() const { return dim_; }
    const std::string& name() const { return name_; }

    ComplexMatrix apply(const ComplexMatrix& x) const {
        detail::require_dim(x, dim_, "LinearMap::apply");
        return forward_(x);
    }
    ComplexMatrix apply_adjoint(const ComplexMatrix& x) const {
        detail::require_dim(x, dim_, "LinearMap::apply_adjoint");
        return backward_(x);
    }
    ComplexMatrix operator()(const ComplexMatrix& x) const { return apply(x); }

    LinearMap adjoint() const { return LinearMap(dim_, backward_, forward_, name_ + "*"); }

    /// Column i*N + j holds vec(map(E_ij)).
    ComplexMatrix matrix() const {
        detail::require_superoperator_fits(dim_);
        const int n = dim_;
        ComplexMatrix s(n * n, n * n);
        ComplexMatrix unit = ComplexMatrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                unit(i, j) = 1.0;
                s.col(i * n + j) = vec(forward_(unit));
                unit(i, j) = 0.0;
            }
        }
        return s;
    }

private:
    int dim_;
    Action forward_;
    Action backward_;
    std::string name_;
};

inline LinearMap channel_map(const Channel& t) {
    auto shared = std::make_shared<const Channel>(t);
    return LinearMap(
        t.dim(), [shared](const ComplexMatrix& x) -> ComplexMatrix { return qeml::apply(*shared, x); },
        [shared](const ComplexMatrix& x) -> ComplexMatrix { return adjoint_apply(*shared, x); }, "T");
}

/// Delta = T - E; agrees with T on traceless matrices and annihilates I.
inline LinearMap deflated_map(const Channel& t) {
    auto shared = std::make_shared<const Channel>(t);
    return LinearMap(
        t.dim(), [shared](const ComplexMatrix& x) -> ComplexMatrix { return qeml::apply(*shared, x) - e_map(x); },
        [shared](const ComplexMatrix& x) -> ComplexMatrix { return adjoint_apply(*shared, x) - e_map(x); }, "T-E");
}

inline LinearMap identity_map(int n) {
    auto id = [](const ComplexMatrix& x) -> ComplexMatrix { return x; };
    return LinearMap(n, id, id, "id");
}

inline LinearMap e_map_operator(int n) {
    auto e = [](const ComplexMatrix& x) -> ComplexMatrix { return e_map(x); };
    return LinearMap(n, e, e, "E");
}

inline LinearMap superoperator_map(Superoperator s) {
    const int n = s.dim;
    if (s.matrix.rows() != n * n || s.matrix.cols() != n * n) {
        throw DimensionError("superoperator_map: matrix is not N^2 x N^2");
    }
    auto shared = std::make_shared<const ComplexMatrix>(std::move(s.matrix));
    return LinearMap(
        n, [shared, n](const ComplexMatrix& x) -> ComplexMatrix { return unvec(*shared * vec(x), n); },
        [shared, n](const ComplexMatrix& x) -> ComplexMatrix { return unvec(shared->adjoint() * vec(x), n); }, "S");
}

/// Operator norm of T restricted to the traceless matrices: top singular value
/// of Pi S Pi with Pi = I - v v^*, v = vec(I)/sqrt(N).
inline double reduced_spectral_radius(const Channel& t) {
    const int n = t.dim();
    const ComplexMatrix s = superoperator(t).matrix;
    const ComplexVector v = vec(ComplexMatrix::Identity(n, n)) / std::sqrt(static_cast<double>(n));
    const ComplexMatrix pi = ComplexMatrix::Identity(n * n, n * n) - v * v.adjoint();
    return spectral_norm(pi * s * pi);
}

/// Same quantity for the compression of T to diagonal matrices,
/// x |-> diag(T(diag x)) on traceless x. For permutation channels this is the
/// reduced spectral radius of the underlying graph walk.
inline double diagonal_reduced_spectral_radius(const Channel& t) {
    const int n = t.dim();
    ComplexMatrix walk(n, n);
    ComplexMatrix unit = ComplexMatrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        unit(j, j) = 1.0;
        walk.col(j) = qeml::apply(t, unit).diagonal();
        unit(j, j) = 0.0;
    }
    const ComplexMatrix pi =
        ComplexMatrix::Identity(n, n) - ComplexMatrix::Constant(n, n, Complex(1.0 / static_cast<double>(n), 0.0));
    return spectral_norm(pi * walk * pi);
}

/// Number of superoperator eigenvalues within 1e-8 of 1.
inline int unit_eigen_multiplicity(const Channel& t, double tol = 1e-8) {
    const ComplexMatrix s = superoperator(t).matrix;
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(s, /*computeEigenvectors=*/false);
    int count = 0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
        if (std::abs(solver.eigenvalues()(i) - Complex(1.0, 0.0)) <= tol) ++count;
    return count;
}

namespace detail {

inline double trace_norm(const ComplexMatrix& y) {
    return singular_values(y).sum();
}

/// Alternating maximization of ||f(u v^*)||_1 over unit u, v. Each step
/// does not decrease the value, which is always attained by an explicit
/// rank-one input and so is a valid lower bound on ||f||_{1->1}.
inline double rank_one_ascent(const LinearMap& f, ComplexVector u, ComplexVector v, int max_iter = 200) {
    u.normalize();
    v.normalize();
    double best = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const ComplexMatrix y = f.apply(u * v.adjoint());
        const Svd ys = svd(y);
        const double value = ys.singulars.sum();
        const bool stalled = it > 0 && value <= best * (1.0 + 1e-13);
        best = std::max(best, value);
        if (stalled) break;
        const ComplexMatrix polar = ys.left * ys.right.adjoint();
        const Svd gs = svd(f.apply_adjoint(polar));
        u = gs.left.col(0);
        v = gs.right.col(0);
    }
    return best;
}

inline ComplexVector gaussian_vector(Rng& rng, int n) {
    ComplexVector z(n);
    for (int i = 0; i < n; ++i) {
        const double re = rng.normal();
        const double im = rng.normal();
        z(i) = Complex(re, im);
    }
    return z;
}

}  // namespace detail

/// Schatten-p induced norm of `map`. p = 2 is exact. p = 1 is a certified
/// lower bound: the best ||map(u v^*)||_1 over `budget` restarts, restart 0
/// from u = v = e_0 and the rest from Gaussian starts seeded by (seed, r).
/// p = inf uses ||map||_{inf->inf} = ||map^*||_{1->1}.
inline double induced_norm(const LinearMap& map, NormP p, int budget = 8, Seed seed = Seed{0}) {
    if (budget < 1) throw PreconditionError("induced_norm: budget must be >= 1, got " + std::to_string(budget));
    switch (p) {
        case NormP::Two: return spectral_norm(map.matrix());
        case NormP::Inf: return induced_norm(map.adjoint(), NormP::One, budget, seed);
        case NormP::One: break;
    }
    const int n = map.dim();
    double best = 0.0;
    for (int r = 0; r < budget; ++r) {
        ComplexVector u;
        ComplexVector v;
        if (r == 0) {
            u = ComplexVector::Unit(n, 0);
            v = u;
        } else {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
            u = detail::gaussian_vector(rng, n);
            v = detail::gaussian_vector(rng, n);
        }
        best = std::max(best, detail::rank_one_ascent(map, u, v));
    }
    return best;
}

/// Exact induced norms of a mixed-unitary channel: it is completely positive,
/// trace preserving and unital, so every p in {1, 2, inf} gives 1.
inline double cptp_norm_exact(const Channel&, NormP) {
    return 1.0;
}

/// 1/rho: upper bound on the height of T restricted to traceless matrices.
inline double operator_height_bound(const Channel& t) {
    const double rho = reduced_spectral_radius(t);
    if (rho <= 1e-12) {
        throw DegenerateError("operator_height_bound: reduced spectral radius is " + std::to_string(rho) +
                              " (perfect mixer, no witness exists)");
    }
    return 1.0 / rho;
}

/// Matrix of lambda |-> diag(U2 map(U1 diag(lambda) V1) V2).
inline ComplexMatrix conjugated_vector_map(const LinearMap& map, const ComplexMatrix& u1, const ComplexMatrix& u2,
                                           const ComplexMatrix& v1, const ComplexMatrix& v2) {
    const int n = map.dim();
    const std::pair<const char*, const ComplexMatrix*> args[] = {{"U1", &u1}, {"U2", &u2}, {"V1", &v1}, {"V2", &v2}};
    for (const auto& [label, m] : args) {
        detail::require_dim(*m, n, "conjugated_vector_map");
        if (!is_unitary(*m)) throw PreconditionError(std::string("conjugated_vector_map: ") + label + " is not unitary");
    }
    ComplexMatrix out(n, n);
    for (int k = 0; k < n; ++k) {
        const ComplexMatrix input = u1.col(k) * v1.row(k);
        out.col(k) = (u2 * map.apply(input) * v2).diagonal();
    }
    return out;
}

}  // namespace qeml
