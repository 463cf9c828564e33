#pragma once

// Dense complex matrix kernels: Schatten norms, factorizations and the scalar
// functionals (heights, logarithmic diameters) used by the witness pipeline.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "qeml/errors.hpp"

namespace qeml {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Relative cutoff below which singular values / moduli count as zero.
inline constexpr double kRankCutoff = 1e-10;
/// Relative tolerance for accepting a matrix as self-adjoint.
inline constexpr double kSelfAdjointTol = 1e-10;

/// The three exponents the library supports for Schatten and l_p norms.
enum class NormP { One, Two, Inf };

inline NormP norm_p_from_int(int p) {
    switch (p) {
        case 1: return NormP::One;
        case 2: return NormP::Two;
        case 0:  // conventional stand-in for infinity on command lines
        case -1: return NormP::Inf;
        default: throw DomainError("norm exponent must be 1, 2 or infinity, got " + std::to_string(p));
    }
}

inline std::string_view to_string(NormP p) {
    switch (p) {
        case NormP::One: return "1";
        case NormP::Two: return "2";
        case NormP::Inf: return "inf";
    }
    return "?";
}

struct HermitianEigen {
    RealVector eigenvalues;      // ascending
    ComplexMatrix eigenvectors;  // columns
};

/// a = left * diag(singulars) * right^*
struct Svd {
    ComplexMatrix left;
    RealVector singulars;  // descending
    ComplexMatrix right;
};

/// Self-adjoint parts of x = re + i*im.
struct ToeplitzParts {
    ComplexMatrix re;
    ComplexMatrix im;
};

inline bool all_finite(const ComplexMatrix& a) {
    return a.allFinite();
}

inline void require_square(const ComplexMatrix& a, std::string_view what) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw DimensionError(std::string(what) + ": expected a non-empty square matrix, got " +
                             std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    }
}

inline void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, std::string_view what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
    }
}

inline void require_finite(const ComplexMatrix& a, std::string_view what) {
    if (!all_finite(a)) throw DomainError(std::string(what) + ": matrix has non-finite entries");
}

/// Full SVD. Deterministic for a fixed input.
inline Svd svd(const ComplexMatrix& a) {
    require_finite(a, "svd");
    Eigen::BDCSVD<ComplexMatrix> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return Svd{solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

inline RealVector singular_values(const ComplexMatrix& a) {
    require_finite(a, "singular_values");
    if (a.size() == 0) return RealVector{};
    return Eigen::BDCSVD<ComplexMatrix>(a).singularValues();
}

inline double spectral_norm(const ComplexMatrix& a) {
    const RealVector s = singular_values(a);
    return s.size() == 0 ? 0.0 : s(0);
}

inline double schatten_norm(const ComplexMatrix& a, NormP p) {
    require_square(a, "schatten_norm");
    switch (p) {
        case NormP::Two: return a.norm();  // sqrt(tr(A*A))
        case NormP::One: return singular_values(a).sum();
        case NormP::Inf: return spectral_norm(a);
    }
    return 0.0;
}

/// tr(A^* B)
inline Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_square(a, "hs_inner");
    require_same_shape(a, b, "hs_inner");
    return a.conjugate().cwiseProduct(b).sum();
}

inline double self_adjoint_defect(const ComplexMatrix& a) {
    return (a - a.adjoint()).norm();
}

inline bool is_self_adjoint(const ComplexMatrix& a, double rel_tol = kSelfAdjointTol) {
    return a.rows() == a.cols() && self_adjoint_defect(a) <= rel_tol * std::max(1.0, a.norm());
}

inline HermitianEigen hermitian_eig(const ComplexMatrix& a) {
    require_square(a, "hermitian_eig");
    require_finite(a, "hermitian_eig");
    const double defect = self_adjoint_defect(a);
    const double allowed = kSelfAdjointTol * std::max(1.0, a.norm());
    if (defect > allowed) {
        throw PreconditionError("hermitian_eig: ||A - A*||_2 = " + std::to_string(defect) +
                                " exceeds self-adjoint tolerance 1e-10 * max(1, ||A||_2) = " +
                                std::to_string(allowed));
    }
    const ComplexMatrix sym = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
    return HermitianEigen{solver.eigenvalues(), solver.eigenvectors()};
}

template <typename Vec>
double lp_norm(const Vec& z, NormP p) {
    switch (p) {
        case NormP::One: return z.cwiseAbs().sum();
        case NormP::Two: return z.norm();
        case NormP::Inf: return z.size() == 0 ? 0.0 : z.cwiseAbs().maxCoeff();
    }
    return 0.0;
}

/// Operator norm of `m` induced by the l_p vector norm. p=1 is the largest
/// column sum, p=inf the largest row sum.
inline double lp_induced_norm(const ComplexMatrix& m, NormP p) {
    switch (p) {
        case NormP::One: return m.cwiseAbs().colwise().sum().maxCoeff();
        case NormP::Inf: return m.cwiseAbs().rowwise().sum().maxCoeff();
        case NormP::Two: return spectral_norm(m);
    }
    return 0.0;
}

/// sqrt(||A||_1 ||A||_inf) / ||A||_2 over Schatten norms; >= 1.
inline double schatten_height(const ComplexMatrix& a) {
    require_square(a, "schatten_height");
    const RealVector s = singular_values(a);
    const double two = s.norm();
    if (two == 0.0) throw DomainError("schatten_height: zero matrix");
    return std::sqrt(s.sum() * s(0)) / two;
}

/// Height of a column vector: sqrt(|z|_1 |z|_inf) / |z|_2.
template <typename Vec>
double vector_height(const Vec& z) {
    const double two = z.norm();
    if (two == 0.0) throw DomainError("vector_height: zero vector");
    return std::sqrt(lp_norm(z, NormP::One) * lp_norm(z, NormP::Inf)) / two;
}

/// Height of a matrix through l_p induced norms.
inline double matrix_height(const ComplexMatrix& m) {
    const double two = lp_induced_norm(m, NormP::Two);
    if (two == 0.0) throw DomainError("matrix_height: zero matrix");
    return std::sqrt(lp_induced_norm(m, NormP::One) * lp_induced_norm(m, NormP::Inf)) / two;
}

/// max |z_i| / min nonzero |z_i|.
template <typename Vec>
double log_diameter_vector(const Vec& z) {
    const double top = lp_norm(z, NormP::Inf);
    if (!(top > 0.0)) throw DomainError("log_diameter_vector: zero vector");
    double bottom = top;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double m = std::abs(z(i));
        if (m > kRankCutoff * top) bottom = std::min(bottom, m);
    }
    return top / bottom;
}

/// sqrt(largest / smallest nonzero eigenvalue of A^*A).
inline double log_diameter_matrix(const ComplexMatrix& a) {
    require_square(a, "log_diameter_matrix");
    const RealVector s = singular_values(a);
    if (!(s(0) > 0.0)) throw DomainError("log_diameter_matrix: zero matrix");
    return log_diameter_vector(s);
}

inline ToeplitzParts toeplitz_split(const ComplexMatrix& x) {
    require_square(x, "toeplitz_split");
    const ComplexMatrix xs = x.adjoint();
    return ToeplitzParts{0.5 * (x + xs), (x - xs) / Complex(0.0, 2.0)};
}

/// <u, v> / (|u| |v|), conjugate-linear in u.
inline Complex cosine(const ComplexVector& u, const ComplexVector& v) {
    if (u.size() != v.size()) {
        throw DimensionError("cosine: length mismatch " + std::to_string(u.size()) + " vs " +
                             std::to_string(v.size()));
    }
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) throw DomainError("cosine: zero vector");
    return u.dot(v) / (nu * nv);
}

/// ||u u^* - I||_2 <= tol * sqrt(N)
inline bool is_unitary(const ComplexMatrix& u, double tol = 1e-10) {
    if (u.rows() != u.cols() || u.rows() == 0) return false;
    const auto n = u.rows();
    return (u * u.adjoint() - ComplexMatrix::Identity(n, n)).norm() <= tol * std::sqrt(static_cast<double>(n));
}

inline ComplexMatrix diag_matrix(const ComplexVector& z) {
    return z.asDiagonal();
}

}  // namespace qeml
