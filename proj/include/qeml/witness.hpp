#pragma once

// Witness extraction. From a channel with reduced spectral radius rho > 0,
// extract orthogonal projections P1, P2 whose trace correlation under the
// channel deviates from tr(P1)tr(P2)/N by more than
// rho / g(1/rho) * sqrt(tr(P1)tr(P2)). Every inequality along the
// chain is re-checked numerically and a failure raises ContractViolation.

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qeml/channel.hpp"
#include "qeml/errors.hpp"
#include "qeml/generators.hpp"
#include "qeml/linalg.hpp"

namespace qeml {

/// Self-adjoint idempotent with its rank.
class Projection {
public:
    explicit Projection(ComplexMatrix m) : matrix_(std::move(m)) {
        require_square(matrix_, "Projection");
        if (!is_self_adjoint(matrix_)) {
            throw ValidationError("Projection: matrix is not self-adjoint (defect " +
                                  std::to_string(self_adjoint_defect(matrix_)) + ")");
        }
        const double idem = (matrix_ * matrix_ - matrix_).norm();
        if (idem > 1e-9) throw ValidationError("Projection: ||P^2 - P||_2 = " + std::to_string(idem) + " > 1e-9");
        const double tr = matrix_.trace().real();
        rank_ = static_cast<int>(std::lround(tr));
        if (std::abs(tr - rank_) > 1e-8) throw ValidationError("Projection: trace " + std::to_string(tr) + " is not integral");
    }

    /// basis * diag(mask) * basis^* for a unitary basis and a 0/1 mask.
    static Projection from_basis(const ComplexMatrix& basis, const RealVector& mask) {
        const ComplexMatrix p = basis * mask.cast<Complex>().asDiagonal() * basis.adjoint();
        return Projection(0.5 * (p + p.adjoint()));
    }

    const ComplexMatrix& matrix() const { return matrix_; }
    int rank() const { return rank_; }
    int dim() const { return static_cast<int>(matrix_.rows()); }

private:
    ComplexMatrix matrix_;
    int rank_ = 0;
};

/// f(K) = 8 sqrt(4 ln(48 K^2) + 2)
inline double bound_f(double k) {
    if (!(k >= 1.0)) throw DomainError("bound_f: K must be >= 1, got " + std::to_string(k));
    return 8.0 * std::sqrt(4.0 * std::log(48.0 * k * k) + 2.0);
}

/// g(K) = 2 f(K) sqrt(4 ln(2 K f(K)) + 2); grows like 64 sqrt(2) ln K.
inline double bound_g(double k) {
    const double f = bound_f(k);
    return 2.0 * f * std::sqrt(4.0 * std::log(2.0 * k * f) + 2.0);
}

struct VectorWitness {
    ComplexVector z;
    double achieved_ratio = 0.0;  // |Mz| / (|M| |z|)
    double log_diam = 0.0;
};

/// lev_vector found no admissible candidate; `best` is the closest one.
class LevFailure : public ContractViolation {
public:
    LevFailure(const std::string& what, VectorWitness best) : ContractViolation(what), best_(std::move(best)) {}
    const VectorWitness& best() const { return best_; }

private:
    VectorWitness best_;
};

struct BinaryWitness {
    RealVector xi;  // entries in {0, 1}, not all zero
    double abs_cosine = 0.0;
};

struct MatrixWitness {
    ComplexMatrix matrix;     // U1 diag(z) V1
    double norm_ratio = 0.0;  // |map(A)|_2 / (|map|_{2->2} |A|_2)
    double log_diameter = 0.0;
    double log_diameter_limit = 0.0;
};

/// Numbers behind each inequality of the chain, for reporting.
struct StageChecks {
    double matrix_norm_ratio = 0.0;  // > 1/4
    double matrix_log_diameter = 0.0;
    double matrix_log_diameter_limit = 0.0;  // 32 K^2 + 1
    double projection_cosine = 0.0;          // |<X,P>| / (|X| |P|)
    double projection_cosine_floor = 0.0;    // 1 / (2 sqrt(4 ln(48 K^2) + 2))
    double expander_ratio = 0.0;             // |map(P)| / |P|
    double expander_floor = 0.0;             // |map| / f(K)
    double partner_cosine = 0.0;             // |<map(P), Q>| / (|map(P)| |Q|)
    double partner_cosine_floor = 0.0;       // 1 / (2 sqrt(4 ln(2 K f(K)) + 2))
};

struct WitnessReport {
    int dim = 0;
    int degree = 0;
    Projection p1;
    Projection p2;
    double rho = 0.0;
    double k = 0.0;
    double inner = 0.0;       // Re <P1, T(P2)>
    double inner_imag = 0.0;  // |Im <P1, T(P2)>|
    double baseline = 0.0;    // tr(P1) tr(P2) / N
    double discrepancy = 0.0;
    double ratio = 0.0;
    double guaranteed = 0.0;  // rho / g(K)
    bool pass = false;
    double c_eff = 0.0;  // rho / (ratio (1 - ln rho))
    StageChecks stages{};
};

struct ClassicalWitness {
    int n = 0;
    int degree = 0;
    std::vector<int> s1;
    std::vector<int> s2;
    long edges = 0;
    double rho = 0.0;
    double discrepancy = 0.0;  // |e(S1,S2)/d - |S1||S2|/n|
    double ratio = 0.0;        // discrepancy / sqrt(|S1||S2|)
    double threshold = 0.0;    // rho / (32 sqrt2 (ln(2/rho) + 4)) sqrt(|S1||S2|)
    bool pass = false;
    double printed_threshold = 0.0;  // d * threshold
    bool printed_holds = false;
};

namespace detail {

struct TopSingular {
    double sigma = 0.0;
    ComplexMatrix x;  // unit Hilbert-Schmidt norm
};

inline TopSingular top_singular(const LinearMap& map) {
    const Svd s = svd(map.matrix());
    if (!(s.singulars(0) > 1e-14)) throw DegenerateError("top_singular_matrix: map is zero");
    ComplexMatrix x = unvec(s.right.col(0), map.dim());
    x /= x.norm();
    return TopSingular{s.singulars(0), std::move(x)};
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

/// Unit matrix X attaining |map(X)|_2 = |map|_{2->2}.
inline ComplexMatrix top_singular_matrix(const LinearMap& map) {
    return detail::top_singular(map).x;
}

/// Vector z with |Mz| > |M||z|/2 and bounded logarithmic diameter
/// l(z) < 8 height_bound^2 + 1, where height_bound >= h(M).
///
/// Starts from the top right-singular vector z0. For 64 window floors,
/// widest first, the moduli below the floor are raised to it (phases kept);
/// if that breaks the ratio they are zeroed instead. If no floor works,
/// vectors supported on runs of consecutive dyadic modulus levels are tried.
inline VectorWitness lev_vector(const ComplexMatrix& m, double height_bound) {
    require_square(m, "lev_vector");
    if (!(height_bound >= 1.0)) throw DomainError("lev_vector: height bound must be >= 1");
    const Svd s = svd(m);
    const double norm = s.singulars(0);
    if (!(norm > 0.0)) throw DomainError("lev_vector: zero matrix");
    const double height = matrix_height(m);
    if (height > height_bound * (1.0 + 1e-9)) {
        throw PreconditionError("lev_vector: matrix height " + detail::fmt(height) + " exceeds the supplied bound " +
                                detail::fmt(height_bound));
    }
    const double limit = 8.0 * height_bound * height_bound + 1.0;

    auto evaluate = [&](ComplexVector z) {
        VectorWitness w;
        w.achieved_ratio = (m * z).norm() / (norm * z.norm());
        w.log_diam = log_diameter_vector(z);
        w.z = std::move(z);
        return w;
    };
    auto admissible = [&](const VectorWitness& w) { return w.achieved_ratio > 0.5 && w.log_diam < limit; };

    const ComplexVector z0 = s.right.col(0);
    VectorWitness best = evaluate(z0);
    if (admissible(best)) return best;
    auto consider = [&](VectorWitness w) {
        const bool better = admissible(w) ? !admissible(best) || w.achieved_ratio > best.achieved_ratio
                                          : !admissible(best) && w.achieved_ratio > best.achieved_ratio;
        if (better) best = std::move(w);
    };

    const double top = lp_norm(z0, NormP::Inf);
    const double widest = limit - 0.01;
    constexpr int kFloors = 64;
    for (int k = 0; k < kFloors; ++k) {
        const double window = std::pow(widest, static_cast<double>(kFloors - k) / kFloors);
        const double floor = top / window;
        ComplexVector clamped = z0;
        ComplexVector zeroed = z0;
        for (Eigen::Index i = 0; i < z0.size(); ++i) {
            const double mod = std::abs(z0(i));
            if (mod < floor) {
                zeroed(i) = 0.0;
                if (mod > 0.0) clamped(i) = z0(i) * (floor / mod);
            }
        }
        VectorWitness c = evaluate(std::move(clamped));
        if (admissible(c)) return c;
        consider(std::move(c));
        VectorWitness zr = evaluate(std::move(zeroed));
        if (admissible(zr)) return zr;
        consider(std::move(zr));
    }

    // Dyadic fallback: keep only entries whose level floor(log2(top/|z_i|))
    // lies in [lo, hi].
    std::vector<int> level(static_cast<std::size_t>(z0.size()), -1);
    int max_level = 0;
    for (Eigen::Index i = 0; i < z0.size(); ++i) {
        const double mod = std::abs(z0(i));
        if (mod > kRankCutoff * top) {
            level[i] = static_cast<int>(std::floor(std::log2(top / mod)));
            max_level = std::max(max_level, level[i]);
        }
    }
    for (int lo = 0; lo <= max_level; ++lo) {
        for (int hi = lo; hi <= max_level; ++hi) {
            ComplexVector z = ComplexVector::Zero(z0.size());
            for (Eigen::Index i = 0; i < z0.size(); ++i)
                if (level[i] >= lo && level[i] <= hi) z(i) = z0(i);
            if (z.norm() == 0.0) continue;
            consider(evaluate(std::move(z)));
        }
    }
    if (admissible(best)) return best;
    throw LevFailure("lev_vector: no candidate with ratio > 1/2 and log-diameter < " + detail::fmt(limit) +
                         " (best ratio " + detail::fmt(best.achieved_ratio) + ", log-diameter " +
                         detail::fmt(best.log_diam) + ")",
                     best);
}

/// Binary vector maximizing |cos(lambda, xi)|. The maximizer is always a
/// prefix of one sign class sorted by decreasing modulus; for N <= 20 an
/// exhaustive search confirms it. Ties keep the earliest candidate (positive
/// class first, shorter prefixes first).
inline BinaryWitness binary_correlate(const RealVector& lambda, double k) {
    if (!(k >= 1.0)) throw DomainError("binary_correlate: K must be >= 1");
    const double norm = lambda.norm();
    if (!(norm > 0.0)) throw DomainError("binary_correlate: zero vector");
    const double height = vector_height(lambda);
    if (height > k * (1.0 + 1e-9)) {
        throw PreconditionError("binary_correlate: vector height " + detail::fmt(height) + " exceeds K = " + detail::fmt(k));
    }
    const auto n = static_cast<int>(lambda.size());

    BinaryWitness best;
    best.xi = RealVector::Zero(n);
    std::vector<int> best_set;
    for (const double sign : {1.0, -1.0}) {
        std::vector<int> idx;
        for (int i = 0; i < n; ++i)
            if (sign * lambda(i) > 0.0) idx.push_back(i);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](int a, int b) { return std::abs(lambda(a)) > std::abs(lambda(b)); });
        double sum = 0.0;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            sum += lambda(idx[j]);
            const double c = std::abs(sum) / (norm * std::sqrt(static_cast<double>(j + 1)));
            if (c > best.abs_cosine) {
                best.abs_cosine = c;
                best_set.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(j + 1));
            }
        }
    }

    if (n <= 20) {
        const std::uint32_t count = 1u << n;
        std::vector<double> sums(count, 0.0);
        std::uint32_t arg = 0;
        double exhaustive = best.abs_cosine;
        for (std::uint32_t mask = 1; mask < count; ++mask) {
            sums[mask] = sums[mask & (mask - 1)] + lambda(std::countr_zero(mask));
            const double c = std::abs(sums[mask]) / (norm * std::sqrt(static_cast<double>(std::popcount(mask))));
            if (c > exhaustive * (1.0 + 1e-12)) {
                exhaustive = c;
                arg = mask;
            }
        }
        if (arg != 0) {
            best.abs_cosine = exhaustive;
            best_set.clear();
            for (int i = 0; i < n; ++i)
                if (arg >> i & 1u) best_set.push_back(i);
        }
    }
    for (int i : best_set) best.xi(i) = 1.0;

    const double floor = 1.0 / (2.0 * std::sqrt(std::log(2.0 * k * k) + 1.0));
    if (best.abs_cosine < floor) {
        throw ContractViolation("binary_correlate: best |cos| " + detail::fmt(best.abs_cosine) + " below guarantee " +
                                detail::fmt(floor));
    }
    return best;
}

/// Projection P with |<X,P>| >= |X|_2 |P|_2 / (2 sqrt(4 ln(2K) + 2)), given
/// Schatten height h(X) <= K.
inline Projection projection_from_matrix(const ComplexMatrix& x, double k) {
    require_square(x, "projection_from_matrix");
    if (!(k >= 1.0)) throw DomainError("projection_from_matrix: K must be >= 1");
    if (!(x.norm() > 0.0)) throw DomainError("projection_from_matrix: zero matrix");
    const double height = schatten_height(x);
    if (height > k * (1.0 + 1e-9)) {
        throw PreconditionError("projection_from_matrix: Schatten height " + detail::fmt(height) + " exceeds K = " +
                                detail::fmt(k));
    }
    ToeplitzParts parts = toeplitz_split(x);
    if (parts.re.norm() < parts.im.norm()) parts = toeplitz_split(kI * x);
    const HermitianEigen eig = hermitian_eig(parts.re);
    const BinaryWitness bw = binary_correlate(eig.eigenvalues, std::sqrt(2.0) * k);
    Projection p = Projection::from_basis(eig.eigenvectors, bw.xi);

    const double achieved = std::abs(hs_inner(x, p.matrix()));
    const double floor = x.norm() * p.matrix().norm() / (2.0 * std::sqrt(4.0 * std::log(2.0 * k) + 2.0));
    if (!(achieved >= floor)) {
        throw ContractViolation("projection_from_matrix: |<X,P>| = " + detail::fmt(achieved) + " below " + detail::fmt(floor));
    }
    return p;
}

/// A = U1 diag(z) V1 with |map(A)|_2 > |map|_{2->2} |A|_2 / 4 and
/// l(A) < 32 K^2 + 1, for K >= h(map).
///
/// (U1, V1) come from the SVD of the exact top singular matrix X and
/// (U2, V2) from the SVD of map(X), so the conjugated vector map already
/// attains |map|_{2->2}; z is then the Lev vector of that map with height
/// bound 2K.
inline MatrixWitness matrix_witness(const LinearMap& map, double k) {
    if (!(k >= 1.0)) throw DomainError("matrix_witness: K must be >= 1");
    const detail::TopSingular top = detail::top_singular(map);
    const Svd sx = svd(top.x);
    const ComplexMatrix u1 = sx.left;
    const ComplexMatrix v1 = sx.right.adjoint();
    const Svd sy = svd(map.apply(top.x));
    const ComplexMatrix u2 = sy.left.adjoint();
    const ComplexMatrix v2 = sy.right;
    const ComplexMatrix m = conjugated_vector_map(map, u1, u2, v1, v2);
    const VectorWitness lev = lev_vector(m, 2.0 * k);

    MatrixWitness w;
    w.matrix = u1 * lev.z.asDiagonal() * v1;
    w.norm_ratio = map.apply(w.matrix).norm() / (top.sigma * w.matrix.norm());
    w.log_diameter = log_diameter_matrix(w.matrix);
    w.log_diameter_limit = 32.0 * k * k + 1.0;
    if (!(w.norm_ratio > 0.25)) {
        throw ContractViolation("matrix_witness: |map(A)| / (|map| |A|) = " + detail::fmt(w.norm_ratio) + " is not > 1/4");
    }
    if (!(w.log_diameter < w.log_diameter_limit)) {
        throw ContractViolation("matrix_witness: l(A) = " + detail::fmt(w.log_diameter) + " is not < " +
                                detail::fmt(w.log_diameter_limit));
    }
    return w;
}

namespace detail {

inline Projection expander_projection_traced(const LinearMap& map, double k, StageChecks& st) {
    const LinearMap adj = map.adjoint();
    const MatrixWitness mw = matrix_witness(adj, k);
    st.matrix_norm_ratio = mw.norm_ratio;
    st.matrix_log_diameter = mw.log_diameter;
    st.matrix_log_diameter_limit = mw.log_diameter_limit;

    const ComplexMatrix y = adj.apply(mw.matrix);
    const double k_proj = 24.0 * k * k;
    Projection p = projection_from_matrix(y, k_proj);
    st.projection_cosine = std::abs(hs_inner(y, p.matrix())) / (y.norm() * p.matrix().norm());
    st.projection_cosine_floor = 1.0 / (2.0 * std::sqrt(4.0 * std::log(2.0 * k_proj) + 2.0));

    const double norm = spectral_norm(map.matrix());
    st.expander_ratio = map.apply(p.matrix()).norm() / p.matrix().norm();
    st.expander_floor = norm / bound_f(k);
    if (!(st.expander_ratio > st.expander_floor)) {
        throw ContractViolation("expander_projection: |map(P)|/|P| = " + fmt(st.expander_ratio) + " is not > " +
                                fmt(st.expander_floor));
    }
    return p;
}

}  // namespace detail

/// Projection P with |map(P)|_2 / |P|_2 > |map|_{2->2} / f(K), for K >= h(map).
inline Projection expander_projection(const LinearMap& map, double k) {
    if (!(k >= 1.0)) throw DomainError("expander_projection: K must be >= 1");
    StageChecks ignored;
    return detail::expander_projection_traced(map, k, ignored);
}

/// Witness pair for a channel with rho > 1e-10, using K = 1/rho.
inline WitnessReport mixing_witnesses(const Channel& t) {
    const double rho = reduced_spectral_radius(t);
    if (rho <= 1e-10) {
        throw DegenerateError("mixing_witnesses: reduced spectral radius " + detail::fmt(rho) +
                              " (perfect mixer, every discrepancy vanishes)");
    }
    const double k = std::max(1.0, 1.0 / rho);
    const LinearMap delta = deflated_map(t);

    StageChecks st;
    Projection p = detail::expander_projection_traced(delta, k, st);
    const ComplexMatrix dp = delta.apply(p.matrix());
    const double k_partner = k * bound_f(k);
    Projection q = projection_from_matrix(dp, k_partner);
    st.partner_cosine = std::abs(hs_inner(dp, q.matrix())) / (dp.norm() * q.matrix().norm());
    st.partner_cosine_floor = 1.0 / (2.0 * std::sqrt(4.0 * std::log(2.0 * k_partner) + 2.0));

    // <Q, T(P)> - tr(Q)tr(P)/N = <Q, Delta(P)> is the quantity bounded below.
    WitnessReport r{.dim = t.dim(), .degree = t.degree(), .p1 = std::move(q), .p2 = std::move(p)};
    r.rho = rho;
    r.k = k;
    const Complex inner = hs_inner(r.p1.matrix(), qeml::apply(t, r.p2.matrix()));
    r.inner = inner.real();
    r.inner_imag = std::abs(inner.imag());
    r.baseline = static_cast<double>(r.p1.rank()) * r.p2.rank() / t.dim();
    r.discrepancy = std::abs(r.inner - r.baseline);
    r.ratio = r.discrepancy / std::sqrt(static_cast<double>(r.p1.rank()) * r.p2.rank());
    r.guaranteed = rho / bound_g(k);
    r.pass = r.ratio > r.guaranteed;
    r.c_eff = rho / (r.ratio * (1.0 - std::log(rho)));
    r.stages = st;
    if (!r.pass) {
        throw ContractViolation("mixing_witnesses: ratio " + detail::fmt(r.ratio) + " is not > rho/g(1/rho) = " +
                                detail::fmt(r.guaranteed));
    }
    return r;
}

/// Classical counterpart on a connected non-bipartite regular graph: the top
/// eigenvector of T - J/n is correlated with an indicator 1_{S2}, then
/// (T - J/n) 1_{S2} with an indicator 1_{S1}.
inline ClassicalWitness classical_subset_witnesses(const RegularGraph& g) {
    if (!g.is_connected()) throw PreconditionError("classical_subset_witnesses: graph is disconnected");
    if (g.is_bipartite()) throw PreconditionError("classical_subset_witnesses: graph is bipartite (rho = 1)");
    const double rho = graph_rho(g);
    if (rho <= 1e-10) throw DegenerateError("classical_subset_witnesses: rho = " + detail::fmt(rho));
    const int n = g.n();
    const Eigen::MatrixXd deflated = g.markov() - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(deflated);
    Eigen::Index top = 0;
    solver.eigenvalues().cwiseAbs().maxCoeff(&top);
    const Eigen::VectorXd v = solver.eigenvectors().col(top);

    auto support = [](const RealVector& xi) {
        std::vector<int> s;
        for (Eigen::Index i = 0; i < xi.size(); ++i)
            if (xi(i) > 0.5) s.push_back(static_cast<int>(i));
        return s;
    };
    const RealVector w = deflated * v;
    const BinaryWitness b2 = binary_correlate(w, vector_height(w));
    const RealVector y = deflated * b2.xi;
    const BinaryWitness b1 = binary_correlate(y, vector_height(y));

    ClassicalWitness r;
    r.n = n;
    r.degree = g.degree();
    r.s1 = support(b1.xi);
    r.s2 = support(b2.xi);
    r.edges = edge_count(g, r.s1, r.s2);
    r.rho = rho;
    const double sizes = static_cast<double>(r.s1.size()) * static_cast<double>(r.s2.size());
    r.discrepancy = std::abs(static_cast<double>(r.edges) / g.degree() - sizes / n);
    r.ratio = r.discrepancy / std::sqrt(sizes);
    r.threshold = rho / (32.0 * std::sqrt(2.0) * (std::log(2.0 / rho) + 4.0)) * std::sqrt(sizes);
    r.pass = r.discrepancy >= r.threshold;
    r.printed_threshold = g.degree() * r.threshold;
    r.printed_holds = r.discrepancy >= r.printed_threshold;
    if (!r.pass) {
        throw ContractViolation("classical_subset_witnesses: discrepancy " + detail::fmt(r.discrepancy) + " below " +
                                detail::fmt(r.threshold));
    }
    return r;
}

}  // namespace qeml
