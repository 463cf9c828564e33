#pragma once

// Test-object constructors: Haar channels, Weyl twirls, cyclic Cayley lifts and
// classical d-regular graphs.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qeml/channel.hpp"
#include "qeml/errors.hpp"
#include "qeml/linalg.hpp"
#include "qeml/random.hpp"

namespace qeml {

/// Haar-distributed N x N unitary: QR of a complex Ginibre matrix with the
/// phases of R's diagonal moved into Q.
inline ComplexMatrix haar_unitary(int n, Seed seed) {
    if (n < 1) throw DomainError("haar_unitary: N must be >= 1");
    Rng rng(seed);
    ComplexMatrix z(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double re = rng.normal();
            const double im = rng.normal();
            z(i, j) = Complex(re, im) / std::numbers::sqrt2;
        }
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(z);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix& r = qr.matrixQR();
    for (int k = 0; k < n; ++k) {
        const Complex d = r(k, k);
        const double m = std::abs(d);
        q.col(k) *= m > 0.0 ? d / m : Complex(1.0, 0.0);
    }
    return q;
}

/// d independent Haar unitaries; unitary j is drawn from derive_seed(seed, j).
inline Channel random_channel(int n, int d, Seed seed) {
    if (n < 1 || d < 1) throw DomainError("random_channel: N and d must be >= 1");
    std::vector<ComplexMatrix> us;
    us.reserve(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) us.push_back(haar_unitary(n, derive_seed(seed, static_cast<std::uint64_t>(j))));
    return Channel(std::move(us));
}

/// Cyclic shift X e_k = e_{k+s mod N}.
inline ComplexMatrix shift_matrix(int n, int s) {
    ComplexMatrix p = ComplexMatrix::Zero(n, n);
    const int step = ((s % n) + n) % n;
    for (int x = 0; x < n; ++x) p((x + step) % n, x) = 1.0;
    return p;
}

/// All N^2 Weyl operators X^a Z^b. The resulting channel is the complete
/// depolarizer eta |-> tr(eta) I / N.
inline Channel weyl_channel(int n) {
    if (n < 2) throw DomainError("weyl_channel: N must be >= 2");
    ComplexVector phases(n);
    for (int k = 0; k < n; ++k) phases(k) = std::polar(1.0, 2.0 * std::numbers::pi * k / n);
    const ComplexMatrix z = phases.asDiagonal();
    std::vector<ComplexMatrix> us;
    us.reserve(static_cast<std::size_t>(n) * n);
    ComplexMatrix xa = ComplexMatrix::Identity(n, n);
    const ComplexMatrix x = shift_matrix(n, 1);
    for (int a = 0; a < n; ++a) {
        ComplexMatrix zb = ComplexMatrix::Identity(n, n);
        for (int b = 0; b < n; ++b) {
            us.push_back(xa * zb);
            zb = zb * z;
        }
        xa = xa * x;
    }
    return Channel(std::move(us));
}

namespace detail {

inline std::vector<int> normalize_generators(int n, std::span<const int> gens, const char* what) {
    if (n < 2) throw DomainError(std::string(what) + ": N must be >= 2");
    if (gens.empty()) throw PreconditionError(std::string(what) + ": generator list is empty");
    std::vector<int> out;
    out.reserve(gens.size());
    for (int g : gens) out.push_back(((g % n) + n) % n);
    std::vector<int> sorted = out;
    std::sort(sorted.begin(), sorted.end());
    for (int g : out) {
        if (g == 0) throw PreconditionError(std::string(what) + ": identity (0 mod N) among generators");
        const int inv = (n - g) % n;
        if (!std::binary_search(sorted.begin(), sorted.end(), inv)) {
            throw PreconditionError(std::string(what) + ": generator set not symmetric, " + std::to_string(g) +
                                    " present but " + std::to_string(inv) + " missing");
        }
    }
    return out;
}

}  // namespace detail

/// Regular representation lift of Cay(Z_N, gens): one shift per generator.
inline Channel cyclic_cayley_channel(int n, std::span<const int> gens) {
    const std::vector<int> residues = detail::normalize_generators(n, gens, "cyclic_cayley_channel");
    std::vector<ComplexMatrix> us;
    us.reserve(residues.size());
    for (int s : residues) us.push_back(shift_matrix(n, s));
    return Channel(std::move(us));
}

/// Simple d-regular graph stored as a 0/1 adjacency matrix.
class RegularGraph {
public:
    explicit RegularGraph(Eigen::MatrixXi adjacency) : adjacency_(std::move(adjacency)) {
        const auto n = adjacency_.rows();
        if (n != adjacency_.cols()) throw ValidationError("graph: adjacency matrix is not square");
        if (n < 1) throw ValidationError("graph: no vertices");
        for (Eigen::Index i = 0; i < n; ++i) {
            if (adjacency_(i, i) != 0) throw ValidationError("graph: row " + std::to_string(i) + " has a self-loop");
            for (Eigen::Index j = 0; j < n; ++j) {
                const int a = adjacency_(i, j);
                if (a != 0 && a != 1) {
                    throw ValidationError("graph: row " + std::to_string(i) + " has entry " + std::to_string(a) +
                                          " (multi-edge)");
                }
                if (a != adjacency_(j, i)) throw ValidationError("graph: row " + std::to_string(i) + " is not symmetric");
            }
        }
        degree_ = adjacency_.row(0).sum();
        for (Eigen::Index i = 0; i < n; ++i) {
            const int deg = adjacency_.row(i).sum();
            if (deg != degree_) {
                throw ValidationError("graph: row " + std::to_string(i) + " has degree " + std::to_string(deg) +
                                      ", expected " + std::to_string(degree_));
            }
        }
        if (degree_ < 1) throw ValidationError("graph: degree must be >= 1");
    }

    int n() const { return static_cast<int>(adjacency_.rows()); }
    int degree() const { return degree_; }
    const Eigen::MatrixXi& adjacency() const { return adjacency_; }

    /// (1/d) A
    Eigen::MatrixXd markov() const { return adjacency_.cast<double>() / static_cast<double>(degree_); }

    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (int i = 0; i < n(); ++i)
            for (int j = i + 1; j < n(); ++j)
                if (adjacency_(i, j)) out.emplace_back(i, j);
        return out;
    }

    bool is_connected() const { return two_color().first; }
    bool is_bipartite() const { return two_color().second; }

private:
    // BFS from vertex 0: (all reached, proper 2-colouring found).
    std::pair<bool, bool> two_color() const {
        std::vector<int> color(static_cast<std::size_t>(n()), -1);
        std::queue<int> frontier;
        color[0] = 0;
        frontier.push(0);
        bool bipartite = true;
        int reached = 1;
        while (!frontier.empty()) {
            const int v = frontier.front();
            frontier.pop();
            for (int w = 0; w < n(); ++w) {
                if (!adjacency_(v, w)) continue;
                if (color[w] < 0) {
                    color[w] = 1 - color[v];
                    ++reached;
                    frontier.push(w);
                } else if (color[w] == color[v]) {
                    bipartite = false;
                }
            }
        }
        return {reached == n(), bipartite};
    }

    Eigen::MatrixXi adjacency_;
    int degree_ = 0;
};

inline RegularGraph graph_from_edges(int n, std::span<const std::pair<int, int>> edges) {
    if (n < 3) throw DomainError("graph_from_edges: n must be >= 3");
    Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n, n);
    for (const auto& [x, y] : edges) {
        if (x < 0 || y < 0 || x >= n || y >= n) {
            throw ValidationError("graph_from_edges: edge (" + std::to_string(x) + ", " + std::to_string(y) +
                                  ") out of range for n = " + std::to_string(n));
        }
        if (x == y) throw ValidationError("graph_from_edges: row " + std::to_string(x) + " has a self-loop");
        if (a(x, y)) {
            throw ValidationError("graph_from_edges: row " + std::to_string(x) + " repeats edge to " + std::to_string(y));
        }
        a(x, y) = 1;
        a(y, x) = 1;
    }
    return RegularGraph(std::move(a));
}

inline RegularGraph complete_graph(int n) {
    if (n < 3) throw DomainError("complete_graph: n must be >= 3");
    Eigen::MatrixXi a = Eigen::MatrixXi::Ones(n, n);
    a.diagonal().setZero();
    return RegularGraph(std::move(a));
}

/// Cayley graph of Z_n with the given symmetric offsets.
inline RegularGraph circulant_graph(int n, std::span<const int> offsets) {
    const std::vector<int> residues = detail::normalize_generators(n, offsets, "circulant_graph");
    Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n, n);
    for (int x = 0; x < n; ++x)
        for (int s : residues) a((x + s) % n, x) += 1;
    return RegularGraph(std::move(a));
}

inline RegularGraph cycle_graph(int n) {
    if (n < 3) throw DomainError("cycle_graph: n must be >= 3");
    const int offsets[] = {1, n - 1};
    return circulant_graph(n, offsets);
}

/// Pairing-model d-regular graph with rejection of loops and multi-edges.
/// No claim of uniformity; connectivity is not enforced.
inline RegularGraph random_regular_graph(int n, int d, Seed seed, int max_attempts = 10000) {
    if (n < 3 || d < 1 || d >= n || (n * d) % 2 != 0) {
        throw DomainError("random_regular_graph: need n >= 3, 1 <= d < n and n*d even");
    }
    Rng rng(seed);
    std::vector<int> points(static_cast<std::size_t>(n) * d);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        for (std::size_t i = 0; i < points.size(); ++i) points[i] = static_cast<int>(i) / d;
        for (std::size_t i = points.size() - 1; i > 0; --i) std::swap(points[i], points[rng.below(i + 1)]);
        Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n, n);
        bool simple = true;
        for (std::size_t i = 0; i < points.size() && simple; i += 2) {
            const int x = points[i];
            const int y = points[i + 1];
            if (x == y || a(x, y)) simple = false;
            else a(x, y) = a(y, x) = 1;
        }
        if (simple) return RegularGraph(std::move(a));
    }
    throw ResourceError("random_regular_graph: no simple pairing found in " + std::to_string(max_attempts) + " attempts");
}

/// max |lambda| over the Markov spectrum with one copy of the eigenvalue 1
/// removed.
inline double graph_rho(const RegularGraph& g) {
    if (!g.is_connected()) throw PreconditionError("graph_rho: graph is disconnected");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g.markov(), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending; ev(n-1) == 1
    const auto n = ev.size();
    if (n < 2) return 0.0;
    return std::max(std::abs(ev(0)), std::abs(ev(n - 2)));
}

/// Ordered pairs (x, y) in S1 x S2 with xy an edge.
inline long edge_count(const RegularGraph& g, std::span<const int> s1, std::span<const int> s2) {
    auto checked = [&](std::span<const int> s) {
        std::vector<int> v(s.begin(), s.end());
        for (int x : v)
            if (x < 0 || x >= g.n())
                throw DomainError("edge_count: vertex " + std::to_string(x) + " out of range for n = " + std::to_string(g.n()));
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    const std::vector<int> a = checked(s1);
    const std::vector<int> b = checked(s2);
    long count = 0;
    for (int x : a)
        for (int y : b) count += g.adjacency()(x, y);
    return count;
}

}  // namespace qeml
