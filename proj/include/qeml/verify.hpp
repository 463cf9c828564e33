#pragma once

// Forward mixing-lemma checks (quantum and classical) and a seeded randomized
// suite over the norm inequalities the witness pipeline relies on.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qeml/channel.hpp"
#include "qeml/errors.hpp"
#include "qeml/generators.hpp"
#include "qeml/linalg.hpp"
#include "qeml/random.hpp"
#include "qeml/witness.hpp"

namespace qeml {

struct Discrepancy {
    double value = 0.0;  // |<P1, T(P2)> - tr(P1)tr(P2)/N|
    double ratio = 0.0;  // value / sqrt(tr(P1) tr(P2))
    double inner_imag = 0.0;
};

inline Discrepancy discrepancy(const Channel& t, const Projection& p1, const Projection& p2) {
    if (p1.dim() != t.dim() || p2.dim() != t.dim()) {
        throw DimensionError("discrepancy: projections must be " + std::to_string(t.dim()) + "x" +
                             std::to_string(t.dim()));
    }
    if (p1.rank() == 0 || p2.rank() == 0) throw DomainError("discrepancy: zero projection");
    const Complex inner = hs_inner(p1.matrix(), qeml::apply(t, p2.matrix()));
    const double tr = static_cast<double>(p1.rank()) * p2.rank();
    Discrepancy d;
    d.value = std::abs(inner.real() - tr / t.dim());
    d.ratio = d.value / std::sqrt(tr);
    d.inner_imag = std::abs(inner.imag());
    return d;
}

/// Projection onto a Haar-random subspace of the given rank.
inline Projection random_projection(int n, int rank, Seed seed) {
    if (rank < 0 || rank > n) throw DomainError("random_projection: rank must lie in [0, N]");
    const ComplexMatrix q = haar_unitary(n, seed).leftCols(rank);
    const ComplexMatrix p = q * q.adjoint();
    return Projection(0.5 * (p + p.adjoint()));
}

struct SuiteCheck {
    std::string name;
    int trials = 0;
    double worst_margin = std::numeric_limits<double>::infinity();  // min over trials of rhs - lhs
    bool pass = true;
    std::uint64_t seed = 0;
    double tolerance = 0.0;
    std::optional<std::uint64_t> worst_trial_seed;  // set on violation, for replay
    std::optional<Channel> worst_instance;
    std::string detail;
};

struct SuiteReport {
    std::vector<SuiteCheck> checks;

    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const SuiteCheck& c) { return c.pass; });
    }
    std::vector<std::string> failing() const {
        std::vector<std::string> out;
        for (const auto& c : checks)
            if (!c.pass) out.push_back(c.name);
        return out;
    }
    const SuiteCheck* find(std::string_view name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

namespace detail {

/// Accumulates margins for one named check.
class CheckTally {
public:
    CheckTally(std::string name, double tol, std::uint64_t seed) {
        check_.name = std::move(name);
        check_.tolerance = tol;
        check_.seed = seed;
    }

    void record(double margin, std::uint64_t trial_seed = 0, const Channel* instance = nullptr,
                std::string detail = {}) {
        ++check_.trials;
        if (std::isnan(margin)) margin = -std::numeric_limits<double>::infinity();
        if (margin < check_.worst_margin) {
            check_.worst_margin = margin;
            if (margin < -check_.tolerance) {
                check_.worst_trial_seed = trial_seed;
                if (instance != nullptr) check_.worst_instance = *instance;
                check_.detail = std::move(detail);
            }
        }
    }

    SuiteCheck finish() {
        if (check_.trials == 0) check_.worst_margin = 0.0;
        check_.pass = check_.worst_margin >= -check_.tolerance;
        return std::move(check_);
    }

private:
    SuiteCheck check_;
};

inline ComplexMatrix gaussian_matrix(Rng& rng, int rows, int cols) {
    ComplexMatrix a(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            const double re = rng.normal();
            const double im = rng.normal();
            a(i, j) = Complex(re, im);
        }
    }
    return a;
}

}  // namespace detail

/// ratio <= rho + 1e-9 for every pair. Failures are reported, not thrown.
inline SuiteReport check_eml(const Channel& t, std::span<const std::pair<Projection, Projection>> pairs) {
    if (pairs.empty()) throw PreconditionError("check_eml: empty pair list");
    const double rho = reduced_spectral_radius(t);
    detail::CheckTally tally("eml", 1e-9, 0);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const Discrepancy d = discrepancy(t, pairs[i].first, pairs[i].second);
        tally.record(rho - d.ratio, i, &t, "pair " + std::to_string(i));
    }
    return SuiteReport{{tally.finish()}};
}

using SubsetPair = std::pair<std::vector<int>, std::vector<int>>;

/// |e(S1,S2)/d - |S1||S2|/n| <= rho sqrt(|S1||S2|) + 1e-9 for every pair.
inline SuiteReport check_classical_eml(const RegularGraph& g, std::span<const SubsetPair> pairs) {
    if (!g.is_connected()) throw PreconditionError("check_classical_eml: graph is disconnected");
    const double rho = graph_rho(g);
    detail::CheckTally tally("classical_eml", 1e-9, 0);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [s1, s2] = pairs[i];
        const double sizes = static_cast<double>(s1.size()) * static_cast<double>(s2.size());
        const double lhs = std::abs(static_cast<double>(edge_count(g, s1, s2)) / g.degree() - sizes / g.n());
        tally.record(rho * std::sqrt(sizes) - lhs, i, nullptr, "pair " + std::to_string(i));
    }
    return SuiteReport{{tally.finish()}};
}

struct SuiteTolerances {
    double identity = 1e-9;   // exact-arithmetic identities
    double estimator = 1e-6;  // checks where a norm estimator participates
    double attainment = 1e-8;
};

/// Randomized inequality suite. Trial t draws its instance from
/// derive_seed(seed, t) with N = 2 + t % 5 and d = 2 + t % 4.
inline SuiteReport inequality_suite(Seed seed, int trials, SuiteTolerances tol = {}) {
    if (trials < 1) throw PreconditionError("inequality_suite: trials must be >= 1, got " + std::to_string(trials));
    using detail::CheckTally;
    const std::uint64_t s0 = seed.value;
    CheckTally holder("holder", tol.identity, s0);
    CheckTally unitary("unitary_invariance", tol.identity, s0);
    CheckTally contraction("diagonal_contraction", tol.identity, s0);
    CheckTally gillespie("gillespie", tol.identity, s0);
    CheckTally gillespie_est("gillespie_deflated", tol.estimator, s0);
    CheckTally adjoint_l2("adjoint_l2", tol.identity, s0);
    CheckTally adjoint_map("adjoint_map_norm", tol.identity, s0);
    CheckTally cptp("cptp_norm", tol.identity, s0);
    CheckTally height_adj("height_adjoint", tol.identity, s0);
    CheckTally conj_adj("conjugated_adjoint", tol.identity, s0);
    CheckTally conj_upper("conjugated_upper", tol.identity, s0);
    CheckTally conj_attain("conjugated_attainment", tol.attainment, s0);
    CheckTally duality("lp_duality", tol.identity, s0);
    CheckTally floors("height_floor", tol.identity, s0);
    CheckTally eml("eml", tol.identity, s0);
    CheckTally calibration("g_calibration", 0.0, s0);

    for (int t = 0; t < trials; ++t) {
        const std::uint64_t ts = derive_seed(seed, static_cast<std::uint64_t>(t)).value;
        const int n = 2 + t % 5;
        const int d = 2 + t % 4;
        Rng rng(derive_seed(Seed{ts}, 0));
        const Channel ch = random_channel(n, d, derive_seed(Seed{ts}, 1));
        const LinearMap tmap = channel_map(ch);
        const LinearMap delta = deflated_map(ch);
        const LinearMap delta_adj = delta.adjoint();

        ComplexMatrix a = detail::gaussian_matrix(rng, n, n);
        a /= a.norm();
        const double a1 = schatten_norm(a, NormP::One);
        const double a2 = schatten_norm(a, NormP::Two);
        const double ainf = schatten_norm(a, NormP::Inf);
        holder.record(a1 * ainf - a2 * a2, ts, &ch);

        const ComplexMatrix u = haar_unitary(n, derive_seed(Seed{ts}, 2));
        const ComplexMatrix v = haar_unitary(n, derive_seed(Seed{ts}, 3));
        const ComplexMatrix uav = u * a * v;
        double inv = 0.0;
        double contr = std::numeric_limits<double>::infinity();
        const ComplexVector diag = a.diagonal();
        for (const NormP p : {NormP::One, NormP::Two, NormP::Inf}) {
            inv = std::max(inv, std::abs(schatten_norm(uav, p) - schatten_norm(a, p)));
            contr = std::min(contr, schatten_norm(a, p) - lp_norm(diag, p));
        }
        unitary.record(-inv, ts, &ch);
        contraction.record(contr, ts, &ch);

        const double t2 = induced_norm(tmap, NormP::Two);
        gillespie.record(cptp_norm_exact(ch, NormP::One) * cptp_norm_exact(ch, NormP::Inf) - t2 * t2, ts, &ch);

        const double rho = induced_norm(delta, NormP::Two);
        const double d1 = induced_norm(delta, NormP::One, 8, derive_seed(Seed{ts}, 4));
        const double dinf = induced_norm(delta, NormP::Inf, 8, derive_seed(Seed{ts}, 4));
        gillespie_est.record(d1 * dinf - rho * rho, ts, &ch);

        const ComplexMatrix s = detail::gaussian_matrix(rng, n, n);
        adjoint_l2.record(-std::abs(spectral_norm(s) - spectral_norm(s.adjoint())), ts, &ch);
        adjoint_map.record(-std::abs(rho - induced_norm(delta_adj, NormP::Two)), ts, &ch);

        double cptp_margin = std::numeric_limits<double>::infinity();
        for (const NormP p : {NormP::One, NormP::Inf}) {
            const double est = induced_norm(tmap, p, 8, derive_seed(Seed{ts}, 5));
            cptp_margin = std::min({cptp_margin, 1.0 - est, est - (1.0 - 1e-6) - tol.identity});
        }
        cptp.record(cptp_margin, ts, &ch);

        const double h_fwd = std::sqrt(d1 * dinf) / rho;
        const double h_adj = std::sqrt(induced_norm(delta_adj, NormP::One, 8, derive_seed(Seed{ts}, 4)) *
                                       induced_norm(delta_adj, NormP::Inf, 8, derive_seed(Seed{ts}, 4))) /
                             induced_norm(delta_adj, NormP::Two);
        height_adj.record(-std::abs(h_fwd - h_adj), ts, &ch);

        const ComplexMatrix u1 = haar_unitary(n, derive_seed(Seed{ts}, 6));
        const ComplexMatrix u2 = haar_unitary(n, derive_seed(Seed{ts}, 7));
        const ComplexMatrix v1 = haar_unitary(n, derive_seed(Seed{ts}, 8));
        const ComplexMatrix v2 = haar_unitary(n, derive_seed(Seed{ts}, 9));
        const ComplexMatrix m = conjugated_vector_map(delta, u1, u2, v1, v2);
        const ComplexMatrix m_adj =
            conjugated_vector_map(delta_adj, u2.adjoint(), u1.adjoint(), v2.adjoint(), v1.adjoint());
        conj_adj.record(-(m.adjoint() - m_adj).norm(), ts, &ch);

        double upper = rho - spectral_norm(m);
        const ComplexMatrix mt = conjugated_vector_map(tmap, u1, u2, v1, v2);
        for (const NormP p : {NormP::One, NormP::Two, NormP::Inf})
            upper = std::min(upper, cptp_norm_exact(ch, p) - lp_induced_norm(mt, p));
        conj_upper.record(upper, ts, &ch);

        const ComplexMatrix x = top_singular_matrix(delta);
        const Svd sx = svd(x);
        const Svd sy = svd(delta.apply(x));
        const ComplexMatrix m_star =
            conjugated_vector_map(delta, sx.left, sy.left.adjoint(), sx.right.adjoint(), sy.right);
        conj_attain.record(-std::abs(spectral_norm(m_star) - rho), ts, &ch);

        duality.record(-std::abs(lp_induced_norm(m, NormP::One) - lp_induced_norm(m.adjoint(), NormP::Inf)), ts, &ch);

        const ComplexVector z = detail::gaussian_matrix(rng, n, 1).col(0);
        floors.record(std::min({matrix_height(m) - 1.0, schatten_height(a) - 1.0, vector_height(z) - 1.0}), ts, &ch);

        const Projection p1 = random_projection(n, 1 + static_cast<int>(rng.below(n)), derive_seed(Seed{ts}, 10));
        const Projection p2 = random_projection(n, 1 + static_cast<int>(rng.below(n)), derive_seed(Seed{ts}, 11));
        eml.record(rho - discrepancy(ch, p1, p2).ratio, ts, &ch);

        // g(K) <= C (ln K + 1) with C = g(1), at a log-uniform K in [1, 1e12].
        const double k = std::exp(rng.uniform() * std::log(1e12));
        const double c = bound_g(1.0);
        calibration.record((c - bound_g(k) / (std::log(k) + 1.0)) / c, ts);
    }
    // Asymptotic slope: g(K) / (ln K + 1) at K = 1e6 within 20% of 64 sqrt2.
    const double big = 1e6;
    const double slope = bound_g(big) / (std::log(big) + 1.0) / (64.0 * std::numbers::sqrt2);
    calibration.record(0.2 - std::abs(slope - 1.0), s0, nullptr, "slope quotient " + std::to_string(slope));

    SuiteReport report;
    for (CheckTally* c : {&holder, &unitary, &contraction, &gillespie, &gillespie_est, &adjoint_l2, &adjoint_map, &cptp,
                          &height_adj, &conj_adj, &conj_upper, &conj_attain, &duality, &floors, &eml, &calibration}) {
        report.checks.push_back(c->finish());
    }
    return report;
}

}  // namespace qeml
