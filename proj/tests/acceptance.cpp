// Acceptance runner. `acceptance N` evaluates criterion N and prints one
// PASS/FAIL line; with no argument every criterion runs in order. The exit
// status is nonzero when any evaluated criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qeml/qeml.hpp"

using namespace qeml;

namespace {

struct Outcome {
    bool pass = true;
    std::string summary;
};

std::string num(double v, int digits = 6) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

std::uint32_t mask_of(const std::vector<int>& s) {
    std::uint32_t m = 0;
    for (int v : s) m |= 1u << v;
    return m;
}

// Channels with d >= 3 and 0.05 < rho < 1 - 1e-9, drawn from a fixed seed
// stream (d = 2 always gives rho = 1).
std::vector<Channel> pipeline_channels(int count) {
    std::vector<Channel> out;
    for (std::uint64_t i = 0; static_cast<int>(out.size()) < count; ++i) {
        const Seed s = derive_seed(Seed{2024}, i);
        const int n = 2 + static_cast<int>(i % 7);
        const int d = 3 + static_cast<int>((i / 7) % 4);
        Channel t = random_channel(n, d, s);
        const double rho = reduced_spectral_radius(t);
        if (rho > 0.05 && rho < 1.0 - 1e-9) out.push_back(std::move(t));
    }
    return out;
}

// 1. ratio <= rho + 1e-9 on 200 Haar instances with random-rank pairs.
Outcome criterion1() {
    double worst = std::numeric_limits<double>::infinity();
    double oracle_gap = 0.0;
    int pairs = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        const Seed s = derive_seed(Seed{1}, i);
        Rng rng(derive_seed(s, 0));
        const int n = 2 + static_cast<int>(rng.below(11));
        const int d = 2 + static_cast<int>(rng.below(4));
        const Channel t = random_channel(n, d, derive_seed(s, 1));
        const double rho = reduced_spectral_radius(t);
        if (n <= 6) oracle_gap = std::max(oracle_gap, std::abs(rho - oracle::rho(t)));
        for (int k = 0; k < 5; ++k) {
            const Projection p1 = random_projection(n, 1 + static_cast<int>(rng.below(n)), derive_seed(s, 2 + 2 * k));
            const Projection p2 = random_projection(n, 1 + static_cast<int>(rng.below(n)), derive_seed(s, 3 + 2 * k));
            worst = std::min(worst, rho + 1e-9 - oracle::pair_ratio(t, p1.matrix(), p2.matrix()));
            ++pairs;
        }
    }
    return {worst >= 0.0 && oracle_gap <= 1e-10,
            std::to_string(pairs) + " pairs on 200 channels, min(rho + 1e-9 - ratio) = " + num(worst) +
                ", max |rho - oracle rho| (N <= 6) = " + num(oracle_gap)};
}

// 2. mixing_witnesses passes on 50 channels with rho in (0.05, 1).
Outcome criterion2() {
    int passed = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    std::string first_failure;
    for (const Channel& t : pipeline_channels(50)) {
        try {
            const WitnessReport r = mixing_witnesses(t);
            const double independent = oracle::pair_ratio(t, r.p1.matrix(), r.p2.matrix());
            const double guaranteed = oracle::rho(t) / bound_g(std::max(1.0, 1.0 / oracle::rho(t)));
            if (r.pass && independent > guaranteed) ++passed;
            min_margin = std::min(min_margin, independent / guaranteed);
        } catch (const Error& e) {
            if (first_failure.empty()) first_failure = e.what();
        }
    }
    std::string s = std::to_string(passed) + "/50 pass, min ratio/guaranteed = " + num(min_margin);
    if (!first_failure.empty()) s += ", first failure: " + first_failure;
    return {passed == 50, s};
}

// 3. Exact spectral fixtures.
Outcome criterion3() {
    Outcome o;
    double weyl = 0.0;
    for (int n = 2; n <= 6; ++n) weyl = std::max(weyl, reduced_spectral_radius(weyl_channel(n)));
    const double k4 = graph_rho(complete_graph(4));
    const double c5 = graph_rho(cycle_graph(5));
    const double cayley = reduced_spectral_radius(cyclic_cayley_channel(5, std::vector<int>{1, 4}));
    const bool ok_weyl = weyl <= 1e-10;
    const bool ok_k4 = std::abs(k4 - 1.0 / 3.0) <= 1e-10;
    const bool ok_c5 = std::abs(c5 - 0.809017) <= 1e-6;
    const bool ok_cayley = std::abs(cayley - c5) <= 1e-8;
    o.pass = ok_weyl && ok_k4 && ok_c5 && ok_cayley;
    o.summary = std::string("weyl max rho ") + num(weyl) + (ok_weyl ? " ok" : " BAD") + "; K4 " + num(k4, 12) +
                (ok_k4 ? " ok" : " BAD") + "; C5 " + num(c5, 12) + (ok_c5 ? " ok" : " BAD") + "; Cayley Z5 {1,4} rho " +
                num(cayley, 12) + (ok_cayley ? " ok" : " BAD (differs from C5)");
    return o;
}

// 4. Every intermediate inequality of the pipeline on the same 50 channels.
Outcome criterion4() {
    int violations = 0;
    double slack_diam = 1e300, slack_norm = 1e300, slack_cos = 1e300, slack_exp = 1e300, slack_partner = 1e300;
    std::string first_failure;
    for (const Channel& t : pipeline_channels(50)) {
        try {
            const WitnessReport r = mixing_witnesses(t);
            const StageChecks& st = r.stages;
            const double k = r.k;
            const double diam_limit = 32.0 * k * k + 1.0;
            const double cos_floor = 1.0 / (2.0 * std::sqrt(4.0 * std::log(2.0 * 24.0 * k * k) + 2.0));
            const double exp_floor = r.rho / (8.0 * std::sqrt(4.0 * std::log(48.0 * k * k) + 2.0));
            const double partner_floor = 1.0 / (2.0 * std::sqrt(4.0 * std::log(2.0 * k * bound_f(k)) + 2.0));
            slack_diam = std::min(slack_diam, diam_limit - st.matrix_log_diameter);
            slack_norm = std::min(slack_norm, st.matrix_norm_ratio - 0.25);
            slack_cos = std::min(slack_cos, st.projection_cosine - cos_floor);
            slack_exp = std::min(slack_exp, st.expander_ratio / exp_floor);
            slack_partner = std::min(slack_partner, st.partner_cosine - partner_floor);
            if (!(st.matrix_log_diameter < diam_limit) || !(st.matrix_norm_ratio > 0.25) ||
                !(st.projection_cosine >= cos_floor) || !(st.expander_ratio > exp_floor) ||
                !(st.partner_cosine >= partner_floor)) {
                ++violations;
            }
        } catch (const Error& e) {
            ++violations;
            if (first_failure.empty()) first_failure = e.what();
        }
    }
    std::string s = std::to_string(violations) + " violations; min slack: log-diam " + num(slack_diam) +
                    ", norm ratio - 1/4 " + num(slack_norm) + ", cosine " + num(slack_cos) + ", expander ratio/floor " +
                    num(slack_exp) + ", partner cosine " + num(slack_partner);
    if (!first_failure.empty()) s += ", first failure: " + first_failure;
    return {violations == 0, s};
}

// 5. Randomized inequality suite at seed 1, plus the asymptotic slope of g
// read literally as g(K) / ln K.
Outcome criterion5() {
    const SuiteReport r = inequality_suite(Seed{1}, 100);
    const double big = 1e6;
    const double literal = bound_g(big) / std::log(big) / (64.0 * std::numbers::sqrt2);
    const double shifted = bound_g(big) / (std::log(big) + 1.0) / (64.0 * std::numbers::sqrt2);
    const bool literal_ok = std::abs(literal - 1.0) <= 0.2;
    std::string s = std::to_string(r.checks.size()) + " suite checks, ";
    const auto failing = r.failing();
    if (failing.empty()) {
        s += "all pass";
    } else {
        s += "failing:";
        for (const auto& f : failing) s += " " + f;
    }
    s += "; g(1e6)/ln(1e6) = " + num(literal, 6) + " x 64 sqrt2" + (literal_ok ? " ok" : " BAD (outside 20%)") +
         " [g(1e6)/(ln(1e6)+1) = " + num(shifted, 6) + " x 64 sqrt2]";
    return {r.pass() && literal_ok, s};
}

// 6. Classical converse on small regular graphs.
Outcome criterion6() {
    std::vector<std::pair<std::string, RegularGraph>> graphs = {
        {"K4", complete_graph(4)}, {"C5", cycle_graph(5)}, {"C7", cycle_graph(7)}};
    const int sizes[] = {6, 8, 10, 12};
    std::uint64_t seed = 1;
    for (int i = 0; i < 10; ++i) {
        const int n = sizes[i % 4];
        for (;; ++seed) {
            RegularGraph g = random_regular_graph(n, 3, Seed{seed});
            if (g.is_connected() && !g.is_bipartite()) {
                graphs.emplace_back("R" + std::to_string(n) + "#" + std::to_string(seed), std::move(g));
                ++seed;
                break;
            }
        }
    }
    int passed = 0;
    double worst_threshold = 1e300, worst_factor = 1e300;
    std::string bad;
    for (const auto& [name, g] : graphs) {
        const ClassicalWitness w = classical_subset_witnesses(g);
        const Eigen::MatrixXi& adj = g.adjacency();
        const double rho = oracle::graph_rho(adj);
        const std::uint32_t m1 = mask_of(w.s1);
        const std::uint32_t m2 = mask_of(w.s2);
        const double sizes12 = static_cast<double>(w.s1.size() * w.s2.size());
        const double disc =
            std::abs(static_cast<double>(oracle::edges_between(adj, m1, m2)) / g.degree() - sizes12 / g.n());
        const double threshold = rho / (32.0 * std::numbers::sqrt2 * (std::log(2.0 / rho) + 4.0)) * std::sqrt(sizes12);
        bool ok = disc >= threshold;
        worst_threshold = std::min(worst_threshold, disc / threshold);
        if (g.n() <= 10) {
            const double best = oracle::best_subset_ratio(adj);
            const double ratio = disc / std::sqrt(sizes12);
            worst_factor = std::min(worst_factor, ratio / best);
            ok = ok && ratio >= best / 4.0;
        }
        if (ok) {
            ++passed;
        } else {
            bad += " " + name;
        }
    }
    std::string s = std::to_string(passed) + "/" + std::to_string(graphs.size()) + " graphs pass, min disc/threshold " +
                    num(worst_threshold) + ", min ratio/best (n <= 10) " + num(worst_factor);
    if (!bad.empty()) s += ", failing:" + bad;
    return {passed == static_cast<int>(graphs.size()), s};
}

// 7. SVD-built unitaries attain the 2->2 norm of the conjugated vector map.
Outcome criterion7() {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const Seed s = derive_seed(Seed{7}, i);
        Rng rng(derive_seed(s, 0));
        const int n = 2 + static_cast<int>(rng.below(5));
        LinearMap map = identity_map(n);
        if (i % 2 == 0) {
            map = deflated_map(random_channel(n, 2 + static_cast<int>(rng.below(4)), derive_seed(s, 1)));
        } else {
            ComplexMatrix g(n * n, n * n);
            for (int r = 0; r < n * n; ++r)
                for (int c = 0; c < n * n; ++c) g(r, c) = Complex(rng.normal(), rng.normal());
            map = superoperator_map(Superoperator{n, g / oracle::top_singular(g)});
        }
        const double norm = oracle::top_singular(map.matrix());
        const ComplexMatrix x = top_singular_matrix(map);
        const Svd sx = svd(x);
        const Svd sy = svd(map.apply(x));
        const ComplexMatrix m = conjugated_vector_map(map, sx.left, sy.left.adjoint(), sx.right.adjoint(), sy.right);
        worst = std::max(worst, std::abs(oracle::top_singular(m) - norm));
    }
    return {worst <= 1e-8, "100 maps, max |norm(M*) - norm(map)| = " + num(worst)};
}

// 8. Brute-force search over eigenbasis-aligned projections for N <= 4.
Outcome criterion8() {
    int upper_ok = 0;
    int lower_ok = 0;
    int total = 0;
    long pairs = 0;
    double worst_upper = 1e300, worst_lower = 1e300;
    for (std::uint64_t i = 0; i < 24; ++i) {
        const Seed s = derive_seed(Seed{8}, i);
        const int n = 2 + static_cast<int>(i % 3);
        const int d = 2 + static_cast<int>((i / 3) % 4);
        const Channel t = random_channel(n, d, s);
        const double rho = oracle::rho(t);
        const WitnessReport w = mixing_witnesses(t);
        std::vector<ComplexMatrix> bases = {oracle::eigenbasis(w.p1.matrix()), oracle::eigenbasis(w.p2.matrix()),
                                            ComplexMatrix::Identity(n, n), haar_unitary(n, derive_seed(s, 1)),
                                            haar_unitary(n, derive_seed(s, 2))};
        const oracle::SearchResult r = oracle::aligned_projection_search(t, bases);
        const double floor = rho / bound_g(std::max(1.0, 1.0 / rho));
        pairs += r.pairs;
        ++total;
        worst_upper = std::min(worst_upper, rho + 1e-9 - r.max_ratio);
        worst_lower = std::min(worst_lower, r.max_ratio / floor);
        if (r.max_ratio <= rho + 1e-9) ++upper_ok;
        if (r.max_ratio >= floor) ++lower_ok;
    }
    return {upper_ok == total && lower_ok == total,
            std::to_string(total) + " channels, " + std::to_string(pairs) + " pairs; upper " + std::to_string(upper_ok) +
                "/" + std::to_string(total) + " (min slack " + num(worst_upper) + "), lower " +
                std::to_string(lower_ok) + "/" + std::to_string(total) + " (min max/floor " + num(worst_lower) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                            criterion5, criterion6, criterion7, criterion8};
    std::vector<int> which;
    if (argc > 1) {
        const int k = std::atoi(argv[1]);
        if (k < 1 || k > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "usage: acceptance [1-%zu]\n", criteria.size());
            return 2;
        }
        which.push_back(k);
    } else {
        for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) which.push_back(k);
    }
    bool all = true;
    for (int k : which) {
        Outcome o;
        try {
            o = criteria[k - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::printf("criterion %d %s: %s\n", k, o.pass ? "PASS" : "FAIL", o.summary.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
