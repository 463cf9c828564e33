#pragma once

// Subcommands of the qeml command line tool. Kept in a header so the tests can
// drive them in-process.
//
// Exit status: 0 success, 1 contract violation, 2 validation / parse / I/O
// error, 3 degenerate instance (nothing to witness).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qeml/qeml.hpp"

namespace qeml::cli {

enum ExitCode : int { kOk = 0, kContract = 1, kInvalid = 2, kDegenerate = 3 };

struct RunConfig {
    std::string command;
    std::vector<int> dims;
    std::vector<int> degrees;
    std::string ensemble = "haar";
    std::vector<int> gens;
    std::uint64_t seed = 1;
    int trials = 0;  // 0: per-command default
    std::optional<double> tol;
    std::string in;
    std::string out;
    std::string format;  // empty: json, except csv for sweep
    int jobs = 1;
    bool emit_projections = false;
    bool timing = false;
};

namespace detail {

inline const std::vector<std::string> kEnsembles = {"haar", "weyl", "cayley", "file", "complete", "cycle", "regular"};

inline bool is_graph_ensemble(const std::string& e) {
    return e == "complete" || e == "cycle" || e == "regular";
}

inline int single(const std::vector<int>& v, const char* flag) {
    if (v.size() != 1) throw ValidationError(std::string(flag) + ": expected exactly one value");
    return v.front();
}

struct Instance {
    std::optional<Channel> channel;
    std::optional<RegularGraph> graph;
};

inline Instance load_instance(const RunConfig& cfg) {
    if (cfg.ensemble == "file" || !cfg.in.empty()) {
        if (cfg.in.empty()) throw ValidationError("--in: required with --ensemble file");
        const io::Json j = io::parse(io::read_file(cfg.in), cfg.in);
        try {
            if (io::is_graph_document(j)) return Instance{std::nullopt, io::graph_from_json(j)};
            return Instance{io::channel_from_json(j), std::nullopt};
        } catch (const ParseError& e) {
            throw ParseError(cfg.in + ":" + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(cfg.in + ": " + e.what());
        }
    }
    const std::string& e = cfg.ensemble;
    if (e == "weyl") return Instance{weyl_channel(single(cfg.dims, "--dim")), std::nullopt};
    if (e == "cayley") {
        if (cfg.gens.empty()) throw ValidationError("--gens: required with --ensemble cayley");
        return Instance{cyclic_cayley_channel(single(cfg.dims, "--dim"), cfg.gens), std::nullopt};
    }
    if (e == "haar") {
        return Instance{random_channel(single(cfg.dims, "--dim"), single(cfg.degrees, "--degree"), Seed{cfg.seed}),
                        std::nullopt};
    }
    if (e == "complete") return Instance{std::nullopt, complete_graph(single(cfg.dims, "--dim"))};
    if (e == "cycle") return Instance{std::nullopt, cycle_graph(single(cfg.dims, "--dim"))};
    if (e == "regular") {
        return Instance{std::nullopt,
                        random_regular_graph(single(cfg.dims, "--dim"), single(cfg.degrees, "--degree"), Seed{cfg.seed})};
    }
    throw ValidationError("--ensemble: unknown ensemble '" + e + "'");
}

inline std::string csv_cell(const io::Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + csv_cell(v[i]);
        return s;
    }
    if (v.is_null()) return "";
    return v.dump();
}

inline void flatten(const io::Json& obj, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object()) {
            flatten(*it, key, out);
        } else {
            out.emplace_back(key, csv_cell(*it));
        }
    }
}

/// Object -> header + one row; array of objects -> header + one row each.
inline std::string to_csv(const io::Json& j) {
    std::vector<io::Json> rows;
    if (j.is_array()) {
        rows.assign(j.begin(), j.end());
    } else {
        rows.push_back(j);
    }
    std::ostringstream os;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::vector<std::pair<std::string, std::string>> cells;
        flatten(rows[r], "", cells);
        if (r == 0) {
            for (std::size_t c = 0; c < cells.size(); ++c) os << (c ? "," : "") << cells[c].first;
            os << "\n";
        }
        for (std::size_t c = 0; c < cells.size(); ++c) os << (c ? "," : "") << cells[c].second;
        os << "\n";
    }
    return os.str();
}

inline void emit(const RunConfig& cfg, const io::Json& j, std::ostream& out) {
    const std::string text = cfg.format == "csv" ? to_csv(j) : io::dump(j);
    if (cfg.out.empty()) {
        out << text;
    } else {
        io::write_file(cfg.out, text);
    }
}

}  // namespace detail

inline int cmd_gen(const RunConfig& cfg, std::ostream& out) {
    if (cfg.ensemble == "file") throw ValidationError("--ensemble: 'file' cannot be generated");
    const detail::Instance inst = detail::load_instance(cfg);
    detail::emit(cfg, inst.channel ? io::to_json(*inst.channel) : io::to_json(*inst.graph), out);
    return kOk;
}

inline int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
    const detail::Instance inst = detail::load_instance(cfg);
    const double tol = cfg.tol.value_or(1e-9);
    io::Json j;
    if (inst.graph) {
        const RegularGraph& g = *inst.graph;
        j = io::Json{{"n", g.n()}, {"degree", g.degree()}, {"connected", g.is_connected()}, {"bipartite", g.is_bipartite()}};
        if (g.is_connected()) j["rho"] = graph_rho(g);
    } else {
        const Channel& t = *inst.channel;
        const double rho = reduced_spectral_radius(t);
        const int mult = unit_eigen_multiplicity(t);
        const LinearMap delta = deflated_map(t);
        const Seed seed{cfg.seed};
        const double d1 = induced_norm(delta, NormP::One, 8, seed);
        const double dinf = induced_norm(delta, NormP::Inf, 8, seed);
        io::Json norms{{"delta_2", rho}, {"delta_1_lower", d1}, {"delta_inf_lower", dinf}};
        if (rho > 0.0) norms["height_lower"] = std::sqrt(d1 * dinf) / rho;
        j = io::Json{{"dim", t.dim()},
                     {"degree", t.degree()},
                     {"rho", rho},
                     {"unit_multiplicity", mult},
                     {"is_expander_candidate", rho < 1.0 - tol && mult == 1},
                     {"norm_estimates", norms},
                     {"diagonal_rho", diagonal_reduced_spectral_radius(t)}};
    }
    detail::emit(cfg, j, out);
    return kOk;
}

inline int cmd_witness(const RunConfig& cfg, std::ostream& out) {
    const detail::Instance inst = detail::load_instance(cfg);
    if (inst.graph) {
        detail::emit(cfg, io::to_json(classical_subset_witnesses(*inst.graph)), out);
    } else {
        detail::emit(cfg, io::to_json(mixing_witnesses(*inst.channel), cfg.emit_projections), out);
    }
    return kOk;
}

struct SweepRow {
    int n = 0;
    int d = 0;
    std::uint64_t seed = 0;
    double rho = 0.0;
    std::optional<double> ratio{};
    std::optional<double> guaranteed{};
    std::optional<double> c_eff{};
    double runtime_ms = 0.0;
    std::string status{};
};

inline SweepRow sweep_cell(int n, int d, std::uint64_t seed) {
    SweepRow row{.n = n, .d = d, .seed = seed};
    const auto start = std::chrono::steady_clock::now();
    try {
        const Channel t = random_channel(n, d, Seed{seed});
        row.rho = reduced_spectral_radius(t);
        try {
            const WitnessReport r = mixing_witnesses(t);
            row.ratio = r.ratio;
            row.guaranteed = r.guaranteed;
            row.c_eff = r.c_eff;
            row.status = "ok";
        } catch (const DegenerateError&) {
            row.status = "degenerate";
        } catch (const ContractViolation&) {
            row.status = "contract_violation";
        }
    } catch (const Error&) {
        row.status = "error";
    }
    row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return row;
}

/// Fixed column order. runtime_ms is blank unless timing is requested, so
/// default output is byte-identical across runs.
inline constexpr const char* kSweepHeader = "N,d,seed,rho,ratio,guaranteed,C_eff,runtime_ms,status";

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    if (cfg.dims.empty()) throw ValidationError("--dim: sweep needs at least one dimension");
    if (cfg.degrees.empty()) throw ValidationError("--degree: sweep needs at least one degree");
    const int trials = cfg.trials == 0 ? 1 : cfg.trials;
    if (trials < 1) throw ValidationError("--trials: must be >= 1");
    if (cfg.jobs < 1) throw ValidationError("--jobs: must be >= 1");
    for (int n : cfg.dims)
        if (n < 1) throw ValidationError("--dim: dimensions must be >= 1");
    for (int d : cfg.degrees)
        if (d < 1) throw ValidationError("--degree: degrees must be >= 1");

    struct Cell {
        int n, d;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (int n : cfg.dims)
        for (int d : cfg.degrees)
            for (int t = 0; t < trials; ++t) cells.push_back({n, d, cfg.seed + static_cast<std::uint64_t>(t)});

    std::vector<SweepRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) rows[i] = sweep_cell(cells[i].n, cells[i].d, cells[i].seed);
    };
    const int jobs = std::min<int>(cfg.jobs, static_cast<int>(std::max<std::size_t>(cells.size(), 1)));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    auto num = [](std::optional<double> v) {
        if (!v) return std::string();
        std::ostringstream os;
        os << std::setprecision(17) << *v;
        return os.str();
    };
    if (cfg.format == "json") {  // sweep defaults to csv
        io::Json arr = io::Json::array();
        for (const auto& r : rows) {
            io::Json o{{"N", r.n}, {"d", r.d}, {"seed", r.seed}, {"rho", r.rho}, {"status", r.status}};
            o["ratio"] = r.ratio ? io::Json(*r.ratio) : io::Json();
            o["guaranteed"] = r.guaranteed ? io::Json(*r.guaranteed) : io::Json();
            o["C_eff"] = r.c_eff ? io::Json(*r.c_eff) : io::Json();
            o["runtime_ms"] = cfg.timing ? io::Json(r.runtime_ms) : io::Json();
            arr.push_back(std::move(o));
        }
        detail::emit(cfg, arr, out);
        return kOk;
    }
    std::ostringstream os;
    os << kSweepHeader << "\n";
    for (const auto& r : rows) {
        os << r.n << "," << r.d << "," << r.seed << "," << num(r.rho) << "," << num(r.ratio) << "," << num(r.guaranteed)
           << "," << num(r.c_eff) << "," << (cfg.timing ? num(r.runtime_ms) : std::string()) << "," << r.status << "\n";
    }
    if (cfg.out.empty()) {
        out << os.str();
    } else {
        io::write_file(cfg.out, os.str());
    }
    return kOk;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const int trials = cfg.trials == 0 ? 100 : cfg.trials;
    if (trials < 1) throw ValidationError("--trials: must be >= 1");
    SuiteTolerances tol;
    if (cfg.tol) tol.identity = *cfg.tol;
    SuiteReport report = inequality_suite(Seed{cfg.seed}, trials, tol);

    // An input channel additionally gets a forward-lemma check on random
    // projection pairs.
    if (!cfg.in.empty()) {
        const detail::Instance inst = detail::load_instance(cfg);
        if (!inst.channel) throw ValidationError("--in: verify expects a channel file");
        const Channel& t = *inst.channel;
        std::vector<std::pair<Projection, Projection>> pairs;
        Rng rng(derive_seed(Seed{cfg.seed}, 0xF11E));
        for (int i = 0; i < trials; ++i) {
            const int r1 = 1 + static_cast<int>(rng.below(t.dim()));
            const int r2 = 1 + static_cast<int>(rng.below(t.dim()));
            pairs.emplace_back(random_projection(t.dim(), r1, derive_seed(Seed{cfg.seed}, 2 * i)),
                               random_projection(t.dim(), r2, derive_seed(Seed{cfg.seed}, 2 * i + 1)));
        }
        SuiteCheck c = check_eml(t, pairs).checks.front();
        c.name = "eml_input";
        c.seed = cfg.seed;
        report.checks.push_back(std::move(c));
    }
    detail::emit(cfg, io::to_json(report), out);
    if (!report.pass()) {
        err << "failing checks:";
        for (const auto& name : report.failing()) err << " " << name;
        err << "\n";
        return kContract;
    }
    return kOk;
}

/// Parses `args` (without the program name) and runs the chosen subcommand.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"qeml: spectral expansion of mixed-unitary channels and witness projections"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.seed, "Base seed");
        sub->add_option("--dim", cfg.dims, "Matrix dimension N (a list for sweep)")->delimiter(',');
        sub->add_option("--degree", cfg.degrees, "Number of unitaries d (a list for sweep)")->delimiter(',');
        sub->add_option("--ensemble", cfg.ensemble, "Instance family")->check(CLI::IsMember(detail::kEnsembles));
        sub->add_option("--gens", cfg.gens, "Cayley generators, comma separated")->delimiter(',');
        sub->add_option("--in", cfg.in, "Input channel or graph file");
        sub->add_option("--out", cfg.out, "Output file (default stdout)");
        sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--trials", cfg.trials, "Trials (verify) or seeds per cell (sweep)");
        sub->add_option("--tol", cfg.tol, "Tolerance override");
        sub->add_option("--jobs", cfg.jobs, "Worker threads for sweep");
        sub->add_flag("--emit-projections", cfg.emit_projections, "Embed P1, P2 in the witness report");
        sub->add_flag("--timing", cfg.timing, "Fill the runtime_ms column of sweep output");
    };
    for (const char* name : {"gen", "analyze", "witness", "sweep", "verify"}) {
        static const std::map<std::string, std::string> help = {
            {"gen", "Write a channel or graph file"},
            {"analyze", "Spectral summary of an instance"},
            {"witness", "Extract witness projections (or subsets for a graph)"},
            {"sweep", "Run the witness pipeline over an ensemble grid (CSV)"},
            {"verify", "Run the randomized inequality suite"}};
        CLI::App* sub = app.add_subcommand(name, help.at(name));
        common(sub);
        sub->callback([&cfg, sub] { cfg.command = sub->get_name(); });
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o;
        std::ostringstream e2;
        const int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (cfg.command == "gen") return cmd_gen(cfg, out);
        if (cfg.command == "analyze") return cmd_analyze(cfg, out);
        if (cfg.command == "witness") return cmd_witness(cfg, out);
        if (cfg.command == "sweep") return cmd_sweep(cfg, out);
        if (cfg.command == "verify") return cmd_verify(cfg, out, err);
    } catch (const DegenerateError& e) {
        err << "degenerate: " << e.what() << "\n";
        return kDegenerate;
    } catch (const ContractViolation& e) {
        err << "contract violation: " << e.what() << "\n";
        return kContract;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kInvalid;
    }
    return kInvalid;
}

}  // namespace qeml::cli
