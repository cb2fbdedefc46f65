// hostcap — hosting-capacity analysis for radial distribution feeders.
//
// Subcommands:
//   solve     one power-flow snapshot, CSV of voltages and line loadings
//   generate  build a scenario pool from a generation config
//   eval      label a whole pool through the feasibility oracle
//   learn     one active-learning episode on a pool
//   report    run a configured experiment and write its artifacts
//   compare   like report, but requires >= 2 strategies and ground truth
//
// Exit codes: 0 success, 2 bad input/config, 3 power flow diverged,
// 4 no feasible scenario found, 1 anything else.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hostcap/active_learning.hpp"
#include "hostcap/classifier.hpp"
#include "hostcap/distflow.hpp"
#include "hostcap/errors.hpp"
#include "hostcap/experiment.hpp"
#include "hostcap/network.hpp"
#include "hostcap/oracle.hpp"
#include "hostcap/profiles.hpp"
#include "hostcap/scenario.hpp"
#include "hostcap/scenario_gen.hpp"
#include "hostcap/strategies.hpp"

namespace fs = std::filesystem;
using namespace hostcap;

namespace {

int env_workers() {
    const char* s = std::getenv("HOSTCAP_WORKERS");
    if (!s) return 1;
    try {
        const int v = std::stoi(s);
        return v >= 1 ? v : 1;
    } catch (...) {
        return 1;
    }
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw ConfigError("");
        return v;
    } catch (...) {
        throw ConfigError("cannot parse number '" + s + "' in " + where);
    }
}

std::ofstream open_out_file(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file '" + path.string() + "'");
    return out;
}

// ---------------------------------------------------------------- solve ----

struct SolveOpts {
    std::string network;
    std::string injections;
    std::string out;
    int t = 0;
    bool linear = false;
    double tol = kDefaultTol;
    int max_iter = kDefaultMaxIter;
};

int run_solve(const SolveOpts& o) {
    const Network net = load_network(o.network);
    const int nb = net.bus_count();
    if (o.t < 0 || o.t >= net.baseline.T) {
        throw ConfigError("time step " + std::to_string(o.t) + " outside baseline horizon 0.." +
                          std::to_string(net.baseline.T - 1));
    }

    std::vector<double> p(nb), q(nb);
    for (int b = 0; b < nb; ++b) {
        p[b] = -net.baseline.d_kw[b][o.t];
        q[b] = -net.baseline.e_kvar[b][o.t];
    }

    if (!o.injections.empty()) {
        std::ifstream in(o.injections);
        if (!in) throw ConfigError("cannot open injections file '" + o.injections + "'");
        std::string line;
        if (!std::getline(in, line) || split_fields(line) != std::vector<std::string>{"bus", "p_kw", "q_kvar"}) {
            throw ConfigError("injections CSV must start with header 'bus,p_kw,q_kvar'");
        }
        int lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line == "\r") continue;
            const auto f = split_fields(line);
            if (f.size() != 3) {
                throw ConfigError("injections line " + std::to_string(lineno) +
                                  ": expected 3 fields");
            }
            const int b = net.bus_index(f[0]);
            if (b < 0) {
                throw ConfigError("injections line " + std::to_string(lineno) + ": unknown bus '" +
                                  f[0] + "'");
            }
            p[b] += parse_double(f[1], "injections line " + std::to_string(lineno));
            q[b] += parse_double(f[2], "injections line " + std::to_string(lineno));
        }
    }

    DistFlowSolver solver(net);
    const PowerFlowSolution sol =
        o.linear ? solver.solve_linear(p, q) : solver.solve(p, q, o.tol, o.max_iter);

    std::ostringstream csv;
    csv << "kind,id,v_pu,p_kw,q_kvar,loading_pct\n";
    for (int b = 0; b < nb; ++b) {
        const double v = sol.v[b] > 0.0 ? std::sqrt(sol.v[b]) : 0.0;
        csv << "bus," << net.buses[b].id << ',' << fmt_g(v) << ',' << fmt_g(p[b]) << ','
            << fmt_g(q[b]) << ",\n";
    }
    for (int e = 0; e < net.line_count(); ++e) {
        const auto& ln = net.lines[e];
        const double pk = sol.p_flow[e] * net.base_kva;
        const double qk = sol.q_flow[e] * net.base_kva;
        const double loading =
            100.0 * std::sqrt(sol.p_flow[e] * sol.p_flow[e] + sol.q_flow[e] * sol.q_flow[e]) /
            ln.s_max_pu;
        csv << "line," << ln.from << "->" << ln.to << ",," << fmt_g(pk) << ',' << fmt_g(qk) << ','
            << fmt_g(loading) << "\n";
    }

    std::ostream* sink = &std::cout;
    std::ofstream file;
    if (!o.out.empty()) {
        file = open_out_file(o.out);
        sink = &file;
    }
    *sink << csv.str();

    std::ostream& log = o.out.empty() ? std::cerr : std::cout;
    log << (o.linear ? "linearized" : "exact") << " solve: converged=" << (sol.converged ? 1 : 0)
        << " iterations=" << sol.iterations << " residual=" << fmt_g(sol.residual) << "\n";
    return sol.converged ? 0 : 3;
}

// ------------------------------------------------------------- generate ----

struct GenerateOpts {
    std::string network;
    std::string config;
    std::string clusters;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

int run_generate(const GenerateOpts& o) {
    const Network net = load_network(o.network);
    PoolConfig cfg = load_pool_config(o.config);
    std::vector<Cluster> clusters;
    if (!o.clusters.empty()) clusters = load_clusters(o.clusters);
    if (o.seed_given) cfg.seed = o.seed;
    Rng rng(cfg.seed);
    const ScenarioPool pool = generate_pool(cfg, net, clusters, rng);
    if (fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());
    save_pool(pool, o.out);
    std::cout << "wrote " << pool.size() << " scenarios to " << o.out << "\n";
    return 0;
}

// ------------------------------------------------------- shared loading ----

struct InputOpts {
    std::string network;
    std::string pool;
    std::string ev_profiles;
    std::string pv_profiles;
    bool negate_ev = false;
    int n_ev_types = 1;
    int n_pv_types = 1;
    double eps_bar = 1.0;
    double charger_kw = 1.92;
    std::uint64_t seed = 0;
    int workers = 1;
};

struct LoadedInputs {
    Network net;
    ScenarioPool pool;
    ProfileSet ev;
    ProfileSet pv;
};

LoadedInputs load_inputs(const InputOpts& o) {
    LoadedInputs in;
    in.net = load_network(o.network);
    const int T = in.net.baseline.T;
    Rng profile_rng(o.seed ^ 0xa5a5a5a5ull);
    in.ev = !o.ev_profiles.empty() ? load_profiles(o.ev_profiles, DerKind::EV, o.negate_ev)
                                   : synth_profiles(DerKind::EV, o.n_ev_types, T, SynthParams{},
                                                    profile_rng);
    in.pv = !o.pv_profiles.empty()
                ? load_profiles(o.pv_profiles, DerKind::PV, false)
                : synth_profiles(DerKind::PV, o.n_pv_types, T, SynthParams{}, profile_rng);
    if (in.ev.T != T || in.pv.T != T) {
        throw ConfigError("profile length does not match the network baseline T = " +
                          std::to_string(T));
    }
    in.pool = load_pool(o.pool);
    if (in.pool.empty()) throw ConfigError("scenario pool is empty");
    for (const auto& s : in.pool) {
        const auto problems = validate_scenario(s, in.net, in.ev, in.pv);
        if (!problems.empty()) throw ConfigError("pool invalid: " + problems.front());
    }
    return in;
}

void write_labels_csv(const fs::path& path, const ScenarioPool& pool,
                      const std::vector<FeasibilityVerdict>& verdicts) {
    auto out = open_out_file(path);
    out << "scenario_id,label,pass_fraction,total_ev,total_pv_kw,combined\n";
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const double ev = pool[i].total_ev_count();
        const double pv = pool[i].total_pv_kw();
        out << pool[i].id << ',' << verdicts[i].label << ',' << fmt_g(verdicts[i].pass_fraction)
            << ',' << fmt_g(ev) << ',' << fmt_g(pv) << ',' << fmt_g(ev + pv) << "\n";
    }
}

// ----------------------------------------------------------------- eval ----

struct EvalOpts : InputOpts {
    std::string out;
};

int run_eval(const EvalOpts& o) {
    const LoadedInputs in = load_inputs(o);
    OracleConfig ocfg;
    ocfg.eps_bar = o.eps_bar;
    ocfg.charger_kw = o.charger_kw;

    ViolationHistogram hist;
    const auto verdicts = evaluate_batch(in.net, in.pool, in.ev, in.pv, ocfg, o.workers, &hist);

    fs::create_directories(o.out);
    write_labels_csv(fs::path(o.out) / "labels.csv", in.pool, verdicts);
    write_violations_csv(hist, (fs::path(o.out) / "violations.csv").string());

    long feasible = 0;
    LabeledPool labeled;
    for (std::size_t i = 0; i < in.pool.size(); ++i) {
        feasible += verdicts[i].label;
        labeled.entries.push_back({in.pool[i].id, static_cast<int>(i), verdicts[i].label, 0,
                                   verdicts[i].pass_fraction});
    }

    nlohmann::ordered_json summary;
    summary["n_scenarios"] = in.pool.size();
    summary["eps_bar"] = o.eps_bar;
    summary["charger_kw"] = o.charger_kw;
    summary["feasible"] = feasible;
    summary["feasible_fraction"] =
        static_cast<double>(feasible) / static_cast<double>(in.pool.size());
    if (feasible > 0) {
        summary["hosting_capacity"] = hc_to_json(hosting_capacity(labeled, in.pool));
    } else {
        summary["hosting_capacity"] = nullptr;
    }
    summary["violations"] = histogram_to_json(hist);
    auto out = open_out_file(fs::path(o.out) / "summary.json");
    out << summary.dump(2) << "\n";

    std::cout << "labeled " << in.pool.size() << " scenarios: " << feasible << " feasible ("
              << fmt_g(100.0 * static_cast<double>(feasible) /
                       static_cast<double>(in.pool.size()))
              << "%)\n";
    return 0;
}

// ---------------------------------------------------------------- learn ----

struct LearnOpts : InputOpts {
    std::string out;
    std::string strategy = "entropy";
    double beta = 1.0;
    int B = 32;
    int K = 8;
    int hidden = 32;
    int epochs = 500;
    double learning_rate = 1e-2;
    double l2 = 1e-4;
};

int run_learn(const LearnOpts& o) {
    const LoadedInputs in = load_inputs(o);
    OracleConfig ocfg;
    ocfg.eps_bar = o.eps_bar;
    ocfg.charger_kw = o.charger_kw;

    QueryStrategy strategy;
    strategy.kind = strategy_from_string(o.strategy);
    strategy.beta = o.beta;

    TrainConfig tc;
    tc.hidden = o.hidden;
    tc.epochs = o.epochs;
    tc.learning_rate = o.learning_rate;
    tc.l2 = o.l2;

    const auto features = compute_pool_features(in.pool, in.net, o.charger_kw);
    ViolationHistogram hist;
    const EpisodeResult result = run_episode(in.net, in.pool, in.ev, in.pv, ocfg, strategy, o.B,
                                             o.K, tc, o.seed, o.workers, &features, &hist);

    fs::create_directories(o.out);
    save_mlp(result.theta, (fs::path(o.out) / "model.json").string());
    write_violations_csv(hist, (fs::path(o.out) / "violations.csv").string());

    {
        auto out = open_out_file(fs::path(o.out) / "labeled.csv");
        out << "scenario_id,pool_index,label,query_round,pass_fraction\n";
        for (const auto& e : result.labeled.entries) {
            out << e.scenario_id << ',' << e.pool_index << ',' << e.label << ',' << e.query_round
                << ',' << fmt_g(e.pass_fraction) << "\n";
        }
    }
    {
        // Wall-clock time is reported here and nowhere else, so every other
        // artifact is byte-stable for a fixed seed.
        auto out = open_out_file(fs::path(o.out) / "timings.csv");
        out << "strategy,episode,seconds\n";
        out << o.strategy << ",0," << fmt_g(result.history.wall_seconds) << "\n";
    }

    nlohmann::ordered_json je;
    je["strategy"] = o.strategy;
    je["beta"] = o.beta;
    je["B"] = result.history.B;
    je["K"] = result.history.K;
    je["seed"] = o.seed;
    je["eps_bar"] = o.eps_bar;
    je["charger_kw"] = o.charger_kw;
    je["labels_requested"] = result.history.labels_requested;
    je["rounds"] = nlohmann::ordered_json::array();
    for (const auto& r : result.history.rounds) {
        nlohmann::ordered_json jr;
        jr["round"] = r.round;
        jr["queried_ids"] = r.queried_ids;
        jr["labels"] = r.labels;
        jr["labeled_total"] = r.labeled_total;
        jr["hc_ev"] = r.hc_ev;
        jr["hc_pv_kw"] = r.hc_pv_kw;
        jr["hc_combined"] = r.hc_combined;
        je["rounds"].push_back(jr);
    }

    bool any_feasible = false;
    for (const auto& e : result.labeled.entries) any_feasible |= e.label == 1;

    {
        auto out = open_out_file(fs::path(o.out) / "frontier.csv");
        out << "scenario_id,total_ev,total_pv_kw,combined,label\n";
        if (any_feasible) {
            const HcMetrics hc = hosting_capacity(result.labeled, in.pool);
            je["hosting_capacity"] = hc_to_json(hc);
            for (long id : hc.frontier_ids) {
                for (const auto& e : result.labeled.entries) {
                    if (e.scenario_id != id) continue;
                    const auto& s = in.pool[e.pool_index];
                    const double ev = s.total_ev_count();
                    const double pv = s.total_pv_kw();
                    out << id << ',' << fmt_g(ev) << ',' << fmt_g(pv) << ',' << fmt_g(ev + pv)
                        << ",1\n";
                    break;
                }
            }
        } else {
            je["hosting_capacity"] = nullptr;
        }
    }

    auto out = open_out_file(fs::path(o.out) / "episode.json");
    out << je.dump(2) << "\n";

    std::cout << "episode done: " << result.history.labels_requested << " labels over "
              << result.history.rounds.size() << " rounds\n";
    if (!any_feasible) {
        throw NoFeasibleScenario("no feasible scenario among the " +
                                 std::to_string(result.labeled.entries.size()) +
                                 " labeled scenarios");
    }
    return 0;
}

// ------------------------------------------------------ report / compare ----

struct ReportOpts {
    std::string config;
    std::string out;
    int workers_override = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

int run_report(const ReportOpts& o, bool require_comparison) {
    ExperimentConfig cfg = load_experiment_config(o.config);
    if (o.workers_override > 0) {
        cfg.workers = o.workers_override;
    } else {
        cfg.workers = std::max(cfg.workers, env_workers());
    }
    if (o.seed_given) cfg.seed = o.seed;
    run_experiment(cfg, o.out, require_comparison);
    std::cout << "report written to " << o.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hosting-capacity analysis for radial distribution feeders"};
    app.require_subcommand(1);
    int rc = 0;

    SolveOpts so;
    auto* solve = app.add_subcommand("solve", "run one power-flow snapshot");
    solve->add_option("--network", so.network, "network JSON file")->required();
    solve->add_option("--injections", so.injections,
                      "CSV 'bus,p_kw,q_kvar' of extra net injections (loads negative)");
    solve->add_option("--t", so.t, "baseline time step to solve (default 0)");
    solve->add_flag("--linear", so.linear, "use the linearized (lossless) model");
    solve->add_option("--tol", so.tol, "fixed-point tolerance");
    solve->add_option("--max-iter", so.max_iter, "sweep iteration cap");
    solve->add_option("--out", so.out, "write the result CSV here instead of stdout");
    solve->callback([&] { rc = run_solve(so); });

    GenerateOpts go;
    auto* gen = app.add_subcommand("generate", "build a scenario pool");
    gen->add_option("--network", go.network, "network JSON file")->required();
    gen->add_option("--config", go.config, "pool generation config JSON")->required();
    gen->add_option("--clusters", go.clusters, "cluster definitions JSON");
    auto* gseed = gen->add_option("--seed", go.seed, "override the config's RNG seed");
    gen->add_option("--out", go.out, "output pool JSONL path")->required();
    gen->callback([&] {
        go.seed_given = gseed->count() > 0;
        rc = run_generate(go);
    });

    auto add_input_opts = [](CLI::App* sub, InputOpts& o) {
        sub->add_option("--network", o.network, "network JSON file")->required();
        sub->add_option("--pool", o.pool, "scenario pool JSONL")->required();
        sub->add_option("--ev-profiles", o.ev_profiles, "EV behavior CSV (synthetic if absent)");
        sub->add_option("--pv-profiles", o.pv_profiles, "PV behavior CSV (synthetic if absent)");
        sub->add_flag("--negate-ev", o.negate_ev, "negate EV CSV values on load");
        sub->add_option("--n-ev-types", o.n_ev_types, "synthetic EV behavior types");
        sub->add_option("--n-pv-types", o.n_pv_types, "synthetic PV behavior types");
        sub->add_option("--eps-bar", o.eps_bar, "minimum passing fraction for a feasible label");
        sub->add_option("--charger-kw", o.charger_kw, "kW per EV charger");
        sub->add_option("--seed", o.seed, "RNG seed");
        sub->add_option("--workers", o.workers, "labeling threads (default $HOSTCAP_WORKERS or 1)")
            ->default_val(env_workers());
    };

    EvalOpts eo;
    auto* eval = app.add_subcommand("eval", "label a whole pool through the oracle");
    add_input_opts(eval, eo);
    eval->add_option("--out", eo.out, "output directory")->required();
    eval->callback([&] { rc = run_eval(eo); });

    LearnOpts lo;
    auto* learn = app.add_subcommand("learn", "run one active-learning episode");
    add_input_opts(learn, lo);
    learn->add_option("--strategy", lo.strategy, "uniform | entropy | info_density");
    learn->add_option("--beta", lo.beta, "similarity weight for info_density");
    learn->add_option("-B,--batch", lo.B, "labels per round");
    learn->add_option("-K,--rounds", lo.K, "number of query rounds");
    learn->add_option("--hidden", lo.hidden, "classifier hidden units");
    learn->add_option("--epochs", lo.epochs, "classifier training epochs");
    learn->add_option("--lr", lo.learning_rate, "classifier learning rate");
    learn->add_option("--l2", lo.l2, "classifier weight decay");
    learn->add_option("--out", lo.out, "output directory")->required();
    learn->callback([&] { rc = run_learn(lo); });

    ReportOpts ro;
    auto* report = app.add_subcommand("report", "run a configured experiment");
    report->add_option("--config", ro.config, "experiment config JSON")->required();
    report->add_option("--out", ro.out, "output directory")->required();
    report->add_option("--workers", ro.workers_override, "override the config's worker count");
    auto* rseed = report->add_option("--seed", ro.seed, "override the config's base seed");
    report->callback([&] {
        ro.seed_given = rseed->count() > 0;
        rc = run_report(ro, false);
    });

    ReportOpts co;
    auto* compare = app.add_subcommand("compare", "compare query strategies on one experiment");
    compare->add_option("--config", co.config, "experiment config JSON")->required();
    compare->add_option("--out", co.out, "output directory")->required();
    compare->add_option("--workers", co.workers_override, "override the config's worker count");
    auto* cseed = compare->add_option("--seed", co.seed, "override the config's base seed");
    compare->callback([&] {
        co.seed_given = cseed->count() > 0;
        rc = run_report(co, true);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const NoFeasibleScenario& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NotRadialError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const EmptyPool& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
