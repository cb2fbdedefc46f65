// Python bindings for the hosting-capacity core. The module exposes the
// same operations the CLI is built on: network loading, branch-flow solves,
// profile libraries, pool generation, feasibility evaluation and
// active-learning episodes. Long-running calls release the GIL.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "hostcap/active_learning.hpp"
#include "hostcap/classifier.hpp"
#include "hostcap/distflow.hpp"
#include "hostcap/errors.hpp"
#include "hostcap/network.hpp"
#include "hostcap/oracle.hpp"
#include "hostcap/profiles.hpp"
#include "hostcap/rng.hpp"
#include "hostcap/scenario.hpp"
#include "hostcap/scenario_gen.hpp"
#include "hostcap/strategies.hpp"

namespace py = pybind11;
using namespace hostcap;

namespace {

py::dict solution_to_dict(const PowerFlowSolution& sol) {
    py::dict d;
    d["v"] = sol.v;
    d["p_flow"] = sol.p_flow;
    d["q_flow"] = sol.q_flow;
    d["l"] = sol.l;
    d["converged"] = sol.converged;
    d["iterations"] = sol.iterations;
    d["residual"] = sol.residual;
    return d;
}

py::dict verdict_to_dict(const FeasibilityVerdict& v) {
    py::dict d;
    d["label"] = v.label;
    d["pass_fraction"] = v.pass_fraction;
    py::list viols;
    for (const auto& w : v.worst_violations) {
        py::dict vd;
        vd["t"] = w.t;
        vd["kind"] = to_string(w.kind);
        vd["element"] = w.element;
        vd["magnitude"] = w.magnitude;
        viols.append(vd);
    }
    d["worst_violations"] = viols;
    return d;
}

py::dict hc_to_dict(const HcMetrics& hc) {
    py::dict d;
    d["max_ev_count"] = hc.max_ev_count;
    d["max_pv_kw"] = hc.max_pv_kw;
    d["max_combined"] = hc.max_combined;
    d["argmax_ev_id"] = hc.argmax_ev_id;
    d["argmax_pv_id"] = hc.argmax_pv_id;
    d["argmax_combined_id"] = hc.argmax_combined_id;
    d["frontier_ids"] = hc.frontier_ids;
    return d;
}

LabeledPool make_labeled(const ScenarioPool& pool, const std::vector<int>& labels) {
    if (labels.size() != pool.size())
        throw DimensionMismatch("labels and pool differ in length");
    LabeledPool lp;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        LabeledEntry e;
        e.scenario_id = pool[i].id;
        e.pool_index = static_cast<int>(i);
        e.label = labels[i];
        lp.entries.push_back(e);
    }
    return lp;
}

OracleConfig make_oracle(double eps_bar, double charger_kw, bool early_exit) {
    OracleConfig cfg;
    cfg.eps_bar = eps_bar;
    cfg.charger_kw = charger_kw;
    cfg.early_exit = early_exit;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hosting-capacity analysis: branch-flow feasibility plus active learning";

    py::register_exception<ConfigError>(m, "HostcapConfigError", PyExc_ValueError);
    py::register_exception<DimensionMismatch>(m, "DimensionMismatchError", PyExc_ValueError);
    py::register_exception<EmptyPool>(m, "EmptyPoolError", PyExc_ValueError);
    py::register_exception<NotRadialError>(m, "NotRadialError", PyExc_ValueError);
    py::register_exception<DegenerateData>(m, "DegenerateDataError", PyExc_ValueError);
    py::register_exception<NoFeasibleScenario>(m, "NoFeasibleScenarioError", PyExc_RuntimeError);

    py::class_<Network>(m, "Network")
        .def_property_readonly("bus_count", &Network::bus_count)
        .def_property_readonly("line_count", &Network::line_count)
        .def_readonly("base_kva", &Network::base_kva)
        .def_readonly("root_bus", &Network::root_bus)
        .def_property_readonly("bus_ids",
                               [](const Network& n) {
                                   std::vector<std::string> ids;
                                   for (const auto& b : n.buses) ids.push_back(b.id);
                                   return ids;
                               })
        .def_property_readonly("baseline_steps", [](const Network& n) { return n.baseline.T; })
        .def("__repr__", [](const Network& n) {
            return "<Network " + std::to_string(n.bus_count()) + " buses, " +
                   std::to_string(n.line_count()) + " lines>";
        });

    m.def("load_network", &load_network, py::arg("path"),
          "Load a radial feeder description from a JSON file.");
    m.def("network_from_json", &network_from_json, py::arg("text"),
          "Parse a radial feeder description from a JSON string.");

    m.def(
        "solve",
        [](const Network& net, const std::vector<double>& p_kw, const std::vector<double>& q_kvar,
           double tol, int max_iter, bool linear) {
            PowerFlowSolution sol;
            {
                py::gil_scoped_release release;
                sol = linear ? solve_lindistflow(net, p_kw, q_kvar)
                             : solve_distflow(net, p_kw, q_kvar, tol, max_iter);
            }
            return solution_to_dict(sol);
        },
        py::arg("network"), py::arg("p_kw"), py::arg("q_kvar"), py::arg("tol") = kDefaultTol,
        py::arg("max_iter") = kDefaultMaxIter, py::arg("linear") = false,
        "Solve one time step of net injections (kW/kvar, loads negative). Returns squared "
        "voltages, line flows and squared currents in per-unit.");

    py::class_<ProfileSet>(m, "ProfileSet")
        .def_property_readonly("kind", [](const ProfileSet& p) { return to_string(p.kind); })
        .def_readonly("T", &ProfileSet::T)
        .def_readonly("shapes", &ProfileSet::shapes)
        .def_property_readonly("type_count", &ProfileSet::type_count)
        .def("__repr__", [](const ProfileSet& p) {
            return "<ProfileSet " + to_string(p.kind) + " " + std::to_string(p.type_count()) +
                   " types x " + std::to_string(p.T) + " steps>";
        });

    m.def(
        "synth_profiles",
        [](const std::string& kind, int n_types, int T, std::uint64_t seed, double ev_window_hours,
           double ev_start_hour, double ev_depth, double pv_amp_hi, double pv_amp_lo,
           double pv_dawn_hour, double pv_dusk_hour, double pv_noise) {
            SynthParams sp;
            sp.ev_window_hours = ev_window_hours;
            sp.ev_start_hour = ev_start_hour;
            sp.ev_depth = ev_depth;
            sp.pv_amp_hi = pv_amp_hi;
            sp.pv_amp_lo = pv_amp_lo;
            sp.pv_dawn_hour = pv_dawn_hour;
            sp.pv_dusk_hour = pv_dusk_hour;
            sp.pv_noise = pv_noise;
            Rng rng(seed);
            return synth_profiles(der_kind_from_string(kind), n_types, T, sp, rng);
        },
        py::arg("kind"), py::arg("n_types"), py::arg("T") = 24, py::arg("seed") = 0,
        py::arg("ev_window_hours") = 2.0, py::arg("ev_start_hour") = 17.0,
        py::arg("ev_depth") = 1.0, py::arg("pv_amp_hi") = 1.0, py::arg("pv_amp_lo") = 0.6,
        py::arg("pv_dawn_hour") = 6.0, py::arg("pv_dusk_hour") = 18.0, py::arg("pv_noise") = 0.0,
        "Generate a synthetic behavior-shape library ('EV' charging windows or 'PV' bells).");

    m.def(
        "load_profiles",
        [](const std::string& path, const std::string& kind, bool negate) {
            return load_profiles(path, der_kind_from_string(kind), negate);
        },
        py::arg("path"), py::arg("kind"), py::arg("negate") = false,
        "Load a behavior-shape library from CSV (header type_id,t0,...).");
    m.def("save_profiles", &save_profiles, py::arg("profiles"), py::arg("path"));

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("id", &Scenario::id)
        .def_property_readonly("total_ev_count", &Scenario::total_ev_count)
        .def_property_readonly("total_pv_kw", &Scenario::total_pv_kw)
        .def_property_readonly("locations",
                               [](const Scenario& s) {
                                   py::list out;
                                   for (const auto& loc : s.locations) {
                                       py::dict d;
                                       d["bus"] = loc.bus;
                                       d["kind"] = to_string(loc.kind);
                                       d["count"] = loc.count;
                                       d["kw"] = loc.kw;
                                       d["profile_type"] = loc.profile_type;
                                       d["power_factor"] = loc.power_factor;
                                       out.append(d);
                                   }
                                   return out;
                               })
        .def("__repr__", [](const Scenario& s) {
            return "<Scenario " + std::to_string(s.id) + ": " +
                   std::to_string(s.total_ev_count()) + " chargers, " +
                   std::to_string(s.total_pv_kw()) + " kW generation>";
        });

    m.def("load_pool", &load_pool, py::arg("path"), "Read a scenario pool from a JSONL file.");
    m.def("save_pool", &save_pool, py::arg("pool"), py::arg("path"));

    m.def(
        "generate_pool",
        [](const std::string& config_path, const Network& net, const std::string& clusters_path,
           std::optional<std::uint64_t> seed) {
            auto cfg = load_pool_config(config_path);
            if (seed) cfg.seed = *seed;
            std::vector<Cluster> clusters;
            if (!clusters_path.empty()) clusters = load_clusters(clusters_path);
            Rng rng(cfg.seed);
            py::gil_scoped_release release;
            return generate_pool(cfg, net, clusters, rng);
        },
        py::arg("config_path"), py::arg("network"), py::arg("clusters_path") = std::string(),
        py::arg("seed") = py::none(),
        "Sample a scenario pool from a generation config file; `seed` overrides the config's.");

    m.def(
        "scenario_features",
        [](const Scenario& s, const Network& net, double charger_kw) {
            return scenario_features(s, net, charger_kw);
        },
        py::arg("scenario"), py::arg("network"), py::arg("charger_kw") = 1.92,
        "Installed-kW feature vector: per-bus charging then per-bus generation.");

    m.def(
        "evaluate_pool",
        [](const Network& net, const ScenarioPool& pool, const ProfileSet& ev,
           const ProfileSet& pv, double eps_bar, double charger_kw, bool early_exit, int workers) {
            const auto cfg = make_oracle(eps_bar, charger_kw, early_exit);
            std::vector<FeasibilityVerdict> verdicts;
            {
                py::gil_scoped_release release;
                verdicts = evaluate_batch(net, pool, ev, pv, cfg, workers);
            }
            py::list out;
            for (const auto& v : verdicts) out.append(verdict_to_dict(v));
            return out;
        },
        py::arg("network"), py::arg("pool"), py::arg("ev_profiles"), py::arg("pv_profiles"),
        py::arg("eps_bar") = 1.0, py::arg("charger_kw") = 1.92, py::arg("early_exit") = true,
        py::arg("workers") = 1,
        "Label every scenario through the time-series feasibility check.");

    m.def(
        "hosting_capacity",
        [](const ScenarioPool& pool, const std::vector<int>& labels) {
            return hc_to_dict(hosting_capacity(make_labeled(pool, labels), pool));
        },
        py::arg("pool"), py::arg("labels"),
        "Extremes of the feasible subset: max chargers, max generation kW, max combined.");

    py::class_<MlpParams>(m, "Classifier")
        .def_readonly("D", &MlpParams::D)
        .def_readonly("H", &MlpParams::H)
        .def("predict_proba",
             [](const MlpParams& p, const std::vector<double>& x) { return p.predict_proba(x); },
             py::arg("x"), "Feasibility probability of one feature vector.")
        .def(
            "predict_many",
            [](const MlpParams& p, const std::vector<std::vector<double>>& X) {
                std::vector<double> out;
                out.reserve(X.size());
                for (const auto& x : X) out.push_back(p.predict_proba(x));
                return out;
            },
            py::arg("X"))
        .def("save", [](const MlpParams& p, const std::string& path) { save_mlp(p, path); },
             py::arg("path"))
        .def_static("load", &load_mlp, py::arg("path"))
        .def("__repr__", [](const MlpParams& p) {
            return "<Classifier " + std::to_string(p.D) + " -> " + std::to_string(p.H) + " -> 1>";
        });

    m.def(
        "train_classifier",
        [](const std::vector<std::vector<double>>& X, const std::vector<int>& y, int hidden,
           int epochs, double learning_rate, double momentum, double l2, std::uint64_t seed) {
            TrainConfig cfg;
            cfg.hidden = hidden;
            cfg.epochs = epochs;
            cfg.learning_rate = learning_rate;
            cfg.momentum = momentum;
            cfg.l2 = l2;
            cfg.seed = seed;
            py::gil_scoped_release release;
            return train_classifier(X, y, cfg);
        },
        py::arg("X"), py::arg("y"), py::arg("hidden") = 32, py::arg("epochs") = 500,
        py::arg("learning_rate") = 1e-2, py::arg("momentum") = 0.9, py::arg("l2") = 1e-4,
        py::arg("seed") = 0, "Fit the feasibility classifier on labeled feature vectors.");

    m.def(
        "run_episode",
        [](const Network& net, const ScenarioPool& pool, const ProfileSet& ev,
           const ProfileSet& pv, const std::string& strategy, double beta, int B, int K,
           double eps_bar, double charger_kw, std::uint64_t seed, int workers) {
            QueryStrategy strat;
            strat.kind = strategy_from_string(strategy);
            strat.beta = beta;
            const auto oracle_cfg = make_oracle(eps_bar, charger_kw, true);
            EpisodeResult ep;
            {
                py::gil_scoped_release release;
                ep = run_episode(net, pool, ev, pv, oracle_cfg, strat, B, K, TrainConfig{}, seed,
                                 workers);
            }
            py::dict out;
            out["labels_requested"] = ep.history.labels_requested;
            out["model"] = ep.theta;
            py::list rounds;
            for (const auto& r : ep.history.rounds) {
                py::dict rd;
                rd["round"] = r.round;
                rd["queried_ids"] = r.queried_ids;
                rd["labels"] = r.labels;
                rd["labeled_total"] = r.labeled_total;
                rd["hc_ev"] = r.hc_ev;
                rd["hc_pv_kw"] = r.hc_pv_kw;
                rd["hc_combined"] = r.hc_combined;
                rounds.append(rd);
            }
            out["rounds"] = rounds;
            py::list labeled;
            for (const auto& e : ep.labeled.entries) {
                py::dict ld;
                ld["scenario_id"] = e.scenario_id;
                ld["pool_index"] = e.pool_index;
                ld["label"] = e.label;
                ld["query_round"] = e.query_round;
                ld["pass_fraction"] = e.pass_fraction;
                labeled.append(ld);
            }
            out["labeled"] = labeled;
            try {
                out["hosting_capacity"] = hc_to_dict(hosting_capacity(ep.labeled, pool));
            } catch (const NoFeasibleScenario&) {
                out["hosting_capacity"] = py::none();
            }
            return out;
        },
        py::arg("network"), py::arg("pool"), py::arg("ev_profiles"), py::arg("pv_profiles"),
        py::arg("strategy") = "entropy", py::arg("beta") = 1.0, py::arg("B") = 32,
        py::arg("K") = 8, py::arg("eps_bar") = 1.0, py::arg("charger_kw") = 1.92,
        py::arg("seed") = 0, py::arg("workers") = 1,
        "Run one pool-based active-learning episode: K rounds of B queries each.");
}
