#include "hostcap/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hostcap/errors.hpp"

namespace hostcap {

namespace fs = std::filesystem;

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

void require_keys(const nlohmann::json& j, const char* where,
                  std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end())
            throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
}

std::string resolve_path(const std::string& base_dir, const std::string& p) {
    if (p.empty() || base_dir.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(base_dir) / p).string();
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

struct MeanStd {
    double mean = 0.0;
    double std_dev = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd ms;
    if (xs.empty()) return ms;
    for (double v : xs) ms.mean += v;
    ms.mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double v : xs) var += (v - ms.mean) * (v - ms.mean);
    ms.std_dev = std::sqrt(var / static_cast<double>(xs.size()));
    return ms;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::string& base_dir) {
    require_keys(j, "experiment config",
                 {"network", "pool", "pool_config", "clusters", "profiles", "strategies", "beta",
                  "B", "K", "eps_bar", "charger_kw", "episodes", "seed", "workers", "exhaustive",
                  "boundary_delta_pu"});
    ExperimentConfig cfg;
    cfg.network_path = resolve_path(base_dir, j.at("network").get<std::string>());
    cfg.pool_path = resolve_path(base_dir, j.value("pool", std::string()));
    cfg.pool_config_path = resolve_path(base_dir, j.value("pool_config", std::string()));
    cfg.clusters_path = resolve_path(base_dir, j.value("clusters", std::string()));

    if (j.contains("profiles")) {
        const auto& p = j["profiles"];
        require_keys(p, "experiment config profiles",
                     {"ev_csv", "pv_csv", "negate_ev", "n_ev_types", "n_pv_types",
                      "ev_window_hours", "ev_start_hour", "ev_depth", "pv_amp_hi", "pv_amp_lo",
                      "pv_dawn_hour", "pv_dusk_hour", "pv_noise"});
        cfg.profiles.ev_csv = resolve_path(base_dir, p.value("ev_csv", std::string()));
        cfg.profiles.pv_csv = resolve_path(base_dir, p.value("pv_csv", std::string()));
        cfg.profiles.negate_ev = p.value("negate_ev", false);
        cfg.profiles.n_ev_types = p.value("n_ev_types", 1);
        cfg.profiles.n_pv_types = p.value("n_pv_types", 1);
        SynthParams& sp = cfg.profiles.synth;
        sp.ev_window_hours = p.value("ev_window_hours", sp.ev_window_hours);
        sp.ev_start_hour = p.value("ev_start_hour", sp.ev_start_hour);
        sp.ev_depth = p.value("ev_depth", sp.ev_depth);
        sp.pv_amp_hi = p.value("pv_amp_hi", sp.pv_amp_hi);
        sp.pv_amp_lo = p.value("pv_amp_lo", sp.pv_amp_lo);
        sp.pv_dawn_hour = p.value("pv_dawn_hour", sp.pv_dawn_hour);
        sp.pv_dusk_hour = p.value("pv_dusk_hour", sp.pv_dusk_hour);
        sp.pv_noise = p.value("pv_noise", sp.pv_noise);
    }
    if (j.contains("strategies"))
        for (const auto& s : j["strategies"])
            cfg.strategies.push_back(strategy_from_string(s.get<std::string>()));
    cfg.beta = j.value("beta", cfg.beta);
    cfg.B = j.value("B", cfg.B);
    cfg.K = j.value("K", cfg.K);
    cfg.eps_bar = j.value("eps_bar", cfg.eps_bar);
    cfg.charger_kw = j.value("charger_kw", cfg.charger_kw);
    cfg.episodes = j.value("episodes", cfg.episodes);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.exhaustive = j.value("exhaustive", cfg.exhaustive);
    cfg.boundary_delta_pu = j.value("boundary_delta_pu", cfg.boundary_delta_pu);

    if (cfg.strategies.empty()) throw ConfigError("experiment config lists no strategies");
    if (cfg.episodes < 1) throw ConfigError("episodes must be >= 1");
    if (cfg.B < 1 || cfg.K < 1) throw ConfigError("B and K must be >= 1");
    if (cfg.eps_bar < 0.0 || cfg.eps_bar > 1.0) throw ConfigError("eps_bar must lie in [0, 1]");
    if (cfg.pool_path.empty() == cfg.pool_config_path.empty())
        throw ConfigError("experiment config needs exactly one of 'pool' or 'pool_config'");
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open experiment config: " + path);
    try {
        return experiment_config_from_json(nlohmann::json::parse(in),
                                           fs::path(path).parent_path().string());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("experiment config " + path + " is malformed: " + e.what());
    }
}

ExperimentInputs setup_experiment(const ExperimentConfig& cfg) {
    ExperimentInputs in;
    in.net = load_network(cfg.network_path);
    const auto report = validate_network(in.net);
    if (!report.ok())
        throw ConfigError("network " + cfg.network_path + " invalid: " + report.problems.front());

    const int T = in.net.baseline.T;
    Rng profile_rng(cfg.seed ^ 0xa5a5a5a5ull);
    in.ev_profiles = !cfg.profiles.ev_csv.empty()
                         ? load_profiles(cfg.profiles.ev_csv, DerKind::EV, cfg.profiles.negate_ev)
                         : synth_profiles(DerKind::EV, cfg.profiles.n_ev_types, T,
                                          cfg.profiles.synth, profile_rng);
    in.pv_profiles = !cfg.profiles.pv_csv.empty()
                         ? load_profiles(cfg.profiles.pv_csv, DerKind::PV, false)
                         : synth_profiles(DerKind::PV, cfg.profiles.n_pv_types, T,
                                          cfg.profiles.synth, profile_rng);
    if (in.ev_profiles.T != T || in.pv_profiles.T != T)
        throw ConfigError("profile length does not match the network baseline T = " +
                          std::to_string(T));

    if (!cfg.pool_path.empty()) {
        in.pool = load_pool(cfg.pool_path);
    } else {
        const PoolConfig pool_cfg = load_pool_config(cfg.pool_config_path);
        std::vector<Cluster> clusters;
        if (!cfg.clusters_path.empty()) clusters = load_clusters(cfg.clusters_path);
        Rng rng(pool_cfg.seed);
        in.pool = generate_pool(pool_cfg, in.net, clusters, rng);
    }
    if (in.pool.empty()) throw ConfigError("scenario pool is empty");
    for (const auto& s : in.pool) {
        const auto problems = validate_scenario(s, in.net, in.ev_profiles, in.pv_profiles);
        if (!problems.empty()) throw ConfigError("pool invalid: " + problems.front());
    }
    in.features = compute_pool_features(in.pool, in.net, cfg.charger_kw);
    return in;
}

ExhaustiveResult eval_exhaustive(const ExperimentInputs& in, const OracleConfig& oracle_cfg,
                                 int workers) {
    ExhaustiveResult res;
    res.verdicts = evaluate_batch(in.net, in.pool, in.ev_profiles, in.pv_profiles, oracle_cfg,
                                  workers, &res.histogram);
    long feasible = 0;
    LabeledPool labeled;
    for (std::size_t i = 0; i < in.pool.size(); ++i) {
        feasible += res.verdicts[i].label;
        LabeledEntry e;
        e.scenario_id = in.pool[i].id;
        e.pool_index = static_cast<int>(i);
        e.label = res.verdicts[i].label;
        e.query_round = 0;
        e.pass_fraction = res.verdicts[i].pass_fraction;
        labeled.entries.push_back(e);
    }
    res.feasible_fraction = static_cast<double>(feasible) / static_cast<double>(in.pool.size());
    if (feasible > 0) res.hc = hosting_capacity(labeled, in.pool);
    res.labeled = std::move(labeled);
    return res;
}

double boundary_fraction(const std::vector<std::vector<double>>& features_kw,
                         const SvmBoundary& boundary_pu, double base_kva, double delta_pu) {
    if (features_kw.empty()) return 0.0;
    long hits = 0;
    std::vector<double> x_pu;
    for (const auto& x : features_kw) {
        x_pu.assign(x.begin(), x.end());
        for (double& v : x_pu) v /= base_kva;
        if (boundary_pu.distance(x_pu) <= delta_pu) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(features_kw.size());
}

namespace {

struct ScenarioTotals {
    double ev = 0.0;
    double pv_kw = 0.0;
    double combined = 0.0;
};

ScenarioTotals totals_of(const Scenario& s) {
    ScenarioTotals t;
    t.ev = s.total_ev_count();
    t.pv_kw = s.total_pv_kw();
    t.combined = t.ev + t.pv_kw;
    return t;
}

}  // namespace

nlohmann::ordered_json hc_to_json(const HcMetrics& hc) {
    nlohmann::ordered_json j;
    j["max_ev_count"] = hc.max_ev_count;
    j["max_pv_kw"] = hc.max_pv_kw;
    j["max_combined"] = hc.max_combined;
    j["argmax_ev_id"] = hc.argmax_ev_id;
    j["argmax_pv_id"] = hc.argmax_pv_id;
    j["argmax_combined_id"] = hc.argmax_combined_id;
    j["frontier_ids"] = hc.frontier_ids;
    return j;
}

nlohmann::ordered_json histogram_to_json(const ViolationHistogram& h) {
    nlohmann::ordered_json j;
    auto count_of = [](const std::map<std::string, long>& m) {
        long n = 0;
        for (const auto& [k, c] : m) n += c;
        return n;
    };
    j["undervoltage_total"] = count_of(h.undervoltage_by_bus);
    j["overvoltage_total"] = count_of(h.overvoltage_by_bus);
    j["thermal_total"] = count_of(h.thermal_by_line);
    j["diverged_steps"] = h.diverged_steps;
    j["undervoltage_by_bus"] = h.undervoltage_by_bus;
    j["overvoltage_by_bus"] = h.overvoltage_by_bus;
    j["thermal_by_line"] = h.thermal_by_line;
    // The majority violation kind, for at-a-glance cluster comparisons.
    const long uv = j["undervoltage_total"].get<long>();
    const long ov = j["overvoltage_total"].get<long>();
    const long th = j["thermal_total"].get<long>();
    std::string dominant = "none";
    long best = 0;
    if (uv > best) { dominant = "undervoltage"; best = uv; }
    if (ov > best) { dominant = "overvoltage"; best = ov; }
    if (th > best) { dominant = "line_thermal"; best = th; }
    j["dominant_kind"] = dominant;
    return j;
}

void write_violations_csv(const ViolationHistogram& h, const std::string& path) {
    auto out = open_out(fs::path(path));
    out << "kind,element,count\n";
    for (const auto& [el, n] : h.undervoltage_by_bus)
        out << "undervoltage," << el << ',' << n << "\n";
    for (const auto& [el, n] : h.overvoltage_by_bus) out << "overvoltage," << el << ',' << n << "\n";
    for (const auto& [el, n] : h.thermal_by_line) out << "line_thermal," << el << ',' << n << "\n";
    if (h.diverged_steps > 0) out << "solver_diverged,solver," << h.diverged_steps << "\n";
}

namespace {

void write_frontier_csv(const fs::path& path, const HcMetrics* hc, const LabeledPool& labeled,
                        const ScenarioPool& pool) {
    auto out = open_out(path);
    out << "scenario_id,total_ev,total_pv_kw,combined,label\n";
    if (!hc) return;
    for (long id : hc->frontier_ids) {
        const Scenario* s = nullptr;
        for (const auto& e : labeled.entries)
            if (e.scenario_id == id) {
                s = &pool[e.pool_index];
                break;
            }
        if (!s) continue;
        const auto t = totals_of(*s);
        out << id << ',' << fmt_g(t.ev) << ',' << fmt_g(t.pv_kw) << ',' << fmt_g(t.combined)
            << ",1\n";
    }
}

// Time series of system-wide consumption for one scenario: baseline load,
// EV draw, PV output, and the resulting net consumption.
void write_aggregate_load_csv(const fs::path& path, const Network& net, const Scenario& s,
                              const ProfileSet& ev_profiles, const ProfileSet& pv_profiles,
                              double charger_kw) {
    auto out = open_out(path);
    out << "t,baseline_kw,ev_kw,pv_kw,net_consumption_kw\n";
    const int T = net.baseline.T;
    for (int t = 0; t < T; ++t) {
        double baseline = 0.0;
        for (int b = 0; b < net.bus_count(); ++b) baseline += net.baseline.d_kw[b][t];
        double ev = 0.0, pv = 0.0;
        for (const auto& loc : s.locations) {
            if (loc.kind == DerKind::EV)
                ev -= ev_profiles.shapes[loc.profile_type][t] * (loc.count * charger_kw + loc.kw);
            else
                pv += pv_profiles.shapes[loc.profile_type][t] * loc.kw;
        }
        out << t << ',' << fmt_g(baseline) << ',' << fmt_g(ev) << ',' << fmt_g(pv) << ','
            << fmt_g(baseline + ev - pv) << "\n";
    }
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                    bool require_comparison) {
    if (require_comparison && cfg.strategies.size() < 2)
        throw ConfigError("strategy comparison needs at least 2 strategies");

    const ExperimentInputs in = setup_experiment(cfg);
    OracleConfig oracle_cfg;
    oracle_cfg.eps_bar = cfg.eps_bar;
    oracle_cfg.charger_kw = cfg.charger_kw;

    fs::create_directories(out_dir);
    const fs::path out(out_dir);

    // Wall-clock numbers go only into timings.csv so every other artifact
    // is byte-reproducible for a fixed seed.
    std::vector<std::string> timing_rows;

    const bool want_exhaustive =
        cfg.exhaustive || require_comparison || cfg.boundary_delta_pu > 0.0;
    std::optional<ExhaustiveResult> exhaustive;
    if (want_exhaustive) {
        const auto t0 = std::chrono::steady_clock::now();
        exhaustive = eval_exhaustive(in, oracle_cfg, cfg.workers);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        timing_rows.push_back("exhaustive,-1," + fmt_g(secs));
    }

    std::optional<SvmBoundary> boundary;
    if (cfg.boundary_delta_pu > 0.0 && exhaustive) {
        std::vector<std::vector<double>> features_pu = in.features;
        for (auto& x : features_pu)
            for (double& v : x) v /= in.net.base_kva;
        std::vector<int> labels;
        labels.reserve(exhaustive->verdicts.size());
        for (const auto& v : exhaustive->verdicts) labels.push_back(v.label);
        try {
            boundary = fit_boundary(features_pu, labels);
        } catch (const DegenerateData&) {
            // One-class pools have no boundary; fractions are omitted below.
        }
    }

    nlohmann::ordered_json report;
    {
        nlohmann::ordered_json jc;
        jc["network"] = cfg.network_path;
        jc["pool_size"] = in.pool.size();
        auto names = nlohmann::ordered_json::array();
        for (auto s : cfg.strategies) names.push_back(to_string(s));
        jc["strategies"] = std::move(names);
        jc["beta"] = cfg.beta;
        jc["B"] = cfg.B;
        jc["K"] = cfg.K;
        jc["eps_bar"] = cfg.eps_bar;
        jc["charger_kw"] = cfg.charger_kw;
        jc["episodes"] = cfg.episodes;
        jc["seed"] = cfg.seed;
        report["config"] = std::move(jc);
    }
    if (exhaustive) {
        nlohmann::ordered_json je;
        je["feasible_fraction"] = exhaustive->feasible_fraction;
        je["hc"] = exhaustive->hc ? hc_to_json(*exhaustive->hc) : nlohmann::ordered_json();
        je["violations"] = histogram_to_json(exhaustive->histogram);
        report["exhaustive"] = std::move(je);
        write_violations_csv(exhaustive->histogram, (out / "violations_exhaustive.csv").string());
    }

    bool any_feasible_anywhere = false;
    nlohmann::ordered_json strategies_json;
    for (const StrategyKind kind : cfg.strategies) {
        const std::string name = to_string(kind);
        QueryStrategy strategy{kind, cfg.beta};
        TrainConfig train_cfg;

        std::vector<EpisodeResult> episode_results;
        ViolationHistogram hist;
        for (int e = 0; e < cfg.episodes; ++e) {
            auto result = run_episode(in.net, in.pool, in.ev_profiles, in.pv_profiles, oracle_cfg,
                                      strategy, cfg.B, cfg.K, train_cfg, cfg.seed + e, cfg.workers,
                                      &in.features, &hist);
            timing_rows.push_back(name + ',' + std::to_string(e) + ',' +
                                  fmt_g(result.history.wall_seconds));
            episode_results.push_back(std::move(result));
        }

        // Round-aligned cumulative-HC curve, aggregated across episodes.
        const std::size_t rounds = episode_results.front().history.rounds.size();
        {
            auto csv = open_out(out / ("curves_" + name + ".csv"));
            csv << "round,labels,hc_ev_mean,hc_ev_std,hc_pv_kw_mean,hc_pv_kw_std,"
                   "hc_combined_mean,hc_combined_std\n";
            for (std::size_t r = 0; r < rounds; ++r) {
                std::vector<double> ev, pv, comb;
                for (const auto& er : episode_results) {
                    const auto& rec = er.history.rounds[r];
                    ev.push_back(rec.hc_ev);
                    pv.push_back(rec.hc_pv_kw);
                    comb.push_back(rec.hc_combined);
                }
                const auto m_ev = mean_std(ev), m_pv = mean_std(pv), m_c = mean_std(comb);
                csv << r << ',' << episode_results.front().history.rounds[r].labeled_total << ','
                    << fmt_g(m_ev.mean) << ',' << fmt_g(m_ev.std_dev) << ',' << fmt_g(m_pv.mean)
                    << ',' << fmt_g(m_pv.std_dev) << ',' << fmt_g(m_c.mean) << ','
                    << fmt_g(m_c.std_dev) << "\n";
            }
        }

        std::vector<double> final_ev, final_pv, final_comb, feasible_counts, fractions;
        std::optional<HcMetrics> hc0;
        for (std::size_t e = 0; e < episode_results.size(); ++e) {
            const auto& er = episode_results[e];
            double fev = 0.0, fpv = 0.0, fcomb = 0.0, nfeas = 0.0;
            try {
                const HcMetrics hc = hosting_capacity(er.labeled, in.pool);
                fev = hc.max_ev_count;
                fpv = hc.max_pv_kw;
                fcomb = hc.max_combined;
                any_feasible_anywhere = true;
                if (e == 0) hc0 = hc;
            } catch (const NoFeasibleScenario&) {
                // metrics stay zero for this episode
            }
            for (const auto& entry : er.labeled.entries) nfeas += entry.label;
            final_ev.push_back(fev);
            final_pv.push_back(fpv);
            final_comb.push_back(fcomb);
            feasible_counts.push_back(nfeas);
            if (boundary) {
                std::vector<std::vector<double>> queried;
                queried.reserve(er.labeled.entries.size());
                for (const auto& entry : er.labeled.entries)
                    queried.push_back(in.features[entry.pool_index]);
                fractions.push_back(boundary_fraction(queried, *boundary, in.net.base_kva,
                                                      cfg.boundary_delta_pu));
            }
        }

        write_frontier_csv(out / ("frontier_" + name + ".csv"), hc0 ? &*hc0 : nullptr,
                           episode_results.front().labeled, in.pool);
        if (hc0) {
            const Scenario* rep = nullptr;
            for (const auto& s : in.pool)
                if (s.id == hc0->argmax_combined_id) rep = &s;
            if (rep)
                write_aggregate_load_csv(out / ("aggregate_load_" + name + ".csv"), in.net, *rep,
                                         in.ev_profiles, in.pv_profiles, cfg.charger_kw);
        }
        write_violations_csv(hist, (out / ("violations_" + name + ".csv")).string());

        nlohmann::ordered_json js;
        js["episodes"] = cfg.episodes;
        js["labels_requested"] = episode_results.front().history.labels_requested;
        auto pack = [](const MeanStd& ms) {
            return nlohmann::ordered_json{{"mean", ms.mean}, {"std", ms.std_dev}};
        };
        js["hc_ev"] = pack(mean_std(final_ev));
        js["hc_pv_kw"] = pack(mean_std(final_pv));
        js["hc_combined"] = pack(mean_std(final_comb));
        js["feasible_found"] = pack(mean_std(feasible_counts));
        if (boundary) {
            js["boundary_fraction"] = pack(mean_std(fractions));
            js["boundary_fraction_per_episode"] = fractions;
        }
        if (exhaustive && exhaustive->hc) {
            // First round whose mean cumulative HC reaches the pool optimum.
            long first_labels = -1;
            for (std::size_t r = 0; r < rounds && first_labels < 0; ++r) {
                std::vector<double> comb;
                for (const auto& er : episode_results)
                    comb.push_back(er.history.rounds[r].hc_combined);
                if (mean_std(comb).mean >= exhaustive->hc->max_combined - 1e-9)
                    first_labels = episode_results.front().history.rounds[r].labeled_total;
            }
            js["first_to_max_labels"] = first_labels;
        }
        js["violations"] = histogram_to_json(hist);
        js["curve_csv"] = "curves_" + name + ".csv";
        strategies_json[name] = std::move(js);
    }
    report["strategies"] = std::move(strategies_json);

    if (require_comparison && exhaustive && exhaustive->hc) {
        std::string winner = "none";
        long best = -1;
        for (const StrategyKind kind : cfg.strategies) {
            const auto& js = report["strategies"][to_string(kind)];
            const long labels = js.value("first_to_max_labels", -1l);
            if (labels >= 0 && (best < 0 || labels < best)) {
                best = labels;
                winner = to_string(kind);
            }
        }
        report["first_to_max"] = {{"winner", winner}, {"labels", best}};
    }

    {
        auto out_json = open_out(out / "report.json");
        out_json << report.dump(2) << "\n";
    }
    {
        auto csv = open_out(out / "timings.csv");
        csv << "context,episode,seconds\n";
        for (const auto& row : timing_rows) csv << row << "\n";
    }

    if (!any_feasible_anywhere)
        throw NoFeasibleScenario("no feasible scenario was found by any episode");
}

}  // namespace hostcap
