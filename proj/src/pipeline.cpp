#include "prodisp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>

#include "prodisp/equilibrium.hpp"
#include "prodisp/errors.hpp"
#include "prodisp/fitting.hpp"
#include "prodisp/margsim.hpp"
#include "prodisp/markov.hpp"
#include "prodisp/panel.hpp"
#include "prodisp/superstats.hpp"
#include "prodisp/synthetic.hpp"

namespace prodisp {

namespace fs = std::filesystem;

OutputDir::OutputDir(const std::string& target) : target_(target), tmp_(target + ".tmp-partial") {
    fs::remove_all(tmp_);
    fs::create_directories(tmp_);
}

OutputDir::~OutputDir() = default; // partial dir intentionally left on failure

std::string OutputDir::path(const std::string& filename) const {
    return (fs::path(tmp_) / filename).string();
}

void OutputDir::note_file(const std::string& filename) { manifest_.push_back(filename); }

void OutputDir::finalize() {
    if (finalized_) return;
    fs::remove_all(target_);
    fs::create_directories(fs::path(target_).parent_path().empty()
                               ? fs::path(".")
                               : fs::path(target_).parent_path());
    fs::rename(tmp_, target_);
    finalized_ = true;
}

void write_json(const Json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << '\n';
}

namespace {

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& columns) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << header << '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    char buf[64];
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.12g", columns[c][r]);
            out << (c ? "," : "") << buf;
        }
        out << '\n';
    }
    if (!out) throw Error("write failed for " + path);
}

Json fit_to_json(const ParetoFit& f, const std::string& label) {
    return Json{{"label", label},      {"method", f.method},   {"mu_hat", f.mu_hat},
                {"c0_hat", f.c0_hat},  {"fit_lo", f.fit_lo},   {"fit_hi", f.fit_hi},
                {"stderr", f.std_error}, {"n_tail", f.n_tail}};
}

Json gb2_to_json(const Gb2Fit& f) {
    return Json{{"a", f.params.a},
                {"b", f.params.b},
                {"p", f.params.p},
                {"q", f.params.q},
                {"tail_index", f.params.tail_index()},
                {"tail_index_stderr", f.tail_index_std_error},
                {"log_likelihood", f.log_likelihood},
                {"grad_norm", f.grad_norm},
                {"winning_start", f.winning_start},
                {"starts", f.starts.size()}};
}

void emit_rank_csv(OutputDir& out, const std::string& name,
                   const std::vector<RankPoint>& pts) {
    std::vector<double> c(pts.size()), s(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        c[i] = pts[i].c;
        s[i] = pts[i].cumulative;
    }
    write_csv(out.path(name), "c,cumulative", {c, s});
    out.note_file(name);
}

// per-year hill fits and the delta estimate of the Fig.-11 loop; the
// worker fit prefers a deep threshold at the year's top-quantile firm
// productivity (past the mixture crossover), falling back to the plain
// weighted tail fraction on small years
ParetoFit worker_fit_for_year(const std::vector<double>& firms, const WeightedSample& ws,
                              double quantile, double fallback_fraction) {
    std::vector<double> sorted(firms);
    std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());
    const auto pos = static_cast<std::size_t>(quantile * static_cast<double>(sorted.size()));
    if (pos < sorted.size()) {
        try {
            return hill_weighted_threshold(ws.values, ws.weights, sorted[pos]);
        } catch (const ValidationError&) {
        }
    }
    return hill_weighted(ws.values, ws.weights, fallback_fraction);
}

Json delta_by_year(const Panel& panel, double firm_tail, double worker_tail,
                   double worker_quantile) {
    Json by_year = Json::object();
    for (const auto& [year, recs] : panel.by_year) {
        Panel one;
        one.by_year[year] = recs;
        Json entry;
        try {
            const std::vector<double> yearly_firms = firm_sample(one);
            const ParetoFit ff = hill_estimator(yearly_firms, firm_tail);
            const WeightedSample ws = worker_weighted_sample(one);
            const ParetoFit wf =
                worker_fit_for_year(yearly_firms, ws, worker_quantile, worker_tail);
            entry["mu_f"] = ff.mu_hat;
            entry["mu_f_stderr"] = ff.std_error;
            entry["mu_w"] = wf.mu_hat;
            entry["mu_w_stderr"] = wf.std_error;
            if (wf.mu_hat > ff.mu_hat && ff.mu_hat > 1.0) {
                entry["delta_hat"] = delta_of(ff.mu_hat, wf.mu_hat);
                // first-order error propagation through delta_of
                const double m = std::min(ff.mu_hat - 1.0, 1.0);
                entry["delta_stderr"] =
                    std::hypot(wf.std_error, ff.std_error * (ff.mu_hat < 2.0 ? 2.0 : 1.0)) / m;
            } else {
                entry["delta_hat"] = nullptr;
                entry["note"] = "index ordering violated; delta undefined";
            }
        } catch (const Error& e) {
            entry["error"] = e.what();
        }
        by_year[std::to_string(year)] = entry;
    }
    return by_year;
}

} // namespace

Json cmd_equilibrium(const Scenario& sc, OutputDir& out) {
    const FirmDistribution dist = sc.firm_distribution();
    Json summary;
    summary["schema"] = "prodisp-summary/1";
    summary["task"] = "equilibrium";
    summary["firm_kind"] = dist.kind_name();

    std::vector<double> betas;
    if (sc.has_table("equilibrium")) {
        if (sc.table("equilibrium").count("beta")) betas = sc.numbers("equilibrium", "beta");
        if (sc.table("equilibrium").count("demand")) {
            const double d = sc.num("equilibrium", "demand");
            const double solved = beta_of_demand(dist, d);
            summary["beta_of_demand"] = {{"demand", d}, {"beta", solved}};
            if (betas.empty()) betas.push_back(solved);
        }
    }
    if (betas.empty()) throw ValidationError("equilibrium: [equilibrium] needs beta or demand");

    Json states = Json::array();
    int idx = 0;
    for (double b : betas) {
        const EquilibriumState st = worker_distribution(dist, b);
        Json s;
        s["beta"] = b;
        s["demand"] = st.demand;
        s["log_partition"] = st.log_partition;
        s["partition_value"] = st.partition_value;
        s["stored_mass"] = st.stored_mass();
        const std::string name = "worker_cdf_" + std::to_string(idx) + ".csv";
        write_csv(out.path(name), "c,survival", {st.support, st.survival});
        out.note_file(name);
        s["file"] = name;
        states.push_back(s);
        ++idx;
    }
    summary["states"] = states;

    if (dist.kind() == FirmDistribution::Kind::UniformGrid && !betas.empty()) {
        const UniformClosedForm cf =
            uniform_closed_form(dist.grid_spacing(), dist.grid_count(), betas.front());
        summary["uniform_closed_form"] = {{"z_approx", cf.z_approx},
                                          {"demand_approx", cf.demand_approx},
                                          {"z_exact", cf.z_exact},
                                          {"demand_exact", cf.demand_exact},
                                          {"small_spacing_ok", cf.small_spacing_ok},
                                          {"large_range_ok", cf.large_range_ok}};
    }
    return summary;
}

Json cmd_stationary(const Scenario& sc, OutputDir& out) {
    const MarkovConfig cfg = sc.markov_config();
    const StationaryState st = stationary_solution(cfg);
    std::vector<double> c(st.counts.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = static_cast<double>(i + 1);
    write_csv(out.path("stationary.csv"), "c,count", {c, st.counts});
    out.note_file("stationary.csv");

    const PowerlawApprox ap = stationary_powerlaw_approx(cfg);
    const std::vector<double> res = master_residual(cfg, st.counts);
    double max_res = 0.0;
    for (double r : res) max_res = std::max(max_res, std::abs(r));

    Json summary;
    summary["schema"] = "prodisp-summary/1";
    summary["task"] = "stationary";
    summary["config"] = {{"a_plus", cfg.a_plus},
                         {"a_minus", cfg.a_minus},
                         {"rate_exponent", cfg.rate_exponent},
                         {"entry_rate", cfg.entry_rate},
                         {"c_max", cfg.c_max}};
    summary["total_firms"] = st.total_firms;
    summary["aggregate_index"] = st.aggregate_index;
    summary["truncated_tail_fraction"] = st.truncated_tail_fraction;
    summary["powerlaw_approx"] = {{"c_star", ap.c_star},
                                  {"exponent", ap.exponent},
                                  {"amplitude", ap.amplitude},
                                  {"iterations", ap.iterations},
                                  {"max_rel_deviation", ap.max_rel_deviation}};
    summary["max_master_residual_over_p"] = max_res / cfg.entry_rate;
    // half-integer window endpoints against the lattice bias
    const double hi = std::min(static_cast<double>(cfg.c_max), ap.c_star / 10.0) + 0.5;
    summary["count_exponent_hill"] = 1.0 + hill_window_weighted(c, st.counts, 10.5, hi);
    return summary;
}

Json cmd_simulate(const Scenario& sc, OutputDir& out) {
    const MarkovConfig cfg = sc.markov_config();
    SimulateOptions opts;
    opts.warmup_fraction = sc.num_or("simulate", "warmup_fraction", 0.2);
    opts.replicas = static_cast<int>(sc.integer_or("simulate", "replicas", 4));
    opts.state_cap = sc.integer_or("simulate", "state_cap", 0);
    const double horizon = sc.num_or("simulate", "horizon", 1000.0);

    const SimulationResult sim = simulate(cfg, horizon, sc.seed, opts);
    const StationaryState st = stationary_solution(cfg);
    const std::size_t n = sim.mean_occupancy.size();
    std::vector<double> c(n), exact(n);
    for (std::size_t i = 0; i < n; ++i) {
        c[i] = static_cast<double>(i + 1);
        exact[i] = st.counts[i];
    }
    write_csv(out.path("empirical.csv"), "c,count", {c, sim.mean_occupancy});
    out.note_file("empirical.csv");
    write_csv(out.path("exact.csv"), "c,count", {c, exact});
    out.note_file("exact.csv");

    Json summary;
    summary["schema"] = "prodisp-summary/1";
    summary["task"] = "simulate";
    summary["seed"] = sc.seed;
    summary["horizon"] = sim.horizon;
    summary["events"] = sim.events;
    summary["replicas"] = opts.replicas;
    summary["state_cap"] = sim.state_cap;
    summary["measured_time"] = sim.measured_time;
    return summary;
}

Json cmd_superstat(const Scenario& sc, OutputDir& out) {
    const SuperstatConfig cfg = sc.superstat_config();
    const SuperWorker w = worker_dist_super(cfg);
    write_csv(out.path("worker_super_cdf.csv"), "c,survival", {w.support, w.survival});
    out.note_file("worker_super_cdf.csv");

    // measured tail index from the deep tabulated tail
    std::vector<double> mass(w.support.size(), 0.0);
    for (std::size_t i = 0; i + 1 < w.support.size(); ++i)
        mass[i] = w.survival[i] - w.survival[i + 1];
    double lo_c = w.support.front();
    for (std::size_t i = 0; i < w.support.size(); ++i)
        if (w.survival[i] > 1e-3) lo_c = w.support[i];
    const double mu_measured = hill_window_weighted(w.support, mass, lo_c, w.support.back());

    Json summary;
    summary["schema"] = "prodisp-summary/1";
    summary["task"] = "superstat";
    summary["mu_f"] = w.mu_f;
    summary["gamma"] = w.gamma;
    summary["delta"] = delta_of_gamma(w.mu_f, w.gamma);
    summary["mu_w"] = w.mu_w_predicted;
    summary["mu_w_measured"] = mu_measured;
    summary["beta_max"] = cfg.beta_max;
    const double c_check = 1e3 / cfg.beta_max;
    summary["asymptotic_ratio_at_1e3_over_beta_max"] =
        generalized_boltzmann(cfg, c_check).value / bfactor_asymptotic(cfg, c_check);
    return summary;
}

Json cmd_fit(const Scenario& sc, const std::string& input_csv, OutputDir& out) {
    if (input_csv.empty()) throw ValidationError("fit: an input panel CSV is required");
    const IngestResult ingested = ingest_panel(input_csv);
    const TrimResult trimmed = trim_outliers(ingested.panel, sc.trim_top);

    const double firm_tail = sc.num_or("fit", "tail_fraction", 0.1);
    const double worker_tail = sc.num_or("fit", "worker_tail_fraction", firm_tail);
    const std::string method = sc.str_or("fit", "method", "both");
    const bool worker_weighted = sc.flag_or("fit", "worker_weighted", true);

    Json summary;
    summary["schema"] = "prodisp-summary/1";
    summary["task"] = "fit";
    summary["input"] = input_csv;
    summary["records"] = ingested.panel.record_count();
    summary["rejected_rows"] = Json::array();
    for (const auto& r : ingested.rejected)
        summary["rejected_rows"].push_back({{"line", r.line}, {"reason", r.reason}});
    Json year_counts = Json::object();
    for (const auto& [y, n] : ingested.panel.year_counts())
        year_counts[std::to_string(y)] = n;
    summary["year_counts"] = year_counts;
    summary["trim_top"] = sc.trim_top;
    summary["trimmed"] = trimmed.audit.size();
    summary["weighting"] = "firm-size"; // L copies of c per firm

    const std::vector<double> firms = firm_sample(trimmed.panel);
    Json fits = Json::array();
    if (method == "hill" || method == "both") {
        const ParetoFit hf = hill_estimator(firms, firm_tail);
        fits.push_back(fit_to_json(hf, "firm-hill"));
    }
    if (method == "gb2" || method == "both") {
        try {
            const Gb2Fit gf = gb2_mle(firms);
            summary["gb2"] = gb2_to_json(gf);
            fits.push_back(fit_to_json(pareto_index_from_gb2(gf), "firm-gb2"));
        } catch (const Gb2Error& e) {
            // pareto-like data: the GB2 likelihood peaks on the family
            // boundary; keep the diagnostics and carry on with hill
            if (method == "gb2") throw;
            summary["gb2"] = {{"converged", false},
                              {"message", e.what()},
                              {"best_a", e.best.found.a},
                              {"best_b", e.best.found.b},
                              {"best_p", e.best.found.p},
                              {"best_q", e.best.found.q},
                              {"best_tail_index", e.best.found.tail_index()}};
        }
    }
    if (worker_weighted) {
        const WeightedSample ws = worker_weighted_sample(trimmed.panel);
        summary["total_worker_weight"] = ws.total_weight;
        const double quantile = sc.num_or("fit", "worker_threshold_quantile", 0.0025);
        fits.push_back(
            fit_to_json(worker_fit_for_year(firms, ws, quantile, worker_tail), "worker-hill"));
        emit_rank_csv(out, "worker_rank.csv", rank_size_weighted(ws.values, ws.weights));
    }
    const FitRange range = select_fit_range(firms);
    summary["selected_range"] = {{"fit_lo", range.fit_lo},
                                 {"fit_hi", range.fit_hi},
                                 {"ks_distance", range.ks_distance},
                                 {"n_tail", range.n_tail}};
    summary["fits"] = fits;
    summary["worker_threshold_quantile"] = sc.num_or("fit", "worker_threshold_quantile", 0.0025);
    emit_rank_csv(out, "firm_rank.csv", rank_size(firms));

    if (sc.flag_or("fit", "robustness", false)) {
        Json rob = Json::array();
        for (long cut : {10L, 20L}) {
            const TrimResult t = trim_outliers(ingested.panel, cut);
            const ParetoFit f = hill_estimator(firm_sample(t.panel), firm_tail);
            rob.push_back({{"trim_top", cut}, {"mu_hat", f.mu_hat}, {"stderr", f.std_error}});
        }
        summary["robustness"] = rob;
    }
    summary["delta_by_year"] =
        delta_by_year(trimmed.panel, firm_tail, worker_tail,
                      sc.num_or("fit", "worker_threshold_quantile", 0.0025));
    return summary;
}

Json cmd_mcarlo(const Scenario& sc, OutputDir& out) {
    const long n = sc.integer_or("mcarlo", "n", 100000);
    const double mu = sc.num_or("mcarlo", "mu", 1.5);
    const double c0 = sc.num_or("mcarlo", "c0", 1.0);
    const double tail = sc.num_or("mcarlo", "tail_fraction", 0.1);
    const LaborShareLaw law = sc.has_table("labor_share") ? sc.labor_share()
                                                          : LaborShareLaw::uniform(0.5, 1.0);
    Rng rng(sc.seed);
    std::vector<double> c(static_cast<std::size_t>(n));
    for (auto& v : c) v = rng.pareto(mu, c0);
    const std::vector<double> cm =
        marginal_from_average(c, law, child_seed(sc.seed, 1));

    emit_rank_csv(out, "average_rank.csv", rank_size(c));
    emit_rank_csv(out, "marginal_rank.csv", rank_size(cm));

    const TailComparison cmp = verify_tail_equality(c, cm, tail);
    Json summary;
    summary["schema"] = "prodisp-summary/1";
    summary["task"] = "mcarlo";
    summary["seed"] = sc.seed;
    summary["n"] = n;
    summary["mu"] = mu;
    summary["fits"] = Json::array({fit_to_json(cmp.average, "average"),
                                   fit_to_json(cmp.marginal, "marginal")});
    summary["difference"] = cmp.difference;
    summary["combined_3sigma"] = cmp.combined_3sigma;
    summary["equal"] = cmp.equal;
    if (!cmp.note.empty()) summary["note"] = cmp.note;
    return summary;
}

Json cmd_gen(const Scenario& sc, OutputDir& out) {
    const FirmDistribution dist = sc.firm_distribution();
    const DemandLaw law = sc.demand_law();
    const GenerateParams params = sc.generate_params();
    const SyntheticEconomy eco = generate_synthetic_economy(dist, law, params, sc.seed);
    write_panel_csv(eco.panel, out.path("panel.csv"));
    out.note_file("panel.csv");

    Json summary;
    summary["schema"] = "prodisp-summary/1";
    summary["task"] = "gen";
    summary["seed"] = sc.seed;
    summary["years"] = params.years;
    summary["firms"] = params.firms;
    summary["workers_per_period"] = params.workers;
    summary["periods_per_year"] = params.periods_per_year;
    summary["records"] = eco.panel.record_count();
    summary["mean_ceiling"] = eco.mean_ceiling;
    double dmin = 1e300, dmax = -1e300;
    for (double d : eco.demand_draws) {
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
    }
    summary["demand_range"] = {dmin, dmax};
    return summary;
}

Json cmd_pipeline(const Scenario& sc, OutputDir& out) {
    Json summary;
    summary["schema"] = "prodisp-summary/1";
    summary["task"] = "pipeline";
    const auto stage = [&summary](const char* name, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            throw Error(std::string("pipeline stage '") + name + "' failed: " + e.what() +
                        " (partial outputs preserved)");
        }
        summary["stages"].push_back(name);
    };

    std::string panel_path = sc.str_or("pipeline", "input", "");
    bool generated = false;
    if (panel_path.empty()) {
        stage("gen", [&] {
            summary["gen"] = cmd_gen(sc, out);
            panel_path = out.path("panel.csv");
            generated = true;
        });
    }
    stage("fit", [&] {
        summary["fit"] = cmd_fit(sc, panel_path, out);
        // keep run directories byte-identical: the staging path of a
        // generated panel is run-specific, its name is not
        if (generated) summary["fit"]["input"] = "panel.csv";
    });
    stage("delta", [&] {
        // mean yearly delta-hat, the closed-loop recovery of the demand law
        const Json& by_year = summary["fit"]["delta_by_year"];
        double acc = 0.0, acc2 = 0.0;
        long cnt = 0;
        for (const auto& [y, e] : by_year.items()) {
            if (!e.contains("delta_hat") || e["delta_hat"].is_null()) continue;
            const double d = e["delta_hat"].get<double>();
            acc += d;
            acc2 += d * d;
            ++cnt;
        }
        Json agg;
        agg["years_used"] = cnt;
        if (cnt > 0) {
            const double mean = acc / static_cast<double>(cnt);
            agg["delta_mean"] = mean;
            if (cnt > 1)
                agg["delta_stderr"] = std::sqrt(
                    std::max(0.0, (acc2 / cnt - mean * mean) / static_cast<double>(cnt - 1)));
        }
        if (sc.has_table("demand")) agg["delta_true"] = sc.num("demand", "delta");
        summary["delta"] = agg;
    });
    return summary;
}

} // namespace prodisp
