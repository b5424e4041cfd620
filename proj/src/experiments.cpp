#include "sgdlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace sgdlab {

namespace {

using json = nlohmann::json;

std::string fmt(double v) { return format_double(v); }

Point start_point(const ExperimentConfig& cfg, const CommandOptions& opt) {
    if (opt.x0) return Point(cfg.dim, *opt.x0);
    return cfg.x0.front();
}

double chosen_level(const ExperimentConfig& cfg, const CommandOptions& opt) {
    return opt.level ? *opt.level : cfg.level_values().front();
}

std::string run_id_for(const CommandOptions& opt, std::uint64_t seed) {
    return opt.run_id.empty() ? "run_" + std::to_string(seed) : opt.run_id;
}

ChannelCheck check_channel(const ExperimentConfig& cfg, const NoiseOracle& o, double beta, BoundsChannel channel,
                           std::uint64_t horizon) {
    ChannelCheck c;
    c.channel = channel;
    const StepSchedule s = make_schedule(cfg, o, beta, channel);
    c.summability = check_summability(s, horizon);
    c.inf = check_inf_condition(s, horizon);
    try {
        c.ratio = check_monotone_ratio(s, horizon);
    } catch (const std::domain_error& e) {
        c.ratio_error = e.what();
    }
    return c;
}

json channel_json(const ChannelCheck& c) {
    json j;
    j["channel"] = to_string(c.channel);
    j["i"] = {{"partial_sum", c.summability.partial_sum},
              {"tail_bound", c.summability.tail_bound ? json(*c.summability.tail_bound) : json(nullptr)},
              {"verdict", to_string(c.summability.verdict)},
              {"passed", c.summability.passed()}};
    j["ii"] = {{"min_value", c.inf.min_value},
               {"argmin", c.inf.argmin},
               {"limit", c.inf.limit ? json(*c.inf.limit) : json(nullptr)},
               {"passed", c.inf.passed}};
    if (c.ratio) {
        j["iii"] = {{"worst", c.ratio->worst},
                    {"worst_k", c.ratio->worst_k},
                    {"smallest", c.ratio->smallest},
                    {"smallest_k", c.ratio->smallest_k},
                    {"passed", c.ratio->passed}};
    } else {
        j["iii"] = {{"error", c.ratio_error}, {"passed", false}};
    }
    j["passed"] = c.passed();
    return j;
}

void print_channel(std::ostream& os, const ChannelCheck& c) {
    auto mark = [](bool ok) { return ok ? "pass" : "FAIL"; };
    os << "  [" << to_string(c.channel) << "]\n";
    os << "    i   summability  " << mark(c.summability.passed()) << "  sum=" << fmt(c.summability.partial_sum);
    if (c.summability.tail_bound) os << " tail<=" << fmt(*c.summability.tail_bound);
    os << " (" << to_string(c.summability.verdict) << ")\n";
    os << "    ii  inf          " << mark(c.inf.passed) << "  min=" << fmt(c.inf.min_value) << " at k=" << c.inf.argmin;
    if (c.inf.limit) os << " limit=" << fmt(*c.inf.limit);
    os << "\n";
    if (c.ratio) {
        os << "    iii ratio        " << mark(c.ratio->passed) << "  max=" << fmt(c.ratio->worst)
           << " at k=" << c.ratio->worst_k << ", min=" << fmt(c.ratio->smallest) << " at k=" << c.ratio->smallest_k
           << "\n";
    } else {
        os << "    iii ratio        FAIL  " << c.ratio_error << "\n";
    }
}

/// Shared error mapping for all subcommands.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return exit_io_error;
    } catch (const MissingArtifact& e) {
        err << "missing artifact: " << e.what() << "\n";
        return exit_missing_artifact;
    } catch (const AssumptionError& e) {
        err << "assumption check failed: " << e.what() << " (use --force to override)\n";
        return exit_assumption_failure;
    } catch (const NoDataError& e) {
        err << "no data: " << e.what() << "\n";
        return exit_assumption_failure;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "I/O error: " << e.what() << "\n";
        return exit_io_error;
    }
}

/// Fails early with an I/O error when dir cannot hold output files.
void ensure_writable_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError(dir.string() + ": cannot create output directory");
}

}  // namespace

ResolvedConfig resolve(const CommandOptions& opt) {
    if (opt.config.empty()) throw ConfigError("--config is required");
    if (!std::filesystem::exists(opt.config)) throw IoError(opt.config.string() + ": no such config file");
    ResolvedConfig r;
    r.cfg = load_config(opt.config);
    if (opt.seed) r.cfg.seed = *opt.seed;
    if (opt.out) r.cfg.out = opt.out->string();
    if (opt.channel) r.cfg.channel = *opt.channel;
    r.out = r.cfg.out;
    r.channel = r.cfg.channel;
    r.provenance = {to_toml(r.cfg), r.cfg.seed};
    return r;
}

std::vector<LevelCheck> check_assumptions(const ExperimentConfig& cfg, std::uint64_t horizon) {
    const Objective f = make_objective(cfg);
    std::vector<LevelCheck> out;
    for (double level : cfg.level_values()) {
        const NoiseOracle o = make_oracle(cfg, level, f.beta());
        LevelCheck lc;
        lc.level = level;
        lc.alpha = make_schedule(cfg, o, f.beta(), BoundsChannel::derived).alpha.coef;
        lc.derived = check_channel(cfg, o, f.beta(), BoundsChannel::derived, horizon);
        lc.paper = check_channel(cfg, o, f.beta(), BoundsChannel::paper, horizon);
        out.push_back(std::move(lc));
    }
    return out;
}

TableResult run_table(const ExperimentConfig& cfg, bool force, unsigned workers) {
    const Objective f = make_objective(cfg);
    TableResult res;
    res.table.level_name = std::string(cfg.level_name());
    for (double level : cfg.level_values()) {
        const NoiseOracle o = make_oracle(cfg, level, f.beta());
        const StepSchedule s = make_schedule(cfg, o, f.beta(), cfg.channel);
        for (const auto& x0 : cfg.x0) {
            RunConfig rc = make_run_config(cfg, x0, cfg.seed);
            rc.force = force;
            const auto runs = run_ensemble(rc, f, o, s, cfg.seeds, workers);
            std::vector<LimitClassification> cls;
            cls.reserve(runs.size());
            for (const auto& r : runs) cls.push_back(classify_limit(r, f));
            const std::size_t row = res.table.rows.size();
            res.table.rows.push_back(make_outcome_row(x0, level, cls, runs, kGradGate));
            for (std::size_t i = 0; i < runs.size(); ++i)
                res.runs.push_back({row, runs[i].seed, cls[i], runs[i].final_x, runs[i].min_grad_norm,
                                    runs[i].numeric_failure});
        }
    }
    return res;
}

std::vector<std::uint64_t> parse_probe_spec(const std::string& spec) {
    auto num = [&](const std::string& s) -> std::uint64_t {
        std::size_t pos = 0;
        std::uint64_t v = 0;
        try {
            v = std::stoull(s, &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        if (pos != s.size() || s.empty() || s[0] == '-') throw std::invalid_argument("bad probe spec '" + spec + "'");
        return v;
    };
    std::vector<std::uint64_t> ks;
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() < 2 || parts.size() > 3) throw std::invalid_argument("bad probe spec '" + spec + "'");
        const std::uint64_t a = num(parts[0]), b = num(parts[1]);
        const std::uint64_t step = parts.size() == 3 ? num(parts[2]) : 1;
        if (step == 0 || b < a) throw std::invalid_argument("bad probe spec '" + spec + "'");
        for (std::uint64_t k = a; k <= b; k += step) ks.push_back(k);
    } else {
        std::stringstream ss(spec);
        for (std::string p; std::getline(ss, p, ',');) ks.push_back(num(p));
    }
    if (ks.empty()) throw std::invalid_argument("empty probe spec");
    return ks;
}

std::size_t resolve_component(const Objective& f, const std::string& id) {
    const auto& cat = f.catalog();
    if (!id.empty() && std::all_of(id.begin(), id.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        const auto i = std::stoull(id);
        if (i >= cat.size()) throw MissingArtifact("no catalog component " + id);
        return i;
    }
    const auto kind = parse_critical_kind(id);
    if (kind) {
        for (std::size_t i = 0; i < cat.size(); ++i)
            if (cat[i].kind == *kind) return i;
    }
    throw MissingArtifact("no catalog component '" + id + "'");
}

int cmd_check(const CommandOptions& opt, std::ostream& os, std::ostream& err) {
    return guarded(err, [&] {
        const ResolvedConfig r = resolve(opt);
        const auto checks = check_assumptions(r.cfg);
        const Objective f = make_objective(r.cfg);
        bool all = true;
        json j;
        j["master_seed"] = r.provenance.master_seed;
        j["config_toml"] = r.provenance.config_toml;
        j["selected_channel"] = to_string(r.channel);
        j["horizon"] = kDefaultCheckHorizon;
        j["levels"] = json::array();
        os << "oracle " << to_string(r.cfg.kind) << ", checks up to k = " << kDefaultCheckHorizon << "\n";
        for (const auto& lc : checks) {
            const NoiseOracle o = make_oracle(r.cfg, lc.level, f.beta());
            os << r.cfg.level_name() << " = " << fmt(lc.level) << ", alpha = " << fmt(lc.alpha)
               << ", reference bound: " << caption_bound(o) << "\n";
            print_channel(os, lc.derived);
            print_channel(os, lc.paper);
            all = all && lc.on(r.channel).passed();
            j["levels"].push_back({{"level", lc.level},
                                   {"alpha", lc.alpha},
                                   {"derived", channel_json(lc.derived)},
                                   {"paper", channel_json(lc.paper)}});
        }
        j["passed"] = all;
        os << "selected channel " << to_string(r.channel) << ": " << (all ? "all conditions hold" : "FAILED") << "\n";
        ensure_writable_dir(r.out);
        write_text_file(r.out / "check.json", j.dump(2) + "\n");
        return all ? exit_ok : exit_assumption_failure;
    });
}

int cmd_run(const CommandOptions& opt, std::ostream& os, std::ostream& err) {
    return guarded(err, [&] {
        const ResolvedConfig r = resolve(opt);
        const Objective f = make_objective(r.cfg);
        const double level = chosen_level(r.cfg, opt);
        const NoiseOracle o = make_oracle(r.cfg, level, f.beta());
        const StepSchedule s = make_schedule(r.cfg, o, f.beta(), r.channel);
        if (!opt.force) {
            const ChannelCheck c = check_channel(r.cfg, o, f.beta(), r.channel, kDefaultCheckHorizon);
            if (!c.passed()) {
                print_channel(err, c);
                throw AssumptionError("conditions i-iii do not all hold on the " + std::string(to_string(r.channel)) +
                                      " channel");
            }
        }
        ensure_writable_dir(r.out);

        RunConfig rc = make_run_config(r.cfg, start_point(r.cfg, opt), r.cfg.seed);
        rc.force = opt.force;
        const TrajectoryRecord rec = run_trajectory(rc, f, o, s);
        const LimitClassification cls = classify_limit(rec, f);

        RunMeta meta{r.provenance, run_id_for(opt, r.cfg.seed), rc.x0, level, std::string(to_string(r.channel))};
        const Trace trace = rec.merged();
        std::ostringstream csv;
        write_trajectory_csv(csv, trace, meta);
        write_text_file(r.out / (meta.run_id + ".csv"), csv.str());
        write_text_file(r.out / (meta.run_id + ".json"), run_report_json(rec, cls, meta));
        if (opt.plot && f.dim() == 1) {
            PlotOptions po;
            po.title = meta.run_id + ": x0 = " + fmt(rc.x0[0]) + ", " + std::string(r.cfg.level_name()) + " = " +
                       fmt(level);
            write_text_file(r.out / (meta.run_id + ".svg"), render_svg(f, trace, r.provenance, po));
        }
        os << meta.run_id << ": " << to_string(cls.label) << " after k = " << rec.final_k << ", x = " << fmt(rec.final_x[0])
           << ", F = " << fmt(rec.final_f) << ", above limit: " << to_string(cls.above_limit)
           << (rec.numeric_failure ? ", numeric failure at k = " + std::to_string(rec.failure_k) : std::string())
           << "\n";
        return exit_ok;
    });
}

int cmd_table(const CommandOptions& opt, std::ostream& os, std::ostream& err) {
    return guarded(err, [&] {
        const ResolvedConfig r = resolve(opt);
        ensure_writable_dir(r.out);
        const TableResult res = run_table(r.cfg, opt.force, opt.workers);
        os << render_table(res.table);
        std::ostringstream csv;
        write_table_csv(csv, res.table, r.provenance);
        write_text_file(r.out / "table.csv", csv.str());
        write_text_file(r.out / "table.json", table_json(res.table, r.provenance));

        std::ostringstream runs;
        runs << "# sgdlab per-seed outcomes\n# master_seed = " << r.provenance.master_seed << "\n";
        runs << "row,seed,label,above_limit,final_x,min_grad_norm,numeric_failure\n";
        for (const auto& run : res.runs) {
            runs << run.row << ',' << run.seed << ',' << to_string(run.cls.label) << ','
                 << to_string(run.cls.above_limit) << ',' << (run.final_x.empty() ? "nan" : fmt(run.final_x[0])) << ','
                 << fmt(run.min_grad_norm) << ',' << (run.numeric_failure ? 1 : 0) << '\n';
        }
        write_text_file(r.out / "table_runs.csv", runs.str());
        return exit_ok;
    });
}

int cmd_xi(const CommandOptions& opt, std::ostream& os, std::ostream& err) {
    return guarded(err, [&] {
        const ResolvedConfig r = resolve(opt);
        const std::string id = run_id_for(opt, r.cfg.seed);
        const auto csv_path = r.out / (id + ".csv");
        const auto json_path = r.out / (id + ".json");
        if (!std::filesystem::exists(csv_path) || !std::filesystem::exists(json_path))
            throw MissingArtifact(csv_path.string() + " (run `sgdlab run` first)");

        const json report = json::parse(read_text_file(json_path));
        // The run's own embedded config is authoritative for the oracle and schedule.
        const ExperimentConfig run_cfg = parse_config(report.at("config_toml").get<std::string>(), json_path.string());
        const Objective f = make_objective(run_cfg);
        const double level = report.at("level").get<double>();
        const NoiseOracle o = make_oracle(run_cfg, level, f.beta());
        BoundsChannel channel = r.channel;
        if (!opt.channel) channel = parse_bounds_channel(report.at("channel").get<std::string>()).value_or(r.channel);
        const StepSchedule s = make_schedule(run_cfg, o, f.beta(), channel);
        const double f_inf = report.at("classification").at("f_inf").get<double>();

        std::istringstream csv(read_text_file(csv_path));
        TrajectoryRecord rec;
        rec.history = read_trajectory_csv(csv).trace;
        rec.seed = report.at("master_seed").get<std::uint64_t>();

        const auto ks = parse_probe_spec(opt.probes);
        XiProbeSummary sum;
        try {
            sum = xi_probe(rec, ks, f, o, s, f_inf, r.cfg.gamma, r.cfg.n_draws, rec.seed);
        } catch (const std::out_of_range& e) {
            throw MissingArtifact(std::string("probe outside the recorded iterates: ") + e.what());
        }

        json j;
        j["run_id"] = id;
        j["master_seed"] = rec.seed;
        j["config_toml"] = report.at("config_toml");
        j["channel"] = to_string(channel);
        j["f_inf"] = f_inf;
        j["gamma"] = sum.gamma;
        j["n_draws"] = r.cfg.n_draws;
        j["probes"] = json::array();
        os << std::left << std::setw(8) << "k" << std::setw(24) << "x_k" << std::setw(24) << "gamma_required"
           << "status\n";
        for (const auto& p : sum.probes) {
            os << std::setw(8) << p.k << std::setw(24) << fmt(p.x_k[0]) << std::setw(24) << fmt(p.gamma_required)
               << to_string(p.status) << "\n";
            j["probes"].push_back({{"k", p.k},
                                   {"x_k", p.x_k},
                                   {"f_k", p.f_k},
                                   {"e_cond", p.e_cond},
                                   {"e_cond_stderr", p.e_cond_stderr},
                                   {"lhs", p.lhs},
                                   {"rhs_unit", p.rhs_unit},
                                   {"gamma_required", std::isinf(p.gamma_required) ? json("inf") : json(p.gamma_required)},
                                   {"status", to_string(p.status)}});
        }
        std::string verdict;
        if (sum.consistent) {
            verdict = "consistent with some gamma0 < 1";
        } else if (sum.first_violation_k) {
            verdict = "violated at k = " + std::to_string(*sum.first_violation_k);
        } else {
            verdict = "inconsistent";
        }
        j["max_gamma_required"] = sum.max_gamma_required;
        j["any_void"] = sum.any_void;
        j["consistent"] = sum.consistent;
        j["first_violation_k"] = sum.first_violation_k ? json(*sum.first_violation_k) : json(nullptr);
        j["verdict"] = verdict;
        j["caveat"] = sum.caveat;
        os << "max gamma_required = " << fmt(sum.max_gamma_required) << (sum.any_void ? " (some probes void)" : "")
           << "\n" << verdict << "\n" << sum.caveat << "\n";
        write_text_file(r.out / (id + "_xi.json"), j.dump(2) + "\n");
        return exit_ok;
    });
}

int cmd_kl(const CommandOptions& opt, std::ostream& os, std::ostream& err) {
    return guarded(err, [&] {
        const ResolvedConfig r = resolve(opt);
        const Objective f = make_objective(r.cfg);
        if (opt.component.empty()) throw MissingArtifact("--component is required");
        const std::size_t idx = resolve_component(f, opt.component);
        const CriticalComponent& comp = f.catalog()[idx];
        ExponentFit fit;
        try {
            fit = estimate_lojasiewicz_exponent(f, comp, opt.radius, opt.samples, r.cfg.seed, opt.side);
        } catch (const NoDataError& e) {
            throw NoDataError(std::string(e.what()) + "; sample at the component boundary (--side lower|upper)");
        }
        ensure_writable_dir(r.out);
        const std::string stem = "kl_" + std::to_string(idx);
        std::ostringstream csv;
        csv << "# sgdlab exponent-fit samples\n# master_seed = " << r.provenance.master_seed << "\n# config:\n";
        std::istringstream lines(r.provenance.config_toml);
        for (std::string line; std::getline(lines, line);) csv << "#   " << line << "\n";
        csv << "# end config\nx,gap,grad_norm,side\n";
        for (const auto& sm : fit.samples)
            csv << fmt(sm.x[0]) << ',' << fmt(sm.gap) << ',' << fmt(sm.grad_norm) << ',' << sm.side << '\n';
        write_text_file(r.out / (stem + ".csv"), csv.str());

        json j;
        j["master_seed"] = r.provenance.master_seed;
        j["config_toml"] = r.provenance.config_toml;
        j["component"] = idx;
        j["kind"] = to_string(comp.kind);
        j["lo"] = comp.lo;
        j["hi"] = comp.hi;
        j["radius"] = opt.radius;
        j["theta_hat"] = fit.theta;
        j["r2"] = fit.r2;
        j["n_used"] = fit.n_used;
        write_text_file(r.out / (stem + ".json"), j.dump(2) + "\n");
        os << "component " << idx << " (" << to_string(comp.kind) << "): theta_hat = " << std::fixed
           << std::setprecision(4) << fit.theta << ", R^2 = " << fit.r2 << ", samples = " << fit.n_used << "\n";
        return exit_ok;
    });
}

int cmd_plot(const CommandOptions& opt, std::ostream& os, std::ostream& err) {
    return guarded(err, [&] {
        const ResolvedConfig r = resolve(opt);
        const std::string id = run_id_for(opt, r.cfg.seed);
        const auto csv_path = r.out / (id + ".csv");
        if (!std::filesystem::exists(csv_path)) throw MissingArtifact(csv_path.string() + " (run `sgdlab run` first)");
        std::istringstream csv(read_text_file(csv_path));
        const LoadedTrajectory t = read_trajectory_csv(csv);
        const ExperimentConfig run_cfg = parse_config(t.provenance.config_toml, csv_path.string());
        const Objective f = make_objective(run_cfg);
        if (f.dim() != 1) throw ConfigError("plots are available for one-dimensional objectives only");
        PlotOptions po;
        po.title = id;
        const auto svg = r.out / (id + ".svg");
        write_text_file(svg, render_svg(f, t.trace, t.provenance, po));
        os << svg.string() << "\n";
        return exit_ok;
    });
}

}  // namespace sgdlab
