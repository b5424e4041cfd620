#include "sgdlab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "toml.hpp"

namespace sgdlab {

std::string_view to_string(StepRule r) noexcept {
    switch (r) {
        case StepRule::inverse_b_beta: return "inverse-b-beta";
        case StepRule::constant: return "constant";
        case StepRule::power: return "power";
    }
    return "constant";
}

std::vector<double> ExperimentConfig::level_values() const {
    if (!levels.empty()) return levels;
    switch (kind) {
        case NoiseKind::multiplicative: return {b};
        case NoiseKind::additive_gaussian:
        case NoiseKind::value_dependent: return {sigma};
        case NoiseKind::exact: break;
    }
    return {0.0};
}

std::string_view ExperimentConfig::level_name() const noexcept {
    switch (kind) {
        case NoiseKind::multiplicative: return "b";
        case NoiseKind::additive_gaussian:
        case NoiseKind::value_dependent: return "sigma";
        case NoiseKind::exact: break;
    }
    return "none";
}

namespace {

std::string where(std::string_view source, const toml::node& node) {
    std::ostringstream os;
    os << source << ":" << node.source().begin.line;
    return os.str();
}

class Reader {
public:
    Reader(std::string_view source, const toml::table& table, std::string section)
        : source_(source), table_(table), section_(std::move(section)) {}

    void allow(std::initializer_list<std::string_view> keys) {
        const std::set<std::string_view> allowed(keys);
        for (const auto& [key, node] : table_) {
            if (!allowed.count(key.str()))
                throw ConfigError(where(source_, node) + ": unknown key '" + section_ + "." + std::string(key.str()) + "'");
        }
    }

    template <class T>
    void number(std::string_view key, T& out) const {
        const toml::node* node = table_.get(key);
        if (!node) return;
        if constexpr (std::is_floating_point_v<T>) {
            if (auto v = node->value<double>(); v && (node->is_integer() || node->is_floating_point())) {
                out = *v;
                return;
            }
            fail(*node, key, "a number");
        } else {
            if (auto v = node->value<std::int64_t>(); v && node->is_integer()) {
                if (*v < 0) fail(*node, key, "a non-negative integer");
                out = static_cast<T>(*v);
                return;
            }
            fail(*node, key, "an integer");
        }
    }

    void string(std::string_view key, std::string& out) const {
        const toml::node* node = table_.get(key);
        if (!node) return;
        if (auto v = node->value<std::string>(); v && node->is_string()) {
            out = *v;
            return;
        }
        fail(*node, key, "a string");
    }

    std::vector<double> numbers(std::string_view key, const toml::node& node) const {
        const auto* arr = node.as_array();
        if (!arr) fail(node, key, "an array of numbers");
        std::vector<double> out;
        for (const auto& item : *arr) {
            auto v = item.value<double>();
            if (!v || !(item.is_integer() || item.is_floating_point())) fail(item, key, "an array of numbers");
            out.push_back(*v);
        }
        return out;
    }

    const toml::node* get(std::string_view key) const { return table_.get(key); }

    [[noreturn]] void fail(const toml::node& node, std::string_view key, std::string_view expected) const {
        throw ConfigError(where(source_, node) + ": '" + section_ + "." + std::string(key) + "' must be " +
                          std::string(expected));
    }

private:
    std::string_view source_;
    const toml::table& table_;
    std::string section_;
};

}  // namespace

ExperimentConfig parse_config(std::string_view toml_text, std::string_view source) {
    toml::table root;
    try {
        root = toml::parse(toml_text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << source << ":" << e.source().begin.line << ": " << e.description();
        throw ConfigError(os.str());
    }

    ExperimentConfig cfg;
    for (const auto& [key, node] : root) {
        const std::string_view name = key.str();
        if (name != "objective" && name != "oracle" && name != "schedule" && name != "run")
            throw ConfigError(where(source, node) + ": unknown section '" + std::string(name) + "'");
        if (!node.is_table()) throw ConfigError(where(source, node) + ": '" + std::string(name) + "' must be a table");
    }

    if (const auto* t = root["objective"].as_table()) {
        Reader r(source, *t, "objective");
        r.allow({"name", "dim"});
        r.string("name", cfg.objective);
        r.number("dim", cfg.dim);
        if (cfg.objective != "piecewise" && cfg.objective != "quadratic")
            r.fail(*t->get("name"), "name", "\"piecewise\" or \"quadratic\"");
        if (cfg.dim == 0 || (cfg.objective == "piecewise" && cfg.dim != 1))
            throw ConfigError(std::string(source) + ": objective.dim must be 1 for piecewise and positive otherwise");
    }

    if (const auto* t = root["oracle"].as_table()) {
        Reader r(source, *t, "oracle");
        r.allow({"kind", "b", "sigma", "eps_exp", "levels"});
        std::string kind = std::string(to_string(cfg.kind));
        r.string("kind", kind);
        const auto parsed = parse_noise_kind(kind);
        if (!parsed) r.fail(*t->get("kind"), "kind", "one of exact, multiplicative, additive-gaussian, value-dependent");
        cfg.kind = *parsed;
        r.number("b", cfg.b);
        r.number("sigma", cfg.sigma);
        r.number("eps_exp", cfg.eps_exp);
        if (const auto* n = r.get("levels")) cfg.levels = r.numbers("levels", *n);
    }

    if (const auto* t = root["schedule"].as_table()) {
        Reader r(source, *t, "schedule");
        r.allow({"rule", "alpha", "decay", "channel"});
        std::string rule = std::string(to_string(cfg.rule));
        r.string("rule", rule);
        if (rule == "inverse-b-beta") {
            cfg.rule = StepRule::inverse_b_beta;
        } else if (rule == "constant") {
            cfg.rule = StepRule::constant;
        } else if (rule == "power") {
            cfg.rule = StepRule::power;
        } else {
            r.fail(*t->get("rule"), "rule", "one of inverse-b-beta, constant, power");
        }
        r.number("alpha", cfg.alpha);
        r.number("decay", cfg.decay);
        std::string channel = std::string(to_string(cfg.channel));
        r.string("channel", channel);
        const auto ch = parse_bounds_channel(channel);
        if (!ch) r.fail(*t->get("channel"), "channel", "\"derived\" or \"paper\"");
        cfg.channel = *ch;
    }

    if (const auto* t = root["run"].as_table()) {
        Reader r(source, *t, "run");
        r.allow({"x0", "seeds", "k_max", "seed", "record_stride", "stop_grad_tol", "stop_window", "gamma", "n_draws",
                 "out"});
        if (const auto* n = r.get("x0")) {
            const auto* arr = n->as_array();
            if (!arr || arr->empty()) r.fail(*n, "x0", "a non-empty array of numbers or of number arrays");
            cfg.x0.clear();
            for (const auto& item : *arr) {
                if (item.is_array()) {
                    cfg.x0.push_back(r.numbers("x0", item));
                } else if (auto v = item.value<double>(); v && (item.is_integer() || item.is_floating_point())) {
                    cfg.x0.push_back({*v});
                } else {
                    r.fail(item, "x0", "a non-empty array of numbers or of number arrays");
                }
            }
        }
        r.number("seeds", cfg.seeds);
        r.number("k_max", cfg.k_max);
        r.number("seed", cfg.seed);
        r.number("record_stride", cfg.record_stride);
        r.number("stop_grad_tol", cfg.stop_grad_tol);
        r.number("stop_window", cfg.stop_window);
        r.number("gamma", cfg.gamma);
        r.number("n_draws", cfg.n_draws);
        r.string("out", cfg.out);
    }

    for (const auto& p : cfg.x0) {
        if (p.size() != cfg.dim) throw ConfigError(std::string(source) + ": run.x0 entries must have objective.dim coordinates");
    }
    if (cfg.seeds < 1) throw ConfigError(std::string(source) + ": run.seeds must be >= 1");
    if (cfg.k_max < 1) throw ConfigError(std::string(source) + ": run.k_max must be >= 1");
    if (cfg.record_stride < 1) throw ConfigError(std::string(source) + ": run.record_stride must be >= 1");
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ConfigError(std::string(source) + ": run.gamma must lie in (0, 1)");
    if (cfg.n_draws < 1000) throw ConfigError(std::string(source) + ": run.n_draws must be >= 1000");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

namespace {

std::string toml_float(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string out(buf, p);
    if (out.find_first_of(".e") == std::string::npos) out += ".0";
    return out;
}

std::string toml_string(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string toml_floats(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + toml_float(v[i]);
    return out + "]";
}

}  // namespace

std::string to_toml(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "[objective]\n"
       << "name = " << toml_string(cfg.objective) << "\n"
       << "dim = " << cfg.dim << "\n\n";
    os << "[oracle]\n"
       << "kind = " << toml_string(to_string(cfg.kind)) << "\n"
       << "b = " << toml_float(cfg.b) << "\n"
       << "sigma = " << toml_float(cfg.sigma) << "\n"
       << "eps_exp = " << toml_float(cfg.eps_exp) << "\n"
       << "levels = " << toml_floats(cfg.levels) << "\n\n";
    os << "[schedule]\n"
       << "rule = " << toml_string(to_string(cfg.rule)) << "\n"
       << "alpha = " << toml_float(cfg.alpha) << "\n"
       << "decay = " << toml_float(cfg.decay) << "\n"
       << "channel = " << toml_string(to_string(cfg.channel)) << "\n\n";
    os << "[run]\nx0 = [";
    for (std::size_t i = 0; i < cfg.x0.size(); ++i) {
        if (i) os << ", ";
        os << (cfg.x0[i].size() == 1 ? toml_float(cfg.x0[i][0]) : toml_floats(cfg.x0[i]));
    }
    os << "]\n"
       << "seeds = " << cfg.seeds << "\n"
       << "k_max = " << cfg.k_max << "\n"
       << "seed = " << cfg.seed << "\n"
       << "record_stride = " << cfg.record_stride << "\n"
       << "stop_grad_tol = " << toml_float(cfg.stop_grad_tol) << "\n"
       << "stop_window = " << cfg.stop_window << "\n"
       << "gamma = " << toml_float(cfg.gamma) << "\n"
       << "n_draws = " << cfg.n_draws << "\n"
       << "out = " << toml_string(cfg.out) << "\n";
    return os.str();
}

Objective make_objective(const ExperimentConfig& cfg) {
    if (cfg.objective == "quadratic") return make_quadratic(cfg.dim);
    return make_piecewise_function();
}

NoiseOracle make_oracle(const ExperimentConfig& cfg, double level, double beta) {
    NoiseOracle o;
    o.kind = cfg.kind;
    o.b = cfg.b;
    o.sigma = cfg.sigma;
    o.eps_exp = cfg.eps_exp;
    o.beta_ref = beta;
    if (cfg.kind == NoiseKind::multiplicative) {
        o.b = level;
    } else if (cfg.kind == NoiseKind::additive_gaussian || cfg.kind == NoiseKind::value_dependent) {
        o.sigma = level;
    }
    o.alpha_ref = cfg.rule == StepRule::inverse_b_beta ? inverse_b_beta_step(o.b, beta) : cfg.alpha;
    o.validate();
    return o;
}

StepSchedule make_schedule(const ExperimentConfig& cfg, const NoiseOracle& o, double beta, BoundsChannel channel) {
    StepSchedule s;
    s.beta = beta;
    switch (cfg.rule) {
        case StepRule::inverse_b_beta: s.alpha = {inverse_b_beta_step(o.b, beta), 0.0}; break;
        case StepRule::constant: s.alpha = {cfg.alpha, 0.0}; break;
        case StepRule::power: s.alpha = {cfg.alpha, cfg.decay}; break;
    }
    if (!(s.alpha.coef > 0.0)) throw ConfigError("schedule.alpha must be positive");
    s.bounds = bounds_for(channel, o, s.alpha.coef, beta, cfg.dim);
    return s;
}

RunConfig make_run_config(const ExperimentConfig& cfg, const Point& x0, std::uint64_t seed) {
    RunConfig rc;
    rc.x0 = x0;
    rc.k_max = cfg.k_max;
    rc.seed = seed;
    rc.record_stride = cfg.record_stride;
    rc.stop_grad_tol = cfg.stop_grad_tol;
    rc.stop_window = cfg.stop_window;
    return rc;
}

}  // namespace sgdlab
