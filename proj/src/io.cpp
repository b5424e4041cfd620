#include "sgdlab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace sgdlab {

namespace {

using json = nlohmann::json;

void write_provenance(std::ostream& os, const Provenance& prov) {
    os << "# master_seed = " << prov.master_seed << "\n";
    os << "# config:\n";
    std::istringstream lines(prov.config_toml);
    for (std::string line; std::getline(lines, line);) os << "#   " << line << "\n";
    os << "# end config\n";
}

/// Consumes the leading comment block and returns the provenance found there.
Provenance read_provenance(std::istream& is, std::string& first_data_line) {
    Provenance prov;
    bool in_config = false;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] != '#') {
            first_data_line = line;
            return prov;
        }
        if (line == "# config:") {
            in_config = true;
        } else if (line == "# end config") {
            in_config = false;
        } else if (in_config) {
            prov.config_toml += (line.size() > 4 ? line.substr(4) : std::string()) + "\n";
        } else if (line.rfind("# master_seed = ", 0) == 0) {
            prov.master_seed = std::stoull(line.substr(16));
        }
    }
    first_data_line.clear();
    return prov;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) throw IoError("not a number: '" + s + "'");
    return v;
}

std::string format_point(const Point& x) {
    std::string out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) out += ' ';
        out += format_double(x[i]);
    }
    return out;
}

Point parse_point(const std::string& s) {
    Point x;
    for (const auto& part : split(s, ' '))
        if (!part.empty()) x.push_back(parse_double(part));
    return x;
}

template <class Label, class Parse>
std::map<Label, std::size_t> parse_histogram(const std::string& s, Parse parse) {
    std::map<Label, std::size_t> out;
    for (const auto& item : split(s, ';')) {
        if (item.empty()) continue;
        const auto colon = item.rfind(':');
        if (colon == std::string::npos) throw IoError("bad histogram entry '" + item + "'");
        const auto label = parse(item.substr(0, colon));
        if (!label) throw IoError("unknown label '" + item.substr(0, colon) + "'");
        out[*label] = std::stoull(item.substr(colon + 1));
    }
    return out;
}

template <class Map>
std::string format_histogram(const Map& m) {
    std::string out;
    for (const auto& [label, n] : m) {
        if (!out.empty()) out += ';';
        out += std::string(to_string(label)) + ":" + std::to_string(n);
    }
    return out;
}

json point_json(std::span<const double> x) { return json(std::vector<double>(x.begin(), x.end())); }

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

void write_trajectory_csv(std::ostream& os, const Trace& trace, const RunMeta& meta) {
    os << "# sgdlab trajectory\n";
    os << "# run_id = " << meta.run_id << "\n";
    os << "# x0 = " << format_point(meta.x0) << "\n";
    os << "# level = " << format_double(meta.level) << "\n";
    os << "# channel = " << meta.channel << "\n";
    write_provenance(os, meta.provenance);
    os << "k";
    if (trace.dim == 1) {
        os << ",x";
    } else {
        for (std::size_t d = 0; d < trace.dim; ++d) os << ",x" << d;
    }
    os << ",f,grad_norm\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        os << trace.k[i];
        for (double xi : trace.x_at(i)) os << ',' << format_double(xi);
        os << ',' << format_double(trace.f[i]) << ',' << format_double(trace.grad_norm[i]) << '\n';
    }
}

LoadedTrajectory read_trajectory_csv(std::istream& is) {
    LoadedTrajectory out;
    std::string header;
    out.provenance = read_provenance(is, header);
    const auto cols = split(header, ',');
    if (cols.size() < 4 || cols.front() != "k" || cols[cols.size() - 2] != "f" || cols.back() != "grad_norm")
        throw IoError("trajectory CSV: unexpected header '" + header + "'");
    out.trace.dim = cols.size() - 3;
    std::vector<double> xi(out.trace.dim);
    for (std::string line; std::getline(is, line);) {
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split(line, ',');
        if (cells.size() != cols.size()) throw IoError("trajectory CSV: wrong column count in '" + line + "'");
        for (std::size_t d = 0; d < out.trace.dim; ++d) xi[d] = parse_double(cells[1 + d]);
        out.trace.push(std::stoull(cells[0]), xi, parse_double(cells[cells.size() - 2]), parse_double(cells.back()));
    }
    return out;
}

std::string run_report_json(const TrajectoryRecord& rec, const LimitClassification& cls, const RunMeta& meta) {
    json j;
    j["run_id"] = meta.run_id;
    j["master_seed"] = meta.provenance.master_seed;
    j["config_toml"] = meta.provenance.config_toml;
    j["x0"] = meta.x0;
    j["level"] = meta.level;
    j["channel"] = meta.channel;
    j["k_max"] = rec.config.k_max;
    j["final"] = {{"k", rec.final_k},
                  {"x", rec.final_x},
                  {"f", rec.final_f},
                  {"grad_norm", rec.final_grad_norm}};
    j["min_f"] = rec.min_f;
    j["min_grad_norm"] = rec.min_grad_norm;
    j["min_grad_k"] = rec.min_grad_k;
    j["events"] = {{"stopped_early", rec.stopped_early},
                   {"stop_k", rec.stop_k},
                   {"numeric_failure", rec.numeric_failure},
                   {"failure_k", rec.failure_k}};
    json c;
    c["label"] = to_string(cls.label);
    c["component"] = cls.component ? json(*cls.component) : json(nullptr);
    c["distance"] = cls.distance;
    c["above_limit"] = to_string(cls.above_limit);
    c["above_limit_basis"] = "running minimum over all iterates";
    c["f_inf"] = cls.f_inf;
    c["window_diameter"] = cls.window_diameter;
    c["grad_norm"] = cls.grad_norm;
    j["classification"] = c;
    j["stored_iterates"] = rec.history.size();
    j["terminal_window"] = {{"first_k", rec.terminal.empty() ? 0 : rec.terminal.k.front()},
                            {"size", rec.terminal.size()},
                            {"x_first", rec.terminal.empty() ? json(nullptr) : point_json(rec.terminal.x_at(0))}};
    return j.dump(2) + "\n";
}

std::size_t OutcomeRow::count(LimitLabel label) const {
    const auto it = labels.find(label);
    return it == labels.end() ? 0 : it->second;
}

OutcomeRow make_outcome_row(const Point& x0, double level, const std::vector<LimitClassification>& cls,
                            const std::vector<TrajectoryRecord>& runs, double grad_gate) {
    OutcomeRow row;
    row.x0 = x0;
    row.level = level;
    row.n_seeds = cls.size();
    for (const auto& c : cls) {
        ++row.labels[c.label];
        ++row.above[c.above_limit];
    }
    for (const auto& r : runs)
        if (!r.numeric_failure && r.min_grad_norm < grad_gate) ++row.grad_converged;
    std::size_t best = 0;
    for (const auto& [label, n] : row.labels) {
        if (n > best) {
            best = n;
            row.majority = label;
        }
    }
    return row;
}

std::string render_table(const OutcomeTable& table) {
    std::ostringstream os;
    os << std::left << std::setw(22) << "x0" << std::setw(10) << table.level_name << std::setw(17) << "majority"
       << std::setw(44) << "labels" << "above_limit\n";
    for (const auto& r : table.rows) {
        os << std::setw(22) << format_point(r.x0) << std::setw(10) << format_double(r.level) << std::setw(17)
           << to_string(r.majority) << std::setw(44) << format_histogram(r.labels) << format_histogram(r.above)
           << "\n";
    }
    return os.str();
}

void write_table_csv(std::ostream& os, const OutcomeTable& table, const Provenance& prov) {
    os << "# sgdlab outcome table\n";
    write_provenance(os, prov);
    os << "x0," << table.level_name << ",majority,labels,above_limit,n_seeds,grad_converged\n";
    for (const auto& r : table.rows) {
        os << format_point(r.x0) << ',' << format_double(r.level) << ',' << to_string(r.majority) << ','
           << format_histogram(r.labels) << ',' << format_histogram(r.above) << ',' << r.n_seeds << ','
           << r.grad_converged << '\n';
    }
}

OutcomeTable read_table_csv(std::istream& is) {
    OutcomeTable t;
    std::string header;
    read_provenance(is, header);
    const auto cols = split(header, ',');
    if (cols.size() != 7 || cols[0] != "x0") throw IoError("table CSV: unexpected header '" + header + "'");
    t.level_name = cols[1];
    for (std::string line; std::getline(is, line);) {
        if (line.empty() || line[0] == '#') continue;
        const auto c = split(line, ',');
        if (c.size() != 7) throw IoError("table CSV: wrong column count in '" + line + "'");
        OutcomeRow r;
        r.x0 = parse_point(c[0]);
        r.level = parse_double(c[1]);
        const auto m = parse_limit_label(c[2]);
        if (!m) throw IoError("table CSV: unknown label '" + c[2] + "'");
        r.majority = *m;
        r.labels = parse_histogram<LimitLabel>(c[3], parse_limit_label);
        r.above = parse_histogram<AboveLimit>(c[4], parse_above_limit);
        r.n_seeds = std::stoull(c[5]);
        r.grad_converged = std::stoull(c[6]);
        t.rows.push_back(std::move(r));
    }
    return t;
}

std::string table_json(const OutcomeTable& table, const Provenance& prov) {
    json j;
    j["master_seed"] = prov.master_seed;
    j["config_toml"] = prov.config_toml;
    j["level_name"] = table.level_name;
    j["rows"] = json::array();
    for (const auto& r : table.rows) {
        json labels = json::object();
        for (const auto& [l, n] : r.labels) labels[std::string(to_string(l))] = n;
        json above = json::object();
        for (const auto& [a, n] : r.above) above[std::string(to_string(a))] = n;
        j["rows"].push_back({{"x0", r.x0},
                             {"level", r.level},
                             {"majority", to_string(r.majority)},
                             {"labels", labels},
                             {"above_limit", above},
                             {"n_seeds", r.n_seeds},
                             {"grad_converged", r.grad_converged}});
    }
    return j.dump(2) + "\n";
}

std::string render_svg(const Objective& f, const Trace& trace, const Provenance& prov, const PlotOptions& opt) {
    constexpr double width = 800, height = 500, margin = 50;
    constexpr std::size_t curve_points = 1000;

    std::vector<double> cx(curve_points), cy(curve_points);
    double y_lo = f.f_min(), y_hi = f.f_min();
    for (std::size_t i = 0; i < curve_points; ++i) {
        cx[i] = opt.x_lo + (opt.x_hi - opt.x_lo) * static_cast<double>(i) / (curve_points - 1);
        const Point p(f.dim(), cx[i]);
        cy[i] = f.evaluate_unchecked(p);
        y_hi = std::max(y_hi, cy[i]);
    }
    y_lo -= 0.05 * (y_hi - y_lo);
    auto sx = [&](double x) { return margin + (x - opt.x_lo) / (opt.x_hi - opt.x_lo) * (width - 2 * margin); };
    auto sy = [&](double y) { return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin); };
    auto inside = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && x >= opt.x_lo && x <= opt.x_hi && y >= y_lo && y <= y_hi;
    };

    std::ostringstream os;
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<desc>master_seed = " << prov.master_seed << "\n" << xml_escape(prov.config_toml) << "</desc>\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
       << height - margin << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
       << "\" stroke=\"black\"/>\n";
    for (int t = static_cast<int>(std::ceil(opt.x_lo / 5.0)) * 5; t <= opt.x_hi; t += 5) {
        os << "<text x=\"" << sx(t) << "\" y=\"" << height - margin + 18 << "\" font-size=\"12\" text-anchor=\"middle\">"
           << t << "</text>\n";
    }
    os << "<text x=\"" << margin - 6 << "\" y=\"" << sy(y_hi) + 4 << "\" font-size=\"12\" text-anchor=\"end\">"
       << y_hi << "</text>\n";
    os << "<text x=\"" << margin - 6 << "\" y=\"" << sy(y_lo) + 4 << "\" font-size=\"12\" text-anchor=\"end\">"
       << y_lo << "</text>\n";
    if (!opt.title.empty())
        os << "<text x=\"" << width / 2 << "\" y=\"" << margin / 2 << "\" font-size=\"14\" text-anchor=\"middle\">"
           << xml_escape(opt.title) << "</text>\n";

    os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < curve_points; ++i) os << sx(cx[i]) << ',' << sy(cy[i]) << ' ';
    os << "\"/>\n";

    if (!trace.empty()) {
        const std::size_t n = trace.size();
        const std::size_t step = std::max<std::size_t>(1, n / std::max<std::size_t>(1, opt.max_points));
        os << "<g fill=\"gray\" fill-opacity=\"0.6\">\n";
        for (std::size_t i = 0; i < n; i += step) {
            const double x = trace.x_at(i)[0], y = trace.f[i];
            if (inside(x, y)) os << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"2\"/>\n";
        }
        os << "</g>\n";
        auto marker = [&](std::size_t i, const char* colour, const char* name) {
            const double x = std::clamp(trace.x_at(i)[0], opt.x_lo, opt.x_hi);
            const double y = std::isfinite(trace.f[i]) ? std::clamp(trace.f[i], y_lo, y_hi) : y_hi;
            os << "<circle class=\"" << name << "\" cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"6\" fill=\""
               << colour << "\"/>\n";
        };
        marker(0, "hotpink", "start");
        marker(n - 1, "blue", "end");
    }
    os << "</svg>\n";
    return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out << text;
    out.flush();
    if (!out) throw IoError(path.string() + ": write failed");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace sgdlab
