#include "pam/report.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "pam/config.hpp"
#include "pam/errors.hpp"

namespace pam {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec == std::errc() && ptr == last) return true;
    if (s == "inf" || s == "+inf") {
        out = INFINITY;
        return true;
    }
    if (s == "-inf") {
        out = -INFINITY;
        return true;
    }
    if (s == "nan" || s == "-nan") {
        out = NAN;
        return true;
    }
    return false;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && s[i] == ' ') ++i;
    return s.substr(i);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Tick positions at 1, 2 or 5 times a power of ten.
std::vector<double> ticks(double lo, double hi) {
    const double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    return t;
}

std::string short_number(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace

Provenance make_provenance(const std::string& command, const nlohmann::json& config, std::uint64_t seed) {
    Provenance p;
    p.command = command;
    p.config_hash = fnv1a(config.dump());
    p.seed = seed;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    p.timestamp = buf;
    p.version = kVersion;
    return p;
}

nlohmann::json to_json(const Provenance& p) {
    std::ostringstream hash;
    hash << std::hex << p.config_hash;
    return {{"command", p.command},
            {"config_hash", hash.str()},
            {"seed", p.seed},
            {"timestamp", p.timestamp},
            {"version", p.version}};
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << contents;
    if (!out) throw IoError("write to " + path.string() + " failed");
}

void write_json_record(const std::filesystem::path& path, const nlohmann::json& record, const Provenance& provenance) {
    nlohmann::json j = {{"schema_version", kSchemaVersion}, {"provenance", to_json(provenance)}};
    for (const auto& [k, v] : record.items()) j[k] = v;
    write_text_file(path, j.dump(2) + "\n");
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string CsvTable::to_csv() const {
    std::string s;
    for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
    s += '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
        s += '\n';
    }
    return s;
}

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ConfigError("table has no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) return t;
    t.columns = split(trim(line));
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.columns.size())
            throw ConfigError("csv line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                              " fields, expected " + std::to_string(t.columns.size()));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_csv(os.str());
}

Plot plot_from_table(const CsvTable& table, const std::string& x_column, const std::vector<std::string>& y_columns,
                     const std::string& title) {
    Plot p;
    p.title = title;
    p.x_label = x_column;
    if (table.columns.empty()) return p;
    const std::size_t xi = table.column(x_column);
    std::vector<std::size_t> ys;
    if (!y_columns.empty()) {
        for (const auto& c : y_columns) ys.push_back(table.column(c));
    } else {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c == xi) continue;
            bool numeric = !table.rows.empty();
            double v;
            for (const auto& r : table.rows) numeric = numeric && parse_double(r[c], v);
            if (numeric) ys.push_back(c);
        }
    }
    if (ys.size() == 1) p.y_label = table.columns[ys.front()];
    for (std::size_t c : ys) {
        PlotSeries s;
        s.name = table.columns[c];
        for (const auto& r : table.rows) {
            s.x.push_back(r[xi]);
            s.y.push_back(r[c]);
        }
        p.series.push_back(std::move(s));
    }
    return p;
}

std::string render_svg(const Plot& plot) {
    constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    // Parsed vertices per series, keeping only finite pairs.
    struct Vertex {
        double x, y;
        std::string sx, sy;
    };
    std::vector<std::vector<Vertex>> pts;
    double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
    for (const auto& s : plot.series) {
        std::vector<Vertex> v;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            double x, y;
            if (!parse_double(s.x[i], x) || !parse_double(s.y[i], y) || !std::isfinite(x) || !std::isfinite(y))
                continue;
            v.push_back({x, y, s.x[i], s.y[i]});
            xlo = std::min(xlo, x);
            xhi = std::max(xhi, x);
            ylo = std::min(ylo, y);
            yhi = std::max(yhi, y);
        }
        pts.push_back(std::move(v));
    }
    if (!std::isfinite(xlo)) xlo = 0.0, xhi = 1.0, ylo = 0.0, yhi = 1.0;
    if (xhi == xlo) xlo -= 0.5, xhi += 0.5;
    if (yhi == ylo) ylo -= 0.5, yhi += 0.5;
    const double pad = 0.05 * (yhi - ylo);
    ylo -= pad;
    yhi += pad;
    auto px = [&](double x) { return L + (x - xlo) / (xhi - xlo) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ylo) / (yhi - ylo) * (H - T - B); };

    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!plot.title.empty())
        os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << xml_escape(plot.title)
           << "</text>\n";
    os << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\"/>\n";
    os << "</g>\n<g class=\"ticks\" font-size=\"11\">\n";
    for (double t : ticks(xlo, xhi))
        os << "<line x1=\"" << px(t) << "\" y1=\"" << H - B << "\" x2=\"" << px(t) << "\" y2=\"" << H - B + 5
           << "\" stroke=\"black\"/><text x=\"" << px(t) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
           << short_number(t) << "</text>\n";
    for (double t : ticks(ylo, yhi))
        os << "<line x1=\"" << L - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << L << "\" y2=\"" << py(t)
           << "\" stroke=\"black\"/><text x=\"" << L - 8 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">"
           << short_number(t) << "</text>\n";
    os << "</g>\n";
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"13\">"
       << xml_escape(plot.x_label) << "</text>\n";
    os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
       << (T + H - B) / 2 << ")\">" << xml_escape(plot.y_label) << "</text>\n";
    for (std::size_t s = 0; s < pts.size(); ++s) {
        const char* color = palette[s % 6];
        os << "<polyline class=\"series\" data-name=\"" << xml_escape(plot.series[s].name) << "\" data-x=\"";
        for (std::size_t i = 0; i < pts[s].size(); ++i) os << (i ? " " : "") << pts[s][i].sx;
        os << "\" data-y=\"";
        for (std::size_t i = 0; i < pts[s].size(); ++i) os << (i ? " " : "") << pts[s][i].sy;
        os << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < pts[s].size(); ++i)
            os << (i ? " " : "") << px(pts[s][i].x) << ',' << py(pts[s][i].y);
        os << "\"/>\n";
        os << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (s + 1) << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
           << color << "\">" << xml_escape(plot.series[s].name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace pam
