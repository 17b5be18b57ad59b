#include "slelab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace slelab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_curve(const ParamCurve& c, const std::string& path) {
    c.validate();
    std::ofstream out(path);
    if (!out) throw io_error("write_curve: cannot open " + path);
    out << "curve v1\n";
    for (std::size_t i = 0; i < c.size(); ++i)
        out << format_double(c.t[i]) << " " << format_double(c.p[i].x) << " "
            << format_double(c.p[i].y) << "\n";
}

ParamCurve read_curve(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("read_curve: cannot open " + path);
    std::string tag, ver;
    in >> tag >> ver;
    if (tag != "curve" || ver != "v1") throw io_error("read_curve: bad header in " + path);
    std::vector<double> t;
    std::vector<Point> p;
    double tv, x, y;
    while (in >> tv >> x >> y) {
        t.push_back(tv);
        p.push_back({x, y});
    }
    if (t.empty()) throw io_error("read_curve: no samples in " + path);
    return ParamCurve(std::move(t), std::move(p));
}

void write_driving(const DrivingFunction& w, const std::string& path) {
    w.validate();
    std::ofstream out(path);
    if (!out) throw io_error("write_driving: cannot open " + path);
    out << "driving v1\n";
    for (std::size_t i = 0; i < w.size(); ++i)
        out << format_double(w.t[i]) << " " << format_double(w.w[i]) << "\n";
}

DrivingFunction read_driving(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("read_driving: cannot open " + path);
    std::string tag, ver;
    in >> tag >> ver;
    if (tag != "driving" || ver != "v1")
        throw io_error("read_driving: bad header in " + path);
    std::vector<double> t, w;
    double tv, wv;
    while (in >> tv >> wv) {
        t.push_back(tv);
        w.push_back(wv);
    }
    if (t.empty()) throw io_error("read_driving: no samples in " + path);
    return DrivingFunction(std::move(t), std::move(w));
}

void write_domain(const LatticeDomain& dom, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("write_domain: cannot open " + path);
    out << "domain v1\n";
    out << "n " << dom.n() << "\n";
    out << "u " << format_double(dom.u().x) << " " << format_double(dom.u().y) << "\n";
    for (CellIdx c : dom.cells()) out << "cell " << c.i << " " << c.j << "\n";
    GridEdge a = dom.mark_a(), b = dom.mark_b();
    out << "mark a " << a.i << " " << a.j << " " << a.dir << "\n";
    out << "mark b " << b.i << " " << b.j << " " << b.dir << "\n";
}

LatticeDomain read_domain(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("read_domain: cannot open " + path);
    std::string tag, ver;
    in >> tag >> ver;
    if (tag != "domain" || ver != "v1") throw io_error("read_domain: bad header in " + path);
    int n = 0;
    Point u;
    std::vector<CellIdx> cells;
    GridEdge a, b;
    bool have_a = false, have_b = false;
    std::string key;
    while (in >> key) {
        if (key == "n") {
            in >> n;
        } else if (key == "u") {
            in >> u.x >> u.y;
        } else if (key == "cell") {
            CellIdx c;
            in >> c.i >> c.j;
            cells.push_back(c);
        } else if (key == "mark") {
            std::string which;
            GridEdge e;
            in >> which >> e.i >> e.j >> e.dir;
            if (which == "a") {
                a = e;
                have_a = true;
            } else if (which == "b") {
                b = e;
                have_b = true;
            } else {
                throw io_error("read_domain: unknown mark " + which);
            }
        } else {
            throw io_error("read_domain: unknown key " + key);
        }
    }
    if (n < 1 || cells.empty()) throw io_error("read_domain: missing n or cells");
    if (have_a != have_b) throw io_error("read_domain: marks must come in pairs");
    if (have_a) return LatticeDomain::from_cells(n, cells, u, a, b);
    return LatticeDomain::from_cells(n, cells, u);
}

Config Config::parse_text(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            std::size_t b = s.find_first_not_of(" \t\r");
            std::size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw invalid_input("config: empty key");
        cfg.kv_[key] = val;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

std::string Config::get(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw invalid_input("config: missing key '" + key + "'");
    return it->second;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
    try {
        return std::stod(get(key));
    } catch (const std::invalid_argument&) {
        throw invalid_input("config: key '" + key + "' is not a number");
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long Config::get_long(const std::string& key) const {
    try {
        return std::stol(get(key));
    } catch (const std::invalid_argument&) {
        throw invalid_input("config: key '" + key + "' is not an integer");
    }
}

long Config::get_long(const std::string& key, long fallback) const {
    return has(key) ? get_long(key) : fallback;
}

std::vector<double> Config::get_list(const std::string& key) const {
    std::vector<double> out;
    std::string s = get(key);
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::invalid_argument&) {
            throw invalid_input("config: bad list entry '" + item + "' for " + key);
        }
    }
    if (out.empty()) throw invalid_input("config: empty list for " + key);
    return out;
}

Point Config::get_point(const std::string& key) const {
    std::vector<double> v = get_list(key);
    if (v.size() != 2) throw invalid_input("config: key '" + key + "' needs two components");
    return {v[0], v[1]};
}

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }

std::string Config::echo() const {
    std::ostringstream out;
    for (const auto& [k, v] : kv_) out << k << " = " << v << "\n";
    return out.str();
}

} // namespace slelab
