#pragma once

#include <map>
#include <string>
#include <vector>

#include "slelab/curves.hpp"
#include "slelab/lattice.hpp"

namespace slelab {

// curve v1: header line, then "t x y" per sample
void write_curve(const ParamCurve& c, const std::string& path);
ParamCurve read_curve(const std::string& path);

// driving v1: header line, then "t w" per sample
void write_driving(const DrivingFunction& w, const std::string& path);
DrivingFunction read_driving(const std::string& path);

// domain v1: n, u, cells, marks
void write_domain(const LatticeDomain& dom, const std::string& path);
LatticeDomain read_domain(const std::string& path);

// deterministic number formatting shared by all text outputs
std::string format_double(double v);

// plain-text "key = value" configuration with '#' comments
class Config {
  public:
    Config() = default;
    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text);

    bool has(const std::string& key) const;
    std::string get(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key) const;
    long get_long(const std::string& key, long fallback) const;
    std::vector<double> get_list(const std::string& key) const;
    Point get_point(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    const std::map<std::string, std::string>& entries() const { return kv_; }
    std::string echo() const; // canonical key = value listing

  private:
    std::map<std::string, std::string> kv_;
};

} // namespace slelab
