#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slelab/conformal.hpp"
#include "slelab/io.hpp"
#include "slelab/lattice.hpp"
#include "slelab/loewner.hpp"
#include "slelab/stochastic.hpp"

namespace slelab {

inline constexpr const char* kVersion = "slelab 0.1.0";

struct ExperimentConfig {
    std::string experiment;      // commute | warning | stability
    std::vector<Point> polygon;  // domain outline
    Point u{0.5, 0.45};
    Point mark_a{0.0, 0.5};
    Point mark_b{1.0, 0.5};
    std::string model = "sle"; // sle | lerw
    double kappa = 3.0;
    std::vector<double> kappa_list;
    double T = 4.0;
    double dt = 5e-4;
    std::vector<int> n_list{32};
    std::vector<double> eps_list{0.2, 0.1, 0.05, 0.025};
    double ell = 0.2;
    double delta = 1.0 / 96;
    double C = 16.0;
    int samples = 100;
    int curve_points = 300; // resampled curve resolution per sample
    double alpha = 1.0;     // warning twist angle
    std::uint64_t seed = 1;
    std::string out; // output directory; empty = no files written

    static ExperimentConfig from_config(const Config& cfg);
    Config to_config() const;
};

struct ReportTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
    std::string experiment;
    std::string config_echo;
    std::uint64_t config_hash = 0;
    std::vector<ReportTable> tables;

    const ReportTable& table(const std::string& name) const;
};

// Samples chordal curves, projects them along conformal rays at each eps, and
// reports the distance statistics and exceedance fractions over ell per
// (n, eps) cell, plus a driving-function comparison panel.
ExperimentReport run_commutation_experiment(const ExperimentConfig& cfg);

// The twist homeomorphisms acting as the identity off a boundary annulus:
// the disc curves agree for every n while the plane curves stay a positive
// distance from the limit.
ExperimentReport run_warning_example(const std::vector<int>& n_values, double alpha,
                                     const std::string& out_dir);

// Couple SLE(kappa_m) through a shared Brownian motion and track the
// per-seed Frechet distances to the SLE(kappa) trace as kappa_m -> kappa.
ExperimentReport run_stability_experiment(const ExperimentConfig& cfg);

// Write per-table CSVs, manifest.txt, and SVG panels into out_dir.
void write_report(const ExperimentReport& report, const std::string& out_dir);

// Twist map of the warning example (exposed for tests).
Point twist_map(Point z, int n, double alpha);

} // namespace slelab
