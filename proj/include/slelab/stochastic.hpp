#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "slelab/curves.hpp"
#include "slelab/geometry.hpp"
#include "slelab/lattice.hpp"

namespace slelab {

struct MCEstimate {
    double mean = 0;
    double stderr_ = 0; // sample standard deviation / sqrt(n)
    long n_samples = 0;
    std::uint64_t seed = 0;
};

// Monte-Carlo harmonic measure: fraction of Brownian walks from z that first
// hit the boundary on the target edges. The walk takes isotropic steps of
// distance-adaptive size (walk on spheres) and is absorbed and snapped to the
// nearest boundary point once within `step` of the boundary.
MCEstimate harmonic_measure_mc(const LatticeDomain& dom, Point z,
                               const std::vector<GridEdge>& target, long walks, double step,
                               std::uint64_t seed);

// Green's function of the Laplacian in the unit disc,
// G(z, w) = -(1/2 pi) log |(1 - z conj(w)) / (z - w)|  (non-positive in D).
double greens_disc(Complex z, Complex w);

struct BeurlingReport {
    MCEstimate estimate;
    double bound = 0; // (4/pi) sqrt(r/R)
    double r = 0;
    double R = 0;
    bool pass = false; // estimate <= bound + 3 stderr
};

// Harmonic measure of the outer circle from z in B(z, R) minus a connected
// obstacle polyline reaching the circle, against the strong Beurling bound.
BeurlingReport beurling_check(Point z, const std::vector<Point>& obstacle, double R,
                              long walks, double step, std::uint64_t seed);

// Loop-erased random walk on the cell graph from mark a to mark b,
// conditioned on exiting at b by resampling. Deterministic per seed.
CurveClass sample_lerw(const LatticeDomain& dom, GridEdge a, GridEdge b,
                       std::uint64_t seed, long max_attempts = 200000);

using CurveSampler = std::function<CurveClass(std::uint64_t seed)>;

struct ConditionGRow {
    double M = 0;
    int annuli = 0;      // catalog size at this M (0 = missing row)
    long crossings = 0;  // total annulus crossings observed
    long unforced = 0;   // (sample, annulus) pairs with an unforced crossing
    double p_hat = 0;
    double stderr_ = 0;
};

// Empirical unforced-crossing probabilities over a deterministic catalog of
// boundary annuli with aspect ratio M (unconditional variant, tau = 0).
std::vector<ConditionGRow> estimate_condition_g(const CurveSampler& model,
                                                const LatticeDomain& dom,
                                                const std::vector<double>& M_values,
                                                int samples, std::uint64_t seed);

} // namespace slelab
