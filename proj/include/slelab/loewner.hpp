#pragma once

#include <cstdint>
#include <vector>

#include "slelab/curves.hpp"
#include "slelab/geometry.hpp"

namespace slelab {

// Fixed Mobius transports between the closed disc and the closed upper half
// plane: z -> i(z+1)/(1-z) and z -> (z-i)/(z+i).
Complex mobius_D_to_H(Complex z);
Complex mobius_H_to_D(Complex z);

// One discretization step of the Loewner flow: a straight slit attached to
// the real line at w_prev, tilted so that it absorbs the driving increment
// dW = s(1 - 2 alpha) and capacity increment dt = s^2 alpha (1-alpha) / 4.
struct SlitStep {
    double s;
    double alpha;
    double w_prev;
    double dt;
};

// Elementary slit map from the closed upper half plane onto the half plane
// minus the slit, hydrodynamically normalized. Its inverse is the per-step
// mapping-out function.
Complex slit_forward(const SlitStep& st, Complex w);
Complex slit_inverse(const SlitStep& st, Complex z);
Complex slit_tip(const SlitStep& st);

// Composition of per-step mapping-out functions g_t; capacity is the sum of
// step capacities and must match the 2t/z expansion coefficient.
struct MappingOut {
    std::vector<SlitStep> steps;
    double capacity = 0.0;

    // g_T(z) for z in the half plane outside the hull.
    Complex map_point(Complex z) const;
    // Capacity read from the z + 2t/z expansion at z = i * probe_height.
    double hcap_expansion(double probe_height = 100.0) const;
};

struct HullTrace {
    ParamCurve trace;        // tip positions; parameter = capacity time / T
    DrivingFunction driving; // the driving that generated the hull
    double capacity = 0.0;
};

MappingOut build_mapping_out(const DrivingFunction& w, double dt);

// Solve the Loewner evolution for the given driving function with uniform
// capacity steps of size ~dt. The trace is emitted every `stride` steps
// (plus the initial and final point).
HullTrace forward_evolve(const DrivingFunction& w, double dt, int stride = 1);

// Unzip a simple trace in the closed half plane (first vertex on R, the rest
// strictly above) vertex by vertex with the inverted slit maps. The trace is
// resampled to npts samples first. Time is capacity time.
DrivingFunction extract_driving(const ParamCurve& trace, int npts);

struct ExtractionReport {
    DrivingFunction driving;
    double roundtrip_sup; // sup distance between input trace and re-evolved trace
};
ExtractionReport extract_driving_report(const ParamCurve& trace, int npts);

// Half-plane capacity of the hull generated by a bounded trace attached to R.
double hcap(const ParamCurve& trace);

// Brownian driving sqrt(kappa) * B_t with exact Gaussian increments at step
// dt; deterministic in (kappa, T, dt, seed).
DrivingFunction sample_sle_driving(double kappa, double T, double dt, std::uint64_t seed);

// Chordal SLE(kappa): forward evolution of the sampled driving.
HullTrace sample_sle(double kappa, double T, double dt, std::uint64_t seed);

// Transport to the disc: gamma_D(t) = phi_HD(gamma(t/(1-t))), truncated at the
// capacity horizon; starts exactly at -1 when the driving starts at 0.
ParamCurve trace_in_disc(const HullTrace& hull);

// Reparametrize a chordal disc curve so that the half-plane capacity of
// phi_DH(gamma([0,t])) equals t/(1-t) at the sample times (the final sample is
// pinned to t = 1 by the truncation convention).
ParamCurve reparametrize_by_capacity(const ParamCurve& disc_curve);

} // namespace slelab
