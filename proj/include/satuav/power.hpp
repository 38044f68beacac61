#pragma once

#include "satuav/scenario.hpp"

namespace satuav {

struct SegmentPlan {
    int segment_id = 0;
    double flight_time = 0.0;   // s
    double data_bits = 0.0;     // bits to upload over the segment
    double p_root = 0.0;        // W, root of the stationarity equation
    double p_min = 0.0;         // W, lowest power finishing the upload in flight
    double p_final = 0.0;       // W
    double extra_hover = 0.0;   // s of hovering upload still needed at p_max
    double fixed_energy = 0.0;  // J, propulsion plus sensing over the segment
};

// log2(exp(g_s / (sigma^2 + P g_s))) - log2(1 + P g_s / sigma^2). Strictly decreasing in P.
double root_equation_residual(const ChannelParams &ch, double power);

// Bisection root of root_equation_residual on [1e-12, 1e6] W, |residual| <= 1e-12.
// Throws InfeasibleError when the bracket does not change sign.
double solve_root_power(const ChannelParams &ch);

// (2^(R_min / B_s) - 1) sigma^2 / g_s with R_min = bits / flight_time.
double min_rate_power(const ChannelParams &ch, double bits, double flight_time);

// p_final = min(max(p_root, p_min), p_max); when p_max < p_min the remainder is
// uploaded while hovering, extra_hover = bits / R(p_max) - flight_time.
SegmentPlan plan_segment(const ChannelParams &ch, double bits, double flight_time, double p_max,
                         double fixed_energy, int segment_id = 0);

// Segment efficiency bits / (P bits / R(P) + fixed_energy) for a constant power P.
double segment_efficiency(const ChannelParams &ch, double bits, double power, double fixed_energy);

// Exhaustive search of segment_efficiency over a log-spaced grid on [p_min, p_max];
// ties go to the lowest power. Throws InfeasibleError when p_max < p_min.
double ee_power_oracle(const ChannelParams &ch, double bits, double flight_time, double p_max,
                       double fixed_energy, int grid_points = 10000);

} // namespace satuav
