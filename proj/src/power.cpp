#include "satuav/power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "satuav/channel.hpp"

namespace satuav {

double root_equation_residual(const ChannelParams &ch, double power) {
    const double gs = sat_channel_gain(ch);
    const double lhs = gs / (ch.noise_power + power * gs) / std::numbers::ln2;  // log2(e^x) = x / ln 2
    return lhs - std::log2(1.0 + power * gs / ch.noise_power);
}

double solve_root_power(const ChannelParams &ch) {
    double lo = 1e-12;
    double hi = 1e6;
    double f_lo = root_equation_residual(ch, lo);
    const double f_hi = root_equation_residual(ch, hi);
    if (!(f_lo > 0.0 && f_hi < 0.0)) {
        throw InfeasibleError("solve_root_power: no sign change on [1e-12, 1e6] W");
    }
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 400; ++it) {
        mid = 0.5 * (lo + hi);
        const double f_mid = root_equation_residual(ch, mid);
        if (std::abs(f_mid) <= 1e-12 || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * mid) break;
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return mid;
}

double min_rate_power(const ChannelParams &ch, double bits, double flight_time) {
    if (!(flight_time > 0.0)) throw std::invalid_argument("min_rate_power: flight time must be positive");
    const double r_min = bits / flight_time;
    return (std::exp2(r_min / ch.sat_bandwidth) - 1.0) * ch.noise_power / sat_channel_gain(ch);
}

SegmentPlan plan_segment(const ChannelParams &ch, double bits, double flight_time, double p_max,
                         double fixed_energy, int segment_id) {
    SegmentPlan plan;
    plan.segment_id = segment_id;
    plan.flight_time = flight_time;
    plan.data_bits = bits;
    plan.fixed_energy = fixed_energy;
    plan.p_root = solve_root_power(ch);
    plan.p_min = min_rate_power(ch, bits, flight_time);
    plan.p_final = std::min(std::max(plan.p_root, plan.p_min), p_max);
    if (p_max < plan.p_min) {
        plan.extra_hover = std::max(0.0, bits / sat_rate(ch, p_max) - flight_time);
    }
    return plan;
}

double segment_efficiency(const ChannelParams &ch, double bits, double power, double fixed_energy) {
    if (bits <= 0.0) return 0.0;
    const double rate = sat_rate(ch, power);
    if (!(rate > 0.0)) return 0.0;
    return bits / (power * bits / rate + fixed_energy);
}

double ee_power_oracle(const ChannelParams &ch, double bits, double flight_time, double p_max, double fixed_energy,
                       int grid_points) {
    if (grid_points < 100) throw std::invalid_argument("ee_power_oracle: need at least 100 grid points");
    // independent closed form of the minimum power, so the oracle never calls the planner path
    const double gs = ch.sat_ref_gain / (ch.sat_altitude * ch.sat_altitude);
    const double p_min = (std::pow(2.0, bits / flight_time / ch.sat_bandwidth) - 1.0) * ch.noise_power / gs;
    if (p_max < p_min) throw InfeasibleError("ee_power_oracle: p_max below the minimum-rate power");
    if (bits <= 0.0) return p_min;

    const double lo = std::max(p_min, p_max * 1e-9);
    const double ratio = std::log(p_max / lo);
    double best_p = lo;
    double best_f = -1.0;
    for (int i = 0; i < grid_points; ++i) {
        const double p = lo * std::exp(ratio * i / (grid_points - 1));
        const double rate = ch.sat_bandwidth * std::log2(1.0 + p * gs / ch.noise_power);
        const double f = bits / (p * bits / rate + fixed_energy);
        if (f > best_f) {
            best_f = f;
            best_p = p;
        }
    }
    return best_p;
}

} // namespace satuav
