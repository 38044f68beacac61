#include "satuav/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace satuav {

double sat_channel_gain(const ChannelParams &ch) { return ch.sat_ref_gain / (ch.sat_altitude * ch.sat_altitude); }

double sat_rate(const ChannelParams &ch, double power) {
    const double snr = power * sat_channel_gain(ch) / ch.noise_power;
    if (ch.apply_snr_threshold && snr < ch.snr_threshold) return 0.0;
    return ch.sat_bandwidth * std::log2(1.0 + snr);
}

double elevation_deg(const Vec3 &uav_pos, const Vec3 &dev_pos) {
    const double horizontal = std::hypot(uav_pos.x() - dev_pos.x(), uav_pos.y() - dev_pos.y());
    const double height = uav_pos.z() - dev_pos.z();
    if (horizontal == 0.0) return height >= 0.0 ? 90.0 : -90.0;
    return rad2deg(std::atan(height / horizontal));
}

double los_probability_at(const ChannelParams &ch, double elevation_degrees) {
    return 1.0 / (1.0 + ch.env_a * std::exp(-ch.env_b * (elevation_degrees - ch.env_a)));
}

double los_probability(const ChannelParams &ch, const Vec3 &uav_pos, const Vec3 &dev_pos) {
    return los_probability_at(ch, elevation_deg(uav_pos, dev_pos));
}

LinkBudget ground_link_budget(const ChannelParams &ch, const Vec3 &uav_pos, const GroundDevice &dev) {
    const double d = (uav_pos - dev.position).norm();
    if (!(d > 0.0)) throw std::invalid_argument("ground_link_budget: UAV and device positions coincide");

    LinkBudget lb;
    lb.los_prob = los_probability(ch, uav_pos, dev.position);
    const double fspl = std::pow(4.0 * kPi * ch.carrier_freq * d / ch.light_speed, 2);
    const double l_los = fspl * ch.excess_loss_los;
    const double l_nlos = fspl * ch.excess_loss_nlos;
    lb.avg_path_loss = lb.los_prob * l_los + (1.0 - lb.los_prob) * l_nlos;
    lb.snr = ch.rx_antenna_gain * dev.transmit_power / (lb.avg_path_loss * ch.noise_power);
    lb.rate = (ch.apply_snr_threshold && lb.snr < ch.snr_threshold) ? 0.0
                                                                      : ch.ground_bandwidth * std::log2(1.0 + lb.snr);
    return lb;
}

DelayModel propagation_delay(const ChannelParams &ch, double slot_length) {
    const double c = std::cos(deg2rad(ch.min_central_angle_deg));
    if (std::abs(c) < 1e-12) throw std::invalid_argument("propagation_delay: cos(min_central_angle) is zero");
    DelayModel dm;
    dm.tau_max = (ch.earth_radius + ch.sat_altitude) * std::sin(deg2rad(ch.max_elevation_deg)) / (ch.light_speed * c);
    dm.delta_slots = static_cast<int>(std::floor(2.0 * dm.tau_max / slot_length));
    return dm;
}

double success_probability(const ChannelParams &ch, const Vec3 &uav_pos, std::span<const GroundDevice> devices) {
    if (devices.empty()) throw std::invalid_argument("success_probability: no devices");
    double best = 0.0;
    for (const auto &d : devices) best = std::max(best, los_probability(ch, uav_pos, d.position));
    return best;
}

} // namespace satuav
