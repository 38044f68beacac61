#pragma once

#include <span>

#include "satuav/scenario.hpp"

namespace satuav {

struct LinkBudget {
    double los_prob = 0.0;
    double avg_path_loss = 0.0;  // linear
    double snr = 0.0;            // linear
    double rate = 0.0;           // bit/s
};

struct DelayModel {
    double tau_max = 0.0;  // s
    int delta_slots = 0;
};

// UAV-satellite gain g0 / H_s^2 (the UAV altitude is negligible next to H_s).
double sat_channel_gain(const ChannelParams &ch);

// B_s log2(1 + p g_s / sigma^2).
double sat_rate(const ChannelParams &ch, double power);

// Elevation of the UAV seen from the device, degrees; 90 when directly above.
double elevation_deg(const Vec3 &uav_pos, const Vec3 &dev_pos);

// 1 / (1 + a exp(-b (phi - a))), phi in degrees.
double los_probability(const ChannelParams &ch, const Vec3 &uav_pos, const Vec3 &dev_pos);
double los_probability_at(const ChannelParams &ch, double elevation_degrees);

// Average path loss, SNR and TDMA uplink rate from a ground device.
// Throws std::invalid_argument when the UAV and device coincide.
LinkBudget ground_link_budget(const ChannelParams &ch, const Vec3 &uav_pos, const GroundDevice &dev);

// Transparent-payload maximum propagation delay and its round trip in whole slots.
// Throws std::invalid_argument when cos(phi_min) is zero.
DelayModel propagation_delay(const ChannelParams &ch, double slot_length);

// Best LoS probability over all devices. Throws std::invalid_argument on an empty list.
double success_probability(const ChannelParams &ch, const Vec3 &uav_pos, std::span<const GroundDevice> devices);

} // namespace satuav
