#pragma once

#include "satuav/scenario.hpp"

namespace satuav {

enum class FlightPhase { flying, hovering };

struct PropulsionEnergy {
    double joules = 0.0;
    bool floor_clamped = false;  // speed was raised to v_floor
};

struct SlotEnergy {
    double propulsion = 0.0;
    double hover = 0.0;
    double sensing = 0.0;
    double comm = 0.0;
    bool floor_clamped = false;

    double total() const { return propulsion + hover + sensing + comm; }
};

struct EnergyReport {
    double propulsion = 0.0;
    double hover = 0.0;
    double sensing = 0.0;
    double comm = 0.0;
    double total_energy = 0.0;
    double total_bits_uploaded = 0.0;
    double ee = 0.0;  // bit/J
};

// delta (kappa1 |v|^3 + kappa2 / |v| (1 + |u|^2 / g^2)), |v| raised to v_floor when slower.
PropulsionEnergy propulsion_energy(const EnergyParams &ep, const Vec3 &vel, const Vec3 &accel, double slot);

// Scalar form used by the 1-D planner.
double propulsion_energy_1d(const EnergyParams &ep, double speed, double accel, double slot);

// Throws std::invalid_argument when power is negative or above p_max.
SlotEnergy slot_energy(FlightPhase phase, bool sensed, double power, const Vec3 &vel, const Vec3 &accel,
                       const EnergyParams &ep, double slot, double p_max);

// Accumulates slots into category totals; ee = bits / energy.
class EnergyLedger {
public:
    void add(const SlotEnergy &e, double bits_uploaded);
    // Throws std::domain_error when no energy has been consumed.
    EnergyReport report() const;

private:
    EnergyReport totals_;
};

} // namespace satuav
