#include "satuav/energy.hpp"

#include <cmath>
#include <stdexcept>

namespace satuav {

PropulsionEnergy propulsion_energy(const EnergyParams &ep, const Vec3 &vel, const Vec3 &accel, double slot) {
    PropulsionEnergy out;
    double speed = vel.norm();
    if (speed < ep.v_floor) {
        speed = ep.v_floor;
        out.floor_clamped = true;
    }
    const double g2 = ep.gravity * ep.gravity;
    out.joules = slot * (ep.kappa1 * speed * speed * speed + ep.kappa2 / speed * (1.0 + accel.squaredNorm() / g2));
    return out;
}

double propulsion_energy_1d(const EnergyParams &ep, double speed, double accel, double slot) {
    const double v = std::max(std::abs(speed), ep.v_floor);
    return slot * (ep.kappa1 * v * v * v + ep.kappa2 / v * (1.0 + accel * accel / (ep.gravity * ep.gravity)));
}

SlotEnergy slot_energy(FlightPhase phase, bool sensed, double power, const Vec3 &vel, const Vec3 &accel,
                       const EnergyParams &ep, double slot, double p_max) {
    if (!(power >= 0.0) || power > p_max) throw std::invalid_argument("slot_energy: power outside [0, p_max]");
    SlotEnergy e;
    if (phase == FlightPhase::flying) {
        const auto prop = propulsion_energy(ep, vel, accel, slot);
        e.propulsion = prop.joules;
        e.floor_clamped = prop.floor_clamped;
    } else {
        e.hover = slot * ep.hover_power;
    }
    e.sensing = sensed ? ep.sensing_energy : 0.0;
    e.comm = power * slot;
    return e;
}

void EnergyLedger::add(const SlotEnergy &e, double bits_uploaded) {
    totals_.propulsion += e.propulsion;
    totals_.hover += e.hover;
    totals_.sensing += e.sensing;
    totals_.comm += e.comm;
    totals_.total_bits_uploaded += bits_uploaded;
}

EnergyReport EnergyLedger::report() const {
    EnergyReport r = totals_;
    r.total_energy = r.propulsion + r.hover + r.sensing + r.comm;
    if (!(r.total_energy > 0.0)) throw std::domain_error("energy report: total energy is zero");
    r.ee = r.total_bits_uploaded / r.total_energy;
    return r;
}

} // namespace satuav
