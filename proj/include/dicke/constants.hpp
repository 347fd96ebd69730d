#pragma once

namespace dicke {

// CODATA Boltzmann constant. All energies in this library are eV and all
// temperatures kelvin, so this is the only unit conversion that ever appears.
inline constexpr double kB_ev = 8.617333262e-5;

// Room temperature default used throughout the molecular-polariton runs.
inline constexpr double room_temperature_k = 300.0;

} // namespace dicke
