#pragma once

namespace patchkit {

/// Speed of light in vacuum [m/s].
inline constexpr double c0 = 299792458.0;

/// Vacuum permeability [H/m].
inline constexpr double mu0 = 1.25663706212e-6;

/// Exact 4*pi*1e-7 variant used by the closed-form surface-resistance
/// expression Rs = sqrt(pi*f*mu0/sigma); kept separate so the loss formulas
/// remain hand-checkable against their textbook statement.
inline constexpr double mu0_classic = 4.0e-7 * 3.14159265358979323846;

inline constexpr double pi = 3.14159265358979323846;

/// Copper conductivity [S/m], default cladding metal.
inline constexpr double copper_sigma = 5.8e7;

/// Default metallization thickness [m] (standard 1 oz laminate cladding).
inline constexpr double default_metal_thickness = 35e-6;

/// Default reference impedance [ohm] for reflection quantities.
inline constexpr double default_z_ref = 50.0;

} // namespace patchkit
