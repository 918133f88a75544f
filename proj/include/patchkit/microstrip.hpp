#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "patchkit/constants.hpp"
#include "patchkit/errors.hpp"

namespace patchkit {

/// Grounded dielectric substrate with its metallization properties.
struct Substrate {
    double eps_r = 1.0;             ///< relative permittivity (>= 1)
    double tan_delta = 0.0;         ///< dielectric loss tangent (>= 0)
    double height = 0.0;            ///< dielectric thickness [m] (> 0)
    double metal_conductivity = copper_sigma;       ///< [S/m]
    double metal_thickness = default_metal_thickness; ///< [m]

    void validate() const {
        if (!(eps_r >= 1.0)) throw invalid_input("substrate eps_r must be >= 1");
        if (!(tan_delta >= 0.0)) throw invalid_input("substrate tan_delta must be >= 0");
        if (!(height > 0.0)) throw invalid_input("substrate height must be > 0");
        if (!(metal_conductivity > 0.0)) throw invalid_input("substrate metal_conductivity must be > 0");
    }
};

/// A straight microstrip line segment.
struct MicrostripLine {
    double width = 0.0;   ///< trace width [m] (> 0)
    double length = 0.0;  ///< physical length [m] (>= 0)

    void validate() const {
        if (!(width > 0.0)) throw invalid_input("line width must be > 0");
        if (!(length >= 0.0)) throw invalid_input("line length must be >= 0");
    }
};

/// Rectangular radiating patch. W is transverse to the feed axis, L is the
/// resonant dimension along it.
struct PatchElement {
    double width = 0.0;   ///< W [m] (> 0)
    double length = 0.0;  ///< L [m] (> 0)

    void validate() const {
        if (!(width > 0.0)) throw invalid_input("patch width must be > 0");
        if (!(length > 0.0)) throw invalid_input("patch length must be > 0");
    }
};

/// Quasi-static per-line quantities.
struct LineParams {
    double z0 = 0.0;       ///< characteristic impedance [ohm]
    double eps_eff = 1.0;  ///< effective permittivity
    double alpha_d = 0.0;  ///< dielectric loss [Np/m]
    double alpha_c = 0.0;  ///< conductor loss [Np/m]
};

/// Edge-slot equivalent admittance terms of a rectangular patch.
struct SlotAdmittance {
    double g1 = 0.0;   ///< slot self conductance [S]
    double b1 = 0.0;   ///< slot self susceptance [S] (closed form)
    double g12 = 0.0;  ///< mutual conductance between the patch's two slots [S]
};

/// Hammerstad quasi-static effective permittivity of a microstrip of the
/// given trace width. Monotone nondecreasing in width; equals 1 for an air
/// substrate.
inline double effective_permittivity(double width, const Substrate& sub) {
    sub.validate();
    if (!(width > 0.0)) throw invalid_input("effective_permittivity: width must be > 0");
    if (sub.eps_r == 1.0) return 1.0;
    const double u = width / sub.height;
    const double f = 1.0 / std::sqrt(1.0 + 12.0 / u);
    if (u >= 1.0)
        return 0.5 * (sub.eps_r + 1.0) + 0.5 * (sub.eps_r - 1.0) * f;
    const double extra = 0.04 * (1.0 - u) * (1.0 - u);
    return 0.5 * (sub.eps_r + 1.0) + 0.5 * (sub.eps_r - 1.0) * (f + extra);
}

/// Hammerstad characteristic impedance; returns z0 together with the
/// effective permittivity it was computed from (loss terms zero — see
/// line_loss / line_params).
inline LineParams characteristic_impedance(double width, const Substrate& sub) {
    const double ee = effective_permittivity(width, sub); // validates inputs
    const double u = width / sub.height;
    LineParams p;
    p.eps_eff = ee;
    if (u < 1.0)
        p.z0 = 60.0 / std::sqrt(ee) * std::log(8.0 / u + 0.25 * u);
    else
        p.z0 = 120.0 * pi / (std::sqrt(ee) * (u + 1.393 + 0.667 * std::log(u + 1.444)));
    return p;
}

/// Dielectric and conductor attenuation [Np/m] of a line at one frequency.
/// alpha_d uses the filling-factor form; the eps_r -> 1 limit is handled
/// without dividing by zero. alpha_c uses the surface-resistance form
/// Rs = sqrt(pi f mu0 / sigma).
inline std::pair<double, double> line_loss(const MicrostripLine& line,
                                           const Substrate& sub, double freq) {
    line.validate();
    sub.validate();
    if (!(freq > 0.0)) throw invalid_input("line_loss: freq must be > 0");
    const LineParams p = characteristic_impedance(line.width, sub);
    const double k0 = 2.0 * pi * freq / c0;
    double alpha_d;
    if (sub.eps_r > 1.0)
        alpha_d = k0 * sub.eps_r * (p.eps_eff - 1.0) * sub.tan_delta /
                  (2.0 * std::sqrt(p.eps_eff) * (sub.eps_r - 1.0));
    else
        alpha_d = k0 * (p.eps_eff - 1.0) * sub.tan_delta / (2.0 * std::sqrt(p.eps_eff));
    const double rs = std::sqrt(pi * freq * mu0_classic / sub.metal_conductivity);
    const double alpha_c = rs / (p.z0 * line.width);
    return {alpha_d, alpha_c};
}

/// Full quasi-static parameter set of a line at one frequency.
inline LineParams line_params(const MicrostripLine& line, const Substrate& sub, double freq) {
    LineParams p = characteristic_impedance(line.width, sub);
    auto [ad, ac] = line_loss(line, sub, freq);
    p.alpha_d = ad;
    p.alpha_c = ac;
    return p;
}

/// Open-end equivalent length extension (Hammerstad) of a line/patch edge of
/// the given trace width.
inline double open_end_extension(double width, const Substrate& sub) {
    const double ee = effective_permittivity(width, sub);
    const double u = width / sub.height;
    return 0.412 * sub.height * (ee + 0.3) * (u + 0.264) / ((ee - 0.258) * (u + 0.8));
}

/// Synthesizes a rectangular patch resonant at f0 on the given substrate:
/// W from the radiating-width rule, then L as the half guided wavelength
/// shortened by twice the open-end extension. Throws synthesis_infeasible
/// when the extension consumes the whole half-wavelength.
inline PatchElement design_patch(double f0, const Substrate& sub) {
    sub.validate();
    if (!(f0 > 0.0)) throw invalid_input("design_patch: f0 must be > 0");
    PatchElement patch;
    patch.width = c0 / (2.0 * f0) * std::sqrt(2.0 / (sub.eps_r + 1.0));
    const double ee = effective_permittivity(patch.width, sub);
    const double dl = open_end_extension(patch.width, sub);
    patch.length = c0 / (2.0 * f0 * std::sqrt(ee)) - 2.0 * dl;
    if (!(patch.length > 0.0))
        throw synthesis_infeasible(
            "design_patch: open-end extension delta_L = " + std::to_string(dl * 1e3) +
            " mm exceeds the available half guided wavelength; substrate is too thick for " +
            std::to_string(f0 / 1e9) + " GHz");
    return patch;
}

namespace detail {

/// Integrand of the two-slot mutual-conductance integral at polar angle th:
/// [sin((k0 W/2) cos th)/cos th]^2 * J0(k0 L sin th) * sin^3 th.
inline double g12_integrand(double th, double k0w_half, double k0l) {
    const double c = std::cos(th);
    const double s = std::sin(th);
    double slot;
    if (std::abs(c) < 1e-12)
        slot = k0w_half; // sin(a*c)/c -> a as c -> 0
    else
        slot = std::sin(k0w_half * c) / c;
    return slot * slot * std::cyl_bessel_j(0.0, k0l * s) * s * s * s;
}

} // namespace detail

/// Edge-slot admittance terms of a patch at one frequency. g1 and b1 are the
/// closed-form slot self terms; g12 is the mutual conductance between the two
/// slots, integrated by an n_quad-point uniform trapezoid over [0, pi]
/// (default 2001 points).
inline SlotAdmittance patch_slot_admittance(const PatchElement& patch, const Substrate& sub,
                                            double freq, int n_quad = 2001) {
    sub.validate();
    if (!(patch.width > 0.0)) throw invalid_input("patch_slot_admittance: width must be > 0");
    if (!(patch.length >= 0.0)) throw invalid_input("patch_slot_admittance: length must be >= 0");
    if (!(freq > 0.0)) throw invalid_input("patch_slot_admittance: freq must be > 0");
    if (n_quad < 3) throw invalid_input("patch_slot_admittance: n_quad must be >= 3");

    const double lam0 = c0 / freq;
    const double k0 = 2.0 * pi / lam0;
    SlotAdmittance y;
    y.g1 = patch.width / (120.0 * lam0) * (1.0 - (k0 * sub.height) * (k0 * sub.height) / 24.0);
    y.b1 = patch.width / (120.0 * lam0) * (1.0 - 0.636 * std::log(k0 * sub.height));

    const double k0w_half = 0.5 * k0 * patch.width;
    const double k0l = k0 * patch.length;
    const double h = pi / static_cast<double>(n_quad - 1);
    double sum = 0.5 * (detail::g12_integrand(0.0, k0w_half, k0l) +
                        detail::g12_integrand(pi, k0w_half, k0l));
    for (int i = 1; i < n_quad - 1; ++i)
        sum += detail::g12_integrand(h * static_cast<double>(i), k0w_half, k0l);
    y.g12 = sum * h / (120.0 * pi * pi);
    return y;
}

/// Susceptance of a patch edge modeled as its open-end equivalent line
/// extension: Y0_patch * tan(beta_patch * delta_L) at the given frequency.
/// This is the fringe susceptance consistent with the length shortening used
/// by design_patch (the two agree with the closed-form b1 on electrically
/// thin substrates and stay consistent with the synthesis on thick ones).
inline double slot_open_end_susceptance(const PatchElement& patch, const Substrate& sub,
                                        double freq) {
    if (!(freq > 0.0)) throw invalid_input("slot_open_end_susceptance: freq must be > 0");
    const LineParams p = characteristic_impedance(patch.width, sub);
    const double dl = open_end_extension(patch.width, sub);
    const double beta = 2.0 * pi * freq * std::sqrt(p.eps_eff) / c0;
    return std::tan(beta * dl) / p.z0;
}

} // namespace patchkit
