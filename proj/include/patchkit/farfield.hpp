#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include "patchkit/microstrip.hpp"
#include "patchkit/network.hpp"

namespace patchkit {

/// Uniform spherical sampling: theta in [0, 180] degrees inclusive, phi in
/// [0, 360) exclusive. Steps must divide their ranges evenly.
struct SphericalGrid {
    double theta_step_deg = 0.5;
    double phi_step_deg = 0.5;

    void validate() const {
        auto divides = [](double range, double step) {
            if (!(step > 0.0)) return false;
            const double n = range / step;
            return std::abs(n - std::round(n)) < 1e-9;
        };
        if (!divides(180.0, theta_step_deg))
            throw invalid_input("grid: theta step must divide 180 degrees evenly");
        if (!divides(360.0, phi_step_deg))
            throw invalid_input("grid: phi step must divide 360 degrees evenly");
    }

    std::size_t n_theta() const {
        return static_cast<std::size_t>(std::round(180.0 / theta_step_deg)) + 1;
    }
    std::size_t n_phi() const {
        return static_cast<std::size_t>(std::round(360.0 / phi_step_deg));
    }
    double theta_deg(std::size_t i) const { return theta_step_deg * static_cast<double>(i); }
    double phi_deg(std::size_t j) const { return phi_step_deg * static_cast<double>(j); }
};

/// Radiation intensity sampled on a SphericalGrid, row-major in theta.
/// Intensity is relative (any positive scale); metrics are scale-invariant.
struct FarFieldPattern {
    SphericalGrid grid;
    double freq = 0.0;               ///< [Hz]
    std::vector<double> intensity;   ///< size n_theta * n_phi

    double& at(std::size_t it, std::size_t ip) { return intensity[it * grid.n_phi() + ip]; }
    double at(std::size_t it, std::size_t ip) const { return intensity[it * grid.n_phi() + ip]; }

    void validate() const {
        grid.validate();
        if (intensity.size() != grid.n_theta() * grid.n_phi())
            throw invalid_input("pattern: intensity size does not match the grid");
    }
};

/// Field magnitude of one rectangular radiator over a ground plane, broadside
/// along +z with the resonant axis along x: u = sin(theta)cos(phi),
/// v = sin(theta)sin(phi),
///   F = sqrt(1 - v^2) * |sinc(k0*w/2 * v)| * |cos(k0*le/2 * u)|,
/// zero below the ground plane (theta > 90 deg). le is the effective
/// resonant length including fringing extensions.
inline double patch_element_field(double theta_rad, double phi_rad, double k0, double width,
                                  double eff_length) {
    if (theta_rad > pi / 2.0 + 1e-12) return 0.0;
    const double st = std::sin(theta_rad);
    const double u = st * std::cos(phi_rad);
    const double v = st * std::sin(phi_rad);
    const double x = 0.5 * k0 * width * v;
    const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
    const double obliquity = std::sqrt(std::max(0.0, 1.0 - v * v));
    return obliquity * std::abs(sinc) * std::abs(std::cos(0.5 * k0 * eff_length * u));
}

/// Same, with the effective length derived from the patch and substrate
/// (physical length plus two open-end extensions).
inline double patch_element_field(double theta_rad, double phi_rad, const PatchElement& patch,
                                  const Substrate& sub, double freq) {
    const double k0 = 2.0 * pi * freq / c0;
    const double le = patch.length + 2.0 * open_end_extension(patch.width, sub);
    return patch_element_field(theta_rad, phi_rad, k0, patch.width, le);
}

/// Array factor of point sources on the x axis: AF = sum_n a_n exp(+j k0 x_n u)
/// with u = sin(theta)cos(phi).
inline cplx array_factor(double theta_rad, double phi_rad, const std::vector<cplx>& amplitudes,
                         const std::vector<double>& positions, double k0) {
    if (amplitudes.size() != positions.size())
        throw invalid_input("array_factor: amplitude and position counts differ");
    if (amplitudes.empty()) throw invalid_input("array_factor: empty array");
    const double u = std::sin(theta_rad) * std::cos(phi_rad);
    cplx af{0.0, 0.0};
    for (std::size_t n = 0; n < amplitudes.size(); ++n)
        af += amplitudes[n] * std::exp(cplx{0.0, k0 * positions[n] * u});
    return af;
}

/// Intensity of the bare array factor (isotropic elements) on a grid.
inline FarFieldPattern array_pattern(const std::vector<cplx>& amplitudes,
                                     const std::vector<double>& positions, double freq,
                                     const SphericalGrid& grid = {}) {
    grid.validate();
    if (!(freq > 0.0)) throw invalid_input("array_pattern: freq must be > 0");
    const double k0 = 2.0 * pi * freq / c0;
    FarFieldPattern p;
    p.grid = grid;
    p.freq = freq;
    p.intensity.resize(grid.n_theta() * grid.n_phi());
    for (std::size_t it = 0; it < grid.n_theta(); ++it) {
        const double th = grid.theta_deg(it) * pi / 180.0;
        for (std::size_t ip = 0; ip < grid.n_phi(); ++ip) {
            const double phv = grid.phi_deg(ip) * pi / 180.0;
            const double mag = std::abs(array_factor(th, phv, amplitudes, positions, k0));
            p.at(it, ip) = mag * mag;
        }
    }
    return p;
}

/// Radiation intensity of the full array by pattern multiplication: the
/// common element factor times the array factor of the per-patch radiating
/// voltages at their centers, squared.
inline FarFieldPattern total_pattern(const ArrayLayout& layout, const ExcitationVector& exc,
                                     const SphericalGrid& grid = {}) {
    grid.validate();
    layout.validate();
    if (exc.amplitudes.size() != layout.patches.size())
        throw invalid_input("total_pattern: excitation count does not match patch count");
    if (!(exc.freq > 0.0)) throw invalid_input("total_pattern: excitation frequency must be > 0");

    const double k0 = 2.0 * pi * exc.freq / c0;
    const PatchElement& ref = layout.patches.front();
    const double le = ref.length + 2.0 * open_end_extension(ref.width, layout.substrate);
    const std::vector<double> xs = element_positions(layout);

    FarFieldPattern p;
    p.grid = grid;
    p.freq = exc.freq;
    p.intensity.resize(grid.n_theta() * grid.n_phi());
    for (std::size_t it = 0; it < grid.n_theta(); ++it) {
        const double th = grid.theta_deg(it) * pi / 180.0;
        for (std::size_t ip = 0; ip < grid.n_phi(); ++ip) {
            const double phv = grid.phi_deg(ip) * pi / 180.0;
            const double elem = patch_element_field(th, phv, k0, ref.width, le);
            if (elem == 0.0) {
                p.at(it, ip) = 0.0;
                continue;
            }
            const double mag = elem * std::abs(array_factor(th, phv, exc.amplitudes, xs, k0));
            p.at(it, ip) = mag * mag;
        }
    }
    return p;
}

/// Peak directivity in dBi: D = 4*pi*U_max / integral(U dOmega), the solid
/// angle integral taken as trapezoid in theta (half end weights) times
/// rectangle in phi.
inline double directivity_dbi(const FarFieldPattern& p) {
    p.validate();
    const std::size_t nt = p.grid.n_theta();
    const std::size_t np = p.grid.n_phi();
    const double dth = p.grid.theta_step_deg * pi / 180.0;
    const double dph = p.grid.phi_step_deg * pi / 180.0;
    double u_max = 0.0;
    double power = 0.0;
    for (std::size_t it = 0; it < nt; ++it) {
        const double st = std::sin(p.grid.theta_deg(it) * pi / 180.0);
        const double wt = (it == 0 || it + 1 == nt) ? 0.5 : 1.0;
        for (std::size_t ip = 0; ip < np; ++ip) {
            const double u = p.at(it, ip);
            if (u < 0.0) throw invalid_input("directivity: negative intensity sample");
            u_max = std::max(u_max, u);
            power += u * st * wt;
        }
    }
    power *= dth * dph;
    if (!(u_max > 0.0)) throw invalid_input("directivity: pattern is identically zero");
    if (!(power > 0.0)) throw invalid_input("directivity: radiated power integral is zero");
    return 10.0 * std::log10(4.0 * pi * u_max / power);
}

/// Principal-cut beam metrics. The cut is the great circle through both
/// poles at azimuth cut_phi_deg, parameterized by a signed angle
/// xi in (-180, 180]: xi >= 0 maps to (theta = xi, phi = cut_phi),
/// xi < 0 maps to (theta = -xi, phi = cut_phi + 180).
struct CutMetrics {
    double cut_phi_deg = 0.0;
    double peak_theta_deg = 0.0; ///< signed cut angle of the peak sample
    double hpbw_deg = 0.0;       ///< width between -3 dB crossings; 360 if never crossed
    double sll_db = 0.0;         ///< highest level outside the main-beam nulls, dB rel. peak
    bool has_sidelobe = false;   ///< false when everything outside the nulls is zero
    bool truncated = false;      ///< the -3 dB edge fell on a zero-intensity (shadowed) sample
};

namespace detail {

/// Cut sample extracted from a grid: signed angle, intensity, zero flag.
struct CutSamples {
    std::vector<double> xi_deg;
    std::vector<double> level_db; ///< dB relative to the cut maximum, floored
    std::vector<bool> is_zero;
    std::size_t peak = 0;
};

inline CutSamples slice_cut(const FarFieldPattern& p, double cut_phi_deg) {
    p.validate();
    const double ps = p.grid.phi_step_deg;
    const double phi_a = std::fmod(std::fmod(cut_phi_deg, 360.0) + 360.0, 360.0);
    const double phi_b = std::fmod(phi_a + 180.0, 360.0);
    auto column = [&](double phi) {
        const double idx = phi / ps;
        if (std::abs(idx - std::round(idx)) > 1e-6)
            throw invalid_input("cut_metrics: cut azimuth is not a grid column");
        return static_cast<std::size_t>(std::round(idx)) % p.grid.n_phi();
    };
    const std::size_t ja = column(phi_a);
    const std::size_t jb = column(phi_b);
    const std::size_t nt = p.grid.n_theta();
    const double ts = p.grid.theta_step_deg;

    CutSamples cut;
    cut.xi_deg.reserve(2 * (nt - 1));
    std::vector<double> raw;
    raw.reserve(2 * (nt - 1));
    // xi in (-180, 0): theta = -xi at phi + 180, poles excluded.
    for (std::size_t k = nt - 1; k >= 1; --k) {
        if (k + 1 == nt) continue; // theta = 180 belongs to the positive branch
        cut.xi_deg.push_back(-ts * static_cast<double>(k));
        raw.push_back(p.at(k, jb));
    }
    // xi in [0, 180]: theta = xi at phi.
    for (std::size_t k = 0; k < nt; ++k) {
        cut.xi_deg.push_back(ts * static_cast<double>(k));
        raw.push_back(p.at(k, ja));
    }

    double peak_val = raw[0];
    cut.peak = 0;
    for (std::size_t i = 1; i < raw.size(); ++i) {
        if (raw[i] > peak_val) {
            peak_val = raw[i];
            cut.peak = i;
        }
    }
    if (!(peak_val > 0.0)) throw invalid_input("cut_metrics: cut is identically zero");

    cut.level_db.resize(raw.size());
    cut.is_zero.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        cut.is_zero[i] = raw[i] == 0.0;
        cut.level_db[i] = 10.0 * std::log10(std::max(raw[i], 1e-40) / peak_val);
    }
    return cut;
}

} // namespace detail

/// Beam metrics of one azimuth cut. The walk from the peak is circular (the
/// cut closes through the theta = 180 pole); -3 dB edges are linearly
/// interpolated in (angle, dB); the main beam ends at the first local
/// minimum on each side, and the sidelobe level is the highest sample
/// outside that null-to-null arc.
inline CutMetrics cut_metrics(const FarFieldPattern& p, double cut_phi_deg) {
    const detail::CutSamples cut = detail::slice_cut(p, cut_phi_deg);
    const std::size_t n = cut.xi_deg.size();
    auto wrap = [n](std::ptrdiff_t i) {
        const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(n);
        return static_cast<std::size_t>(((i % m) + m) % m);
    };
    const double step = p.grid.theta_step_deg;

    CutMetrics m;
    m.cut_phi_deg = cut_phi_deg;
    m.peak_theta_deg = cut.xi_deg[cut.peak];

    // -3 dB crossings, walking outward from the peak in both directions.
    const double level = -3.0;
    bool crossed[2] = {false, false};
    double offset[2] = {0.0, 0.0}; // unwrapped distance from the peak to the crossing
    for (int dir = 0; dir < 2; ++dir) {
        const std::ptrdiff_t d = dir == 0 ? -1 : +1;
        std::ptrdiff_t i = static_cast<std::ptrdiff_t>(cut.peak);
        for (std::size_t taken = 1; taken < n; ++taken) {
            const std::size_t prev = wrap(i);
            const std::size_t curr = wrap(i + d);
            if (cut.level_db[curr] <= level) {
                crossed[dir] = true;
                const double y1 = cut.level_db[prev];
                const double y2 = cut.level_db[curr];
                double frac = 0.5;
                if (cut.is_zero[curr]) {
                    m.truncated = true; // edge falls into a shadowed region
                } else if (y2 < y1) {
                    frac = (level - y1) / (y2 - y1);
                }
                offset[dir] = step * (static_cast<double>(taken) - 1.0 + frac);
                break;
            }
            i += d;
        }
    }
    m.hpbw_deg = (crossed[0] && crossed[1]) ? offset[0] + offset[1] : 360.0;

    // Main-beam nulls: first non-strict local minimum on each side.
    auto find_null = [&](std::ptrdiff_t d) {
        std::ptrdiff_t i = static_cast<std::ptrdiff_t>(cut.peak);
        for (std::size_t taken = 1; taken + 1 < n; ++taken) {
            i += d;
            const std::size_t c = wrap(i);
            if (cut.level_db[c] <= cut.level_db[wrap(i - 1)] &&
                cut.level_db[c] <= cut.level_db[wrap(i + 1)])
                return c;
        }
        return wrap(static_cast<std::ptrdiff_t>(cut.peak) + d * static_cast<std::ptrdiff_t>(n / 2));
    };
    const std::size_t nl = find_null(-1);
    const std::size_t nr = find_null(+1);

    // Exclude the arc nl -> peak -> nr; scan the rest.
    std::vector<bool> excluded(n, false);
    for (std::size_t i = nl;; i = wrap(static_cast<std::ptrdiff_t>(i) + 1)) {
        excluded[i] = true;
        if (i == nr) break;
    }
    double best = -std::numeric_limits<double>::infinity();
    bool best_zero = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (excluded[i]) continue;
        if (cut.level_db[i] > best) {
            best = cut.level_db[i];
            best_zero = cut.is_zero[i];
        }
    }
    if (std::isfinite(best) && !best_zero) {
        m.has_sidelobe = true;
        m.sll_db = best;
    } else {
        m.has_sidelobe = false;
        m.sll_db = -std::numeric_limits<double>::infinity();
    }
    return m;
}

/// Peak directivity combined with dissipative and mismatch losses.
struct GainSummary {
    double directivity_dbi = 0.0;
    double radiation_efficiency = 0.0; ///< exp(-2 sum(alpha_i * l_i)), in (0, 1]
    double mismatch_factor = 0.0;      ///< 1 - |gamma|^2, in [0, 1]
    double realized_gain_dbi = 0.0;
};

/// Dissipative efficiency of the feed chain: conductor plus dielectric
/// attenuation accumulated over the feed line, every patch body, and every
/// interconnect, applied as exp(-2 * sum(alpha * length)).
inline double chain_efficiency(const ArrayLayout& layout, double freq) {
    layout.validate();
    double al = 0.0;
    auto add = [&](const MicrostripLine& line) {
        const auto [alpha_d, alpha_c] = line_loss(line, layout.substrate, freq);
        al += (alpha_d + alpha_c) * line.length;
    };
    add(layout.feed);
    for (const auto& patch : layout.patches) add(MicrostripLine{patch.width, patch.length});
    for (const auto& ic : layout.interconnects) add(ic);
    return std::exp(-2.0 * al);
}

/// Complex input reflection at an arbitrary frequency inside a sweep,
/// linearly interpolated between the two bracketing samples.
inline cplx interpolate_gamma(const NetworkResult& net, double freq) {
    if (net.freqs.size() < 2) throw invalid_input("interpolate_gamma: sweep too short");
    if (!(freq >= net.freqs.front() && freq <= net.freqs.back()))
        throw invalid_input("interpolate_gamma: frequency outside the sweep");
    const auto it = std::lower_bound(net.freqs.begin(), net.freqs.end(), freq);
    std::size_t hi = static_cast<std::size_t>(it - net.freqs.begin());
    if (hi == 0) hi = 1;
    const std::size_t lo = hi - 1;
    const double t = (freq - net.freqs[lo]) / (net.freqs[hi] - net.freqs[lo]);
    return net.s11[lo] + t * (net.s11[hi] - net.s11[lo]);
}

/// Realized gain: directivity reduced by dissipative efficiency and the
/// source mismatch 1 - |gamma|^2 at the evaluation frequency.
inline GainSummary realized_gain(double directivity_dbi_value, const ArrayLayout& layout,
                                 const NetworkResult& net, double freq) {
    GainSummary g;
    g.directivity_dbi = directivity_dbi_value;
    g.radiation_efficiency = chain_efficiency(layout, freq);
    const double mag = std::abs(interpolate_gamma(net, freq));
    g.mismatch_factor = std::max(0.0, 1.0 - mag * mag);
    if (!(g.mismatch_factor > 0.0))
        throw invalid_input("realized_gain: total reflection at the evaluation frequency");
    g.realized_gain_dbi =
        directivity_dbi_value + 10.0 * std::log10(g.radiation_efficiency * g.mismatch_factor);
    return g;
}

} // namespace patchkit
