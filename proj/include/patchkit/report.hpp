#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "json.hpp"
#include "patchkit/farfield.hpp"
#include "patchkit/geometry_io.hpp"
#include "patchkit/network.hpp"
#include "patchkit/textio.hpp"

namespace patchkit {

/// Substrate-thickness sanity warnings for the closed-form models. The line
/// and slot formulas assume an electrically thin substrate; past h/lambda0
/// of 0.05 they extrapolate and the report says so.
inline void append_model_warnings(nlohmann::json& warnings, const Substrate& sub, double freq) {
    const double h_over_lambda = sub.height * freq / c0;
    if (h_over_lambda > 0.05) {
        warnings.push_back("substrate is electrically thick at " + format_double(freq / 1e9, 6) +
                           " GHz (h/lambda0 = " + format_double(h_over_lambda, 3) +
                           " > 0.05); closed-form line and slot models are extrapolating");
    }
}

/// Synthesis report fragment: patch dimensions for the target frequency plus
/// the line parameters of every conductor class in the layout.
inline nlohmann::json design_report(const GeometrySpec& spec, double f0) {
    if (!(f0 > 0.0)) throw invalid_input("design_report: f0 must be > 0");
    const PatchElement patch = design_patch(f0, spec.substrate);
    const LineParams feed = line_params(spec.feed, spec.substrate, f0);
    const LineParams body =
        line_params(MicrostripLine{patch.width, patch.length}, spec.substrate, f0);
    const LineParams ic = line_params(
        MicrostripLine{spec.interconnect_width, spec.interconnect_length.value_or(1e-3)},
        spec.substrate, f0);

    nlohmann::json j;
    j["f0_ghz"] = f0 / 1e9;
    j["patch_width_mm"] = patch.width * 1e3;
    j["patch_length_mm"] = patch.length * 1e3;
    j["patch_z0_ohm"] = body.z0;
    j["patch_eps_eff"] = body.eps_eff;
    j["feed_z0_ohm"] = feed.z0;
    j["feed_eps_eff"] = feed.eps_eff;
    j["interconnect_z0_ohm"] = ic.z0;
    j["interconnect_eps_eff"] = ic.eps_eff;
    j["warnings"] = nlohmann::json::array();
    append_model_warnings(j["warnings"], spec.substrate, f0);
    return j;
}

/// Reflection summary of a sweep: resonance, minimum reflection, and the
/// matched band around the resonance. Values that do not exist are null with
/// a sibling reason string.
inline nlohmann::json sweep_report(const NetworkResult& net) {
    nlohmann::json j;
    const std::size_t imin = argmin_s11(net);
    const double fres = resonance_frequency(net);
    j["resonance_ghz"] = fres / 1e9;

    const double s11_min = net.s11_db(imin);
    if (std::isfinite(s11_min)) {
        j["s11_min_db"] = s11_min;
    } else {
        j["s11_min_db"] = nullptr;
        j["s11_min_reason"] = "perfect match at the sweep minimum (|gamma| = 0)";
    }
    const double vswr_min = net.vswr[imin];
    if (std::isfinite(vswr_min)) {
        j["vswr_min"] = vswr_min;
    } else {
        j["vswr_min"] = nullptr;
        j["vswr_min_reason"] = "total reflection at the sweep minimum (|gamma| = 1)";
    }

    const Band band = extract_bandwidth(net, fres);
    if (band.empty) {
        j["band_ghz"] = nullptr;
        j["band_reason"] = "reflection at the resonance stays above the -10 dB threshold";
    } else {
        j["band_ghz"] = nlohmann::json::array({band.f_low / 1e9, band.f_high / 1e9});
    }
    return j;
}

/// Serializes one cut, with the sidelobe level null (plus reason) when
/// everything outside the main beam is shadowed.
inline void append_cut_report(nlohmann::json& j, const CutMetrics& cm, const std::string& tag) {
    j["peak_theta_" + tag + "_deg"] = cm.peak_theta_deg;
    j["hpbw_" + tag + "_deg"] = cm.hpbw_deg;
    if (cm.has_sidelobe) {
        j["sll_" + tag + "_db"] = cm.sll_db;
    } else {
        j["sll_" + tag + "_db"] = nullptr;
        j["sll_" + tag + "_reason"] = "no nonzero samples outside the main beam on this cut";
    }
    j["truncated_" + tag] = cm.truncated;
}

/// Full analysis report: sweep summary plus far-field metrics at eval_freq.
inline nlohmann::json metrics_report(const GeometrySpec& spec, double eval_freq,
                                     const SphericalGrid& grid = {}) {
    if (!(eval_freq > 0.0)) throw invalid_input("metrics_report: eval frequency must be > 0");
    const ArrayLayout layout = spec.to_layout();
    const NetworkResult net = analyze_sweep(layout, spec.f_start, spec.f_stop, spec.sweep_points);

    nlohmann::json j = sweep_report(net);
    j["eval_freq_ghz"] = eval_freq / 1e9;

    const ExcitationVector exc = element_excitations(layout, eval_freq);
    const FarFieldPattern pattern = total_pattern(layout, exc, grid);
    const double d_dbi = directivity_dbi(pattern);
    j["directivity_dbi"] = d_dbi;
    append_cut_report(j, cut_metrics(pattern, 0.0), "phi0");
    append_cut_report(j, cut_metrics(pattern, 90.0), "phi90");

    try {
        const GainSummary gain = realized_gain(d_dbi, layout, net, eval_freq);
        j["radiation_efficiency"] = gain.radiation_efficiency;
        j["mismatch_factor"] = gain.mismatch_factor;
        j["peak_gain_dbi"] = gain.realized_gain_dbi;
    } catch (const error& e) {
        j["radiation_efficiency"] = chain_efficiency(layout, eval_freq);
        j["mismatch_factor"] = nullptr;
        j["peak_gain_dbi"] = nullptr;
        j["peak_gain_reason"] = e.what();
    }

    j["warnings"] = nlohmann::json::array();
    append_model_warnings(j["warnings"], spec.substrate, eval_freq);
    return j;
}

/// Full-sphere pattern CSV: `theta_deg,phi_deg,intensity_dbi`, the intensity
/// scaled so each sample reads as directivity in that direction (floored at
/// -300 dB where the pattern is identically zero).
inline void write_pattern_csv(std::ostream& out, const FarFieldPattern& p) {
    p.validate();
    const std::size_t nt = p.grid.n_theta();
    const std::size_t np = p.grid.n_phi();
    const double dth = p.grid.theta_step_deg * pi / 180.0;
    const double dph = p.grid.phi_step_deg * pi / 180.0;
    double power = 0.0;
    for (std::size_t it = 0; it < nt; ++it) {
        const double st = std::sin(p.grid.theta_deg(it) * pi / 180.0);
        const double wt = (it == 0 || it + 1 == nt) ? 0.5 : 1.0;
        for (std::size_t ip = 0; ip < np; ++ip) power += p.at(it, ip) * st * wt;
    }
    power *= dth * dph;
    if (!(power > 0.0)) throw invalid_input("pattern csv: pattern is identically zero");

    out << "theta_deg,phi_deg,intensity_dbi\n";
    for (std::size_t it = 0; it < nt; ++it) {
        for (std::size_t ip = 0; ip < np; ++ip) {
            const double u = p.at(it, ip);
            const double dbi =
                u > 0.0 ? std::max(10.0 * std::log10(4.0 * pi * u / power), -300.0) : -300.0;
            out << format_double(p.grid.theta_deg(it)) << "," << format_double(p.grid.phi_deg(ip))
                << "," << format_double(dbi) << "\n";
        }
    }
}

/// Single-cut CSV: `theta_deg,level_db` over the signed cut angle, peak
/// normalized to exactly 0 dB (floored at -300 dB in shadowed directions).
inline void write_cut_csv(std::ostream& out, const FarFieldPattern& p, double cut_phi_deg) {
    const detail::CutSamples cut = detail::slice_cut(p, cut_phi_deg);
    out << "theta_deg,level_db\n";
    for (std::size_t i = 0; i < cut.xi_deg.size(); ++i) {
        const double level = i == cut.peak ? 0.0 : std::max(cut.level_db[i], -300.0);
        out << format_double(cut.xi_deg[i]) << "," << format_double(level) << "\n";
    }
}

/// Sweep CSV: `freq_ghz,s11_db,vswr`, one row per sweep point.
inline void write_sweep_csv(std::ostream& out, const NetworkResult& net) {
    out << "freq_ghz,s11_db,vswr\n";
    for (std::size_t i = 0; i < net.freqs.size(); ++i) {
        out << scaled::format_shifted(net.freqs[i], -9) << "," << format_double(net.s11_db(i))
            << "," << format_double(net.vswr[i]) << "\n";
    }
}

} // namespace patchkit
