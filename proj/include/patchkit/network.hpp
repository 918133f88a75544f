#pragma once

#include <algorithm>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "patchkit/microstrip.hpp"

namespace patchkit {

using cplx = std::complex<double>;

/// Chain (ABCD) matrix of a reciprocal two-port. b is in ohms, c in siemens,
/// a and d dimensionless; reciprocal constituents satisfy a*d - b*c = 1.
struct TwoPortABCD {
    cplx a{1.0, 0.0};
    cplx b{0.0, 0.0};
    cplx c{0.0, 0.0};
    cplx d{1.0, 0.0};

    static TwoPortABCD identity() { return {}; }

    cplx determinant() const { return a * d - b * c; }
};

/// ABCD matrix of a lossy line segment: gamma = alpha + j*beta with
/// beta = 2*pi*f*sqrt(eps_eff)/c; A = D = cosh(gamma*l), B = Z0*sinh(gamma*l),
/// C = sinh(gamma*l)/Z0. Zero length gives the identity.
inline TwoPortABCD abcd_line(const LineParams& params, double length, double freq) {
    if (!(length >= 0.0)) throw invalid_input("abcd_line: length must be >= 0");
    if (!(freq > 0.0)) throw invalid_input("abcd_line: freq must be > 0");
    if (!(params.z0 > 0.0)) throw invalid_input("abcd_line: z0 must be > 0");
    const double beta = 2.0 * pi * freq * std::sqrt(params.eps_eff) / c0;
    const cplx gamma_l{(params.alpha_d + params.alpha_c) * length, beta * length};
    TwoPortABCD m;
    m.a = std::cosh(gamma_l);
    m.b = params.z0 * std::sinh(gamma_l);
    m.c = std::sinh(gamma_l) / params.z0;
    m.d = m.a;
    return m;
}

/// ABCD matrix of a shunt admittance y across the line.
inline TwoPortABCD abcd_shunt(cplx y) {
    TwoPortABCD m;
    m.c = y;
    return m;
}

/// Cascade of two two-ports (matrix product, left feeds right).
inline TwoPortABCD cascade(const TwoPortABCD& lhs, const TwoPortABCD& rhs) {
    TwoPortABCD m;
    m.a = lhs.a * rhs.a + lhs.b * rhs.c;
    m.b = lhs.a * rhs.b + lhs.b * rhs.d;
    m.c = lhs.c * rhs.a + lhs.d * rhs.c;
    m.d = lhs.c * rhs.b + lhs.d * rhs.d;
    return m;
}

/// Cascade of an ordered list of two-ports.
inline TwoPortABCD cascade(const std::vector<TwoPortABCD>& chain) {
    if (chain.empty()) throw invalid_input("cascade: empty two-port list");
    TwoPortABCD m = chain.front();
    for (std::size_t i = 1; i < chain.size(); ++i) m = cascade(m, chain[i]);
    return m;
}

/// Series-fed linear array geometry: one feed line, N patches, N-1
/// interconnect lines, and the edge-to-edge gap the interconnects realize.
struct ArrayLayout {
    Substrate substrate;
    MicrostripLine feed;
    std::vector<PatchElement> patches;
    std::vector<MicrostripLine> interconnects;
    double gap = 0.0; ///< edge-to-edge patch spacing [m]; equals interconnect length

    void validate() const {
        substrate.validate();
        feed.validate();
        if (patches.empty()) throw invalid_input("layout: at least one patch required");
        if (interconnects.size() + 1 != patches.size())
            throw invalid_input("layout: interconnect count must be patch count - 1");
        for (const auto& p : patches) p.validate();
        for (const auto& ic : interconnects) {
            ic.validate();
            if (std::abs(ic.length - gap) > 1e-12)
                throw invalid_input("layout: interconnect length must equal the gap");
        }
        if (!(gap > 0.0)) throw invalid_input("layout: gap must be > 0");
    }
};

/// Full chain matrix plus the cumulative matrices from the input up to each
/// radiating-slot node (two per patch, in feed order), recorded for
/// excitation extraction.
struct ChainResult {
    TwoPortABCD total;
    std::vector<TwoPortABCD> to_slot;
};

namespace detail {

/// Per-frequency cache of slot shunt admittances for identical patch
/// dimensions, so sweeps over arrays of equal patches do not repeat the
/// mutual-conductance quadrature.
class SlotYCache {
public:
    SlotYCache(const Substrate& sub, double freq) : sub_(sub), freq_(freq) {}

    cplx shunt_admittance(const PatchElement& patch) {
        const auto key = std::make_pair(patch.width, patch.length);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const SlotAdmittance y = patch_slot_admittance(patch, sub_, freq_);
        const double b_open = slot_open_end_susceptance(patch, sub_, freq_);
        const cplx ys{y.g1 + y.g12, b_open};
        cache_.emplace(key, ys);
        return ys;
    }

private:
    Substrate sub_;
    double freq_;
    std::map<std::pair<double, double>, cplx> cache_;
};

} // namespace detail

/// Builds the series-fed chain at one frequency:
/// feed line, then per patch { slot shunt, patch-body line, slot shunt,
/// interconnect (omitted after the last patch) }, to be terminated in an
/// open circuit after the final slot. Each slot shunt is
/// (g1 + g12) + j*Y0_patch*tan(beta*delta_L): radiation conductance from the
/// closed forms, fringe susceptance as the open-end equivalent extension so
/// the chain resonance stays consistent with design_patch on substrates of
/// any electrical thickness.
inline ChainResult build_chain(const ArrayLayout& layout, double freq) {
    layout.validate();
    if (!(freq > 0.0)) throw invalid_input("build_chain: freq must be > 0");

    detail::SlotYCache slots(layout.substrate, freq);
    ChainResult result;
    result.total = abcd_line(line_params(layout.feed, layout.substrate, freq),
                             layout.feed.length, freq);
    result.to_slot.reserve(2 * layout.patches.size());

    for (std::size_t i = 0; i < layout.patches.size(); ++i) {
        const PatchElement& patch = layout.patches[i];
        const cplx ys = slots.shunt_admittance(patch);
        const MicrostripLine body{patch.width, patch.length};
        result.to_slot.push_back(result.total); // node at the leading slot
        result.total = cascade(result.total, abcd_shunt(ys));
        result.total = cascade(result.total,
                               abcd_line(line_params(body, layout.substrate, freq),
                                         body.length, freq));
        result.to_slot.push_back(result.total); // node at the trailing slot
        result.total = cascade(result.total, abcd_shunt(ys));
        if (i + 1 < layout.patches.size()) {
            const MicrostripLine& ic = layout.interconnects[i];
            result.total = cascade(result.total,
                                   abcd_line(line_params(ic, layout.substrate, freq),
                                             ic.length, freq));
        }
    }
    return result;
}

/// Input impedance of a chain terminated in z_load; std::nullopt means an
/// open circuit (Zin = A/C). Throws resonant_singularity on a vanishing
/// denominator.
inline cplx input_impedance(const TwoPortABCD& chain, std::optional<cplx> z_load = std::nullopt,
                            double freq_annotation = 0.0) {
    cplx num, den;
    if (z_load) {
        num = chain.a * *z_load + chain.b;
        den = chain.c * *z_load + chain.d;
    } else {
        num = chain.a;
        den = chain.c;
    }
    if (std::abs(den) == 0.0) {
        std::string msg = "input_impedance: singular denominator";
        if (freq_annotation > 0.0)
            msg += " at " + std::to_string(freq_annotation / 1e9) + " GHz";
        throw resonant_singularity(msg);
    }
    return num / den;
}

/// Reflection quantities of an input impedance against a reference.
struct Reflection {
    cplx gamma;
    double s11_db;  ///< 20*log10|gamma|; -inf sentinel when matched exactly
    double vswr;    ///< (1+|g|)/(1-|g|); +inf sentinel when |g| = 1
};

inline Reflection reflection(cplx zin, double z_ref = default_z_ref) {
    const cplx denom = zin + z_ref;
    if (std::abs(denom) == 0.0) throw invalid_input("reflection: zin + z_ref must be nonzero");
    Reflection r;
    r.gamma = (zin - z_ref) / denom;
    const double mag = std::abs(r.gamma);
    r.s11_db = mag > 0.0 ? 20.0 * std::log10(mag)
                         : -std::numeric_limits<double>::infinity();
    r.vswr = mag < 1.0 ? (1.0 + mag) / (1.0 - mag)
                       : std::numeric_limits<double>::infinity();
    return r;
}

/// Sweep result: per-frequency reflection data of a layout against z_ref.
struct NetworkResult {
    std::vector<double> freqs;  ///< [Hz], uniformly spaced, ascending
    std::vector<cplx> s11;
    std::vector<cplx> zin;
    std::vector<double> vswr;
    double z_ref = default_z_ref;

    double s11_db(std::size_t i) const {
        const double mag = std::abs(s11[i]);
        return mag > 0.0 ? 20.0 * std::log10(mag)
                         : -std::numeric_limits<double>::infinity();
    }
};

/// Open-terminated input reflection of the layout across a uniform frequency
/// grid, endpoints included.
inline NetworkResult analyze_sweep(const ArrayLayout& layout, double f_start, double f_stop,
                                   int n_points, double z_ref = default_z_ref) {
    if (!(f_start < f_stop)) throw invalid_input("analyze_sweep: f_start must be < f_stop");
    if (n_points < 2) throw invalid_input("analyze_sweep: n_points must be >= 2");
    layout.validate();

    NetworkResult result;
    result.z_ref = z_ref;
    result.freqs.resize(static_cast<std::size_t>(n_points));
    result.s11.resize(result.freqs.size());
    result.zin.resize(result.freqs.size());
    result.vswr.resize(result.freqs.size());
    const double step = (f_stop - f_start) / static_cast<double>(n_points - 1);
    for (int i = 0; i < n_points; ++i) {
        const double f = i + 1 == n_points ? f_stop : f_start + step * i;
        try {
            const ChainResult chain = build_chain(layout, f);
            const cplx zin = input_impedance(chain.total, std::nullopt, f);
            const Reflection r = reflection(zin, z_ref);
            result.freqs[static_cast<std::size_t>(i)] = f;
            result.s11[static_cast<std::size_t>(i)] = r.gamma;
            result.zin[static_cast<std::size_t>(i)] = zin;
            result.vswr[static_cast<std::size_t>(i)] = r.vswr;
        } catch (const error& e) {
            throw error("analyze_sweep: at " + std::to_string(f / 1e9) + " GHz: " + e.what());
        }
    }
    return result;
}

/// Index of the |S11| minimum of a sweep.
inline std::size_t argmin_s11(const NetworkResult& result) {
    std::size_t best = 0;
    double best_mag = std::abs(result.s11[0]);
    for (std::size_t i = 1; i < result.s11.size(); ++i) {
        const double mag = std::abs(result.s11[i]);
        if (mag < best_mag) {
            best_mag = mag;
            best = i;
        }
    }
    return best;
}

/// Resonance estimate: the |S11| argmin refined by a three-point parabola in
/// (frequency, dB) when the minimum is interior to the sweep.
inline double resonance_frequency(const NetworkResult& result) {
    const std::size_t i = argmin_s11(result);
    if (i == 0 || i + 1 == result.freqs.size()) return result.freqs[i];
    const double y0 = result.s11_db(i - 1);
    const double y1 = result.s11_db(i);
    const double y2 = result.s11_db(i + 1);
    if (!std::isfinite(y0) || !std::isfinite(y1) || !std::isfinite(y2)) return result.freqs[i];
    const double denom = y0 - 2.0 * y1 + y2;
    if (std::abs(denom) < 1e-300) return result.freqs[i];
    const double shift = 0.5 * (y0 - y2) / denom;
    const double step = result.freqs[1] - result.freqs[0];
    return result.freqs[i] + std::clamp(shift, -1.0, 1.0) * step;
}

/// Contiguous matched band around a center frequency.
struct Band {
    double f_low = 0.0;
    double f_high = 0.0;
    bool empty = true;

    double width() const { return empty ? 0.0 : f_high - f_low; }
};

/// Maximal contiguous band containing f_center where s11_db <= threshold_db,
/// edges refined by linear interpolation in (frequency, dB). Returns an empty
/// Band when the center itself is above threshold.
inline Band extract_bandwidth(const NetworkResult& result, double f_center,
                              double threshold_db = -10.0) {
    if (result.freqs.empty()) throw invalid_input("extract_bandwidth: empty sweep");
    if (!(f_center >= result.freqs.front() && f_center <= result.freqs.back()))
        throw invalid_input("extract_bandwidth: f_center outside the sweep range");

    // Sample nearest the center.
    std::size_t ic = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < result.freqs.size(); ++i) {
        const double d = std::abs(result.freqs[i] - f_center);
        if (d < best) {
            best = d;
            ic = i;
        }
    }
    Band band;
    if (result.s11_db(ic) > threshold_db) return band;

    auto interp_edge = [&](std::size_t inside, std::size_t outside) {
        const double yi = result.s11_db(inside);
        const double yo = result.s11_db(outside);
        if (!std::isfinite(yi) || !std::isfinite(yo)) return result.freqs[inside];
        const double t = (threshold_db - yi) / (yo - yi);
        return result.freqs[inside] + t * (result.freqs[outside] - result.freqs[inside]);
    };

    std::size_t lo = ic;
    while (lo > 0 && result.s11_db(lo - 1) <= threshold_db) --lo;
    std::size_t hi = ic;
    while (hi + 1 < result.freqs.size() && result.s11_db(hi + 1) <= threshold_db) ++hi;

    band.empty = false;
    band.f_low = lo == 0 ? result.freqs.front() : interp_edge(lo, lo - 1);
    band.f_high = hi + 1 == result.freqs.size() ? result.freqs.back() : interp_edge(hi, hi + 1);
    return band;
}

/// Complex radiating voltage per patch at one frequency.
struct ExcitationVector {
    double freq = 0.0;
    std::vector<cplx> amplitudes;
};

/// Patch-center positions along the array axis, measured from the feed-line
/// input.
inline std::vector<double> element_positions(const ArrayLayout& layout) {
    layout.validate();
    std::vector<double> xs;
    xs.reserve(layout.patches.size());
    double x = layout.feed.length;
    for (std::size_t i = 0; i < layout.patches.size(); ++i) {
        xs.push_back(x + 0.5 * layout.patches[i].length);
        x += layout.patches[i].length + layout.gap;
    }
    return xs;
}

/// Radiating voltage of each patch for a 1 V source behind z_ref: the chain
/// is driven at its input, the (V, I) state is propagated to every recorded
/// slot node through the cumulative ABCD matrices (det = 1), and each patch
/// amplitude is the arithmetic mean of its two slot voltages.
inline ExcitationVector element_excitations(const ArrayLayout& layout, double freq,
                                            double z_ref = default_z_ref) {
    const ChainResult chain = build_chain(layout, freq);
    const cplx zin = input_impedance(chain.total, std::nullopt, freq);
    const cplx v_in = zin / (zin + z_ref);
    const cplx i_in = 1.0 / (zin + z_ref);

    ExcitationVector exc;
    exc.freq = freq;
    exc.amplitudes.reserve(layout.patches.size());
    for (std::size_t k = 0; k < layout.patches.size(); ++k) {
        cplx v_slot[2];
        for (int s = 0; s < 2; ++s) {
            const TwoPortABCD& m = chain.to_slot[2 * k + static_cast<std::size_t>(s)];
            // [v_in; i_in] = m * [v; i]  =>  v = d*v_in - b*i_in (unit determinant)
            v_slot[s] = m.d * v_in - m.b * i_in;
            if (!std::isfinite(v_slot[s].real()) || !std::isfinite(v_slot[s].imag()))
                throw resonant_singularity("element_excitations: non-finite voltage at element " +
                                           std::to_string(k + 1));
        }
        exc.amplitudes.push_back(0.5 * (v_slot[0] + v_slot[1]));
    }
    return exc;
}

} // namespace patchkit
