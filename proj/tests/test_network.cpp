// Transmission-line network tests: exact lossless-line identities, chain
// algebra invariants, an independent impedance-folding reconstruction of the
// full series-fed cascade, bandwidth/resonance extraction on synthetic data
// with known answers, excitation physics, and model-level sanity invariants.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "patchkit/network.hpp"

using namespace patchkit;

namespace {

Substrate fixture_substrate() {
    Substrate s;
    s.eps_r = 3.0;
    s.tan_delta = 0.0013;
    s.height = 1.574e-3;
    s.metal_conductivity = 5.8e7;
    s.metal_thickness = 35e-6;
    return s;
}

ArrayLayout fixture_layout() {
    ArrayLayout lay;
    lay.substrate = fixture_substrate();
    lay.feed = MicrostripLine{0.5e-3, 1.5e-3};
    lay.patches.assign(6, design_patch(28e9, lay.substrate));
    lay.gap = 1.9e-3;
    lay.interconnects.assign(5, MicrostripLine{0.5e-3, lay.gap});
    return lay;
}

// Independent input-impedance computation: fold the open termination
// backwards through every slot and line of the series-fed chain using the
// terminated-line impedance transform, never touching the ABCD algebra.
cplx folded_input_impedance(const ArrayLayout& layout, double freq) {
    auto fold_line = [&](cplx zl, const MicrostripLine& line) {
        const LineParams p = line_params(line, layout.substrate, freq);
        const double beta = 2.0 * pi * freq * std::sqrt(p.eps_eff) / c0;
        const cplx gl{(p.alpha_d + p.alpha_c) * line.length, beta * line.length};
        const cplx t = std::tanh(gl);
        return p.z0 * (zl + p.z0 * t) / (p.z0 + zl * t);
    };
    auto slot_y = [&](const PatchElement& patch) {
        const SlotAdmittance y = patch_slot_admittance(patch, layout.substrate, freq);
        return cplx{y.g1 + y.g12, slot_open_end_susceptance(patch, layout.substrate, freq)};
    };

    const std::size_t n = layout.patches.size();
    // open circuit behind the last slot: folding starts at Y = ys alone
    cplx z = 1.0 / slot_y(layout.patches[n - 1]);
    z = fold_line(z, MicrostripLine{layout.patches[n - 1].width, layout.patches[n - 1].length});
    z = 1.0 / (slot_y(layout.patches[n - 1]) + 1.0 / z);
    for (std::size_t k = n - 1; k-- > 0;) {
        z = fold_line(z, layout.interconnects[k]);
        z = 1.0 / (slot_y(layout.patches[k]) + 1.0 / z);
        z = fold_line(z, MicrostripLine{layout.patches[k].width, layout.patches[k].length});
        z = 1.0 / (slot_y(layout.patches[k]) + 1.0 / z);
    }
    return fold_line(z, layout.feed);
}

NetworkResult synthetic_sweep(double f_lo_ghz, double f_hi_ghz, int n,
                              const std::function<double(double)>& db_of_f_ghz) {
    NetworkResult net;
    net.z_ref = default_z_ref;
    const double step = (f_hi_ghz - f_lo_ghz) / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double f_ghz = i + 1 == n ? f_hi_ghz : f_lo_ghz + step * i;
        const double mag = std::pow(10.0, db_of_f_ghz(f_ghz) / 20.0);
        net.freqs.push_back(f_ghz * 1e9);
        net.s11.push_back(cplx{mag, 0.0});
        net.zin.push_back(cplx{default_z_ref, 0.0});
        net.vswr.push_back(mag < 1.0 ? (1.0 + mag) / (1.0 - mag)
                                     : std::numeric_limits<double>::infinity());
    }
    return net;
}

} // namespace

TEST_CASE("lossless quarter-wave and half-wave line identities") {
    const LineParams air_50{50.0, 1.0, 0.0, 0.0};
    const double f = 10e9;
    const double lam = c0 / f;

    const TwoPortABCD quarter = abcd_line(air_50, lam / 4.0, f);
    // quarter-wave transformer: Zin = Z0^2 / ZL
    const cplx zq = input_impedance(quarter, cplx{100.0, 0.0});
    CHECK(std::abs(zq - cplx{25.0, 0.0}) < 1e-9);
    CHECK(std::abs(quarter.a) < 1e-9);
    CHECK(std::abs(quarter.b - cplx{0.0, 50.0}) < 1e-9);

    const TwoPortABCD half = abcd_line(air_50, lam / 2.0, f);
    // half-wave line reproduces any load
    for (const cplx zl : {cplx{100.0, 0.0}, cplx{20.0, -45.0}, cplx{3.0, 310.0}}) {
        const cplx zh = input_impedance(half, zl);
        CHECK(std::abs(zh - zl) <= 1e-9 * std::abs(zl));
    }

    // open-circuited eighth-wave line: Zin = -j Z0
    const TwoPortABCD eighth = abcd_line(air_50, lam / 8.0, f);
    const cplx ze = input_impedance(eighth);
    CHECK(std::abs(ze - cplx{0.0, -50.0}) < 1e-9);
}

TEST_CASE("two-port algebra invariants") {
    const Substrate sub = fixture_substrate();
    const double f = 28e9;
    const TwoPortABCD line1 = abcd_line(line_params(MicrostripLine{0.5e-3, 1.5e-3}, sub, f),
                                        1.5e-3, f);
    const TwoPortABCD line2 = abcd_line(line_params(MicrostripLine{3.8e-3, 2.1e-3}, sub, f),
                                        2.1e-3, f);
    const TwoPortABCD sh = abcd_shunt(cplx{0.003, 0.013});

    // reciprocity: unit determinant of every constituent
    CHECK(std::abs(line1.determinant() - 1.0) < 1e-9);
    CHECK(std::abs(line2.determinant() - 1.0) < 1e-9);
    CHECK(std::abs(sh.determinant() - 1.0) < 1e-12);

    // associativity of the cascade product
    const TwoPortABCD lhs = cascade(cascade(line1, sh), line2);
    const TwoPortABCD rhs = cascade(line1, cascade(sh, line2));
    CHECK(std::abs(lhs.a - rhs.a) <= 1e-12 * std::abs(lhs.a));
    CHECK(std::abs(lhs.b - rhs.b) <= 1e-12 * std::abs(lhs.b));
    CHECK(std::abs(lhs.c - rhs.c) <= 1e-12 * std::abs(lhs.c));
    CHECK(std::abs(lhs.d - rhs.d) <= 1e-12 * std::abs(lhs.d));
    const TwoPortABCD vec = cascade(std::vector<TwoPortABCD>{line1, sh, line2});
    CHECK(std::abs(vec.a - lhs.a) <= 1e-12 * std::abs(lhs.a));

    // adjacent shunts merge by admittance addition, exactly
    const TwoPortABCD two = cascade(abcd_shunt(cplx{0.001, 0.002}), abcd_shunt(cplx{0.004, -0.001}));
    const TwoPortABCD one = abcd_shunt(cplx{0.005, 0.001});
    CHECK(two.a == one.a);
    CHECK(two.b == one.b);
    CHECK(two.c == one.c);
    CHECK(two.d == one.d);

    // identity behavior
    const TwoPortABCD id = TwoPortABCD::identity();
    const TwoPortABCD same = cascade(id, line1);
    CHECK(same.a == line1.a);
    CHECK(same.b == line1.b);

    // a zero-length line is the identity
    const TwoPortABCD z = abcd_line(line_params(MicrostripLine{0.5e-3, 0.0}, sub, f), 0.0, f);
    CHECK(z.a == cplx{1.0, 0.0});
    CHECK(z.b == cplx{0.0, 0.0});
    CHECK(z.c == cplx{0.0, 0.0});
    CHECK(z.d == cplx{1.0, 0.0});

    // open-terminated shunt sees the shunt impedance
    const cplx zsh = input_impedance(abcd_shunt(cplx{0.01, 0.0}));
    CHECK(std::abs(zsh - cplx{100.0, 0.0}) < 1e-9);

    CHECK_THROWS_AS(input_impedance(TwoPortABCD::identity()), resonant_singularity);
    CHECK_THROWS_AS(abcd_line(LineParams{50.0, 1.0, 0.0, 0.0}, -1e-3, 1e9), invalid_input);
    CHECK_THROWS_AS(cascade(std::vector<TwoPortABCD>{}), invalid_input);
}

TEST_CASE("series-fed chain matches an independent impedance folding") {
    const ArrayLayout lay = fixture_layout();
    for (const double f : {25.5e9, 27.849388507511538e9, 28.0e9, 31.0e9, 34.5e9}) {
        const ChainResult chain = build_chain(lay, f);
        CHECK(chain.to_slot.size() == 12);
        CHECK(std::abs(chain.total.determinant() - 1.0) < 1e-6);
        const cplx via_abcd = input_impedance(chain.total, std::nullopt, f);
        const cplx via_fold = folded_input_impedance(lay, f);
        CHECK(std::abs(via_abcd - via_fold) <= 1e-9 * std::abs(via_fold));
    }
}

TEST_CASE("vanishing interconnects reduce to a slot-and-body cascade") {
    ArrayLayout lay = fixture_layout();
    lay.patches.resize(3);
    lay.gap = 1e-15;
    lay.interconnects.assign(2, MicrostripLine{0.5e-3, lay.gap});

    const double f = 28e9;
    const cplx zin = input_impedance(build_chain(lay, f).total, std::nullopt, f);

    // manual cascade with the interconnects removed entirely
    const PatchElement& p = lay.patches[0];
    const SlotAdmittance ya = patch_slot_admittance(p, lay.substrate, f);
    const cplx ys{ya.g1 + ya.g12, slot_open_end_susceptance(p, lay.substrate, f)};
    const TwoPortABCD slot = abcd_shunt(ys);
    const TwoPortABCD body = abcd_line(line_params(MicrostripLine{p.width, p.length},
                                                   lay.substrate, f), p.length, f);
    TwoPortABCD m = abcd_line(line_params(lay.feed, lay.substrate, f), lay.feed.length, f);
    for (int k = 0; k < 3; ++k) m = cascade(cascade(cascade(m, slot), body), slot);
    const cplx zin_manual = input_impedance(m);
    CHECK(std::abs(zin - zin_manual) <= 1e-9 * std::abs(zin_manual));
}

TEST_CASE("sweep samples are independent of the sweep") {
    const ArrayLayout lay = fixture_layout();
    const NetworkResult net = analyze_sweep(lay, 25e9, 35e9, 101);
    REQUIRE(net.freqs.size() == 101);
    CHECK(net.freqs.front() == 25e9);
    CHECK(net.freqs.back() == 35e9);

    for (const std::size_t i : {std::size_t{0}, std::size_t{37}, std::size_t{100}}) {
        const cplx zin = input_impedance(build_chain(lay, net.freqs[i]).total);
        const Reflection r = reflection(zin, net.z_ref);
        CHECK(std::abs(net.zin[i] - zin) <= 1e-15 * std::abs(zin));
        CHECK(std::abs(net.s11[i] - r.gamma) <= 1e-15);
    }
}

TEST_CASE("fixture sweep is passive and resonates near the design frequency") {
    const ArrayLayout lay = fixture_layout();
    const NetworkResult net = analyze_sweep(lay, 25e9, 35e9, 401);
    for (std::size_t i = 0; i < net.freqs.size(); ++i) {
        CHECK(net.zin[i].real() > 0.0);
        CHECK(std::abs(net.s11[i]) <= 1.0 + 1e-12);
        CHECK(net.vswr[i] >= 1.0);
    }
    const double fres = resonance_frequency(net);
    CHECK(fres > 27e9);
    CHECK(fres < 30.5e9);
    CHECK(fres == Catch::Approx(27.849388507511538e9).epsilon(1e-9));
}

TEST_CASE("reflection sentinels") {
    const Reflection matched = reflection(cplx{50.0, 0.0});
    CHECK(matched.gamma == cplx{0.0, 0.0});
    CHECK(std::isinf(matched.s11_db));
    CHECK(matched.s11_db < 0.0);
    CHECK(matched.vswr == 1.0);

    const Reflection shorted = reflection(cplx{0.0, 0.0});
    CHECK(std::abs(shorted.gamma + 1.0) < 1e-15);
    CHECK(std::isinf(shorted.vswr));
    CHECK(shorted.s11_db == Catch::Approx(0.0).margin(1e-12));

    CHECK_THROWS_AS(reflection(cplx{-50.0, 0.0}), invalid_input);
}

TEST_CASE("bandwidth extraction recovers analytic -10 dB edges") {
    // parabolic dip: -20 dB at 28 GHz, crossing -10 dB at exactly 28 +/- 1
    auto db = [](double f_ghz) {
        const double x = (f_ghz - 28.0) / 2.0;
        return -20.0 + 40.0 * x * x;
    };
    const NetworkResult net = synthetic_sweep(26.0, 30.0, 401, db);

    const Band band = extract_bandwidth(net, 28e9);
    REQUIRE_FALSE(band.empty);
    CHECK(band.f_low == Catch::Approx(27e9).margin(1e4));
    CHECK(band.f_high == Catch::Approx(29e9).margin(1e4));
    CHECK(band.width() == Catch::Approx(2e9).margin(2e4));
    CHECK(band.f_low < 28e9);
    CHECK(band.f_high > 28e9);

    // center sample above the threshold: empty band
    const Band empty = extract_bandwidth(net, 26e9);
    CHECK(empty.empty);
    CHECK(empty.width() == 0.0);

    // everything below threshold: band clamps to the sweep ends
    const NetworkResult flat = synthetic_sweep(26.0, 30.0, 101, [](double) { return -15.0; });
    const Band full = extract_bandwidth(flat, 28e9);
    REQUIRE_FALSE(full.empty);
    CHECK(full.f_low == 26e9);
    CHECK(full.f_high == 30e9);

    CHECK_THROWS_AS(extract_bandwidth(net, 25e9), invalid_input);
    CHECK_THROWS_AS(extract_bandwidth(net, 31e9), invalid_input);
}

TEST_CASE("resonance refinement recovers an off-grid parabola vertex") {
    const double f_true = 28.0037;
    auto db = [&](double f_ghz) {
        const double x = f_ghz - f_true;
        return -20.0 + 10.0 * x * x;
    };
    const NetworkResult net = synthetic_sweep(26.0, 30.0, 401, db);
    const double fres = resonance_frequency(net);
    CHECK(fres == Catch::Approx(f_true * 1e9).margin(1e3));

    // argmin at a sweep edge falls back to the edge sample
    const NetworkResult edge = synthetic_sweep(29.0, 31.0, 5, db);
    CHECK(resonance_frequency(edge) == 29e9);
}

TEST_CASE("element positions follow the layout pitch") {
    const ArrayLayout lay = fixture_layout();
    const std::vector<double> xs = element_positions(lay);
    REQUIRE(xs.size() == 6);
    const double len = lay.patches[0].length;
    CHECK(xs[0] == Catch::Approx(lay.feed.length + 0.5 * len).epsilon(1e-15));
    for (std::size_t i = 1; i < xs.size(); ++i)
        CHECK(xs[i] - xs[i - 1] == Catch::Approx(len + lay.gap).epsilon(1e-12));
}

TEST_CASE("half-wave patch body feeds its two slots symmetrically") {
    // loss-free substrate so the body line preserves magnitude exactly
    Substrate sub = fixture_substrate();
    sub.tan_delta = 0.0;
    sub.metal_conductivity = 1e30;

    ArrayLayout lay;
    lay.substrate = sub;
    lay.feed = MicrostripLine{0.5e-3, 0.0}; // source directly at the first slot
    lay.patches = {design_patch(28e9, sub)};
    lay.gap = 1.9e-3;

    const PatchElement& p = lay.patches[0];
    const double ee = effective_permittivity(p.width, sub);
    const double f_half = c0 / (2.0 * p.length * std::sqrt(ee)); // beta*L = pi exactly

    const ChainResult chain = build_chain(lay, f_half);
    REQUIRE(chain.to_slot.size() == 2);
    const cplx zin = input_impedance(chain.total, std::nullopt, f_half);
    const cplx v_in = zin / (zin + default_z_ref);
    const cplx i_in = 1.0 / (zin + default_z_ref);
    const cplx v0 = chain.to_slot[0].d * v_in - chain.to_slot[0].b * i_in;
    const cplx v1 = chain.to_slot[1].d * v_in - chain.to_slot[1].b * i_in;

    CHECK(std::abs(v0) == Catch::Approx(std::abs(v1)).epsilon(1e-9));
    CHECK(std::abs(v0) == Catch::Approx(0.284074915).margin(1e-6));
    // the half-wave body inverts the voltage
    CHECK(std::abs(v1 + v0) < 1e-6 * std::abs(v0));

    const ExcitationVector exc = element_excitations(lay, f_half);
    REQUIRE(exc.amplitudes.size() == 1);
    CHECK(std::abs(exc.amplitudes[0] - 0.5 * (v0 + v1)) < 1e-15);
}

TEST_CASE("series feed tapers the element excitations down the line") {
    const ArrayLayout lay = fixture_layout();
    const double fres = 27.849388507511538e9;
    const ExcitationVector exc = element_excitations(lay, fres);
    REQUIRE(exc.amplitudes.size() == 6);

    const double expected[6] = {0.107799, 0.066091, 0.040861, 0.023899, 0.017256, 0.005709};
    for (std::size_t i = 0; i < 6; ++i) {
        const double mag = std::abs(exc.amplitudes[i]);
        CHECK(mag == Catch::Approx(expected[i]).margin(5e-6));
        if (i > 0) CHECK(mag < std::abs(exc.amplitudes[i - 1]));
    }
}

TEST_CASE("synthesized single patches resonate near their design frequency") {
    struct Case {
        double eps_r, height, f0;
    };
    // classic thin laminates where the closed-form chain should land within
    // a few percent of the synthesis target
    const Case cases[] = {
        {2.2, 0.254e-3, 10e9},
        {2.2, 0.787e-3, 10e9},
        {4.4, 1.6e-3, 5e9},
        {3.0, 0.5e-3, 10e9},
    };
    for (const Case& c : cases) {
        Substrate sub;
        sub.eps_r = c.eps_r;
        sub.tan_delta = 0.001;
        sub.height = c.height;
        sub.metal_conductivity = 5.8e7;
        sub.metal_thickness = 35e-6;

        ArrayLayout lay;
        lay.substrate = sub;
        lay.feed = MicrostripLine{0.3e-3, 1.0e-3};
        lay.patches = {design_patch(c.f0, sub)};
        lay.gap = 1e-3;

        const NetworkResult net = analyze_sweep(lay, 0.6 * c.f0, 1.4 * c.f0, 801);
        const double f_min = net.freqs[argmin_s11(net)];
        CHECK(std::abs(f_min - c.f0) / c.f0 < 0.05);
    }
}

TEST_CASE("layout validation names the offending field") {
    ArrayLayout lay = fixture_layout();
    lay.interconnects.pop_back();
    CHECK_THROWS_AS(lay.validate(), invalid_input);

    lay = fixture_layout();
    lay.interconnects[2].length = lay.gap * 1.5;
    CHECK_THROWS_AS(lay.validate(), invalid_input);

    lay = fixture_layout();
    lay.gap = 0.0;
    for (auto& ic : lay.interconnects) ic.length = 0.0;
    CHECK_THROWS_AS(lay.validate(), invalid_input);

    lay = fixture_layout();
    lay.patches.clear();
    lay.interconnects.clear();
    CHECK_THROWS_AS(lay.validate(), invalid_input);

    CHECK_THROWS_AS(analyze_sweep(fixture_layout(), 30e9, 25e9, 11), invalid_input);
    CHECK_THROWS_AS(analyze_sweep(fixture_layout(), 25e9, 35e9, 1), invalid_input);
}
