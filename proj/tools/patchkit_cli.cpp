// Command-line front end: geometry synthesis, reflection sweeps, far-field
// pattern export, full metrics reports, and geometry optimization, all driven
// by the text geometry format.
//
// Exit codes: 0 success, 1 invalid input or I/O failure, 2 optimizer
// non-convergence.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "patchkit/patchkit.hpp"

namespace {

using nlohmann::json;

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw patchkit::io_error("cannot open '" + path + "' for writing");
    return out;
}

int run_design(const std::string& geom_path, double f0_ghz) {
    const patchkit::GeometrySpec spec = patchkit::load_geometry(geom_path);
    print_json(patchkit::design_report(spec, f0_ghz * 1e9));
    return 0;
}

int run_analyze(const std::string& geom_path, const std::string& out_s1p,
                const std::string& out_csv) {
    const patchkit::GeometrySpec spec = patchkit::load_geometry(geom_path);
    const patchkit::ArrayLayout layout = spec.to_layout();
    const patchkit::NetworkResult net =
        patchkit::analyze_sweep(layout, spec.f_start, spec.f_stop, spec.sweep_points);
    if (!out_s1p.empty()) {
        auto out = open_output(out_s1p);
        patchkit::write_touchstone(out, net);
    }
    if (!out_csv.empty()) {
        auto out = open_output(out_csv);
        patchkit::write_sweep_csv(out, net);
    }
    print_json(patchkit::sweep_report(net));
    return 0;
}

int run_pattern(const std::string& geom_path, double freq_ghz, int cut, double grid_deg,
                const std::string& out_csv) {
    const patchkit::GeometrySpec spec = patchkit::load_geometry(geom_path);
    const patchkit::ArrayLayout layout = spec.to_layout();
    const double freq = freq_ghz * 1e9;
    const patchkit::ExcitationVector exc = patchkit::element_excitations(layout, freq);
    const patchkit::SphericalGrid grid{grid_deg, grid_deg};
    const patchkit::FarFieldPattern pattern = patchkit::total_pattern(layout, exc, grid);
    auto out = open_output(out_csv);
    if (cut >= 0)
        patchkit::write_cut_csv(out, pattern, static_cast<double>(cut));
    else
        patchkit::write_pattern_csv(out, pattern);
    return 0;
}

int run_metrics(const std::string& geom_path, double freq_ghz, double grid_deg) {
    const patchkit::GeometrySpec spec = patchkit::load_geometry(geom_path);
    const patchkit::SphericalGrid grid{grid_deg, grid_deg};
    print_json(patchkit::metrics_report(spec, freq_ghz * 1e9, grid));
    return 0;
}

/// Rebuilds a geometry spec around a tuned layout, with explicit patch
/// dimensions so the tune survives the round trip.
patchkit::GeometrySpec spec_with_layout(const patchkit::GeometrySpec& base,
                                        const patchkit::ArrayLayout& layout) {
    patchkit::GeometrySpec spec = base;
    spec.substrate = layout.substrate;
    spec.feed = layout.feed;
    spec.patch.count = static_cast<int>(layout.patches.size());
    spec.patch.width = layout.patches.front().width;
    spec.patch.length = layout.patches.front().length;
    spec.patch.auto_design_f0.reset();
    spec.patch.center_spacing.reset();
    spec.interconnect_length = layout.gap;
    if (!layout.interconnects.empty())
        spec.interconnect_width = layout.interconnects.front().width;
    return spec;
}

int run_optimize(const std::string& geom_path, double target_f0_ghz,
                 const std::string& free_list, int max_evals, const std::string& out_path,
                 double w_dir, double w_sll, double sll_ceiling) {
    const patchkit::GeometrySpec spec = patchkit::load_geometry(geom_path);
    const patchkit::ArrayLayout layout = spec.to_layout();
    const double target = target_f0_ghz * 1e9;

    std::vector<std::string> free_names;
    {
        std::stringstream ss(free_list);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const auto t = patchkit::trim(tok);
            if (!t.empty()) free_names.emplace_back(t);
        }
    }
    if (free_names.empty()) throw patchkit::invalid_input("--free: no parameter names given");
    const std::set<std::string> allowed{"L", "W", "gap", "interconnect_w"};
    std::set<std::string> seen;
    for (const auto& name : free_names) {
        if (!allowed.count(name))
            throw patchkit::invalid_input("--free: unknown parameter '" + name +
                                          "' (use L, W, gap, interconnect_w)");
        if (!seen.insert(name).second)
            throw patchkit::invalid_input("--free: duplicate parameter '" + name + "'");
    }

    json j;
    patchkit::ArrayLayout tuned = layout;
    bool converged = false;

    if (free_names.size() == 1 && free_names.front() == "L") {
        // Pure resonance retune of the patch length against the sweep argmin.
        const patchkit::TuneResult result = patchkit::tune_for_resonance(
            layout, target, spec.f_start, spec.f_stop, spec.sweep_points,
            max_evals > 0 ? max_evals : 200);
        tuned = result.tuned;
        converged = result.opt.converged;
        j["mode"] = "resonance_tune";
        j["converged"] = result.opt.converged;
        j["evaluations"] = result.opt.evaluations;
        j["achieved_f0_ghz"] = result.achieved_f0 / 1e9;
        j["resonance_offset_ghz"] = std::abs(result.achieved_f0 - target) / 1e9;
        j["tuned_patch_length_mm"] = tuned.patches.front().length * 1e3;
    } else {
        patchkit::DesignVector design;
        for (const auto& name : free_names) {
            if (name == "L") design.params.push_back(patchkit::around("L", layout.patches.front().length));
            if (name == "W") design.params.push_back(patchkit::around("W", layout.patches.front().width));
            if (name == "gap") design.params.push_back(patchkit::around("gap", layout.gap));
            if (name == "interconnect_w") {
                if (layout.interconnects.empty())
                    throw patchkit::invalid_input(
                        "--free interconnect_w: the layout has no interconnects");
                design.params.push_back(
                    patchkit::around("interconnect_w", layout.interconnects.front().width));
            }
        }
        patchkit::Objective objective;
        objective.target_f0 = target;
        objective.w_directivity = w_dir;
        objective.w_sll = w_sll;
        objective.sll_ceiling_db = sll_ceiling;
        const patchkit::OptResult result = patchkit::optimize_design(
            layout, design, objective, 1e-4, max_evals > 0 ? max_evals : 500);
        tuned = patchkit::apply_design(layout, result.best);
        converged = result.converged;
        j["mode"] = "composite";
        j["converged"] = result.converged;
        j["evaluations"] = result.evaluations;
        j["best_value"] = result.best_value;
        json tuned_params;
        for (const auto& p : result.best.params) tuned_params[p.name] = p.value;
        j["tuned_parameters"] = tuned_params;
    }

    const patchkit::GeometrySpec tuned_spec = spec_with_layout(spec, tuned);
    j["tuned_geometry"] = patchkit::emit_geometry(tuned_spec);
    if (!out_path.empty()) patchkit::save_geometry(tuned_spec, out_path);
    print_json(j);
    return converged ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Series-fed microstrip patch array modeling toolkit"};
    app.require_subcommand(1);

    std::string geom_path;
    double f0_ghz = 0.0;
    auto* design = app.add_subcommand("design", "Synthesize patch dimensions for a frequency");
    design->add_option("--f0", f0_ghz, "Target frequency [GHz]")->required();
    design->add_option("--geom", geom_path, "Geometry file")->required();

    std::string out_s1p, out_csv;
    auto* analyze = app.add_subcommand("analyze", "Sweep the input reflection");
    analyze->add_option("--geom", geom_path, "Geometry file")->required();
    analyze->add_option("--out", out_s1p, "Write the sweep as a Touchstone .s1p file");
    analyze->add_option("--csv", out_csv, "Write the sweep as CSV");

    double freq_ghz = 0.0, grid_deg = 0.5;
    int cut = -1;
    std::string pattern_out;
    auto* pattern = app.add_subcommand("pattern", "Export the far-field pattern as CSV");
    pattern->add_option("--geom", geom_path, "Geometry file")->required();
    pattern->add_option("--freq", freq_ghz, "Evaluation frequency [GHz]")->required();
    pattern->add_option("--cut", cut, "Principal cut azimuth (0 or 90 degrees)")
        ->check(CLI::IsMember({0, 90}));
    pattern->add_option("--grid", grid_deg, "Angular step [deg]")->check(CLI::PositiveNumber);
    pattern->add_option("--out", pattern_out, "Output CSV path")->required();

    double metrics_freq_ghz = 0.0, metrics_grid_deg = 0.5;
    auto* metrics = app.add_subcommand("metrics", "Full reflection and far-field report");
    metrics->add_option("--geom", geom_path, "Geometry file")->required();
    metrics->add_option("--freq", metrics_freq_ghz, "Evaluation frequency [GHz]")->required();
    metrics->add_option("--grid", metrics_grid_deg, "Angular step [deg]")
        ->check(CLI::PositiveNumber);

    double target_f0_ghz = 0.0, w_dir = 0.0, w_sll = 0.0, sll_ceiling = -10.0;
    std::string free_list = "L", opt_out;
    int max_evals = 0;
    auto* optimize = app.add_subcommand("optimize", "Tune free geometry parameters");
    optimize->add_option("--geom", geom_path, "Geometry file")->required();
    optimize->add_option("--target-f0", target_f0_ghz, "Target frequency [GHz]")->required();
    optimize->add_option("--free", free_list,
                         "Comma-separated free parameters (L, W, gap, interconnect_w)");
    optimize->add_option("--max-evals", max_evals, "Evaluation budget");
    optimize->add_option("--out", opt_out, "Write the tuned geometry file here");
    optimize->add_option("--w-dir", w_dir, "Composite objective: directivity weight");
    optimize->add_option("--w-sll", w_sll, "Composite objective: sidelobe weight");
    optimize->add_option("--sll-ceiling", sll_ceiling,
                         "Composite objective: sidelobe ceiling [dB]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(design)) return run_design(geom_path, f0_ghz);
        if (app.got_subcommand(analyze)) return run_analyze(geom_path, out_s1p, out_csv);
        if (app.got_subcommand(pattern))
            return run_pattern(geom_path, freq_ghz, cut, grid_deg, pattern_out);
        if (app.got_subcommand(metrics)) return run_metrics(geom_path, metrics_freq_ghz, metrics_grid_deg);
        if (app.got_subcommand(optimize))
            return run_optimize(geom_path, target_f0_ghz, free_list, max_evals, opt_out, w_dir,
                                w_sll, sll_ceiling);
    } catch (const patchkit::non_convergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
