#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "patchkit/microstrip.hpp"
#include "patchkit/network.hpp"
#include "patchkit/textio.hpp"

namespace patchkit {

/// Patch description as written in a geometry file: either explicit
/// dimensions or a synthesis target frequency, plus an optional
/// center-to-center spacing that overrides the interconnect length.
struct PatchSpecification {
    int count = 0;
    std::optional<double> width;          ///< [m]
    std::optional<double> length;         ///< [m]
    std::optional<double> auto_design_f0; ///< [Hz]
    std::optional<double> center_spacing; ///< [m], center-to-center
};

/// In-memory form of a geometry file. Stored in SI units; the file format
/// uses mm / um / GHz, converted only at the parse and emit boundary (and
/// exactly, by decimal exponent shifts, so files round-trip bit-for-bit).
struct GeometrySpec {
    Substrate substrate;
    MicrostripLine feed;
    PatchSpecification patch;
    double interconnect_width = 0.0;           ///< [m]
    std::optional<double> interconnect_length; ///< [m]
    double f_start = 0.0;                      ///< [Hz]
    double f_stop = 0.0;                       ///< [Hz]
    int sweep_points = 0;

    void validate() const {
        substrate.validate();
        feed.validate();
        if (patch.count < 1) throw invalid_input("patch.count: must be >= 1");
        const bool has_dims = patch.width.has_value() || patch.length.has_value();
        if (patch.auto_design_f0) {
            if (has_dims)
                throw invalid_input(
                    "patch: give width_mm/length_mm or auto_design_f0_ghz, not both");
            if (!(*patch.auto_design_f0 > 0.0))
                throw invalid_input("patch.auto_design_f0_ghz: must be > 0");
        } else {
            if (!patch.width || !patch.length)
                throw invalid_input(
                    "patch: width_mm and length_mm are required unless auto_design_f0_ghz is set");
            if (!(*patch.width > 0.0)) throw invalid_input("patch.width_mm: must be > 0");
            if (!(*patch.length > 0.0)) throw invalid_input("patch.length_mm: must be > 0");
        }
        if (patch.center_spacing && !(*patch.center_spacing > 0.0))
            throw invalid_input("patch.center_spacing_mm: must be > 0");
        if (!(interconnect_width > 0.0)) throw invalid_input("interconnect.width_mm: must be > 0");
        if (!interconnect_length && !patch.center_spacing)
            throw invalid_input("interconnect.length_mm or patch.center_spacing_mm is required");
        if (interconnect_length && !(*interconnect_length > 0.0))
            throw invalid_input("interconnect.length_mm: must be > 0");
        if (!(f_start > 0.0)) throw invalid_input("sweep.f_start_ghz: must be > 0");
        if (!(f_start < f_stop))
            throw invalid_input("sweep.f_stop_ghz: must be greater than f_start_ghz");
        if (sweep_points < 2) throw invalid_input("sweep.points: must be >= 2");
    }

    /// The patch dimensions with auto design resolved.
    PatchElement resolved_patch() const {
        if (patch.auto_design_f0) return design_patch(*patch.auto_design_f0, substrate);
        return PatchElement{*patch.width, *patch.length};
    }

    /// Edge-to-edge gap: the interconnect length, or center spacing minus the
    /// patch length when a center-to-center spacing is given instead.
    double resolved_gap(double patch_length) const {
        if (patch.center_spacing) {
            const double gap = *patch.center_spacing - patch_length;
            if (!(gap > 0.0))
                throw invalid_input("patch.center_spacing_mm: must exceed the patch length");
            if (interconnect_length && std::abs(*interconnect_length - gap) > 1e-9)
                throw invalid_input(
                    "interconnect.length_mm conflicts with patch.center_spacing_mm");
            return gap;
        }
        return *interconnect_length;
    }

    /// Builds the simulation layout: synthesizes the patch if requested and
    /// replicates it count times with identical interconnects.
    ArrayLayout to_layout() const {
        validate();
        ArrayLayout layout;
        layout.substrate = substrate;
        layout.feed = feed;
        const PatchElement p = resolved_patch();
        layout.patches.assign(static_cast<std::size_t>(patch.count), p);
        layout.gap = resolved_gap(p.length);
        layout.interconnects.assign(static_cast<std::size_t>(patch.count - 1),
                                    MicrostripLine{interconnect_width, layout.gap});
        layout.validate();
        return layout;
    }
};

namespace detail {

struct RawValue {
    std::string text;
    int line = 0;
};

using RawSection = std::map<std::string, RawValue>;
using RawFile = std::map<std::string, RawSection>;

inline parse_error at_line(int line, const std::string& what) {
    return parse_error("line " + std::to_string(line) + ": " + what);
}

inline RawFile tokenize_geometry(std::istream& in) {
    RawFile file;
    std::string current;
    int n = 0;
    std::string raw_line;
    while (std::getline(in, raw_line)) {
        ++n;
        std::string_view sv(raw_line);
        if (const auto hash = sv.find('#'); hash != std::string_view::npos)
            sv = sv.substr(0, hash);
        sv = trim(sv);
        if (sv.empty()) continue;
        if (sv == "}") {
            if (current.empty()) throw at_line(n, "'}' outside a section");
            current.clear();
            continue;
        }
        if (sv.back() == '{') {
            if (!current.empty()) throw at_line(n, "nested sections are not allowed");
            const std::string name{trim(sv.substr(0, sv.size() - 1))};
            if (name.empty()) throw at_line(n, "section name missing before '{'");
            if (file.count(name)) throw at_line(n, "duplicate section '" + name + "'");
            file[name];
            current = name;
            continue;
        }
        const auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw at_line(n, "expected 'key = value', 'section {', or '}'");
        if (current.empty()) throw at_line(n, "key outside a section");
        const std::string key{trim(sv.substr(0, eq))};
        const std::string value{trim(sv.substr(eq + 1))};
        if (key.empty()) throw at_line(n, "missing key before '='");
        if (value.empty()) throw at_line(n, "missing value after '='");
        auto& section = file[current];
        if (section.count(key)) throw at_line(n, "duplicate key '" + current + "." + key + "'");
        section[key] = RawValue{value, n};
    }
    if (!current.empty()) throw parse_error("unterminated section '" + current + "' at end of file");
    return file;
}

/// Typed reads from one raw section; `shift` converts file units to SI by a
/// power of ten (mm -> m is -3, GHz -> Hz is +9, dimensionless 0).
class SectionReader {
public:
    SectionReader(const RawFile& file, std::string name) : name_(std::move(name)) {
        const auto it = file.find(name_);
        if (it == file.end()) throw parse_error("missing section '" + name_ + "'");
        section_ = &it->second;
    }

    double number(const std::string& key, int shift) {
        const RawValue& raw = fetch(key);
        double v = 0.0;
        if (!scaled::parse_shifted(raw.text, shift, v))
            throw at_line(raw.line, "value of '" + name_ + "." + key + "' is not a number");
        return v;
    }

    std::optional<double> optional_number(const std::string& key, int shift) {
        if (!section_->count(key)) return std::nullopt;
        return number(key, shift);
    }

    int integer(const std::string& key) {
        const RawValue& raw = fetch(key);
        int v = 0;
        if (!parse_int(raw.text, v))
            throw at_line(raw.line, "value of '" + name_ + "." + key + "' is not an integer");
        return v;
    }

    void finish() const {
        for (const auto& [key, raw] : *section_)
            if (!seen_.count(key)) throw at_line(raw.line, "unknown key '" + name_ + "." + key + "'");
    }

private:
    const RawValue& fetch(const std::string& key) {
        const auto it = section_->find(key);
        if (it == section_->end()) throw parse_error("missing key '" + name_ + "." + key + "'");
        seen_.insert(key);
        return it->second;
    }

    std::string name_;
    const RawSection* section_ = nullptr;
    std::set<std::string> seen_;
};

} // namespace detail

/// Parses the geometry text format:
///   section { key = value ... }
/// with '#' comments, fixed section and key names, and mm / um / GHz units.
inline GeometrySpec parse_geometry(std::istream& in) {
    const detail::RawFile file = detail::tokenize_geometry(in);
    static const char* known[] = {"substrate", "feed", "patch", "interconnect", "sweep"};
    for (const auto& [name, section] : file) {
        bool ok = false;
        for (const char* k : known) ok = ok || name == k;
        if (!ok) {
            const int line = section.empty() ? 0 : section.begin()->second.line;
            throw detail::at_line(line, "unknown section '" + name + "'");
        }
    }

    GeometrySpec spec;
    {
        detail::SectionReader s(file, "substrate");
        spec.substrate.eps_r = s.number("eps_r", 0);
        spec.substrate.tan_delta = s.number("tan_delta", 0);
        spec.substrate.height = s.number("height_mm", -3);
        spec.substrate.metal_conductivity = s.number("metal_conductivity", 0);
        spec.substrate.metal_thickness = s.number("metal_thickness_um", -6);
        s.finish();
    }
    {
        detail::SectionReader s(file, "feed");
        spec.feed.width = s.number("width_mm", -3);
        spec.feed.length = s.number("length_mm", -3);
        s.finish();
    }
    {
        detail::SectionReader s(file, "patch");
        spec.patch.count = s.integer("count");
        spec.patch.width = s.optional_number("width_mm", -3);
        spec.patch.length = s.optional_number("length_mm", -3);
        spec.patch.auto_design_f0 = s.optional_number("auto_design_f0_ghz", 9);
        spec.patch.center_spacing = s.optional_number("center_spacing_mm", -3);
        s.finish();
    }
    {
        detail::SectionReader s(file, "interconnect");
        spec.interconnect_width = s.number("width_mm", -3);
        spec.interconnect_length = s.optional_number("length_mm", -3);
        s.finish();
    }
    {
        detail::SectionReader s(file, "sweep");
        spec.f_start = s.number("f_start_ghz", 9);
        spec.f_stop = s.number("f_stop_ghz", 9);
        spec.sweep_points = s.integer("points");
        s.finish();
    }
    spec.validate();
    return spec;
}

inline GeometrySpec parse_geometry(const std::string& text) {
    std::istringstream in(text);
    return parse_geometry(in);
}

inline GeometrySpec load_geometry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open geometry file '" + path + "'");
    return parse_geometry(in);
}

/// Emits the canonical text form; parsing it back yields value-identical
/// numbers (exact decimal exponent shifts, shortest round-trip formatting).
inline std::string emit_geometry(const GeometrySpec& spec) {
    spec.validate();
    std::ostringstream out;
    auto mm = [](double meters) { return scaled::format_shifted(meters, 3); };
    auto plain = [](double v) { return scaled::format_shifted(v, 0); };
    auto ghz = [](double hz) { return scaled::format_shifted(hz, -9); };
    out << "substrate {\n";
    out << "  eps_r = " << plain(spec.substrate.eps_r) << "\n";
    out << "  tan_delta = " << plain(spec.substrate.tan_delta) << "\n";
    out << "  height_mm = " << mm(spec.substrate.height) << "\n";
    out << "  metal_conductivity = " << plain(spec.substrate.metal_conductivity) << "\n";
    out << "  metal_thickness_um = " << scaled::format_shifted(spec.substrate.metal_thickness, 6)
        << "\n";
    out << "}\n\n";
    out << "feed {\n";
    out << "  width_mm = " << mm(spec.feed.width) << "\n";
    out << "  length_mm = " << mm(spec.feed.length) << "\n";
    out << "}\n\n";
    out << "patch {\n";
    out << "  count = " << spec.patch.count << "\n";
    if (spec.patch.width) out << "  width_mm = " << mm(*spec.patch.width) << "\n";
    if (spec.patch.length) out << "  length_mm = " << mm(*spec.patch.length) << "\n";
    if (spec.patch.auto_design_f0)
        out << "  auto_design_f0_ghz = " << ghz(*spec.patch.auto_design_f0) << "\n";
    if (spec.patch.center_spacing)
        out << "  center_spacing_mm = " << mm(*spec.patch.center_spacing) << "\n";
    out << "}\n\n";
    out << "interconnect {\n";
    out << "  width_mm = " << mm(spec.interconnect_width) << "\n";
    if (spec.interconnect_length) out << "  length_mm = " << mm(*spec.interconnect_length) << "\n";
    out << "}\n\n";
    out << "sweep {\n";
    out << "  f_start_ghz = " << ghz(spec.f_start) << "\n";
    out << "  f_stop_ghz = " << ghz(spec.f_stop) << "\n";
    out << "  points = " << spec.sweep_points << "\n";
    out << "}\n";
    return out.str();
}

inline void save_geometry(const GeometrySpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << emit_geometry(spec);
    if (!out) throw io_error("failed writing geometry file '" + path + "'");
}

} // namespace patchkit
