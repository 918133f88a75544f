#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "patchkit/network.hpp"
#include "patchkit/textio.hpp"

namespace patchkit {

/// One-port S-parameter table as carried by a Touchstone .s1p file.
struct TouchstoneData {
    double z_ref = default_z_ref;
    std::vector<double> freqs; ///< [Hz]
    std::vector<cplx> s11;
};

/// Writes a one-port file: option line `# GHz S RI R <zref>`, then one
/// `f_ghz re im` row per point, ascending in frequency, with enough digits
/// to reproduce the doubles exactly.
inline void write_touchstone(std::ostream& out, const TouchstoneData& data) {
    if (data.freqs.size() != data.s11.size())
        throw invalid_input("touchstone: frequency and S11 counts differ");
    if (data.freqs.empty()) throw invalid_input("touchstone: no data points");
    for (std::size_t i = 1; i < data.freqs.size(); ++i)
        if (!(data.freqs[i] > data.freqs[i - 1]))
            throw invalid_input("touchstone: frequencies must ascend");
    out << "! 1-port reflection data\n";
    out << "# GHz S RI R " << format_double(data.z_ref) << "\n";
    for (std::size_t i = 0; i < data.freqs.size(); ++i) {
        out << scaled::format_shifted(data.freqs[i], -9) << " "
            << format_double(data.s11[i].real(), 17) << " "
            << format_double(data.s11[i].imag(), 17) << "\n";
    }
}

inline void write_touchstone(std::ostream& out, const NetworkResult& net) {
    TouchstoneData data;
    data.z_ref = net.z_ref;
    data.freqs = net.freqs;
    data.s11 = net.s11;
    write_touchstone(out, data);
}

template <typename NetLike>
void save_touchstone(const NetLike& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    write_touchstone(out, data);
    if (!out) throw io_error("failed writing touchstone file '" + path + "'");
}

/// Parses the subset written above: `!` comments, one `# GHz S RI R <zref>`
/// option line, then `f_ghz re im` rows.
inline TouchstoneData parse_touchstone(std::istream& in) {
    TouchstoneData data;
    bool have_options = false;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '!') continue;
        if (sv.front() == '#') {
            if (have_options) throw parse_error("touchstone line " + std::to_string(n) +
                                                ": repeated option line");
            std::istringstream opts{std::string(sv.substr(1))};
            std::string unit, param, fmt, rtag, zval;
            if (!(opts >> unit >> param >> fmt >> rtag >> zval) || unit != "GHz" ||
                param != "S" || fmt != "RI" || rtag != "R" || !parse_double(zval, data.z_ref))
                throw parse_error("touchstone line " + std::to_string(n) +
                                  ": expected '# GHz S RI R <zref>'");
            have_options = true;
            continue;
        }
        if (!have_options)
            throw parse_error("touchstone line " + std::to_string(n) +
                              ": data before the option line");
        std::istringstream row{std::string(sv)};
        std::string ftok, retok, imtok;
        std::string extra;
        if (!(row >> ftok >> retok >> imtok) || (row >> extra))
            throw parse_error("touchstone line " + std::to_string(n) +
                              ": expected 'f_ghz re im'");
        double f = 0.0, re = 0.0, im = 0.0;
        if (!scaled::parse_shifted(ftok, 9, f) || !parse_double(retok, re) ||
            !parse_double(imtok, im))
            throw parse_error("touchstone line " + std::to_string(n) + ": bad number");
        if (!data.freqs.empty() && !(f > data.freqs.back()))
            throw parse_error("touchstone line " + std::to_string(n) +
                              ": frequencies must ascend");
        data.freqs.push_back(f);
        data.s11.emplace_back(re, im);
    }
    if (!have_options) throw parse_error("touchstone: missing option line");
    if (data.freqs.empty()) throw parse_error("touchstone: no data rows");
    return data;
}

inline TouchstoneData load_touchstone(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open touchstone file '" + path + "'");
    return parse_touchstone(in);
}

} // namespace patchkit
