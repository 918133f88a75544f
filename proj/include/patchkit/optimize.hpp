#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "patchkit/farfield.hpp"
#include "patchkit/network.hpp"

namespace patchkit {

/// One named geometry degree of freedom with box bounds.
struct DesignParameter {
    std::string name;
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool frozen = false;
};

/// A parameter with symmetric fractional bounds around its initial value
/// (the default box when none is given explicitly).
inline DesignParameter around(std::string name, double value, double fraction = 0.25,
                              bool frozen = false) {
    if (!(value > 0.0)) throw invalid_input("design parameter '" + name + "' must be > 0");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw invalid_input("design parameter '" + name + "': fraction must be in (0, 1)");
    return DesignParameter{std::move(name), value, value * (1.0 - fraction),
                           value * (1.0 + fraction), frozen};
}

/// Named design point: every parameter carries its own bounds and an optional
/// frozen flag; at least one parameter must be free.
struct DesignVector {
    std::vector<DesignParameter> params;

    void validate() const {
        std::size_t free_count = 0;
        for (const auto& p : params) {
            if (p.name.empty()) throw invalid_input("design: empty parameter name");
            if (!(p.lower <= p.value && p.value <= p.upper))
                throw invalid_input("design: parameter '" + p.name + "' outside its bounds");
            if (!p.frozen) {
                if (!(p.lower < p.upper))
                    throw invalid_input("design: free parameter '" + p.name +
                                        "' needs a nonempty bound interval");
                if (!std::isfinite(p.lower) || !std::isfinite(p.upper))
                    throw invalid_input("design: free parameter '" + p.name +
                                        "' needs finite bounds");
                ++free_count;
            }
        }
        for (std::size_t i = 0; i < params.size(); ++i)
            for (std::size_t j = i + 1; j < params.size(); ++j)
                if (params[i].name == params[j].name)
                    throw invalid_input("design: duplicate parameter '" + params[i].name + "'");
        if (free_count == 0) throw invalid_input("design: at least one parameter must be free");
    }

    const DesignParameter* find(const std::string& name) const {
        for (const auto& p : params)
            if (p.name == name) return &p;
        return nullptr;
    }
};

/// Applies a design point to a layout. Recognized names:
///   L              -> length of every patch
///   W              -> width of every patch
///   gap            -> edge-to-edge spacing and every interconnect length
///   interconnect_w -> width of every interconnect
inline ArrayLayout apply_design(const ArrayLayout& base, const DesignVector& design) {
    ArrayLayout out = base;
    for (const auto& p : design.params) {
        if (p.name == "L") {
            for (auto& patch : out.patches) patch.length = p.value;
        } else if (p.name == "W") {
            for (auto& patch : out.patches) patch.width = p.value;
        } else if (p.name == "gap") {
            out.gap = p.value;
            for (auto& ic : out.interconnects) ic.length = p.value;
        } else if (p.name == "interconnect_w") {
            for (auto& ic : out.interconnects) ic.width = p.value;
        } else {
            throw invalid_input("apply_design: unknown parameter '" + p.name + "'");
        }
    }
    out.validate();
    return out;
}

/// Weighted scalar figure of merit for geometry search.
struct Objective {
    double target_f0 = 28e9;     ///< [Hz] match frequency
    double w_match = 1.0;        ///< weight on max(0, s11_db(f0) + 10)
    double w_directivity = 0.0;  ///< weight on -directivity_dbi
    double w_sll = 0.0;          ///< weight on max(0, sll_db - ceiling)
    double sll_ceiling_db = -10.0;
    SphericalGrid pattern_grid{2.0, 2.0}; ///< coarse grid for the pattern terms
};

/// Evaluates the composite objective on a candidate design. Any model
/// failure (infeasible geometry, singular network) scores a large penalty
/// instead of propagating, so the search can continue past bad regions.
inline double objective_eval(const ArrayLayout& base, const DesignVector& design,
                             const Objective& objective) {
    constexpr double penalty = 1e6;
    try {
        const ArrayLayout layout = apply_design(base, design);
        double score = 0.0;
        if (objective.w_match != 0.0) {
            const ChainResult chain = build_chain(layout, objective.target_f0);
            const cplx zin = input_impedance(chain.total, std::nullopt, objective.target_f0);
            const Reflection r = reflection(zin);
            score += objective.w_match * std::max(0.0, r.s11_db + 10.0);
        }
        if (objective.w_directivity != 0.0 || objective.w_sll != 0.0) {
            const ExcitationVector exc = element_excitations(layout, objective.target_f0);
            const FarFieldPattern pat = total_pattern(layout, exc, objective.pattern_grid);
            if (objective.w_directivity != 0.0)
                score += objective.w_directivity * (-directivity_dbi(pat));
            if (objective.w_sll != 0.0) {
                const CutMetrics cm = cut_metrics(pat, 0.0);
                if (cm.has_sidelobe)
                    score += objective.w_sll * std::max(0.0, cm.sll_db - objective.sll_ceiling_db);
            }
        }
        return std::isfinite(score) ? score : penalty;
    } catch (const error&) {
        return penalty;
    }
}

/// Search outcome: the best design found, its objective value, the evaluation
/// count, a convergence flag, and the best-so-far value after every
/// evaluation (non-increasing).
struct OptResult {
    DesignVector best;
    double best_value = 0.0;
    int evaluations = 0;
    bool converged = false;
    std::vector<double> trace;
};

namespace detail {

struct SimplexPoint {
    std::vector<double> x;
    double f = 0.0;
};

} // namespace detail

/// Derivative-free downhill-simplex search with box bounds. Coefficients:
/// reflection 1.0, expansion 2.0, contraction 0.5, shrink 0.5. The initial
/// simplex bumps each coordinate of x0 by +5 percent (clipped to bounds,
/// flipped downward if pinned at the upper bound). Convergence:
/// (worst - best simplex value) / (1 + |best|) < tol_rel. Candidates are
/// clipped into the box before evaluation, so the objective is never called
/// outside it. Fully deterministic.
inline OptResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             const std::vector<double>& x0, const std::vector<double>& lower,
                             const std::vector<double>& upper, double tol_rel = 1e-4,
                             int max_evals = 500) {
    const std::size_t dim = x0.size();
    if (dim == 0) throw invalid_input("nelder_mead: empty start point");
    if (lower.size() != dim || upper.size() != dim)
        throw invalid_input("nelder_mead: bound sizes do not match the start point");
    for (std::size_t j = 0; j < dim; ++j)
        if (!(lower[j] <= x0[j] && x0[j] <= upper[j] && lower[j] < upper[j]))
            throw invalid_input("nelder_mead: start point outside its bounds");
    if (max_evals < static_cast<int>(dim) + 2)
        throw invalid_input("nelder_mead: max_evals too small for the initial simplex");

    auto clip = [&](std::vector<double> x) {
        for (std::size_t j = 0; j < dim; ++j) x[j] = std::clamp(x[j], lower[j], upper[j]);
        return x;
    };

    OptResult result;
    double best_so_far = std::numeric_limits<double>::infinity();
    auto evaluate = [&](const std::vector<double>& x) {
        const double f = objective(x);
        ++result.evaluations;
        best_so_far = std::min(best_so_far, f);
        result.trace.push_back(best_so_far);
        return f;
    };

    std::vector<detail::SimplexPoint> simplex;
    simplex.reserve(dim + 1);
    simplex.push_back({x0, evaluate(x0)});
    for (std::size_t j = 0; j < dim; ++j) {
        std::vector<double> x = x0;
        const double bump = x[j] != 0.0 ? 0.05 * std::abs(x[j]) : 0.05 * (upper[j] - lower[j]);
        x[j] = std::clamp(x[j] + bump, lower[j], upper[j]);
        if (x[j] == x0[j]) x[j] = std::clamp(x0[j] - bump, lower[j], upper[j]);
        simplex.push_back({x, evaluate(x)});
    }

    auto order = [&]() {
        std::stable_sort(simplex.begin(), simplex.end(),
                         [](const auto& a, const auto& b) { return a.f < b.f; });
    };
    order();

    while (true) {
        const double spread = simplex.back().f - simplex.front().f;
        if (spread / (1.0 + std::abs(simplex.front().f)) < tol_rel) {
            result.converged = true;
            break;
        }
        if (result.evaluations >= max_evals) break;

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t v = 0; v < dim; ++v)
            for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[v].x[j] / dim;
        const detail::SimplexPoint& worst = simplex.back();

        auto along = [&](double coeff) {
            std::vector<double> x(dim);
            for (std::size_t j = 0; j < dim; ++j)
                x[j] = centroid[j] + coeff * (centroid[j] - worst.x[j]);
            return clip(std::move(x));
        };

        const std::vector<double> xr = along(1.0);
        const double fr = evaluate(xr);
        if (fr < simplex.front().f && result.evaluations < max_evals) {
            const std::vector<double> xe = along(2.0);
            const double fe = evaluate(xe);
            simplex.back() = fe < fr ? detail::SimplexPoint{xe, fe} : detail::SimplexPoint{xr, fr};
        } else if (fr < simplex[dim - 1].f) {
            simplex.back() = {xr, fr};
        } else if (result.evaluations < max_evals) {
            const bool outside = fr < worst.f;
            const std::vector<double> xc = along(outside ? 0.5 : -0.5);
            const double fc = evaluate(xc);
            if (fc < std::min(fr, worst.f)) {
                simplex.back() = {xc, fc};
            } else {
                for (std::size_t v = 1; v < simplex.size(); ++v) {
                    if (result.evaluations >= max_evals) break;
                    std::vector<double> x(dim);
                    for (std::size_t j = 0; j < dim; ++j)
                        x[j] = simplex[0].x[j] + 0.5 * (simplex[v].x[j] - simplex[0].x[j]);
                    x = clip(std::move(x));
                    simplex[v] = {x, evaluate(x)};
                }
            }
        } else {
            simplex.back() = {xr, fr};
        }
        order();
    }

    order();
    result.best_value = simplex.front().f;
    result.best.params.clear();
    // Caller rebinds names; raw coordinates travel in bound order.
    for (std::size_t j = 0; j < dim; ++j)
        result.best.params.push_back(
            {"x" + std::to_string(j), simplex.front().x[j], lower[j], upper[j], false});
    return result;
}

/// Named-design front end: optimizes the free parameters of `design` against
/// `objective` on top of `base`, leaving frozen parameters untouched.
inline OptResult optimize_design(const ArrayLayout& base, DesignVector design,
                                 const Objective& objective, double tol_rel = 1e-4,
                                 int max_evals = 500) {
    design.validate();
    base.validate();
    std::vector<std::size_t> free_idx;
    std::vector<double> x0, lo, hi;
    for (std::size_t i = 0; i < design.params.size(); ++i) {
        if (design.params[i].frozen) continue;
        free_idx.push_back(i);
        x0.push_back(design.params[i].value);
        lo.push_back(design.params[i].lower);
        hi.push_back(design.params[i].upper);
    }

    auto eval_free = [&](const std::vector<double>& x) {
        DesignVector candidate = design;
        for (std::size_t k = 0; k < free_idx.size(); ++k)
            candidate.params[free_idx[k]].value = x[k];
        return objective_eval(base, candidate, objective);
    };

    OptResult raw = nelder_mead(eval_free, x0, lo, hi, tol_rel, max_evals);
    DesignVector best = design;
    for (std::size_t k = 0; k < free_idx.size(); ++k)
        best.params[free_idx[k]].value = raw.best.params[k].value;
    raw.best = std::move(best);
    return raw;
}

/// Result of a resonance retune: the adjusted layout, the raw search record,
/// and the resonance the tuned geometry actually achieves.
struct TuneResult {
    ArrayLayout tuned;
    OptResult opt;
    double achieved_f0 = 0.0; ///< [Hz]
};

/// Retunes the patch length (all patches together) so the swept |S11|
/// minimum lands on target_f0. The patch length is the only free parameter,
/// bounded to +-25 percent of its starting value; the figure of merit is the
/// absolute offset between the refined sweep argmin and the target. Throws
/// invalid_input if target_f0 lies outside the sweep, and non_convergence
/// (naming the best offset reached) if the tuned resonance is not within
/// 0.15 GHz of the target.
inline TuneResult tune_for_resonance(const ArrayLayout& base, double target_f0, double f_start,
                                     double f_stop, int n_points, int max_evals = 200,
                                     double tol_rel = 1e-4) {
    base.validate();
    if (!(target_f0 >= f_start && target_f0 <= f_stop))
        throw invalid_input("tune_for_resonance: target_f0 must lie inside the sweep");

    auto resonance_of = [&](const ArrayLayout& layout) {
        const NetworkResult net = analyze_sweep(layout, f_start, f_stop, n_points);
        return resonance_frequency(net);
    };

    DesignVector design;
    design.params.push_back(around("L", base.patches.front().length));

    auto eval_free = [&](const std::vector<double>& x) {
        DesignVector candidate = design;
        candidate.params[0].value = x[0];
        try {
            const ArrayLayout layout = apply_design(base, candidate);
            return std::abs(resonance_of(layout) - target_f0);
        } catch (const error&) {
            return 1e6 * 1e9; // penalty on the same scale as frequency offsets
        }
    };

    OptResult raw = nelder_mead(eval_free, {design.params[0].value}, {design.params[0].lower},
                                {design.params[0].upper}, tol_rel, max_evals);
    DesignVector best = design;
    best.params[0].value = raw.best.params[0].value;
    raw.best = best;

    TuneResult result;
    result.tuned = apply_design(base, best);
    result.opt = std::move(raw);
    result.achieved_f0 = resonance_of(result.tuned);
    if (std::abs(result.achieved_f0 - target_f0) > 0.15e9)
        throw non_convergence("tune_for_resonance: best resonance offset " +
                              std::to_string(std::abs(result.achieved_f0 - target_f0) / 1e9) +
                              " GHz exceeds 0.15 GHz");
    return result;
}

} // namespace patchkit
