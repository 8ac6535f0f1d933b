#include "softopt/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "softopt/errors.hpp"
#include "softopt/text.hpp"

namespace softopt::sensitivity {

std::vector<std::string> SensitivityReport::ranking(std::size_t objective) const {
    const auto& col = per_objective.at(objective);
    std::vector<std::size_t> order(col.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return col[a].normalized > col[b].normalized; });
    std::vector<std::string> names;
    for (auto i : order) {
        names.push_back(col[i].parameter);
    }
    return names;
}

SensitivityReport oat_analysis(const moo::DesignSpace& space, const moo::DesignVector& baseline,
                               const nsga2::Evaluator& evaluator, std::size_t objective_count,
                               std::vector<std::string> objective_names, std::size_t workers) {
    if (baseline.space_fingerprint() != space.fingerprint()) {
        throw ContractError("oat_analysis: baseline belongs to a different design space");
    }
    if (objective_count == 0) {
        throw ContractError("oat_analysis: objective_count must be positive");
    }
    if (objective_names.empty()) {
        for (std::size_t j = 0; j < objective_count; ++j) {
            objective_names.push_back("f" + std::to_string(j + 1));
        }
    }
    if (objective_names.size() != objective_count) {
        throw ContractError("oat_analysis: objective_names size mismatch");
    }

    const std::size_t d = space.size();
    // probe layout: [baseline, p0 low, p0 high, p1 low, ...]
    std::vector<moo::DesignVector> probes;
    probes.reserve(2 * d + 1);
    probes.push_back(baseline);
    for (std::size_t i = 0; i < d; ++i) {
        probes.push_back(baseline.with(space, i, space[i].lower));
        probes.push_back(baseline.with(space, i, space[i].upper));
    }
    const auto results = nsga2::evaluate_batch(probes, evaluator, workers);

    auto objectives_of = [&](std::size_t k) -> const moo::ObjectiveVector* {
        const auto& o = results[k].outcome.objectives;
        if (!o) {
            return nullptr;
        }
        if (o->size() != objective_count) {
            throw ContractError("oat_analysis: evaluator returned " + std::to_string(o->size()) +
                                " objectives, expected " + std::to_string(objective_count));
        }
        return &*o;
    };

    const auto* base = objectives_of(0);
    if (!base) {
        throw SolverError("oat_analysis: baseline evaluation failed: " + results[0].outcome.failure);
    }

    SensitivityReport report;
    report.baseline = baseline;
    report.baseline_objectives = *base;
    report.objective_names = std::move(objective_names);
    report.evaluations = probes.size();
    report.per_objective.assign(objective_count, std::vector<ParameterSensitivity>(d));

    for (std::size_t i = 0; i < d; ++i) {
        const auto* lo = objectives_of(1 + 2 * i);
        const auto* hi = objectives_of(2 + 2 * i);
        if (!lo) {
            report.skipped_probes.push_back(space[i].name + "@lower: " + results[1 + 2 * i].outcome.failure);
        }
        if (!hi) {
            report.skipped_probes.push_back(space[i].name + "@upper: " + results[2 + 2 * i].outcome.failure);
        }
        for (std::size_t j = 0; j < objective_count; ++j) {
            auto& entry = report.per_objective[j][i];
            entry.parameter = space[i].name;
            entry.low_probe_failed = lo == nullptr;
            entry.high_probe_failed = hi == nullptr;
            double raw = 0.0;
            if (lo) {
                raw = std::max(raw, std::abs((*lo)[j] - (*base)[j]));
            }
            if (hi) {
                raw = std::max(raw, std::abs((*hi)[j] - (*base)[j]));
            }
            entry.raw = raw;
        }
    }

    for (auto& column : report.per_objective) {
        double max_raw = 0.0;
        for (const auto& e : column) {
            max_raw = std::max(max_raw, e.raw);
        }
        for (auto& e : column) {
            e.normalized = max_raw > 0.0 ? e.raw / max_raw : 0.0;
        }
    }
    return report;
}

void write_csv(std::ostream& os, const SensitivityReport& report) {
    os << "parameter,objective,raw,normalized\n";
    for (std::size_t j = 0; j < report.per_objective.size(); ++j) {
        for (const auto& e : report.per_objective[j]) {
            os << e.parameter << ',' << report.objective_names[j] << ',' << text::format_double(e.raw) << ','
               << text::format_double(e.normalized) << '\n';
        }
    }
}

} // namespace softopt::sensitivity
