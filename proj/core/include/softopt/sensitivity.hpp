#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "softopt/moo.hpp"
#include "softopt/nsga2.hpp"

namespace softopt::sensitivity {

struct ParameterSensitivity {
    std::string parameter;
    double raw = 0.0;         // max |f(bound) - f(baseline)| over both bounds
    double normalized = 0.0;  // raw / max raw over parameters, in [0,1]
    bool low_probe_failed = false;
    bool high_probe_failed = false;
};

struct SensitivityReport {
    moo::DesignVector baseline;
    moo::ObjectiveVector baseline_objectives;
    std::vector<std::string> objective_names;
    /// per_objective[j][i]: objective j, parameter i.
    std::vector<std::vector<ParameterSensitivity>> per_objective;
    std::size_t evaluations = 0;
    std::vector<std::string> skipped_probes;

    /// Parameters of objective j ordered by decreasing normalized sensitivity (stable).
    [[nodiscard]] std::vector<std::string> ranking(std::size_t objective) const;
};

/// One-At-a-Time analysis: each parameter is moved to its lower and upper bound
/// with all others held at the baseline. 2d+1 evaluations, no interaction terms.
/// Throws SolverError if the baseline evaluation fails.
[[nodiscard]] SensitivityReport oat_analysis(const moo::DesignSpace& space, const moo::DesignVector& baseline,
                                             const nsga2::Evaluator& evaluator, std::size_t objective_count,
                                             std::vector<std::string> objective_names = {},
                                             std::size_t workers = 1);

/// CSV with header `parameter,objective,raw,normalized`.
void write_csv(std::ostream& os, const SensitivityReport& report);

} // namespace softopt::sensitivity
