#pragma once

// Named optimization problems: the two finger studies plus analytic test problems.

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "softopt/fem.hpp"
#include "softopt/finger.hpp"
#include "softopt/moo.hpp"
#include "softopt/nsga2.hpp"

namespace softopt::problems {

struct BoundOverride {
    std::string parameter;
    double lower = 0.0;
    double upper = 0.0;
};

struct ProblemSettings {
    fem::MaterialParams material;
    finger::MeshingSpec meshing;
    finger::EvaluationOptions evaluation;
    std::vector<BoundOverride> bounds;  // applied on top of the problem's default box
};

struct Problem {
    std::string id;
    moo::DesignSpace space;
    std::vector<std::string> objective_names;  // "f1", "f2", ...
    std::vector<std::string> objective_units;  // "uL", "deg", "" for dimensionless
    std::vector<bool> maximize;                // stored negated when true
    nsga2::Evaluator evaluator;                // minimization convention
    /// Throws GeometryError / ContractError if the design cannot be evaluated at all.
    std::function<void(const moo::DesignVector&)> check_feasible;
};

using ProblemFactory = std::function<Problem(const ProblemSettings&)>;

/// Built in: "deformation" (max f1, f2), "pressure" (max f2, f3, f4), "schaffer", "zdt1".
[[nodiscard]] Problem make_problem(const std::string& id, const ProblemSettings& settings = {});
[[nodiscard]] std::vector<std::string> problem_ids();
[[nodiscard]] bool known_problem(const std::string& id);

/// Custom evaluator hook; replaces an existing registration with the same id.
void register_problem(const std::string& id, ProblemFactory factory);

/// Objective values in their natural sense (maximized ones un-negated).
/// Column label: name plus unit suffix, e.g. "f1_uL".
[[nodiscard]] std::string objective_label(const Problem& problem, std::size_t j);

[[nodiscard]] std::vector<double> reported(const Problem& problem, const moo::ObjectiveVector& stored);
[[nodiscard]] moo::ObjectiveVector stored(const Problem& problem, const std::vector<double>& reported_values);

/// "name = value" document for any design space; every parameter required.
[[nodiscard]] moo::DesignVector read_design_values(std::istream& is, const moo::DesignSpace& space);
void write_design_values(std::ostream& os, const moo::DesignVector& x, const moo::DesignSpace& space);

} // namespace softopt::problems
