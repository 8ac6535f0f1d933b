#include "softopt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>

#include "softopt/errors.hpp"
#include "softopt/text.hpp"

namespace softopt::problems {

namespace {

moo::DesignSpace apply_bounds(const moo::DesignSpace& base, const std::vector<BoundOverride>& bounds) {
    auto params = base.params();
    for (const auto& b : bounds) {
        const auto i = base.index_of(b.parameter);
        params[i].lower = b.lower;
        params[i].upper = b.upper;
    }
    return moo::DesignSpace(std::move(params));
}

nsga2::EvalOutcome guarded(const std::function<moo::ObjectiveVector()>& f) {
    try {
        return nsga2::EvalOutcome::success(f());
    } catch (const GeometryError& e) {
        return nsga2::EvalOutcome::failed(std::string("geometry: ") + e.what());
    } catch (const SolverError& e) {
        return nsga2::EvalOutcome::failed(std::string("solver: ") + e.what());
    }
}

Problem deformation(const ProblemSettings& s) {
    Problem p;
    p.id = "deformation";
    p.space = apply_bounds(finger::default_design_space(), s.bounds);
    p.objective_names = {"f1", "f2"};
    p.objective_units = {"uL", "deg"};
    p.maximize = {true, true};
    p.evaluator = [s](const moo::DesignVector& x) {
        return guarded([&] {
            const auto r = finger::evaluate_deformation(finger::from_vector(x), s.material, s.meshing, s.evaluation);
            return moo::ObjectiveVector{-r.f1, -r.f2};
        });
    };
    p.check_feasible = [](const moo::DesignVector& x) { finger::from_vector(x).validate(); };
    return p;
}

Problem pressure(const ProblemSettings& s) {
    Problem p;
    p.id = "pressure";
    p.space = apply_bounds(finger::default_design_space(), s.bounds);
    p.objective_names = {"f2", "f3", "f4"};
    p.objective_units = {"deg", "", "uL"};
    p.maximize = {true, true, true};
    p.evaluator = [s](const moo::DesignVector& x) {
        return guarded([&] {
            const auto r = finger::evaluate_pressure(finger::from_vector(x), s.material, s.meshing, s.evaluation);
            return moo::ObjectiveVector{-r.deformation.f2, -r.f3, -r.f4};
        });
    };
    p.check_feasible = [](const moo::DesignVector& x) { finger::from_vector(x).validate(); };
    return p;
}

// f1 = x^2, f2 = (x - 2)^2; Pareto set x in [0, 2].
Problem schaffer(const ProblemSettings& s) {
    Problem p;
    p.id = "schaffer";
    p.space = apply_bounds(moo::DesignSpace({{"x", -10.0, 10.0, ""}}), s.bounds);
    p.objective_names = {"f1", "f2"};
    p.objective_units = {"", ""};
    p.maximize = {false, false};
    p.evaluator = [](const moo::DesignVector& v) {
        const double x = v[0];
        return nsga2::EvalOutcome::success({x * x, (x - 2.0) * (x - 2.0)});
    };
    p.check_feasible = [](const moo::DesignVector&) {};
    return p;
}

// ZDT1 with 7 variables; Pareto set x_2.. = 0.
Problem zdt1(const ProblemSettings& s) {
    std::vector<moo::Parameter> params;
    for (int i = 1; i <= 7; ++i) {
        params.push_back({"x" + std::to_string(i), 0.0, 1.0, ""});
    }
    Problem p;
    p.id = "zdt1";
    p.space = apply_bounds(moo::DesignSpace(std::move(params)), s.bounds);
    p.objective_names = {"f1", "f2"};
    p.objective_units = {"", ""};
    p.maximize = {false, false};
    p.evaluator = [](const moo::DesignVector& v) {
        double tail = 0.0;
        for (std::size_t i = 1; i < v.size(); ++i) {
            tail += v[i];
        }
        const double g = 1.0 + 9.0 * tail / static_cast<double>(v.size() - 1);
        const double f1 = v[0];
        return nsga2::EvalOutcome::success({f1, g * (1.0 - std::sqrt(f1 / g))});
    };
    p.check_feasible = [](const moo::DesignVector&) {};
    return p;
}

struct Registry {
    std::mutex mu;
    std::map<std::string, ProblemFactory> factories{
        {"deformation", deformation}, {"pressure", pressure}, {"schaffer", schaffer}, {"zdt1", zdt1}};
};

Registry& registry() {
    static Registry r;
    return r;
}

} // namespace

Problem make_problem(const std::string& id, const ProblemSettings& settings) {
    ProblemFactory f;
    {
        auto& r = registry();
        std::lock_guard lock(r.mu);
        const auto it = r.factories.find(id);
        if (it == r.factories.end()) {
            std::string known;
            for (const auto& [name, _] : r.factories) {
                known += (known.empty() ? "" : ", ") + name;
            }
            throw ContractError("unknown problem '" + id + "' (known: " + known + ")");
        }
        f = it->second;
    }
    settings.material.validate();
    settings.meshing.validate();
    return f(settings);
}

std::vector<std::string> problem_ids() {
    auto& r = registry();
    std::lock_guard lock(r.mu);
    std::vector<std::string> ids;
    for (const auto& [name, _] : r.factories) {
        ids.push_back(name);
    }
    return ids;
}

bool known_problem(const std::string& id) {
    auto& r = registry();
    std::lock_guard lock(r.mu);
    return r.factories.count(id) != 0;
}

void register_problem(const std::string& id, ProblemFactory factory) {
    if (id.empty() || !factory) {
        throw ContractError("register_problem needs an id and a factory");
    }
    auto& r = registry();
    std::lock_guard lock(r.mu);
    r.factories[id] = std::move(factory);
}

std::string objective_label(const Problem& problem, std::size_t j) {
    const auto& name = problem.objective_names.at(j);
    const std::string unit = j < problem.objective_units.size() ? problem.objective_units[j] : "";
    return unit.empty() ? name : name + "_" + unit;
}

std::vector<double> reported(const Problem& problem, const moo::ObjectiveVector& stored_values) {
    if (stored_values.size() != problem.maximize.size()) {
        throw ContractError("objective count does not match problem '" + problem.id + "'");
    }
    std::vector<double> out(stored_values.values());
    for (std::size_t j = 0; j < out.size(); ++j) {
        if (problem.maximize[j]) {
            out[j] = -out[j];
        }
    }
    return out;
}

moo::ObjectiveVector stored(const Problem& problem, const std::vector<double>& reported_values) {
    if (reported_values.size() != problem.maximize.size()) {
        throw ContractError("objective count does not match problem '" + problem.id + "'");
    }
    auto v = reported_values;
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (problem.maximize[j]) {
            v[j] = -v[j];
        }
    }
    return moo::ObjectiveVector(std::move(v));
}

moo::DesignVector read_design_values(std::istream& is, const moo::DesignSpace& space) {
    std::vector<double> values(space.size());
    std::vector<bool> seen(space.size(), false);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string body = text::trim(std::string_view(line).substr(0, line.find('#')));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ContractError("design line " + std::to_string(lineno) + ": expected 'name = value'");
        }
        const std::string key = text::trim(std::string_view(body).substr(0, eq));
        std::size_t i = 0;
        try {
            i = space.index_of(key);
        } catch (const ContractError&) {
            throw ContractError("design line " + std::to_string(lineno) + ": unknown parameter '" + key + "'");
        }
        if (seen[i]) {
            throw ContractError("design line " + std::to_string(lineno) + ": duplicate parameter '" + key + "'");
        }
        seen[i] = true;
        values[i] = text::parse_double(text::trim(std::string_view(body).substr(eq + 1)), key);
    }
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (!seen[i]) {
            throw ContractError("design is missing parameter '" + space[i].name + "'");
        }
    }
    return moo::DesignVector(space, std::move(values));
}

void write_design_values(std::ostream& os, const moo::DesignVector& x, const moo::DesignSpace& space) {
    os << "# design";
    for (const auto& p : space.params()) {
        if (!p.unit.empty()) {
            os << "; " << p.name << " [" << p.unit << "]";
        }
    }
    os << '\n';
    for (std::size_t i = 0; i < space.size(); ++i) {
        os << space[i].name << " = " << text::format_double(x[i]) << '\n';
    }
}

} // namespace softopt::problems
