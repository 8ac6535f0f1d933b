#pragma once

// Design-space representation, Pareto dominance and quality indicators.
// Everything here uses the minimization convention; maximized objectives are
// stored negated by whoever produces them.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace softopt::moo {

struct Parameter {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    std::string unit;
};

/// Ordered list of named box-bounded continuous parameters.
class DesignSpace {
public:
    DesignSpace() = default;
    explicit DesignSpace(std::vector<Parameter> params);

    [[nodiscard]] std::size_t size() const noexcept { return params_.size(); }
    [[nodiscard]] const std::vector<Parameter>& params() const noexcept { return params_; }
    [[nodiscard]] const Parameter& operator[](std::size_t i) const { return params_.at(i); }

    /// Index of the named parameter; throws ContractError if absent.
    [[nodiscard]] std::size_t index_of(const std::string& name) const;

    /// Stable hash of names and bounds, used to reject mixing vectors from different spaces.
    [[nodiscard]] std::uint64_t fingerprint() const noexcept { return fingerprint_; }

    friend bool operator==(const DesignSpace& a, const DesignSpace& b) { return a.fingerprint_ == b.fingerprint_; }

private:
    std::vector<Parameter> params_;
    std::uint64_t fingerprint_ = 0;
};

/// A point of a DesignSpace. Bounds are closed: lower <= x_i <= upper.
class DesignVector {
public:
    DesignVector() = default;
    DesignVector(const DesignSpace& space, std::vector<double> values);

    /// Skips bound checks; for operators whose output is in the box by construction.
    static DesignVector from_trusted(std::uint64_t space_fingerprint, std::vector<double> values) {
        DesignVector v;
        v.values_ = std::move(values);
        v.space_ = space_fingerprint;
        return v;
    }

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_.at(i); }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::uint64_t space_fingerprint() const noexcept { return space_; }

    /// Copy with one coordinate replaced (re-validated against the space).
    [[nodiscard]] DesignVector with(const DesignSpace& space, std::size_t i, double value) const;

    /// Coordinates mapped to [0,1] per parameter.
    [[nodiscard]] std::vector<double> normalized(const DesignSpace& space) const;

    friend bool operator==(const DesignVector&, const DesignVector&) = default;

private:
    std::vector<double> values_;
    std::uint64_t space_ = 0;
};

/// Finite objective values, minimization convention.
class ObjectiveVector {
public:
    ObjectiveVector() = default;
    explicit ObjectiveVector(std::vector<double> values);
    ObjectiveVector(std::initializer_list<double> values) : ObjectiveVector(std::vector<double>(values)) {}

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_.at(i); }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;

private:
    std::vector<double> values_;
};

/// One design evaluation. `objectives` is empty for a failed trial, in which
/// case `failure` carries the reason.
struct Trial {
    std::uint64_t trial_id = 0;
    DesignVector design;
    std::optional<ObjectiveVector> objectives;
    std::string failure;
    double eval_seconds = 0.0;
    std::uint64_t rng_seed = 0;
    std::string tag;

    [[nodiscard]] bool ok() const noexcept { return objectives.has_value(); }
};

/// True iff a <= b componentwise and a < b somewhere.
[[nodiscard]] bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

using Fronts = std::vector<std::vector<std::size_t>>;

/// Fast non-dominated sort. Indices inside each front keep input order.
[[nodiscard]] Fronts non_dominated_sort(std::span<const ObjectiveVector> points);

/// NSGA-II crowding distance; boundary points get +inf.
[[nodiscard]] std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

struct ParetoResult {
    std::vector<Trial> trials;  // ordered by trial_id
    bool no_successful_trials = false;
};

/// Trials in the first non-dominated front of the successful trials.
/// Duplicate objective vectors are all kept.
[[nodiscard]] ParetoResult pareto_front(std::span<const Trial> study);

/// Area dominated by `front` and bounded by `ref`. Every point must dominate ref.
[[nodiscard]] double hypervolume_2d(std::span<const ObjectiveVector> front, const ObjectiveVector& ref);

} // namespace softopt::moo
