#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "softopt/moo.hpp"
#include "softopt/rng.hpp"

namespace softopt::nsga2 {

/// Result of one evaluator call: objectives on success, a reason on failure.
struct EvalOutcome {
    std::optional<moo::ObjectiveVector> objectives;
    std::string failure;

    static EvalOutcome success(moo::ObjectiveVector v) { return {std::move(v), {}}; }
    static EvalOutcome failed(std::string why) { return {std::nullopt, std::move(why)}; }
};

/// Must be a pure function of the design and safe to call concurrently.
using Evaluator = std::function<EvalOutcome(const moo::DesignVector&)>;

struct SolverConfig {
    std::size_t population_size = 50;
    double crossover_prob = 0.9;
    double swap_prob = 0.5;
    std::optional<double> mutation_prob;  // defaults to 1/d
    std::size_t budget = 1500;
    std::uint64_t seed = 0;
    double mutation_eta = 20.0;

    void validate() const;
};

struct RankedIndividual {
    moo::DesignVector design;
    std::optional<moo::ObjectiveVector> objectives;  // empty: failed, ranks after everything
    std::size_t rank = 0;
    double crowding = 0.0;
    std::uint64_t trial_id = 0;
};

/// Child gene i comes from pb with probability swap_prob, else from pa.
[[nodiscard]] moo::DesignVector uniform_crossover(const moo::DesignVector& pa, const moo::DesignVector& pb,
                                                  double swap_prob, Rng& rng);

/// Polynomial mutation with distribution index eta, applied per gene with mutation_prob, clamped to the box.
[[nodiscard]] moo::DesignVector mutate(const moo::DesignVector& x, const moo::DesignSpace& space,
                                       double mutation_prob, Rng& rng, double eta = 20.0);

/// Binary crowded-comparison tournament.
[[nodiscard]] const RankedIndividual& tournament_select(std::span<const RankedIndividual> pool, Rng& rng);

/// Assigns rank and crowding in place (failed individuals land in a trailing front).
void rank_population(std::vector<RankedIndividual>& pop);

/// Keeps `keep` individuals by (rank, crowding); partial last front is truncated by crowding.
[[nodiscard]] std::vector<RankedIndividual> select_survivors(std::vector<RankedIndividual> merged,
                                                             std::size_t keep);

struct GenerationSummary {
    std::size_t generation = 0;
    std::size_t evaluations = 0;  // cumulative
    std::size_t failures = 0;     // in this generation
    std::vector<RankedIndividual> population;  // survivors after this generation
};

struct RunHooks {
    std::size_t workers = 1;
    /// Called once per trial in trial_id order; calls are serialized (may come from a worker thread).
    std::function<void(const moo::Trial&)> on_trial;
    std::function<void(const GenerationSummary&)> on_generation;
    /// Replays a recorded outcome instead of calling the evaluator (used by --resume).
    std::function<std::optional<EvalOutcome>(std::uint64_t trial_id, const moo::DesignVector&)> replay;
};

/// Full NSGA-II run; returns every evaluation in trial_id order.
/// Throws SolverError if every evaluation of a generation fails.
[[nodiscard]] std::vector<moo::Trial> run(const moo::DesignSpace& space, const Evaluator& evaluator,
                                          const SolverConfig& config, const RunHooks& hooks = {});

struct TimedOutcome {
    EvalOutcome outcome;
    double seconds = 0.0;
};

/// Evaluates `designs` on up to `workers` threads; results are in input order.
/// `on_ready(i, result)` fires for i = 0, 1, ... in order, each as soon as every
/// earlier index has finished; calls are serialized. Evaluator exceptions become failures.
[[nodiscard]] std::vector<TimedOutcome> evaluate_batch(
    std::span<const moo::DesignVector> designs, const Evaluator& evaluator, std::size_t workers,
    const std::function<void(std::size_t, const TimedOutcome&)>& on_ready = {});

} // namespace softopt::nsga2
