#include "softopt/nsga2.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "softopt/errors.hpp"

namespace softopt::nsga2 {

void SolverConfig::validate() const {
    if (population_size < 2) {
        throw ContractError("population_size must be at least 2");
    }
    if (budget < population_size) {
        throw ContractError("budget must be at least population_size");
    }
    auto check_prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ContractError(std::string(name) + " must lie in [0, 1]");
        }
    };
    check_prob(crossover_prob, "crossover_prob");
    check_prob(swap_prob, "swap_prob");
    if (mutation_prob) {
        check_prob(*mutation_prob, "mutation_prob");
    }
    if (!(mutation_eta >= 0.0)) {
        throw ContractError("mutation_eta must be non-negative");
    }
}

moo::DesignVector uniform_crossover(const moo::DesignVector& pa, const moo::DesignVector& pb, double swap_prob,
                                    Rng& rng) {
    if (pa.space_fingerprint() != pb.space_fingerprint() || pa.size() != pb.size()) {
        throw ContractError("uniform_crossover: parents come from different design spaces");
    }
    // both parents are inside the box, so any gene mix is too
    auto values = pa.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (rng.coin(swap_prob)) {
            values[i] = pb[i];
        }
    }
    return moo::DesignVector::from_trusted(pa.space_fingerprint(), std::move(values));
}

moo::DesignVector mutate(const moo::DesignVector& x, const moo::DesignSpace& space, double mutation_prob, Rng& rng,
                         double eta) {
    if (x.space_fingerprint() != space.fingerprint()) {
        throw ContractError("mutate: design vector belongs to a different space");
    }
    auto values = x.values();
    const double exponent = 1.0 / (eta + 1.0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!rng.coin(mutation_prob)) {
            continue;
        }
        const double u = rng.uniform();
        const double delta =
            u < 0.5 ? std::pow(2.0 * u, exponent) - 1.0 : 1.0 - std::pow(2.0 * (1.0 - u), exponent);
        const auto& p = space[i];
        values[i] = std::clamp(values[i] + delta * (p.upper - p.lower), p.lower, p.upper);
    }
    return moo::DesignVector(space, std::move(values));
}

namespace {

// true if a wins the crowded comparison against b; nullopt on a full tie
std::optional<bool> crowded_better(const RankedIndividual& a, const RankedIndividual& b) {
    if (a.rank != b.rank) {
        return a.rank < b.rank;
    }
    if (a.crowding != b.crowding) {
        return a.crowding > b.crowding;
    }
    return std::nullopt;
}

} // namespace

const RankedIndividual& tournament_select(std::span<const RankedIndividual> pool, Rng& rng) {
    if (pool.empty()) {
        throw ContractError("tournament_select: empty pool");
    }
    if (pool.size() == 1) {
        return pool.front();
    }
    const auto i = rng.index(pool.size());
    auto j = rng.index(pool.size() - 1);
    if (j >= i) {
        ++j;
    }
    const auto verdict = crowded_better(pool[i], pool[j]);
    if (!verdict) {
        return rng.coin(0.5) ? pool[i] : pool[j];
    }
    return *verdict ? pool[i] : pool[j];
}

void rank_population(std::vector<RankedIndividual>& pop) {
    std::vector<std::size_t> ok;
    std::vector<moo::ObjectiveVector> points;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (pop[i].objectives) {
            ok.push_back(i);
            points.push_back(*pop[i].objectives);
        }
    }
    const auto fronts = moo::non_dominated_sort(points);
    for (std::size_t r = 0; r < fronts.size(); ++r) {
        std::vector<moo::ObjectiveVector> members;
        members.reserve(fronts[r].size());
        for (auto k : fronts[r]) {
            members.push_back(points[k]);
        }
        const auto crowd = moo::crowding_distance(members);
        for (std::size_t m = 0; m < fronts[r].size(); ++m) {
            auto& ind = pop[ok[fronts[r][m]]];
            ind.rank = r;
            ind.crowding = crowd[m];
        }
    }
    for (auto& ind : pop) {
        if (!ind.objectives) {
            ind.rank = fronts.size();
            ind.crowding = 0.0;
        }
    }
}

std::vector<RankedIndividual> select_survivors(std::vector<RankedIndividual> merged, std::size_t keep) {
    if (merged.size() <= keep) {
        rank_population(merged);
        return merged;
    }
    rank_population(merged);
    std::vector<std::size_t> order(merged.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (merged[a].rank != merged[b].rank) {
            return merged[a].rank < merged[b].rank;
        }
        return merged[a].crowding > merged[b].crowding;
    });
    std::vector<RankedIndividual> survivors;
    survivors.reserve(keep);
    for (std::size_t k = 0; k < keep; ++k) {
        survivors.push_back(std::move(merged[order[k]]));
    }
    rank_population(survivors);
    return survivors;
}

std::vector<TimedOutcome> evaluate_batch(std::span<const moo::DesignVector> designs, const Evaluator& evaluator,
                                         std::size_t workers,
                                         const std::function<void(std::size_t, const TimedOutcome&)>& on_ready) {
    const std::size_t n = designs.size();
    std::vector<TimedOutcome> results(n);
    std::vector<char> done(n, 0);
    std::size_t next_to_emit = 0;
    std::mutex emit_mutex;
    std::atomic<std::size_t> next_job{0};

    auto work = [&] {
        for (;;) {
            const std::size_t i = next_job.fetch_add(1);
            if (i >= n) {
                return;
            }
            TimedOutcome r;
            const auto start = std::chrono::steady_clock::now();
            try {
                r.outcome = evaluator(designs[i]);
                if (!r.outcome.objectives && r.outcome.failure.empty()) {
                    r.outcome.failure = "evaluator returned no objectives";
                }
            } catch (const std::exception& e) {
                r.outcome = EvalOutcome::failed(e.what());
            }
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

            std::lock_guard lock(emit_mutex);
            results[i] = std::move(r);
            done[i] = 1;
            while (next_to_emit < n && done[next_to_emit]) {
                if (on_ready) {
                    on_ready(next_to_emit, results[next_to_emit]);
                }
                ++next_to_emit;
            }
        }
    };

    const std::size_t threads = std::max<std::size_t>(1, std::min(workers, n));
    if (threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(work);
        }
    }
    return results;
}

namespace {

class Runner {
public:
    Runner(const moo::DesignSpace& space, const Evaluator& evaluator, const SolverConfig& config,
           const RunHooks& hooks)
        : space_(space), evaluator_(evaluator), config_(config), hooks_(hooks) {}

    std::vector<moo::Trial> run() {
        config_.validate();
        if (space_.size() == 0) {
            throw ContractError("design space has no parameters");
        }
        const double mutation_prob = config_.mutation_prob.value_or(1.0 / static_cast<double>(space_.size()));

        // generation 0: uniform samples in the box
        std::vector<moo::DesignVector> designs;
        std::vector<std::uint64_t> seeds;
        const std::size_t n0 = std::min(config_.population_size, config_.budget);
        for (std::size_t k = 0; k < n0; ++k) {
            const auto seed = stream_seed(config_.seed, 0, k);
            Rng rng(seed);
            std::vector<double> v(space_.size());
            for (std::size_t i = 0; i < v.size(); ++i) {
                v[i] = rng.uniform(space_[i].lower, space_[i].upper);
            }
            designs.emplace_back(space_, std::move(v));
            seeds.push_back(seed);
        }
        auto population = evaluate_generation(0, designs, seeds);
        rank_population(population);
        report(0, population);

        for (std::size_t gen = 1; trials_.size() < config_.budget; ++gen) {
            const std::size_t count = std::min(config_.population_size, config_.budget - trials_.size());
            designs.clear();
            seeds.clear();
            for (std::size_t k = 0; k < count; ++k) {
                const auto seed = stream_seed(config_.seed, gen, k);
                Rng rng(seed);
                const auto& pa = tournament_select(population, rng);
                const auto& pb = tournament_select(population, rng);
                auto child = rng.coin(config_.crossover_prob)
                                 ? uniform_crossover(pa.design, pb.design, config_.swap_prob, rng)
                                 : pa.design;
                designs.push_back(mutate(child, space_, mutation_prob, rng, config_.mutation_eta));
                seeds.push_back(seed);
            }
            auto offspring = evaluate_generation(gen, designs, seeds);
            population.insert(population.end(), std::make_move_iterator(offspring.begin()),
                              std::make_move_iterator(offspring.end()));
            population = select_survivors(std::move(population), config_.population_size);
            report(gen, population);
        }
        return std::move(trials_);
    }

private:
    std::vector<RankedIndividual> evaluate_generation(std::size_t gen, const std::vector<moo::DesignVector>& designs,
                                                      const std::vector<std::uint64_t>& seeds) {
        const std::size_t n = designs.size();
        const std::uint64_t first_id = trials_.size();
        std::vector<std::optional<TimedOutcome>> outcomes(n);
        std::vector<std::size_t> pending;
        std::vector<moo::DesignVector> pending_designs;
        for (std::size_t k = 0; k < n; ++k) {
            if (hooks_.replay) {
                if (auto rec = hooks_.replay(first_id + k, designs[k])) {
                    outcomes[k] = TimedOutcome{std::move(*rec), 0.0};
                    continue;
                }
            }
            pending.push_back(k);
            pending_designs.push_back(designs[k]);
        }

        std::size_t emitted = 0;
        auto emit_ready = [&] {
            while (emitted < n && outcomes[emitted]) {
                emit(first_id + emitted, designs[emitted], seeds[emitted], *outcomes[emitted]);
                ++emitted;
            }
        };
        emit_ready();
        (void)evaluate_batch(pending_designs, evaluator_, hooks_.workers,
                             [&](std::size_t i, const TimedOutcome& r) {
                                 outcomes[pending[i]] = r;
                                 emit_ready();
                             });
        emit_ready();

        std::vector<RankedIndividual> out;
        out.reserve(n);
        std::size_t failures = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const auto& trial = trials_[first_id + k];
            failures += trial.ok() ? 0 : 1;
            out.push_back(RankedIndividual{trial.design, trial.objectives, 0, 0.0, trial.trial_id});
        }
        if (failures == n) {
            throw SolverError("every evaluation of generation " + std::to_string(gen) +
                              " failed; first failure: " + trials_[first_id].failure);
        }
        last_failures_ = failures;
        return out;
    }

    void emit(std::uint64_t id, const moo::DesignVector& design, std::uint64_t seed, const TimedOutcome& r) {
        moo::Trial t;
        t.trial_id = id;
        t.design = design;
        t.objectives = r.outcome.objectives;
        t.failure = r.outcome.objectives ? std::string{} : r.outcome.failure;
        t.eval_seconds = r.seconds;
        t.rng_seed = seed;
        t.tag = "nsga2";
        trials_.push_back(std::move(t));
        if (hooks_.on_trial) {
            hooks_.on_trial(trials_.back());
        }
    }

    void report(std::size_t gen, const std::vector<RankedIndividual>& population) {
        if (hooks_.on_generation) {
            hooks_.on_generation(GenerationSummary{gen, trials_.size(), last_failures_, population});
        }
    }

    const moo::DesignSpace& space_;
    const Evaluator& evaluator_;
    const SolverConfig& config_;
    const RunHooks& hooks_;
    std::vector<moo::Trial> trials_;
    std::size_t last_failures_ = 0;
};

} // namespace

std::vector<moo::Trial> run(const moo::DesignSpace& space, const Evaluator& evaluator, const SolverConfig& config,
                            const RunHooks& hooks) {
    return Runner(space, evaluator, config, hooks).run();
}

} // namespace softopt::nsga2
