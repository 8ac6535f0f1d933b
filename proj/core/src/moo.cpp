#include "softopt/moo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "softopt/errors.hpp"

namespace softopt::moo {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffU;
        h *= kFnvPrime;
    }
}

void fnv_mix(std::uint64_t& h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    fnv_mix(h, static_cast<std::uint64_t>(s.size()));
}

std::string describe(const ObjectiveVector& v) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) {
        os << (i ? ", " : "") << v[i];
    }
    os << ')';
    return os.str();
}

void require_same_length(std::span<const ObjectiveVector> points) {
    if (points.empty()) {
        return;
    }
    const auto m = points.front().size();
    for (const auto& p : points) {
        if (p.size() != m) {
            throw ContractError("objective vectors of mixed length");
        }
    }
}

} // namespace

DesignSpace::DesignSpace(std::vector<Parameter> params) : params_(std::move(params)) {
    std::set<std::string> seen;
    fingerprint_ = kFnvOffset;
    for (const auto& p : params_) {
        if (p.name.empty()) {
            throw ContractError("design parameter with empty name");
        }
        if (!seen.insert(p.name).second) {
            throw ContractError("duplicate design parameter '" + p.name + "'");
        }
        if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !(p.lower < p.upper)) {
            throw ContractError("parameter '" + p.name + "' needs finite bounds with lower < upper");
        }
        fnv_mix(fingerprint_, p.name);
        fnv_mix(fingerprint_, std::bit_cast<std::uint64_t>(p.lower));
        fnv_mix(fingerprint_, std::bit_cast<std::uint64_t>(p.upper));
    }
}

std::size_t DesignSpace::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (params_[i].name == name) {
            return i;
        }
    }
    throw ContractError("unknown design parameter '" + name + "'");
}

DesignVector::DesignVector(const DesignSpace& space, std::vector<double> values)
    : values_(std::move(values)), space_(space.fingerprint()) {
    if (values_.size() != space.size()) {
        throw ContractError("design vector has " + std::to_string(values_.size()) + " values, space has " +
                            std::to_string(space.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const auto& p = space[i];
        if (!(values_[i] >= p.lower && values_[i] <= p.upper)) {
            std::ostringstream os;
            os << "parameter '" << p.name << "' = " << values_[i] << " outside [" << p.lower << ", " << p.upper
               << "]";
            throw ContractError(os.str());
        }
    }
}

DesignVector DesignVector::with(const DesignSpace& space, std::size_t i, double value) const {
    auto v = values_;
    v.at(i) = value;
    return DesignVector(space, std::move(v));
}

std::vector<double> DesignVector::normalized(const DesignSpace& space) const {
    if (space.fingerprint() != space_) {
        throw ContractError("design vector belongs to a different design space");
    }
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        out[i] = (values_[i] - space[i].lower) / (space[i].upper - space[i].lower);
    }
    return out;
}

ObjectiveVector::ObjectiveVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw ContractError("objective vector needs at least one value");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw ContractError("objective vector entries must be finite");
        }
    }
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.size() != b.size()) {
        throw ContractError("dominates: objective vectors of different length");
    }
    bool strictly_better = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) {
            return false;
        }
        if (a[i] < b[i]) {
            strictly_better = true;
        }
    }
    return strictly_better;
}

Fronts non_dominated_sort(std::span<const ObjectiveVector> points) {
    require_same_length(points);
    const std::size_t n = points.size();
    Fronts fronts;
    if (n == 0) {
        return fronts;
    }

    std::vector<std::vector<std::size_t>> dominated_by_me(n);
    std::vector<std::size_t> domination_count(n, 0);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (dominates(points[p], points[q])) {
                dominated_by_me[p].push_back(q);
                ++domination_count[q];
            } else if (dominates(points[q], points[p])) {
                dominated_by_me[q].push_back(p);
                ++domination_count[p];
            }
        }
    }

    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p) {
        if (domination_count[p] == 0) {
            current.push_back(p);
        }
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto p : current) {
            for (auto q : dominated_by_me[p]) {
                if (--domination_count[q] == 0) {
                    next.push_back(q);
                }
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
    require_same_length(front);
    const std::size_t n = front.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> distance(n, 0.0);
    if (n <= 2) {
        std::fill(distance.begin(), distance.end(), inf);
        return distance;
    }
    const std::size_t m = front.front().size();
    std::vector<std::size_t> order(n);
    for (std::size_t obj = 0; obj < m; ++obj) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return front[a][obj] < front[b][obj]; });
        const double lo = front[order.front()][obj];
        const double hi = front[order.back()][obj];
        distance[order.front()] = inf;
        distance[order.back()] = inf;
        const double range = hi - lo;
        if (range <= 0.0) {
            continue;
        }
        for (std::size_t k = 1; k + 1 < n; ++k) {
            distance[order[k]] += (front[order[k + 1]][obj] - front[order[k - 1]][obj]) / range;
        }
    }
    return distance;
}

ParetoResult pareto_front(std::span<const Trial> study) {
    std::vector<const Trial*> ok;
    for (const auto& t : study) {
        if (t.ok()) {
            ok.push_back(&t);
        }
    }
    ParetoResult result;
    if (ok.empty()) {
        result.no_successful_trials = true;
        return result;
    }
    std::vector<ObjectiveVector> points;
    points.reserve(ok.size());
    for (const auto* t : ok) {
        points.push_back(*t->objectives);
    }
    const auto fronts = non_dominated_sort(points);
    for (auto idx : fronts.front()) {
        result.trials.push_back(*ok[idx]);
    }
    std::stable_sort(result.trials.begin(), result.trials.end(),
                     [](const Trial& a, const Trial& b) { return a.trial_id < b.trial_id; });
    return result;
}

double hypervolume_2d(std::span<const ObjectiveVector> front, const ObjectiveVector& ref) {
    if (ref.size() != 2) {
        throw ContractError("hypervolume_2d needs a 2-objective reference point");
    }
    std::vector<std::pair<double, double>> pts;
    pts.reserve(front.size());
    for (const auto& p : front) {
        if (p.size() != 2) {
            throw ContractError("hypervolume_2d needs 2-objective points");
        }
        if (!dominates(p, ref)) {
            throw ContractError("hypervolume_2d: point " + describe(p) + " does not dominate reference " +
                                describe(ref));
        }
        pts.emplace_back(p[0], p[1]);
    }
    std::sort(pts.begin(), pts.end());
    // sweep in increasing f1; each point adds the slab between its f2 and the best f2 so far
    double area = 0.0;
    double best_f2 = ref[1];
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto [x, y] = pts[i];
        if (y < best_f2) {
            area += (ref[0] - x) * (best_f2 - y);
            best_f2 = y;
        }
    }
    return area;
}

} // namespace softopt::moo
