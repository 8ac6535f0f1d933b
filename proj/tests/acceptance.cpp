// Acceptance runner: one PASS/FAIL line per criterion.
//
//   softopt_acceptance [--only N[,N...]] [--expect-red N[,N...]] [--workers N]
//
// Exit status is 0 when the set of failing criteria equals the --expect-red set
// (empty by default), so a known-red criterion stays visible in the output
// without hiding new regressions.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <Eigen/Geometry>

#include "softopt/commands.hpp"
#include "softopt/fem.hpp"
#include "softopt/finger.hpp"
#include "softopt/moo.hpp"
#include "softopt/nsga2.hpp"
#include "softopt/problems.hpp"
#include "softopt/rng.hpp"
#include "softopt/sensitivity.hpp"
#include "support.hpp"

using namespace softopt;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = true;
    std::ostringstream detail;
    std::string violated;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            violated += " [violated: " + what + "]";
        }
    }
};

std::size_t g_workers = 1;

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

// ---------------------------------------------------------------------------------------------

Verdict c1_dominance() {
    Verdict v;
    const auto t0 = Clock::now();
    Rng rng(2024);
    int mismatches = 0;
    std::size_t largest = 0;
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t n = 1 + rng.index(500);
        const std::size_t m = 2 + rng.index(2);
        const bool grid = inst % 2 == 0;  // half the instances on a coarse lattice: ties and duplicates
        std::vector<moo::ObjectiveVector> pts;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x(m);
            for (auto& c : x) {
                c = grid ? static_cast<double>(rng.index(8)) : rng.uniform();
            }
            pts.emplace_back(x);
        }
        largest = std::max(largest, n);
        if (moo::non_dominated_sort(pts) != oracle::brute_force_fronts(pts)) {
            ++mismatches;
        }
    }
    const double secs = seconds_since(t0);
    v.require(mismatches == 0, std::to_string(mismatches) + " instances differ from the brute-force oracle");
    v.require(secs < 5.0, "runtime < 5 s");
    v.detail << "100 instances (n <= " << largest << ", 2-3 objectives), " << mismatches << " mismatches, "
             << fmt(secs, 3) << " s";
    return v;
}

Verdict c2_schaffer() {
    Verdict v;
    const auto t0 = Clock::now();
    const auto problem = problems::make_problem("schaffer");
    nsga2::SolverConfig cfg;
    cfg.population_size = 50;
    cfg.budget = 1500;
    cfg.seed = 1;

    const moo::ObjectiveVector ref{5.0, 5.0};
    std::vector<moo::ObjectiveVector> archive;
    std::vector<double> hv;
    std::vector<nsga2::RankedIndividual> last;
    nsga2::RunHooks hooks;
    hooks.workers = g_workers;
    hooks.on_trial = [&](const moo::Trial& t) {
        if (t.objectives) {
            archive.push_back(*t.objectives);
        }
    };
    hooks.on_generation = [&](const nsga2::GenerationSummary& g) {
        std::vector<moo::ObjectiveVector> inside;
        for (const auto& p : archive) {
            if (moo::dominates(p, ref)) {
                inside.push_back(p);
            }
        }
        hv.push_back(inside.empty() ? 0.0 : moo::hypervolume_2d(inside, ref));
        last = g.population;
    };
    const auto trials = nsga2::run(problem.space, problem.evaluator, cfg, hooks);

    std::size_t front = 0, near = 0;
    for (const auto& ind : last) {
        if (ind.rank == 0) {
            ++front;
            const double x = ind.design[0];
            const double dist = x < 0.0 ? -x : (x > 2.0 ? x - 2.0 : 0.0);
            near += dist <= 0.05 ? 1 : 0;
        }
    }
    bool monotone = true;
    for (std::size_t g = 1; g < hv.size(); ++g) {
        monotone = monotone && hv[g] >= hv[g - 1];
    }
    const double share = front ? static_cast<double>(near) / static_cast<double>(front) : 0.0;
    const double secs = seconds_since(t0);
    v.require(trials.size() == 1500, "budget honoured");
    v.require(share >= 0.9, ">= 90% of front-0 within 0.05 of x in [0, 2]");
    v.require(monotone, "archive hypervolume non-decreasing");
    v.require(secs < 10.0, "runtime < 10 s");
    v.detail << near << "/" << front << " front-0 designs within 0.05 of the Pareto set (" << fmt(100 * share, 3)
             << "%), hypervolume " << fmt(hv.front()) << " -> " << fmt(hv.back()) << " over " << hv.size()
             << " generations, " << fmt(secs, 3) << " s";
    return v;
}

Verdict c3_fem() {
    Verdict v;
    const fem::MaterialParams mat;

    // cantilever, slenderness 10, tip shear load
    const double length = 100.0, side = 10.0, load = 0.01;
    const auto beam = oracle::box_mesh(6, 6, 56, side, side, length);
    fem::ActuationSpec act;
    act.use_cable = false;
    act.load_steps = 1;
    std::vector<std::size_t> tip;
    for (std::size_t i = 0; i < beam.nodes.size(); ++i) {
        if (std::abs(beam.nodes[i].z() - length) < 1e-9) {
            tip.push_back(i);
        }
    }
    for (auto i : tip) {
        act.external_loads.push_back({i, fem::Vec3(0, load / static_cast<double>(tip.size()), 0)});
    }
    const auto sol = fem::solve_static(beam, mat, act);
    double uy = 0.0;
    for (auto i : tip) {
        uy += sol.displacements[i].y();
    }
    uy /= static_cast<double>(tip.size());
    const double eb = load * std::pow(length, 3) / (3.0 * mat.young_modulus * std::pow(side, 4) / 12.0);
    const double beam_err = std::abs(uy / eb - 1.0);
    v.require(sol.converged, "cantilever solve converged");
    v.require(beam.nodes.size() >= 2000, ">= 2000 nodes");
    v.require(beam_err <= 0.15, "tip deflection within 15% of Euler-Bernoulli");

    // finite differences on the actuated finger state
    const auto mesh = finger::build_finger(finger::preset("baseline"), {});
    fem::ActuationSpec cable;
    cable.cable_displacement = 10.0;
    const auto fs_sol = fem::solve_static(mesh, mat, cable);
    const auto st = fem::elastic_force_and_stiffness(mesh, mat, fs_sol.displacements, false);
    Rng rng(5);
    double fd_err = 0.0, fscale = st.force.cwiseAbs().maxCoeff();
    for (int probe = 0; probe < 200; ++probe) {
        const auto i = rng.index(mesh.nodes.size());
        const auto a = static_cast<int>(rng.index(3));
        const double h = 1e-6;
        auto up = fs_sol.displacements, dn = fs_sol.displacements;
        up[i][a] += h;
        dn[i][a] -= h;
        const double g = (fem::elastic_energy(mesh, mat, up) - fem::elastic_energy(mesh, mat, dn)) / (2 * h);
        fd_err = std::max(fd_err, std::abs(-g - st.force[static_cast<Eigen::Index>(3 * i + a)]));
    }
    const double fd_rel = fd_err / fscale;
    v.require(fd_rel < 1e-5, "force/energy finite-difference agreement < 1e-5 relative");

    std::vector<fem::Vec3> shift(mesh.nodes.size(), fem::Vec3(1.5, -2.0, 0.75));
    const double rigid = fem::elastic_force_and_stiffness(mesh, mat, shift, false).force.cwiseAbs().maxCoeff();
    v.require(rigid < 1e-10, "rigid-translation force residual < 1e-10");

    v.detail << "cantilever " << beam.nodes.size() << " nodes: " << fmt(uy) << " mm vs " << fmt(eb)
             << " mm (error " << fmt(100 * beam_err, 3) << "%); FD force error " << fmt(fd_rel, 3)
             << " relative; rigid-translation residual " << fmt(rigid, 3) << " N";
    return v;
}

Verdict c4_volume() {
    Verdict v;
    const auto cube = oracle::unit_cube_surface();
    const double cube_err = std::abs(fem::surface_volume(cube.triangles, cube.points) - 1.0);
    const double r = 2.0;
    const auto sphere = oracle::icosphere(3, r);
    const double exact = 4.0 / 3.0 * std::numbers::pi * r * r * r;
    const double sphere_err = std::abs(fem::surface_volume(sphere.triangles, sphere.points) / exact - 1.0);

    // translation of a deformed finger cavity
    const auto mesh = finger::build_finger(finger::preset("large"), {});
    fem::ActuationSpec act;
    act.cable_displacement = 10.0;
    const auto sol = fem::solve_static(mesh, {}, act);
    auto pos = fem::deformed_positions(mesh, sol.displacements);
    const double v0 = fem::surface_volume(mesh.cavity_surfaces[1], pos);
    for (auto& p : pos) {
        p += fem::Vec3(123.0, -45.5, 1000.0);
    }
    const double trans_err = std::abs(fem::surface_volume(mesh.cavity_surfaces[1], pos) / v0 - 1.0);

    v.require(cube_err <= 1e-12, "unit cube exact to 1e-12");
    v.require(sphere.triangles.size() == 1280 && sphere_err <= 0.01, "icosphere (1280 faces) within 1%");
    v.require(trans_err <= 1e-10, "translation invariance to 1e-10");
    v.detail << "cube error " << fmt(cube_err, 3) << ", icosphere r=2 error " << fmt(100 * sphere_err, 3)
             << "%, translated deformed cavity error " << fmt(trans_err, 3);
    return v;
}

Verdict c5_tradeoff() {
    Verdict v;
    const auto t0 = Clock::now();
    finger::MeshingSpec spec;  // 500 nodes
    const auto slim = finger::evaluate_deformation(finger::preset("slim"), {}, spec);
    const auto large = finger::evaluate_deformation(finger::preset("large"), {}, spec);
    const double ratio = large.f1 / slim.f1;
    const double df2 = slim.f2 - large.f2;
    const double secs = seconds_since(t0);
    v.require(ratio >= 3.0, "f1(large)/f1(slim) >= 3");
    v.require(df2 > 0.0, "f2(slim) - f2(large) > 0");
    v.require(secs < 30.0, "runtime < 30 s");
    v.detail << "slim f1 " << fmt(slim.f1) << " uL, f2 " << fmt(slim.f2) << " deg (" << slim.nodes
             << " nodes); large f1 " << fmt(large.f1) << " uL, f2 " << fmt(large.f2) << " deg (" << large.nodes
             << " nodes); gain " << fmt(ratio, 3) << "x (reference: 5.15x simulated, 6.74x measured); f2 difference "
             << fmt(df2, 3) << " deg (reference: 9.03 deg); " << fmt(secs, 3) << " s";
    return v;
}

Verdict c6_convergence() {
    Verdict v;
    const auto t0 = Clock::now();
    const auto design = finger::preset("baseline");
    std::vector<double> f1;
    std::vector<double> nodes;
    for (int target : {500, 1000, 2000, 4000}) {
        finger::MeshingSpec spec;
        spec.target_nodes = target;
        const auto r = finger::evaluate_deformation(design, {}, spec);
        f1.push_back(r.f1);
        nodes.push_back(static_cast<double>(r.nodes));
        v.require(std::abs(static_cast<double>(r.nodes) - target) <= 0.2 * target, "achieved nodes within 20% of " + std::to_string(target));
    }
    std::vector<double> d, slope;
    for (std::size_t k = 1; k < f1.size(); ++k) {
        d.push_back(std::abs(f1[k] - f1[k - 1]));
        slope.push_back(d.back() / (nodes[k] - nodes[k - 1]));
    }
    bool dec = true, slope_dec = true;
    for (std::size_t k = 1; k < d.size(); ++k) {
        dec = dec && d[k] < d[k - 1];
        slope_dec = slope_dec && slope[k] < slope[k - 1];
    }
    const double secs = seconds_since(t0);
    v.require(dec, "successive |df1| strictly decreasing");
    v.require(slope_dec, "|df1|/dN decreasing towards 0");
    v.require(secs < 180.0, "runtime < 3 min");
    v.detail << "baseline f1 at " << nodes[0] << "/" << nodes[1] << "/" << nodes[2] << "/" << nodes[3]
             << " nodes: " << fmt(f1[0]) << ", " << fmt(f1[1]) << ", " << fmt(f1[2]) << ", " << fmt(f1[3])
             << " uL; |df1| " << fmt(d[0]) << ", " << fmt(d[1]) << ", " << fmt(d[2]) << "; |df1|/dN "
             << fmt(slope[0], 3) << ", " << fmt(slope[1], 3) << ", " << fmt(slope[2], 3) << "; " << fmt(secs, 3)
             << " s";
    return v;
}

struct Extremes {
    std::vector<std::vector<double>> designs;  // per objective: normalized design of the best front member
    std::vector<double> best;                  // per objective: its reported value
    std::size_t front = 0;
    double seconds = 0.0;
};

Extremes pareto_extremes(double poisson, int nodes) {
    const auto t0 = Clock::now();
    problems::ProblemSettings s;
    s.material.poisson_ratio = poisson;
    s.meshing.target_nodes = nodes;
    const auto problem = problems::make_problem("deformation", s);
    nsga2::SolverConfig cfg;
    cfg.population_size = 50;
    cfg.budget = 300;
    cfg.seed = 2023;
    nsga2::RunHooks hooks;
    hooks.workers = g_workers;
    const auto trials = nsga2::run(problem.space, problem.evaluator, cfg, hooks);
    const auto front = moo::pareto_front(trials);
    Extremes e;
    e.front = front.trials.size();
    for (std::size_t j = 0; j < 2; ++j) {
        const auto best = std::min_element(front.trials.begin(), front.trials.end(), [&](const auto& a, const auto& b) {
            return (*a.objectives)[j] < (*b.objectives)[j];
        });
        e.designs.push_back(moo::DesignVector(problem.space, best->design.values()).normalized(problem.space));
        e.best.push_back(-(*best->objectives)[j]);  // both deformation objectives are maximized
    }
    e.seconds = seconds_since(t0);
    return e;
}

Verdict c7_variability() {
    Verdict v;
    const auto a = pareto_extremes(0.30, 500);
    const auto b = pareto_extremes(0.45, 1000);
    const auto& names = finger::parameter_names();
    const char* which[] = {"max-f1", "max-f2"};
    for (std::size_t j = 0; j < 2; ++j) {
        double worst = 0.0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < names.size(); ++i) {
            const double gap = std::abs(a.designs[j][i] - b.designs[j][i]);
            if (gap > worst) {
                worst = gap;
                arg = i;
            }
        }
        v.require(worst <= 0.15, std::string(which[j]) + " extreme within 0.15 normalized");
        auto vec = [](const std::vector<double>& x) {
            std::string s = "(";
            for (std::size_t i = 0; i < x.size(); ++i) {
                s += (i ? " " : "") + fmt(x[i], 2);
            }
            return s + ")";
        };
        v.detail << which[j] << " extreme " << fmt(a.best[j]) << " vs " << fmt(b.best[j]) << ", normalized "
                 << vec(a.designs[j]) << " vs " << vec(b.designs[j]) << ", largest gap " << fmt(worst, 3) << " ("
                 << names[arg] << "); ";
    }
    const double secs = a.seconds + b.seconds;
    v.require(secs <= 1800.0, "runtime <= 30 min");
    v.detail << "fronts of " << a.front << " and " << b.front << " designs; " << fmt(secs, 4) << " s";
    return v;
}

Verdict c8_tolerance() {
    Verdict v;
    finger::MeshingSpec spec;
    spec.target_nodes = 3209;
    const auto t = finger::wall_thickness_tolerance_study(finger::preset("large"), 0.4, {}, spec);
    finger::MeshingSpec coarse;
    const auto c = finger::wall_thickness_tolerance_study(finger::preset("large"), 0.4, {}, coarse);
    v.require(t.f1_perturbed > t.f1_nominal, "f1 strictly increases when wall_thickness drops by 0.4 mm");
    v.detail << "large finger at ~3209 nodes, wall " << fmt(t.nominal_wall) << " -> " << fmt(t.perturbed_wall)
             << " mm: f1 " << fmt(t.f1_nominal) << " -> " << fmt(t.f1_perturbed) << " uL ("
             << fmt(100 * t.relative_change, 3) << "%; reference: about +24%, 175.24 -> 217.00 uL); at ~500 nodes "
             << fmt(100 * c.relative_change, 3) << "%";
    return v;
}

Verdict c9_oat() {
    Verdict v;
    // linear test objective: raw differentials are |a_i| * max(x_i - lo_i, hi_i - x_i)
    const moo::DesignSpace space({{"p", 0, 1, ""}, {"q", -2, 2, ""}, {"r", 10, 20, ""}, {"s", 0, 5, ""}});
    const std::vector<double> coef{3.0, -1.0, 0.25, 0.0};
    const moo::DesignVector base(space, {0.2, 1.0, 12.0, 2.5});
    nsga2::Evaluator lin = [&](const moo::DesignVector& x) {
        double f = 0.0;
        for (std::size_t i = 0; i < coef.size(); ++i) {
            f += coef[i] * x[i];
        }
        return nsga2::EvalOutcome::success({f});
    };
    const auto rep = sensitivity::oat_analysis(space, base, lin, 1);
    std::vector<double> raw;
    for (std::size_t i = 0; i < coef.size(); ++i) {
        raw.push_back(std::abs(coef[i]) * std::max(base[i] - space[i].lower, space[i].upper - base[i]));
    }
    const double top = *std::max_element(raw.begin(), raw.end());
    double err = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        err = std::max(err, std::abs(rep.per_objective[0][i].normalized - raw[i] / top));
    }
    v.require(err <= 1e-12, "analytic normalized sensitivities reproduced");

    const auto problem = problems::make_problem("deformation");
    const auto large = finger::to_vector(finger::preset("large"), problem.space);
    const auto fr = sensitivity::oat_analysis(problem.space, large, problem.evaluator, 2, {"f1", "f2"}, g_workers);
    const auto ranking = fr.ranking(0);
    const auto pos = std::find(ranking.begin(), ranking.end(), "wall_thickness") - ranking.begin();
    v.require(pos < 2, "wall_thickness ranks top-2 for f1");
    v.detail << "analytic error " << fmt(err, 3) << "; large finger f1 ranking:";
    for (std::size_t k = 0; k < 3; ++k) {
        const auto i = problem.space.index_of(ranking[k]);
        v.detail << ' ' << ranking[k] << '=' << fmt(fr.per_objective[0][i].normalized, 3);
    }
    v.detail << " (wall_thickness rank " << pos + 1 << ")";
    return v;
}

Verdict c10_determinism() {
    Verdict v;
    const auto root = fs::temp_directory_path() / "softopt_acceptance_c10";
    fs::remove_all(root);
    fs::create_directories(root);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    struct Case {
        std::string name, ini;
    };
    const std::vector<Case> cases{
        {"schaffer", "[study]\nproblem = schaffer\nseed = 11\n[nsga2]\npopulation = 50\nbudget = 1500\n"},
        {"finger", "[study]\nproblem = deformation\nseed = 11\n[nsga2]\npopulation = 10\nbudget = 30\n"}};
    std::ostringstream sink;
    for (const auto& c : cases) {
        const auto ini = root / (c.name + ".ini");
        std::ofstream(ini) << c.ini;
        std::vector<std::string> logs;
        for (const char* w : {"1", "4", "8"}) {
            const auto out = root / (c.name + "_w" + w);
            const int code = cli::run({"optimize", "--config", ini.string(), "--workers", w, "--output", out.string()},
                                      sink, sink);
            v.require(code == 0, c.name + " run with " + w + " workers exits 0");
            logs.push_back(slurp(out / "trials.jsonl") + slurp(out / "all_trials.csv") + slurp(out / "pareto.csv"));
        }
        const bool same = logs[0] == logs[1] && logs[1] == logs[2] && !logs[0].empty();
        v.require(same, c.name + " outputs byte-identical across 1/4/8 workers");
        v.detail << (c.name == cases.front().name ? "" : "; ") << c.name << ": " << (same ? "identical" : "DIFFERENT")
                 << " (" << logs[0].size() << " bytes)";
    }
    fs::remove_all(root);
    return v;
}

std::set<int> parse_list(const std::string& s) {
    std::set<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.insert(std::stoi(item));
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> only, expect_red;
    g_workers = std::max(1u, std::thread::hardware_concurrency());
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) {
            only = parse_list(argv[++i]);
        } else if (a == "--expect-red" && i + 1 < argc) {
            expect_red = parse_list(argv[++i]);
        } else if (a == "--workers" && i + 1 < argc) {
            g_workers = static_cast<std::size_t>(std::stoul(argv[++i]));
        } else {
            std::cerr << "usage: " << argv[0] << " [--only N,...] [--expect-red N,...] [--workers N]\n";
            return 2;
        }
    }

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"dominance machinery vs brute-force oracle", c1_dominance},
        {"NSGA-II on Schaffer", c2_schaffer},
        {"FEM verification", c3_fem},
        {"cavity volume", c4_volume},
        {"slim/large trade-off", c5_tradeoff},
        {"mesh convergence", c6_convergence},
        {"Pareto variability", c7_variability},
        {"wall-thickness tolerance", c8_tolerance},
        {"one-at-a-time sensitivity", c9_oat},
        {"determinism across worker counts", c10_determinism},
    };

    std::set<int> red;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k + 1);
        if (!only.empty() && only.count(id) == 0) {
            continue;
        }
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << "exception: " << e.what();
        }
        if (!v.pass) {
            red.insert(id);
        }
        std::cout << "criterion " << std::setw(2) << id << ": " << (v.pass ? "PASS" : "FAIL") << "  "
                  << criteria[k].first << " -- " << v.detail.str() << v.violated << std::endl;
    }

    std::set<int> expected;
    for (int id : expect_red) {
        if (only.empty() || only.count(id) != 0) {
            expected.insert(id);
        }
    }
    if (red != expected) {
        std::cout << "acceptance: failing set differs from the expected red set\n";
        return 1;
    }
    std::cout << "acceptance: " << (red.empty() ? "all criteria pass" : "only the expected red criteria fail")
              << '\n';
    return 0;
}
