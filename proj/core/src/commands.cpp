#include "softopt/commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "softopt/errors.hpp"
#include "softopt/finger.hpp"
#include "softopt/moo.hpp"
#include "softopt/nsga2.hpp"
#include "softopt/problems.hpp"
#include "softopt/sensitivity.hpp"
#include "softopt/study.hpp"
#include "softopt/text.hpp"

namespace softopt::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using text::format_double;

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::string output;
    bool json = false;
};

study::StudyConfig load(const Common& c) {
    study::StudyConfig cfg;
    if (!c.config_path.empty()) {
        cfg = study::load_config(c.config_path);
    }
    if (c.seed) {
        cfg.solver.seed = *c.seed;
    }
    if (c.workers) {
        cfg.workers = *c.workers;
    }
    if (!c.output.empty()) {
        cfg.output_dir = c.output;
    }
    cfg.validate();
    return cfg;
}

fs::path prepare_output(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ContractError("cannot create output directory '" + dir + "': " + ec.message());
    }
    return fs::path(dir);
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw ContractError("cannot write '" + p.string() + "'");
    }
    return os;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') {
            out += '"';
        }
        out += ch == '\n' ? ' ' : ch;
    }
    return out + '"';
}

// Resolves "preset:NAME" for finger problems, otherwise reads a design file.
moo::DesignVector read_design_arg(const std::string& arg, const problems::Problem& problem) {
    const std::string prefix = "preset:";
    if (arg.rfind(prefix, 0) == 0) {
        if (problem.id != "deformation" && problem.id != "pressure") {
            throw ContractError("presets exist only for the finger problems");
        }
        return finger::to_vector(finger::preset(arg.substr(prefix.size())), problem.space);
    }
    std::ifstream in(arg);
    if (!in) {
        throw ContractError("cannot open design file '" + arg + "'");
    }
    return problems::read_design_values(in, problem.space);
}

struct Labels {
    std::vector<std::string> parameters;
    std::vector<std::string> objectives;
    std::vector<bool> maximize;
};

Labels labels_of(const problems::Problem& p) {
    Labels l;
    for (const auto& prm : p.space.params()) {
        l.parameters.push_back(prm.name);
    }
    for (std::size_t j = 0; j < p.objective_names.size(); ++j) {
        l.objectives.push_back(problems::objective_label(p, j));
    }
    l.maximize = p.maximize;
    return l;
}

void write_trials_csv(std::ostream& os, const Labels& l, std::span<const moo::Trial> trials, bool with_status) {
    os << "trial_id";
    if (with_status) {
        os << ",status";
    }
    for (const auto& n : l.parameters) {
        os << ',' << n;
    }
    for (const auto& n : l.objectives) {
        os << ',' << n;
    }
    if (with_status) {
        os << ",failure";
    }
    os << '\n';
    for (const auto& t : trials) {
        os << t.trial_id;
        if (with_status) {
            os << ',' << (t.ok() ? "ok" : "failed");
        }
        for (double v : t.design.values()) {
            os << ',' << format_double(v);
        }
        for (std::size_t j = 0; j < l.objectives.size(); ++j) {
            os << ',';
            if (t.objectives) {
                const double v = (*t.objectives)[j];
                os << format_double(l.maximize[j] ? -v : v);
            }
        }
        if (with_status) {
            os << ',' << csv_field(t.failure);
        }
        os << '\n';
    }
}

void write_pareto(const fs::path& path, const Labels& l, std::span<const moo::Trial> trials) {
    const auto front = moo::pareto_front(trials);
    auto os = open_out(path);
    write_trials_csv(os, l, front.trials, false);
}

int cmd_optimize(const Common& common, bool resume, std::ostream& out, std::ostream& err) {
    const auto cfg = load(common);
    const auto problem = problems::make_problem(cfg.problem, cfg.settings);
    const auto labels = labels_of(problem);
    const auto dir = prepare_output(cfg.output_dir);
    const auto log_path = dir / "trials.jsonl";

    study::LogHeader header;
    header.toolkit_version = study::toolkit_version();
    header.config_hash = study::hex64(cfg.hash());
    header.seed = cfg.solver.seed;
    header.problem = cfg.problem;
    header.parameters = labels.parameters;
    header.objectives = labels.objectives;
    header.maximize = labels.maximize;

    std::vector<moo::Trial> recorded;
    std::unique_ptr<study::TrialLogWriter> writer;
    if (resume && fs::exists(log_path)) {
        auto log = study::load_log(log_path.string());
        if (log.header.config_hash != header.config_hash || log.header.problem != header.problem) {
            throw ContractError("cannot resume: '" + log_path.string() +
                                "' was written with a different configuration (hash " + log.header.config_hash +
                                ", now " + header.config_hash + ")");
        }
        if (log.trials.size() > cfg.solver.budget) {
            throw ContractError("cannot resume: log already holds " + std::to_string(log.trials.size()) +
                                " trials, more than the budget");
        }
        recorded = std::move(log.trials);
        writer = std::make_unique<study::TrialLogWriter>(log_path.string(), log.valid_bytes);
        err << "resuming after " << recorded.size() << " logged trials"
            << (log.truncated_tail ? " (dropped an incomplete last record)" : "") << '\n';
    } else {
        writer = std::make_unique<study::TrialLogWriter>(log_path.string(), header);
    }

    std::vector<std::pair<std::uint64_t, double>> timings;
    nsga2::RunHooks hooks;
    hooks.workers = cfg.workers;
    hooks.replay = [&](std::uint64_t id, const moo::DesignVector& x) -> std::optional<nsga2::EvalOutcome> {
        if (id >= recorded.size()) {
            return std::nullopt;
        }
        const auto& t = recorded[id];
        if (t.design.values() != x.values()) {
            throw ContractError("cannot resume: logged trial " + std::to_string(id) +
                                " does not match the regenerated design");
        }
        return t.objectives ? nsga2::EvalOutcome::success(*t.objectives) : nsga2::EvalOutcome::failed(t.failure);
    };
    hooks.on_trial = [&](const moo::Trial& t) {
        if (t.trial_id >= recorded.size()) {
            writer->append(t, labels.maximize);
            timings.emplace_back(t.trial_id, t.eval_seconds);
        }
    };
    hooks.on_generation = [&](const nsga2::GenerationSummary& g) {
        err << "generation " << g.generation << ": " << g.evaluations << " evaluations, " << g.failures
            << " failed\n";
    };

    const auto trials = nsga2::run(problem.space, problem.evaluator, cfg.solver, hooks);
    writer.reset();

    {
        auto os = open_out(dir / "all_trials.csv");
        write_trials_csv(os, labels, trials, true);
    }
    write_pareto(dir / "pareto.csv", labels, trials);
    {
        auto os = open_out(dir / "timings.csv");
        os << "trial_id,eval_seconds\n";
        for (const auto& [id, s] : timings) {
            os << id << ',' << format_double(s) << '\n';
        }
    }

    std::size_t failed = 0;
    for (const auto& t : trials) {
        failed += t.ok() ? 0 : 1;
    }
    const auto front = moo::pareto_front(trials);
    if (common.json) {
        Json j;
        j["problem"] = cfg.problem;
        j["trials"] = trials.size();
        j["failed"] = failed;
        j["pareto"] = front.trials.size();
        j["output"] = dir.string();
        out << j.dump() << '\n';
    } else {
        out << "trials: " << trials.size() << " (" << failed << " failed)\n";
        out << "pareto front: " << front.trials.size() << " designs\n";
        out << "wrote " << (dir / "trials.jsonl").string() << ", all_trials.csv, pareto.csv\n";
    }
    return kExitOk;
}

int cmd_sensitivity(const Common& common, const std::string& design_arg, std::ostream& out, std::ostream&) {
    const auto cfg = load(common);
    const auto problem = problems::make_problem(cfg.problem, cfg.settings);
    const auto baseline = read_design_arg(design_arg, problem);
    problem.check_feasible(baseline);
    std::vector<std::string> names;
    for (std::size_t j = 0; j < problem.objective_names.size(); ++j) {
        names.push_back(problems::objective_label(problem, j));
    }
    const auto report = sensitivity::oat_analysis(problem.space, baseline, problem.evaluator,
                                                  problem.objective_names.size(), names, cfg.workers);
    const auto dir = prepare_output(cfg.output_dir);
    {
        auto os = open_out(dir / "sensitivity.csv");
        sensitivity::write_csv(os, report);
    }
    if (common.json) {
        Json j;
        j["evaluations"] = report.evaluations;
        Json per = Json::object();
        for (std::size_t o = 0; o < names.size(); ++o) {
            Json rows = Json::array();
            for (const auto& s : report.per_objective[o]) {
                rows.push_back({{"parameter", s.parameter}, {"raw", s.raw}, {"normalized", s.normalized}});
            }
            per[names[o]] = rows;
        }
        j["sensitivities"] = per;
        j["skipped_probes"] = report.skipped_probes;
        out << j.dump() << '\n';
    } else {
        for (std::size_t o = 0; o < names.size(); ++o) {
            out << names[o] << " ranking:";
            for (const auto& p : report.ranking(o)) {
                out << ' ' << p;
            }
            out << '\n';
        }
        for (const auto& s : report.skipped_probes) {
            out << "skipped probe: " << s << '\n';
        }
        out << "wrote " << (dir / "sensitivity.csv").string() << '\n';
    }
    return kExitOk;
}

std::vector<int> parse_targets(const std::string& list) {
    std::vector<int> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto v = text::parse_double(text::trim(item), "node target");
        if (v < 1 || v != static_cast<int>(v)) {
            throw ContractError("node targets must be positive integers");
        }
        out.push_back(static_cast<int>(v));
    }
    return out;
}

int cmd_convergence(const Common& common, const std::string& design_arg, const std::string& target_list,
                    std::ostream& out, std::ostream&) {
    const auto cfg = load(common);
    if (cfg.problem != "deformation" && cfg.problem != "pressure") {
        throw ContractError("convergence needs a finger problem (deformation or pressure)");
    }
    const auto problem = problems::make_problem(cfg.problem, cfg.settings);
    const auto design = finger::from_vector(read_design_arg(design_arg, problem));
    design.validate();
    const auto targets = parse_targets(target_list);
    if (targets.size() < 2) {
        throw ContractError("convergence needs at least two node targets");
    }

    const auto dir = prepare_output(cfg.output_dir);
    auto os = open_out(dir / "convergence.csv");
    const std::string header =
        "target_nodes,achieved_nodes,f1_uL,f2_deg,solve_seconds,abs_delta_f1,delta_f1_per_node,status\n";
    os << header;
    if (!common.json) {
        out << header;
    }
    Json rows = Json::array();
    std::optional<std::pair<double, std::size_t>> prev;  // f1, nodes
    for (int target : targets) {
        auto spec = cfg.settings.meshing;
        spec.target_nodes = target;
        std::ostringstream row;
        Json jr;
        jr["target_nodes"] = target;
        const auto start = std::chrono::steady_clock::now();
        try {
            const auto r = finger::evaluate_deformation(design, cfg.settings.material, spec, cfg.settings.evaluation);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            row << target << ',' << r.nodes << ',' << format_double(r.f1) << ',' << format_double(r.f2) << ','
                << format_double(secs) << ',';
            jr["achieved_nodes"] = r.nodes;
            jr["f1_uL"] = r.f1;
            jr["f2_deg"] = r.f2;
            jr["solve_seconds"] = secs;
            if (prev) {
                const double d = std::abs(r.f1 - prev->first);
                const double dn = std::abs(static_cast<double>(r.nodes) - static_cast<double>(prev->second));
                row << format_double(d) << ',' << (dn > 0.0 ? format_double(d / dn) : "") << ",ok";
                jr["abs_delta_f1"] = d;
                jr["delta_f1_per_node"] = dn > 0.0 ? Json(d / dn) : Json(nullptr);
            } else {
                row << ",,ok";
            }
            jr["status"] = "ok";
            prev = std::make_pair(r.f1, r.nodes);
        } catch (const GeometryError& e) {
            row << ",,,,,,mesh-error: " << csv_field(e.what());
            jr["status"] = std::string("mesh-error: ") + e.what();
        } catch (const SolverError& e) {
            row << ",,,,,,solver-error: " << csv_field(e.what());
            jr["status"] = std::string("solver-error: ") + e.what();
        }
        os << row.str() << '\n';
        if (common.json) {
            rows.push_back(jr);
        } else {
            out << row.str() << '\n';
        }
    }
    if (common.json) {
        out << Json{{"rows", rows}}.dump() << '\n';
    }
    return kExitOk;
}

int cmd_evaluate(const Common& common, const std::string& design_arg, const std::string& problem_id,
                 std::ostream& out, std::ostream&) {
    auto cfg = load(common);
    if (!problem_id.empty()) {
        cfg.problem = problem_id;
        cfg.validate();
    }
    const auto problem = problems::make_problem(cfg.problem, cfg.settings);
    const auto x = read_design_arg(design_arg, problem);
    problem.check_feasible(x);
    const auto outcome = problem.evaluator(x);
    if (!outcome.objectives) {
        throw SolverError("evaluation failed: " + outcome.failure);
    }
    const auto values = problems::reported(problem, *outcome.objectives);
    if (common.json) {
        Json j;
        j["problem"] = problem.id;
        Json d = Json::object();
        for (std::size_t i = 0; i < problem.space.size(); ++i) {
            d[problem.space[i].name] = x[i];
        }
        j["design"] = d;
        Json o = Json::object();
        for (std::size_t k = 0; k < values.size(); ++k) {
            o[problem.objective_names[k]] = {{"value", values[k]}, {"unit", problem.objective_units[k]}};
        }
        j["objectives"] = o;
        out << j.dump() << '\n';
    } else {
        for (std::size_t k = 0; k < values.size(); ++k) {
            out << problem.objective_names[k] << " = " << format_double(values[k]);
            if (!problem.objective_units[k].empty()) {
                out << ' ' << problem.objective_units[k];
            }
            out << '\n';
        }
    }
    return kExitOk;
}

int cmd_pareto(const Common& common, const std::string& log_path, std::ostream& out, std::ostream&) {
    const auto log = study::load_log(log_path);
    Labels labels{log.header.parameters, log.header.objectives, log.header.maximize};
    const std::string dir = common.output.empty() ? fs::path(log_path).parent_path().string() : common.output;
    const auto outdir = prepare_output(dir.empty() ? "." : dir);
    write_pareto(outdir / "pareto.csv", labels, log.trials);
    const auto front = moo::pareto_front(log.trials);
    if (common.json) {
        Json j;
        j["trials"] = log.trials.size();
        j["pareto"] = front.trials.size();
        j["truncated_tail"] = log.truncated_tail;
        out << j.dump() << '\n';
    } else {
        out << "trials: " << log.trials.size() << (log.truncated_tail ? " (incomplete last record dropped)" : "")
            << '\n';
        out << "pareto front: " << front.trials.size() << " designs -> " << (outdir / "pareto.csv").string()
            << '\n';
    }
    return kExitOk;
}

void add_common(CLI::App* app, Common& c, bool with_seed) {
    app->add_option("--config", c.config_path, "study configuration (INI)");
    if (with_seed) {
        app->add_option("--seed", c.seed, "master seed (overrides the config)");
    }
    app->add_option("--workers", c.workers, "evaluation threads (overrides the config)")
        ->check(CLI::PositiveNumber);
    app->add_option("--output", c.output, "output directory (overrides the config)");
    app->add_flag("--json", c.json, "machine-readable output");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"softopt: multi-objective design studies for a cable-driven soft finger"};
    app.require_subcommand(1);
    Common common;
    bool resume = false;
    std::string design_arg, problem_id, targets = "500,1000,2000,4000", log_path;

    auto* opt = app.add_subcommand("optimize", "run an NSGA-II study and write the trial log");
    add_common(opt, common, true);
    opt->add_flag("--resume", resume, "continue an interrupted study from its trial log");

    auto* sens = app.add_subcommand("sensitivity", "one-at-a-time sensitivity around a baseline design");
    add_common(sens, common, false);
    sens->add_option("design", design_arg, "design file or preset:NAME")->required();

    auto* conv = app.add_subcommand("convergence", "f1/f2 versus mesh node count");
    add_common(conv, common, false);
    conv->add_option("design", design_arg, "design file or preset:NAME")->required();
    conv->add_option("--targets", targets, "comma-separated node targets");

    auto* eval = app.add_subcommand("evaluate", "evaluate one design");
    add_common(eval, common, false);
    eval->add_option("design", design_arg, "design file or preset:NAME")->required();
    eval->add_option("--problem", problem_id, "problem id (overrides the config)");

    auto* par = app.add_subcommand("pareto", "re-extract the Pareto front from a trial log");
    add_common(par, common, false);
    par->add_option("log", log_path, "trials.jsonl")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
            err << sub->help();
        }
        return kExitUsage;
    }

    try {
        if (opt->parsed()) {
            return cmd_optimize(common, resume, out, err);
        }
        if (sens->parsed()) {
            return cmd_sensitivity(common, design_arg, out, err);
        }
        if (conv->parsed()) {
            return cmd_convergence(common, design_arg, targets, out, err);
        }
        if (eval->parsed()) {
            return cmd_evaluate(common, design_arg, problem_id, out, err);
        }
        return cmd_pareto(common, log_path, out, err);
    } catch (const GeometryError& e) {
        err << "error: infeasible design: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ContractError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitSolver;
    }
}

} // namespace softopt::cli
