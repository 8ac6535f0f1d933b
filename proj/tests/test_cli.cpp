#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "softopt/commands.hpp"
#include "softopt/finger.hpp"
#include "softopt/moo.hpp"
#include "softopt/problems.hpp"
#include "softopt/study.hpp"

using namespace softopt;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Result r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& s) {
    std::ofstream os(p, std::ios::binary);
    os << s;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("softopt_cli_" + std::string(
                                                                ::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string config(const std::string& name, const std::string& body) {
        const auto p = dir / name;
        spit(p, body);
        return p.string();
    }

    fs::path dir;
};

const char* kSchaffer = "[study]\nproblem = schaffer\nseed = 4\n[nsga2]\npopulation = 20\nbudget = 100\n";

} // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).code, cli::kExitUsage);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"evaluate"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"optimize", "--workers", "0"}).code, cli::kExitUsage);
    const auto bad = config("bad.ini", "[study]\ncolour = red\n");
    const auto r = run({"optimize", "--config", bad});
    EXPECT_EQ(r.code, cli::kExitUsage);
    EXPECT_NE(r.err.find("colour"), std::string::npos);
    EXPECT_EQ(run({"optimize", "--config", (dir / "missing.ini").string()}).code, cli::kExitUsage);
    EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST_F(Cli, EvaluatePresetIsPure) {
    const auto a = run({"evaluate", "preset:slim"});
    ASSERT_EQ(a.code, cli::kExitOk) << a.err;
    EXPECT_NE(a.out.find("f1 = "), std::string::npos);
    EXPECT_NE(a.out.find(" deg"), std::string::npos);
    const auto b = run({"evaluate", "preset:slim"});
    EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, EvaluateJsonRoundTrips) {
    const auto r = run({"evaluate", "preset:large", "--json"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["problem"], "deformation");
    const auto problem = problems::make_problem("deformation");
    std::ostringstream doc;
    doc.precision(17);
    for (const auto& [k, v] : j["design"].items()) {
        doc << k << " = " << v.get<double>() << '\n';
    }
    std::istringstream is(doc.str());
    const auto x = problems::read_design_values(is, problem.space);
    EXPECT_EQ(finger::from_vector(x), finger::preset("large"));
    EXPECT_GT(j["objectives"]["f2"]["value"].get<double>(), 0.0);
    EXPECT_EQ(j["objectives"]["f1"]["unit"], "uL");
    const std::vector<double> reported{j["objectives"]["f1"]["value"].get<double>(),
                                       j["objectives"]["f2"]["value"].get<double>()};
    EXPECT_EQ(problems::reported(problem, problems::stored(problem, reported)), reported);
}

TEST_F(Cli, InfeasibleDesignNamesTheViolation) {
    auto d = finger::preset("baseline");
    d.wall_thickness = 9.8;
    std::ostringstream os;
    finger::write_design(os, d);
    const auto path = dir / "wide.design";
    spit(path, os.str());
    const auto r = run({"evaluate", path.string()});
    EXPECT_EQ(r.code, cli::kExitUsage);
    EXPECT_NE(r.err.find("wall_thickness"), std::string::npos) << r.err;
}

TEST_F(Cli, OptimizeIdenticalAcrossWorkers) {
    const auto cfg = config("s.ini", kSchaffer);
    const auto a = dir / "w1";
    const auto b = dir / "w8";
    ASSERT_EQ(run({"optimize", "--config", cfg, "--workers", "1", "--output", a.string()}).code, 0);
    ASSERT_EQ(run({"optimize", "--config", cfg, "--workers", "8", "--output", b.string()}).code, 0);
    for (const auto* f : {"trials.jsonl", "all_trials.csv", "pareto.csv"}) {
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    const auto c = dir / "seed5";
    ASSERT_EQ(run({"optimize", "--config", cfg, "--seed", "5", "--output", c.string()}).code, 0);
    EXPECT_NE(slurp(a / "all_trials.csv"), slurp(c / "all_trials.csv"));
}

TEST_F(Cli, ParetoRowsAreMutuallyNonDominated) {
    const auto cfg = config("s.ini", kSchaffer);
    ASSERT_EQ(run({"optimize", "--config", cfg, "--output", dir.string()}).code, 0);
    std::istringstream csv(slurp(dir / "pareto.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "trial_id,x,f1,f2");
    std::vector<moo::ObjectiveVector> rows;
    while (std::getline(csv, line)) {
        std::stringstream ss(line);
        std::string id, x, f1, f2;
        std::getline(ss, id, ',');
        std::getline(ss, x, ',');
        std::getline(ss, f1, ',');
        std::getline(ss, f2, ',');
        rows.push_back({std::stod(f1), std::stod(f2)});
    }
    ASSERT_FALSE(rows.empty());
    for (const auto& p : rows) {
        for (const auto& q : rows) {
            EXPECT_FALSE(moo::dominates(p, q));
        }
    }
    // the pareto verb re-derives the same file from the log
    const auto again = dir / "again";
    ASSERT_EQ(run({"pareto", (dir / "trials.jsonl").string(), "--output", again.string()}).code, 0);
    EXPECT_EQ(slurp(again / "pareto.csv"), slurp(dir / "pareto.csv"));
}

TEST_F(Cli, FingerBudgetFiftyLogsFiftyTrials) {
    const auto cfg = config("f.ini", "[study]\nproblem = deformation\n[nsga2]\npopulation = 50\nbudget = 50\n");
    const auto r = run({"optimize", "--config", cfg, "--output", dir.string(), "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(nlohmann::json::parse(r.out)["trials"], 50);
    const auto log = study::load_log((dir / "trials.jsonl").string());
    EXPECT_EQ(log.trials.size(), 50u);
    EXPECT_EQ(log.header.objectives, (std::vector<std::string>{"f1_uL", "f2_deg"}));
}

TEST_F(Cli, ResumeCompletesTheSameStudy) {
    const auto cfg = config("s.ini", kSchaffer);
    const auto full = dir / "full";
    ASSERT_EQ(run({"optimize", "--config", cfg, "--output", full.string()}).code, 0);
    const auto reference = slurp(full / "trials.jsonl");

    // crash in the middle of trial 37's record
    const auto part = dir / "part";
    fs::create_directories(part);
    std::size_t cut = 0;
    for (int line = 0; line < 38; ++line) {
        cut = reference.find('\n', cut) + 1;
    }
    cut += 25;
    spit(part / "trials.jsonl", reference.substr(0, cut));
    const auto r = run({"optimize", "--config", cfg, "--output", part.string(), "--resume"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("resuming after 37"), std::string::npos) << r.err;
    EXPECT_EQ(slurp(part / "trials.jsonl"), reference);
    EXPECT_EQ(slurp(part / "all_trials.csv"), slurp(full / "all_trials.csv"));

    // a finished log resumes to the same budget without new trials
    ASSERT_EQ(run({"optimize", "--config", cfg, "--output", part.string(), "--resume"}).code, 0);
    EXPECT_EQ(slurp(part / "trials.jsonl"), reference);

    const auto other = config("o.ini", "[study]\nproblem = schaffer\nseed = 99\n[nsga2]\npopulation = 20\nbudget = 100\n");
    EXPECT_EQ(run({"optimize", "--config", other, "--output", part.string(), "--resume"}).code, cli::kExitUsage);
}

TEST_F(Cli, SensitivityWritesCsv) {
    spit(dir / "x.design", "x = 1\n");
    const auto cfg = config("s.ini", kSchaffer);
    const auto r = run({"sensitivity", (dir / "x.design").string(), "--config", cfg, "--output", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    // f1 = x^2 from x = 1: max(|100 - 1|, |100 - 1|) = 99; f2 = (x-2)^2: max(|144 - 1|, |64 - 1|) = 143
    EXPECT_EQ(slurp(dir / "sensitivity.csv"), "parameter,objective,raw,normalized\nx,f1,99,1\nx,f2,143,1\n");
}

TEST_F(Cli, ConvergenceRepeatedTargetAndFlaggedRows) {
    const auto r = run({"convergence", "preset:baseline", "--targets", "500,500,100", "--output", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream csv(slurp(dir / "convergence.csv"));
    std::string header, first, second, third;
    std::getline(csv, header);
    std::getline(csv, first);
    std::getline(csv, second);
    std::getline(csv, third);
    EXPECT_NE(second.find(",0,,ok"), std::string::npos) << second;
    EXPECT_NE(third.find("mesh-error"), std::string::npos) << third;
    EXPECT_EQ(run({"convergence", "preset:baseline", "--targets", "500", "--output", dir.string()}).code,
              cli::kExitUsage);
}
