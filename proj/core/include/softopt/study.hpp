#pragma once

// Study configuration and the append-only trial log.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "softopt/moo.hpp"
#include "softopt/nsga2.hpp"
#include "softopt/problems.hpp"

namespace softopt::study {

/// INI document with sections [study], [nsga2], [mesh], [material], [simulation], [bounds].
/// Unknown sections or keys are rejected.
struct StudyConfig {
    std::string problem = "deformation";
    std::string output_dir = "softopt-out";
    std::size_t workers = 1;
    nsga2::SolverConfig solver;
    problems::ProblemSettings settings;

    /// Throws ContractError.
    void validate() const;

    /// Normalized text of everything that influences results (not workers or output_dir).
    [[nodiscard]] std::string canonical() const;
    [[nodiscard]] std::uint64_t hash() const;
};

[[nodiscard]] StudyConfig parse_config(std::istream& is);
[[nodiscard]] StudyConfig load_config(const std::string& path);
void write_config(std::ostream& os, const StudyConfig& config);

struct LogHeader {
    std::string format = "softopt-trials";
    int format_version = 1;
    std::string toolkit_version;
    std::string config_hash;  // 16 hex digits
    std::uint64_t seed = 0;
    std::string problem;
    std::vector<std::string> parameters;
    std::vector<std::string> objectives;
    std::vector<bool> maximize;
};

struct LoadedLog {
    LogHeader header;
    std::vector<moo::Trial> trials;  // objectives back in minimization convention
    bool truncated_tail = false;     // an incomplete last line was dropped
    std::size_t valid_bytes = 0;     // length of the parseable prefix
};

/// One JSON object per line: a header line, then one line per trial in trial_id order.
/// Each line is flushed as written, so any crash leaves a parseable prefix.
class TrialLogWriter {
public:
    /// Creates (truncates) the file and writes the header.
    TrialLogWriter(const std::string& path, const LogHeader& header);
    /// Continues an existing log: keeps the first `keep_bytes` bytes and appends after them.
    TrialLogWriter(const std::string& path, std::size_t keep_bytes);
    ~TrialLogWriter();
    TrialLogWriter(const TrialLogWriter&) = delete;
    TrialLogWriter& operator=(const TrialLogWriter&) = delete;

    void append(const moo::Trial& trial, const std::vector<bool>& maximize);

private:
    struct Impl;
    Impl* impl_;
};

[[nodiscard]] std::string header_line(const LogHeader& header);
[[nodiscard]] std::string trial_line(const moo::Trial& trial, const std::vector<bool>& maximize);

/// Parses a log; a last line without its newline or unparseable is dropped (crash tail).
/// Any other malformed line throws ContractError.
[[nodiscard]] LoadedLog read_log(std::istream& is);
[[nodiscard]] LoadedLog load_log(const std::string& path);

[[nodiscard]] std::string toolkit_version();
[[nodiscard]] std::string hex64(std::uint64_t v);

} // namespace softopt::study
