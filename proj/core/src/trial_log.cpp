#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "softopt/errors.hpp"
#include "softopt/study.hpp"

#ifndef SOFTOPT_VERSION
#define SOFTOPT_VERSION "0.0.0"
#endif

namespace softopt::study {

using Json = nlohmann::ordered_json;

std::string toolkit_version() { return SOFTOPT_VERSION; }

std::string hex64(std::uint64_t v) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
        v >>= 4;
    }
    return s;
}

std::string header_line(const LogHeader& h) {
    Json j;
    j["type"] = "header";
    j["format"] = h.format;
    j["format_version"] = h.format_version;
    j["toolkit_version"] = h.toolkit_version;
    j["config_hash"] = h.config_hash;
    j["seed"] = h.seed;
    j["problem"] = h.problem;
    j["parameters"] = h.parameters;
    j["objectives"] = h.objectives;
    Json sense = Json::array();
    for (bool m : h.maximize) {
        sense.push_back(m ? "max" : "min");
    }
    j["sense"] = sense;
    return j.dump();
}

std::string trial_line(const moo::Trial& t, const std::vector<bool>& maximize) {
    Json j;
    j["type"] = "trial";
    j["id"] = t.trial_id;
    j["tag"] = t.tag;
    j["rng_seed"] = t.rng_seed;
    j["design"] = t.design.values();
    if (t.objectives) {
        if (t.objectives->size() != maximize.size()) {
            throw ContractError("trial objective count does not match the log header");
        }
        Json obj = Json::array();
        for (std::size_t k = 0; k < maximize.size(); ++k) {
            obj.push_back(maximize[k] ? -(*t.objectives)[k] : (*t.objectives)[k]);
        }
        j["objectives"] = obj;
    } else {
        j["objectives"] = nullptr;
    }
    j["failure"] = t.failure;
    return j.dump();
}

struct TrialLogWriter::Impl {
    std::ofstream out;
};

TrialLogWriter::TrialLogWriter(const std::string& path, const LogHeader& header) : impl_(new Impl) {
    impl_->out.open(path, std::ios::binary | std::ios::trunc);
    if (!impl_->out) {
        delete impl_;
        throw ContractError("cannot create trial log '" + path + "'");
    }
    impl_->out << header_line(header) << '\n';
    impl_->out.flush();
}

TrialLogWriter::TrialLogWriter(const std::string& path, std::size_t keep_bytes) : impl_(new Impl) {
    std::error_code ec;
    std::filesystem::resize_file(path, keep_bytes, ec);
    if (!ec) {
        impl_->out.open(path, std::ios::binary | std::ios::app);
    }
    if (ec || !impl_->out) {
        delete impl_;
        throw ContractError("cannot reopen trial log '" + path + "' for appending");
    }
}

TrialLogWriter::~TrialLogWriter() { delete impl_; }

void TrialLogWriter::append(const moo::Trial& trial, const std::vector<bool>& maximize) {
    impl_->out << trial_line(trial, maximize) << '\n';
    impl_->out.flush();
    if (!impl_->out) {
        throw std::runtime_error("write to trial log failed");
    }
}

namespace {

[[noreturn]] void bad(std::size_t lineno, const std::string& what) {
    throw ContractError("trial log line " + std::to_string(lineno) + ": " + what);
}

LogHeader parse_header(const Json& j, std::size_t lineno) {
    try {
        LogHeader h;
        if (j.at("type") != "header") {
            bad(lineno, "first record must be the header");
        }
        h.format = j.at("format").get<std::string>();
        if (h.format != "softopt-trials") {
            bad(lineno, "not a softopt trial log");
        }
        h.format_version = j.at("format_version").get<int>();
        if (h.format_version != 1) {
            bad(lineno, "unsupported format version " + std::to_string(h.format_version));
        }
        h.toolkit_version = j.at("toolkit_version").get<std::string>();
        h.config_hash = j.at("config_hash").get<std::string>();
        h.seed = j.at("seed").get<std::uint64_t>();
        h.problem = j.at("problem").get<std::string>();
        h.parameters = j.at("parameters").get<std::vector<std::string>>();
        h.objectives = j.at("objectives").get<std::vector<std::string>>();
        for (const auto& s : j.at("sense")) {
            const auto v = s.get<std::string>();
            if (v != "max" && v != "min") {
                bad(lineno, "sense must be 'max' or 'min'");
            }
            h.maximize.push_back(v == "max");
        }
        if (h.maximize.size() != h.objectives.size()) {
            bad(lineno, "sense and objectives differ in length");
        }
        return h;
    } catch (const Json::exception& e) {
        bad(lineno, std::string("malformed header: ") + e.what());
    }
}

moo::Trial parse_trial(const Json& j, const LogHeader& h, std::size_t lineno) {
    try {
        if (j.at("type") != "trial") {
            bad(lineno, "expected a trial record");
        }
        moo::Trial t;
        t.trial_id = j.at("id").get<std::uint64_t>();
        t.tag = j.at("tag").get<std::string>();
        t.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        auto design = j.at("design").get<std::vector<double>>();
        if (design.size() != h.parameters.size()) {
            bad(lineno, "design has " + std::to_string(design.size()) + " values, header lists " +
                            std::to_string(h.parameters.size()) + " parameters");
        }
        t.design = moo::DesignVector::from_trusted(0, std::move(design));
        const auto& obj = j.at("objectives");
        if (!obj.is_null()) {
            auto v = obj.get<std::vector<double>>();
            if (v.size() != h.maximize.size()) {
                bad(lineno, "objective count does not match the header");
            }
            for (std::size_t k = 0; k < v.size(); ++k) {
                if (h.maximize[k]) {
                    v[k] = -v[k];
                }
            }
            t.objectives = moo::ObjectiveVector(std::move(v));
        }
        t.failure = j.at("failure").get<std::string>();
        if (!t.objectives && t.failure.empty()) {
            bad(lineno, "failed trial without a failure reason");
        }
        return t;
    } catch (const Json::exception& e) {
        bad(lineno, std::string("malformed trial: ") + e.what());
    }
}

} // namespace

LoadedLog read_log(std::istream& is) {
    const std::string content((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    LoadedLog log;
    std::size_t pos = 0;
    std::size_t lineno = 0;
    bool have_header = false;
    while (pos < content.size()) {
        const auto nl = content.find('\n', pos);
        ++lineno;
        if (nl == std::string::npos) {
            log.truncated_tail = true;  // incomplete final record
            break;
        }
        const std::string_view line(content.data() + pos, nl - pos);
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            if (nl + 1 == content.size()) {
                log.truncated_tail = true;
                break;
            }
            bad(lineno, std::string("not valid JSON: ") + e.what());
        }
        if (!have_header) {
            log.header = parse_header(j, lineno);
            have_header = true;
        } else {
            auto t = parse_trial(j, log.header, lineno);
            if (t.trial_id != log.trials.size()) {
                bad(lineno, "trial ids must be consecutive from 0 (expected " + std::to_string(log.trials.size()) +
                                ", got " + std::to_string(t.trial_id) + ")");
            }
            log.trials.push_back(std::move(t));
        }
        pos = nl + 1;
        log.valid_bytes = pos;
    }
    if (!have_header) {
        throw ContractError("trial log has no complete header line");
    }
    return log;
}

LoadedLog load_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ContractError("cannot open trial log '" + path + "'");
    }
    return read_log(in);
}

} // namespace softopt::study
