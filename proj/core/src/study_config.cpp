#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "softopt/errors.hpp"
#include "softopt/study.hpp"
#include "softopt/text.hpp"

namespace softopt::study {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"study", {"problem", "output", "workers", "seed"}},
        {"nsga2", {"population", "budget", "crossover_prob", "swap_prob", "mutation_prob", "mutation_eta"}},
        {"mesh", {"target_nodes", "refinement_factor"}},
        {"material", {"young_modulus", "poisson_ratio", "gravity", "density"}},
        {"simulation", {"cable_displacement", "load_steps", "tolerance"}},
        {"bounds", {}},  // any parameter name
    };
    return keys;
}

double real(const std::string& section, const std::string& key, const std::string& v) {
    return text::parse_double(text::trim(v), section + "." + key);
}

std::uint64_t unsigned_int(const std::string& section, const std::string& key, const std::string& raw) {
    const std::string v = text::trim(raw);
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, out);
    if (v.empty() || res.ec != std::errc() || res.ptr != end) {
        throw ContractError(section + "." + key + ": expected a non-negative integer, got '" + v + "'");
    }
    return out;
}

bool boolean(const std::string& section, const std::string& key, const std::string& raw) {
    const std::string v = text::trim(raw);
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "off") {
        return false;
    }
    throw ContractError(section + "." + key + ": expected true/false, got '" + v + "'");
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

void StudyConfig::validate() const {
    if (workers < 1) {
        throw ContractError("workers must be >= 1");
    }
    if (!problems::known_problem(problem)) {
        // make_problem produces the message listing known ids
        (void)problems::make_problem(problem, settings);
    }
    if (output_dir.empty()) {
        throw ContractError("output directory must not be empty");
    }
    solver.validate();
    settings.material.validate();
    settings.meshing.validate();
    if (!(settings.evaluation.cable_displacement >= 0.0)) {
        throw ContractError("simulation.cable_displacement must be >= 0");
    }
    if (settings.evaluation.load_steps < 1) {
        throw ContractError("simulation.load_steps must be >= 1");
    }
    if (!(settings.evaluation.tolerance > 0.0)) {
        throw ContractError("simulation.tolerance must be > 0");
    }
    // bounds must name parameters of the problem and form a valid box
    (void)problems::make_problem(problem, settings).space;
}

std::string StudyConfig::canonical() const {
    using text::format_double;
    std::ostringstream os;
    os << "problem=" << problem << '\n';
    os << "seed=" << solver.seed << '\n';
    os << "population=" << solver.population_size << '\n';
    os << "budget=" << solver.budget << '\n';
    os << "crossover_prob=" << format_double(solver.crossover_prob) << '\n';
    os << "swap_prob=" << format_double(solver.swap_prob) << '\n';
    os << "mutation_prob=" << (solver.mutation_prob ? format_double(*solver.mutation_prob) : "default") << '\n';
    os << "mutation_eta=" << format_double(solver.mutation_eta) << '\n';
    os << "target_nodes=" << settings.meshing.target_nodes << '\n';
    os << "refinement_factor=" << format_double(settings.meshing.refinement_factor) << '\n';
    os << "young_modulus=" << format_double(settings.material.young_modulus) << '\n';
    os << "poisson_ratio=" << format_double(settings.material.poisson_ratio) << '\n';
    os << "gravity=" << (settings.material.gravity ? "true" : "false") << '\n';
    os << "density=" << format_double(settings.material.density) << '\n';
    os << "cable_displacement=" << format_double(settings.evaluation.cable_displacement) << '\n';
    os << "load_steps=" << settings.evaluation.load_steps << '\n';
    os << "tolerance=" << format_double(settings.evaluation.tolerance) << '\n';
    for (const auto& b : settings.bounds) {
        os << "bounds." << b.parameter << '=' << format_double(b.lower) << ',' << format_double(b.upper) << '\n';
    }
    return os.str();
}

std::uint64_t StudyConfig::hash() const { return fnv1a(canonical()); }

StudyConfig parse_config(std::istream& is) {
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ContractError(std::string("config: ") + e.what());
    }
    StudyConfig c;
    for (const auto& [section, body] : tree) {
        const auto known = known_keys().find(section);
        if (known == known_keys().end()) {
            if (body.empty() && !body.data().empty()) {
                throw ContractError("config: key '" + section + "' must be inside a section");
            }
            throw ContractError("config: unknown section [" + section + "]");
        }
        for (const auto& [key, node] : body) {
            const std::string v = node.data();
            if (section != "bounds" && known->second.count(key) == 0) {
                throw ContractError("config: unknown key '" + key + "' in [" + section + "]");
            }
            if (section == "study") {
                if (key == "problem") {
                    c.problem = text::trim(v);
                } else if (key == "output") {
                    c.output_dir = text::trim(v);
                } else if (key == "workers") {
                    c.workers = unsigned_int(section, key, v);
                } else if (key == "seed") {
                    c.solver.seed = unsigned_int(section, key, v);
                }
            } else if (section == "nsga2") {
                if (key == "population") {
                    c.solver.population_size = unsigned_int(section, key, v);
                } else if (key == "budget") {
                    c.solver.budget = unsigned_int(section, key, v);
                } else if (key == "crossover_prob") {
                    c.solver.crossover_prob = real(section, key, v);
                } else if (key == "swap_prob") {
                    c.solver.swap_prob = real(section, key, v);
                } else if (key == "mutation_prob") {
                    c.solver.mutation_prob = real(section, key, v);
                } else if (key == "mutation_eta") {
                    c.solver.mutation_eta = real(section, key, v);
                }
            } else if (section == "mesh") {
                if (key == "target_nodes") {
                    c.settings.meshing.target_nodes = static_cast<int>(unsigned_int(section, key, v));
                } else {
                    c.settings.meshing.refinement_factor = real(section, key, v);
                }
            } else if (section == "material") {
                if (key == "young_modulus") {
                    c.settings.material.young_modulus = real(section, key, v);
                } else if (key == "poisson_ratio") {
                    c.settings.material.poisson_ratio = real(section, key, v);
                } else if (key == "gravity") {
                    c.settings.material.gravity = boolean(section, key, v);
                } else {
                    c.settings.material.density = real(section, key, v);
                }
            } else if (section == "simulation") {
                if (key == "cable_displacement") {
                    c.settings.evaluation.cable_displacement = real(section, key, v);
                } else if (key == "load_steps") {
                    c.settings.evaluation.load_steps = static_cast<int>(unsigned_int(section, key, v));
                } else {
                    c.settings.evaluation.tolerance = real(section, key, v);
                }
            } else if (section == "bounds") {
                const auto comma = v.find(',');
                if (comma == std::string::npos) {
                    throw ContractError("config: bounds." + key + " must be 'lower, upper'");
                }
                c.settings.bounds.push_back({key, real(section, key, v.substr(0, comma)),
                                             real(section, key, v.substr(comma + 1))});
            }
        }
    }
    c.validate();
    return c;
}

StudyConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ContractError("cannot open config file '" + path + "'");
    }
    return parse_config(in);
}

void write_config(std::ostream& os, const StudyConfig& c) {
    using text::format_double;
    os << "[study]\n";
    os << "problem = " << c.problem << '\n';
    os << "output = " << c.output_dir << '\n';
    os << "workers = " << c.workers << '\n';
    os << "seed = " << c.solver.seed << '\n';
    os << "\n[nsga2]\n";
    os << "population = " << c.solver.population_size << '\n';
    os << "budget = " << c.solver.budget << '\n';
    os << "crossover_prob = " << format_double(c.solver.crossover_prob) << '\n';
    os << "swap_prob = " << format_double(c.solver.swap_prob) << '\n';
    if (c.solver.mutation_prob) {
        os << "mutation_prob = " << format_double(*c.solver.mutation_prob) << '\n';
    }
    os << "mutation_eta = " << format_double(c.solver.mutation_eta) << '\n';
    os << "\n[mesh]\n";
    os << "target_nodes = " << c.settings.meshing.target_nodes << '\n';
    os << "refinement_factor = " << format_double(c.settings.meshing.refinement_factor) << '\n';
    os << "\n[material]\n";
    os << "young_modulus = " << format_double(c.settings.material.young_modulus) << '\n';
    os << "poisson_ratio = " << format_double(c.settings.material.poisson_ratio) << '\n';
    os << "gravity = " << (c.settings.material.gravity ? "true" : "false") << '\n';
    os << "density = " << format_double(c.settings.material.density) << '\n';
    os << "\n[simulation]\n";
    os << "cable_displacement = " << format_double(c.settings.evaluation.cable_displacement) << '\n';
    os << "load_steps = " << c.settings.evaluation.load_steps << '\n';
    os << "tolerance = " << format_double(c.settings.evaluation.tolerance) << '\n';
    if (!c.settings.bounds.empty()) {
        os << "\n[bounds]\n";
        for (const auto& b : c.settings.bounds) {
            os << b.parameter << " = " << format_double(b.lower) << ", " << format_double(b.upper) << '\n';
        }
    }
}

} // namespace softopt::study
