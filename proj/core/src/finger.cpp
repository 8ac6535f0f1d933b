#include "softopt/finger.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "softopt/errors.hpp"
#include "softopt/text.hpp"

namespace softopt::finger {

namespace {

constexpr double kEndClearance = 4.0;   // solid material kept below the first and above the last cavity
constexpr double kSkinClearance = 0.5;  // minimum solid between a feature and an outer face
constexpr double kMinCavityDepth = 1.0;

std::string num(double v) { return text::format_double(v); }

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw GeometryError(what);
    }
}

} // namespace

void FingerGlobals::validate() const {
    require(std::isfinite(length) && length > 0.0, "finger length must be > 0");
    require(std::isfinite(width) && width > 0.0, "finger width must be > 0");
    require(std::isfinite(height) && height > 0.0, "finger height must be > 0");
    require(cavity_count >= 1, "cavity_count must be >= 1");
    require(std::isfinite(cable_offset) && cable_offset > 0.0, "cable_offset must be > 0");
}

void FingerDesign::validate(const FingerGlobals& g) const {
    g.validate();
    const std::pair<const char*, double> lengths[] = {
        {"cavity_height", cavity_height}, {"outer_radius", outer_radius},   {"cork_thickness", cork_thickness},
        {"joint_height", joint_height},   {"plateau_height", plateau_height}, {"wall_thickness", wall_thickness}};
    for (const auto& [name, v] : lengths) {
        require(std::isfinite(v) && v > 0.0, std::string(name) + " must be > 0 (got " + num(v) + ")");
    }
    require(std::isfinite(joint_slope_angle) && joint_slope_angle > 0.0 && joint_slope_angle < 80.0,
            "joint_slope_angle must lie in (0, 80) degrees (got " + num(joint_slope_angle) + ")");

    const double hw = 0.5 * g.width;
    const double hh = 0.5 * g.height;
    require(wall_thickness < hw - kSkinClearance,
            "wall_thickness " + num(wall_thickness) + " leaves no cavity: must be < half the finger width (" +
                num(hw) + ") minus " + num(kSkinClearance) + " mm");
    require(outer_radius + g.cable_offset < hh - kSkinClearance,
            "outer_radius " + num(outer_radius) + " + cable offset " + num(g.cable_offset) +
                " leaves no skin: must be < half the finger height (" + num(hh) + ") minus " + num(kSkinClearance) +
                " mm");
    require(joint_height >= kSkinClearance, "joint_height " + num(joint_height) + " must be >= " +
                                                num(kSkinClearance) + " mm of spine");
    const double inner = -hh + joint_height;
    require(inner < outer_radius - kMinCavityDepth,
            "joint_height " + num(joint_height) + " and outer_radius " + num(outer_radius) +
                " leave a cavity shallower than " + num(kMinCavityDepth) + " mm");
    require(plateau_height < cavity_height,
            "plateau_height " + num(plateau_height) + " must be smaller than cavity_height " + num(cavity_height));
    const double span = g.cavity_count * cavity_height + (g.cavity_count - 1) * cork_thickness;
    require(span <= g.length - 2.0 * kEndClearance,
            "cavities do not fit: " + std::to_string(g.cavity_count) + " x cavity_height + corks = " + num(span) +
                " mm exceeds finger length " + num(g.length) + " minus " + num(2.0 * kEndClearance) +
                " mm end clearance");
}

const std::vector<std::string>& parameter_names() {
    static const std::vector<std::string> names{"cavity_height",     "outer_radius",   "cork_thickness",
                                                "joint_height",      "joint_slope_angle", "plateau_height",
                                                "wall_thickness"};
    return names;
}

moo::DesignSpace default_design_space() {
    return moo::DesignSpace({{"cavity_height", 3.0, 8.0, "mm"},
                             {"outer_radius", 2.0, 7.0, "mm"},
                             {"cork_thickness", 1.5, 4.0, "mm"},
                             {"joint_height", 6.0, 10.0, "mm"},
                             {"joint_slope_angle", 10.0, 60.0, "deg"},
                             {"plateau_height", 1.0, 2.5, "mm"},
                             {"wall_thickness", 1.5, 5.0, "mm"}});
}

FingerDesign from_vector(const moo::DesignVector& x) {
    if (x.size() != 7) {
        throw ContractError("finger design vector needs 7 values, got " + std::to_string(x.size()));
    }
    FingerDesign d;
    d.cavity_height = x[0];
    d.outer_radius = x[1];
    d.cork_thickness = x[2];
    d.joint_height = x[3];
    d.joint_slope_angle = x[4];
    d.plateau_height = x[5];
    d.wall_thickness = x[6];
    return d;
}

moo::DesignVector to_vector(const FingerDesign& d, const moo::DesignSpace& space) {
    return moo::DesignVector(space, {d.cavity_height, d.outer_radius, d.cork_thickness, d.joint_height,
                                     d.joint_slope_angle, d.plateau_height, d.wall_thickness});
}

FingerDesign preset(const std::string& name) {
    // baseline = centre of the default box; the corners move only the cavity size
    const auto space = default_design_space();
    std::vector<double> mid;
    for (const auto& p : space.params()) {
        mid.push_back(0.5 * (p.lower + p.upper));
    }
    FingerDesign d = from_vector(moo::DesignVector(space, mid));
    if (name == "baseline") {
        return d;
    }
    const auto ch = space.index_of("cavity_height");
    const auto orad = space.index_of("outer_radius");
    if (name == "slim") {
        d.cavity_height = space[ch].lower;
        d.outer_radius = space[orad].lower;
        return d;
    }
    if (name == "large") {
        d.cavity_height = space[ch].upper;
        d.outer_radius = space[orad].upper;
        return d;
    }
    throw ContractError("unknown preset '" + name + "' (known: slim, large, baseline)");
}

std::vector<std::string> preset_names() { return {"baseline", "large", "slim"}; }

void MeshingSpec::validate() const {
    if (target_nodes < 100) {
        throw ContractError("target_nodes must be >= 100 (got " + std::to_string(target_nodes) + ")");
    }
    if (!std::isfinite(refinement_factor) || refinement_factor < 1.0) {
        throw ContractError("refinement_factor must be >= 1 (got " + num(refinement_factor) + ")");
    }
}

double FingerLayout::half_extent(double y) const {
    const double yc = std::clamp(y, cavity_inner_y, outer_radius);
    return std::max(plateau_half_height, cavity_half_height - (outer_radius - yc) * slope);
}

FingerLayout layout(const FingerDesign& d, const FingerGlobals& g) {
    d.validate(g);
    FingerLayout lay;
    lay.cavity_inner_y = -0.5 * g.height + d.joint_height;
    lay.cable_y = d.outer_radius + g.cable_offset;
    lay.outer_radius = d.outer_radius;
    lay.cavity_half_height = 0.5 * d.cavity_height;
    lay.plateau_half_height = 0.5 * d.plateau_height;
    lay.slope = std::tan(d.joint_slope_angle * std::numbers::pi / 180.0);
    const double pitch = d.cavity_height + d.cork_thickness;
    const double first = 0.5 * g.length - 0.5 * pitch * (g.cavity_count - 1);
    for (int c = 0; c < g.cavity_count; ++c) {
        lay.cavity_centers_z.push_back(first + pitch * c);
    }
    return lay;
}

double analytic_cavity_volume(const FingerDesign& d, const FingerGlobals& g) {
    const auto lay = layout(d, g);
    const double depth = d.outer_radius - lay.cavity_inner_y;
    const double taper = (d.cavity_height - d.plateau_height) / (2.0 * lay.slope);
    double area = 0.0;  // y-z cross-section
    if (taper >= depth) {
        area = depth * d.cavity_height - depth * depth * lay.slope;
    } else {
        area = taper * d.cavity_height - taper * taper * lay.slope + (depth - taper) * d.plateau_height;
    }
    return area * (g.width - 2.0 * d.wall_thickness);
}

DeformationResult evaluate_deformation(const FingerDesign& design, const fem::MaterialParams& mat,
                                       const MeshingSpec& spec, const EvaluationOptions& opts,
                                       const FingerGlobals& globals) {
    mat.validate();
    const auto mesh = build_finger(design, spec, globals);

    fem::ActuationSpec act;
    act.cable_displacement = opts.cable_displacement;
    act.load_steps = opts.load_steps;
    act.tolerance = opts.tolerance;
    const auto sol = fem::solve_static(mesh, mat, act);
    if (!sol.converged) {
        std::ostringstream msg;
        msg << "static solve did not converge: residual " << num(sol.residual) << " N after " << sol.iterations
            << " iterations, constraint error " << num(sol.constraint_error) << " mm";
        for (const auto& w : sol.warnings) {
            msg << "; " << w;
        }
        throw SolverError(msg.str());
    }

    DeformationResult r;
    r.nodes = mesh.nodes.size();
    r.newton_iterations = sol.iterations;
    r.cable_tension = sol.cable_tension;
    r.warnings = sol.warnings;
    for (std::size_t c = 0; c < mesh.cavity_surfaces.size(); ++c) {
        const double v0 = fem::surface_volume(mesh.cavity_surfaces[c], mesh.nodes);
        const double v1 = fem::cavity_volume(mesh, sol, c);
        r.rest_volumes.push_back(v0);
        r.actuated_volumes.push_back(v1);
        r.rest_volume += v0;
        r.actuated_volume += v1;
    }
    r.f1 = std::abs(r.actuated_volume - r.rest_volume);
    r.f2 = fem::angular_displacement(mesh, sol);
    return r;
}

PressureResult evaluate_pressure(const FingerDesign& design, const fem::MaterialParams& mat, const MeshingSpec& spec,
                                 const EvaluationOptions& opts, const FingerGlobals& globals) {
    PressureResult p;
    p.deformation = evaluate_deformation(design, mat, spec, opts, globals);
    if (!(p.deformation.actuated_volume > 0.0)) {
        throw SolverError("actuated cavity volume collapsed to " + num(p.deformation.actuated_volume));
    }
    p.f3 = p.deformation.f1 / p.deformation.actuated_volume;
    p.f4 = p.deformation.rest_volume;
    return p;
}

ToleranceReport wall_thickness_tolerance_study(const FingerDesign& design, double delta,
                                               const fem::MaterialParams& mat, const MeshingSpec& spec,
                                               const EvaluationOptions& opts, const FingerGlobals& globals) {
    if (!std::isfinite(delta) || delta < 0.0) {
        throw ContractError("tolerance delta must be finite and >= 0");
    }
    FingerDesign perturbed = design;
    perturbed.wall_thickness = design.wall_thickness - delta;
    design.validate(globals);
    perturbed.validate(globals);

    ToleranceReport rep;
    rep.nominal_wall = design.wall_thickness;
    rep.perturbed_wall = perturbed.wall_thickness;
    rep.f1_nominal = evaluate_deformation(design, mat, spec, opts, globals).f1;
    rep.f1_perturbed =
        delta == 0.0 ? rep.f1_nominal : evaluate_deformation(perturbed, mat, spec, opts, globals).f1;
    rep.absolute_change = rep.f1_perturbed - rep.f1_nominal;
    rep.relative_change = rep.f1_nominal != 0.0 ? rep.absolute_change / rep.f1_nominal : 0.0;
    return rep;
}

void write_design(std::ostream& os, const FingerDesign& d) {
    os << "# finger design; lengths in mm, joint_slope_angle in degrees\n";
    os << "cavity_height = " << num(d.cavity_height) << '\n';
    os << "outer_radius = " << num(d.outer_radius) << '\n';
    os << "cork_thickness = " << num(d.cork_thickness) << '\n';
    os << "joint_height = " << num(d.joint_height) << '\n';
    os << "joint_slope_angle = " << num(d.joint_slope_angle) << '\n';
    os << "plateau_height = " << num(d.plateau_height) << '\n';
    os << "wall_thickness = " << num(d.wall_thickness) << '\n';
}

FingerDesign read_design(std::istream& is) {
    std::map<std::string, double> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string body(text::trim(std::string_view(line).substr(0, hash)));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ContractError("design line " + std::to_string(lineno) + ": expected 'name = value'");
        }
        const std::string key(text::trim(std::string_view(body).substr(0, eq)));
        const auto& names = parameter_names();
        if (std::find(names.begin(), names.end(), key) == names.end()) {
            throw ContractError("design line " + std::to_string(lineno) + ": unknown parameter '" + key + "'");
        }
        if (seen.count(key) != 0) {
            throw ContractError("design line " + std::to_string(lineno) + ": duplicate parameter '" + key + "'");
        }
        seen[key] = text::parse_double(text::trim(std::string_view(body).substr(eq + 1)), key);
    }
    for (const auto& n : parameter_names()) {
        if (seen.count(n) == 0) {
            throw ContractError("design is missing parameter '" + n + "'");
        }
    }
    FingerDesign d;
    d.cavity_height = seen["cavity_height"];
    d.outer_radius = seen["outer_radius"];
    d.cork_thickness = seen["cork_thickness"];
    d.joint_height = seen["joint_height"];
    d.joint_slope_angle = seen["joint_slope_angle"];
    d.plateau_height = seen["plateau_height"];
    d.wall_thickness = seen["wall_thickness"];
    return d;
}

FingerDesign load_design(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ContractError("cannot open design file '" + path + "'");
    }
    return read_design(in);
}

} // namespace softopt::finger
