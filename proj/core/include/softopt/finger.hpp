#pragma once

// Parametric sensorized finger: geometry, procedural tet mesher and fitness functions.
//
// Frame: the finger stands on the z = 0 plane (fixed base) and extends to z = length.
// x spans the width, y the height; the cable runs parallel to z on the +y side,
// so pulling it bends the finger towards +y and squeezes the cavities.

#include <iosfwd>
#include <string>
#include <vector>

#include "softopt/fem.hpp"
#include "softopt/moo.hpp"

namespace softopt::finger {

/// Fixed dimensions shared by every design (not optimized). These are
/// toolkit defaults, not published measurements.
struct FingerGlobals {
    double length = 60.0;  // mm, along z
    double width = 20.0;   // mm, along x
    double height = 20.0;  // mm, along y
    int cavity_count = 3;
    double cable_offset = 2.0;  // mm beyond the cavity outer radius

    void validate() const;
};

/// The seven free parameters. Lengths in mm, angle in degrees.
struct FingerDesign {
    double cavity_height = 5.5;      // z-extent of a cavity at its outer wall
    double outer_radius = 4.5;       // y of the cavity outer wall, measured from the finger axis
    double cork_thickness = 2.75;    // solid material between neighbouring cavities
    double joint_height = 8.0;       // spine thickness from the back face to the cavity inner wall
    double joint_slope_angle = 35.0; // taper of the cavity side walls towards the spine
    double plateau_height = 1.75;    // z-extent of the flat inner end of a cavity
    double wall_thickness = 3.25;    // side skin between cavity and the x faces

    /// Throws GeometryError naming the violated clearance.
    void validate(const FingerGlobals& globals = {}) const;

    friend bool operator==(const FingerDesign&, const FingerDesign&) = default;
};

/// Parameter names in design-vector order.
[[nodiscard]] const std::vector<std::string>& parameter_names();

/// Default box (versioned as "finger-bounds-v1").
[[nodiscard]] moo::DesignSpace default_design_space();
inline constexpr const char* kBoundsVersion = "finger-bounds-v1";

[[nodiscard]] FingerDesign from_vector(const moo::DesignVector& x);
[[nodiscard]] moo::DesignVector to_vector(const FingerDesign& d, const moo::DesignSpace& space);

/// "baseline" is the box centre; "slim" / "large" move cavity_height and
/// outer_radius to their lower / upper bounds.
[[nodiscard]] FingerDesign preset(const std::string& name);  // "slim", "large", "baseline"
[[nodiscard]] std::vector<std::string> preset_names();

struct MeshingSpec {
    int target_nodes = 500;
    double refinement_factor = 2.0;  // spacing divisor for cells bordering a cavity

    void validate() const;
};

/// Derived geometry: where the cavities and the cable sit.
struct FingerLayout {
    double cavity_inner_y = 0.0;  // y of cavity inner wall
    double cable_y = 0.0;
    std::vector<double> cavity_centers_z;

    /// Half z-extent of the cavity at height y (trapezoid with plateau).
    [[nodiscard]] double half_extent(double y) const;

    double outer_radius = 0.0;
    double cavity_half_height = 0.0;
    double plateau_half_height = 0.0;
    double slope = 0.0;  // tan(joint_slope_angle)
};

[[nodiscard]] FingerLayout layout(const FingerDesign& design, const FingerGlobals& globals = {});

/// Analytic volume of one cavity (mm^3), for checks against the mesh.
[[nodiscard]] double analytic_cavity_volume(const FingerDesign& design, const FingerGlobals& globals = {});

/// Structured mapped-hex mesh split into tets, with cavity voids carved out.
/// Throws GeometryError if the design is infeasible or the node target cannot be met within +-20%.
[[nodiscard]] fem::TetMesh build_finger(const FingerDesign& design, const MeshingSpec& spec,
                                        const FingerGlobals& globals = {});

/// Node counts reachable by the mesher for this design (coarsest, finest considered).
[[nodiscard]] std::pair<int, int> achievable_node_range(const FingerDesign& design, const MeshingSpec& spec,
                                                        const FingerGlobals& globals = {});

struct EvaluationOptions {
    double cable_displacement = 10.0;  // mm
    int load_steps = 5;
    double tolerance = 1e-8;
};

struct DeformationResult {
    double f1 = 0.0;  // |V(s) - V(0)| summed over cavities, uL
    double f2 = 0.0;  // tip angular displacement, degrees
    std::vector<double> rest_volumes;       // per cavity, uL
    std::vector<double> actuated_volumes;   // per cavity, uL
    double rest_volume = 0.0;
    double actuated_volume = 0.0;
    std::size_t nodes = 0;
    int newton_iterations = 0;
    double cable_tension = 0.0;
    std::vector<std::string> warnings;
};

/// One converged solve at the configured cable displacement. Throws SolverError on non-convergence.
[[nodiscard]] DeformationResult evaluate_deformation(const FingerDesign& design, const fem::MaterialParams& mat,
                                                     const MeshingSpec& spec, const EvaluationOptions& opts = {},
                                                     const FingerGlobals& globals = {});

struct PressureResult {
    double f3 = 0.0;  // f1 / V(s), dimensionless
    double f4 = 0.0;  // V(0), uL
    DeformationResult deformation;
};

[[nodiscard]] PressureResult evaluate_pressure(const FingerDesign& design, const fem::MaterialParams& mat,
                                               const MeshingSpec& spec, const EvaluationOptions& opts = {},
                                               const FingerGlobals& globals = {});

struct ToleranceReport {
    double nominal_wall = 0.0;
    double perturbed_wall = 0.0;
    double f1_nominal = 0.0;
    double f1_perturbed = 0.0;
    double absolute_change = 0.0;
    double relative_change = 0.0;  // (perturbed - nominal) / nominal
};

/// f1 at wall_thickness w and w - delta.
[[nodiscard]] ToleranceReport wall_thickness_tolerance_study(const FingerDesign& design, double delta,
                                                             const fem::MaterialParams& mat,
                                                             const MeshingSpec& spec,
                                                             const EvaluationOptions& opts = {},
                                                             const FingerGlobals& globals = {});

// Design document: "name = value" lines; '#' comments carry units.
void write_design(std::ostream& os, const FingerDesign& design);
[[nodiscard]] FingerDesign read_design(std::istream& is);
[[nodiscard]] FingerDesign load_design(const std::string& path);

} // namespace softopt::finger
