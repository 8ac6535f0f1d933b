#pragma once

// Static corotational tetrahedral FEM with a displacement-driven cable.
// Units: mm, N, MPa (N/mm^2).

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace softopt::fem {

using Vec3 = Eigen::Vector3d;
using Triangle = std::array<std::size_t, 3>;
using Tet = std::array<std::size_t, 4>;

struct TetMesh {
    std::vector<Vec3> nodes;
    std::vector<Tet> tets;                              // positive signed volume
    std::vector<std::vector<Triangle>> cavity_surfaces;  // closed, outward-oriented
    std::vector<std::size_t> fixed_nodes;
    // Ordered cable points, each the centroid of a node group (a single node for
    // a plain polyline). Groups spread the cable load over a patch of material.
    // Only the first point may be fully fixed.
    std::vector<std::vector<std::size_t>> cable;
    std::size_t tip_node = 0;

    /// Throws ContractError describing the first violated invariant.
    void validate() const;
};

struct MaterialParams {
    double young_modulus = 3.0;  // MPa
    double poisson_ratio = 0.30;
    bool gravity = false;
    double density = 1.1e-6;  // kg/mm^3 (1.1 mg/mm^3)

    void validate() const;
    [[nodiscard]] double mu() const;
    [[nodiscard]] double lambda() const;
};

struct NodalLoad {
    std::size_t node = 0;
    Vec3 force = Vec3::Zero();  // N
};

struct ActuationSpec {
    double cable_displacement = 0.0;  // mm of cable shortening
    int load_steps = 5;
    double tolerance = 1e-8;  // residual force norm, N
    int max_iterations = 60;  // Newton iterations per load step
    bool use_cable = true;
    std::vector<NodalLoad> external_loads;  // scaled with the load ramp
};

struct StaticSolution {
    std::vector<Vec3> displacements;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    double cable_tension = 0.0;        // Lagrange multiplier, N; > 0 pulls
    double constraint_error = 0.0;     // |L(u) - (L0 - s)|, mm
    double rest_cable_length = 0.0;
    std::vector<double> merit_history;  // accepted-step merit values, per Newton iteration
    std::vector<std::string> warnings;
};

/// Internal elastic state at a displacement field.
struct ElasticState {
    double energy = 0.0;
    Eigen::VectorXd force;  // internal force = -dE/du, size 3N
    Eigen::SparseMatrix<double> stiffness;  // d^2E/du^2, 3N x 3N
};

[[nodiscard]] std::vector<Vec3> deformed_positions(const TetMesh& mesh, const std::vector<Vec3>& u);

/// Signed volume of each tet at the given positions.
[[nodiscard]] double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// Corotated linear energy, forces and consistent tangent. Throws InvertedElementError.
[[nodiscard]] ElasticState elastic_force_and_stiffness(const TetMesh& mesh, const MaterialParams& mat,
                                                       const std::vector<Vec3>& u, bool with_stiffness = true);

/// Energy only; cheaper, used by line searches and finite-difference checks.
[[nodiscard]] double elastic_energy(const TetMesh& mesh, const MaterialParams& mat, const std::vector<Vec3>& u);

[[nodiscard]] double cable_length(const TetMesh& mesh, const std::vector<Vec3>& positions);

/// Newton-Raphson statics with the cable length held by a Lagrange multiplier.
/// A non-converged solve is returned with converged=false.
[[nodiscard]] StaticSolution solve_static(const TetMesh& mesh, const MaterialParams& mat, const ActuationSpec& act);

/// Edges of a triangle soup that are not shared by exactly one opposite-direction pair.
[[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> open_edges(const std::vector<Triangle>& surface);

/// Enclosed volume (mm^3 == uL) via the divergence theorem; throws on an open surface.
[[nodiscard]] double surface_volume(const std::vector<Triangle>& surface, const std::vector<Vec3>& positions);

[[nodiscard]] double cavity_volume(const TetMesh& mesh, const StaticSolution& solution, std::size_t cavity);

/// Angle in degrees between the base->tip vector and the z axis (base = centroid of fixed nodes).
[[nodiscard]] double tip_angle(const TetMesh& mesh, const std::vector<Vec3>& positions);
[[nodiscard]] double tip_angle(const TetMesh& mesh, const StaticSolution& solution);

/// tip_angle(solution) - tip_angle(rest).
[[nodiscard]] double angular_displacement(const TetMesh& mesh, const StaticSolution& solution);

} // namespace softopt::fem
