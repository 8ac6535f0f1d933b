#include "softopt/fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "softopt/errors.hpp"

namespace softopt::fem {

namespace {

using Mat3 = Eigen::Matrix3d;

constexpr double kGravity = 9.81;  // m/s^2; kg * m/s^2 = N

struct ElementRest {
    Mat3 bm;  // inverse rest edge matrix
    double volume = 0.0;
};

std::vector<ElementRest> rest_state(const TetMesh& mesh) {
    std::vector<ElementRest> out(mesh.tets.size());
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        const auto& t = mesh.tets[e];
        Mat3 dm;
        dm.col(0) = mesh.nodes[t[1]] - mesh.nodes[t[0]];
        dm.col(1) = mesh.nodes[t[2]] - mesh.nodes[t[0]];
        dm.col(2) = mesh.nodes[t[3]] - mesh.nodes[t[0]];
        const double det = dm.determinant();
        if (!(det > 0.0)) {
            throw ContractError("tet " + std::to_string(e) + " has non-positive rest volume");
        }
        out[e].bm = dm.inverse();
        out[e].volume = det / 6.0;
    }
    return out;
}

Eigen::Vector3d vee(const Mat3& a) { return {a(2, 1), a(0, 2), a(1, 0)}; }

Mat3 hat(const Eigen::Vector3d& w) {
    Mat3 m;
    m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
    return m;
}

// Corotated linear material: psi = mu |F - R|^2 + lambda/2 tr(R^T F - I)^2.
struct ElementKernel {
    double mu;
    double lambda;

    struct Polar {
        Mat3 r;
        Mat3 s;
    };

    static Polar polar(const Mat3& f) {
        Eigen::JacobiSVD<Mat3> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Mat3 u = svd.matrixU();
        const Mat3 v = svd.matrixV();
        Polar p;
        p.r = u * v.transpose();
        p.s = v * svd.singularValues().asDiagonal() * v.transpose();
        return p;
    }

    [[nodiscard]] double energy(const Mat3& f, const Polar& p) const {
        const double tr = p.s.trace() - 3.0;
        return mu * (f - p.r).squaredNorm() + 0.5 * lambda * tr * tr;
    }

    [[nodiscard]] Mat3 stress(const Mat3& f, const Polar& p) const {
        return 2.0 * mu * (f - p.r) + lambda * (p.s.trace() - 3.0) * p.r;
    }

    [[nodiscard]] Mat3 stress_differential(const Mat3& df, const Polar& p) const {
        const Mat3 rt_df = p.r.transpose() * df;
        const Mat3 g = Mat3::Identity() * p.s.trace() - p.s;
        const Eigen::Vector3d w = g.inverse() * vee(rt_df - rt_df.transpose());
        const Mat3 dr = p.r * hat(w);
        return 2.0 * mu * (df - dr) + lambda * (rt_df.trace() * p.r + (p.s.trace() - 3.0) * dr);
    }
};

Mat3 deformation_gradient(const std::array<Vec3, 4>& x, const Mat3& bm) {
    Mat3 ds;
    ds.col(0) = x[1] - x[0];
    ds.col(1) = x[2] - x[0];
    ds.col(2) = x[3] - x[0];
    return ds * bm;
}

// Maps full DOF index -> reduced index or -1 for constrained DOFs.
std::vector<long> identity_dofs(std::size_t n_nodes) {
    std::vector<long> map(3 * n_nodes);
    for (std::size_t i = 0; i < map.size(); ++i) {
        map[i] = static_cast<long>(i);
    }
    return map;
}

struct Assembled {
    double energy = 0.0;
    Eigen::VectorXd gradient;  // dE/du (reduced)
    Eigen::SparseMatrix<double> hessian;
};

class Assembler {
public:
    Assembler(const TetMesh& mesh, const MaterialParams& mat, std::vector<long> dof_map, long n_reduced)
        : mesh_(mesh), rest_(rest_state(mesh)), kernel_{mat.mu(), mat.lambda()}, dofs_(std::move(dof_map)),
          n_(n_reduced) {}

    [[nodiscard]] long size() const noexcept { return n_; }
    [[nodiscard]] const std::vector<long>& dofs() const noexcept { return dofs_; }
    [[nodiscard]] const std::vector<ElementRest>& rest() const noexcept { return rest_; }

    /// Throws InvertedElementError.
    Assembled assemble(const std::vector<Vec3>& positions, bool want_gradient, bool want_hessian,
                       const std::vector<Eigen::Triplet<double>>& extra = {}) const {
        Assembled out;
        if (want_gradient) {
            out.gradient = Eigen::VectorXd::Zero(n_);
        }
        std::vector<Eigen::Triplet<double>> trip;
        if (want_hessian) {
            trip.reserve(mesh_.tets.size() * 144 + extra.size());
        }
        for (std::size_t e = 0; e < mesh_.tets.size(); ++e) {
            const auto& t = mesh_.tets[e];
            const std::array<Vec3, 4> x{positions[t[0]], positions[t[1]], positions[t[2]], positions[t[3]]};
            const Mat3 f = deformation_gradient(x, rest_[e].bm);
            if (!(f.determinant() > 0.0)) {
                throw InvertedElementError(e);
            }
            const auto polar = ElementKernel::polar(f);
            const double v0 = rest_[e].volume;
            out.energy += v0 * kernel_.energy(f, polar);
            if (!want_gradient && !want_hessian) {
                continue;
            }
            const Mat3 bmt = rest_[e].bm.transpose();
            if (want_gradient) {
                // dE/dx_{1..3} = V0 P Bm^T, dE/dx_0 = -sum
                const Mat3 g = v0 * kernel_.stress(f, polar) * bmt;
                const Eigen::Vector3d g0 = -(g.col(0) + g.col(1) + g.col(2));
                add_node(out.gradient, t[0], g0);
                add_node(out.gradient, t[1], g.col(0));
                add_node(out.gradient, t[2], g.col(1));
                add_node(out.gradient, t[3], g.col(2));
            }
            if (want_hessian) {
                Eigen::Matrix<double, 12, 12> ke;
                for (int a = 0; a < 4; ++a) {
                    for (int c = 0; c < 3; ++c) {
                        Mat3 dds = Mat3::Zero();
                        if (a == 0) {
                            dds.row(c).setConstant(-1.0);
                        } else {
                            dds(c, a - 1) = 1.0;
                        }
                        const Mat3 dg = v0 * kernel_.stress_differential(dds * rest_[e].bm, polar) * bmt;
                        const int col = 3 * a + c;
                        ke.block<3, 1>(0, col) = -(dg.col(0) + dg.col(1) + dg.col(2));
                        ke.block<3, 1>(3, col) = dg.col(0);
                        ke.block<3, 1>(6, col) = dg.col(1);
                        ke.block<3, 1>(9, col) = dg.col(2);
                    }
                }
                for (int a = 0; a < 4; ++a) {
                    for (int ca = 0; ca < 3; ++ca) {
                        const long ra = dofs_[3 * t[a] + ca];
                        if (ra < 0) {
                            continue;
                        }
                        for (int b = 0; b < 4; ++b) {
                            for (int cb = 0; cb < 3; ++cb) {
                                const long rb = dofs_[3 * t[b] + cb];
                                if (rb >= 0) {
                                    trip.emplace_back(ra, rb, ke(3 * a + ca, 3 * b + cb));
                                }
                            }
                        }
                    }
                }
            }
        }
        if (want_hessian) {
            trip.insert(trip.end(), extra.begin(), extra.end());
            out.hessian.resize(n_, n_);
            out.hessian.setFromTriplets(trip.begin(), trip.end());
        }
        return out;
    }

    void add_node(Eigen::VectorXd& v, std::size_t node, const Eigen::Vector3d& val) const {
        for (int c = 0; c < 3; ++c) {
            const long r = dofs_[3 * node + c];
            if (r >= 0) {
                v[r] += val[c];
            }
        }
    }

    [[nodiscard]] Eigen::Vector3d node_value(const Eigen::VectorXd& v, std::size_t node) const {
        Eigen::Vector3d out = Eigen::Vector3d::Zero();
        for (int c = 0; c < 3; ++c) {
            const long r = dofs_[3 * node + c];
            if (r >= 0) {
                out[c] = v[r];
            }
        }
        return out;
    }

private:
    const TetMesh& mesh_;
    std::vector<ElementRest> rest_;
    ElementKernel kernel_;
    std::vector<long> dofs_;
    long n_;
};

// Cable control points as weighted node combinations.
using CablePoint = std::vector<std::pair<std::size_t, double>>;

std::vector<CablePoint> cable_points(const TetMesh& mesh) {
    std::vector<CablePoint> pts;
    for (const auto& group : mesh.cable) {
        CablePoint p;
        const double w = 1.0 / static_cast<double>(group.size());
        for (auto v : group) {
            p.emplace_back(v, w);
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

Vec3 point_position(const CablePoint& p, const std::vector<Vec3>& x) {
    Vec3 out = Vec3::Zero();
    for (const auto& [v, w] : p) {
        out += w * x[v];
    }
    return out;
}

// Length of the cable polyline plus its gradient / Hessian in reduced DOFs.
struct CableTerms {
    double length = 0.0;
    Eigen::VectorXd gradient;
};

CableTerms cable_terms(const std::vector<CablePoint>& pts, const Assembler& asmb, const std::vector<Vec3>& x) {
    CableTerms c;
    c.gradient = Eigen::VectorXd::Zero(asmb.size());
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const Vec3 d = point_position(pts[k + 1], x) - point_position(pts[k], x);
        const double len = d.norm();
        c.length += len;
        const Vec3 t = d / len;
        for (const auto& [v, w] : pts[k]) {
            asmb.add_node(c.gradient, v, -w * t);
        }
        for (const auto& [v, w] : pts[k + 1]) {
            asmb.add_node(c.gradient, v, w * t);
        }
    }
    return c;
}

void cable_hessian(const std::vector<CablePoint>& pts, const Assembler& asmb, const std::vector<Vec3>& x,
                   double scale, std::vector<Eigen::Triplet<double>>& trip) {
    const auto& dofs = asmb.dofs();
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const Vec3 d = point_position(pts[k + 1], x) - point_position(pts[k], x);
        const double len = d.norm();
        const Vec3 t = d / len;
        const Mat3 block = scale * (Mat3::Identity() - t * t.transpose()) / len;
        // signed weights of every node in this segment: d = sum c_n x_n
        CablePoint coeff;
        for (const auto& [v, w] : pts[k]) {
            coeff.emplace_back(v, -w);
        }
        for (const auto& [v, w] : pts[k + 1]) {
            coeff.emplace_back(v, w);
        }
        for (const auto& [vi, wi] : coeff) {
            for (const auto& [vj, wj] : coeff) {
                for (int ci = 0; ci < 3; ++ci) {
                    const long r = dofs[3 * vi + ci];
                    if (r < 0) {
                        continue;
                    }
                    for (int cj = 0; cj < 3; ++cj) {
                        const long s = dofs[3 * vj + cj];
                        if (s >= 0) {
                            trip.emplace_back(r, s, wi * wj * block(ci, cj));
                        }
                    }
                }
            }
        }
    }
}

class LinearSolver {
public:
    bool solve(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& rhs, Eigen::VectorXd& x) {
        if (!analyzed_) {
            ldlt_.analyzePattern(a);
            analyzed_ = true;
        }
        ldlt_.factorize(a);
        if (ldlt_.info() == Eigen::Success) {
            x = ldlt_.solve(rhs);
            if (ldlt_.info() == Eigen::Success && x.allFinite()) {
                return true;
            }
        }
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(a);
        if (lu.info() != Eigen::Success) {
            return false;
        }
        x = lu.solve(rhs);
        return lu.info() == Eigen::Success && x.allFinite();
    }

    // Second right-hand side with the current factorization (LDLT path only).
    bool solve_again(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& rhs, Eigen::VectorXd& x) {
        if (ldlt_.info() == Eigen::Success) {
            x = ldlt_.solve(rhs);
            if (x.allFinite()) {
                return true;
            }
        }
        return solve(a, rhs, x);
    }

private:
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
    bool analyzed_ = false;
};

} // namespace

void TetMesh::validate() const {
    const auto n = nodes.size();
    if (n == 0 || tets.empty()) {
        throw ContractError("mesh has no nodes or no tets");
    }
    for (std::size_t e = 0; e < tets.size(); ++e) {
        for (auto v : tets[e]) {
            if (v >= n) {
                throw ContractError("tet " + std::to_string(e) + " references missing node");
            }
        }
        const auto& t = tets[e];
        if (!(tet_volume(nodes[t[0]], nodes[t[1]], nodes[t[2]], nodes[t[3]]) > 0.0)) {
            throw ContractError("tet " + std::to_string(e) + " has non-positive signed volume");
        }
    }
    for (std::size_t c = 0; c < cavity_surfaces.size(); ++c) {
        for (const auto& tri : cavity_surfaces[c]) {
            for (auto v : tri) {
                if (v >= n) {
                    throw ContractError("cavity " + std::to_string(c) + " references missing node");
                }
            }
        }
        if (!open_edges(cavity_surfaces[c]).empty()) {
            throw ContractError("cavity " + std::to_string(c) + " surface is not closed and consistently oriented");
        }
    }
    if (fixed_nodes.empty()) {
        throw ContractError("mesh has no fixed nodes");
    }
    std::set<std::size_t> fixed(fixed_nodes.begin(), fixed_nodes.end());
    for (auto v : fixed_nodes) {
        if (v >= n) {
            throw ContractError("fixed node index out of range");
        }
    }
    if (!cable.empty()) {
        if (cable.size() < 2) {
            throw ContractError("cable needs at least 2 points");
        }
        for (std::size_t k = 0; k < cable.size(); ++k) {
            if (cable[k].empty()) {
                throw ContractError("cable point " + std::to_string(k) + " has no nodes");
            }
            bool all_fixed = true;
            for (auto v : cable[k]) {
                if (v >= n) {
                    throw ContractError("cable node index out of range");
                }
                all_fixed = all_fixed && fixed.count(v) != 0;
            }
            if (k > 0 && all_fixed) {
                throw ContractError("only the first cable point may be fixed");
            }
        }
        const auto pts = cable_points(*this);
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            if ((point_position(pts[k + 1], nodes) - point_position(pts[k], nodes)).norm() == 0.0) {
                throw ContractError("cable has a zero-length segment");
            }
        }
    }
    if (tip_node >= n) {
        throw ContractError("tip node index out of range");
    }
}

void MaterialParams::validate() const {
    if (!(young_modulus > 0.0)) {
        throw ContractError("young_modulus must be positive");
    }
    if (!(poisson_ratio > 0.0 && poisson_ratio < 0.5)) {
        throw ContractError("poisson_ratio must lie in (0, 0.5)");
    }
    if (gravity && !(density > 0.0)) {
        throw ContractError("density must be positive when gravity is enabled");
    }
}

double MaterialParams::mu() const { return young_modulus / (2.0 * (1.0 + poisson_ratio)); }

double MaterialParams::lambda() const {
    return young_modulus * poisson_ratio / ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
}

std::vector<Vec3> deformed_positions(const TetMesh& mesh, const std::vector<Vec3>& u) {
    if (u.size() != mesh.nodes.size()) {
        throw ContractError("displacement field size does not match mesh");
    }
    std::vector<Vec3> x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        x[i] = mesh.nodes[i] + u[i];
    }
    return x;
}

double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

ElasticState elastic_force_and_stiffness(const TetMesh& mesh, const MaterialParams& mat, const std::vector<Vec3>& u,
                                         bool with_stiffness) {
    mat.validate();
    const Assembler asmb(mesh, mat, identity_dofs(mesh.nodes.size()), static_cast<long>(3 * mesh.nodes.size()));
    auto a = asmb.assemble(deformed_positions(mesh, u), true, with_stiffness);
    ElasticState s;
    s.energy = a.energy;
    s.force = -a.gradient;
    s.stiffness = std::move(a.hessian);
    return s;
}

double elastic_energy(const TetMesh& mesh, const MaterialParams& mat, const std::vector<Vec3>& u) {
    mat.validate();
    const Assembler asmb(mesh, mat, identity_dofs(mesh.nodes.size()), static_cast<long>(3 * mesh.nodes.size()));
    return asmb.assemble(deformed_positions(mesh, u), false, false).energy;
}

double cable_length(const TetMesh& mesh, const std::vector<Vec3>& positions) {
    const auto pts = cable_points(mesh);
    double len = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        len += (point_position(pts[k + 1], positions) - point_position(pts[k], positions)).norm();
    }
    return len;
}

StaticSolution solve_static(const TetMesh& mesh, const MaterialParams& mat, const ActuationSpec& act) {
    mesh.validate();
    mat.validate();
    if (act.load_steps < 1) {
        throw ContractError("load_steps must be at least 1");
    }
    if (!(act.tolerance > 0.0)) {
        throw ContractError("tolerance must be positive");
    }

    const std::size_t n_nodes = mesh.nodes.size();
    std::vector<long> dofs(3 * n_nodes, 0);
    for (auto v : mesh.fixed_nodes) {
        dofs[3 * v] = dofs[3 * v + 1] = dofs[3 * v + 2] = -1;
    }
    long n_free = 0;
    for (auto& d : dofs) {
        if (d >= 0) {
            d = n_free++;
        }
    }
    const Assembler asmb(mesh, mat, dofs, n_free);

    StaticSolution sol;
    sol.displacements.assign(n_nodes, Vec3::Zero());
    const bool cable = act.use_cable && !mesh.cable.empty();
    const auto cable_pts = cable_points(mesh);
    sol.rest_cable_length = cable ? cable_length(mesh, mesh.nodes) : 0.0;
    if (cable) {
        if (!(act.cable_displacement >= 0.0 && act.cable_displacement < sol.rest_cable_length)) {
            throw ContractError("cable_displacement must lie in [0, rest cable length)");
        }
    }

    // external load vector at full scale
    Eigen::VectorXd f_ext = Eigen::VectorXd::Zero(n_free);
    for (const auto& load : act.external_loads) {
        if (load.node >= n_nodes) {
            throw ContractError("external load on missing node");
        }
        asmb.add_node(f_ext, load.node, load.force);
    }
    if (mat.gravity) {
        for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
            const double weight = mat.density * asmb.rest()[e].volume * kGravity;
            for (auto v : mesh.tets[e]) {
                asmb.add_node(f_ext, v, Vec3(0.0, 0.0, -0.25 * weight));
            }
        }
    }

    const double force_scale = mat.young_modulus;
    const double length_tol = 1e-7 * std::max(sol.rest_cable_length, 1.0);
    LinearSolver linear;
    double lambda = 0.0;
    std::vector<Vec3> x = mesh.nodes;

    auto apply = [&](std::vector<Vec3>& pos, const Eigen::VectorXd& du, double alpha) {
        for (std::size_t i = 0; i < n_nodes; ++i) {
            pos[i] += alpha * asmb.node_value(du, i);
        }
    };

    struct Eval {
        Eigen::VectorXd r;
        double c = 0.0;
        double merit = 0.0;
    };
    auto residual = [&](const std::vector<Vec3>& pos, double lam, double load_scale, double target) -> Eval {
        auto a = asmb.assemble(pos, true, false);
        Eval ev;
        ev.r = a.gradient - load_scale * f_ext;
        if (cable) {
            const auto ct = cable_terms(cable_pts, asmb, pos);
            ev.r += lam * ct.gradient;
            ev.c = ct.length - target;
        }
        ev.merit = 0.5 * (ev.r.squaredNorm() / (force_scale * force_scale) + ev.c * ev.c);
        return ev;
    };

    bool all_converged = true;
    for (int step = 1; step <= act.load_steps; ++step) {
        const double load_scale = static_cast<double>(step) / act.load_steps;
        const double target = sol.rest_cable_length - load_scale * act.cable_displacement;
        auto ev = residual(x, lambda, load_scale, target);
        bool converged = false;
        for (int it = 0; it <= act.max_iterations; ++it) {
            if (ev.r.norm() <= act.tolerance && std::abs(ev.c) <= length_tol) {
                converged = true;
                break;
            }
            if (it == act.max_iterations) {
                break;
            }
            std::vector<Eigen::Triplet<double>> extra;
            CableTerms ct;
            if (cable) {
                ct = cable_terms(cable_pts, asmb, x);
                cable_hessian(cable_pts, asmb, x, lambda, extra);
            }
            const auto k = asmb.assemble(x, false, true, extra).hessian;

            Eigen::VectorXd du;
            double dlambda = 0.0;
            if (!linear.solve(k, -ev.r, du)) {
                sol.warnings.push_back("linear solve failed at load step " + std::to_string(step));
                break;
            }
            if (cable) {
                Eigen::VectorXd z;
                if (!linear.solve_again(k, ct.gradient, z)) {
                    sol.warnings.push_back("constraint solve failed at load step " + std::to_string(step));
                    break;
                }
                const double gz = ct.gradient.dot(z);
                if (gz == 0.0) {
                    sol.warnings.push_back("singular constraint Schur complement");
                    break;
                }
                dlambda = (ct.gradient.dot(du) + ev.c) / gz;
                du -= dlambda * z;
            }

            // backtracking on the KKT residual merit
            double alpha = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
                auto trial = x;
                apply(trial, du, alpha);
                try {
                    auto tev = residual(trial, lambda + alpha * dlambda, load_scale, target);
                    if (tev.merit <= (1.0 - 2e-4 * alpha) * ev.merit) {
                        x = std::move(trial);
                        lambda += alpha * dlambda;
                        ev = std::move(tev);
                        accepted = true;
                        break;
                    }
                } catch (const InvertedElementError&) {
                    // step too long; shrink
                }
            }
            ++sol.iterations;
            if (!accepted) {
                sol.warnings.push_back("line search stalled at load step " + std::to_string(step));
                break;
            }
            sol.merit_history.push_back(ev.merit);
        }
        if (!converged) {
            all_converged = false;
            sol.residual = ev.r.norm();
            sol.constraint_error = std::abs(ev.c);
            break;
        }
        sol.residual = ev.r.norm();
        sol.constraint_error = std::abs(ev.c);
    }

    for (std::size_t i = 0; i < n_nodes; ++i) {
        sol.displacements[i] = x[i] - mesh.nodes[i];
    }
    for (auto v : mesh.fixed_nodes) {
        sol.displacements[v].setZero();
    }
    sol.converged = all_converged;
    sol.cable_tension = lambda;
    if (cable && lambda < 0.0) {
        sol.warnings.push_back("cable tension is negative (cable pushes)");
    }
    return sol;
}

std::vector<std::pair<std::size_t, std::size_t>> open_edges(const std::vector<Triangle>& surface) {
    std::map<std::pair<std::size_t, std::size_t>, int> directed;
    for (const auto& t : surface) {
        for (int k = 0; k < 3; ++k) {
            ++directed[{t[k], t[(k + 1) % 3]}];
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> bad;
    for (const auto& [edge, count] : directed) {
        const auto rev = directed.find({edge.second, edge.first});
        const int back = rev == directed.end() ? 0 : rev->second;
        if (count != 1 || back != 1) {
            bad.push_back(edge);
        }
    }
    return bad;
}

double surface_volume(const std::vector<Triangle>& surface, const std::vector<Vec3>& positions) {
    const auto bad = open_edges(surface);
    if (!bad.empty()) {
        std::ostringstream os;
        os << "open or inconsistently oriented surface; boundary edges:";
        for (std::size_t i = 0; i < bad.size() && i < 10; ++i) {
            os << " (" << bad[i].first << "," << bad[i].second << ")";
        }
        if (bad.size() > 10) {
            os << " ... (" << bad.size() << " total)";
        }
        throw ContractError(os.str());
    }
    // measured from the vertex centroid so a far-away surface loses no digits
    Vec3 c = Vec3::Zero();
    for (const auto& t : surface) {
        c += positions[t[0]] + positions[t[1]] + positions[t[2]];
    }
    if (!surface.empty()) {
        c /= 3.0 * static_cast<double>(surface.size());
    }
    double six_v = 0.0;
    for (const auto& t : surface) {
        six_v += (positions[t[0]] - c).dot((positions[t[1]] - c).cross(positions[t[2]] - c));
    }
    return six_v / 6.0;
}

double cavity_volume(const TetMesh& mesh, const StaticSolution& solution, std::size_t cavity) {
    if (cavity >= mesh.cavity_surfaces.size()) {
        throw ContractError("cavity id " + std::to_string(cavity) + " out of range");
    }
    return surface_volume(mesh.cavity_surfaces[cavity], deformed_positions(mesh, solution.displacements));
}

double tip_angle(const TetMesh& mesh, const std::vector<Vec3>& positions) {
    if (mesh.fixed_nodes.empty()) {
        throw ContractError("tip_angle needs fixed nodes for the base reference");
    }
    Vec3 base = Vec3::Zero();
    for (auto v : mesh.fixed_nodes) {
        base += positions[v];
    }
    base /= static_cast<double>(mesh.fixed_nodes.size());
    const Vec3 d = positions.at(mesh.tip_node) - base;
    const double len = d.norm();
    if (!(len > 0.0)) {
        throw ContractError("tip coincides with the base reference");
    }
    // atan2 form of arccos(|d.z| / |d|); accurate near 0
    return std::atan2(std::hypot(d.x(), d.y()), std::abs(d.z())) * 180.0 / std::numbers::pi;
}

double tip_angle(const TetMesh& mesh, const StaticSolution& solution) {
    return tip_angle(mesh, deformed_positions(mesh, solution.displacements));
}

double angular_displacement(const TetMesh& mesh, const StaticSolution& solution) {
    return tip_angle(mesh, solution) - tip_angle(mesh, mesh.nodes);
}

} // namespace softopt::fem
