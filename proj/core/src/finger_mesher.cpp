#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include "softopt/errors.hpp"
#include "softopt/finger.hpp"

namespace softopt::finger {

namespace {

// A breakpoint along one axis. Breakpoints that touch a cavity want fine spacing.
struct Breakpoint {
    double pos;
    bool near_cavity;
    int role;  // index into the axis' named breakpoints; -1 optional, -2 unnamed geometry
};

// Fractions in [0,1] subdividing one interval; spacing varies linearly from sa to sb.
std::vector<double> graded_fractions(double length, double sa, double sb) {
    double cells = 0.0;
    if (std::abs(sb - sa) < 1e-12 * std::max(sa, sb)) {
        cells = length / sa;
    } else {
        cells = length * std::log(sb / sa) / (sb - sa);
    }
    const int n = std::max(1, static_cast<int>(std::lround(cells)));
    std::vector<double> out(n + 1);
    for (int k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / n;  // fraction of the cell count
        double xi = 0.0;
        if (std::abs(sb - sa) < 1e-12 * std::max(sa, sb)) {
            xi = t;
        } else {
            // invert N(x) = L/(sb-sa) ln(s(x)/sa), s(x) = sa + (sb-sa) x / L
            const double s = sa * std::exp(t * std::log(sb / sa));
            xi = (s - sa) / (sb - sa);
        }
        out[k] = xi;
    }
    out.front() = 0.0;
    out.back() = 1.0;
    return out;
}

struct Axis {
    std::vector<double> fractions;      // per grid line: fraction inside its interval
    std::vector<int> interval;          // per grid line: interval index (line sits at start of it, last at end)
    std::vector<int> breakpoint_line;   // grid line index of each breakpoint

    [[nodiscard]] std::size_t lines() const { return fractions.size(); }
};

Axis subdivide(const std::vector<Breakpoint>& bps, double h, double rf) {
    Axis axis;
    axis.breakpoint_line.resize(bps.size());
    for (std::size_t m = 0; m + 1 < bps.size(); ++m) {
        const double len = bps[m + 1].pos - bps[m].pos;
        const double sa = bps[m].near_cavity ? h / rf : h;
        const double sb = bps[m + 1].near_cavity ? h / rf : h;
        const auto fr = graded_fractions(len, sa, sb);
        axis.breakpoint_line[m] = static_cast<int>(axis.fractions.size());
        for (std::size_t k = 0; k + 1 < fr.size(); ++k) {
            axis.fractions.push_back(fr[k]);
            axis.interval.push_back(static_cast<int>(m));
        }
    }
    axis.breakpoint_line.back() = static_cast<int>(axis.fractions.size());
    axis.fractions.push_back(1.0);
    axis.interval.push_back(static_cast<int>(bps.size()) - 2);
    return axis;
}

double line_position(const Axis& axis, const std::vector<double>& bp_pos, std::size_t line) {
    const int m = axis.interval[line];
    const double f = axis.fractions[line];
    return (1.0 - f) * bp_pos[m] + f * bp_pos[m + 1];
}

// Optional breakpoints (role -1) yield to anything within min_gap. Geometric
// ones (named roles and -2) are never dropped, only merged when coincident.
std::vector<Breakpoint> tidy(std::vector<Breakpoint> bps, double min_gap) {
    std::stable_sort(bps.begin(), bps.end(), [](const auto& a, const auto& b) { return a.pos < b.pos; });
    std::vector<Breakpoint> out;
    for (const auto& b : bps) {
        if (!out.empty()) {
            auto& prev = out.back();
            const double gap = b.pos - prev.pos;
            const bool prev_optional = prev.role == -1;
            const bool b_optional = b.role == -1;
            if (gap < min_gap && (prev_optional || b_optional)) {
                if (prev_optional && !b_optional) {
                    prev = b;
                }
                prev.near_cavity = true;
                continue;
            }
            if (gap < 1e-9) {
                if (b.role >= 0 && prev.role >= 0) {
                    throw GeometryError("mesher: coincident features at " + std::to_string(b.pos) + " mm");
                }
                if (b.role >= 0) {
                    prev = b;
                }
                prev.near_cavity = true;
                continue;
            }
        }
        out.push_back(b);
    }
    return out;
}

enum XRole { kXMin, kXCavLo, kXMid, kXCavHi, kXMax };
enum YRole { kYBack, kYInner, kYOuter, kYCable, kYFront };

struct Plan {
    std::vector<Breakpoint> xb, yb, zb_ref;
    std::vector<double> xpos, ypos;
    FingerLayout lay;
    double plateau_kink_y = 0.0;
};

Plan make_plan(const FingerDesign& d, const FingerGlobals& g) {
    Plan p;
    p.lay = layout(d, g);
    const double hw = 0.5 * g.width;
    const double hh = 0.5 * g.height;
    const double t = d.wall_thickness;

    // Every cross-section cell lies within one cavity depth of a cavity, and the
    // section carries the bending, so x and y use the fine spacing throughout;
    // only z grades away from the cavity stack.
    p.xb = {{-hw, true, kXMin}, {-hw + t, true, kXCavLo}, {0.0, true, kXMid}, {hw - t, true, kXCavHi},
            {hw, true, kXMax}};
    p.xb = tidy(p.xb, 1e-9);

    std::vector<Breakpoint> yb{{-hh, true, kYBack},
                               {p.lay.cavity_inner_y, true, kYInner},
                               {d.outer_radius, true, kYOuter},
                               {p.lay.cable_y, true, kYCable},
                               {hh, true, kYFront}};
    yb.push_back({0.0, true, -1});  // puts the tip node on the axis
    const double taper = (d.cavity_height - d.plateau_height) / (2.0 * p.lay.slope);
    p.plateau_kink_y = d.outer_radius - taper;
    if (p.plateau_kink_y > p.lay.cavity_inner_y) {
        yb.push_back({p.plateau_kink_y, true, -2});
    }
    p.yb = tidy(yb, 0.25);

    p.zb_ref.push_back({0.0, false, -1});
    for (double zc : p.lay.cavity_centers_z) {
        p.zb_ref.push_back({zc - p.lay.cavity_half_height, true, -1});
        p.zb_ref.push_back({zc + p.lay.cavity_half_height, true, -1});
    }
    p.zb_ref.push_back({g.length, false, -1});

    for (const auto& b : p.xb) {
        p.xpos.push_back(b.pos);
    }
    for (const auto& b : p.yb) {
        p.ypos.push_back(b.pos);
    }
    return p;
}

int find_role(const std::vector<Breakpoint>& bps, int role) {
    for (std::size_t m = 0; m < bps.size(); ++m) {
        if (bps[m].role == role) {
            return static_cast<int>(m);
        }
    }
    throw GeometryError("mesher: lost a required breakpoint");
}

struct Grid {
    Axis x, y, z;
    int ix_lo = 0, ix_hi = 0, ix_mid = 0;
    int jy_in = 0, jy_out = 0, jy_cable = 0;
    std::vector<std::pair<int, int>> kz_cav;  // [bottom line, top line] per cavity

    [[nodiscard]] std::size_t nx() const { return x.lines(); }
    [[nodiscard]] std::size_t ny() const { return y.lines(); }
    [[nodiscard]] std::size_t nz() const { return z.lines(); }

    [[nodiscard]] bool interior_to_cavity(std::size_t i, std::size_t j, std::size_t k) const {
        if (!(static_cast<int>(i) > ix_lo && static_cast<int>(i) < ix_hi && static_cast<int>(j) > jy_in &&
              static_cast<int>(j) < jy_out)) {
            return false;
        }
        for (const auto& [kb, kt] : kz_cav) {
            if (static_cast<int>(k) > kb && static_cast<int>(k) < kt) {
                return true;
            }
        }
        return false;
    }

    // cavity id of cell (i,j,k) or -1 if solid
    [[nodiscard]] int cavity_of_cell(std::size_t i, std::size_t j, std::size_t k) const {
        if (!(static_cast<int>(i) >= ix_lo && static_cast<int>(i) < ix_hi && static_cast<int>(j) >= jy_in &&
              static_cast<int>(j) < jy_out)) {
            return -1;
        }
        for (std::size_t c = 0; c < kz_cav.size(); ++c) {
            if (static_cast<int>(k) >= kz_cav[c].first && static_cast<int>(k) < kz_cav[c].second) {
                return static_cast<int>(c);
            }
        }
        return -1;
    }

    [[nodiscard]] std::size_t used_nodes() const {
        std::size_t total = nx() * ny() * nz();
        const std::size_t ci = static_cast<std::size_t>(std::max(0, ix_hi - ix_lo - 1));
        const std::size_t cj = static_cast<std::size_t>(std::max(0, jy_out - jy_in - 1));
        for (const auto& [kb, kt] : kz_cav) {
            total -= ci * cj * static_cast<std::size_t>(std::max(0, kt - kb - 1));
        }
        return total;
    }
};

Grid make_grid(const Plan& p, double h, double rf) {
    Grid g;
    g.x = subdivide(p.xb, h, rf);
    g.y = subdivide(p.yb, h, rf);
    g.z = subdivide(p.zb_ref, h, rf);
    g.ix_lo = g.x.breakpoint_line[find_role(p.xb, kXCavLo)];
    g.ix_hi = g.x.breakpoint_line[find_role(p.xb, kXCavHi)];
    g.ix_mid = g.x.breakpoint_line[find_role(p.xb, kXMid)];
    g.jy_in = g.y.breakpoint_line[find_role(p.yb, kYInner)];
    g.jy_out = g.y.breakpoint_line[find_role(p.yb, kYOuter)];
    g.jy_cable = g.y.breakpoint_line[find_role(p.yb, kYCable)];
    for (std::size_t c = 0; c < p.lay.cavity_centers_z.size(); ++c) {
        g.kz_cav.emplace_back(g.z.breakpoint_line[1 + 2 * c], g.z.breakpoint_line[2 + 2 * c]);
    }
    return g;
}

constexpr double kMinSpacing = 0.05;
constexpr double kMaxSpacing = 200.0;

} // namespace

std::pair<int, int> achievable_node_range(const FingerDesign& design, const MeshingSpec& spec,
                                          const FingerGlobals& globals) {
    spec.validate();
    design.validate(globals);
    const auto plan = make_plan(design, globals);
    const auto coarse = make_grid(plan, kMaxSpacing, spec.refinement_factor).used_nodes();
    const auto fine = make_grid(plan, 0.25, spec.refinement_factor).used_nodes();
    return {static_cast<int>(coarse), static_cast<int>(fine)};
}

fem::TetMesh build_finger(const FingerDesign& design, const MeshingSpec& spec, const FingerGlobals& globals) {
    spec.validate();
    design.validate(globals);
    const auto plan = make_plan(design, globals);
    const double rf = spec.refinement_factor;
    const double target = spec.target_nodes;

    // node count decreases with spacing; bisect in log(h) and keep the closest count
    double lo = std::log(kMinSpacing);
    double hi = std::log(kMaxSpacing);
    double best_h = kMaxSpacing;
    double best_err = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double h = std::exp(mid);
        const auto count = static_cast<double>(make_grid(plan, h, rf).used_nodes());
        const double err = std::abs(count - target);
        if (err < best_err) {
            best_err = err;
            best_h = h;
        }
        if (count > target) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (count > 4e6) {
            lo = mid;
        }
    }
    const Grid grid = make_grid(plan, best_h, rf);
    const auto achieved = static_cast<double>(grid.used_nodes());
    if (std::abs(achieved - target) > 0.2 * target) {
        const auto range = achievable_node_range(design, spec, globals);
        throw GeometryError("node target " + std::to_string(spec.target_nodes) + " unreachable (closest " +
                            std::to_string(static_cast<long>(achieved)) + "); achievable range about [" +
                            std::to_string(range.first) + ", " + std::to_string(range.second) + "]");
    }

    const auto& lay = plan.lay;
    const std::size_t nx = grid.nx(), ny = grid.ny(), nz = grid.nz();

    // z breakpoints depend on y: cavity walls follow the trapezoid profile
    auto z_breakpoints = [&](double y) {
        std::vector<double> zb;
        zb.push_back(0.0);
        const double hz = lay.half_extent(y);
        for (double zc : lay.cavity_centers_z) {
            zb.push_back(zc - hz);
            zb.push_back(zc + hz);
        }
        zb.push_back(globals.length);
        return zb;
    };

    std::vector<double> xs(nx), ys(ny);
    for (std::size_t i = 0; i < nx; ++i) {
        xs[i] = line_position(grid.x, plan.xpos, i);
    }
    for (std::size_t j = 0; j < ny; ++j) {
        ys[j] = line_position(grid.y, plan.ypos, j);
    }
    xs[grid.ix_mid] = 0.0;

    std::vector<std::vector<double>> zs(ny, std::vector<double>(nz));
    for (std::size_t j = 0; j < ny; ++j) {
        const auto zb = z_breakpoints(ys[j]);
        for (std::size_t k = 0; k < nz; ++k) {
            zs[j][k] = line_position(grid.z, zb, k);
        }
    }

    fem::TetMesh mesh;
    const std::size_t total = nx * ny * nz;
    std::vector<long> node_id(total, -1);
    auto flat = [&](std::size_t i, std::size_t j, std::size_t k) { return (k * ny + j) * nx + i; };
    for (std::size_t k = 0; k < nz; ++k) {
        for (std::size_t j = 0; j < ny; ++j) {
            for (std::size_t i = 0; i < nx; ++i) {
                if (grid.interior_to_cavity(i, j, k)) {
                    continue;
                }
                node_id[flat(i, j, k)] = static_cast<long>(mesh.nodes.size());
                mesh.nodes.emplace_back(xs[i], ys[j], zs[j][k]);
            }
        }
    }
    auto id = [&](std::size_t i, std::size_t j, std::size_t k) {
        const long v = node_id[flat(i, j, k)];
        if (v < 0) {
            throw GeometryError("mesher: solid cell references a carved node");
        }
        return static_cast<std::size_t>(v);
    };

    static constexpr std::array<std::array<int, 3>, 6> kPerms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    for (std::size_t k = 0; k + 1 < nz; ++k) {
        for (std::size_t j = 0; j + 1 < ny; ++j) {
            for (std::size_t i = 0; i + 1 < nx; ++i) {
                if (grid.cavity_of_cell(i, j, k) >= 0) {
                    continue;
                }
                for (const auto& perm : kPerms) {
                    std::array<std::size_t, 3> c{i, j, k};
                    std::array<std::size_t, 4> tet{};
                    tet[0] = id(c[0], c[1], c[2]);
                    for (int s = 0; s < 3; ++s) {
                        ++c[perm[s]];
                        tet[s + 1] = id(c[0], c[1], c[2]);
                    }
                    const auto& n = mesh.nodes;
                    if (fem::tet_volume(n[tet[0]], n[tet[1]], n[tet[2]], n[tet[3]]) < 0.0) {
                        std::swap(tet[1], tet[2]);
                    }
                    mesh.tets.push_back(tet);
                }
            }
        }
    }

    // cavity surfaces: faces between a cavity cell and a solid neighbour, normal out of the void
    mesh.cavity_surfaces.resize(lay.cavity_centers_z.size());
    const std::array<std::size_t, 3> dims{nx, ny, nz};
    for (std::size_t k = 0; k + 1 < nz; ++k) {
        for (std::size_t j = 0; j + 1 < ny; ++j) {
            for (std::size_t i = 0; i + 1 < nx; ++i) {
                const int cav = grid.cavity_of_cell(i, j, k);
                if (cav < 0) {
                    continue;
                }
                const std::array<std::size_t, 3> cell{i, j, k};
                for (int a = 0; a < 3; ++a) {
                    const int b = (a + 1) % 3;
                    const int c = (a + 2) % 3;
                    for (int side = 0; side < 2; ++side) {
                        auto nb = cell;
                        if (side == 0 && nb[a] == 0) {
                            continue;
                        }
                        if (side == 1 && nb[a] + 2 >= dims[a] + 1) {
                            continue;
                        }
                        nb[a] = side == 0 ? nb[a] - 1 : nb[a] + 1;
                        if (grid.cavity_of_cell(nb[0], nb[1], nb[2]) == cav) {
                            continue;
                        }
                        auto corner = [&](int db, int dc) {
                            auto v = cell;
                            v[a] += static_cast<std::size_t>(side);
                            v[b] += static_cast<std::size_t>(db);
                            v[c] += static_cast<std::size_t>(dc);
                            return id(v[0], v[1], v[2]);
                        };
                        const auto c00 = corner(0, 0), c10 = corner(1, 0), c11 = corner(1, 1), c01 = corner(0, 1);
                        auto& surf = mesh.cavity_surfaces[static_cast<std::size_t>(cav)];
                        if (side == 1) {
                            surf.push_back({c00, c10, c11});
                            surf.push_back({c00, c11, c01});
                        } else {
                            surf.push_back({c00, c11, c10});
                            surf.push_back({c00, c01, c11});
                        }
                    }
                }
            }
        }
    }

    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            mesh.fixed_nodes.push_back(id(i, j, 0));
        }
    }
    // cable threads the column at the cable offset and is tied to a plate on the tip face
    const double plate_x = 0.5 * globals.width - design.wall_thickness;
    const double plate_y = std::min(globals.cable_offset, 0.5 * globals.height - lay.cable_y);
    for (std::size_t k = 0; k + 1 < nz; ++k) {
        mesh.cable.push_back({id(static_cast<std::size_t>(grid.ix_mid), static_cast<std::size_t>(grid.jy_cable), k)});
    }
    std::vector<std::size_t> plate;
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            if (std::abs(xs[i]) <= plate_x + 1e-9 && std::abs(ys[j] - lay.cable_y) <= plate_y + 1e-9) {
                plate.push_back(id(i, j, nz - 1));
            }
        }
    }
    mesh.cable.push_back(std::move(plate));
    // tip: centre-line node of the end face closest to the finger axis
    std::size_t jt = 0;
    for (std::size_t j = 1; j < ny; ++j) {
        if (std::abs(ys[j]) < std::abs(ys[jt])) {
            jt = j;
        }
    }
    mesh.tip_node = id(static_cast<std::size_t>(grid.ix_mid), jt, nz - 1);
    std::sort(mesh.fixed_nodes.begin(), mesh.fixed_nodes.end());
    mesh.validate();
    return mesh;
}

} // namespace softopt::finger
