#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "softopt/fem.hpp"
#include "softopt/moo.hpp"

namespace softopt::oracle {

// Structured box [0,lx]x[0,ly]x[0,lz] split into 6 tets per hex. Nodes at z = 0 are fixed.
inline fem::TetMesh box_mesh(std::size_t nx, std::size_t ny, std::size_t nz, double lx, double ly, double lz) {
    fem::TetMesh m;
    auto id = [&](std::size_t i, std::size_t j, std::size_t k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
    for (std::size_t k = 0; k <= nz; ++k) {
        for (std::size_t j = 0; j <= ny; ++j) {
            for (std::size_t i = 0; i <= nx; ++i) {
                m.nodes.emplace_back(lx * static_cast<double>(i) / static_cast<double>(nx),
                                     ly * static_cast<double>(j) / static_cast<double>(ny),
                                     lz * static_cast<double>(k) / static_cast<double>(nz));
                if (k == 0) {
                    m.fixed_nodes.push_back(id(i, j, k));
                }
            }
        }
    }
    static constexpr std::array<std::array<int, 3>, 6> perms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    for (std::size_t k = 0; k < nz; ++k) {
        for (std::size_t j = 0; j < ny; ++j) {
            for (std::size_t i = 0; i < nx; ++i) {
                for (const auto& p : perms) {
                    std::array<std::size_t, 3> c{i, j, k};
                    fem::Tet t{};
                    t[0] = id(c[0], c[1], c[2]);
                    for (int s = 0; s < 3; ++s) {
                        ++c[p[s]];
                        t[s + 1] = id(c[0], c[1], c[2]);
                    }
                    const auto& n = m.nodes;
                    if (fem::tet_volume(n[t[0]], n[t[1]], n[t[2]], n[t[3]]) < 0.0) {
                        std::swap(t[1], t[2]);
                    }
                    m.tets.push_back(t);
                }
            }
        }
    }
    m.tip_node = id(nx / 2, ny / 2, nz);
    return m;
}

struct SurfaceMesh {
    std::vector<fem::Vec3> points;
    std::vector<fem::Triangle> triangles;
};

inline SurfaceMesh unit_cube_surface() {
    SurfaceMesh s;
    for (int k = 0; k < 8; ++k) {
        s.points.emplace_back(k & 1, (k >> 1) & 1, (k >> 2) & 1);
    }
    // outward-facing quads, counter-clockwise seen from outside
    const std::array<std::array<std::size_t, 4>, 6> quads{{{0, 2, 3, 1},
                                                           {4, 5, 7, 6},
                                                           {0, 1, 5, 4},
                                                           {2, 6, 7, 3},
                                                           {0, 4, 6, 2},
                                                           {1, 3, 7, 5}}};
    for (const auto& q : quads) {
        s.triangles.push_back({q[0], q[1], q[2]});
        s.triangles.push_back({q[0], q[2], q[3]});
    }
    return s;
}

// Icosahedron refined by edge bisection, projected on the sphere of radius r.
inline SurfaceMesh icosphere(int levels, double r) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    SurfaceMesh s;
    for (const auto& p : std::vector<fem::Vec3>{{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                                                {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                                                {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}}) {
        s.points.push_back(p.normalized() * r);
    }
    s.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                   {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                   {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (int l = 0; l < levels; ++l) {
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> mid;
        auto midpoint = [&](std::size_t a, std::size_t b) {
            const auto key = std::minmax(a, b);
            if (auto it = mid.find(key); it != mid.end()) {
                return it->second;
            }
            s.points.push_back((s.points[a] + s.points[b]).normalized() * r);
            return mid[key] = s.points.size() - 1;
        };
        std::vector<fem::Triangle> next;
        for (const auto& tri : s.triangles) {
            const auto a = midpoint(tri[0], tri[1]);
            const auto b = midpoint(tri[1], tri[2]);
            const auto c = midpoint(tri[2], tri[0]);
            next.push_back({tri[0], a, c});
            next.push_back({tri[1], b, a});
            next.push_back({tri[2], c, b});
            next.push_back({a, b, c});
        }
        s.triangles = std::move(next);
    }
    return s;
}

// O(n^2) reference: peel off the set of points nobody dominates, repeat.
inline moo::Fronts brute_force_fronts(const std::vector<moo::ObjectiveVector>& pts) {
    auto dom = [](const moo::ObjectiveVector& a, const moo::ObjectiveVector& b) {
        bool strict = false;
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (a[k] > b[k]) {
                return false;
            }
            strict = strict || a[k] < b[k];
        }
        return strict;
    };
    std::vector<bool> assigned(pts.size(), false);
    std::size_t left = pts.size();
    moo::Fronts fronts;
    while (left > 0) {
        std::vector<std::size_t> front;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (assigned[i]) {
                continue;
            }
            bool dominated = false;
            for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
                dominated = !assigned[j] && j != i && dom(pts[j], pts[i]);
            }
            if (!dominated) {
                front.push_back(i);
            }
        }
        for (auto i : front) {
            assigned[i] = true;
        }
        left -= front.size();
        fronts.push_back(std::move(front));
    }
    return fronts;
}

} // namespace softopt::oracle
