#pragma once

#include <iosfwd>
#include <string>

#include "softopt/fem.hpp"

namespace softopt::fem {

// Plain-text mesh format, one record per line, whitespace separated:
//
//   softopt-tetmesh 1
//   nodes <N>
//   <x> <y> <z>                      N lines
//   tets <M>
//   <a> <b> <c> <d>                  M lines
//   cavities <C>
//   cavity <id> <T>                  then T lines "<a> <b> <c>", repeated C times
//   fixed <K>
//   <node>                           K lines
//   cable <P>
//   <k> <node_1> ... <node_k>        P lines in path order; a point is the centroid of its nodes
//   tip <node>
//
// Blank lines and lines starting with '#' are ignored.

void write_mesh(std::ostream& os, const TetMesh& mesh);

/// Throws ContractError with a line number on malformed input.
[[nodiscard]] TetMesh read_mesh(std::istream& is);

void save_mesh(const std::string& path, const TetMesh& mesh);
[[nodiscard]] TetMesh load_mesh(const std::string& path);

} // namespace softopt::fem
