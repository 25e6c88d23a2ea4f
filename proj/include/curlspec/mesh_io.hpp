#pragma once

#include <iosfwd>
#include <string>

#include "curlspec/tetmesh.hpp"

namespace curlspec {

/// TMESH ASCII format:
///   tmesh 1
///   V E F T
///   v x y z        (V lines)
///   t i j k l      (T lines, 0-based)
///   surface <name> <count>   followed by <count> oriented face triples
///   curve <name> <count>     followed by <count> oriented edge pairs
/// Whitespace separated; '#' starts a comment.  Edge/face counts in the
/// header are informational.
void write_tmesh(std::ostream& os, const TetMesh& mesh);
void write_tmesh_file(const std::string& path, const TetMesh& mesh);

TetMesh read_tmesh(std::istream& is);
TetMesh read_tmesh_file(const std::string& path);

/// Gmsh MSH 2.2 ASCII reader: element type 4 (tets) becomes the mesh, type 2
/// (triangles) with physical tag p becomes surface tag "physical_p".
TetMesh read_msh22(std::istream& is);
TetMesh read_msh22_file(const std::string& path);

}  // namespace curlspec
