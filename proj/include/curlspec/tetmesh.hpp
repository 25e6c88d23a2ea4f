#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "curlspec/errors.hpp"
#include "curlspec/geometry.hpp"

namespace curlspec {

/// Entry of a 2-chain: canonical face index and orientation sign (+-1).
struct FaceChainEntry {
    int face;
    int sign;
};

/// Entry of a 1-chain: canonical edge index and orientation sign (+-1).
struct EdgeChainEntry {
    int edge;
    int sign;
};

using FaceChain = std::vector<FaceChainEntry>;
using EdgeChain = std::vector<EdgeChainEntry>;

/// Mesh quality summary used to gate acceptance tolerances.
struct QualityReport {
    double min_dihedral_deg = 0;  // smallest dihedral angle over all tets
    double max_aspect = 0;        // longest edge / (3 * inradius)
    double h_max = 0;             // longest edge in the mesh
};

/// Tetrahedral triangulation of a domain with tagged boundary data.
///
/// Tets are stored positively oriented.  Edge and face tables are derived
/// deterministically from the tet list (sorted vertex tuples), so two meshes
/// with identical vertices/tets have bitwise identical incidence.  Instances
/// are immutable after finalize() and safe to share read-only across threads.
class TetMesh {
public:
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 4>> tets;
    std::string domain_name;

    /// Tagged face subsets (cut surfaces, named boundary patches) as oriented
    /// vertex triples; orientation of the chain is the triple's orientation.
    std::map<std::string, std::vector<std::array<int, 3>>> surface_tags;
    /// Tagged oriented edge paths (boundary cycles) as oriented vertex pairs.
    std::map<std::string, std::vector<std::array<int, 2>>> curve_tags;

    /// Validates orientations and builds the derived tables.  Throws
    /// DegenerateTetError on non-positive tet volumes.
    void finalize();

    bool finalized() const { return finalized_; }
    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_edges() const { return static_cast<int>(edges_.size()); }
    int n_faces() const { return static_cast<int>(faces_.size()); }
    int n_tets() const { return static_cast<int>(tets.size()); }

    const std::vector<std::array<int, 2>>& edges() const { return edges_; }
    const std::vector<std::array<int, 3>>& faces() const { return faces_; }

    /// Canonical index of the undirected edge {a,b}; -1 if absent.
    int edge_index(int a, int b) const;
    /// Canonical index of the undirected face {a,b,c}; -1 if absent.
    int face_index(int a, int b, int c) const;
    /// Orientation of the ordered triple against the canonical face: +-1.
    static int triple_parity(int a, int b, int c);

    /// 6 edges of tet t in local pair order (01,02,03,12,13,23).
    const std::array<int, 6>& tet_edges(int t) const { return tet_edges_[t]; }
    /// 4 faces of tet t, face k opposite local vertex k.
    const std::array<int, 4>& tet_faces(int t) const { return tet_faces_[t]; }

    /// Tets adjacent to a face (1 for boundary faces, else 2), -1 padding.
    const std::array<int, 2>& face_tets(int f) const { return face_tets_[f]; }

    const std::vector<int>& boundary_face_ids() const { return boundary_faces_; }
    /// Outward-oriented vertex triple of the k-th boundary face.
    const std::array<int, 3>& boundary_face_triple(int k) const { return boundary_triples_[k]; }
    /// Sign of the outward orientation against the canonical face.
    int boundary_face_sign(int k) const { return boundary_signs_[k]; }

    bool vertex_on_boundary(int v) const { return vertex_boundary_[v] != 0; }
    bool edge_on_boundary(int e) const { return edge_boundary_[e] != 0; }
    bool face_on_boundary(int f) const { return face_tets_[f][1] < 0; }

    const std::vector<int>& boundary_vertices() const { return boundary_vertex_list_; }
    const std::vector<int>& boundary_edges() const { return boundary_edge_list_; }

    /// Number of connected components of the volume mesh.
    int n_components() const { return n_components_; }
    /// Component id of each vertex.
    const std::vector<int>& vertex_component() const { return vertex_component_; }

    int n_boundary_components() const { return n_boundary_components_; }
    /// Boundary component id per boundary face (position in boundary_face_ids()).
    const std::vector<int>& boundary_face_component() const { return boundary_face_component_; }
    /// Euler characteristic of each boundary component.
    std::vector<int> boundary_component_euler() const;
    /// Genus of each boundary component, g = (2 - chi)/2.
    std::vector<int> boundary_component_genus() const;
    /// Total boundary genus (the paper's ell).
    int total_genus() const;

    /// V - E + F - T.
    int euler_characteristic() const;

    double volume() const;
    double boundary_area() const;
    QualityReport quality() const;
    /// Diameter of the vertex cloud (max axis-aligned bounding box extent).
    double bbox_diameter() const;

    /// Resolve a surface tag to a signed face chain (throws if unknown).
    FaceChain surface_chain(const std::string& name) const;
    /// Resolve a curve tag to a signed edge chain (throws if unknown).
    EdgeChain curve_chain(const std::string& name) const;

    /// Area-weighted outward unit normal at a boundary vertex.
    Vec3 vertex_normal(int v) const;

    /// Centroid of a face.
    Vec3 face_centroid(int f) const {
        const auto& tri = faces_[f];
        return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
    }

private:
    bool finalized_ = false;
    std::vector<std::array<int, 2>> edges_;
    std::vector<std::array<int, 3>> faces_;
    std::vector<std::array<int, 6>> tet_edges_;
    std::vector<std::array<int, 4>> tet_faces_;
    std::vector<std::array<int, 2>> face_tets_;
    std::vector<int> boundary_faces_;
    std::vector<std::array<int, 3>> boundary_triples_;
    std::vector<int> boundary_signs_;
    std::vector<char> vertex_boundary_;
    std::vector<char> edge_boundary_;
    std::vector<int> boundary_vertex_list_;
    std::vector<int> boundary_edge_list_;
    std::vector<int> vertex_component_;
    int n_components_ = 0;
    std::vector<int> boundary_face_component_;
    int n_boundary_components_ = 0;
};

/// Boundary of a 2-chain as a signed edge chain (entries with coefficient
/// +-1; throws if any edge acquires |coefficient| > 1).
EdgeChain chain_boundary(const TetMesh& mesh, const FaceChain& chain);

/// Convert a signed edge chain to oriented vertex pairs (tail, head).
std::vector<std::array<int, 2>> chain_to_pairs(const TetMesh& mesh, const EdgeChain& chain);

}  // namespace curlspec
