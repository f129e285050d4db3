#pragma once

#include "mhd/common.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mhd
{

/// Local vertex pairs of the six tetrahedron edges and local vertex
/// triples of the four faces (face i is opposite vertex i).
inline constexpr std::array<std::array<int, 2>, 6> kTetEdges = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
inline constexpr std::array<std::array<int, 3>, 4> kTetFaces = {
    {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};

/// Conforming tetrahedral mesh with globally oriented edges and faces.
///
/// Cells are stored with positive orientation. Edges are stored as sorted
/// vertex pairs and oriented from the lower to the higher global vertex
/// index; faces are stored as sorted vertex triples and carry the normal
/// (x_b - x_a) x (x_c - x_a) of that triple. Per-cell signs relate the
/// local edge direction and the outward face normal to these global
/// orientations.
class Mesh
{
public:
  /// Builds the topology from raw cells. Cells with negative orientation are
  /// flipped; degenerate cells, faces shared by more than two cells and
  /// boundary faces that do not lie on the unit cube surface are rejected
  /// (the last check only when @p require_unit_cube is set).
  static Mesh from_cells(std::vector<Vec3> vertices,
                         std::vector<std::array<int, 4>> cells,
                         bool require_unit_cube = false);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }

  const Vec3& vertex(int v) const { return vertices_[v]; }
  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::array<int, 4>& cell(int c) const { return cells_[c]; }
  const std::array<int, 2>& edge(int e) const { return edges_[e]; }
  const std::array<int, 3>& face(int f) const { return faces_[f]; }

  /// Global edge of local edge k (kTetEdges order) and its direction sign.
  const std::array<int, 6>& cell_edges(int c) const { return cell_edges_[c]; }
  const std::array<std::int8_t, 6>& cell_edge_signs(int c) const
  {
    return cell_edge_signs_[c];
  }
  /// Global face opposite local vertex i and sign of (outward . global normal).
  const std::array<int, 4>& cell_faces(int c) const { return cell_faces_[c]; }
  const std::array<std::int8_t, 4>& cell_face_signs(int c) const
  {
    return cell_face_signs_[c];
  }
  /// Cells adjacent to a face; the second entry is -1 on the boundary.
  const std::array<int, 2>& face_cells(int f) const { return face_cells_[f]; }

  bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }
  bool is_boundary_edge(int e) const { return boundary_edge_[e] != 0; }
  bool is_boundary_face(int f) const { return face_cells_[f][1] < 0; }

  /// Index of the edge joining two vertices, -1 if absent.
  int find_edge(int a, int b) const;
  /// Index of the face spanned by three vertices, -1 if absent.
  int find_face(int a, int b, int c) const;

  /// Global unnormalized face normal (|n| = 2 area).
  Vec3 face_normal(int f) const;

  /// Maximum cell diameter.
  double mesh_size() const;

private:
  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 4>> cells_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> faces_;
  std::vector<std::array<int, 6>> cell_edges_;
  std::vector<std::array<std::int8_t, 6>> cell_edge_signs_;
  std::vector<std::array<int, 4>> cell_faces_;
  std::vector<std::array<std::int8_t, 4>> cell_face_signs_;
  std::vector<std::array<int, 2>> face_cells_;
  std::vector<char> boundary_vertex_;
  std::vector<char> boundary_edge_;
};

/// Kuhn subdivision of (0,1)^3 into 6 n^3 tetrahedra.
Mesh build_structured_cube(int n);

/// Affine map x = x0 + J xhat of a stored (positively oriented) cell.
struct CellGeometry
{
  Vec3 origin;
  Mat3 jacobian;
  Mat3 inverse_transpose;
  double det = 0.0;
  double volume = 0.0;
};

CellGeometry cell_geometry(const Mesh& mesh, int cell);

struct BoundaryEntities
{
  std::vector<int> vertices;
  std::vector<int> edges;
  std::vector<int> faces;
};

BoundaryEntities boundary_entities(const Mesh& mesh);

/// Reads a Gmsh MSH 2.x ASCII file. Only linear tetrahedra (type 4) are
/// kept; lower-dimensional elements are ignored and any other volume
/// element type is an error. The mesh must discretize the unit cube.
Mesh read_gmsh(std::istream& in);
Mesh read_gmsh(const std::string& path);

} // namespace mhd
