#include "mhd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace mhd
{

namespace
{

double signed_volume6(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d)
{
  return (b - a).dot((c - a).cross(d - a));
}

bool on_unit_cube_plane(const std::vector<Vec3>& pts)
{
  constexpr double tol = 1e-12;
  for (int axis = 0; axis < 3; ++axis)
  {
    for (double plane : {0.0, 1.0})
    {
      bool all = std::all_of(pts.begin(), pts.end(), [&](const Vec3& p) {
        return std::abs(p[axis] - plane) < tol;
      });
      if (all)
        return true;
    }
  }
  return false;
}

} // namespace

Mesh Mesh::from_cells(std::vector<Vec3> vertices,
                      std::vector<std::array<int, 4>> cells,
                      bool require_unit_cube)
{
  Mesh m;
  m.vertices_ = std::move(vertices);
  m.cells_ = std::move(cells);
  const int nv = m.num_vertices();

  for (std::size_t c = 0; c < m.cells_.size(); ++c)
  {
    auto& cell = m.cells_[c];
    for (int v : cell)
      if (v < 0 || v >= nv)
        throw std::invalid_argument("mesh: cell " + std::to_string(c)
                                    + " references a missing vertex");
    const auto& x = m.vertices_;
    double vol6 = signed_volume6(x[cell[0]], x[cell[1]], x[cell[2]], x[cell[3]]);
    double scale = (x[cell[1]] - x[cell[0]]).norm();
    scale = std::max(scale, (x[cell[2]] - x[cell[0]]).norm());
    scale = std::max(scale, (x[cell[3]] - x[cell[0]]).norm());
    if (!(std::abs(vol6) > 1e-13 * scale * scale * scale))
      throw std::invalid_argument("mesh: degenerate cell "
                                  + std::to_string(c));
    if (vol6 < 0)
      std::swap(cell[2], cell[3]);
  }

  // Entities are numbered in lexicographic order of their sorted vertices.
  for (const auto& cell : m.cells_)
  {
    for (const auto& le : kTetEdges)
    {
      std::array<int, 2> e{cell[le[0]], cell[le[1]]};
      std::sort(e.begin(), e.end());
      m.edges_.push_back(e);
    }
    for (const auto& lf : kTetFaces)
    {
      std::array<int, 3> f{cell[lf[0]], cell[lf[1]], cell[lf[2]]};
      std::sort(f.begin(), f.end());
      m.faces_.push_back(f);
    }
  }
  std::sort(m.edges_.begin(), m.edges_.end());
  m.edges_.erase(std::unique(m.edges_.begin(), m.edges_.end()), m.edges_.end());
  std::sort(m.faces_.begin(), m.faces_.end());
  m.faces_.erase(std::unique(m.faces_.begin(), m.faces_.end()), m.faces_.end());

  const int nc = m.num_cells();
  m.cell_edges_.resize(nc);
  m.cell_edge_signs_.resize(nc);
  m.cell_faces_.resize(nc);
  m.cell_face_signs_.resize(nc);
  m.face_cells_.assign(m.faces_.size(), {-1, -1});

  for (int c = 0; c < nc; ++c)
  {
    const auto& cell = m.cells_[c];
    for (int k = 0; k < 6; ++k)
    {
      int a = cell[kTetEdges[k][0]];
      int b = cell[kTetEdges[k][1]];
      m.cell_edges_[c][k] = m.find_edge(a, b);
      m.cell_edge_signs_[c][k] = a < b ? 1 : -1;
    }
    for (int i = 0; i < 4; ++i)
    {
      const auto& lf = kTetFaces[i];
      int f = m.find_face(cell[lf[0]], cell[lf[1]], cell[lf[2]]);
      m.cell_faces_[c][i] = f;
      Vec3 centroid = (m.vertices_[cell[lf[0]]] + m.vertices_[cell[lf[1]]]
                       + m.vertices_[cell[lf[2]]])
                      / 3.0;
      Vec3 outward = centroid - m.vertices_[cell[i]];
      m.cell_face_signs_[c][i] = outward.dot(m.face_normal(f)) > 0 ? 1 : -1;

      auto& adj = m.face_cells_[f];
      if (adj[0] < 0)
        adj[0] = c;
      else if (adj[1] < 0)
        adj[1] = c;
      else
        throw std::invalid_argument("mesh: face shared by more than two cells");
    }
  }

  m.boundary_vertex_.assign(nv, 0);
  m.boundary_edge_.assign(m.edges_.size(), 0);
  for (int f = 0; f < m.num_faces(); ++f)
  {
    if (!m.is_boundary_face(f))
      continue;
    const auto& fv = m.faces_[f];
    if (require_unit_cube
        && !on_unit_cube_plane(
            {m.vertices_[fv[0]], m.vertices_[fv[1]], m.vertices_[fv[2]]}))
      throw std::invalid_argument(
          "mesh: nonconforming mesh (unmatched face inside the domain)");
    for (int v : fv)
      m.boundary_vertex_[v] = 1;
    m.boundary_edge_[m.find_edge(fv[0], fv[1])] = 1;
    m.boundary_edge_[m.find_edge(fv[0], fv[2])] = 1;
    m.boundary_edge_[m.find_edge(fv[1], fv[2])] = 1;
  }
  return m;
}

int Mesh::find_edge(int a, int b) const
{
  std::array<int, 2> key{std::min(a, b), std::max(a, b)};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key)
    return -1;
  return static_cast<int>(it - edges_.begin());
}

int Mesh::find_face(int a, int b, int c) const
{
  std::array<int, 3> key{a, b, c};
  std::sort(key.begin(), key.end());
  auto it = std::lower_bound(faces_.begin(), faces_.end(), key);
  if (it == faces_.end() || *it != key)
    return -1;
  return static_cast<int>(it - faces_.begin());
}

Vec3 Mesh::face_normal(int f) const
{
  const auto& fv = faces_[f];
  const Vec3& a = vertices_[fv[0]];
  return (vertices_[fv[1]] - a).cross(vertices_[fv[2]] - a);
}

double Mesh::mesh_size() const
{
  double h = 0.0;
  for (const auto& cell : cells_)
    for (const auto& le : kTetEdges)
      h = std::max(h, (vertices_[cell[le[0]]] - vertices_[cell[le[1]]]).norm());
  return h;
}

Mesh build_structured_cube(int n)
{
  if (n < 1)
    throw std::invalid_argument("build_structured_cube: n must be >= 1");
  const int np = n + 1;
  auto index = [np](int i, int j, int k) { return i + np * (j + np * k); };

  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>(np) * np * np);
  for (int k = 0; k < np; ++k)
    for (int j = 0; j < np; ++j)
      for (int i = 0; i < np; ++i)
        vertices.emplace_back(double(i) / n, double(j) / n, double(k) / n);

  // The six monotone lattice paths from (0,0,0) to (1,1,1).
  static constexpr std::array<std::array<int, 3>, 6> paths = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

  std::vector<std::array<int, 4>> cells;
  cells.reserve(6 * static_cast<std::size_t>(n) * n * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (const auto& path : paths)
        {
          std::array<int, 3> p{i, j, k};
          std::array<int, 4> cell{};
          cell[0] = index(p[0], p[1], p[2]);
          for (int s = 0; s < 3; ++s)
          {
            ++p[path[s]];
            cell[s + 1] = index(p[0], p[1], p[2]);
          }
          cells.push_back(cell);
        }
  return Mesh::from_cells(std::move(vertices), std::move(cells));
}

CellGeometry cell_geometry(const Mesh& mesh, int cell)
{
  if (cell < 0 || cell >= mesh.num_cells())
    throw std::out_of_range("cell_geometry: invalid cell index");
  const auto& v = mesh.cell(cell);
  CellGeometry g;
  g.origin = mesh.vertex(v[0]);
  for (int d = 0; d < 3; ++d)
    g.jacobian.col(d) = mesh.vertex(v[d + 1]) - g.origin;
  g.det = g.jacobian.determinant();
  if (!(g.det > 0.0))
    throw std::runtime_error("cell_geometry: degenerate cell "
                             + std::to_string(cell));
  g.inverse_transpose = g.jacobian.inverse().transpose();
  g.volume = g.det / 6.0;
  return g;
}

BoundaryEntities boundary_entities(const Mesh& mesh)
{
  BoundaryEntities b;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.is_boundary_vertex(v))
      b.vertices.push_back(v);
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (mesh.is_boundary_edge(e))
      b.edges.push_back(e);
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (mesh.is_boundary_face(f))
      b.faces.push_back(f);
  return b;
}

Mesh read_gmsh(std::istream& in)
{
  std::string line;
  auto expect = [&](const std::string& tag) {
    while (std::getline(in, line))
    {
      if (!line.empty() && line.back() == '\r')
        line.pop_back();
      if (line == tag)
        return;
    }
    throw std::runtime_error("gmsh: missing section " + tag);
  };

  expect("$MeshFormat");
  double version = 0.0;
  int file_type = -1, data_size = 0;
  if (!(in >> version >> file_type >> data_size))
    throw std::runtime_error("gmsh: malformed $MeshFormat");
  if (version < 2.0 || version >= 3.0 || file_type != 0)
    throw std::runtime_error("gmsh: only MSH 2.x ASCII is supported");

  expect("$Nodes");
  std::size_t num_nodes = 0;
  in >> num_nodes;
  std::unordered_map<long, int> node_index;
  std::vector<Vec3> vertices;
  vertices.reserve(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i)
  {
    long id;
    Vec3 x;
    if (!(in >> id >> x[0] >> x[1] >> x[2]))
      throw std::runtime_error("gmsh: malformed node record");
    node_index[id] = static_cast<int>(vertices.size());
    vertices.push_back(x);
  }

  expect("$Elements");
  std::size_t num_elements = 0;
  in >> num_elements;
  std::vector<std::array<int, 4>> cells;
  for (std::size_t i = 0; i < num_elements; ++i)
  {
    if (!std::getline(in >> std::ws, line))
      throw std::runtime_error("gmsh: truncated $Elements");
    std::istringstream rec(line);
    long id;
    int type, ntags;
    rec >> id >> type >> ntags;
    for (int t = 0; t < ntags; ++t)
    {
      long tag;
      rec >> tag;
    }
    if (!rec)
      throw std::runtime_error("gmsh: malformed element record");
    if (type == 15 || type == 1 || type == 2)
      continue;
    if (type != 4)
      throw std::runtime_error("gmsh: unsupported element type "
                               + std::to_string(type));
    std::array<int, 4> cell{};
    for (int& v : cell)
    {
      long node;
      if (!(rec >> node) || !node_index.count(node))
        throw std::runtime_error("gmsh: element references unknown node");
      v = node_index.at(node);
    }
    cells.push_back(cell);
  }
  if (cells.empty())
    throw std::runtime_error("gmsh: no tetrahedra found");

  // Drop nodes not referenced by any tetrahedron (e.g. geometry points).
  std::vector<int> remap(vertices.size(), -1);
  std::vector<Vec3> used;
  for (auto& cell : cells)
    for (int& v : cell)
    {
      if (remap[v] < 0)
      {
        remap[v] = static_cast<int>(used.size());
        used.push_back(vertices[v]);
      }
      v = remap[v];
    }
  return Mesh::from_cells(std::move(used), std::move(cells), true);
}

Mesh read_gmsh(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("gmsh: cannot open " + path);
  return read_gmsh(in);
}

} // namespace mhd
