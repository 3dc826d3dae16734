#include "roomimp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <string>

#include <Eigen/Dense>

#include "roomimp/errors.hpp"

namespace roomimp {
namespace {

double distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Point subtract(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Point cross(const Point& a, const Point& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(const Point& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

double triangle_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * norm(cross(subtract(b, a), subtract(c, a)));
}

// Vertex offsets of the Kuhn simplices of the unit cell: one monotone lattice
// path from corner 0 to the opposite corner per axis permutation.
std::vector<std::array<std::array<int, 3>, 4>> kuhn_simplices(int dim) {
  std::vector<int> perm(dim);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::array<std::array<int, 3>, 4>> out;
  do {
    std::array<std::array<int, 3>, 4> simplex{};
    std::array<int, 3> corner{0, 0, 0};
    simplex[0] = corner;
    for (int step = 0; step < dim; ++step) {
      corner[perm[step]] = 1;
      simplex[step + 1] = corner;
    }
    out.push_back(simplex);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

}  // namespace

void PatchLayout::validate(int dim) const {
  std::set<std::pair<int, int>> seen;
  for (const auto& face : robin_faces) {
    if (face.axis < 0 || face.axis >= dim) {
      throw InvalidArgument("patch axis " + std::to_string(face.axis) +
                            " is not an axis of a " + std::to_string(dim) + "D box");
    }
    if (!seen.emplace(face.axis, face.side == Side::kLow ? 0 : 1).second) {
      throw InvalidArgument("box face assigned to more than one patch");
    }
  }
}

SimplicialMesh::SimplicialMesh(int dim, std::array<double, 3> extents, std::array<int, 3> cells,
                               const PatchLayout& layout)
    : dim_(dim), extents_(extents), cells_(cells), layout_(layout) {
  if (dim != 2 && dim != 3) throw InvalidArgument("mesh dimension must be 2 or 3");
  for (int a = 0; a < dim; ++a) {
    if (!(extents_[a] > 0.0) || !std::isfinite(extents_[a])) {
      throw InvalidArgument("box extents must be positive");
    }
    if (cells_[a] < 1) throw InvalidArgument("cell counts must be at least 1");
  }
  for (int a = dim; a < 3; ++a) {
    extents_[a] = 0.0;
    cells_[a] = 0;
  }
  layout_.validate(dim);
  build_vertices();
  build_elements();
  build_facets();
}

void SimplicialMesh::build_vertices() {
  const int nk = dim_ == 3 ? cells_[2] + 1 : 1;
  vertices_.reserve(static_cast<std::size_t>(cells_[0] + 1) * (cells_[1] + 1) * nk);
  for (int k = 0; k < nk; ++k) {
    for (int j = 0; j <= cells_[1]; ++j) {
      for (int i = 0; i <= cells_[0]; ++i) {
        // Grid coordinates are formed as index * L / n so the far faces land
        // exactly on L.
        Point p{extents_[0] * i / cells_[0], extents_[1] * j / cells_[1],
                dim_ == 3 ? extents_[2] * k / cells_[2] : 0.0};
        vertices_.push_back(p);
      }
    }
  }
}

void SimplicialMesh::build_elements() {
  const auto local = kuhn_simplices(dim_);
  const int nk = dim_ == 3 ? cells_[2] : 1;
  elements_.reserve(static_cast<std::size_t>(cells_[0]) * cells_[1] * nk * local.size());
  for (int k = 0; k < nk; ++k) {
    for (int j = 0; j < cells_[1]; ++j) {
      for (int i = 0; i < cells_[0]; ++i) {
        for (const auto& simplex : local) {
          std::array<int, 4> element{-1, -1, -1, -1};
          for (int v = 0; v <= dim_; ++v) {
            const auto& o = simplex[v];
            element[v] = vertex_index(i + o[0], j + o[1], k + o[2]);
          }
          elements_.push_back(element);
          if (signed_volume(elements_.size() - 1) < 0.0) {
            std::swap(elements_.back()[dim_ - 1], elements_.back()[dim_]);
          }
        }
      }
    }
  }
  h_ = 0.0;
  for (std::size_t e = 0; e < elements_.size(); ++e) h_ = std::max(h_, diameter(e));
}

void SimplicialMesh::build_facets() {
  const int nx = cells_[0] + 1, ny = cells_[1] + 1;
  auto grid_coord = [&](int v, int axis) {
    switch (axis) {
      case 0: return v % nx;
      case 1: return (v / nx) % ny;
      default: return v / (nx * ny);
    }
  };
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const auto& element = elements_[e];
    for (int omit = 0; omit <= dim_; ++omit) {
      std::array<int, 3> facet{-1, -1, -1};
      int n = 0;
      for (int v = 0; v <= dim_; ++v) {
        if (v != omit) facet[n++] = element[v];
      }
      for (int axis = 0; axis < dim_; ++axis) {
        for (Side side : {Side::kLow, Side::kHigh}) {
          const int target = side == Side::kLow ? 0 : cells_[axis];
          bool on_face = true;
          for (int v = 0; v < dim_; ++v) on_face = on_face && grid_coord(facet[v], axis) == target;
          if (!on_face) continue;
          int tag = kNeumannTag;
          for (std::size_t p = 0; p < layout_.robin_faces.size(); ++p) {
            const auto& face = layout_.robin_faces[p];
            if (face.axis == axis && face.side == side) tag = static_cast<int>(p) + 1;
          }
          facets_.push_back({facet, tag, static_cast<int>(e)});
        }
      }
    }
  }
}

double SimplicialMesh::cell_size() const {
  double s = 0.0;
  for (int a = 0; a < dim_; ++a) s = std::max(s, spacing(a));
  return s;
}

double SimplicialMesh::box_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= extents_[a];
  return v;
}

double SimplicialMesh::signed_volume(std::size_t element) const {
  const auto& el = elements_[element];
  const Point& p0 = vertices_[el[0]];
  const Point e1 = subtract(vertices_[el[1]], p0);
  const Point e2 = subtract(vertices_[el[2]], p0);
  if (dim_ == 2) return 0.5 * (e1[0] * e2[1] - e1[1] * e2[0]);
  const Point e3 = subtract(vertices_[el[3]], p0);
  const Point c = cross(e1, e2);
  return (c[0] * e3[0] + c[1] * e3[1] + c[2] * e3[2]) / 6.0;
}

double SimplicialMesh::diameter(std::size_t element) const {
  const auto& el = elements_[element];
  double d = 0.0;
  for (int a = 0; a <= dim_; ++a) {
    for (int b = a + 1; b <= dim_; ++b) d = std::max(d, distance(vertices_[el[a]], vertices_[el[b]]));
  }
  return d;
}

double SimplicialMesh::inball_diameter(std::size_t element) const {
  const auto& el = elements_[element];
  const double volume = std::abs(signed_volume(element));
  double boundary = 0.0;
  if (dim_ == 2) {
    for (int a = 0; a < 3; ++a) boundary += distance(vertices_[el[a]], vertices_[el[(a + 1) % 3]]);
    return 2.0 * (2.0 * volume / boundary);
  }
  for (int omit = 0; omit < 4; ++omit) {
    std::array<int, 3> f{};
    int n = 0;
    for (int v = 0; v < 4; ++v) {
      if (v != omit) f[n++] = el[v];
    }
    boundary += triangle_area(vertices_[f[0]], vertices_[f[1]], vertices_[f[2]]);
  }
  return 2.0 * (3.0 * volume / boundary);
}

double SimplicialMesh::facet_measure(const BoundaryFacet& facet) const {
  const auto& v = facet.vertices;
  if (dim_ == 2) return distance(vertices_[v[0]], vertices_[v[1]]);
  return triangle_area(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]);
}

double SimplicialMesh::patch_measure(int tag) const {
  double total = 0.0;
  for (const auto& f : facets_) {
    if (f.tag == tag) total += facet_measure(f);
  }
  return total;
}

bool SimplicialMesh::contains(const Point& x) const {
  for (int a = 0; a < dim_; ++a) {
    if (!(x[a] >= 0.0 && x[a] <= extents_[a])) return false;
  }
  return true;
}

bool SimplicialMesh::strictly_inside(const Point& x) const {
  for (int a = 0; a < dim_; ++a) {
    if (!(x[a] > 0.0 && x[a] < extents_[a])) return false;
  }
  return true;
}

double SimplicialMesh::distance_to_boundary(const Point& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim_; ++a) d = std::min({d, x[a], extents_[a] - x[a]});
  return d;
}

SimplicialMesh build_box_mesh(std::span<const double> extents, double h_target,
                              const PatchLayout& layout) {
  if (!(h_target > 0.0) || !std::isfinite(h_target)) {
    throw InvalidArgument("h_target must be positive");
  }
  if (extents.size() != 2 && extents.size() != 3) {
    throw InvalidArgument("box extents must have 2 or 3 entries");
  }
  std::array<int, 3> cells{0, 0, 0};
  for (std::size_t a = 0; a < extents.size(); ++a) {
    if (!(extents[a] > 0.0) || !std::isfinite(extents[a])) {
      throw InvalidArgument("box extents must be positive");
    }
    cells[a] = static_cast<int>(std::ceil(extents[a] / h_target));
  }
  return build_box_mesh_cells(extents, std::span<const int>(cells.data(), extents.size()), layout);
}

SimplicialMesh build_box_mesh_cells(std::span<const double> extents, std::span<const int> cells,
                                    const PatchLayout& layout) {
  if ((extents.size() != 2 && extents.size() != 3) || cells.size() != extents.size()) {
    throw InvalidArgument("box extents and cell counts must both have 2 or 3 entries");
  }
  std::array<double, 3> e{0.0, 0.0, 0.0};
  std::array<int, 3> n{0, 0, 0};
  for (std::size_t a = 0; a < extents.size(); ++a) {
    e[a] = extents[a];
    n[a] = cells[a];
  }
  return SimplicialMesh(static_cast<int>(extents.size()), e, n, layout);
}

SimplicialMesh refine_uniformly(const SimplicialMesh& mesh, int levels) {
  if (levels < 0) throw InvalidArgument("refinement level must be nonnegative");
  std::array<int, 3> cells = mesh.cells();
  for (int a = 0; a < mesh.dim(); ++a) cells[a] <<= levels;
  return SimplicialMesh(mesh.dim(), mesh.extents(), cells, mesh.layout());
}

PointLocation locate_point(const SimplicialMesh& mesh, const Point& x) {
  if (!mesh.contains(x)) throw OutOfDomain("point lies outside the room");
  const int dim = mesh.dim();
  constexpr double kTol = 1e-12;

  // Cells whose closed box contains x; at most two per axis.
  std::array<std::array<int, 2>, 3> candidates{};
  std::array<int, 3> counts{1, 1, 1};
  for (int a = 0; a < 3; ++a) candidates[a] = {0, 0};
  for (int a = 0; a < dim; ++a) {
    const double t = x[a] / mesh.spacing(a);
    const int n = mesh.cells()[a];
    int c = std::clamp(static_cast<int>(std::floor(t)), 0, n - 1);
    counts[a] = 0;
    for (int cand : {c - 1, c, c + 1}) {
      if (cand < 0 || cand >= n) continue;
      if (t >= cand - kTol && t <= cand + 1 + kTol && counts[a] < 2) candidates[a][counts[a]++] = cand;
    }
  }

  const auto& vertices = mesh.vertices();
  const auto& elements = mesh.elements();
  const std::size_t per_cell = mesh.simplices_per_cell();
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::array<double, 4> best_bary{};

  for (int ck = 0; ck < counts[2]; ++ck) {
    for (int cj = 0; cj < counts[1]; ++cj) {
      for (int ci = 0; ci < counts[0]; ++ci) {
        const std::size_t cell =
            candidates[0][ci] +
            static_cast<std::size_t>(mesh.cells()[0]) *
                (candidates[1][cj] + static_cast<std::size_t>(mesh.cells()[1]) * candidates[2][ck]);
        for (std::size_t s = 0; s < per_cell; ++s) {
          const std::size_t e = cell * per_cell + s;
          if (e >= best) continue;
          const auto& el = elements[e];
          const Point& p0 = vertices[el[0]];
          Eigen::Matrix3d jac = Eigen::Matrix3d::Identity();
          Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
          for (int a = 0; a < dim; ++a) {
            for (int v = 0; v < dim; ++v) jac(a, v) = vertices[el[v + 1]][a] - p0[a];
            rhs[a] = x[a] - p0[a];
          }
          Eigen::Vector3d lam = Eigen::Vector3d::Zero();
          lam.head(dim) = jac.topLeftCorner(dim, dim).partialPivLu().solve(rhs.head(dim));
          std::array<double, 4> bary{};
          double rest = 1.0;
          for (int v = 0; v < dim; ++v) {
            bary[v + 1] = lam[v];
            rest -= lam[v];
          }
          bary[0] = rest;
          if (*std::min_element(bary.begin(), bary.begin() + dim + 1) < -kTol) continue;
          best = e;
          best_bary = bary;
        }
      }
    }
  }
  if (best == std::numeric_limits<std::size_t>::max()) {
    throw OutOfDomain("point could not be located in the mesh");
  }
  // Clip round-off negatives and renormalize.
  double sum = 0.0;
  for (int v = 0; v <= dim; ++v) {
    best_bary[v] = std::max(best_bary[v], 0.0);
    sum += best_bary[v];
  }
  for (int v = 0; v <= dim; ++v) best_bary[v] /= sum;
  return {best, best_bary};
}

void write_mesh_text(const SimplicialMesh& mesh, std::ostream& out) {
  const int dim = mesh.dim();
  out << "# roomimp mesh dim=" << dim << " vertices=" << mesh.vertex_count()
      << " elements=" << mesh.element_count() << " h=" << mesh.h() << "\n";
  out << "# vertices\n";
  out.precision(17);
  for (const auto& v : mesh.vertices()) {
    for (int a = 0; a < dim; ++a) out << (a ? " " : "") << v[a];
    out << "\n";
  }
  out << "# elements\n";
  for (const auto& el : mesh.elements()) {
    for (int v = 0; v <= dim; ++v) out << (v ? " " : "") << el[v];
    out << "\n";
  }
  std::set<int> tags;
  for (const auto& f : mesh.boundary_facets()) tags.insert(f.tag);
  for (int tag : tags) {
    out << "# patch " << tag << "\n";
    for (const auto& f : mesh.boundary_facets()) {
      if (f.tag != tag) continue;
      for (int v = 0; v < dim; ++v) out << (v ? " " : "") << f.vertices[v];
      out << "\n";
    }
  }
}

}  // namespace roomimp
