#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace roomimp {

using Point = std::array<double, 3>;

enum class Side { kLow, kHigh };

/// A face of the box, selected by axis and by which end of the axis it sits.
struct BoxFace {
  int axis = 0;
  Side side = Side::kLow;
};

/// Robin patches, in order. Patch i (0-based) carries tag i + 1; every other
/// boundary facet is tagged kNeumannTag.
struct PatchLayout {
  std::vector<BoxFace> robin_faces;

  int robin_patch_count() const { return static_cast<int>(robin_faces.size()); }
  void validate(int dim) const;
};

inline constexpr int kNeumannTag = 0;

struct BoundaryFacet {
  std::array<int, 3> vertices{-1, -1, -1};  // dim entries are used
  int tag = kNeumannTag;
  int element = -1;
};

/// Structured simplicial mesh of the box [0, L_0] x ... x [0, L_{dim-1}].
///
/// Each grid cell is split into dim! simplices along its main diagonal (Kuhn
/// split), so neighbouring cells conform. Elements are stored cell by cell;
/// element e lives in cell e / simplices_per_cell().
class SimplicialMesh {
 public:
  SimplicialMesh(int dim, std::array<double, 3> extents, std::array<int, 3> cells,
                 const PatchLayout& layout);

  int dim() const { return dim_; }
  int vertices_per_element() const { return dim_ + 1; }
  int simplices_per_cell() const { return dim_ == 2 ? 2 : 6; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t element_count() const { return elements_.size(); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 4>>& elements() const { return elements_; }
  const std::vector<BoundaryFacet>& boundary_facets() const { return facets_; }
  const PatchLayout& layout() const { return layout_; }

  const std::array<double, 3>& extents() const { return extents_; }
  const std::array<int, 3>& cells() const { return cells_; }
  /// Grid spacing along the given axis.
  double spacing(int axis) const { return extents_[axis] / cells_[axis]; }
  /// Largest grid spacing over the axes; bounded by the requested h_target.
  double cell_size() const;
  /// Maximum element diameter.
  double h() const { return h_; }
  double box_volume() const;

  /// Signed volume (area in 2D) under the right-handed orientation.
  double signed_volume(std::size_t element) const;
  double diameter(std::size_t element) const;
  /// Diameter of the largest inscribed ball.
  double inball_diameter(std::size_t element) const;
  /// Length (2D) or area (3D) of a boundary facet.
  double facet_measure(const BoundaryFacet& facet) const;
  /// Total measure of the facets carrying the tag.
  double patch_measure(int tag) const;

  bool contains(const Point& x) const;
  bool strictly_inside(const Point& x) const;
  /// Distance from x to the box boundary (x assumed inside).
  double distance_to_boundary(const Point& x) const;

  int vertex_index(int i, int j, int k) const {
    return i + (cells_[0] + 1) * (j + (cells_[1] + 1) * k);
  }

 private:
  void build_vertices();
  void build_elements();
  void build_facets();

  int dim_;
  std::array<double, 3> extents_;
  std::array<int, 3> cells_;
  PatchLayout layout_;
  std::vector<Point> vertices_;
  std::vector<std::array<int, 4>> elements_;
  std::vector<BoundaryFacet> facets_;
  double h_ = 0.0;
};

/// Builds the structured mesh with ceil(L_a / h_target) cells along axis a.
SimplicialMesh build_box_mesh(std::span<const double> extents, double h_target,
                              const PatchLayout& layout);

/// Builds the structured mesh with an explicit cell count per axis.
SimplicialMesh build_box_mesh_cells(std::span<const double> extents,
                                    std::span<const int> cells, const PatchLayout& layout);

/// Same box and layout with every cell count multiplied by 2^levels.
SimplicialMesh refine_uniformly(const SimplicialMesh& mesh, int levels);

struct PointLocation {
  std::size_t element = 0;
  std::array<double, 4> barycentric{};  // dim + 1 entries are used
};

/// Finds the containing element of x. When x lies on shared facets the element
/// with the lowest index wins. Throws OutOfDomain outside the closed box.
PointLocation locate_point(const SimplicialMesh& mesh, const Point& x);

/// Plain-text dump: one vertex per line, one element per line, then one
/// `# patch <tag>` section per boundary tag.
void write_mesh_text(const SimplicialMesh& mesh, std::ostream& out);

}  // namespace roomimp
