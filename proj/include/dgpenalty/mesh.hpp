#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dgp {

using Point = Eigen::Vector2d;

/// Boundary condition tag attached to a boundary face. A face carries one
/// flow tag (DirichletP / NeumannQ) and one mechanics tag (DirichletU /
/// TractionT); the two problems read their own tag.
enum class BoundaryTag { DirichletP, NeumannQ, DirichletU, TractionT };

const char* to_string(BoundaryTag tag) noexcept;
BoundaryTag boundary_tag_from_string(const std::string& name);

struct BoundaryTags {
    BoundaryTag flow = BoundaryTag::DirichletP;
    BoundaryTag mech = BoundaryTag::DirichletU;
};

/// Chooses the tags for a boundary face from its midpoint and outward normal.
using BoundaryTagger = std::function<BoundaryTags(const Point& midpoint, const Point& normal)>;

struct Face {
    int id = 0;
    std::array<int, 2> vertices{-1, -1}; // 1D faces use vertices[0] only
    double measure = 0.0;                // 1 for point faces
    Point normal = Point::Zero();        // outward from `plus`
    int plus = -1;
    int minus = -1; // -1 on boundary faces
    BoundaryTags tags{};

    [[nodiscard]] bool is_boundary() const noexcept { return minus < 0; }
};

/// Simplicial mesh of the unit interval or unit square. Immutable after
/// construction; cells in 2D are counter-clockwise triangles.
class Mesh {
public:
    Mesh(int dim, std::vector<Point> vertices, std::vector<std::array<int, 3>> cells,
         const BoundaryTagger& tagger = {});

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int n_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
    [[nodiscard]] int n_cells() const noexcept { return static_cast<int>(cells_.size()); }
    [[nodiscard]] int n_faces() const noexcept { return static_cast<int>(faces_.size()); }
    /// Vertices per cell: 2 in 1D, 3 in 2D.
    [[nodiscard]] int cell_vertex_count() const noexcept { return dim_ + 1; }

    [[nodiscard]] const Point& vertex(int v) const { return vertices_[static_cast<std::size_t>(v)]; }
    [[nodiscard]] const std::vector<Point>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::array<int, 3>& cell(int c) const { return cells_[static_cast<std::size_t>(c)]; }
    [[nodiscard]] const Face& face(int f) const { return faces_.at(static_cast<std::size_t>(f)); }
    [[nodiscard]] const std::vector<Face>& faces() const noexcept { return faces_; }
    [[nodiscard]] const std::vector<int>& cell_faces(int c) const { return cell_faces_[static_cast<std::size_t>(c)]; }

    [[nodiscard]] double cell_measure(int c) const { return cell_measure_[static_cast<std::size_t>(c)]; }
    [[nodiscard]] double cell_diameter(int c) const;
    [[nodiscard]] Point cell_centroid(int c) const;
    [[nodiscard]] Point face_midpoint(int f) const;
    /// max over cells of the cell diameter
    [[nodiscard]] double h() const;

    [[nodiscard]] int n_interior_faces() const;
    [[nodiscard]] int n_boundary_faces() const;

    /// Affine map x = origin + J * xi from the reference simplex to cell c.
    [[nodiscard]] Eigen::Matrix2d jacobian(int c) const;

    void dump(std::ostream& os) const;
    static Mesh load(std::istream& is);

private:
    Mesh() = default;
    void build_faces(const BoundaryTagger& tagger);
    void compute_geometry();

    int dim_ = 0;
    std::vector<Point> vertices_;
    std::vector<std::array<int, 3>> cells_;
    std::vector<double> cell_measure_;
    std::vector<Face> faces_;
    std::vector<std::vector<int>> cell_faces_;
};

/// All boundary faces DirichletP / DirichletU.
BoundaryTags default_tags(const Point& midpoint, const Point& normal);

Mesh build_unit_interval(int n_cells, const BoundaryTagger& tagger = default_tags);
Mesh build_unit_square(int n_per_side, const BoundaryTagger& tagger = default_tags);

/// Characteristic face length used by the penalty term:
/// interior (|T+| + |T-|) / (2 |e|), boundary |T| / |e|.
double face_characteristic_length(const Mesh& mesh, int face_id);

} // namespace dgp
