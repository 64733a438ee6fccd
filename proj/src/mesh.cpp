#include "dgpenalty/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "dgpenalty/error.hpp"

namespace dgp {

const char* to_string(BoundaryTag tag) noexcept
{
    switch (tag) {
    case BoundaryTag::DirichletP: return "DirichletP";
    case BoundaryTag::NeumannQ: return "NeumannQ";
    case BoundaryTag::DirichletU: return "DirichletU";
    case BoundaryTag::TractionT: return "TractionT";
    }
    return "?";
}

BoundaryTag boundary_tag_from_string(const std::string& name)
{
    for (auto tag : {BoundaryTag::DirichletP, BoundaryTag::NeumannQ, BoundaryTag::DirichletU,
                     BoundaryTag::TractionT}) {
        if (name == to_string(tag)) {
            return tag;
        }
    }
    throw Error(ErrorKind::InvalidArgument, "unknown boundary tag '" + name + "'");
}

BoundaryTags default_tags(const Point&, const Point&) { return {}; }

Mesh::Mesh(int dim, std::vector<Point> vertices, std::vector<std::array<int, 3>> cells,
           const BoundaryTagger& tagger)
    : dim_(dim), vertices_(std::move(vertices)), cells_(std::move(cells))
{
    if (dim_ != 1 && dim_ != 2) {
        throw Error(ErrorKind::InvalidArgument, "mesh dimension must be 1 or 2");
    }
    for (const auto& c : cells_) {
        for (int i = 0; i < cell_vertex_count(); ++i) {
            if (c[static_cast<std::size_t>(i)] < 0 || c[static_cast<std::size_t>(i)] >= n_vertices()) {
                throw Error(ErrorKind::InvalidArgument, "cell references unknown vertex");
            }
        }
    }
    compute_geometry();
    build_faces(tagger ? tagger : BoundaryTagger(default_tags));
}

void Mesh::compute_geometry()
{
    cell_measure_.resize(cells_.size());
    for (int c = 0; c < n_cells(); ++c) {
        const auto& v = cells_[static_cast<std::size_t>(c)];
        double m = 0.0;
        if (dim_ == 1) {
            m = vertex(v[1]).x() - vertex(v[0]).x();
        } else {
            const Point a = vertex(v[1]) - vertex(v[0]);
            const Point b = vertex(v[2]) - vertex(v[0]);
            m = 0.5 * (a.x() * b.y() - a.y() * b.x());
        }
        if (!(m > 0.0)) {
            throw Error(ErrorKind::InvalidArgument,
                        "cell " + std::to_string(c) + " has nonpositive measure (check orientation)");
        }
        cell_measure_[static_cast<std::size_t>(c)] = m;
    }
}

void Mesh::build_faces(const BoundaryTagger& tagger)
{
    faces_.clear();
    cell_faces_.assign(cells_.size(), {});
    std::map<std::pair<int, int>, int> lookup;

    for (int c = 0; c < n_cells(); ++c) {
        const auto& v = cells_[static_cast<std::size_t>(c)];
        const int n_local = dim_ == 1 ? 2 : 3;
        for (int l = 0; l < n_local; ++l) {
            std::pair<int, int> key;
            std::array<int, 2> fv{};
            Point normal;
            double measure = 1.0;
            if (dim_ == 1) {
                fv = {v[static_cast<std::size_t>(l)], -1};
                key = {fv[0], -1};
                normal = Point(l == 0 ? -1.0 : 1.0, 0.0);
            } else {
                const int a = v[static_cast<std::size_t>(l)];
                const int b = v[static_cast<std::size_t>((l + 1) % 3)];
                fv = {a, b};
                key = {std::min(a, b), std::max(a, b)};
                const Point d = vertex(b) - vertex(a);
                measure = d.norm();
                normal = Point(d.y(), -d.x()) / measure; // outward for CCW cells
            }
            auto it = lookup.find(key);
            if (it == lookup.end()) {
                Face f;
                f.id = static_cast<int>(faces_.size());
                f.vertices = fv;
                f.measure = measure;
                f.normal = normal;
                f.plus = c;
                lookup.emplace(key, f.id);
                faces_.push_back(f);
                cell_faces_[static_cast<std::size_t>(c)].push_back(f.id);
            } else {
                Face& f = faces_[static_cast<std::size_t>(it->second)];
                if (f.minus >= 0) {
                    throw Error(ErrorKind::InvalidArgument, "face shared by more than two cells");
                }
                f.minus = c;
                cell_faces_[static_cast<std::size_t>(c)].push_back(f.id);
            }
        }
    }
    for (auto& f : faces_) {
        if (f.is_boundary()) {
            f.tags = tagger(face_midpoint(f.id), f.normal);
        }
    }
}

double Mesh::cell_diameter(int c) const
{
    const auto& v = cell(c);
    double d = 0.0;
    for (int i = 0; i < cell_vertex_count(); ++i) {
        for (int j = i + 1; j < cell_vertex_count(); ++j) {
            d = std::max(d, (vertex(v[static_cast<std::size_t>(i)]) - vertex(v[static_cast<std::size_t>(j)])).norm());
        }
    }
    return d;
}

Point Mesh::cell_centroid(int c) const
{
    const auto& v = cell(c);
    Point s = Point::Zero();
    for (int i = 0; i < cell_vertex_count(); ++i) {
        s += vertex(v[static_cast<std::size_t>(i)]);
    }
    return s / cell_vertex_count();
}

Point Mesh::face_midpoint(int f) const
{
    const Face& face = faces_.at(static_cast<std::size_t>(f));
    if (dim_ == 1) {
        return vertex(face.vertices[0]);
    }
    return 0.5 * (vertex(face.vertices[0]) + vertex(face.vertices[1]));
}

double Mesh::h() const
{
    double h = 0.0;
    for (int c = 0; c < n_cells(); ++c) {
        h = std::max(h, cell_diameter(c));
    }
    return h;
}

int Mesh::n_interior_faces() const
{
    return static_cast<int>(std::count_if(faces_.begin(), faces_.end(),
                                          [](const Face& f) { return !f.is_boundary(); }));
}

int Mesh::n_boundary_faces() const { return n_faces() - n_interior_faces(); }

Eigen::Matrix2d Mesh::jacobian(int c) const
{
    const auto& v = cell(c);
    Eigen::Matrix2d J = Eigen::Matrix2d::Identity();
    J.col(0) = vertex(v[1]) - vertex(v[0]);
    if (dim_ == 2) {
        J.col(1) = vertex(v[2]) - vertex(v[0]);
    }
    return J;
}

// Text format:
//   dgpenalty-mesh 1
//   dim <d>
//   vertices <n>        then n lines "x y"
//   cells <m>           then m lines of d+1 vertex ids
//   boundary <k>        then k lines "<face vertex ids (d of them)> <flow tag> <mech tag>"
// Interior faces, measures and normals are recomputed on load.
void Mesh::dump(std::ostream& os) const
{
    std::ostringstream buf;
    buf.precision(17);
    buf << "dgpenalty-mesh 1\n";
    buf << "dim " << dim_ << "\n";
    buf << "vertices " << n_vertices() << "\n";
    for (const auto& p : vertices_) {
        buf << p.x() << " " << p.y() << "\n";
    }
    buf << "cells " << n_cells() << "\n";
    for (const auto& c : cells_) {
        for (int i = 0; i < cell_vertex_count(); ++i) {
            buf << (i ? " " : "") << c[static_cast<std::size_t>(i)];
        }
        buf << "\n";
    }
    buf << "boundary " << n_boundary_faces() << "\n";
    for (const auto& f : faces_) {
        if (!f.is_boundary()) {
            continue;
        }
        buf << f.vertices[0];
        if (dim_ == 2) {
            buf << " " << f.vertices[1];
        }
        buf << " " << to_string(f.tags.flow) << " " << to_string(f.tags.mech) << "\n";
    }
    os << buf.str();
}

Mesh Mesh::load(std::istream& is)
{
    auto expect = [&is](const std::string& word) {
        std::string got;
        if (!(is >> got) || got != word) {
            throw Error(ErrorKind::Io, "mesh file: expected '" + word + "', got '" + got + "'");
        }
    };
    expect("dgpenalty-mesh");
    int version = 0;
    is >> version;
    if (version != 1) {
        throw Error(ErrorKind::Io, "mesh file: unsupported version");
    }
    int dim = 0;
    expect("dim");
    is >> dim;
    int nv = 0;
    expect("vertices");
    is >> nv;
    std::vector<Point> vertices(static_cast<std::size_t>(nv));
    for (auto& p : vertices) {
        is >> p.x() >> p.y();
    }
    int nc = 0;
    expect("cells");
    is >> nc;
    std::vector<std::array<int, 3>> cells(static_cast<std::size_t>(nc), {-1, -1, -1});
    for (auto& c : cells) {
        for (int i = 0; i <= dim; ++i) {
            is >> c[static_cast<std::size_t>(i)];
        }
    }
    int nb = 0;
    expect("boundary");
    is >> nb;
    std::map<std::pair<int, int>, BoundaryTags> tags;
    for (int i = 0; i < nb; ++i) {
        int a = -1;
        int b = -1;
        is >> a;
        if (dim == 2) {
            is >> b;
        }
        std::string flow;
        std::string mech;
        is >> flow >> mech;
        tags[{std::min(a, b == -1 ? a : b), b == -1 ? -1 : std::max(a, b)}] =
            BoundaryTags{boundary_tag_from_string(flow), boundary_tag_from_string(mech)};
    }
    if (!is) {
        throw Error(ErrorKind::Io, "mesh file: truncated");
    }
    Mesh mesh(dim, std::move(vertices), std::move(cells));
    for (auto& f : mesh.faces_) {
        if (!f.is_boundary()) {
            continue;
        }
        const std::pair<int, int> key =
            dim == 1 ? std::pair{f.vertices[0], -1}
                     : std::pair{std::min(f.vertices[0], f.vertices[1]), std::max(f.vertices[0], f.vertices[1])};
        auto it = tags.find(key);
        if (it == tags.end()) {
            throw Error(ErrorKind::Io, "mesh file: boundary face without tags");
        }
        f.tags = it->second;
    }
    return mesh;
}

Mesh build_unit_interval(int n_cells, const BoundaryTagger& tagger)
{
    if (n_cells < 1) {
        throw Error(ErrorKind::InvalidArgument, "n_cells must be >= 1");
    }
    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>(n_cells) + 1);
    for (int i = 0; i <= n_cells; ++i) {
        vertices.emplace_back(static_cast<double>(i) / n_cells, 0.0);
    }
    std::vector<std::array<int, 3>> cells;
    cells.reserve(static_cast<std::size_t>(n_cells));
    for (int i = 0; i < n_cells; ++i) {
        cells.push_back({i, i + 1, -1});
    }
    return Mesh(1, std::move(vertices), std::move(cells), tagger);
}

Mesh build_unit_square(int n, const BoundaryTagger& tagger)
{
    if (n < 1) {
        throw Error(ErrorKind::InvalidArgument, "n_per_side must be >= 1");
    }
    const int np = n + 1;
    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>(np * np));
    for (int j = 0; j < np; ++j) {
        for (int i = 0; i < np; ++i) {
            vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
        }
    }
    auto vid = [np](int i, int j) { return j * np + i; };
    std::vector<std::array<int, 3>> cells;
    cells.reserve(static_cast<std::size_t>(2 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = vid(i, j);
            const int v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1);
            const int v11 = vid(i + 1, j + 1);
            cells.push_back({v00, v10, v11});
            cells.push_back({v00, v11, v01});
        }
    }
    return Mesh(2, std::move(vertices), std::move(cells), tagger);
}

double face_characteristic_length(const Mesh& mesh, int face_id)
{
    const Face& f = mesh.face(face_id);
    if (f.is_boundary()) {
        return mesh.cell_measure(f.plus) / f.measure;
    }
    return (mesh.cell_measure(f.plus) + mesh.cell_measure(f.minus)) / (2.0 * f.measure);
}

} // namespace dgp
