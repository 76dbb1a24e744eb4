#include <fvgrad/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>

namespace fvgrad {

namespace {

Eigen::Vector2d as2(const Point& p) { return {p[0], p[1]}; }

bool is_rectangle(const std::vector<Eigen::Vector2d>& v)
{
    if (v.size() != 4) return false;
    for (std::size_t i = 0; i < 4; ++i) {
        const Eigen::Vector2d a = v[(i + 3) % 4] - v[i];
        const Eigen::Vector2d b = v[(i + 1) % 4] - v[i];
        if (std::abs(a.dot(b)) > 1e-12 * a.norm() * b.norm()) return false;
    }
    return true;
}

} // namespace

PolygonGeometry polygon_geometry(const std::vector<Eigen::Vector2d>& v)
{
    PolygonGeometry g;
    const std::size_t n = v.size();
    if (n < 3) return g;
    // Shifting to the first vertex keeps the shoelace sums well conditioned.
    const Eigen::Vector2d o = v[0];
    double a2 = 0;
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d p = v[i] - o;
        const Eigen::Vector2d q = v[(i + 1) % n] - o;
        const double cr = p.x() * q.y() - q.x() * p.y();
        a2 += cr;
        c += cr * (p + q);
    }
    g.area = 0.5 * a2;
    g.centroid = (a2 != 0) ? Eigen::Vector2d(o + c / (3.0 * a2)) : o;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            g.diameter = std::max(g.diameter, (v[i] - v[j]).norm());
    return g;
}

Eigen::Vector2d circumcenter(
    const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c)
{
    const Eigen::Vector2d ab = b - a;
    const Eigen::Vector2d ac = c - a;
    const double det = 2.0 * (ab.x() * ac.y() - ab.y() * ac.x());
    const double scale = ab.squaredNorm() + ac.squaredNorm();
    if (std::abs(det) <= 1e-14 * scale) {
        throw DegenerateInputError("circumcenter of a degenerate (collinear) triangle");
    }
    const double b2 = ab.squaredNorm();
    const double c2 = ac.squaredNorm();
    const Eigen::Vector2d off((ac.y() * b2 - ab.y() * c2) / det, (ab.x() * c2 - ac.x() * b2) / det);
    return a + off;
}

Mesh Mesh::from_geometry(
    int dimension,
    std::vector<Point> vertices,
    std::vector<CellGeometry> cells,
    std::vector<FaceGeometry> faces)
{
    if (dimension < 1) throw DimensionError("mesh dimension must be positive");
    Mesh m;
    m._dimension = dimension;
    m._vertices = std::move(vertices);
    for (const auto& v : m._vertices) {
        if (v.size() != dimension) throw DimensionError("vertex dimension mismatch");
    }

    const Index nc = static_cast<Index>(cells.size());
    m._cells.resize(cells.size());
    for (Index k = 0; k < nc; ++k) {
        auto& src = cells[static_cast<std::size_t>(k)];
        if (src.center.size() != dimension || src.barycenter.size() != dimension) {
            throw DimensionError("cell " + std::to_string(k) + ": point dimension mismatch");
        }
        if (!src.center.allFinite()) {
            throw DegenerateInputError("cell " + std::to_string(k) + ": non-finite center");
        }
        Cell& c = m._cells[static_cast<std::size_t>(k)];
        c.id = k;
        c.vertex_ids = std::move(src.vertex_ids);
        c.center = std::move(src.center);
        c.barycenter = std::move(src.barycenter);
        c.measure = src.measure;
        c.diameter = src.diameter;
    }

    m._edges.resize(faces.size());
    for (std::size_t e = 0; e < faces.size(); ++e) {
        auto& f = faces[e];
        if (f.inner < 0 || f.inner >= nc || (f.outer && (*f.outer < 0 || *f.outer >= nc || *f.outer == f.inner))) {
            throw DegenerateInputError("face " + std::to_string(e) + ": invalid adjacent cell");
        }
        if (f.normal.size() != dimension || f.barycenter.size() != dimension) {
            throw DimensionError("face " + std::to_string(e) + ": point dimension mismatch");
        }
        Edge& s = m._edges[e];
        s.id = static_cast<Index>(e);
        s.vertex_ids = std::move(f.vertex_ids);
        s.measure = f.measure;
        s.barycenter = std::move(f.barycenter);
        s.normal = std::move(f.normal);
        s.inner_cell = f.inner;
        s.outer_cell = f.outer;
        m._cells[static_cast<std::size_t>(f.inner)].edge_ids.push_back(s.id);
        if (f.outer) m._cells[static_cast<std::size_t>(*f.outer)].edge_ids.push_back(s.id);
    }
    m.finalize();
    return m;
}

void Mesh::finalize()
{
    for (auto& s : _edges) {
        const Cell& k = _cells[static_cast<std::size_t>(s.inner_cell)];
        s.d_inner = (s.barycenter - k.center).dot(s.normal);
        if (s.outer_cell) {
            const Cell& l = _cells[static_cast<std::size_t>(*s.outer_cell)];
            s.d_outer = (l.center - s.barycenter).dot(s.normal);
            s.center_distance = (l.center - k.center).norm();
            s.projection.reset();
        } else {
            s.d_outer.reset();
            s.center_distance = s.d_inner;
            s.projection = Point(k.center + s.d_inner * s.normal);
            _cells[static_cast<std::size_t>(s.inner_cell)].is_boundary_adjacent = true;
        }
        s.transmissibility = s.measure / s.center_distance;
    }

    _h = 0;
    _theta = std::numeric_limits<double>::infinity();
    _total_measure = 0;
    for (const auto& c : _cells) {
        _h = std::max(_h, c.diameter);
        _total_measure += c.measure;
        for (Index e : c.edge_ids) {
            _theta = std::min(_theta, edge(e).distance_from(c.id) / c.diameter);
        }
    }
    if (_cells.empty()) _theta = 0;

    // diam(Omega) is attained on the boundary.
    std::vector<Point> pts;
    std::set<Index> seen;
    for (const auto& s : _edges) {
        if (!s.is_boundary()) continue;
        if (s.vertex_ids.empty()) {
            pts.push_back(s.barycenter);
            continue;
        }
        for (Index v : s.vertex_ids) {
            if (seen.insert(v).second) pts.push_back(_vertices[static_cast<std::size_t>(v)]);
        }
    }
    _domain_diameter = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            _domain_diameter = std::max(_domain_diameter, (pts[i] - pts[j]).norm());
}

Mesh Mesh::from_polygons(
    std::vector<Point> vertices,
    const std::vector<std::vector<Index>>& polygons,
    const std::vector<std::optional<Point>>& centers)
{
    const Index nv = static_cast<Index>(vertices.size());
    for (const auto& v : vertices) {
        if (v.size() != 2) throw DimensionError("polygon meshes are two-dimensional");
        if (!v.allFinite()) throw DegenerateInputError("non-finite vertex coordinate");
    }
    if (!centers.empty() && centers.size() != polygons.size()) {
        throw DimensionError("one optional center per polygon expected");
    }

    std::vector<CellGeometry> cells;
    std::vector<FaceGeometry> faces;
    std::map<std::pair<Index, Index>, std::size_t> face_of;
    cells.reserve(polygons.size());

    for (std::size_t k = 0; k < polygons.size(); ++k) {
        const auto& poly = polygons[k];
        const std::string tag = "cell " + std::to_string(k);
        if (poly.size() < 3) throw DegenerateInputError(tag + ": fewer than 3 vertices");
        std::vector<Eigen::Vector2d> pv;
        for (Index id : poly) {
            if (id < 0 || id >= nv) throw DegenerateInputError(tag + ": missing vertex " + std::to_string(id));
            pv.push_back(as2(vertices[static_cast<std::size_t>(id)]));
        }
        const PolygonGeometry g = polygon_geometry(pv);
        if (!(g.area > 0)) throw DegenerateInputError(tag + ": non-positive area (vertices must be CCW)");

        CellGeometry c;
        c.vertex_ids = poly;
        c.measure = g.area;
        c.diameter = g.diameter;
        c.barycenter = Point(g.centroid);
        if (!centers.empty() && centers[k]) {
            if (centers[k]->size() != 2) throw DimensionError(tag + ": center must have 2 coordinates");
            c.center = *centers[k];
        } else if (poly.size() == 3) {
            c.center = Point(circumcenter(pv[0], pv[1], pv[2]));
        } else if (is_rectangle(pv)) {
            c.center = Point(g.centroid);
        } else {
            throw DegenerateInputError(tag + ": center required for non-triangle, non-rectangle cells");
        }
        cells.push_back(std::move(c));

        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Index a = poly[i];
            const Index b = poly[(i + 1) % poly.size()];
            if (a == b) throw DegenerateInputError(tag + ": repeated vertex");
            const auto key = std::minmax(a, b);
            auto it = face_of.find(key);
            if (it == face_of.end()) {
                const Eigen::Vector2d pa = pv[i];
                const Eigen::Vector2d pb = pv[(i + 1) % poly.size()];
                const Eigen::Vector2d t = pb - pa;
                FaceGeometry f;
                f.vertex_ids = {a, b};
                f.measure = t.norm();
                f.barycenter = Point(0.5 * (pa + pb));
                f.normal = Point(Eigen::Vector2d(t.y(), -t.x()) / f.measure);
                f.inner = static_cast<Index>(k);
                face_of.emplace(key, faces.size());
                faces.push_back(std::move(f));
            } else {
                FaceGeometry& f = faces[it->second];
                if (f.outer) throw DegenerateInputError(tag + ": edge shared by more than two cells");
                if (f.vertex_ids[0] != b || f.vertex_ids[1] != a) {
                    throw DegenerateInputError(tag + ": inconsistent orientation with neighbour");
                }
                f.outer = static_cast<Index>(k);
            }
        }
    }
    return from_geometry(2, std::move(vertices), std::move(cells), std::move(faces));
}

std::vector<Mesh::CellGeometry> Mesh::cell_geometry() const
{
    std::vector<CellGeometry> out;
    out.reserve(_cells.size());
    for (const auto& c : _cells) {
        out.push_back({c.vertex_ids, c.center, c.barycenter, c.measure, c.diameter});
    }
    return out;
}

std::vector<Mesh::FaceGeometry> Mesh::face_geometry() const
{
    std::vector<FaceGeometry> out;
    out.reserve(_edges.size());
    for (const auto& s : _edges) {
        out.push_back({s.vertex_ids, s.measure, s.barycenter, s.normal, s.inner_cell, s.outer_cell});
    }
    return out;
}

std::vector<Index> Mesh::neighbors(Index k) const
{
    std::vector<Index> out;
    for (Index e : cell(k).edge_ids) {
        const Edge& s = edge(e);
        if (!s.is_boundary()) out.push_back(s.neighbor(k));
    }
    return out;
}

} // namespace fvgrad
