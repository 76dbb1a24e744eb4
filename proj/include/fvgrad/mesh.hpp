#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include <fvgrad/error.hpp>

namespace fvgrad {

using Index = Eigen::Index;
using Point = Eigen::VectorXd;

/// A control volume K with its cell point x_K.
struct Cell
{
    Index id = 0;
    std::vector<Index> vertex_ids;   // CCW polygon (2D); may be empty for generic meshes
    Point center;                    // x_K
    Point barycenter;                // center of gravity of K
    double measure = 0;              // m(K)
    double diameter = 0;             // diam(K)
    std::vector<Index> edge_ids;     // E_K
    bool is_boundary_adjacent = false;
};

/// A face sigma; `normal` points out of `inner_cell`.
struct Edge
{
    Index id = 0;
    std::vector<Index> vertex_ids;
    double measure = 0;              // m(sigma)
    Point barycenter;                // x_sigma
    Index inner_cell = 0;
    std::optional<Index> outer_cell; // absent on the boundary
    Point normal;
    double d_inner = 0;              // signed distance x_K -> hyperplane of sigma
    std::optional<double> d_outer;
    std::optional<Point> projection; // z_sigma, boundary edges only
    double center_distance = 0;      // d_{K|L} (interior) or d_{K,sigma} (boundary)
    double transmissibility = 0;     // tau_sigma

    bool is_boundary() const { return !outer_cell.has_value(); }

    /// The cell across `sigma` from `cell`. Only meaningful on interior edges.
    Index neighbor(Index cell) const { return cell == inner_cell ? *outer_cell : inner_cell; }

    /// n_{K,sigma} for K = `cell`.
    Point normal_from(Index cell) const { return cell == inner_cell ? Point(normal) : Point(-normal); }

    /// d_{K,sigma} for K = `cell`.
    double distance_from(Index cell) const { return cell == inner_cell ? d_inner : *d_outer; }
};

/// Immutable admissible finite volume discretization.
///
/// The data model is dimension-generic: every quantity the scheme consumes
/// is carried per cell and per face. The polygon constructor is 2D.
class Mesh
{
public:
    struct CellGeometry
    {
        std::vector<Index> vertex_ids;
        Point center;
        Point barycenter;
        double measure = 0;
        double diameter = 0;
    };

    struct FaceGeometry
    {
        std::vector<Index> vertex_ids;
        double measure = 0;
        Point barycenter;
        Point normal;                   // outward from `inner`
        Index inner = 0;
        std::optional<Index> outer;
    };

    Mesh() = default;

    /// Builds a mesh from explicit per-cell and per-face geometry. Derived
    /// quantities (distances, projections, transmissibilities, h, theta) are
    /// recomputed here.
    static Mesh from_geometry(
        int dimension,
        std::vector<Point> vertices,
        std::vector<CellGeometry> cells,
        std::vector<FaceGeometry> faces);

    /// Builds a 2D mesh from CCW polygons. A missing center is replaced by the
    /// circumcenter (triangles) or centroid (rectangles); any other polygon
    /// without a center is rejected.
    static Mesh from_polygons(
        std::vector<Point> vertices,
        const std::vector<std::vector<Index>>& polygons,
        const std::vector<std::optional<Point>>& centers = {});

    int dimension() const { return _dimension; }
    Index num_cells() const { return static_cast<Index>(_cells.size()); }
    Index num_edges() const { return static_cast<Index>(_edges.size()); }
    const std::vector<Point>& vertices() const { return _vertices; }
    const std::vector<Cell>& cells() const { return _cells; }
    const std::vector<Edge>& edges() const { return _edges; }
    const Cell& cell(Index i) const { return _cells[static_cast<std::size_t>(i)]; }
    const Edge& edge(Index i) const { return _edges[static_cast<std::size_t>(i)]; }

    double h() const { return _h; }
    double theta() const { return _theta; }
    double domain_diameter() const { return _domain_diameter; }
    double total_measure() const { return _total_measure; }

    std::vector<CellGeometry> cell_geometry() const;
    std::vector<FaceGeometry> face_geometry() const;

    /// Neighbouring cells N_K in edge order.
    std::vector<Index> neighbors(Index cell) const;

private:
    void finalize();

    int _dimension = 0;
    std::vector<Point> _vertices;
    std::vector<Cell> _cells;
    std::vector<Edge> _edges;
    double _h = 0;
    double _theta = 0;
    double _domain_diameter = 0;
    double _total_measure = 0;
};

/// Signed area, centroid and diameter of a simple 2D polygon.
struct PolygonGeometry
{
    double area = 0;
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    double diameter = 0;
};

PolygonGeometry polygon_geometry(const std::vector<Eigen::Vector2d>& vertices);

/// Circumcenter of a 2D triangle. Throws DegenerateInputError on collinear input.
Eigen::Vector2d circumcenter(
    const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c);

} // namespace fvgrad
