#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <fvgrad/mesh.hpp>

namespace fvgrad {

/// Axis-aligned rectangle [lo.x, hi.x] x [lo.y, hi.y].
struct Rectangle
{
    Eigen::Vector2d lo = Eigen::Vector2d::Zero();
    Eigen::Vector2d hi = Eigen::Vector2d::Ones();

    double width() const { return hi.x() - lo.x(); }
    double height() const { return hi.y() - lo.y(); }
};

/// Uniform nx-by-ny grid of rectangles with centroid cell points.
Mesh build_rectangular_mesh(Index nx, Index ny, const Rectangle& domain = {});

struct DelaunayOptions
{
    Index resolution = 8;      // lattice columns across the domain width
    double jitter = 0;         // in [0, 0.3)
    std::uint64_t seed = 0;
    Rectangle domain;
    double theta_min = 0.02;
};

/// Jittered offset lattice triangulated by Bowyer-Watson, with circumcenter
/// cell points. Throws InadmissibleMeshError if a circumcenter falls too
/// close to (or beyond) an edge of its triangle.
Mesh build_delaunay_mesh(const DelaunayOptions& opts);

/// Points of the lattice used by build_delaunay_mesh.
std::vector<Eigen::Vector2d> delaunay_lattice(const DelaunayOptions& opts);

/// Delaunay triangulation of a point set; triangles are CCW.
std::vector<std::array<Index, 3>> bowyer_watson(const std::vector<Eigen::Vector2d>& points);

/// Triangulates `points` and builds the circumcentric mesh over their hull.
Mesh triangulate_points(const std::vector<Eigen::Vector2d>& points, double theta_min = 0.02);

} // namespace fvgrad
