#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <fvgrad/generators.hpp>
#include <fvgrad/mesh_io.hpp>
#include <fvgrad/validate.hpp>

using namespace fvgrad;

namespace {

Point pt(double x, double y)
{
    Point p(2);
    p << x, y;
    return p;
}

Index cell_at(const Mesh& m, double x, double y)
{
    for (const Cell& c : m.cells())
        if ((c.center - pt(x, y)).norm() < 1e-12) return c.id;
    FAIL("no cell centered at the requested point");
    return -1;
}

// min over (K, sigma) of d_{K,sigma} / diam(K), recomputed from scratch
double brute_theta(const Mesh& m)
{
    double t = 1e300;
    for (const Cell& c : m.cells()) {
        const auto& ids = c.vertex_ids;
        double diam = 0;
        for (Index a : ids)
            for (Index b : ids) diam = std::max(diam, (m.vertices()[a] - m.vertices()[b]).norm());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const Eigen::Vector2d p = m.vertices()[ids[i]], q = m.vertices()[ids[(i + 1) % ids.size()]];
            const Eigen::Vector2d t2 = q - p;
            const Eigen::Vector2d nrm = Eigen::Vector2d(t2.y(), -t2.x()).normalized();
            const double d = (0.5 * (p + q) - Eigen::Vector2d(c.center[0], c.center[1])).dot(nrm);
            t = std::min(t, d / diam);
        }
    }
    return t;
}

} // namespace

TEST_CASE("unit square single cell")
{
    const Mesh m = build_rectangular_mesh(1, 1);
    REQUIRE(m.num_cells() == 1);
    CHECK(m.cell(0).measure == doctest::Approx(1.0));
    REQUIRE(m.num_edges() == 4);
    for (const Edge& s : m.edges()) {
        CHECK(s.is_boundary());
        CHECK(s.transmissibility == doctest::Approx(2.0));
    }
}

TEST_CASE("two by one grid geometry")
{
    const Mesh m = build_rectangular_mesh(2, 1);
    const Index k = cell_at(m, 0.25, 0.5), l = cell_at(m, 0.75, 0.5);
    CHECK(k != l);
    int interior = 0;
    for (const Edge& s : m.edges()) {
        if (s.is_boundary()) continue;
        ++interior;
        CHECK(s.barycenter[0] == doctest::Approx(0.5));
        CHECK(s.center_distance == doctest::Approx(0.5));
        CHECK(s.transmissibility == doctest::Approx(2.0));
    }
    CHECK(interior == 1);
}

TEST_CASE("theta of the 10x10 grid")
{
    const Mesh m = build_rectangular_mesh(10, 10);
    CHECK(m.theta() == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-12));
    CHECK(m.h() == doctest::Approx(0.1 * std::sqrt(2.0)));
    CHECK(m.total_measure() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.domain_diameter() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("theta stays constant under rectangular refinement")
{
    const double t0 = build_rectangular_mesh(4, 4).theta();
    for (Index n : {8, 16, 32}) CHECK(build_rectangular_mesh(n, n).theta() == doctest::Approx(t0).epsilon(1e-12));
}

TEST_CASE("degenerate rectangle domain")
{
    Rectangle r;
    r.hi = Eigen::Vector2d(1, 0);
    CHECK_THROWS_AS(build_rectangular_mesh(2, 2, r), InvalidDomainError);
    CHECK_THROWS_AS(build_rectangular_mesh(0, 2), DegenerateInputError);
}

TEST_CASE("edge incidence and geometric identity on rectangles")
{
    for (Index n : {1, 3, 7}) {
        const Mesh m = build_rectangular_mesh(n, n + 1);
        std::vector<int> refs(static_cast<std::size_t>(m.num_edges()), 0);
        for (const Cell& c : m.cells())
            for (Index e : c.edge_ids) ++refs[static_cast<std::size_t>(e)];
        for (const Edge& s : m.edges()) {
            CHECK(refs[static_cast<std::size_t>(s.id)] == (s.is_boundary() ? 1 : 2));
            CHECK(std::abs(s.normal.norm() - 1) < 1e-12);
            if (s.is_boundary()) CHECK((*s.projection - s.barycenter).norm() < 1e-12);
        }
        for (const Cell& c : m.cells()) CHECK(chxs_residual(m, c.id) < 1e-12);
    }
}

TEST_CASE("single acute triangle")
{
    const std::vector<Eigen::Vector2d> p{{0, 0}, {1, 0}, {0.5, 0.8}};
    const Mesh m = triangulate_points(p);
    REQUIRE(m.num_cells() == 1);
    // x = 0.5 by symmetry; 0.25 + y^2 = (0.8 - y)^2 gives y = (0.64 - 0.25) / 1.6
    CHECK(m.cell(0).center[0] == doctest::Approx(0.5));
    CHECK(m.cell(0).center[1] == doctest::Approx((0.64 - 0.25) / 1.6));
    CHECK(m.num_edges() == 3);
    for (const Edge& s : m.edges()) CHECK(s.is_boundary());
}

TEST_CASE("right triangle has its circumcenter on the hypotenuse")
{
    const std::vector<Eigen::Vector2d> p{{0, 0}, {1, 0}, {0, 1}};
    try {
        triangulate_points(p);
        FAIL("expected an inadmissible mesh");
    } catch (const InadmissibleMeshError& e) {
        CHECK(e.cell() == 0);
    }
}

TEST_CASE("duplicate points are rejected")
{
    const std::vector<Eigen::Vector2d> p{{0, 0}, {1, 0}, {0.5, 0.8}, {1, 0}};
    CHECK_THROWS_AS(bowyer_watson(p), DegenerateInputError);
}

TEST_CASE("bowyer watson satisfies the empty circle property")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<Eigen::Vector2d> p;
    for (int i = 0; i < 60; ++i) p.emplace_back(u(rng), u(rng));
    const auto tris = bowyer_watson(p);
    CHECK(!tris.empty());
    for (const auto& t : tris) {
        const Eigen::Vector2d a = p[t[0]], b = p[t[1]], c = p[t[2]];
        CHECK((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x() > 0);
        const Eigen::Vector2d z = circumcenter(a, b, c);
        const double r = (a - z).norm();
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (static_cast<Index>(i) == t[0] || static_cast<Index>(i) == t[1] || static_cast<Index>(i) == t[2]) continue;
            CHECK((p[i] - z).norm() >= r * (1 - 1e-9));
        }
    }
}

TEST_CASE("delaunay family is admissible and satisfies the identity")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        for (Index res : {3, 8, 20}) {
            DelaunayOptions o;
            o.resolution = res;
            o.jitter = seed == 0 ? 0.0 : 0.2;
            o.seed = seed;
            const Mesh m = build_delaunay_mesh(o);
            CHECK(validate_admissibility(m).admissible());
            CHECK(m.total_measure() == doctest::Approx(1.0).epsilon(1e-12));
            for (const Cell& c : m.cells()) CHECK(chxs_residual(m, c.id) < 1e-12);
        }
    }
}

TEST_CASE("delaunay lattice is deterministic and keeps boundary points on the boundary")
{
    DelaunayOptions o;
    o.resolution = 12;
    o.jitter = 0.25;
    o.seed = 3;
    const auto a = delaunay_lattice(o), b = delaunay_lattice(o);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    int bottom = 0, corners = 0;
    for (const auto& p : a) {
        CHECK(p.x() >= 0);
        CHECK(p.x() <= 1);
        CHECK(p.y() >= 0);
        CHECK(p.y() <= 1);
        if (p.y() == 0) ++bottom;
        if ((p.x() == 0 || p.x() == 1) && (p.y() == 0 || p.y() == 1)) ++corners;
    }
    CHECK(bottom == 13);
    CHECK(corners == 4);
}

TEST_CASE("reported theta equals the direct minimum")
{
    DelaunayOptions o;
    o.resolution = 10;
    o.jitter = 0.2;
    o.seed = 11;
    const Mesh m = build_delaunay_mesh(o);
    const ValidationReport r = validate_admissibility(m);
    CHECK(r.theta == doctest::Approx(brute_theta(m)).epsilon(1e-12));
    CHECK(m.theta() == doctest::Approx(brute_theta(m)).epsilon(1e-12));
}

TEST_CASE("validator on a clean rectangular mesh")
{
    const ValidationReport r = validate_admissibility(build_rectangular_mesh(4, 4));
    CHECK(r.admissible());
    CHECK(r.hypregee_sufficient);
}

TEST_CASE("displaced center yields one orthogonality violation")
{
    std::vector<Point> v{pt(0, 0), pt(0.5, 0), pt(1, 0), pt(1, 1), pt(0.5, 1), pt(0, 1)};
    const std::vector<std::vector<Index>> polys{{0, 1, 4, 5}, {1, 2, 3, 4}};
    const std::vector<std::optional<Point>> centers{pt(0.25, 0.55), pt(0.75, 0.5)};
    const Mesh m = Mesh::from_polygons(v, polys, centers);
    const ValidationReport r = validate_admissibility(m);
    CHECK(r.count(ViolationKind::non_orthogonal) == 1);
    CHECK_THROWS_AS(require_admissible(m), InadmissibleMeshError);
}

TEST_CASE("corrupted normal breaks the geometric identity")
{
    const Mesh m = build_rectangular_mesh(3, 3);
    auto faces = m.face_geometry();
    faces[4].normal = Point(faces[4].normal + pt(0.1, 0.1)).normalized();
    const Mesh bad = Mesh::from_geometry(2, m.vertices(), m.cell_geometry(), faces);
    const ValidationReport r = validate_admissibility(bad);
    CHECK(r.count(ViolationKind::chxs_residual) >= 1);
}

TEST_CASE("clockwise polygon is rejected")
{
    std::vector<Point> v{pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1)};
    CHECK_THROWS_AS(Mesh::from_polygons(v, {{0, 3, 2, 1}}), DegenerateInputError);
}

TEST_CASE("mesh file round trip")
{
    const Mesh m = build_rectangular_mesh(2, 2);
    const Mesh r = parse_mesh(mesh_to_string(m));
    REQUIRE(r.num_cells() == m.num_cells());
    for (Index k = 0; k < m.num_cells(); ++k) {
        CHECK((r.cell(k).center - m.cell(k).center).norm() <= 1e-15);
        CHECK(std::abs(r.cell(k).measure - m.cell(k).measure) <= 1e-15);
    }
    CHECK(r.theta() == m.theta());

    DelaunayOptions o;
    o.resolution = 6;
    o.jitter = 0.2;
    o.seed = 2;
    const Mesh d = build_delaunay_mesh(o);
    const auto path = std::filesystem::temp_directory_path() / "fvgrad_roundtrip.json";
    export_mesh(d, path);
    const Mesh d2 = import_mesh(path);
    std::filesystem::remove(path);
    REQUIRE(d2.num_cells() == d.num_cells());
    for (Index k = 0; k < d.num_cells(); ++k) CHECK((d2.cell(k).center - d.cell(k).center).norm() == 0);
    for (std::size_t i = 0; i < d.vertices().size(); ++i) CHECK(d2.vertices()[i] == d.vertices()[i]);
}

TEST_CASE("malformed mesh files")
{
    const std::string missing_vertex = R"({
  "dimension": 2,
  "vertices": [[0, 0], [1, 0], [1, 1]],
  "cells": [
    {"vertices": [0, 1, 7]}
  ]
})";
    try {
        parse_mesh(missing_vertex);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.field().find("cells[0]") == 0);
        CHECK(e.line() == 5);
    }
    CHECK_THROWS_AS(parse_mesh("{\"dimension\": 2, \"vertices\": []"), ParseError);
    CHECK_THROWS_AS(parse_mesh(R"({"dimension": 2, "cells": []})"), ParseError);
    CHECK_THROWS_AS(parse_mesh(R"({"dimension": 3, "vertices": [], "cells": []})"), ParseError);
}

TEST_CASE("hand written polygon mesh with a hexagon")
{
    // Regular hexagon around the origin, split by nothing; explicit center.
    std::string doc = R"({"dimension": 2, "vertices": [)";
    for (int i = 0; i < 6; ++i) {
        doc += (i ? "," : "") + std::string("[") + std::to_string(std::cos(i * std::numbers::pi / 3)) + "," +
               std::to_string(std::sin(i * std::numbers::pi / 3)) + "]";
    }
    doc += R"(], "cells": [{"vertices": [0,1,2,3,4,5], "center": [0, 0]}]})";
    const Mesh m = parse_mesh(doc);
    CHECK(m.num_cells() == 1);
    CHECK(m.num_edges() == 6);
    CHECK_THROWS_AS(parse_mesh(R"({"dimension": 2, "vertices": [[0,0],[1,0],[1.5,1],[0.5,1.5],[-0.5,1]],
        "cells": [{"vertices": [0,1,2,3,4]}]})"),
                    ParseError);
}

TEST_CASE("inadmissible import needs the diagnostic mode")
{
    const std::string doc = R"({"dimension": 2, "vertices": [[0,0],[1,0],[0,1]], "cells": [{"vertices": [0,1,2]}]})";
    CHECK_THROWS_AS(parse_mesh(doc), InadmissibleMeshError);
    ImportOptions io;
    io.allow_invalid = true;
    const Mesh m = parse_mesh(doc, io);
    CHECK(!validate_admissibility(m).admissible());
}
