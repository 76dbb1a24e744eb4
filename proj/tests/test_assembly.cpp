#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include <fvgrad/assembly.hpp>
#include <fvgrad/generators.hpp>
#include <fvgrad/linsolve.hpp>
#include <fvgrad/mesh_io.hpp>

using namespace fvgrad;

namespace {

Tensor mat(double a, double b, double c, double d)
{
    Tensor t(2, 2);
    t << a, b, c, d;
    return t;
}

ProblemSpec constant_problem(const Tensor& lam, double alpha)
{
    ProblemSpec p;
    p.diffusion = [lam](const Point&) { return lam; };
    p.alpha = [alpha](const Point&) { return alpha; };
    return p;
}

Mesh delaunay(Index res, double jitter, std::uint64_t seed)
{
    DelaunayOptions o;
    o.resolution = res;
    o.jitter = jitter;
    o.seed = seed;
    return build_delaunay_mesh(o);
}

Point pt(double x, double y)
{
    Point p(2);
    p << x, y;
    return p;
}

} // namespace

TEST_CASE("cell tensors")
{
    const Mesh m = build_rectangular_mesh(3, 3);
    const CellTensor iso = cell_tensor(constant_problem(Tensor::Identity(2, 2), 1.0), m);
    for (const auto& t : iso.values) CHECK(t.isZero(0));

    const CellTensor c1 = cell_tensor(constant_problem(mat(1.5, 0.5, 0.5, 1.5), 1.0), m);
    for (const auto& t : c1.values) CHECK((t - mat(0.5, 0.5, 0.5, 0.5)).norm() < 1e-15);

    CHECK(smallest_eigenvalue(mat(1.5, 0.5, 0.5, 1.5)) == doctest::Approx(1.0));
    CHECK(smallest_eigenvalue(mat(10, 0.2, 0.2, 10)) == doctest::Approx(9.8));
}

TEST_CASE("tensor checks")
{
    const Mesh m = build_rectangular_mesh(2, 2);
    CHECK_THROWS_AS(cell_tensor(constant_problem(mat(1, 0.5, 0.4, 1), 0.1), m), SpecError);
    try {
        cell_tensor(constant_problem(mat(1.5, 0.5, 0.5, 1.5), 1.5), m);
        FAIL("expected a coercivity error");
    } catch (const CoercivityError& e) {
        CHECK(std::string(e.what()).find("cell 0") != std::string::npos);
    }
    AssemblyOptions o;
    o.alpha_ceiling = 2;
    CHECK_NOTHROW(cell_tensor(constant_problem(mat(1.5, 0.5, 0.5, 1.5), 1.5), m, o));
    ProblemSpec none;
    CHECK_THROWS_AS(cell_tensor(none, m), SpecError);
}

TEST_CASE("two cell system by hand")
{
    // grad of indicators: e_K -> (1,0) in K, (-1,0) in L; e_L -> (1,0) in K, (-1,0) in L
    // gradient part 0.5 everywhere; two-point part [[8, -2], [-2, 8]]
    const Mesh m = build_rectangular_mesh(2, 1);
    const LinearSystem s = assemble(m, constant_problem(mat(1.5, 0.5, 0.5, 1.5), 1.0));
    const Eigen::MatrixXd a(s.matrix);
    CHECK(a(0, 0) == doctest::Approx(8.5));
    CHECK(a(1, 1) == doctest::Approx(8.5));
    CHECK(a(0, 1) == doctest::Approx(-1.5));
    CHECK(a(1, 0) == doctest::Approx(-1.5));
    CHECK(s.rhs.isZero(0));
}

TEST_CASE("isotropic tensor gives the two point matrix")
{
    for (const Mesh& m : {build_rectangular_mesh(6, 5), delaunay(7, 0.2, 3)}) {
        const LinearSystem s = assemble(m, constant_problem(Tensor::Identity(2, 2), 1.0));
        Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(m.num_cells(), m.num_cells());
        for (const Edge& e : m.edges()) {
            const double t = e.measure / e.center_distance;
            ref(e.inner_cell, e.inner_cell) += t;
            if (e.is_boundary()) continue;
            ref(*e.outer_cell, *e.outer_cell) += t;
            ref(e.inner_cell, *e.outer_cell) -= t;
            ref(*e.outer_cell, e.inner_cell) -= t;
        }
        CHECK((Eigen::MatrixXd(s.matrix) - ref).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("positive definiteness on a random sample")
{
    const Mesh m = build_rectangular_mesh(10, 10);
    const LinearSystem s = assemble(m, constant_problem(mat(1.5, 0.5, 0.5, 1.5), 1.0));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd x(m.num_cells());
        for (Index i = 0; i < x.size(); ++i) x[i] = nd(rng);
        CHECK(x.dot(s.matrix * x) > 0);
    }
    CHECK((Eigen::MatrixXd(s.matrix) - Eigen::MatrixXd(s.matrix).transpose()).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("stencil widths")
{
    auto widest = [](const LinearSystem& s) {
        Index w = 0;
        for (Index i = 0; i < s.matrix.outerSize(); ++i) w = std::max<Index>(w, s.matrix.row(i).nonZeros());
        return w;
    };
    const Tensor lam = mat(1.5, 0.5, 0.5, 1.5);
    const Mesh r = build_rectangular_mesh(8, 8);
    CHECK(widest(assemble(r, constant_problem(lam, 1.0))) == 13);
    const Mesh t = delaunay(8, 0.1, 2);
    CHECK(widest(assemble(t, constant_problem(lam, 1.0))) <= 10);

    const LinearSystem s = assemble(t, constant_problem(lam, 1.0));
    const auto ring = two_ring_stencil(t);
    for (Index i = 0; i < s.matrix.outerSize(); ++i) {
        std::set<Index> allowed{i};
        for (Index l : t.neighbors(i)) {
            allowed.insert(l);
            for (Index k : t.neighbors(l)) allowed.insert(k);
        }
        CHECK(std::vector<Index>(allowed.begin(), allowed.end()) == ring[static_cast<std::size_t>(i)]);
        for (SparseMatrix::InnerIterator it(s.matrix, i); it; ++it) CHECK(allowed.count(it.col()) == 1);
    }
}

TEST_CASE("affine solutions are reproduced exactly")
{
    auto u = [](const Point& x) { return 0.3 - 1.2 * x[0] + 0.7 * x[1]; };
    for (const Mesh& m : {build_rectangular_mesh(5, 4), delaunay(6, 0.2, 1)}) {
        ProblemSpec p = constant_problem(mat(2.0, 0.6, 0.6, 1.0), 0.5);
        p.dirichlet = u;
        const LinearSystem s = assemble(m, p);
        const DiscreteField sol = dense_solve(m, s);
        for (const Cell& c : m.cells()) CHECK(sol.values[c.id] == doctest::Approx(u(c.center)).epsilon(1e-12));
    }
}

TEST_CASE("fluxes")
{
    const Mesh m = delaunay(8, 0.2, 5);
    ProblemSpec p;
    p.diffusion = [](const Point& x) { return mat(2 + x[0], 0.3, 0.3, 1 + x[1]); };
    p.source = [](const Point& x) { return 1 + x[0]; };
    p.dirichlet = [](const Point& x) { return x[0] * x[1]; };
    const Discretization disc = discretize(m, p);

    const FluxField zero = reconstruct_fluxes(DiscreteField::zero(m), discretize(m, [&] {
                                                  ProblemSpec q = p;
                                                  q.dirichlet = nullptr;
                                                  return q;
                                              }()));
    CHECK(zero.values.isZero(0));

    const LinearSystem s = assemble(disc);
    const DiscreteField u = dense_solve(m, s);
    const FluxField f = reconstruct_fluxes(u, disc);
    CHECK((f.balance() - disc.source).cwiseAbs().maxCoeff() < 1e-11);
    for (const Edge& e : m.edges())
        if (!e.is_boundary()) CHECK(f.from(e.id, e.inner_cell) == -f.from(e.id, *e.outer_cell));

    // the balance of any field is its scheme residual
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(m.num_cells(), -1, 1);
    const FluxField fv = reconstruct_fluxes(DiscreteField(m, v), disc);
    CHECK((fv.balance() - (s.matrix * v - s.rhs + disc.source)).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("degenerate transmissibility")
{
    const std::string doc = R"({"dimension": 2, "vertices": [[0,0],[1,0],[0,1]], "cells": [{"vertices": [0,1,2]}]})";
    ImportOptions io;
    io.allow_invalid = true;
    const Mesh m = parse_mesh(doc, io);
    CHECK_THROWS_AS(discretize(m, constant_problem(Tensor::Identity(2, 2), 1.0)), InadmissibleMeshError);
}

TEST_CASE("case 2 style tensor rotation")
{
    // Lambda = 10 I + 0.2 (e_r e_t^T + e_t e_r^T) about c = (0.5, 1.1)
    auto lam = [](const Point& x) {
        const Eigen::Vector2d er = (Eigen::Vector2d(x[0], x[1]) - Eigen::Vector2d(0.5, 1.1)).normalized();
        const Eigen::Vector2d et(-er.y(), er.x());
        return Tensor(10 * Tensor::Identity(2, 2) + 0.2 * (er * et.transpose() + et * er.transpose()));
    };
    CHECK((lam(pt(0.8, 1.1)) - mat(10, 0.2, 0.2, 10)).norm() < 1e-14);
    CHECK((lam(pt(0.5, 0.1)) - mat(10, -0.2, -0.2, 10)).norm() < 1e-14);
}

TEST_CASE("matrix market dump")
{
    const Mesh m = build_rectangular_mesh(2, 1);
    const LinearSystem s = assemble(m, constant_problem(mat(1.5, 0.5, 0.5, 1.5), 1.0));
    std::ostringstream os;
    write_matrix_market(s, os, {"generated for a test"});
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "%%MatrixMarket matrix coordinate real symmetric");
    std::getline(in, line);
    CHECK(line == "% generated for a test");
    int r, c, nnz;
    in >> r >> c >> nnz;
    CHECK(r == 2);
    CHECK(c == 2);
    CHECK(nnz == 3);
    Eigen::MatrixXd back = Eigen::MatrixXd::Zero(2, 2);
    for (int k = 0; k < nnz; ++k) {
        int i, j;
        double v;
        in >> i >> j >> v;
        CHECK(j <= i);
        back(i - 1, j - 1) = back(j - 1, i - 1) = v;
    }
    CHECK((back - Eigen::MatrixXd(s.matrix)).norm() == 0);
}
