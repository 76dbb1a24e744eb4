#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <fvgrad/assembly.hpp>
#include <fvgrad/generators.hpp>
#include <fvgrad/linsolve.hpp>

namespace fvgrad {

/// Manufactured problem with known exact solution and gradient.
struct TestCase
{
    std::string name;
    ProblemSpec problem;
    Rectangle domain;
    std::pair<double, double> alpha_interval;   // (0, lambda_min]
};

struct ResidualCheck
{
    double max_pde_residual = 0;     // |-div(Lambda grad u) - f| / (1 + |f|)
    double max_gradient_mismatch = 0;
    bool passed = false;
};

/// Central finite-difference check of the manufactured solution at
/// `samples` interior points.
ResidualCheck manufactured_residual(const TestCase& tc, int samples = 20, std::uint64_t seed = 20);

/// Homogeneous anisotropic case: Lambda = [[1.5, 0.5], [0.5, 1.5]],
/// u = sin(pi x) sin(pi y) on the unit square.
TestCase case1();
/// Rotating permeability: Lambda = 10 I + 0.2 (e_r e_t^T + e_t e_r^T) about
/// c = (0.5, 1.1), u = ln|x - c|, f = 0, nonzero Dirichlet data.
TestCase case2();
/// Lambda = I, alpha = 1, u = sin(pi x) sin(pi y).
TestCase isotropic_case();
/// Looks a case up by name ("case1", "case2", "isotropic").
TestCase make_case(const std::string& name);

enum class MeshFamily { rectangular, delaunay };

struct FamilyOptions
{
    MeshFamily family = MeshFamily::rectangular;
    double jitter = 0;
    std::uint64_t seed = 0;
    double theta_min = 0.02;
};

/// Rectangles: level x level cells. Delaunay: `level` lattice columns.
Mesh build_family_mesh(const Rectangle& domain, const FamilyOptions& opts, Index level);

struct CaseOptions
{
    AssemblyOptions assembly;
    std::optional<double> alpha;   // constant alpha; default is lambda_min(Lambda(x))
    SolverOptions solver;
};

/// err_u = ||u_D - P_D u||, with P_D u the values at the cell points;
/// err_grad = ||grad_D u_D - avg_K(grad u)||.
struct CaseSolution
{
    Discretization disc;
    LinearSystem system;
    DiscreteField u;
    GradientField grad;
    SolveStats stats;
    double err_u = 0;
    double err_grad = 0;
};

CaseSolution solve_case(const TestCase& tc, const Mesh& mesh, const CaseOptions& opts = {});

struct ConvergenceRow
{
    double h = 0;
    Index cells = 0;
    double theta = 0;
    double err_u = 0;
    double err_grad = 0;
    int iterations = 0;
};

struct ConvergenceReport
{
    std::vector<ConvergenceRow> rows;
    double eoc_u = 0;
    double eoc_grad = 0;
};

struct ConvergenceOptions
{
    FamilyOptions mesh;
    std::vector<Index> levels;
    CaseOptions solve;
    unsigned threads = 1;
};

ConvergenceReport run_convergence(const TestCase& tc, const ConvergenceOptions& opts);

struct EocFit
{
    double slope = 0;
    double intercept = 0;
    std::vector<std::size_t> excluded;   // non-positive errors (exact hits)
};

/// Least-squares slope of log(err) against log(h).
EocFit eoc_regression(std::span<const double> h, std::span<const double> err);

struct AlphaSweepRow
{
    double alpha = 0;
    double err_u = 0;
    double err_grad = 0;
    bool converged = false;
    std::string failure;
};

struct AlphaSweepReport
{
    std::vector<AlphaSweepRow> rows;
    std::optional<std::size_t> argmin_u;     // row index
    std::optional<std::size_t> argmin_grad;
};

/// One solve per constant alpha. alpha_ceiling bounds alpha by
/// alpha_ceiling * lambda_min; larger values are recorded as failed rows.
AlphaSweepReport alpha_sweep(const TestCase& tc, const Mesh& mesh, std::span<const double> grid,
                             CaseOptions opts = {}, double alpha_ceiling = 4.0);

struct DenseOracle
{
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
};

/// Scheme evaluated on every pair of cell indicators through
/// discrete_gradient and bilinear_form; the rhs moves the boundary lifting
/// to the right side.
DenseOracle dense_scheme_oracle(const Discretization& disc);

/// Classical two-point matrix built cell by cell from the bilinear form.
Eigen::MatrixXd two_point_matrix(const Mesh& mesh, const Eigen::VectorXd& alpha);

/// ||grad_D P_D u - avg(grad u)|| for g = 0, per mesh of a family.
struct ConsistencyRow
{
    double h = 0;
    double error = 0;
};
std::vector<ConsistencyRow> gradient_consistency(const ScalarFunction& u, const VectorFunction& grad,
                                                 const Rectangle& domain, const FamilyOptions& family,
                                                 std::span<const Index> levels);

} // namespace fvgrad
