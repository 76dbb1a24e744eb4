#pragma once

#include <Eigen/SparseCore>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <fvgrad/discrete.hpp>

namespace fvgrad {

using Tensor = Eigen::MatrixXd;
using TensorFunction = std::function<Tensor(const Point&)>;

/// -div(Lambda grad u) = f in Omega, u = g on the boundary.
struct ProblemSpec
{
    TensorFunction diffusion;
    ScalarFunction alpha;       // empty: smallest eigenvalue of diffusion(x)
    ScalarFunction source;      // empty: zero
    ScalarFunction dirichlet;   // empty: homogeneous
    ScalarFunction exact_u;     // optional
    VectorFunction exact_grad;  // optional

    double alpha_at(const Point& x) const;
};

/// Smallest eigenvalue of a symmetric matrix (closed form for 2x2).
double smallest_eigenvalue(const Tensor& m);

enum class CellQuadrature { centroid, subdivision };

struct AssemblyOptions
{
    AlphaRule alpha_rule = AlphaRule::diamond_mean;
    GradientVariant variant = GradientVariant::center;
    CellQuadrature quadrature = CellQuadrature::centroid;
    // alpha(x) may not exceed alpha_ceiling * lambda_min(Lambda(x)).
    double alpha_ceiling = 1.0;
};

/// Lambda_K = mean over K of (Lambda - alpha I).
struct CellTensor
{
    std::vector<Tensor> values;
};

CellTensor cell_tensor(const ProblemSpec& problem, const Mesh& mesh, const AssemblyOptions& opts = {});

/// Every per-mesh ingredient of the scheme, kept for flux reconstruction.
struct Discretization
{
    const Mesh* mesh = nullptr;
    EdgeCoefficients coeffs;
    CellTensor tensors;
    Eigen::VectorXd alpha;       // alpha_sigma per edge
    BoundaryData g;
    Eigen::VectorXd source;      // integral of f over each cell
};

Discretization discretize(const Mesh& mesh, const ProblemSpec& problem, const AssemblyOptions& opts = {});

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Both triangles stored; rows indexed by cells.
struct LinearSystem
{
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
};

LinearSystem assemble(const Discretization& disc);
LinearSystem assemble(const Mesh& mesh, const ProblemSpec& problem, const AssemblyOptions& opts = {});

/// One oriented flux per edge: inner -> outer on interior edges, outward on
/// boundary edges.
struct FluxField
{
    const Mesh* mesh = nullptr;
    Eigen::VectorXd values;

    /// F_{K, sigma} read from the side of `cell`.
    double from(Index edge, Index cell) const
    {
        const Edge& s = mesh->edge(edge);
        return cell == s.inner_cell ? values[edge] : -values[edge];
    }

    /// Sum of outgoing fluxes per cell.
    Eigen::VectorXd balance() const;
};

FluxField reconstruct_fluxes(const DiscreteField& u, const Discretization& disc);

/// Cells within two edge-adjacency steps of each cell, sorted.
std::vector<std::vector<Index>> two_ring_stencil(const Mesh& mesh);

/// MatrixMarket coordinate dump (symmetric header, lower triangle, 1-based).
/// Each comment becomes a `%` line after the banner.
void write_matrix_market(const LinearSystem& system, std::ostream& out, const std::vector<std::string>& comments = {});
void write_matrix_market(const LinearSystem& system, const std::filesystem::path& path,
                         const std::vector<std::string>& comments = {});

} // namespace fvgrad
