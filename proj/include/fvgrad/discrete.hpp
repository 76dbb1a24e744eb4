#pragma once

#include <Eigen/Core>
#include <functional>

#include <fvgrad/mesh.hpp>

namespace fvgrad {

using ScalarFunction = std::function<double(const Point&)>;
using VectorFunction = std::function<Eigen::VectorXd(const Point&)>;

/// Piecewise constant function: one value u_K per cell.
struct DiscreteField
{
    const Mesh* mesh = nullptr;
    Eigen::VectorXd values;

    DiscreteField() = default;
    DiscreteField(const Mesh& m, Eigen::VectorXd v);
    static DiscreteField zero(const Mesh& m);
};

/// One d-vector per cell, stored column-wise (d x num_cells).
struct GradientField
{
    const Mesh* mesh = nullptr;
    Eigen::MatrixXd vectors;

    GradientField() = default;
    GradientField(const Mesh& m, Eigen::MatrixXd v);
};

/// Dirichlet values g_sigma at x_sigma, indexed by edge id (interior entries unused).
struct BoundaryData
{
    Eigen::VectorXd values;

    static BoundaryData zero(const Mesh& m);
    static BoundaryData from_function(const Mesh& m, const ScalarFunction& g);
};

enum class GradientVariant { center, barycenter };

/// A_{K,sigma} for both orientations of every edge.
struct EdgeCoefficients
{
    GradientVariant variant = GradientVariant::center;
    Eigen::MatrixXd inner;   // A_{inner, sigma}
    Eigen::MatrixXd outer;   // A_{outer, sigma}; zero columns on boundary edges

    Eigen::VectorXd from(const Edge& s, Index cell) const
    {
        return cell == s.inner_cell ? inner.col(s.id) : outer.col(s.id);
    }
};

EdgeCoefficients edge_coefficients(const Mesh& mesh, GradientVariant variant = GradientVariant::center);

enum class AlphaRule { diamond_mean, harmonic_cells };

/// Per-edge alpha_sigma.
Eigen::VectorXd edge_alpha(const Mesh& mesh, const ScalarFunction& alpha, AlphaRule rule);
Eigen::VectorXd edge_alpha(const Mesh& mesh, const Eigen::VectorXd& cell_alpha, AlphaRule rule);
Eigen::VectorXd edge_alpha_constant(const Mesh& mesh, double alpha);

DiscreteField interpolate(const Mesh& mesh, const ScalarFunction& phi);

/// [u, v]_{D, alpha} with boundary terms tau alpha (u_K - g_u)(v_K - g_v).
double bilinear_form(const DiscreteField& u, const DiscreteField& v, const Eigen::VectorXd& alpha,
                     const BoundaryData& g_u, const BoundaryData& g_v);
double bilinear_form(const DiscreteField& u, const DiscreteField& v, const Eigen::VectorXd& alpha);

double discrete_norm(const DiscreteField& u, const BoundaryData& g);
double discrete_norm(const DiscreteField& u);

GradientField discrete_gradient(const DiscreteField& u, const BoundaryData& g, const EdgeCoefficients& coeffs);
GradientField discrete_gradient(const DiscreteField& u, const EdgeCoefficients& coeffs);

double l2_norm(const DiscreteField& u);
double l2_norm(const GradientField& g);

/// Cell-average quadrature: 2x2 Gauss on rectangles, the 3-point edge-midpoint
/// rule on triangles, and that rule on the centroid fan of other polygons.
double cell_average(const Mesh& mesh, Index cell, const ScalarFunction& f);
Eigen::VectorXd cell_average(const Mesh& mesh, Index cell, const VectorFunction& f);

/// ||u - avg_K(exact)||_{L^2}.
double l2_error(const DiscreteField& u, const ScalarFunction& exact);
/// ||grad - avg_K(exact_grad)||_{L^2}.
double l2_error(const GradientField& g, const VectorFunction& exact_grad);

/// Throws DimensionError unless `a` and `b` live on the same mesh.
void require_same_mesh(const Mesh* a, const Mesh* b);

} // namespace fvgrad
