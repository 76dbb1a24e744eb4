#include <fvgrad/discrete.hpp>

#include <cmath>
#include <string>

namespace fvgrad {

void require_same_mesh(const Mesh* a, const Mesh* b)
{
    if (a == nullptr || b == nullptr || a != b) throw DimensionError("fields live on different meshes");
}

DiscreteField::DiscreteField(const Mesh& m, Eigen::VectorXd v) : mesh(&m), values(std::move(v))
{
    if (values.size() != m.num_cells()) throw DimensionError("field length differs from cell count");
}

DiscreteField DiscreteField::zero(const Mesh& m) { return {m, Eigen::VectorXd::Zero(m.num_cells())}; }

GradientField::GradientField(const Mesh& m, Eigen::MatrixXd v) : mesh(&m), vectors(std::move(v))
{
    if (vectors.cols() != m.num_cells() || vectors.rows() != m.dimension()) {
        throw DimensionError("gradient field shape differs from dimension x cell count");
    }
}

BoundaryData BoundaryData::zero(const Mesh& m) { return {Eigen::VectorXd::Zero(m.num_edges())}; }

BoundaryData BoundaryData::from_function(const Mesh& m, const ScalarFunction& g)
{
    BoundaryData b = zero(m);
    for (const Edge& s : m.edges()) {
        if (!s.is_boundary()) continue;
        const double v = g(s.barycenter);
        if (!std::isfinite(v)) throw EvaluationError("non-finite boundary value on edge " + std::to_string(s.id));
        b.values[s.id] = v;
    }
    return b;
}

EdgeCoefficients edge_coefficients(const Mesh& mesh, GradientVariant variant)
{
    EdgeCoefficients c;
    c.variant = variant;
    c.inner = Eigen::MatrixXd::Zero(mesh.dimension(), mesh.num_edges());
    c.outer = Eigen::MatrixXd::Zero(mesh.dimension(), mesh.num_edges());
    auto origin = [&](Index k) -> const Point& {
        return variant == GradientVariant::center ? mesh.cell(k).center : mesh.cell(k).barycenter;
    };
    for (const Edge& s : mesh.edges()) {
        c.inner.col(s.id) = s.transmissibility * (s.barycenter - origin(s.inner_cell));
        if (!s.is_boundary()) c.outer.col(s.id) = s.transmissibility * (s.barycenter - origin(*s.outer_cell));
    }
    return c;
}

namespace {

double checked_alpha(const ScalarFunction& alpha, const Point& x, Index cell)
{
    const double a = alpha(x);
    if (!(a > 0) || !std::isfinite(a)) {
        throw CoercivityError("alpha must be positive and finite (cell " + std::to_string(cell) + ")");
    }
    return a;
}

} // namespace

Eigen::VectorXd edge_alpha(const Mesh& mesh, const ScalarFunction& alpha, AlphaRule rule)
{
    Eigen::VectorXd cell_alpha(mesh.num_cells());
    for (const Cell& c : mesh.cells()) cell_alpha[c.id] = checked_alpha(alpha, c.center, c.id);
    return edge_alpha(mesh, cell_alpha, rule);
}

Eigen::VectorXd edge_alpha(const Mesh& mesh, const Eigen::VectorXd& cell_alpha, AlphaRule rule)
{
    if (cell_alpha.size() != mesh.num_cells()) throw DimensionError("alpha length differs from cell count");
    for (Index k = 0; k < cell_alpha.size(); ++k) {
        if (!(cell_alpha[k] > 0) || !std::isfinite(cell_alpha[k])) {
            throw CoercivityError("alpha must be positive and finite (cell " + std::to_string(k) + ")");
        }
    }
    Eigen::VectorXd out(mesh.num_edges());
    for (const Edge& s : mesh.edges()) {
        const double ak = cell_alpha[s.inner_cell];
        if (s.is_boundary()) {
            out[s.id] = ak;
            continue;
        }
        const double al = cell_alpha[*s.outer_cell];
        const double dk = s.d_inner;
        const double dl = *s.d_outer;
        if (rule == AlphaRule::diamond_mean) {
            // m(D_{K,sigma}) = m(sigma) d_{K,sigma} / d; the common factor cancels.
            out[s.id] = (ak * dk + al * dl) / (dk + dl);
        } else {
            out[s.id] = (dk + dl) / (dk / ak + dl / al);
        }
    }
    return out;
}

Eigen::VectorXd edge_alpha_constant(const Mesh& mesh, double alpha)
{
    if (!(alpha > 0) || !std::isfinite(alpha)) throw CoercivityError("alpha must be positive and finite");
    return Eigen::VectorXd::Constant(mesh.num_edges(), alpha);
}

DiscreteField interpolate(const Mesh& mesh, const ScalarFunction& phi)
{
    Eigen::VectorXd v(mesh.num_cells());
    for (const Cell& c : mesh.cells()) {
        v[c.id] = phi(c.center);
        if (!std::isfinite(v[c.id])) throw EvaluationError("non-finite value at cell " + std::to_string(c.id));
    }
    return {mesh, std::move(v)};
}

double bilinear_form(const DiscreteField& u, const DiscreteField& v, const Eigen::VectorXd& alpha,
                     const BoundaryData& g_u, const BoundaryData& g_v)
{
    require_same_mesh(u.mesh, v.mesh);
    const Mesh& mesh = *u.mesh;
    if (alpha.size() != mesh.num_edges() || g_u.values.size() != mesh.num_edges() ||
        g_v.values.size() != mesh.num_edges()) {
        throw DimensionError("edge data length differs from edge count");
    }
    double sum = 0;
    for (const Edge& s : mesh.edges()) {
        const Index k = s.inner_cell;
        const double w = s.transmissibility * alpha[s.id];
        if (s.is_boundary()) {
            sum += w * ((u.values[k] - g_u.values[s.id]) * (v.values[k] - g_v.values[s.id]));
        } else {
            const Index l = *s.outer_cell;
            sum += w * ((u.values[l] - u.values[k]) * (v.values[l] - v.values[k]));
        }
    }
    return sum;
}

double bilinear_form(const DiscreteField& u, const DiscreteField& v, const Eigen::VectorXd& alpha)
{
    const BoundaryData z = BoundaryData::zero(*u.mesh);
    return bilinear_form(u, v, alpha, z, z);
}

double discrete_norm(const DiscreteField& u, const BoundaryData& g)
{
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(u.mesh->num_edges());
    return std::sqrt(bilinear_form(u, u, one, g, g));
}

double discrete_norm(const DiscreteField& u) { return discrete_norm(u, BoundaryData::zero(*u.mesh)); }

GradientField discrete_gradient(const DiscreteField& u, const BoundaryData& g, const EdgeCoefficients& coeffs)
{
    const Mesh& mesh = *u.mesh;
    if (coeffs.inner.cols() != mesh.num_edges() || g.values.size() != mesh.num_edges()) {
        throw DimensionError("edge data length differs from edge count");
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(mesh.dimension(), mesh.num_cells());
    for (const Cell& c : mesh.cells()) {
        const double uk = u.values[c.id];
        for (Index e : c.edge_ids) {
            const Edge& s = mesh.edge(e);
            const double diff = s.is_boundary() ? g.values[e] - uk : u.values[s.neighbor(c.id)] - uk;
            out.col(c.id) += diff * coeffs.from(s, c.id);
        }
        out.col(c.id) /= c.measure;
    }
    return {mesh, std::move(out)};
}

GradientField discrete_gradient(const DiscreteField& u, const EdgeCoefficients& coeffs)
{
    return discrete_gradient(u, BoundaryData::zero(*u.mesh), coeffs);
}

double l2_norm(const DiscreteField& u)
{
    double s = 0;
    for (const Cell& c : u.mesh->cells()) s += c.measure * u.values[c.id] * u.values[c.id];
    return std::sqrt(s);
}

double l2_norm(const GradientField& g)
{
    double s = 0;
    for (const Cell& c : g.mesh->cells()) s += c.measure * g.vectors.col(c.id).squaredNorm();
    return std::sqrt(s);
}

namespace {

struct QuadraturePoint
{
    Point x;
    double w;   // weights sum to one
};

bool rectangle_corners(const Mesh& mesh, const Cell& c)
{
    if (c.vertex_ids.size() != 4) return false;
    for (std::size_t i = 0; i < 4; ++i) {
        const Point& o = mesh.vertices()[static_cast<std::size_t>(c.vertex_ids[i])];
        const Point a = mesh.vertices()[static_cast<std::size_t>(c.vertex_ids[(i + 3) % 4])] - o;
        const Point b = mesh.vertices()[static_cast<std::size_t>(c.vertex_ids[(i + 1) % 4])] - o;
        if (std::abs(a.dot(b)) > 1e-12 * a.norm() * b.norm()) return false;
    }
    return true;
}

std::vector<QuadraturePoint> cell_rule(const Mesh& mesh, const Cell& c)
{
    std::vector<QuadraturePoint> q;
    auto vert = [&](std::size_t i) -> const Point& {
        return mesh.vertices()[static_cast<std::size_t>(c.vertex_ids[i])];
    };
    if (c.vertex_ids.empty()) {
        q.push_back({c.barycenter, 1.0});
    } else if (c.vertex_ids.size() == 3) {
        for (std::size_t i = 0; i < 3; ++i) q.push_back({Point(0.5 * (vert(i) + vert((i + 1) % 3))), 1.0 / 3});
    } else if (rectangle_corners(mesh, c)) {
        const double g = 0.5 / std::sqrt(3.0);
        const Point o = vert(0);
        const Point e1 = vert(1) - o;
        const Point e2 = vert(3) - o;
        for (double s : {0.5 - g, 0.5 + g})
            for (double t : {0.5 - g, 0.5 + g}) q.push_back({Point(o + s * e1 + t * e2), 0.25});
    } else {
        const std::size_t n = c.vertex_ids.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Point& a = vert(i);
            const Point& b = vert((i + 1) % n);
            const Point& z = c.barycenter;
            const double area = 0.5 * std::abs((a[0] - z[0]) * (b[1] - z[1]) - (b[0] - z[0]) * (a[1] - z[1]));
            const double w = area / c.measure / 3;
            q.push_back({Point(0.5 * (a + b)), w});
            q.push_back({Point(0.5 * (b + z)), w});
            q.push_back({Point(0.5 * (z + a)), w});
        }
    }
    return q;
}

} // namespace

double cell_average(const Mesh& mesh, Index cell, const ScalarFunction& f)
{
    double s = 0;
    for (const auto& qp : cell_rule(mesh, mesh.cell(cell))) s += qp.w * f(qp.x);
    if (!std::isfinite(s)) throw EvaluationError("non-finite quadrature value in cell " + std::to_string(cell));
    return s;
}

Eigen::VectorXd cell_average(const Mesh& mesh, Index cell, const VectorFunction& f)
{
    Eigen::VectorXd s = Eigen::VectorXd::Zero(mesh.dimension());
    for (const auto& qp : cell_rule(mesh, mesh.cell(cell))) s += qp.w * f(qp.x);
    if (!s.allFinite()) throw EvaluationError("non-finite quadrature value in cell " + std::to_string(cell));
    return s;
}

double l2_error(const DiscreteField& u, const ScalarFunction& exact)
{
    const Mesh& mesh = *u.mesh;
    double s = 0;
    for (const Cell& c : mesh.cells()) {
        const double e = u.values[c.id] - cell_average(mesh, c.id, exact);
        s += c.measure * e * e;
    }
    return std::sqrt(s);
}

double l2_error(const GradientField& g, const VectorFunction& exact_grad)
{
    const Mesh& mesh = *g.mesh;
    double s = 0;
    for (const Cell& c : mesh.cells()) {
        s += c.measure * (g.vectors.col(c.id) - cell_average(mesh, c.id, exact_grad)).squaredNorm();
    }
    return std::sqrt(s);
}

} // namespace fvgrad
