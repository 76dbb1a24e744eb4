#include <fvgrad/validate.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fvgrad {

const char* to_string(ViolationKind kind)
{
    switch (kind) {
    case ViolationKind::non_orthogonal: return "non_orthogonal";
    case ViolationKind::center_outside: return "center_outside";
    case ViolationKind::projection_outside: return "projection_outside";
    case ViolationKind::distance_below_theta: return "distance_below_theta";
    case ViolationKind::chxs_residual: return "chxs_residual";
    }
    return "unknown";
}

Index ValidationReport::count(ViolationKind kind) const
{
    return std::count_if(violations.begin(), violations.end(),
                         [&](const Violation& v) { return v.kind == kind; });
}

double chxs_residual(const Mesh& mesh, Index k)
{
    const Cell& c = mesh.cell(k);
    const int d = mesh.dimension();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    for (Index e : c.edge_ids) {
        const Edge& s = mesh.edge(e);
        acc += s.measure * (s.barycenter - c.center) * s.normal_from(k).transpose();
    }
    acc -= c.measure * Eigen::MatrixXd::Identity(d, d);
    return acc.cwiseAbs().maxCoeff();
}

namespace {

// Segment containment of z in the closed 2D edge.
bool projection_in_edge(const Mesh& mesh, const Edge& s, const Point& z, double tol)
{
    if (s.vertex_ids.size() != 2) return true;
    const Point& a = mesh.vertices()[static_cast<std::size_t>(s.vertex_ids[0])];
    const Point& b = mesh.vertices()[static_cast<std::size_t>(s.vertex_ids[1])];
    const double len2 = (b - a).squaredNorm();
    const double t = (z - a).dot(b - a) / len2;
    return t >= -tol && t <= 1.0 + tol;
}

std::string describe(const char* what, Index cell, Index edge, double value)
{
    std::ostringstream os;
    os.precision(17);
    os << what << " (cell " << cell;
    if (edge >= 0) os << ", edge " << edge;
    os << "): " << value;
    return os.str();
}

} // namespace

ValidationReport validate_admissibility(const Mesh& mesh, const ValidationOptions& opts)
{
    ValidationReport r;
    r.theta = mesh.theta();
    r.h = mesh.h();

    auto add = [&](ViolationKind kind, Index cell, Index edge, double value, const char* what) {
        r.violations.push_back({kind, cell, edge, value, describe(what, cell, edge, value)});
    };

    for (const Cell& c : mesh.cells()) {
        const double res = chxs_residual(mesh, c.id);
        r.max_chxs_residual = std::max(r.max_chxs_residual, res);
        if (!(res <= opts.chxs_tol)) add(ViolationKind::chxs_residual, c.id, -1, res, "geometric identity residual");

        double min_dist = std::numeric_limits<double>::infinity();
        for (Index e : c.edge_ids) {
            const Edge& s = mesh.edge(e);
            const double dist = s.distance_from(c.id);
            min_dist = std::min(min_dist, dist);
            if (!(dist >= opts.theta_min * c.diameter)) {
                add(ViolationKind::distance_below_theta, c.id, e, dist / c.diameter, "d_{K,sigma}/diam(K) below theta_min");
            }
        }
        const double tol = opts.containment_tol * c.diameter;
        if (min_dist < -tol) {
            add(ViolationKind::center_outside, c.id, -1, min_dist, "cell point outside the closed cell");
        } else if (min_dist <= tol) {
            ++r.centers_on_boundary;
        }
    }

    for (const Edge& s : mesh.edges()) {
        if (s.is_boundary()) {
            const Point& z = *s.projection;
            if (!projection_in_edge(mesh, s, z, opts.containment_tol)) {
                add(ViolationKind::projection_outside, s.inner_cell, s.id, (z - s.barycenter).norm(),
                    "boundary projection z_sigma outside the edge");
            }
            if ((z - s.barycenter).norm() > opts.hypregee_tol) r.hypregee_sufficient = false;
            continue;
        }
        const Point dx = mesh.cell(*s.outer_cell).center - mesh.cell(s.inner_cell).center;
        const double len = dx.norm();
        double dev = 0;
        if (len == 0) {
            dev = M_PI / 2;
        } else {
            const double cosang = std::clamp(dx.dot(s.normal) / len, -1.0, 1.0);
            // acos loses precision near 1; use the sine of the deviation.
            const double sinang = (dx - dx.dot(s.normal) * s.normal).norm() / len;
            dev = cosang > 0 ? std::asin(std::min(1.0, sinang)) : M_PI - std::asin(std::min(1.0, sinang));
        }
        r.max_orthogonality_deviation = std::max(r.max_orthogonality_deviation, dev);
        if (!(dev <= opts.orthogonality_tol)) {
            add(ViolationKind::non_orthogonal, s.inner_cell, s.id, dev, "x_K x_L not orthogonal to K|L (rad)");
        }
    }
    return r;
}

void require_admissible(const Mesh& mesh, const ValidationOptions& opts)
{
    const ValidationReport r = validate_admissibility(mesh, opts);
    if (!r.admissible()) {
        const Violation& v = r.violations.front();
        throw InadmissibleMeshError("inadmissible mesh: " + v.message, v.cell);
    }
}

} // namespace fvgrad
