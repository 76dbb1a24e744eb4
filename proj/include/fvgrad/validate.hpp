#pragma once

#include <string>
#include <vector>

#include <fvgrad/mesh.hpp>

namespace fvgrad {

struct ValidationOptions
{
    double theta_min = 0.02;
    double orthogonality_tol = 1e-8;   // radians
    double chxs_tol = 1e-10;
    double hypregee_tol = 1e-12;
    double containment_tol = 1e-12;    // relative to diam(K) or m(sigma)
};

enum class ViolationKind
{
    non_orthogonal,
    center_outside,
    projection_outside,
    distance_below_theta,
    chxs_residual,
};

const char* to_string(ViolationKind kind);

struct Violation
{
    ViolationKind kind;
    Index cell = -1;
    Index edge = -1;
    double value = 0;
    std::string message;
};

struct ValidationReport
{
    std::vector<Violation> violations;
    bool hypregee_sufficient = true;
    double theta = 0;                      // min d_{K,sigma}/diam(K)
    double h = 0;
    double max_orthogonality_deviation = 0;
    double max_chxs_residual = 0;
    Index centers_on_boundary = 0;         // x_K in the closed but not the open cell

    bool admissible() const { return violations.empty(); }
    Index count(ViolationKind kind) const;
};

/// Residual max-entry of sum_sigma m(sigma)(x_sigma - x_K) n^T - m(K) I.
double chxs_residual(const Mesh& mesh, Index cell);

/// Checks the admissibility conditions of a finite volume discretization.
/// Never throws on geometric defects; every defect becomes a report entry.
ValidationReport validate_admissibility(const Mesh& mesh, const ValidationOptions& opts = {});

/// Throws InadmissibleMeshError naming the first offending cell.
void require_admissible(const Mesh& mesh, const ValidationOptions& opts = {});

} // namespace fvgrad
