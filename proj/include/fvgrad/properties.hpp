#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <fvgrad/mesh.hpp>

namespace fvgrad {

struct PropertyOptions
{
    std::uint64_t seed = 0;
    int samples = 200;          // random fields per property
    double alpha0 = 0.5;        // lower bound of the random alpha fields
    Index oracle_max_cells = 25;
};

struct PropertyResult
{
    std::string name;
    bool passed = false;
    bool skipped = false;
    double worst = 0;           // largest observed violation measure
    std::string detail;
};

struct PropertyReport
{
    std::vector<PropertyResult> results;

    bool all_passed() const;
    const PropertyResult& operator[](const std::string& name) const;
};

/// Geometric identities, discrete functional inequalities and assembly
/// invariants on one mesh. Report-only: failures never throw.
PropertyReport property_suite(const Mesh& mesh, const PropertyOptions& opts = {});

} // namespace fvgrad
