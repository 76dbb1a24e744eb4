#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <fvgrad/mesh.hpp>
#include <fvgrad/validate.hpp>

namespace fvgrad {

struct ImportOptions
{
    bool allow_invalid = false;     // diagnostic mode: skip the admissibility gate
    ValidationOptions validation;
};

/// Mesh document: {"dimension": 2, "vertices": [[x, y], ...],
/// "cells": [{"vertices": [i, j, k, ...], "center": [x, y]}, ...]}.
/// Edges, normals and transmissibilities are always derived.
Mesh parse_mesh(std::string_view text, const ImportOptions& opts = {});
Mesh import_mesh(const std::filesystem::path& path, const ImportOptions& opts = {});

std::string mesh_to_string(const Mesh& mesh);
void export_mesh(const Mesh& mesh, const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace fvgrad
