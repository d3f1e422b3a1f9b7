#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "modetrack/bspline.hpp"
#include "modetrack/common.hpp"

namespace modetrack {

/// Analytic reference spectrum advertised by a geometry fixture: the shape at
/// t=1 is a disk of the given radius, so tracked endpoints are classified
/// against its closed-form 2D spectrum.
struct DiskReference {
  double radius = 1.0;
  BoundaryCondition bc = BoundaryCondition::Dirichlet;
  /// Relative frequency tolerance for endpoint classification. Convention:
  /// 10x the observed discretization error of the fixture's fundamental mode.
  double rel_tol = 0.02;
  /// Default solution-space h-refinement shipped with the fixture.
  int refine_levels = 1;
};

struct GeometryFixture {
  GeometryMorph morph;
  std::optional<DiskReference> reference;
};

/// Reads the geometry fixture JSON:
///   { "degree_u", "degree_v", "knots_u", "knots_v",
///     "mesh_start": [[ [x,y], ... ], ...], "mesh_end": [...],
///     "reference": { "type": "disk", ... }  (optional) }
/// Control points are row-major with u fastest, lengths in meters.
GeometryFixture load_geometry_fixture(const std::filesystem::path& path);

void save_geometry_fixture(const std::filesystem::path& path,
                           const GeometryFixture& fixture,
                           const std::string& comment = "");

}  // namespace modetrack
