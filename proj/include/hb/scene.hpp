#pragma once

#include "hb/bending.hpp"
#include "hb/convex.hpp"
#include "hb/core.hpp"
#include "hb/groups.hpp"

#include <memory>
#include <string>
#include <vector>

namespace hb {

/// Declarative description of a domain plus probe and render settings,
/// serialized as JSON. Parsing fills defaults; serialization is canonical so
/// scenes round-trip byte-identically.
struct Scene {
    int version = 1;
    int dimension = 2;

    enum class DomainKind { Ellipsoid, Polytope, Bend };
    DomainKind kind = DomainKind::Ellipsoid;

    // Ellipsoid: the symmetric form (row-major), signature (n,1).
    Mat form;
    // Polytope: affine half-spaces a.y <= b in the standard chart.
    std::vector<std::pair<Vec, double>> halfspaces;
    // Bend recipe.
    std::string base_rep = "punctured-torus";
    double bend_t = 0.2;
    int bend_depth = 6;
    int bend_wall_words = 7;

    // Probe settings.
    long samples = 10000;
    std::uint64_t seed = 20240601;
    double tol_geometry = kTolGeometry;
    double tol_linear = kTolLinear;

    // Render settings.
    double viewport_min = -1.1, viewport_max = 1.1;
    int image_size = 1000;
    double stroke_width = 2.0;
    std::string color_boundary = "#15355e";
    std::string color_walls = "#b33a3a";
    std::string color_tiles = "#4a7f5c";
    int orbit_words = 4;
    int boundary_samples = 512;
};

Scene parse_scene(const std::string& text);
Scene load_scene_file(const std::string& path);
std::string serialize_scene(const Scene& scene);

/// Realized scene: the domain object plus, for bend scenes, the deformation
/// data.
struct SceneDomain {
    std::shared_ptr<const ConvexDomain> domain;
    std::shared_ptr<const QuadricDomain> quadric; // when the domain is one
    std::shared_ptr<BendResult> bend;             // when the scene is a bend
    Representation rep;                            // base representation if any
    bool has_rep = false;
};

SceneDomain realize_scene(const Scene& scene);

} // namespace hb
