#pragma once

#include "hb/scene.hpp"

#include <string>

namespace hb {

enum class RenderMode { Tiling, BentDomain, FundamentalDomain };

/// Deterministic SVG document (fixed 6-decimal coordinates): domain boundary
/// as a sampled polyline, wall chords highlighted, and for scenes carrying a
/// group action the orbit tiles of the Dirichlet domain up to the configured
/// word length.
std::string render_svg(const Scene& scene, RenderMode mode);

RenderMode parse_render_mode(const std::string& name);

} // namespace hb
