#pragma once

#include "hb/convex.hpp"
#include "hb/core.hpp"
#include "hb/groups.hpp"
#include "hb/projective.hpp"

#include <memory>

namespace hb {

struct BendParams {
    double t = 0.0;
    int depth = 6;        // chamber-tree truncation radius
    int n = 0;            // dimension; 0 means take it from the base domain
    int wall_words = 7;   // word length used to generate the wall system
    int guard_samples = 2000;
    std::uint64_t seed = 0x5eed;
};

/// A wall with its pole and the side flag selecting the component kept fixed
/// by a fold.
struct WallSpec {
    ProjHyperplane plane;
    ProjPoint pole_point;
    int side = 1;
};

/// The projective transformation that is the identity on H, fixes p, and has
/// eigenvalue e^{nt} on the line of p (so e^{-t} on the hyperplane lift):
/// e^{-t} (I + (e^{(n+1)t} - 1) p nu^T / (nu^T p)).
ProjMap bending_map(const ProjHyperplane& h, const ProjPoint& p, double t, int n);

/// Sampled test that the half-cone with apex p over H ∩ Ω contains Ω: the
/// line through p and any interior point must meet H inside the closure, on
/// the apex-consistent side. Throws WallMissesDomain / PoleInsideDomain.
bool cone_condition(const ConvexDomain& omega, const ProjHyperplane& h, const ProjPoint& p,
                    int samples, std::uint64_t seed);

struct PliResult {
    std::shared_ptr<PliDomain> domain;
    int convexity_violations = 0;
    bool cone_ok = true;
};

/// One fold: keeps the side of the wall selected by `side` and maps the other
/// component by the bending transformation. The cone condition is sampled as
/// a guard; with enforce_guard it throws on failure, otherwise the result is
/// flagged.
PliResult pli(std::shared_ptr<const ConvexDomain> omega, const WallSpec& wall, double t,
              int samples, std::uint64_t seed, bool enforce_guard = true);

struct BendResult {
    std::shared_ptr<BentDomain> domain;
    Representation rho_t;
    ProjMap bend_generator;        // the one-parameter centralizer element a_t
    WallSpec base_wall;
    double relation_residual = 0.0;     // worst decomposition relation residual
    double centralizer_residual = 0.0;  // worst ||a_t rho0(d) - rho0(d) a_t||
    double equivariance_residual = 0.0; // worst cocycle mismatch at shallow depth
    int cocycle_sign = 1;
};

/// Deformed representation by the centralizer element: amalgam keeps one side
/// and conjugates the other; HNN multiplies the stable letter.
Representation bend_representation(const Representation& rho0, const Decomposition& dec,
                                   const ProjMap& a_t, const ProjMap& a_t_inv);

/// Worst relative residual of the decomposition relations under `rho`.
double decomposition_residual(const Representation& rho, const Decomposition& dec);

/// Builds the deformed holonomy and the chamber-tree truncation of the bent
/// domain. Walls are the orbit of the base wall under words up to
/// params.wall_words; the cocycle multiplies one conjugated bending map per
/// wall crossing, with the sign fixed by the transported co-orientation and
/// a global choice pinned by equivariance against rho_t.
BendResult build_bent_domain(const Representation& rho0, const Decomposition& dec,
                             const QuadricDomain& base, const WallSpec& wall0,
                             const BendParams& params);

} // namespace hb
