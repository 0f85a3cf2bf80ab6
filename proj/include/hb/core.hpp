#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace hb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Default tolerances: geometric predicates vs. linear-algebra residuals.
constexpr double kTolGeometry = 1e-9;
constexpr double kTolLinear = 1e-12;

enum class ErrorCode {
    NonCollinear,
    DegenerateConfiguration,
    AtInfinity,
    SingularForm,
    TangentWall,
    InvalidSignature,
    NonUnitDeterminant,
    NotInterior,
    NumericalFailure,
    ZeroVector,
    SignatureLost,
    NotOnBoundary,
    IncidentPolePlane,
    WallMissesDomain,
    PoleInsideDomain,
    ConeConditionFailed,
    RelationViolated,
    WallsIntersect,
    RegionNotContained,
    NoHyperbolicFound,
    StabilizerNontrivial,
    SchemaError,
    DimensionUnsupported,
    UnboundedDomain,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

// Three-valued containment. `exact=false` marks verdicts obtained past the
// truncation frontier of a piecewise domain.
enum class Region { Interior, Boundary, Exterior };

struct Containment {
    Region region = Region::Exterior;
    bool exact = true;
    // Signed margin in the domain's native scale (< 0 inside).
    double margin = 0.0;

    bool interior() const { return region == Region::Interior; }
    bool boundary() const { return region == Region::Boundary; }
    bool exterior() const { return region == Region::Exterior; }
};

} // namespace hb
