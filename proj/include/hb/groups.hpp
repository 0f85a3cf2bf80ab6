#pragma once

#include "hb/convex.hpp"
#include "hb/core.hpp"
#include "hb/projective.hpp"
#include "hb/rng.hpp"

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hb {

/// Word in the generators: sequence of (name, exponent ±1).
using Word = std::vector<std::pair<std::string, int>>;

Word parse_word(const std::string& text); // e.g. "A B A^-1 B^-1" or "a b A B"
std::string word_to_string(const Word& w);
Word inverse_word(const Word& w);
Word concat(const Word& a, const Word& b);

/// Splitting of the group along the wall subgroup: amalgam (separating wall)
/// or HNN extension (non-separating wall).
struct Decomposition {
    enum class Kind { Amalgam, Hnn };
    Kind kind = Kind::Hnn;
    std::vector<Word> wall_subgroup; // generators of pi_1 of the hypersurface
    // Amalgam: which generators lie on which side of the wall.
    std::vector<std::string> left_generators, right_generators;
    // HNN: stable letter and boundary pairings (gamma_g, gamma_d) with
    // gamma_g = alpha^{-1} gamma_d alpha.
    std::string stable_letter;
    std::vector<std::pair<Word, Word>> pairings;
};

/// Assignment of generators to determinant-one projective maps.
struct Representation {
    std::vector<std::string> generators;
    std::map<std::string, ProjMap> images;
    /// Optional exact inverses (kept when the entries are known in closed
    /// form; avoids LU noise in long word products).
    std::map<std::string, ProjMap> inverse_images;
    std::optional<Decomposition> decomposition;

    int ambient_dim() const { return images.begin()->second.ambient_dim(); }
    ProjMap image_of(const std::string& name, int exponent) const;
    ProjMap evaluate(const Word& w) const;
};

/// Random reduced word of length exactly `len`.
Word random_reduced_word(const std::vector<std::string>& generators, int len, Rng& rng);

/// All reduced words of length <= max_len (including the empty word).
std::vector<Word> reduced_words(const std::vector<std::string>& generators, int max_len);

enum class ElementType { Hyperbolic, ParabolicUnipotent, EllipticOrIdentity };

struct Classification {
    ElementType type = ElementType::EllipticOrIdentity;
    std::vector<std::complex<double>> eigenvalues;
    double spectral_radius = 1.0;
    bool loxodromic = false; // eigenvalues of g^2 simple and positive
    // Hyperbolic elements: the two fixed points on the boundary.
    std::optional<ProjPoint> attracting, repelling;
    // Rigorous bound max_i |lambda_i - 1| <= ||(g-I)^{n+1}||^{1/(n+1)} used to
    // certify unipotents; QR eigenvalues of defective matrices carry
    // eps^{1/3}-size noise and cannot be trusted at tight tolerances.
    double unipotent_bound = std::numeric_limits<double>::infinity();
};

/// Classify an automorphism of a properly convex set by its spectrum.
Classification classify_element(const ProjMap& g, double tol = 1e-6);

/// Dimension of the linear span of {rho(w) : |w| <= max_word_len} in matrix
/// space; (n+1)^2 certifies irreducibility by Burnside's theorem.
int irreducibility_dimension(const Representation& rho, int max_word_len,
                             double rank_tol = 1e-8);

/// Attracting fixed points of random hyperbolic words; every returned point
/// lies on the boundary of the invariant domain.
struct LimitSetSample {
    std::vector<ProjPoint> points;
    std::vector<Word> words;
};
LimitSetSample limit_set_sample(const Representation& rho, const ConvexDomain& domain,
                                int word_len, int count, std::uint64_t seed);

/// Dirichlet domain in the Klein model: bisectors of [x0, gamma x0] are
/// projective hyperplanes, so the domain is a polytope piece of the ellipsoid.
struct DirichletDomain {
    ProjPoint base_point;
    std::vector<std::pair<Vec, double>> bisectors; // active affine half-spaces a.y <= b
    std::vector<Word> bisector_words;
    std::vector<std::pair<Vec, double>> all_bisectors; // every word's half-space
    const QuadricDomain* domain = nullptr;
    AffineChart chart;

    bool contains(const ProjPoint& x, double tol = kTolGeometry) const;
    /// Membership margin: max over half-spaces of a.y - b (negative inside).
    double margin(const ProjPoint& x) const;
};

DirichletDomain dirichlet_domain(const Representation& rho, const QuadricDomain& domain,
                                 const ProjPoint& x0, int word_len);

/// Generators of the free group of the once-punctured torus inside SO(2,1),
/// as symmetric-square images of an SL(2,R) pair, conjugated so the invariant
/// form is diag(1,1,-1). Ships with its HNN decomposition data.
struct PuncturedTorus {
    Representation rep;
    Mat base_form;               // diag(1,1,-1)
    ProjHyperplane wall;         // projective line through the axis of A
    ProjPoint wall_pole;         // third eigendirection of rho(A)
    Mat sl2_a, sl2_b;            // the SL(2,R) pair upstairs
};
PuncturedTorus punctured_torus_rep();

/// Symmetric-square representation SL(2,R) -> SL(3,R) on binary quadratic
/// coefficients.
Mat sym_square(const Mat& g2);

/// Membership test for the orthogonal group of a symmetric form.
bool so_q_membership(const ProjMap& g, const Mat& q, double tol = kTolLinear * 10);

/// Random element of SO(q)^0 via the exponential of a random Lie algebra
/// element (X^T q = -q X).
Mat random_so_q(const Mat& q, Rng& rng, double scale = 0.7);

/// Matrix exponential by scaling and squaring (series at machine precision).
Mat expm(const Mat& x);

} // namespace hb
