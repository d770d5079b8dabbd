#pragma once

#include "twistlab/enflo.hpp"
#include "twistlab/extops.hpp"

namespace twistlab {

/// Finite group given by its multiplication table.
struct FiniteGroup {
    int order = 1;
    std::vector<std::vector<int>> table; // table[a][b] = a*b
    int identity = 0;
    std::vector<int> inverse;

    /// Validates Latin-square structure, identity, inverses and associativity.
    static FiniteGroup from_table(std::vector<std::vector<int>> table);
    static FiniteGroup cyclic(int n);
    /// Order 2n; elements 0..n-1 are rotations, n..2n-1 reflections.
    static FiniteGroup dihedral(int n);

    int mul(int a, int b) const { return table[static_cast<size_t>(a)][static_cast<size_t>(b)]; }
    int inv(int a) const { return inverse[static_cast<size_t>(a)]; }

    std::string to_json() const;
    static FiniteGroup from_json(const std::string& text);
};

struct Representation {
    FiniteGroup group;
    NormedSpace space;
    std::vector<Mat> matrices;

    const Mat& operator()(int g) const { return matrices[static_cast<size_t>(g)]; }

    /// {"group": ..., "space": ..., "matrices": [[[..]],...]}
    std::string to_json() const;
    static Representation from_json(const std::string& text);
};

struct RepReport {
    bool pass = false;
    double identity_residual = 0;
    double hom_residual = 0;    // max over pairs of |T(g1 g2) - T(g1) T(g2)|
    double min_singular = 0;
};

RepReport validate_representation(const Representation& rep);

Representation cyclic_rotation_representation(int n);
Representation dihedral_defining_representation(int n);

/// T(g) = [[T1(g), T1(g) B - B T2(g)], [0, T2(g)]]; a representation for any B.
Representation block_triangular_representation(const Representation& t1, const Representation& t2,
                                                const Mat& corner_seed);

/// Restriction to im(i) and the induced quotient action. Throws when im(i)
/// is not invariant, naming the offending element.
std::pair<Representation, Representation> invariant_extension(const Representation& big,
                                                              const Extension& ext);

/// g -> value in R(F, E); entries are maps in the DSL.
struct Cocycle {
    FiniteGroup group;
    NormedSpace f_space, e_space;
    std::vector<HomMap> values;

    const HomMap& operator()(int g) const { return values[static_cast<size_t>(g)]; }

    /// {"group": ..., "F": ..., "E": ..., "values": ["<dsl>", ...]}
    std::string to_json() const;
    static Cocycle from_json(const std::string& text);
};

/// psi(g) = i^{-1}(T(g) p(T2(g)^{-1} x) - p(x)). Verifies on samples that the
/// value lands in im(i) before inverting.
Cocycle psi_cocycle(const Representation& big, const Representation& t1, const Representation& t2,
                    const Extension& ext, const Selection& p);

struct CocycleReport {
    double cocycle_residual = 0; // M(g1 g2) = g1 M(g2) + M(g1)
    bool values_linear = false;
    bool coboundary_found = false;
    double coboundary_residual = 0;
    std::optional<HomMap> coboundary_witness;
    bool inconclusive = false; // nonlinear values, averaging candidate failed
};

CocycleReport check_cocycle(const Cocycle& m, const Representation& t1, const Representation& t2,
                            int samples, uint64_t seed);

struct CompatibilityReport {
    double max_residual = 0;
    int samples = 0;
};

/// Residual of d Phi(g) - rho(Psi(g)) - rho(g.w - w) over sampled pairs;
/// w is the selection-difference witness (zero when Phi and Psi come from one
/// selection).
CompatibilityReport check_compatibility(const FactorSystem& phi, const Cocycle& psi,
                                        const HomMap& witness, const Representation& t1,
                                        const Representation& t2, int samples, uint64_t seed);

/// Group action on the twisted space built from (T1, T2, Phi, Psi):
/// T(g)(x, y) = (T1(g) x + Psi(g)(T2(g) y), T2(g) y).
struct TwistedGroupAction {
    FiniteGroup group;
    TwistedSpace space;
    Representation t1, t2;
    Cocycle psi;
    double hom_residual = 0;      // recorded at construction
    double additivity_residual = 0;

    TwistedPair apply(int g, const TwistedPair& z) const;
};

/// Builds the action and verifies on samples that it composes correctly and
/// is additive for the twisted addition; throws above 1e-6.
TwistedGroupAction reconstruct(const Representation& t1, const Representation& t2,
                               const FactorSystem& phi, const Cocycle& psi, int samples = 64,
                               uint64_t seed = 0x9EC0u);

struct EquivalenceResult {
    bool found = false;
    Mat h;
    double residual = 0;     // congruence + intertwining, max abs entry
    double min_singular = 0;
};

/// Joint linear solve for a congruence h that also intertwines the two
/// linear actions; "not found" at tolerance is reported, not thrown.
EquivalenceResult equivalent_representations(const Representation& ta, const Extension& ext_a,
                                             const Representation& tb, const Extension& ext_b,
                                             double tol = 1e-8);

struct RoundTripReport {
    double intertwine_residual = 0;
    double embed_residual = 0;
    int samples = 0;
    bool pass = false;
};

/// Round-trip equivalence against a reconstructed twisted action via the
/// structural intertwiner W(u) = (i^{-1}(u - p(sigma u)), sigma u), which is
/// additive for the two vector structures; verified by sampling.
RoundTripReport equivalent_representations(const Representation& big, const Extension& ext,
                                           const Selection& p, const TwistedGroupAction& action,
                                           int samples, uint64_t seed, double tol = 1e-8);

struct CohomologyDims {
    int z1 = 0;
    int b1 = 0;
    int h1 = 0;
};

/// Kernel computation of Z^1 and B^1 for the module L(F, E) with the action
/// h -> T1(g) h T2(g)^{-1}.
CohomologyDims linear_cohomology_dims(const FiniteGroup& group, const std::vector<Mat>& t1,
                                      const std::vector<Mat>& t2, double rank_tol = 1e-10);

/// A linear cocycle outside B^1 when one exists; nullopt when Z^1 = B^1.
std::optional<std::vector<Mat>> non_coboundary_cocycle(const FiniteGroup& group,
                                                       const std::vector<Mat>& t1,
                                                       const std::vector<Mat>& t2,
                                                       double rank_tol = 1e-10);

} // namespace twistlab
