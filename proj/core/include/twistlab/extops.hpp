#pragma once

#include "twistlab/twisted.hpp"

#include <optional>

namespace twistlab {

/// Concrete short exact sequence 0 -> E -i-> G -sigma-> F -> 0 as matrices.
/// When twisted_backing is set the extension is in canonical coordinates
/// (i = [I;0], sigma = [0 I]) and G's vector addition is the twisted one;
/// all algebra that adds G-vectors must go through g_add / g_neg.
struct Extension {
    NormedSpace e_space, g_space, f_space;
    Mat i_matrix;     // dim G x dim E
    Mat sigma_matrix; // dim F x dim G
    std::optional<TwistedSpace> twisted_backing;

    Vec g_add(const Vec& u, const Vec& v) const;
    Vec g_neg(const Vec& u) const;

    /// {"E": ..., "F": ..., "i": [[..]], "sigma": [[..]], "phi"?: "<dsl>"}
    std::string to_json() const;
    static Extension from_json(const std::string& text);
};

Extension split_extension(const NormedSpace& e_space, const NormedSpace& f_space);

/// Twisted sum in canonical coordinates: G = E x_phi F with i(x) = (x, 0)
/// and sigma(x, y) = y.
Extension extension_from_factor(const NormedSpace& e_space, const NormedSpace& f_space,
                                const FactorSystem& phi);

struct ExtensionReport {
    bool pass = false;
    bool dims_ok = false;
    double i_min_singular = 0;      // injectivity margin
    double sigma_min_singular = 0;  // surjectivity margin
    double sigma_i_residual = 0;    // max |sigma * i|
    double exactness_residual = 0;  // ker sigma outside im i
    std::string detail;
};

/// Rank checks with singular value threshold 1e-10; failures are reported, not thrown.
ExtensionReport validate_extension(const Extension& ext);

/// Homogeneous right inverse of sigma, realized as a map in the DSL.
struct Selection {
    Extension extension;
    HomMap map; // F -> G, sigma . map = id
};

enum class SelectionMode { LinearPseudoinverse, Nonlinear };

/// Linear mode: minimum-norm linear right inverse of sigma. Nonlinear mode:
/// that plus i . h for the supplied h in R(F, E); still a right inverse
/// because sigma i = 0.
Selection selection_from_extension(const Extension& ext, SelectionMode mode,
                                   const std::optional<HomMap>& seed_map = std::nullopt);

/// max |sigma p(y) - y| over sphere probes; the Selection invariant is 1e-10.
double selection_residual(const Selection& p, int probes = 16);

/// phi(y1, y2) = i^{-1}(p(y1+y2) - p(y1) - p(y2)), differences taken in G's
/// own vector structure. Rejects maps that are not selections (sigma p != id)
/// and verifies on every evaluation that the value stays in im i.
FactorSystem factor_from_extension(const Extension& ext, const Selection& p);

/// Pushout along T: E -> X. Quotient coordinates are chosen so the X block
/// embeds as [I; 0] and sigma_1 i_1 = 0 holds structurally.
Extension pushout(const Mat& t_matrix, const Extension& ext,
                  const std::optional<NormedSpace>& x_space = std::nullopt);

/// Pullback along S: X -> F as the fiber subspace {(g, x) : sigma g = S x}.
Extension pullback(const Extension& ext, const Mat& s_matrix,
                   const std::optional<NormedSpace>& x_space = std::nullopt);

/// nabla (ext1 + ext2) Delta: pushout of the codiagonal, then pullback of the diagonal.
Extension baer_sum(const Extension& ext1, const Extension& ext2);

struct CongruenceWitness {
    Mat h;
    double residual_i = 0;     // max |h i1 - i2|
    double residual_sigma = 0; // max |sigma2 h - sigma1|
    double min_singular = 0;
};

/// Solves h i1 = i2, sigma2 h = sigma1 by least squares over the affine
/// solution set. For valid extensions of the same pair a solution always
/// exists and is invertible; absence at tolerance signals data error.
std::optional<CongruenceWitness> find_congruence(const Extension& ext1, const Extension& ext2,
                                                 double tol = 1e-8);

/// Moore-Penrose pseudoinverse (shared by extops and grouprep).
Mat pinv(const Mat& m, double tol = 1e-12);

Mat random_matrix(int rows, int cols, uint64_t seed, double scale = 1.0);

} // namespace twistlab
