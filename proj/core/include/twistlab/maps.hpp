#pragma once

#include "twistlab/spaces.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace twistlab {

/// Continuous homogeneous bounded map between normed spaces, represented as
/// an expression tree so every map in the system serializes to one text form.
///
/// Grammar (whitespace insignificant):
///   expr   := "zero" | "kp" | "linear(" matrix ")" | "delta(" expr ")"
///           | "scale(" number "," expr ")" | "sum(" expr "," expr ")"
///           | "pre(" matrix "," expr ")" | "post(" matrix "," expr ")"
///   matrix := "[[" row ("],[" row)* "]]"
///
/// Node semantics:
///   zero          constant zero map
///   linear(M)     x -> M x
///   kp            x_i -> x_i * ln(|x| / |x_i|), base norm taken from the
///                 node's domain space; terms with x_i = 0 contribute 0
///   delta(h)      (x, y) -> (h(x), h(y), x|y| / sqrt(|x|^2 + |y|^2)) on
///                 Euclidean spaces, third block 0 at the origin
///   scale(c, h)   x -> c * h(x)
///   sum(a, b)     x -> a(x) + b(x)
///   pre(M, h)     x -> h(M x)
///   post(M, h)    x -> M h(x)
///
/// Spaces of inner delta/pre/post nodes that the grammar leaves open default
/// to plain Euclidean spaces of the matching dimension.
class HomMap {
  public:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    static HomMap zero(const NormedSpace& domain, const NormedSpace& codomain);
    static HomMap linear(Mat m, const NormedSpace& domain, const NormedSpace& codomain);
    /// Square matrix acting between plain Euclidean spaces.
    static HomMap linear(Mat m);
    static HomMap kalton_peck(const NormedSpace& base);
    static HomMap scale(double c, const HomMap& inner);
    static HomMap sum(const HomMap& a, const HomMap& b);
    static HomMap pre(Mat m, const HomMap& inner);
    static HomMap post(Mat m, const HomMap& inner);

    const NormedSpace& domain() const { return domain_; }
    const NormedSpace& codomain() const { return codomain_; }

    /// Same tree viewed between different spaces of equal dimensions
    /// (pre/post default inner spaces to Euclidean; this fixes the outer ones).
    HomMap with_spaces(const NormedSpace& domain, const NormedSpace& codomain) const;

    Vec operator()(const Vec& x) const;

    /// Canonical DSL text; parse(print(h)) evaluates identically to h.
    std::string print() const;

    /// Composed matrix when the tree is structurally linear (no kp / delta).
    std::optional<Mat> as_matrix() const;
    bool is_linear() const { return as_matrix().has_value(); }

    const NodePtr& root() const { return root_; }
    HomMap(NormedSpace domain, NormedSpace codomain, NodePtr root);

  private:
    NormedSpace domain_, codomain_;
    NodePtr root_;
};

class ParseError : public Error {
  public:
    ParseError(const std::string& message, size_t position)
        : Error(message + " (at position " + std::to_string(position) + ")"), position_(position) {}
    size_t position() const { return position_; }

  private:
    size_t position_;
};

/// Parses the map DSL, resolving dimensions against the given spaces.
/// Syntax errors report the byte position; dimension mismatches name the node.
HomMap parse_map(const std::string& text, const NormedSpace& domain, const NormedSpace& codomain);

/// Lower estimate of sup |h(x)| over the domain unit sphere. Enlarging the
/// sample count never decreases the result (sample i depends only on seed, i).
double map_norm(const HomMap& h, int samples, uint64_t seed);

/// Symmetric homogeneous two-argument map F x F -> E satisfying the factor
/// system axioms. Either the non-additivity rho(h) of a map h, or extracted
/// from an extension through a selection (type-erased evaluation).
class FactorSystem {
  public:
    /// rho h (x, y) = h(x+y) - h(x) - h(y): three evaluations, two subtractions.
    static FactorSystem rho(const HomMap& h);

    /// Used by extension extraction; eval must already be E-valued.
    static FactorSystem from_eval(NormedSpace f_space, NormedSpace e_space,
                                  std::function<Vec(const Vec&, const Vec&)> eval);

    const NormedSpace& f_space() const { return f_; }
    const NormedSpace& e_space() const { return e_; }

    Vec operator()(const Vec& y1, const Vec& y2) const { return eval_(y1, y2); }

    /// Generator h when this factor system is rho(h).
    const std::optional<HomMap>& generator() const { return rho_of_; }

  private:
    FactorSystem(NormedSpace f, NormedSpace e, std::function<Vec(const Vec&, const Vec&)> eval,
                 std::optional<HomMap> rho_of)
        : f_(std::move(f)), e_(std::move(e)), eval_(std::move(eval)), rho_of_(std::move(rho_of)) {}

    NormedSpace f_, e_;
    std::function<Vec(const Vec&, const Vec&)> eval_;
    std::optional<HomMap> rho_of_;
};

inline FactorSystem rho(const HomMap& h) { return FactorSystem::rho(h); }

/// Max residuals of the factor-system axioms over sampled tuples, plus the
/// best observed quasi-additivity ratio (a lower estimate of |phi|).
struct AxiomReport {
    double homogeneity = 0;  // phi(lx, ly) = l phi(x, y)
    double symmetry = 0;     // phi(x, y) = phi(y, x)
    double right_zero = 0;   // phi(x, 0) = 0
    double cocycle = 0;      // phi(x,y) + phi(x+y,z) = phi(y,z) + phi(x,y+z)
    double inverse_pair = 0; // phi(y, -y) = 0
    double axiom5_ratio = 0; // max |sum_k phi(s_k, x_{k+1})| / sum |x_i|
    int samples = 0;
    std::vector<double> residual_samples; // per-sample max residual across axioms 1-4

    double max_axiom_residual() const {
        return std::max(std::max(homogeneity, symmetry), std::max(right_zero, std::max(cocycle, inverse_pair)));
    }
};

AxiomReport check_factor_axioms(const FactorSystem& phi, int sample_count, uint64_t seed);

/// Generic core, also used with test doubles.
AxiomReport check_factor_axioms(const NormedSpace& f_space, const NormedSpace& e_space,
                                const std::function<Vec(const Vec&, const Vec&)>& phi,
                                int sample_count, uint64_t seed);

/// Max quasi-additivity ratio over the given configs after gradient-free
/// coordinate refinement; a certified lower bound on |phi|.
double factor_norm_lower(const FactorSystem& phi, const std::vector<std::vector<Vec>>& configs,
                         int optimize_steps, uint64_t seed);

/// The quasi-additivity ratio of one config (no refinement).
double axiom5_ratio(const FactorSystem& phi, const std::vector<Vec>& config);

} // namespace twistlab
