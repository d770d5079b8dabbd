#pragma once

#include "twistlab/maps.hpp"

namespace twistlab {

/// Element of a twisted sum: x in E, y in F.
struct TwistedPair {
    Vec x, y;
};

/// {"x": [...], "y": [...]}
std::string pair_to_json(const TwistedPair& z);
TwistedPair pair_from_json(const std::string& text);

/// The space E x_phi F with addition (x1,y1)+(x2,y2) = (x1+x2-phi(y1,y2), y1+y2)
/// and the gauge of conv(S_E u S_F) as norm. The gauge itself is only
/// computable as a two-sided sandwich; see twisted_norm_bounds.
class TwistedSpace {
  public:
    TwistedSpace(NormedSpace e_space, NormedSpace f_space, FactorSystem phi,
                 int c_est_configs = 160, int c_est_refine = 120, uint64_t c_est_seed = 0x7157EDu);

    const NormedSpace& e_space() const { return e_; }
    const NormedSpace& f_space() const { return f_; }
    const FactorSystem& phi() const { return phi_; }

    /// Lower estimate of the quasi-additivity constant C(phi), sampled at
    /// construction. Exact zero when phi evaluates to zero identically.
    double c_lower_estimate() const { return c_est_; }

    TwistedPair zero() const;
    TwistedPair add(const TwistedPair& a, const TwistedPair& b) const;
    TwistedPair neg(const TwistedPair& a) const;
    TwistedPair sub(const TwistedPair& a, const TwistedPair& b) const;
    TwistedPair scale(double c, const TwistedPair& a) const;

    /// {"E": ..., "F": ..., "phi": "<map DSL>"}; requires phi = rho(h).
    std::string to_json() const;
    static TwistedSpace from_json(const std::string& text);

  private:
    NormedSpace e_, f_;
    FactorSystem phi_;
    double c_est_ = 0.0;
};

struct NormBounds {
    double lower = 0.0;
    double upper = 0.0;
    /// The lower bound leans on the sampled C(phi) estimate and is not
    /// certified when this is set.
    bool lower_uses_estimate = false;
};

/// Sandwich for the gauge norm of z. The upper bound searches decompositions
/// z = (x~, 0) + sum_i (0, y_i) with at most split_depth pieces; the lower
/// bound combines the quotient bound |y|_F with the C(phi) sandwich.
/// Increasing split_depth never increases the upper bound.
NormBounds twisted_norm_bounds(const TwistedSpace& space, const TwistedPair& z, int split_depth);

/// The right inverse p(y) = (0, y) of the quotient map.
class CanonicalSelection {
  public:
    explicit CanonicalSelection(TwistedSpace space) : space_(std::move(space)) {}

    const TwistedSpace& space() const { return space_; }

    TwistedPair operator()(const Vec& y) const;

    /// rho p (y1, y2) computed through twisted addition. The F component of
    /// the result vanishes identically; returns the E component.
    Vec rho(const Vec& y1, const Vec& y2) const;

  private:
    TwistedSpace space_;
};

inline CanonicalSelection canonical_selection(const TwistedSpace& space) {
    return CanonicalSelection(space);
}

} // namespace twistlab
