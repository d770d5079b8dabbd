#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace twistlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Finite-dimensional real normed space. The serializable kinds are the
/// p-norm family (plain or weighted); direct sums, embedded subspaces and
/// quotients arise from extension constructions and evaluate their norms
/// structurally. Immutable and cheap to copy.
class NormedSpace {
  public:
    enum class Kind { P, WeightedP, DirectSum, Embedded, Quotient };

    /// Default space is l2(1); value types embedding a space need a default.
    NormedSpace();

    static NormedSpace lp(int dim, double p);
    static NormedSpace l1(int dim) { return lp(dim, 1.0); }
    static NormedSpace l2(int dim) { return lp(dim, 2.0); }
    static NormedSpace linf(int dim) { return lp(dim, std::numeric_limits<double>::infinity()); }
    static NormedSpace weighted_lp(double p, Vec weights);

    /// Sum norm ||(a,b)|| = ||a|| + ||b|| on the concatenated coordinates.
    static NormedSpace direct_sum(const NormedSpace& a, const NormedSpace& b);

    /// Subspace with coordinates v mapped into the parent by basis: norm(v) = parent.norm(basis*v).
    static NormedSpace embedded(const NormedSpace& parent, Mat basis);

    /// Quotient coordinates with representative map and kernel basis:
    /// norm(v) = min_t parent.norm(representative*v + kernel*t), evaluated by
    /// coordinate descent (diagnostic accuracy, not certified).
    static NormedSpace quotient(const NormedSpace& parent, Mat representative, Mat kernel);

    int dim() const;
    Kind kind() const;
    /// p exponent for Kind::P / Kind::WeightedP.
    double p() const;
    /// Plain p=2 norm, no weights.
    bool is_euclidean() const;

    double norm(const Vec& v) const;

    /// Structural equality (same kind, dim, parameters). Composite kinds compare children.
    bool same_as(const NormedSpace& other) const;

    /// {"dim": n, "norm": "l2" | {"p": x} | {"p": x, "weights": [...]}}; p = "inf" for the sup norm.
    /// Only Kind::P / Kind::WeightedP serialize.
    std::string to_json() const;
    static NormedSpace from_json(const std::string& text);

    struct Impl;
    const Impl& impl() const { return *impl_; }

  private:
    explicit NormedSpace(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

/// n >= 2 points with componentwise sum exactly cancelling (within 1e-12)
/// and no zero points. Certificate sets for quasi-additivity estimates.
struct ZeroSumConfig {
    NormedSpace space;
    std::vector<Vec> points;
};

/// Throws Error when the invariants fail.
void validate_zero_sum(const ZeroSumConfig& cfg, double tol = 1e-12);

double norm(const NormedSpace& space, const Vec& v);

/// Gaussian direction normalized by the space norm. Reproducible: sample i
/// depends only on (seed, i).
std::vector<Vec> sample_sphere(const NormedSpace& space, int count, uint64_t seed);

/// Draws n-1 sphere points and closes with the negated sum; rejects closing
/// points that are numerically zero and retries on a fresh substream.
ZeroSumConfig random_zero_sum_config(const NormedSpace& space, int n, uint64_t seed);

/// JSON array <-> vector helpers used by every serialized object.
std::string vec_to_json(const Vec& v);
Vec vec_from_json(const std::string& text);

} // namespace twistlab
