#include "twistlab/spaces.hpp"

#include "twistlab/rng.hpp"

#include <json.hpp>

#include <cmath>

namespace twistlab {

using nlohmann::json;

struct NormedSpace::Impl {
    Kind kind = Kind::P;
    int dim = 0;
    double p = 2.0;
    Vec weights; // WeightedP
    std::shared_ptr<const Impl> left, right; // DirectSum
    std::shared_ptr<const Impl> parent;      // Embedded / Quotient
    Mat basis;                               // Embedded: parent_dim x dim
    Mat representative;                      // Quotient: parent_dim x dim
    Mat kernel;                              // Quotient: parent_dim x k
};

namespace {

double impl_norm(const NormedSpace::Impl& s, const Vec& v);

double pnorm(double p, const Vec& v, const Vec* weights) {
    const auto n = v.size();
    if (std::isinf(p)) {
        double m = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double a = std::abs(v[i]);
            if (weights) a *= (*weights)[i];
            m = std::max(m, a);
        }
        return m;
    }
    if (p == 2.0 && !weights) return v.norm();
    if (p == 1.0 && !weights) return v.lpNorm<1>();
    double scale = v.lpNorm<Eigen::Infinity>();
    if (scale == 0.0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double a = std::abs(v[i]) / scale;
        double w = weights ? (*weights)[i] : 1.0;
        acc += w * std::pow(a, p);
    }
    return scale * std::pow(acc, 1.0 / p);
}

// Convex minimization of t -> parent_norm(base + K t) by cyclic coordinate
// descent with golden-section line search. Diagnostic accuracy only.
double quotient_norm(const NormedSpace::Impl& parent, const Vec& base, const Mat& kernel) {
    if (kernel.cols() == 0) return impl_norm(parent, base);
    Vec t = Vec::Zero(kernel.cols());
    auto f = [&](const Vec& tt) { return impl_norm(parent, base + kernel * tt); };
    double cur = f(t);
    const double gr = 0.6180339887498949;
    double range = std::max(1.0, cur);
    for (int sweep = 0; sweep < 8; ++sweep) {
        for (Eigen::Index j = 0; j < t.size(); ++j) {
            double a = t[j] - range, b = t[j] + range;
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            Vec tt = t;
            tt[j] = x1;
            double f1 = f(tt);
            tt[j] = x2;
            double f2 = f(tt);
            for (int it = 0; it < 40; ++it) {
                if (f1 <= f2) {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - gr * (b - a);
                    tt[j] = x1;
                    f1 = f(tt);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + gr * (b - a);
                    tt[j] = x2;
                    f2 = f(tt);
                }
            }
            t[j] = (f1 <= f2) ? x1 : x2;
            cur = std::min(cur, std::min(f1, f2));
        }
        range *= 0.5;
    }
    return cur;
}

double impl_norm(const NormedSpace::Impl& s, const Vec& v) {
    switch (s.kind) {
    case NormedSpace::Kind::P:
        return pnorm(s.p, v, nullptr);
    case NormedSpace::Kind::WeightedP:
        return pnorm(s.p, v, &s.weights);
    case NormedSpace::Kind::DirectSum:
        return impl_norm(*s.left, v.head(s.left->dim)) + impl_norm(*s.right, v.tail(s.right->dim));
    case NormedSpace::Kind::Embedded:
        return impl_norm(*s.parent, s.basis * v);
    case NormedSpace::Kind::Quotient:
        return quotient_norm(*s.parent, s.representative * v, s.kernel);
    }
    throw Error("unreachable norm kind");
}

bool impl_same(const NormedSpace::Impl& a, const NormedSpace::Impl& b) {
    if (a.kind != b.kind || a.dim != b.dim) return false;
    switch (a.kind) {
    case NormedSpace::Kind::P:
        return a.p == b.p || (std::isinf(a.p) && std::isinf(b.p));
    case NormedSpace::Kind::WeightedP:
        return a.p == b.p && a.weights == b.weights;
    case NormedSpace::Kind::DirectSum:
        return impl_same(*a.left, *b.left) && impl_same(*a.right, *b.right);
    case NormedSpace::Kind::Embedded:
        return impl_same(*a.parent, *b.parent) && a.basis == b.basis;
    case NormedSpace::Kind::Quotient:
        return impl_same(*a.parent, *b.parent) && a.representative == b.representative &&
               a.kernel == b.kernel;
    }
    return false;
}

} // namespace

NormedSpace::NormedSpace() : impl_(lp(1, 2.0).impl_) {}

NormedSpace NormedSpace::lp(int dim, double p) {
    if (dim < 1) throw Error("NormedSpace: dim must be >= 1");
    if (!(p >= 1.0)) throw Error("NormedSpace: p must be >= 1");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::P;
    impl->dim = dim;
    impl->p = p;
    return NormedSpace(impl);
}

NormedSpace NormedSpace::weighted_lp(double p, Vec weights) {
    if (weights.size() < 1) throw Error("NormedSpace: dim must be >= 1");
    if (!(p >= 1.0)) throw Error("NormedSpace: p must be >= 1");
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        if (!(weights[i] > 0.0)) throw Error("NormedSpace: weights must be strictly positive");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::WeightedP;
    impl->dim = static_cast<int>(weights.size());
    impl->p = p;
    impl->weights = std::move(weights);
    return NormedSpace(impl);
}

NormedSpace NormedSpace::direct_sum(const NormedSpace& a, const NormedSpace& b) {
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::DirectSum;
    impl->dim = a.dim() + b.dim();
    impl->left = a.impl_;
    impl->right = b.impl_;
    return NormedSpace(impl);
}

NormedSpace NormedSpace::embedded(const NormedSpace& parent, Mat basis) {
    if (basis.rows() != parent.dim()) throw Error("embedded: basis rows must match parent dim");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::Embedded;
    impl->dim = static_cast<int>(basis.cols());
    impl->parent = parent.impl_;
    impl->basis = std::move(basis);
    return NormedSpace(impl);
}

NormedSpace NormedSpace::quotient(const NormedSpace& parent, Mat representative, Mat kernel) {
    if (representative.rows() != parent.dim() || kernel.rows() != parent.dim())
        throw Error("quotient: representative/kernel rows must match parent dim");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::Quotient;
    impl->dim = static_cast<int>(representative.cols());
    impl->parent = parent.impl_;
    impl->representative = std::move(representative);
    impl->kernel = std::move(kernel);
    return NormedSpace(impl);
}

int NormedSpace::dim() const { return impl_->dim; }
NormedSpace::Kind NormedSpace::kind() const { return impl_->kind; }
double NormedSpace::p() const { return impl_->p; }

bool NormedSpace::is_euclidean() const { return impl_->kind == Kind::P && impl_->p == 2.0; }

double NormedSpace::norm(const Vec& v) const {
    if (v.size() != impl_->dim) throw Error("norm: dimension mismatch");
    return impl_norm(*impl_, v);
}

bool NormedSpace::same_as(const NormedSpace& other) const { return impl_same(*impl_, *other.impl_); }

std::string NormedSpace::to_json() const {
    json j;
    j["dim"] = dim();
    if (impl_->kind == Kind::P) {
        if (impl_->p == 2.0) {
            j["norm"] = "l2";
        } else if (std::isinf(impl_->p)) {
            j["norm"] = json{{"p", "inf"}};
        } else {
            j["norm"] = json{{"p", impl_->p}};
        }
    } else if (impl_->kind == Kind::WeightedP) {
        json w = json::array();
        for (Eigen::Index i = 0; i < impl_->weights.size(); ++i) w.push_back(impl_->weights[i]);
        json n;
        n["p"] = std::isinf(impl_->p) ? json("inf") : json(impl_->p);
        n["weights"] = w;
        j["norm"] = n;
    } else {
        throw Error("to_json: only p-norm family spaces serialize");
    }
    return j.dump();
}

NormedSpace NormedSpace::from_json(const std::string& text) {
    json j = json::parse(text);
    int dim = j.at("dim").get<int>();
    const json& n = j.at("norm");
    if (n.is_string()) {
        std::string s = n.get<std::string>();
        if (s == "l2") return lp(dim, 2.0);
        if (s == "l1") return lp(dim, 1.0);
        if (s == "linf") return linf(dim);
        throw Error("from_json: unknown norm name '" + s + "'");
    }
    double p;
    if (n.at("p").is_string()) {
        if (n.at("p").get<std::string>() != "inf") throw Error("from_json: bad p value");
        p = std::numeric_limits<double>::infinity();
    } else {
        p = n.at("p").get<double>();
    }
    if (n.contains("weights")) {
        Vec w(n.at("weights").size());
        for (size_t i = 0; i < n.at("weights").size(); ++i) w[static_cast<Eigen::Index>(i)] = n.at("weights")[i].get<double>();
        if (w.size() != dim) throw Error("from_json: weights length must equal dim");
        return weighted_lp(p, std::move(w));
    }
    return lp(dim, p);
}

double norm(const NormedSpace& space, const Vec& v) { return space.norm(v); }

void validate_zero_sum(const ZeroSumConfig& cfg, double tol) {
    if (cfg.points.size() < 2) throw Error("zero-sum config: need n >= 2 points");
    Vec sum = Vec::Zero(cfg.space.dim());
    for (const auto& x : cfg.points) {
        if (x.size() != cfg.space.dim()) throw Error("zero-sum config: dimension mismatch");
        if (x.lpNorm<Eigen::Infinity>() == 0.0) throw Error("zero-sum config: contains the zero vector");
        sum += x;
    }
    if (sum.lpNorm<Eigen::Infinity>() > tol) throw Error("zero-sum config: points do not cancel");
}

std::vector<Vec> sample_sphere(const NormedSpace& space, int count, uint64_t seed) {
    if (count < 1) throw Error("sample_sphere: count must be >= 1");
    std::vector<Vec> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        Rng rng(mix_seed(mix_seed(seed, 0x5u), static_cast<uint64_t>(i)));
        Vec v(space.dim());
        double n = 0.0;
        do {
            for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = rng.gaussian();
            n = space.norm(v);
        } while (n < 1e-12);
        out.push_back(v / n);
    }
    return out;
}

ZeroSumConfig random_zero_sum_config(const NormedSpace& space, int n, uint64_t seed) {
    if (n < 2) throw Error("random_zero_sum_config: need n >= 2");
    const int attempt_limit = 64;
    for (int attempt = 0; attempt < attempt_limit; ++attempt) {
        uint64_t sub = mix_seed(mix_seed(seed, 0x25u), static_cast<uint64_t>(attempt));
        std::vector<Vec> pts = sample_sphere(space, n - 1, sub);
        Vec last = Vec::Zero(space.dim());
        for (const auto& x : pts) last -= x;
        if (last.lpNorm<Eigen::Infinity>() < 1e-9) continue; // closing point numerically zero
        pts.push_back(last);
        ZeroSumConfig cfg{space, std::move(pts)};
        validate_zero_sum(cfg);
        return cfg;
    }
    throw Error("random_zero_sum_config: rejection limit exceeded");
}

std::string vec_to_json(const Vec& v) {
    json j = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j.dump();
}

Vec vec_from_json(const std::string& text) {
    json j = json::parse(text);
    if (!j.is_array()) throw Error("vec_from_json: expected JSON array");
    Vec v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

} // namespace twistlab
