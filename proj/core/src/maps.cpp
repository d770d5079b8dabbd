#include "twistlab/maps.hpp"

#include "map_nodes.hpp"
#include "twistlab/parallel.hpp"
#include "twistlab/rng.hpp"

#include <charconv>
#include <cmath>

namespace twistlab {

namespace {

using Node = HomMap::Node;
using detail::make_map_node;

Vec eval_node(const Node& n, const Vec& x) {
    switch (n.kind) {
    case NodeKind::Zero:
        return Vec::Zero(n.codomain.dim());
    case NodeKind::Linear:
        return n.matrix * x;
    case NodeKind::KaltonPeck: {
        double s = n.domain.norm(x);
        Vec out = Vec::Zero(x.size());
        if (s == 0.0) return out;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            double xi = x[i];
            if (xi != 0.0) out[i] = xi * std::log(s / std::abs(xi));
        }
        return out;
    }
    case NodeKind::EnfloDelta: {
        const int m = n.a->domain.dim();
        Vec xh = x.head(m), yh = x.tail(m);
        Vec ha = eval_node(*n.a, xh);
        Vec hb = eval_node(*n.a, yh);
        double r2 = xh.squaredNorm() + yh.squaredNorm();
        Vec third = r2 == 0.0 ? Vec(Vec::Zero(m)) : Vec(xh * (yh.norm() / std::sqrt(r2)));
        Vec out(n.codomain.dim());
        out << ha, hb, third;
        return out;
    }
    case NodeKind::Scale:
        return n.c * eval_node(*n.a, x);
    case NodeKind::Sum:
        return eval_node(*n.a, x) + eval_node(*n.b, x);
    case NodeKind::PreLinear:
        return eval_node(*n.a, n.matrix * x);
    case NodeKind::PostLinear:
        return n.matrix * eval_node(*n.a, x);
    }
    throw Error("unreachable map node kind");
}

void print_double(std::string& out, double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

void print_matrix(std::string& out, const Mat& m) {
    out += "[";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out += r == 0 ? "[" : ",[";
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += ",";
            print_double(out, m(r, c));
        }
        out += "]";
    }
    out += "]";
}

void print_node(std::string& out, const Node& n) {
    switch (n.kind) {
    case NodeKind::Zero:
        out += "zero";
        return;
    case NodeKind::KaltonPeck:
        out += "kp";
        return;
    case NodeKind::Linear:
        out += "linear(";
        print_matrix(out, n.matrix);
        out += ")";
        return;
    case NodeKind::EnfloDelta:
        out += "delta(";
        print_node(out, *n.a);
        out += ")";
        return;
    case NodeKind::Scale:
        out += "scale(";
        print_double(out, n.c);
        out += ",";
        print_node(out, *n.a);
        out += ")";
        return;
    case NodeKind::Sum:
        out += "sum(";
        print_node(out, *n.a);
        out += ",";
        print_node(out, *n.b);
        out += ")";
        return;
    case NodeKind::PreLinear:
        out += "pre(";
        print_matrix(out, n.matrix);
        out += ",";
        print_node(out, *n.a);
        out += ")";
        return;
    case NodeKind::PostLinear:
        out += "post(";
        print_matrix(out, n.matrix);
        out += ",";
        print_node(out, *n.a);
        out += ")";
        return;
    }
}

std::optional<Mat> node_matrix(const Node& n) {
    switch (n.kind) {
    case NodeKind::Zero:
        return Mat(Mat::Zero(n.codomain.dim(), n.domain.dim()));
    case NodeKind::Linear:
        return n.matrix;
    case NodeKind::KaltonPeck:
    case NodeKind::EnfloDelta:
        return std::nullopt;
    case NodeKind::Scale: {
        auto inner = node_matrix(*n.a);
        if (!inner) return std::nullopt;
        return Mat(n.c * *inner);
    }
    case NodeKind::Sum: {
        auto ma = node_matrix(*n.a), mb = node_matrix(*n.b);
        if (!ma || !mb) return std::nullopt;
        return Mat(*ma + *mb);
    }
    case NodeKind::PreLinear: {
        auto inner = node_matrix(*n.a);
        if (!inner) return std::nullopt;
        return Mat(*inner * n.matrix);
    }
    case NodeKind::PostLinear: {
        auto inner = node_matrix(*n.a);
        if (!inner) return std::nullopt;
        return Mat(n.matrix * *inner);
    }
    }
    return std::nullopt;
}

} // namespace

HomMap::HomMap(NormedSpace domain, NormedSpace codomain, NodePtr root)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), root_(std::move(root)) {}

HomMap HomMap::zero(const NormedSpace& domain, const NormedSpace& codomain) {
    return HomMap(domain, codomain, make_map_node(NodeKind::Zero, domain, codomain));
}

HomMap HomMap::linear(Mat m, const NormedSpace& domain, const NormedSpace& codomain) {
    if (m.rows() != codomain.dim() || m.cols() != domain.dim())
        throw Error("linear: matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                    ", expected " + std::to_string(codomain.dim()) + "x" +
                    std::to_string(domain.dim()));
    auto n = make_map_node(NodeKind::Linear, domain, codomain, std::move(m));
    return HomMap(domain, codomain, n);
}

HomMap HomMap::linear(Mat m) {
    NormedSpace d = NormedSpace::l2(static_cast<int>(m.cols()));
    NormedSpace c = NormedSpace::l2(static_cast<int>(m.rows()));
    return linear(std::move(m), d, c);
}

HomMap HomMap::kalton_peck(const NormedSpace& base) {
    return HomMap(base, base, make_map_node(NodeKind::KaltonPeck, base, base));
}

HomMap HomMap::scale(double c, const HomMap& inner) {
    auto n = make_map_node(NodeKind::Scale, inner.domain(), inner.codomain(), {}, c, inner.root());
    return HomMap(inner.domain(), inner.codomain(), n);
}

HomMap HomMap::sum(const HomMap& a, const HomMap& b) {
    if (a.domain().dim() != b.domain().dim() || a.codomain().dim() != b.codomain().dim())
        throw Error("sum: operand dimensions differ");
    auto n = make_map_node(NodeKind::Sum, a.domain(), a.codomain(), {}, 1.0, a.root(), b.root());
    return HomMap(a.domain(), a.codomain(), n);
}

HomMap HomMap::pre(Mat m, const HomMap& inner) {
    if (m.rows() != inner.domain().dim()) throw Error("pre: matrix rows must match inner domain dim");
    NormedSpace d = NormedSpace::l2(static_cast<int>(m.cols()));
    auto n = make_map_node(NodeKind::PreLinear, d, inner.codomain(), std::move(m), 1.0, inner.root());
    return HomMap(d, inner.codomain(), n);
}

HomMap HomMap::post(Mat m, const HomMap& inner) {
    if (m.cols() != inner.codomain().dim())
        throw Error("post: matrix cols must match inner codomain dim");
    NormedSpace c = NormedSpace::l2(static_cast<int>(m.rows()));
    auto n = make_map_node(NodeKind::PostLinear, inner.domain(), c, std::move(m), 1.0, inner.root());
    return HomMap(inner.domain(), c, n);
}

HomMap HomMap::with_spaces(const NormedSpace& domain, const NormedSpace& codomain) const {
    if (domain.dim() != domain_.dim() || codomain.dim() != codomain_.dim())
        throw Error("with_spaces: dimensions must match");
    return HomMap(domain, codomain, root_);
}

Vec HomMap::operator()(const Vec& x) const {
    if (x.size() != domain_.dim()) throw Error("eval: dimension mismatch");
    return eval_node(*root_, x);
}

std::string HomMap::print() const {
    std::string out;
    print_node(out, *root_);
    return out;
}

std::optional<Mat> HomMap::as_matrix() const { return node_matrix(*root_); }

double map_norm(const HomMap& h, int samples, uint64_t seed) {
    if (samples < 1) throw Error("map_norm: samples must be >= 1");
    const NormedSpace dom = h.domain();
    const NormedSpace cod = h.codomain();
    return parallel_max(static_cast<size_t>(samples), [&](size_t i) {
        Rng rng(mix_seed(mix_seed(seed, 0x17u), i));
        Vec v(dom.dim());
        double n = 0.0;
        do {
            for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = rng.gaussian();
            n = dom.norm(v);
        } while (n < 1e-12);
        return cod.norm(h(v / n));
    });
}

FactorSystem FactorSystem::rho(const HomMap& h) {
    auto eval = [h](const Vec& y1, const Vec& y2) {
        Vec a = h(y1 + y2);
        Vec b = h(y1);
        Vec c = h(y2);
        return Vec((a - b) - c);
    };
    return FactorSystem(h.domain(), h.codomain(), std::move(eval), h);
}

FactorSystem FactorSystem::from_eval(NormedSpace f_space, NormedSpace e_space,
                                     std::function<Vec(const Vec&, const Vec&)> eval) {
    return FactorSystem(std::move(f_space), std::move(e_space), std::move(eval), std::nullopt);
}

namespace {

double config_ratio(const NormedSpace& f, const NormedSpace& e,
                    const std::function<Vec(const Vec&, const Vec&)>& phi,
                    const std::vector<Vec>& config) {
    if (config.empty()) throw Error("axiom5 ratio: empty config");
    if (config.size() == 1) return 0.0;
    Vec partial = config[0];
    Vec acc = Vec::Zero(e.dim());
    double cost = f.norm(config[0]);
    for (size_t k = 1; k < config.size(); ++k) {
        acc += phi(partial, config[k]);
        partial += config[k];
        cost += f.norm(config[k]);
    }
    return cost == 0.0 ? 0.0 : e.norm(acc) / cost;
}

} // namespace

double axiom5_ratio(const FactorSystem& phi, const std::vector<Vec>& config) {
    return config_ratio(phi.f_space(), phi.e_space(),
                        [&phi](const Vec& a, const Vec& b) { return phi(a, b); }, config);
}

AxiomReport check_factor_axioms(const NormedSpace& f_space, const NormedSpace& e_space,
                                const std::function<Vec(const Vec&, const Vec&)>& phi,
                                int sample_count, uint64_t seed) {
    if (sample_count < 1) throw Error("check_factor_axioms: sample_count must be >= 1");
    AxiomReport rep;
    rep.samples = sample_count;
    const Vec zero_f = Vec::Zero(f_space.dim());

    auto sphere_point = [&](Rng& rng) {
        Vec v(f_space.dim());
        double n = 0.0;
        do {
            for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = rng.gaussian();
            n = f_space.norm(v);
        } while (n < 1e-12);
        return Vec(v / n);
    };

    std::vector<double> res_h(sample_count), res_s(sample_count), res_z(sample_count),
        res_c(sample_count), res_i(sample_count);
    parallel_max(static_cast<size_t>(sample_count), [&](size_t i) {
        Rng rng(mix_seed(mix_seed(seed, 0x41u), i));
        Vec x = sphere_point(rng), y = sphere_point(rng), z = sphere_point(rng);
        double lam = rng.uniform(-2.0, 2.0);
        res_h[i] = e_space.norm(phi(lam * x, lam * y) - lam * phi(x, y));
        res_s[i] = e_space.norm(phi(x, y) - phi(y, x));
        res_z[i] = e_space.norm(phi(x, zero_f));
        res_c[i] = e_space.norm(phi(x, y) + phi(x + y, z) - phi(y, z) - phi(x, y + z));
        res_i[i] = e_space.norm(phi(y, -y));
        return 0.0;
    });
    rep.residual_samples.resize(static_cast<size_t>(sample_count));
    for (int i = 0; i < sample_count; ++i) {
        rep.homogeneity = std::max(rep.homogeneity, res_h[i]);
        rep.symmetry = std::max(rep.symmetry, res_s[i]);
        rep.right_zero = std::max(rep.right_zero, res_z[i]);
        rep.cocycle = std::max(rep.cocycle, res_c[i]);
        rep.inverse_pair = std::max(rep.inverse_pair, res_i[i]);
        rep.residual_samples[static_cast<size_t>(i)] =
            std::max(std::max(res_h[i], res_s[i]), std::max(res_z[i], res_c[i]));
    }

    int config_count = std::max(1, sample_count / 10);
    rep.axiom5_ratio = parallel_max(static_cast<size_t>(config_count), [&](size_t i) {
        Rng rng(mix_seed(mix_seed(seed, 0x43u), i));
        int n = rng.uniform_int(2, 8);
        std::vector<Vec> cfg;
        cfg.reserve(static_cast<size_t>(n));
        for (int k = 0; k < n; ++k) cfg.push_back(sphere_point(rng));
        return config_ratio(f_space, e_space, phi, cfg);
    });
    return rep;
}

AxiomReport check_factor_axioms(const FactorSystem& phi, int sample_count, uint64_t seed) {
    return check_factor_axioms(phi.f_space(), phi.e_space(),
                               [&phi](const Vec& a, const Vec& b) { return phi(a, b); },
                               sample_count, seed);
}

double factor_norm_lower(const FactorSystem& phi, const std::vector<std::vector<Vec>>& configs,
                         int optimize_steps, uint64_t seed) {
    const NormedSpace& f = phi.f_space();
    double best = 0.0;
    size_t idx = 0;
    for (const auto& start : configs) {
        if (start.empty()) throw Error("factor_norm_lower: empty config");
        std::vector<Vec> cfg = start;
        double cur = axiom5_ratio(phi, cfg);
        Rng rng(mix_seed(mix_seed(seed, 0x6Fu), idx++));
        double sigma = 0.1;
        for (int step = 0; step < optimize_steps; ++step) {
            size_t pi = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(cfg.size()) - 1));
            int ci = rng.uniform_int(0, f.dim() - 1);
            double delta = sigma * rng.gaussian();
            double saved = cfg[pi][ci];
            cfg[pi][ci] += delta;
            if (f.norm(cfg[pi]) < 1e-9) {
                cfg[pi][ci] = saved; // keep configs zero-free
            } else {
                double cand = axiom5_ratio(phi, cfg);
                if (cand > cur) {
                    cur = cand;
                } else {
                    cfg[pi][ci] = saved;
                }
            }
            sigma *= 0.999;
        }
        best = std::max(best, cur);
    }
    return best;
}

} // namespace twistlab
