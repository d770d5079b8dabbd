#include "twistlab/grouprep.hpp"

#include "twistlab/rng.hpp"

#include <json.hpp>

#include <Eigen/SVD>

#include <cmath>

namespace twistlab {

using nlohmann::json;

namespace {

double min_singular_value(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

constexpr double kTau = 6.283185307179586476925286766559;

Mat rotation2(double theta) {
    Mat r(2, 2);
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

// vec(A X B) = (B^T kron A) vec(X), column-major.
Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Vec vectorize(const Mat& m) {
    Vec v(m.size());
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) v[k++] = m(r, c);
    return v;
}

Mat unvectorize(const Vec& v, int rows, int cols) {
    Mat m(rows, cols);
    Eigen::Index k = 0;
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = v[k++];
    return m;
}

int mod(int a, int n) { return ((a % n) + n) % n; }

} // namespace

FiniteGroup FiniteGroup::from_table(std::vector<std::vector<int>> table) {
    const int n = static_cast<int>(table.size());
    if (n < 1) throw Error("group: empty table");
    for (const auto& row : table) {
        if (static_cast<int>(row.size()) != n) throw Error("group: table is not square");
        for (int v : row)
            if (v < 0 || v >= n) throw Error("group: table entry out of range");
    }
    // Latin square
    for (int a = 0; a < n; ++a) {
        std::vector<bool> seen_row(n, false), seen_col(n, false);
        for (int b = 0; b < n; ++b) {
            if (seen_row[table[a][b]]) throw Error("group: repeated entry in row");
            seen_row[table[a][b]] = true;
            if (seen_col[table[b][a]]) throw Error("group: repeated entry in column");
            seen_col[table[b][a]] = true;
        }
    }
    // identity
    int identity = -1;
    for (int e = 0; e < n; ++e) {
        bool ok = true;
        for (int a = 0; a < n; ++a) ok = ok && table[e][a] == a && table[a][e] == a;
        if (ok) {
            identity = e;
            break;
        }
    }
    if (identity < 0) throw Error("group: no identity element");
    // associativity
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                if (table[table[a][b]][c] != table[a][table[b][c]])
                    throw Error("group: multiplication is not associative");
    // inverses
    std::vector<int> inverse(n, -1);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b)
            if (table[a][b] == identity && table[b][a] == identity) {
                inverse[a] = b;
                break;
            }
        if (inverse[a] < 0) throw Error("group: missing inverse");
    }
    FiniteGroup g;
    g.order = n;
    g.table = std::move(table);
    g.identity = identity;
    g.inverse = std::move(inverse);
    return g;
}

FiniteGroup FiniteGroup::cyclic(int n) {
    if (n < 1) throw Error("cyclic: n must be >= 1");
    std::vector<std::vector<int>> t(n, std::vector<int>(n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) t[a][b] = mod(a + b, n);
    return from_table(std::move(t));
}

FiniteGroup FiniteGroup::dihedral(int n) {
    if (n < 1) throw Error("dihedral: n must be >= 1");
    const int order = 2 * n;
    auto idx = [n](bool refl, int a) { return (refl ? n : 0) + mod(a, n); };
    std::vector<std::vector<int>> t(order, std::vector<int>(order));
    for (int i = 0; i < order; ++i) {
        bool ri = i >= n;
        int a = i % n;
        for (int j = 0; j < order; ++j) {
            bool rj = j >= n;
            int b = j % n;
            // r^a r^b = r^{a+b}; r^a (s r^b) = s r^{b-a};
            // (s r^a) r^b = s r^{a+b}; (s r^a)(s r^b) = r^{b-a}.
            if (!ri && !rj) t[i][j] = idx(false, a + b);
            else if (!ri && rj) t[i][j] = idx(true, b - a);
            else if (ri && !rj) t[i][j] = idx(true, a + b);
            else t[i][j] = idx(false, b - a);
        }
    }
    return from_table(std::move(t));
}

std::string FiniteGroup::to_json() const {
    json j;
    j["order"] = order;
    j["table"] = table;
    return j.dump();
}

FiniteGroup FiniteGroup::from_json(const std::string& text) {
    json j = json::parse(text);
    auto table = j.at("table").get<std::vector<std::vector<int>>>();
    if (j.contains("order") && j.at("order").get<int>() != static_cast<int>(table.size()))
        throw Error("group JSON: order does not match table");
    return from_table(std::move(table));
}

std::string Representation::to_json() const {
    json j;
    j["group"] = json::parse(group.to_json());
    j["space"] = json::parse(space.to_json());
    json ms = json::array();
    for (const auto& m : matrices) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            rows.push_back(std::move(row));
        }
        ms.push_back(std::move(rows));
    }
    j["matrices"] = std::move(ms);
    return j.dump();
}

Representation Representation::from_json(const std::string& text) {
    json j = json::parse(text);
    Representation rep{FiniteGroup::from_json(j.at("group").dump()),
                       NormedSpace::from_json(j.at("space").dump()),
                       {}};
    for (const auto& mj : j.at("matrices")) {
        Mat m(mj.size(), mj.empty() ? 0 : mj[0].size());
        for (size_t r = 0; r < mj.size(); ++r)
            for (size_t c = 0; c < mj[r].size(); ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = mj[r][c].get<double>();
        rep.matrices.push_back(std::move(m));
    }
    if (static_cast<int>(rep.matrices.size()) != rep.group.order)
        throw Error("representation JSON: one matrix per group element required");
    return rep;
}

std::string Cocycle::to_json() const {
    json j;
    j["group"] = json::parse(group.to_json());
    j["F"] = json::parse(f_space.to_json());
    j["E"] = json::parse(e_space.to_json());
    json vs = json::array();
    for (const auto& v : values) vs.push_back(v.print());
    j["values"] = std::move(vs);
    return j.dump();
}

Cocycle Cocycle::from_json(const std::string& text) {
    json j = json::parse(text);
    Cocycle c{FiniteGroup::from_json(j.at("group").dump()),
              NormedSpace::from_json(j.at("F").dump()), NormedSpace::from_json(j.at("E").dump()),
              {}};
    for (const auto& v : j.at("values"))
        c.values.push_back(parse_map(v.get<std::string>(), c.f_space, c.e_space));
    if (static_cast<int>(c.values.size()) != c.group.order)
        throw Error("cocycle JSON: one value per group element required");
    return c;
}

RepReport validate_representation(const Representation& rep) {
    RepReport out;
    const int n = rep.group.order;
    if (static_cast<int>(rep.matrices.size()) != n) {
        out.pass = false;
        return out;
    }
    out.identity_residual =
        (rep(rep.group.identity) - Mat::Identity(rep.space.dim(), rep.space.dim()))
            .lpNorm<Eigen::Infinity>();
    out.min_singular = std::numeric_limits<double>::infinity();
    for (int g = 0; g < n; ++g)
        out.min_singular = std::min(out.min_singular, min_singular_value(rep(g)));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            out.hom_residual = std::max(
                out.hom_residual,
                (rep(rep.group.mul(a, b)) - rep(a) * rep(b)).lpNorm<Eigen::Infinity>());
    out.pass = out.identity_residual < 1e-10 && out.hom_residual < 1e-10 && out.min_singular > 1e-10;
    return out;
}

Representation cyclic_rotation_representation(int n) {
    FiniteGroup g = FiniteGroup::cyclic(n);
    Representation rep{g, NormedSpace::l2(2), {}};
    rep.matrices.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) rep.matrices.push_back(rotation2(kTau * k / n));
    return rep;
}

Representation dihedral_defining_representation(int n) {
    FiniteGroup g = FiniteGroup::dihedral(n);
    Mat s(2, 2);
    s << 1, 0, 0, -1;
    Representation rep{g, NormedSpace::l2(2), {}};
    rep.matrices.reserve(static_cast<size_t>(2 * n));
    for (int k = 0; k < n; ++k) rep.matrices.push_back(rotation2(kTau * k / n));
    for (int k = 0; k < n; ++k) rep.matrices.push_back(Mat(s * rotation2(kTau * k / n)));
    return rep;
}

Representation block_triangular_representation(const Representation& t1, const Representation& t2,
                                                const Mat& corner_seed) {
    if (t1.group.order != t2.group.order) throw Error("block rep: group mismatch");
    const int ne = t1.space.dim(), nf = t2.space.dim();
    if (corner_seed.rows() != ne || corner_seed.cols() != nf)
        throw Error("block rep: corner seed must be dim E x dim F");
    Representation rep{t1.group, NormedSpace::direct_sum(t1.space, t2.space), {}};
    rep.matrices.reserve(static_cast<size_t>(t1.group.order));
    for (int g = 0; g < t1.group.order; ++g) {
        Mat m = Mat::Zero(ne + nf, ne + nf);
        m.topLeftCorner(ne, ne) = t1(g);
        m.bottomRightCorner(nf, nf) = t2(g);
        m.topRightCorner(ne, nf) = t1(g) * corner_seed - corner_seed * t2(g);
        rep.matrices.push_back(std::move(m));
    }
    return rep;
}

std::pair<Representation, Representation> invariant_extension(const Representation& big,
                                                              const Extension& ext) {
    const int n = big.group.order;
    if (big.space.dim() != ext.g_space.dim()) throw Error("invariant_extension: space mismatch");
    Mat i_pinv = pinv(ext.i_matrix);
    Mat proj = ext.i_matrix * i_pinv;
    const int ng = ext.g_space.dim();
    for (int g = 0; g < n; ++g) {
        double resid =
            ((Mat::Identity(ng, ng) - proj) * big(g) * ext.i_matrix).lpNorm<Eigen::Infinity>();
        if (resid > 1e-10)
            throw Error("invariant_extension: im(i) not invariant under element " +
                        std::to_string(g) + " (residual " + std::to_string(resid) + ")");
    }
    Mat p_lin = pinv(ext.sigma_matrix);
    Representation t1{big.group, ext.e_space, {}}, t2{big.group, ext.f_space, {}};
    for (int g = 0; g < n; ++g) {
        t1.matrices.push_back(Mat(i_pinv * big(g) * ext.i_matrix));
        t2.matrices.push_back(Mat(ext.sigma_matrix * big(g) * p_lin));
    }
    RepReport r1 = validate_representation(t1);
    RepReport r2 = validate_representation(t2);
    if (!r1.pass || !r2.pass)
        throw Error("invariant_extension: induced actions fail the representation checks");
    return {std::move(t1), std::move(t2)};
}

Cocycle psi_cocycle(const Representation& big, const Representation& t1, const Representation& t2,
                    const Extension& ext, const Selection& p) {
    const int n = big.group.order;
    Mat i_pinv = pinv(ext.i_matrix);
    Cocycle psi{big.group, ext.f_space, ext.e_space, {}};
    psi.values.reserve(static_cast<size_t>(n));
    std::vector<Vec> probes = sample_sphere(ext.f_space, 16, 0x9511u);
    for (int g = 0; g < n; ++g) {
        double inv_resid =
            (big(g) * ext.i_matrix - ext.i_matrix * t1(g)).lpNorm<Eigen::Infinity>();
        if (inv_resid > 1e-10)
            throw Error("psi_cocycle: T is not the given T1 on im(i) at element " +
                        std::to_string(g));
        // x -> T(g) p(T2(g)^{-1} x) - p(x), F -> G
        HomMap moved = HomMap::post(big(g), HomMap::pre(t2(big.group.inv(g)), p.map));
        HomMap inner = HomMap::sum(moved.with_spaces(ext.f_space, ext.g_space),
                                   HomMap::scale(-1.0, p.map));
        for (const auto& x : probes) {
            double resid = (ext.sigma_matrix * inner(x)).lpNorm<Eigen::Infinity>();
            if (resid > 1e-10)
                throw Error("psi_cocycle: value escapes im(i) at element " + std::to_string(g) +
                            " (residual " + std::to_string(resid) + ")");
        }
        psi.values.push_back(
            HomMap::post(i_pinv, inner).with_spaces(ext.f_space, ext.e_space));
    }
    return psi;
}

CocycleReport check_cocycle(const Cocycle& m, const Representation& t1, const Representation& t2,
                            int samples, uint64_t seed) {
    CocycleReport rep;
    const FiniteGroup& grp = m.group;
    std::vector<Vec> pts = sample_sphere(m.f_space, samples, mix_seed(seed, 0xC0C1u));
    for (int g1 = 0; g1 < grp.order; ++g1) {
        for (int g2 = 0; g2 < grp.order; ++g2) {
            const HomMap& m12 = m(grp.mul(g1, g2));
            const HomMap& m2 = m(g2);
            const HomMap& m1 = m(g1);
            const Mat& a1 = t1(g1);
            const Mat& t2inv = t2(grp.inv(g1));
            for (const auto& x : pts) {
                Vec lhs = m12(x);
                Vec rhs = a1 * m2(t2inv * x) + m1(x);
                rep.cocycle_residual =
                    std::max(rep.cocycle_residual, m.e_space.norm(lhs - rhs));
            }
        }
    }

    rep.values_linear = true;
    std::vector<Mat> linear_values;
    for (const auto& v : m.values) {
        auto mm = v.as_matrix();
        if (!mm) {
            rep.values_linear = false;
            break;
        }
        linear_values.push_back(*mm);
    }

    const int ne = m.e_space.dim(), nf = m.f_space.dim();
    if (rep.values_linear) {
        // Least squares for M(g) = T1(g) h T2(g)^{-1} - h over all g.
        const int ef = ne * nf;
        Mat a = Mat::Zero(static_cast<Eigen::Index>(grp.order) * ef, ef);
        Vec b = Vec::Zero(static_cast<Eigen::Index>(grp.order) * ef);
        for (int g = 0; g < grp.order; ++g) {
            Mat act = kron(t2(grp.inv(g)).transpose(), t1(g)) - Mat::Identity(ef, ef);
            a.block(static_cast<Eigen::Index>(g) * ef, 0, ef, ef) = act;
            b.segment(static_cast<Eigen::Index>(g) * ef, ef) = vectorize(linear_values[static_cast<size_t>(g)]);
        }
        Vec h_vec = a.completeOrthogonalDecomposition().solve(b);
        Mat h = unvectorize(h_vec, ne, nf);
        for (int g = 0; g < grp.order; ++g) {
            Mat diff = t1(g) * h * t2(grp.inv(g)) - h - linear_values[static_cast<size_t>(g)];
            rep.coboundary_residual = std::max(rep.coboundary_residual, diff.lpNorm<Eigen::Infinity>());
        }
        rep.coboundary_found = rep.coboundary_residual <= 1e-8;
        if (rep.coboundary_found)
            rep.coboundary_witness = HomMap::linear(h, m.f_space, m.e_space);
        rep.inconclusive = !rep.coboundary_found;
        return rep;
    }

    // Nonlinear values: the averaging candidate w = -(1/n) sum_g M(g) is an
    // exact witness for any genuine cocycle; check it by sampling.
    HomMap acc = m.values[0];
    for (int g = 1; g < grp.order; ++g) acc = HomMap::sum(acc, m(g));
    HomMap w = HomMap::scale(-1.0 / grp.order, acc).with_spaces(m.f_space, m.e_space);
    for (int g = 0; g < grp.order; ++g) {
        const Mat& a1 = t1(g);
        const Mat& t2inv = t2(grp.inv(g));
        for (const auto& x : pts) {
            Vec rhs = a1 * w(t2inv * x) - w(x);
            rep.coboundary_residual =
                std::max(rep.coboundary_residual, m.e_space.norm(m(g)(x) - rhs));
        }
    }
    rep.coboundary_found = rep.coboundary_residual <= 1e-8;
    if (rep.coboundary_found) rep.coboundary_witness = w;
    rep.inconclusive = !rep.coboundary_found;
    return rep;
}

CompatibilityReport check_compatibility(const FactorSystem& phi, const Cocycle& psi,
                                        const HomMap& witness, const Representation& t1,
                                        const Representation& t2, int samples, uint64_t seed) {
    CompatibilityReport rep;
    rep.samples = samples;
    const FiniteGroup& grp = psi.group;
    std::vector<Vec> xs = sample_sphere(psi.f_space, samples, mix_seed(seed, 0xD0u));
    std::vector<Vec> ys = sample_sphere(psi.f_space, samples, mix_seed(seed, 0xD1u));
    for (int g = 0; g < grp.order; ++g) {
        const Mat& a1 = t1(g);
        const Mat& t2inv = t2(grp.inv(g));
        auto gw_minus_w = [&](const Vec& v) { return Vec(a1 * witness(t2inv * v) - witness(v)); };
        for (int s = 0; s < samples; ++s) {
            const Vec& x = xs[static_cast<size_t>(s)];
            const Vec& y = ys[static_cast<size_t>(s)];
            Vec dphi = a1 * phi(t2inv * x, t2inv * y) - phi(x, y);
            Vec rho_psi = psi(g)(x + y) - psi(g)(x) - psi(g)(y);
            Vec rho_cb = gw_minus_w(x + y) - gw_minus_w(x) - gw_minus_w(y);
            rep.max_residual =
                std::max(rep.max_residual, psi.e_space.norm(dphi - rho_psi - rho_cb));
        }
    }
    return rep;
}

TwistedPair TwistedGroupAction::apply(int g, const TwistedPair& z) const {
    Vec ty = t2(g) * z.y;
    return TwistedPair{t1(g) * z.x + psi(g)(ty), ty};
}

TwistedGroupAction reconstruct(const Representation& t1, const Representation& t2,
                               const FactorSystem& phi, const Cocycle& psi, int samples,
                               uint64_t seed) {
    if (t1.group.order != psi.group.order || t2.group.order != psi.group.order)
        throw Error("reconstruct: group mismatch");
    TwistedGroupAction action{psi.group, TwistedSpace(psi.e_space, psi.f_space, phi), t1, t2, psi,
                              0.0, 0.0};
    const FiniteGroup& grp = psi.group;

    std::vector<Vec> ex = sample_sphere(psi.e_space, samples, mix_seed(seed, 0xE0u));
    std::vector<Vec> fy = sample_sphere(psi.f_space, samples, mix_seed(seed, 0xE1u));
    std::vector<Vec> ex2 = sample_sphere(psi.e_space, samples, mix_seed(seed, 0xE2u));
    std::vector<Vec> fy2 = sample_sphere(psi.f_space, samples, mix_seed(seed, 0xE3u));

    auto pair_dist = [&](const TwistedPair& a, const TwistedPair& b) {
        return psi.e_space.norm(a.x - b.x) + psi.f_space.norm(a.y - b.y);
    };

    for (int g1 = 0; g1 < grp.order; ++g1)
        for (int g2 = 0; g2 < grp.order; ++g2)
            for (int s = 0; s < samples; ++s) {
                TwistedPair z{ex[static_cast<size_t>(s)], fy[static_cast<size_t>(s)]};
                TwistedPair lhs = action.apply(grp.mul(g1, g2), z);
                TwistedPair rhs = action.apply(g1, action.apply(g2, z));
                action.hom_residual = std::max(action.hom_residual, pair_dist(lhs, rhs));
            }

    for (int g = 0; g < grp.order; ++g)
        for (int s = 0; s < samples; ++s) {
            TwistedPair a{ex[static_cast<size_t>(s)], fy[static_cast<size_t>(s)]};
            TwistedPair b{ex2[static_cast<size_t>(s)], fy2[static_cast<size_t>(s)]};
            TwistedPair lhs = action.apply(g, action.space.add(a, b));
            TwistedPair rhs = action.space.add(action.apply(g, a), action.apply(g, b));
            action.additivity_residual = std::max(action.additivity_residual, pair_dist(lhs, rhs));
        }

    if (action.hom_residual > 1e-6 || action.additivity_residual > 1e-6)
        throw Error("reconstruct: (Phi, Psi) incompatible (homomorphism residual " +
                    std::to_string(action.hom_residual) + ", additivity residual " +
                    std::to_string(action.additivity_residual) + ")");
    return action;
}

EquivalenceResult equivalent_representations(const Representation& ta, const Extension& ext_a,
                                             const Representation& tb, const Extension& ext_b,
                                             double tol) {
    if (ta.group.order != tb.group.order) throw Error("equivalence: group mismatch");
    if (!ext_a.e_space.same_as(ext_b.e_space) || !ext_a.f_space.same_as(ext_b.f_space))
        throw Error("equivalence: extensions must share E and F");
    const int n = ext_a.g_space.dim();
    const int ne = ext_a.e_space.dim(), nf = ext_a.f_space.dim();
    const int order = ta.group.order;

    const int rows = n * ne + nf * n + order * n * n;
    Mat a = Mat::Zero(rows, n * n);
    Vec b = Vec::Zero(rows);
    // h i_a = i_b
    for (int col = 0; col < ne; ++col)
        for (int k = 0; k < n; ++k)
            for (int r = 0; r < n; ++r) a(col * n + r, k * n + r) += ext_a.i_matrix(k, col);
    for (int col = 0; col < ne; ++col)
        for (int r = 0; r < n; ++r) b(col * n + r) = ext_b.i_matrix(r, col);
    // sigma_b h = sigma_a
    int off = n * ne;
    for (int col = 0; col < n; ++col)
        for (int r = 0; r < nf; ++r) {
            for (int k = 0; k < n; ++k) a(off + col * nf + r, col * n + k) += ext_b.sigma_matrix(r, k);
            b(off + col * nf + r) = ext_a.sigma_matrix(r, col);
        }
    // h TA(g) = TB(g) h  ->  (TA(g)^T kron I - I kron TB(g)) vec(h) = 0
    off += nf * n;
    for (int g = 0; g < order; ++g) {
        Mat block = kron(ta(g).transpose(), Mat::Identity(n, n)) -
                    kron(Mat::Identity(n, n), tb(g));
        a.block(off + static_cast<Eigen::Index>(g) * n * n, 0, n * n, n * n) = block;
    }

    Vec h_vec = a.completeOrthogonalDecomposition().solve(b);
    Mat h = unvectorize(h_vec, n, n);

    EquivalenceResult res;
    res.h = h;
    res.residual = std::max((h * ext_a.i_matrix - ext_b.i_matrix).lpNorm<Eigen::Infinity>(),
                            (ext_b.sigma_matrix * h - ext_a.sigma_matrix).lpNorm<Eigen::Infinity>());
    for (int g = 0; g < order; ++g)
        res.residual = std::max(res.residual, (h * ta(g) - tb(g) * h).lpNorm<Eigen::Infinity>());
    res.min_singular = min_singular_value(h);
    res.found = res.residual <= tol && res.min_singular > tol;
    return res;
}

RoundTripReport equivalent_representations(const Representation& big, const Extension& ext,
                                           const Selection& p, const TwistedGroupAction& action,
                                           int samples, uint64_t seed, double tol) {
    RoundTripReport rep;
    rep.samples = samples;
    Mat i_pinv = pinv(ext.i_matrix);
    const NormedSpace& e = ext.e_space;
    const NormedSpace& f = ext.f_space;

    auto w_map = [&](const Vec& u) {
        Vec y = ext.sigma_matrix * u;
        return TwistedPair{Vec(i_pinv * (u - p.map(y))), y};
    };

    std::vector<Vec> us = sample_sphere(ext.g_space, samples, mix_seed(seed, 0xF0u));
    for (int g = 0; g < big.group.order; ++g)
        for (const auto& u : us) {
            TwistedPair lhs = w_map(big(g) * u);
            TwistedPair rhs = action.apply(g, w_map(u));
            rep.intertwine_residual = std::max(
                rep.intertwine_residual, e.norm(lhs.x - rhs.x) + f.norm(lhs.y - rhs.y));
        }

    std::vector<Vec> xs = sample_sphere(e, samples, mix_seed(seed, 0xF1u));
    for (const auto& x : xs) {
        TwistedPair wx = w_map(ext.i_matrix * x);
        rep.embed_residual =
            std::max(rep.embed_residual, e.norm(wx.x - x) + f.norm(wx.y));
    }
    rep.pass = rep.intertwine_residual <= tol && rep.embed_residual <= tol;
    return rep;
}

CohomologyDims linear_cohomology_dims(const FiniteGroup& group, const std::vector<Mat>& t1,
                                      const std::vector<Mat>& t2, double rank_tol) {
    const int order = group.order;
    const int ne = static_cast<int>(t1[0].rows());
    const int nf = static_cast<int>(t2[0].rows());
    const int ef = ne * nf;

    std::vector<Mat> action(static_cast<size_t>(order));
    for (int g = 0; g < order; ++g)
        action[static_cast<size_t>(g)] =
            kron(t2[static_cast<size_t>(group.inv(g))].transpose(), t1[static_cast<size_t>(g)]);

    // Cocycle constraints M(g1 g2) - A(g1) M(g2) - M(g1) = 0 over all pairs.
    Mat c = Mat::Zero(static_cast<Eigen::Index>(order) * order * ef,
                      static_cast<Eigen::Index>(order) * ef);
    Eigen::Index row = 0;
    for (int g1 = 0; g1 < order; ++g1)
        for (int g2 = 0; g2 < order; ++g2) {
            int g12 = group.mul(g1, g2);
            c.block(row, static_cast<Eigen::Index>(g12) * ef, ef, ef) += Mat::Identity(ef, ef);
            c.block(row, static_cast<Eigen::Index>(g2) * ef, ef, ef) -= action[static_cast<size_t>(g1)];
            c.block(row, static_cast<Eigen::Index>(g1) * ef, ef, ef) -= Mat::Identity(ef, ef);
            row += ef;
        }

    Eigen::JacobiSVD<Mat> svd_c(c);
    double thresh_c = rank_tol * std::max(1.0, svd_c.singularValues().size() ? svd_c.singularValues()(0) : 0.0);
    int rank_c = 0;
    for (Eigen::Index i = 0; i < svd_c.singularValues().size(); ++i)
        if (svd_c.singularValues()(i) > thresh_c) ++rank_c;

    Mat d = Mat::Zero(static_cast<Eigen::Index>(order) * ef, ef);
    for (int g = 0; g < order; ++g)
        d.block(static_cast<Eigen::Index>(g) * ef, 0, ef, ef) =
            action[static_cast<size_t>(g)] - Mat::Identity(ef, ef);
    Eigen::JacobiSVD<Mat> svd_d(d);
    double thresh_d = rank_tol * std::max(1.0, svd_d.singularValues().size() ? svd_d.singularValues()(0) : 0.0);
    int rank_d = 0;
    for (Eigen::Index i = 0; i < svd_d.singularValues().size(); ++i)
        if (svd_d.singularValues()(i) > thresh_d) ++rank_d;

    CohomologyDims dims;
    dims.z1 = order * ef - rank_c;
    dims.b1 = rank_d;
    dims.h1 = dims.z1 - dims.b1;
    return dims;
}

std::optional<std::vector<Mat>> non_coboundary_cocycle(const FiniteGroup& group,
                                                       const std::vector<Mat>& t1,
                                                       const std::vector<Mat>& t2,
                                                       double rank_tol) {
    const int order = group.order;
    const int ne = static_cast<int>(t1[0].rows());
    const int nf = static_cast<int>(t2[0].rows());
    const int ef = ne * nf;

    std::vector<Mat> action(static_cast<size_t>(order));
    for (int g = 0; g < order; ++g)
        action[static_cast<size_t>(g)] =
            kron(t2[static_cast<size_t>(group.inv(g))].transpose(), t1[static_cast<size_t>(g)]);

    Mat c = Mat::Zero(static_cast<Eigen::Index>(order) * order * ef,
                      static_cast<Eigen::Index>(order) * ef);
    Eigen::Index row = 0;
    for (int g1 = 0; g1 < order; ++g1)
        for (int g2 = 0; g2 < order; ++g2) {
            int g12 = group.mul(g1, g2);
            c.block(row, static_cast<Eigen::Index>(g12) * ef, ef, ef) += Mat::Identity(ef, ef);
            c.block(row, static_cast<Eigen::Index>(g2) * ef, ef, ef) -= action[static_cast<size_t>(g1)];
            c.block(row, static_cast<Eigen::Index>(g1) * ef, ef, ef) -= Mat::Identity(ef, ef);
            row += ef;
        }

    Eigen::JacobiSVD<Mat> svd_c(c, Eigen::ComputeFullV);
    double thresh_c = rank_tol * std::max(1.0, svd_c.singularValues().size() ? svd_c.singularValues()(0) : 0.0);
    int rank_c = 0;
    for (Eigen::Index i = 0; i < svd_c.singularValues().size(); ++i)
        if (svd_c.singularValues()(i) > thresh_c) ++rank_c;
    Mat z_basis = svd_c.matrixV().rightCols(c.cols() - rank_c);

    Mat d = Mat::Zero(static_cast<Eigen::Index>(order) * ef, ef);
    for (int g = 0; g < order; ++g)
        d.block(static_cast<Eigen::Index>(g) * ef, 0, ef, ef) =
            action[static_cast<size_t>(g)] - Mat::Identity(ef, ef);
    Mat d_pinv = pinv(d);

    for (Eigen::Index j = 0; j < z_basis.cols(); ++j) {
        Vec z = z_basis.col(j);
        Vec resid = z - d * (d_pinv * z);
        if (resid.lpNorm<Eigen::Infinity>() > 1e-6) {
            std::vector<Mat> values;
            values.reserve(static_cast<size_t>(order));
            for (int g = 0; g < order; ++g)
                values.push_back(unvectorize(z.segment(static_cast<Eigen::Index>(g) * ef, ef), ne, nf));
            return values;
        }
    }
    return std::nullopt;
}

} // namespace twistlab
