#include "twistlab/extops.hpp"

#include "twistlab/rng.hpp"

#include <json.hpp>

#include <Eigen/SVD>

#include <cmath>

namespace twistlab {

using nlohmann::json;

namespace {

json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw Error("matrix JSON must be a nonempty array of rows");
    Mat m(j.size(), j[0].size());
    for (size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != static_cast<size_t>(m.cols())) throw Error("ragged matrix JSON");
        for (size_t c = 0; c < j[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
    return m;
}

// Orthonormal basis of the orthogonal complement of the column space.
Mat complement_basis(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU);
    Eigen::Index rank = 0;
    double thresh = 1e-12 * std::max<double>(1.0, svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > thresh) ++rank;
    return svd.matrixU().rightCols(m.rows() - rank);
}

// Orthonormal basis of ker(m).
Mat kernel_basis(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
    Eigen::Index rank = 0;
    double thresh = 1e-12 * std::max<double>(1.0, svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > thresh) ++rank;
    return svd.matrixV().rightCols(m.cols() - rank);
}

double min_singular_value(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

} // namespace

Mat pinv(const Mat& m, double tol) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    double thresh = tol * std::max<double>(1.0, s.size() ? s(0) : 0.0);
    Vec inv = Vec::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) inv[i] = s(i) > thresh ? 1.0 / s(i) : 0.0;
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Mat random_matrix(int rows, int cols, uint64_t seed, double scale) {
    Rng rng(mix_seed(seed, 0x3Au));
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = scale * rng.gaussian();
    return m;
}

Vec Extension::g_add(const Vec& u, const Vec& v) const {
    if (!twisted_backing) return u + v;
    const auto& T = *twisted_backing;
    const int ne = T.e_space().dim();
    const int nf = T.f_space().dim();
    TwistedPair a{u.head(ne), u.tail(nf)}, b{v.head(ne), v.tail(nf)};
    TwistedPair s = T.add(a, b);
    Vec out(ne + nf);
    out << s.x, s.y;
    return out;
}

Vec Extension::g_neg(const Vec& u) const { return -u; }

std::string Extension::to_json() const {
    json j;
    j["E"] = json::parse(e_space.to_json());
    j["F"] = json::parse(f_space.to_json());
    j["i"] = matrix_to_json(i_matrix);
    j["sigma"] = matrix_to_json(sigma_matrix);
    if (twisted_backing && twisted_backing->phi().generator())
        j["phi"] = twisted_backing->phi().generator()->print();
    return j.dump();
}

Extension Extension::from_json(const std::string& text) {
    json j = json::parse(text);
    NormedSpace e = NormedSpace::from_json(j.at("E").dump());
    NormedSpace f = NormedSpace::from_json(j.at("F").dump());
    Mat i = matrix_from_json(j.at("i"));
    Mat sigma = matrix_from_json(j.at("sigma"));
    if (j.contains("phi")) {
        HomMap h = parse_map(j.at("phi").get<std::string>(), f, e);
        return extension_from_factor(e, f, FactorSystem::rho(h));
    }
    NormedSpace g = NormedSpace::direct_sum(e, f);
    return Extension{e, g, f, std::move(i), std::move(sigma), std::nullopt};
}

Extension split_extension(const NormedSpace& e_space, const NormedSpace& f_space) {
    const int ne = e_space.dim(), nf = f_space.dim();
    Mat i = Mat::Zero(ne + nf, ne);
    i.topRows(ne) = Mat::Identity(ne, ne);
    Mat sigma = Mat::Zero(nf, ne + nf);
    sigma.rightCols(nf) = Mat::Identity(nf, nf);
    return Extension{e_space, NormedSpace::direct_sum(e_space, f_space), f_space, std::move(i),
                     std::move(sigma), std::nullopt};
}

Extension extension_from_factor(const NormedSpace& e_space, const NormedSpace& f_space,
                                const FactorSystem& phi) {
    Extension ext = split_extension(e_space, f_space);
    ext.twisted_backing = TwistedSpace(e_space, f_space, phi);
    return ext;
}

ExtensionReport validate_extension(const Extension& ext) {
    ExtensionReport rep;
    const int ne = ext.e_space.dim(), nf = ext.f_space.dim(), ng = ext.g_space.dim();
    rep.dims_ok = ext.i_matrix.rows() == ng && ext.i_matrix.cols() == ne &&
                  ext.sigma_matrix.rows() == nf && ext.sigma_matrix.cols() == ng &&
                  ng == ne + nf;
    if (!rep.dims_ok) {
        rep.detail = "dimension bookkeeping failed";
        return rep;
    }
    rep.i_min_singular = min_singular_value(ext.i_matrix);
    rep.sigma_min_singular = min_singular_value(ext.sigma_matrix);
    rep.sigma_i_residual = (ext.sigma_matrix * ext.i_matrix).lpNorm<Eigen::Infinity>();

    // ker sigma = im i: every kernel vector must lie in the column space of i.
    Mat K = kernel_basis(ext.sigma_matrix);
    Mat proj = ext.i_matrix * pinv(ext.i_matrix);
    rep.exactness_residual = (K - proj * K).lpNorm<Eigen::Infinity>();

    const double tol = 1e-10;
    rep.pass = rep.i_min_singular > tol && rep.sigma_min_singular > tol &&
               rep.sigma_i_residual < tol && rep.exactness_residual < tol;
    if (!rep.pass) rep.detail = "rank or exactness check failed";
    return rep;
}

Selection selection_from_extension(const Extension& ext, SelectionMode mode,
                                   const std::optional<HomMap>& seed_map) {
    if (!validate_extension(ext).pass)
        throw Error("selection_from_extension: extension fails validation");
    Mat p_lin = pinv(ext.sigma_matrix);
    HomMap lin = HomMap::linear(p_lin, ext.f_space, ext.g_space);
    if (mode == SelectionMode::LinearPseudoinverse) return Selection{ext, lin};
    if (!seed_map) throw Error("selection_from_extension: nonlinear mode needs a seed map");
    if (seed_map->domain().dim() != ext.f_space.dim() ||
        seed_map->codomain().dim() != ext.e_space.dim())
        throw Error("selection_from_extension: seed map must be F -> E");
    HomMap lifted = HomMap::post(ext.i_matrix, *seed_map).with_spaces(ext.f_space, ext.g_space);
    return Selection{ext, HomMap::sum(lin, lifted)};
}

double selection_residual(const Selection& p, int probes) {
    const Extension& ext = p.extension;
    if (p.map.domain().dim() != ext.f_space.dim() || p.map.codomain().dim() != ext.g_space.dim())
        throw Error("selection: map must be F -> G");
    double worst = 0.0;
    for (const auto& y : sample_sphere(ext.f_space, probes, 0x5E1u))
        worst = std::max(worst, (ext.sigma_matrix * p.map(y) - y).lpNorm<Eigen::Infinity>());
    return worst;
}

FactorSystem factor_from_extension(const Extension& ext, const Selection& p) {
    if (p.map.domain().dim() != ext.f_space.dim() || p.map.codomain().dim() != ext.g_space.dim())
        throw Error("factor_from_extension: selection map must be F -> G");
    double sel_resid = selection_residual(p);
    if (sel_resid > 1e-10)
        throw Error("factor_from_extension: sigma p != id (residual " + std::to_string(sel_resid) +
                    "); not a valid selection");
    Mat i_left_inverse = pinv(ext.i_matrix);
    Mat sigma = ext.sigma_matrix;
    // Copyable pieces captured by value; Extension holds only value types.
    Extension ext_copy = ext;
    HomMap pm = p.map;
    auto eval = [ext_copy, pm, i_left_inverse, sigma](const Vec& y1, const Vec& y2) {
        Vec a = pm(y1 + y2);
        Vec b = pm(y1);
        Vec c = pm(y2);
        Vec rho_p = ext_copy.g_add(a, ext_copy.g_neg(ext_copy.g_add(b, c)));
        double resid = (sigma * rho_p).lpNorm<Eigen::Infinity>();
        if (resid > 1e-8)
            throw Error("factor_from_extension: rho p escapes im i (residual " +
                        std::to_string(resid) + "); not a valid selection");
        return Vec(i_left_inverse * rho_p);
    };
    return FactorSystem::from_eval(ext.f_space, ext.e_space, std::move(eval));
}

Extension pushout(const Mat& t_matrix, const Extension& ext,
                  const std::optional<NormedSpace>& x_space) {
    if (t_matrix.cols() != ext.e_space.dim()) throw Error("pushout: T must act on E");
    const int nx = static_cast<int>(t_matrix.rows());
    const int nf = ext.f_space.dim();
    NormedSpace X = x_space ? *x_space : NormedSpace::l2(nx);
    if (X.dim() != nx) throw Error("pushout: X space dimension mismatch");

    // Complement of im i inside G carries the F-directions of the quotient.
    Mat c_f = complement_basis(ext.i_matrix); // dim G x dim F
    if (c_f.cols() != nf) throw Error("pushout: rank deficiency in quotient construction");

    Mat i1 = Mat::Zero(nx + nf, nx);
    i1.topRows(nx) = Mat::Identity(nx, nx);
    Mat sigma1 = Mat::Zero(nf, nx + nf);
    sigma1.rightCols(nf) = ext.sigma_matrix * c_f;

    // Quotient norm on (G + X) / graph(T), coordinates via the representative
    // (b_x, b_f) -> (C_F b_f, b_x).
    NormedSpace parent = NormedSpace::direct_sum(ext.g_space, X);
    const int ng = ext.g_space.dim();
    Mat rep = Mat::Zero(ng + nx, nx + nf);
    rep.block(0, nx, ng, nf) = c_f;
    rep.block(ng, 0, nx, nx) = Mat::Identity(nx, nx);
    Mat gamma = Mat::Zero(ng + nx, ext.e_space.dim());
    gamma.topRows(ng) = ext.i_matrix;
    gamma.bottomRows(nx) = t_matrix;
    NormedSpace g1 = NormedSpace::quotient(parent, rep, gamma);

    return Extension{X, g1, ext.f_space, std::move(i1), std::move(sigma1), std::nullopt};
}

Extension pullback(const Extension& ext, const Mat& s_matrix,
                   const std::optional<NormedSpace>& x_space) {
    if (s_matrix.rows() != ext.f_space.dim()) throw Error("pullback: S must map into F");
    const int nx = static_cast<int>(s_matrix.cols());
    const int ne = ext.e_space.dim();
    NormedSpace X = x_space ? *x_space : NormedSpace::l2(nx);
    if (X.dim() != nx) throw Error("pullback: X space dimension mismatch");

    // Fiber subspace {(g, x) : sigma g = S x} spanned by (i, 0) and (sigma^+ S, I).
    Mat sigma_pinv = pinv(ext.sigma_matrix);
    const int ng = ext.g_space.dim();
    Mat basis = Mat::Zero(ng + nx, ne + nx);
    basis.block(0, 0, ng, ne) = ext.i_matrix;
    basis.block(0, ne, ng, nx) = sigma_pinv * s_matrix;
    basis.block(ng, ne, nx, nx) = Mat::Identity(nx, nx);

    Mat i1 = Mat::Zero(ne + nx, ne);
    i1.topRows(ne) = Mat::Identity(ne, ne);
    Mat sigma1 = Mat::Zero(nx, ne + nx);
    sigma1.rightCols(nx) = Mat::Identity(nx, nx);

    NormedSpace parent = NormedSpace::direct_sum(ext.g_space, X);
    NormedSpace g1 = NormedSpace::embedded(parent, basis);
    return Extension{ext.e_space, g1, X, std::move(i1), std::move(sigma1), std::nullopt};
}

Extension baer_sum(const Extension& ext1, const Extension& ext2) {
    if (!ext1.e_space.same_as(ext2.e_space) || !ext1.f_space.same_as(ext2.f_space))
        throw Error("baer_sum: extensions must share E and F");
    const int ne = ext1.e_space.dim(), nf = ext1.f_space.dim();
    const int ng1 = ext1.g_space.dim(), ng2 = ext2.g_space.dim();

    // Direct sum extension E+E -> G1+G2 -> F+F.
    Mat i_d = Mat::Zero(ng1 + ng2, 2 * ne);
    i_d.block(0, 0, ng1, ne) = ext1.i_matrix;
    i_d.block(ng1, ne, ng2, ne) = ext2.i_matrix;
    Mat sigma_d = Mat::Zero(2 * nf, ng1 + ng2);
    sigma_d.block(0, 0, nf, ng1) = ext1.sigma_matrix;
    sigma_d.block(nf, ng1, nf, ng2) = ext2.sigma_matrix;
    Extension direct{NormedSpace::direct_sum(ext1.e_space, ext2.e_space),
                     NormedSpace::direct_sum(ext1.g_space, ext2.g_space),
                     NormedSpace::direct_sum(ext1.f_space, ext2.f_space),
                     std::move(i_d),
                     std::move(sigma_d),
                     std::nullopt};

    Mat nabla(ne, 2 * ne);
    nabla << Mat::Identity(ne, ne), Mat::Identity(ne, ne);
    Extension pushed = pushout(nabla, direct, ext1.e_space);

    Mat delta(2 * nf, nf);
    delta << Mat::Identity(nf, nf), Mat::Identity(nf, nf);
    return pullback(pushed, delta, ext1.f_space);
}

std::optional<CongruenceWitness> find_congruence(const Extension& ext1, const Extension& ext2,
                                                 double tol) {
    if (!ext1.e_space.same_as(ext2.e_space) || !ext1.f_space.same_as(ext2.f_space))
        throw Error("find_congruence: extensions must share E and F");
    const int n = ext1.g_space.dim();
    if (ext2.g_space.dim() != n) return std::nullopt;
    const int ne = ext1.e_space.dim(), nf = ext1.f_space.dim();

    // Unknown h (n x n), column-major vectorization.
    const int rows = n * ne + nf * n;
    Mat A = Mat::Zero(rows, n * n);
    Vec b = Vec::Zero(rows);
    // h * i1 = i2  ->  (i1^T kron I_n) vec(h) = vec(i2)
    for (int col = 0; col < ne; ++col)
        for (int k = 0; k < n; ++k)
            for (int r = 0; r < n; ++r) A(col * n + r, k * n + r) = ext1.i_matrix(k, col);
    for (int col = 0; col < ne; ++col)
        for (int r = 0; r < n; ++r) b(col * n + r) = ext2.i_matrix(r, col);
    // sigma2 * h = sigma1  ->  (I_n kron sigma2) vec(h) = vec(sigma1)
    const int off = n * ne;
    for (int col = 0; col < n; ++col)
        for (int r = 0; r < nf; ++r) {
            for (int k = 0; k < n; ++k) A(off + col * nf + r, col * n + k) = ext2.sigma_matrix(r, k);
            b(off + col * nf + r) = ext1.sigma_matrix(r, col);
        }

    Vec h_vec = A.completeOrthogonalDecomposition().solve(b);
    Mat h(n, n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) h(r, c) = h_vec(c * n + r);

    CongruenceWitness w;
    w.h = h;
    w.residual_i = (h * ext1.i_matrix - ext2.i_matrix).lpNorm<Eigen::Infinity>();
    w.residual_sigma = (ext2.sigma_matrix * h - ext1.sigma_matrix).lpNorm<Eigen::Infinity>();
    w.min_singular = min_singular_value(h);
    if (w.residual_i > tol || w.residual_sigma > tol || w.min_singular <= tol) return std::nullopt;
    return w;
}

} // namespace twistlab
