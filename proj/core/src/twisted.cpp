#include "twistlab/twisted.hpp"

#include "twistlab/rng.hpp"

#include <json.hpp>

#include <cmath>

namespace twistlab {

TwistedSpace::TwistedSpace(NormedSpace e_space, NormedSpace f_space, FactorSystem phi,
                           int c_est_configs, int c_est_refine, uint64_t c_est_seed)
    : e_(std::move(e_space)), f_(std::move(f_space)), phi_(std::move(phi)) {
    if (!phi_.f_space().dim() || phi_.f_space().dim() != f_.dim() || phi_.e_space().dim() != e_.dim())
        throw Error("TwistedSpace: factor system incompatible with E, F");
    if (c_est_configs > 0) {
        std::vector<std::vector<Vec>> cfgs;
        cfgs.reserve(static_cast<size_t>(c_est_configs));
        for (int i = 0; i < c_est_configs; ++i) {
            Rng rng(mix_seed(mix_seed(c_est_seed, 0xC0u), static_cast<uint64_t>(i)));
            int n = rng.uniform_int(2, 6);
            std::vector<Vec> cfg = sample_sphere(f_, n, rng.next_u64());
            cfgs.push_back(std::move(cfg));
        }
        c_est_ = factor_norm_lower(phi_, cfgs, c_est_refine, mix_seed(c_est_seed, 0xC1u));
    }
}

TwistedPair TwistedSpace::zero() const {
    return TwistedPair{Vec::Zero(e_.dim()), Vec::Zero(f_.dim())};
}

TwistedPair TwistedSpace::add(const TwistedPair& a, const TwistedPair& b) const {
    if (a.x.size() != e_.dim() || b.x.size() != e_.dim() || a.y.size() != f_.dim() ||
        b.y.size() != f_.dim())
        throw Error("twisted add: dimension mismatch");
    return TwistedPair{a.x + b.x - phi_(a.y, b.y), a.y + b.y};
}

TwistedPair TwistedSpace::neg(const TwistedPair& a) const { return TwistedPair{-a.x, -a.y}; }

TwistedPair TwistedSpace::sub(const TwistedPair& a, const TwistedPair& b) const {
    return add(a, neg(b));
}

TwistedPair TwistedSpace::scale(double c, const TwistedPair& a) const {
    return TwistedPair{c * a.x, c * a.y};
}

std::string TwistedSpace::to_json() const {
    if (!phi_.generator()) throw Error("TwistedSpace::to_json: phi must be rho(h) to serialize");
    nlohmann::json j;
    j["E"] = nlohmann::json::parse(e_.to_json());
    j["F"] = nlohmann::json::parse(f_.to_json());
    j["phi"] = phi_.generator()->print();
    return j.dump();
}

TwistedSpace TwistedSpace::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    NormedSpace e = NormedSpace::from_json(j.at("E").dump());
    NormedSpace f = NormedSpace::from_json(j.at("F").dump());
    HomMap h = parse_map(j.at("phi").get<std::string>(), f, e);
    return TwistedSpace(e, f, FactorSystem::rho(h));
}

std::string pair_to_json(const TwistedPair& z) {
    nlohmann::json j;
    j["x"] = nlohmann::json::parse(vec_to_json(z.x));
    j["y"] = nlohmann::json::parse(vec_to_json(z.y));
    return j.dump();
}

TwistedPair pair_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    return TwistedPair{vec_from_json(j.at("x").dump()), vec_from_json(j.at("y").dump())};
}

namespace {

// Cost of the decomposition z = (x~, 0) + sum_i (0, y_i) with x~ forced by
// the pieces: x~ = x + sum_{k>=1} phi(s_k, y_{k+1}).
double decomposition_cost(const TwistedSpace& T, const Vec& x, const std::vector<Vec>& pieces) {
    const NormedSpace& E = T.e_space();
    const NormedSpace& F = T.f_space();
    Vec correction = Vec::Zero(E.dim());
    double piece_cost = 0.0;
    Vec partial;
    for (size_t k = 0; k < pieces.size(); ++k) {
        if (k == 0) {
            partial = pieces[0];
        } else {
            correction += T.phi()(partial, pieces[k]);
            partial += pieces[k];
        }
        piece_cost += F.norm(pieces[k]);
    }
    return E.norm(x + correction) + piece_cost;
}

} // namespace

NormBounds twisted_norm_bounds(const TwistedSpace& space, const TwistedPair& z, int split_depth) {
    if (split_depth < 1) throw Error("twisted_norm_bounds: split_depth must be >= 1");
    const NormedSpace& E = space.e_space();
    const NormedSpace& F = space.f_space();
    if (z.x.size() != E.dim() || z.y.size() != F.dim())
        throw Error("twisted_norm_bounds: dimension mismatch");

    const double ny = F.norm(z.y);
    const double nx = E.norm(z.x);

    // Upper bound: local search over coordinate transfers between pieces.
    std::vector<Vec> pieces;
    double upper;
    if (ny == 0.0) {
        upper = nx; // depth-1 decomposition (x, 0) alone
    } else {
        pieces.push_back(z.y);
        upper = decomposition_cost(space, z.x, pieces);
    }
    if (split_depth > 1 && (nx > 0.0 || ny > 0.0)) {
        for (int depth = 2; depth <= split_depth; ++depth) {
            while (pieces.size() < static_cast<size_t>(depth)) pieces.push_back(Vec::Zero(F.dim()));
            if (pieces.size() < 2) continue;
            double step = 0.5 * std::max(ny, nx);
            for (int iter = 0; iter < 20; ++iter) {
                bool improved = false;
                double best_cost = upper;
                size_t best_a = 0, best_b = 0;
                int best_j = -1;
                double best_delta = 0.0;
                for (size_t a = 0; a < pieces.size(); ++a) {
                    for (size_t b = 0; b < pieces.size(); ++b) {
                        if (a == b) continue;
                        for (int j = 0; j < F.dim(); ++j) {
                            pieces[a][j] -= step;
                            pieces[b][j] += step;
                            double c = decomposition_cost(space, z.x, pieces);
                            pieces[a][j] += step;
                            pieces[b][j] -= step;
                            if (c < best_cost - 1e-15) {
                                best_cost = c;
                                best_a = a;
                                best_b = b;
                                best_j = j;
                                best_delta = step;
                                improved = true;
                            }
                        }
                    }
                }
                if (improved) {
                    pieces[best_a][best_j] -= best_delta;
                    pieces[best_b][best_j] += best_delta;
                    upper = best_cost;
                } else {
                    step *= 0.5;
                    if (step < 1e-12 * std::max(1.0, ny)) break;
                }
            }
        }
    }

    // Lower bound: quotient bound plus the sharpened C(phi) sandwich
    //   cost >= max(|x| - C s, 0) + s over s >= |y|,
    // minimized in closed form. Uses the sampled lower estimate of C(phi),
    // hence the estimate flag whenever that estimate is engaged.
    NormBounds out;
    out.upper = upper;
    const double c_est = space.c_lower_estimate();
    double sandwich;
    if (c_est <= 1.0) {
        sandwich = ny + std::max(nx - c_est * ny, 0.0);
    } else {
        sandwich = std::max(ny, nx / c_est);
    }
    out.lower_uses_estimate = c_est > 0.0 && sandwich > ny;
    out.lower = std::max(ny, std::min(sandwich, out.upper));
    return out;
}

TwistedPair CanonicalSelection::operator()(const Vec& y) const {
    if (y.size() != space_.f_space().dim()) throw Error("canonical selection: dimension mismatch");
    return TwistedPair{Vec::Zero(space_.e_space().dim()), y};
}

Vec CanonicalSelection::rho(const Vec& y1, const Vec& y2) const {
    TwistedPair r = space_.sub((*this)(y1 + y2), space_.add((*this)(y1), (*this)(y2)));
    if (r.y.lpNorm<Eigen::Infinity>() > 1e-9)
        throw Error("canonical selection: rho p left the E component");
    return r.x;
}

} // namespace twistlab
