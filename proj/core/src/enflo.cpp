#include "twistlab/enflo.hpp"

#include "map_nodes.hpp"
#include "twistlab/extops.hpp"
#include "twistlab/parallel.hpp"
#include "twistlab/rng.hpp"

#include <json.hpp>

#include <cmath>

namespace twistlab {

using nlohmann::json;

HomMap enflo_delta(const HomMap& h) {
    if (!h.domain().is_euclidean() || !h.codomain().is_euclidean())
        throw Error("enflo_delta: map must act between plain Euclidean spaces");
    const int m = h.domain().dim();
    const int r = h.codomain().dim();
    NormedSpace dom = NormedSpace::l2(2 * m);
    NormedSpace cod = NormedSpace::l2(2 * r + m);
    auto node = detail::make_map_node(NodeKind::EnfloDelta, dom, cod, {}, 1.0, h.root());
    return HomMap(dom, cod, node);
}

HomMap enflo_iterate(const HomMap& h0, int k) {
    if (k < 0) throw Error("enflo_iterate: k must be >= 0");
    HomMap h = h0;
    for (int i = 0; i < k; ++i) {
        if (2 * h.domain().dim() > (1 << 14))
            throw Error("enflo_iterate: domain dimension would exceed 2^14");
        h = enflo_delta(h);
    }
    return h;
}

IncreaseReport check_increase(const HomMap& h, const std::vector<ZeroSumConfig>& configs) {
    IncreaseReport rep;
    rep.configs = static_cast<int>(configs.size());
    const NormedSpace& dom = h.domain();
    const NormedSpace& cod = h.codomain();
    std::vector<double> ratios(configs.size(), 0.0);
    parallel_max(configs.size(), [&](size_t i) {
        const auto& cfg = configs[i];
        Vec acc = Vec::Zero(cod.dim());
        double cost = 0.0;
        for (const auto& z : cfg.points) {
            if (z.size() != dom.dim()) throw Error("check_increase: config dimension mismatch");
            acc += h(z);
            cost += dom.norm(z);
        }
        ratios[i] = cost == 0.0 ? 0.0 : cod.norm(acc) / cost;
        return 0.0;
    });
    size_t arg = 0;
    for (size_t i = 0; i < ratios.size(); ++i) {
        if (ratios[i] > rep.max_ratio) {
            rep.max_ratio = ratios[i];
            arg = i;
        }
    }
    if (!configs.empty()) rep.worst_config = configs[arg].points;
    rep.exceeds = rep.max_ratio > 1.0 + 1e-9;
    return rep;
}

double certificate_ratio(const HomMap& h, const std::vector<Vec>& config) {
    Vec acc = Vec::Zero(h.codomain().dim());
    double cost = 0.0;
    for (const auto& z : config) {
        acc += h(z);
        cost += h.domain().norm(z);
    }
    return cost == 0.0 ? 0.0 : h.codomain().norm(acc) / cost;
}

double witness_sup(const HomMap& h, const Mat& witness, const std::vector<Vec>& points) {
    double sup = 0.0;
    for (const auto& x : points) {
        double nx = h.domain().norm(x);
        if (nx == 0.0) continue;
        sup = std::max(sup, h.codomain().norm(h(x) - witness * x) / nx);
    }
    return sup;
}

namespace {

// Norming functional u of r: u^T r = |r|, |u|_* <= 1, for the p-norm family.
Vec dual_vector(const NormedSpace& space, const Vec& r) {
    if (space.kind() != NormedSpace::Kind::P && space.kind() != NormedSpace::Kind::WeightedP)
        throw Error("dist_to_linear_upper: codomain must be in the p-norm family");
    double nr = space.norm(r);
    Vec u = Vec::Zero(r.size());
    if (nr == 0.0) return u;
    double p = space.p();
    if (std::isinf(p)) {
        // sup norm: all weight on the max coordinate
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < r.size(); ++i) {
            double a = std::abs(r[i]);
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        u[arg] = r[arg] >= 0 ? 1.0 : -1.0;
        return u;
    }
    if (space.kind() == NormedSpace::Kind::WeightedP) {
        // Gradient of the weighted norm via central differences; only used
        // as a subgradient direction, accuracy is not load-bearing.
        const double eps = 1e-7;
        for (Eigen::Index i = 0; i < r.size(); ++i) {
            Vec rp = r;
            rp[i] += eps;
            Vec rm = r;
            rm[i] -= eps;
            u[i] = (space.norm(rp) - space.norm(rm)) / (2 * eps);
        }
        return u;
    }
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (r[i] == 0.0) continue;
        double sign = r[i] > 0 ? 1.0 : -1.0;
        u[i] = sign * std::pow(std::abs(r[i]) / nr, p - 1.0);
    }
    return u;
}

} // namespace

DistanceEstimate dist_to_linear_upper(const HomMap& h, int sample_count, int iterations,
                                      uint64_t seed, const std::vector<Vec>& extra_heldout) {
    const NormedSpace& dom = h.domain();
    const NormedSpace& cod = h.codomain();
    if (sample_count < dom.dim())
        throw Error("dist_to_linear_upper: sample_count must be >= dim(domain)");

    std::vector<Vec> train = sample_sphere(dom, sample_count, mix_seed(seed, 0x7261u));
    std::vector<Vec> heldout = sample_sphere(dom, sample_count, mix_seed(seed, 0x48u));
    for (const auto& x : extra_heldout)
        if (dom.norm(x) > 0) heldout.push_back(x);

    const size_t n = train.size();
    std::vector<Vec> hx(n);
    for (size_t i = 0; i < n; ++i) hx[i] = h(train[i]);

    auto train_objective = [&](const Mat& H) {
        double m = 0.0;
        for (size_t i = 0; i < n; ++i) m = std::max(m, cod.norm(hx[i] - H * train[i]));
        return m;
    };

    // Least-squares fit as a warm start.
    Mat X(dom.dim(), n), Y(cod.dim(), n);
    for (size_t i = 0; i < n; ++i) {
        X.col(static_cast<Eigen::Index>(i)) = train[i];
        Y.col(static_cast<Eigen::Index>(i)) = hx[i];
    }
    Mat ls_fit = Y * pinv(X);

    Mat best_h;
    double best_obj = std::numeric_limits<double>::infinity();
    const int restarts = 5;
    for (int r = 0; r < restarts; ++r) {
        Mat H;
        if (r == 0) {
            H = Mat::Zero(cod.dim(), dom.dim());
        } else if (r == 1) {
            H = ls_fit;
        } else {
            H = ls_fit + random_matrix(cod.dim(), dom.dim(), mix_seed(seed, 0x5200u + r), 0.2);
        }
        double obj = train_objective(H);
        double c = 0.5 * std::max(obj, 1e-6);
        Mat local_best = H;
        double local_best_obj = obj;
        for (int t = 0; t < iterations; ++t) {
            // subgradient at the active sample
            size_t arg = 0;
            double m = -1.0;
            for (size_t i = 0; i < n; ++i) {
                double v = cod.norm(hx[i] - H * train[i]);
                if (v > m) {
                    m = v;
                    arg = i;
                }
            }
            Vec res = hx[arg] - H * train[arg];
            Vec u = dual_vector(cod, res);
            double eta = c / std::sqrt(static_cast<double>(t) + 1.0);
            H += eta * u * train[arg].transpose();
            double v = train_objective(H);
            if (v < local_best_obj) {
                local_best_obj = v;
                local_best = H;
            }
        }
        if (local_best_obj < best_obj) {
            best_obj = local_best_obj;
            best_h = local_best;
        }
    }

    DistanceEstimate est;
    est.domain = dom;
    est.codomain = cod;
    est.map_dsl = h.print();
    est.upper_witness = best_h;
    est.upper_heldout = std::move(heldout);
    est.upper = witness_sup(h, best_h, est.upper_heldout);
    return est;
}

DistanceEstimate dist_to_linear_lower(const HomMap& h, const std::vector<ZeroSumConfig>& configs,
                                      int refine_steps, uint64_t seed) {
    const NormedSpace& dom = h.domain();
    DistanceEstimate est;
    est.domain = dom;
    est.codomain = h.codomain();
    est.map_dsl = h.print();

    size_t idx = 0;
    for (const auto& start : configs) {
        std::vector<Vec> cfg = start.points;
        double cur = certificate_ratio(h, cfg);
        Rng rng(mix_seed(mix_seed(seed, 0x10Eu), idx++));
        double sigma = 0.1;
        for (int round = 0; round < refine_steps; ++round) {
            for (size_t pi = 0; pi < cfg.size(); ++pi) {
                for (int ci = 0; ci < dom.dim(); ++ci) {
                    double delta = sigma * rng.gaussian();
                    std::vector<Vec> cand = cfg;
                    cand[pi][ci] += delta;
                    // re-center to exact zero-sum
                    Vec mean = Vec::Zero(dom.dim());
                    for (const auto& z : cand) mean += z;
                    mean /= static_cast<double>(cand.size());
                    bool ok = true;
                    for (auto& z : cand) {
                        z -= mean;
                        if (z.lpNorm<Eigen::Infinity>() < 1e-12) ok = false;
                    }
                    if (!ok) continue;
                    double v = certificate_ratio(h, cand);
                    if (v > cur) {
                        cur = v;
                        cfg = std::move(cand);
                    }
                }
            }
            sigma *= 0.9;
        }
        if (cur > est.lower) {
            est.lower = cur;
            est.lower_certificate = cfg;
        }
    }
    if (!est.lower_certificate.empty()) {
        ZeroSumConfig check{dom, est.lower_certificate};
        validate_zero_sum(check, 1e-9);
    }
    return est;
}

namespace {

std::vector<ZeroSumConfig> lifted_configs(const NormedSpace& big, const std::vector<Vec>& base) {
    std::vector<ZeroSumConfig> out;
    if (base.empty()) return out;
    const int m = static_cast<int>(base[0].size());
    const size_t n = base.size();
    const double scales[] = {0.5, 1.0, 2.0};
    for (size_t shift = 1; shift < std::min<size_t>(n, 3); ++shift) {
        for (double t : scales) {
            std::vector<Vec> pts;
            pts.reserve(n);
            for (size_t i = 0; i < n; ++i) {
                Vec z(2 * m);
                z.head(m) = base[i];
                z.tail(m) = t * base[(i + shift) % n];
                pts.push_back(std::move(z));
            }
            out.push_back(ZeroSumConfig{big, std::move(pts)});
        }
    }
    // top/bottom embeddings keep the base certificate reachable
    {
        std::vector<Vec> pts;
        for (size_t i = 0; i < n; ++i) {
            Vec z = Vec::Zero(2 * m);
            z.head(m) = base[i];
            pts.push_back(std::move(z));
        }
        out.push_back(ZeroSumConfig{big, std::move(pts)});
    }
    return out;
}

} // namespace

std::vector<GrowthPoint> enflo_growth_study(int k_max, int configs_per_level, int refine_steps,
                                            int upper_samples, int upper_iterations,
                                            int increase_configs, uint64_t seed) {
    if (k_max < 0) throw Error("enflo_growth_study: k_max must be >= 0");
    std::vector<GrowthPoint> out;
    std::vector<Vec> previous_best;
    HomMap h0 = HomMap::zero(NormedSpace::l2(1), NormedSpace::l2(1));
    for (int k = 0; k <= k_max; ++k) {
        HomMap hk = enflo_iterate(h0, k);
        const NormedSpace dom = hk.domain();

        std::vector<ZeroSumConfig> configs;
        for (int i = 0; i < configs_per_level; ++i) {
            Rng rng(mix_seed(mix_seed(seed, 0x9000u + static_cast<uint64_t>(k)), static_cast<uint64_t>(i)));
            int n = rng.uniform_int(3, 8);
            configs.push_back(random_zero_sum_config(dom, n, rng.next_u64()));
        }
        if (!previous_best.empty()) {
            auto lifts = lifted_configs(dom, previous_best);
            configs.insert(configs.end(), lifts.begin(), lifts.end());
        }

        DistanceEstimate lower = dist_to_linear_lower(
            hk, configs, refine_steps, mix_seed(seed, 0xA000u + static_cast<uint64_t>(k)));

        std::vector<Vec> extra;
        for (const auto& z : lower.lower_certificate) {
            double nz = dom.norm(z);
            if (nz > 0) extra.push_back(Vec(z / nz));
        }
        DistanceEstimate upper = dist_to_linear_upper(
            hk, std::max(upper_samples, dom.dim()), upper_iterations,
            mix_seed(seed, 0xB000u + static_cast<uint64_t>(k)), extra);

        DistanceEstimate merged = lower;
        merged.upper = upper.upper;
        merged.upper_witness = upper.upper_witness;
        merged.upper_heldout = upper.upper_heldout;

        GrowthPoint gp;
        gp.k = k;
        gp.estimate = std::move(merged);

        std::vector<ZeroSumConfig> inc;
        inc.reserve(static_cast<size_t>(increase_configs));
        for (int i = 0; i < increase_configs; ++i) {
            Rng rng(mix_seed(mix_seed(seed, 0xC000u + static_cast<uint64_t>(k)), static_cast<uint64_t>(i)));
            int n = rng.uniform_int(2, 8);
            inc.push_back(random_zero_sum_config(dom, n, rng.next_u64()));
        }
        IncreaseReport inc_rep = check_increase(hk, inc);
        gp.increase_ratio = inc_rep.max_ratio;
        gp.increase_worst_config = std::move(inc_rep.worst_config);

        previous_best = gp.estimate.lower_certificate;
        out.push_back(std::move(gp));
    }
    return out;
}

std::string DistanceEstimate::to_json() const {
    json j;
    j["kind"] = "distance_estimate";
    j["domain"] = json::parse(domain.to_json());
    j["codomain"] = json::parse(codomain.to_json());
    j["map"] = map_dsl;
    j["lower"] = lower;
    json cert = json::array();
    for (const auto& z : lower_certificate) {
        json p = json::array();
        for (Eigen::Index i = 0; i < z.size(); ++i) p.push_back(z[i]);
        cert.push_back(std::move(p));
    }
    j["lower_certificate"] = std::move(cert);
    if (std::isfinite(upper)) {
        j["upper"] = upper;
        json w = json::array();
        for (Eigen::Index r = 0; r < upper_witness.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < upper_witness.cols(); ++c) row.push_back(upper_witness(r, c));
            w.push_back(std::move(row));
        }
        j["upper_witness"] = std::move(w);
        json hpts = json::array();
        for (const auto& z : upper_heldout) {
            json p = json::array();
            for (Eigen::Index i = 0; i < z.size(); ++i) p.push_back(z[i]);
            hpts.push_back(std::move(p));
        }
        j["upper_heldout"] = std::move(hpts);
    }
    return j.dump(2);
}

DistanceEstimate DistanceEstimate::from_json(const std::string& text) {
    json j = json::parse(text);
    if (!j.contains("kind") || j.at("kind").get<std::string>() != "distance_estimate")
        throw Error("not a distance_estimate certificate");
    DistanceEstimate est;
    est.domain = NormedSpace::from_json(j.at("domain").dump());
    est.codomain = NormedSpace::from_json(j.at("codomain").dump());
    est.map_dsl = j.at("map").get<std::string>();
    est.lower = j.at("lower").get<double>();
    for (const auto& p : j.at("lower_certificate")) {
        Vec z(p.size());
        for (size_t i = 0; i < p.size(); ++i) z[static_cast<Eigen::Index>(i)] = p[i].get<double>();
        est.lower_certificate.push_back(std::move(z));
    }
    if (j.contains("upper")) {
        est.upper = j.at("upper").get<double>();
        const auto& w = j.at("upper_witness");
        Mat m(w.size(), w.empty() ? 0 : w[0].size());
        for (size_t r = 0; r < w.size(); ++r)
            for (size_t c = 0; c < w[r].size(); ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = w[r][c].get<double>();
        est.upper_witness = std::move(m);
        for (const auto& p : j.at("upper_heldout")) {
            Vec z(p.size());
            for (size_t i = 0; i < p.size(); ++i) z[static_cast<Eigen::Index>(i)] = p[i].get<double>();
            est.upper_heldout.push_back(std::move(z));
        }
    }
    return est;
}

double recompute_lower(const DistanceEstimate& est) {
    if (est.lower_certificate.empty()) return 0.0;
    HomMap h = parse_map(est.map_dsl, est.domain, est.codomain);
    return certificate_ratio(h, est.lower_certificate);
}

double recompute_upper(const DistanceEstimate& est) {
    if (!std::isfinite(est.upper)) return est.upper;
    HomMap h = parse_map(est.map_dsl, est.domain, est.codomain);
    return witness_sup(h, est.upper_witness, est.upper_heldout);
}

} // namespace twistlab
