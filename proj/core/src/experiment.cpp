#include "twistlab/experiment.hpp"

#include "toml_lite.hpp"
#include "twistlab/parallel.hpp"
#include "twistlab/rng.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace twistlab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

struct Row {
    std::string params; // JSON object text
    double value = 0;
    std::string cert; // file name relative to output_dir, may be empty
};

struct Artifacts {
    std::vector<Row> rows;
    std::vector<std::pair<std::string, std::string>> files; // name -> content
    std::string svg;                                         // empty when the kind has no plot
};

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

json vec_list_json(const std::vector<Vec>& pts) {
    json arr = json::array();
    for (const auto& z : pts) {
        json p = json::array();
        for (Eigen::Index i = 0; i < z.size(); ++i) p.push_back(z[i]);
        arr.push_back(std::move(p));
    }
    return arr;
}

std::vector<Vec> vec_list_from_json(const json& arr) {
    std::vector<Vec> out;
    for (const auto& p : arr) {
        Vec z(p.size());
        for (size_t i = 0; i < p.size(); ++i) z[static_cast<Eigen::Index>(i)] = p[i].get<double>();
        out.push_back(std::move(z));
    }
    return out;
}

json matrix_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_json(const json& j) {
    Mat m(j.size(), j.empty() ? 0 : j[0].size());
    for (size_t r = 0; r < j.size(); ++r)
        for (size_t c = 0; c < j[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    return m;
}

// ---------------------------------------------------------------- plotting

std::string svg_header(int w, int h) {
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
      << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    return s.str();
}

std::string svg_line_chart(const std::string& title,
                           const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series) {
    const int w = 640, h = 420, ml = 60, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
    for (const auto& [name, pts] : series)
        for (auto [x, y] : pts) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymax = std::max(ymax, y);
        }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    ymax *= 1.1;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };
    std::ostringstream s;
    s << svg_header(w, h);
    s << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
    s << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        double yv = ymin + (ymax - ymin) * t / 4;
        s << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4
          << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_double(std::round(yv * 1000) / 1000)
          << "</text>\n";
        s << "<line x1=\"" << ml << "\" y1=\"" << py(yv) << "\" x2=\"" << w - mr << "\" y2=\""
          << py(yv) << "\" stroke=\"#dddddd\"/>\n";
    }
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    int ci = 0;
    for (const auto& [name, pts] : series) {
        std::ostringstream poly;
        for (auto [x, y] : pts) poly << px(x) << "," << py(y) << " ";
        s << "<polyline fill=\"none\" stroke=\"" << colors[ci % 4] << "\" stroke-width=\"2\" points=\""
          << poly.str() << "\"/>\n";
        for (auto [x, y] : pts)
            s << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\""
              << colors[ci % 4] << "\"/>\n";
        s << "<text x=\"" << w - mr - 140 << "\" y=\"" << mt + 16 * ci + 12 << "\" font-size=\"12\" fill=\""
          << colors[ci % 4] << "\">" << name << "</text>\n";
        ++ci;
    }
    for (const auto& [name, pts] : series) {
        for (auto [x, y] : pts)
            (void)y;
        for (auto [x, y] : pts) {
            (void)y;
            s << "<text x=\"" << px(x) << "\" y=\"" << h - mb + 18
              << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_double(x) << "</text>\n";
        }
        break;
    }
    s << "</svg>\n";
    return s.str();
}

std::string svg_histogram(const std::string& title, const std::vector<double>& values) {
    // log10 buckets of residual magnitudes
    const int w = 640, h = 420, ml = 60, mr = 20, mt = 40, mb = 60;
    const int nb = 24;
    std::vector<int> buckets(nb, 0);
    for (double v : values) {
        double lg = v <= 0 ? -18.0 : std::log10(v);
        int b = static_cast<int>(std::floor(lg + 18.0));
        b = std::max(0, std::min(nb - 1, b));
        ++buckets[static_cast<size_t>(b)];
    }
    int peak = 1;
    for (int c : buckets) peak = std::max(peak, c);
    std::ostringstream s;
    s << svg_header(w, h);
    s << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
    double bw = static_cast<double>(w - ml - mr) / nb;
    for (int b = 0; b < nb; ++b) {
        double bh = static_cast<double>(h - mt - mb) * buckets[static_cast<size_t>(b)] / peak;
        s << "<rect x=\"" << ml + b * bw << "\" y=\"" << h - mb - bh << "\" width=\"" << bw * 0.9
          << "\" height=\"" << bh << "\" fill=\"#1f77b4\"/>\n";
        if (b % 4 == 0)
            s << "<text x=\"" << ml + b * bw << "\" y=\"" << h - mb + 16
              << "\" font-size=\"10\">1e" << (b - 18) << "</text>\n";
    }
    s << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
    s << "</svg>\n";
    return s.str();
}

// ------------------------------------------------------------- kind: axioms

struct AxiomsParams {
    std::string map;
    int dim_in = 2, dim_out = 2, samples = 10000;
};

AxiomsParams axioms_params(const ExperimentConfig& cfg) {
    AxiomsParams p;
    p.map = cfg.strings.at("map");
    p.dim_in = static_cast<int>(cfg.numbers.at("dim_in"));
    p.dim_out = static_cast<int>(cfg.numbers.at("dim_out"));
    p.samples = static_cast<int>(cfg.numbers.at("samples"));
    return p;
}

AxiomReport compute_axioms(const AxiomsParams& p, uint64_t seed) {
    HomMap h = parse_map(p.map, NormedSpace::l2(p.dim_in), NormedSpace::l2(p.dim_out));
    return check_factor_axioms(FactorSystem::rho(h), p.samples, seed);
}

std::map<std::string, double> axiom_values(const AxiomReport& rep) {
    return {{"axiom1_homogeneity", rep.homogeneity}, {"axiom2_symmetry", rep.symmetry},
            {"axiom3_right_zero", rep.right_zero},   {"axiom4_cocycle", rep.cocycle},
            {"inverse_pair", rep.inverse_pair},      {"axiom5_ratio", rep.axiom5_ratio}};
}

void run_axioms(const ExperimentConfig& cfg, Artifacts& art) {
    AxiomsParams p = axioms_params(cfg);
    AxiomReport rep = compute_axioms(p, cfg.seed);

    json cert;
    cert["kind"] = "axiom_scan";
    cert["map"] = p.map;
    cert["dim_in"] = p.dim_in;
    cert["dim_out"] = p.dim_out;
    cert["samples"] = p.samples;
    cert["seed"] = cfg.seed;
    cert["values"] = axiom_values(rep);
    art.files.emplace_back("axiom_scan.json", cert.dump(2));

    for (const auto& [metric, value] : axiom_values(rep)) {
        json params;
        params["map"] = p.map;
        params["metric"] = metric;
        art.rows.push_back(Row{params.dump(), value, "axiom_scan.json"});
    }
    art.svg = svg_histogram("axiom residuals (log10 buckets)", rep.residual_samples);
}

// ------------------------------------------------------- kind: twisted_norm

struct TwistedNormParams {
    std::string map;
    int dim_in = 2, dim_out = 2, samples = 200, split_depth = 2;
};

TwistedNormParams twisted_params(const ExperimentConfig& cfg) {
    TwistedNormParams p;
    p.map = cfg.strings.at("map");
    p.dim_in = static_cast<int>(cfg.numbers.at("dim_in"));
    p.dim_out = static_cast<int>(cfg.numbers.at("dim_out"));
    p.samples = static_cast<int>(cfg.numbers.at("samples"));
    p.split_depth = static_cast<int>(cfg.numbers.at("split_depth"));
    return p;
}

std::map<std::string, double> compute_twisted_norm(const TwistedNormParams& p, uint64_t seed) {
    NormedSpace F = NormedSpace::l2(p.dim_in), E = NormedSpace::l2(p.dim_out);
    HomMap h = parse_map(p.map, F, E);
    TwistedSpace space(E, F, FactorSystem::rho(h));
    TwistedSpace split(E, F, FactorSystem::rho(HomMap::zero(F, E)));

    std::vector<Vec> xs = sample_sphere(E, p.samples, mix_seed(seed, 0x71u));
    std::vector<Vec> ys = sample_sphere(F, p.samples, mix_seed(seed, 0x72u));
    double x0_gap = 0, y_gap = 0, split_gap = 0, caveat = 0;
    for (int i = 0; i < p.samples; ++i) {
        const Vec& x = xs[static_cast<size_t>(i)];
        const Vec& y = ys[static_cast<size_t>(i)];
        NormBounds bx = twisted_norm_bounds(space, TwistedPair{x, Vec::Zero(F.dim())}, p.split_depth);
        x0_gap = std::max(x0_gap, bx.upper - E.norm(x));
        NormBounds by = twisted_norm_bounds(space, TwistedPair{Vec::Zero(E.dim()), y}, p.split_depth);
        y_gap = std::max(y_gap, std::max(std::abs(by.upper - F.norm(y)), std::abs(by.lower - F.norm(y))));
        NormBounds bs = twisted_norm_bounds(split, TwistedPair{x, y}, 1);
        double expect = E.norm(x) + F.norm(y);
        split_gap = std::max(split_gap, std::max(std::abs(bs.upper - expect), std::abs(bs.lower - expect)));
        if (bx.lower_uses_estimate) caveat = 1;
    }
    return {{"x0_upper_minus_norm_max", x0_gap},
            {"y_bounds_gap_max", y_gap},
            {"split_gauge_gap_max", split_gap},
            {"lower_uses_estimate", caveat}};
}

void run_twisted_norm(const ExperimentConfig& cfg, Artifacts& art) {
    TwistedNormParams p = twisted_params(cfg);
    auto values = compute_twisted_norm(p, cfg.seed);
    json cert;
    cert["kind"] = "twisted_norm_check";
    cert["map"] = p.map;
    cert["dim_in"] = p.dim_in;
    cert["dim_out"] = p.dim_out;
    cert["samples"] = p.samples;
    cert["split_depth"] = p.split_depth;
    cert["seed"] = cfg.seed;
    cert["values"] = values;
    art.files.emplace_back("twisted_norm_check.json", cert.dump(2));
    for (const auto& [metric, value] : values) {
        json params;
        params["map"] = p.map;
        params["metric"] = metric;
        art.rows.push_back(Row{params.dump(), value, "twisted_norm_check.json"});
    }
}

// -------------------------------------------------------- kind: ext_algebra

Extension random_factor_extension(int ne, int nf, uint64_t seed) {
    NormedSpace E = NormedSpace::l2(ne), F = NormedSpace::l2(nf);
    Mat a = random_matrix(ne, nf, mix_seed(seed, 1));
    Mat b = random_matrix(ne, nf, mix_seed(seed, 2), 0.6);
    HomMap h = HomMap::sum(HomMap::linear(a, F, E),
                           HomMap::post(b, HomMap::kalton_peck(F)).with_spaces(F, E));
    return extension_from_factor(E, F, FactorSystem::rho(h));
}

std::string congruence_cert(const Extension& a, const Extension& b, const CongruenceWitness& w) {
    json j;
    j["kind"] = "congruence_certificate";
    j["i1"] = matrix_json(a.i_matrix);
    j["sigma1"] = matrix_json(a.sigma_matrix);
    j["i2"] = matrix_json(b.i_matrix);
    j["sigma2"] = matrix_json(b.sigma_matrix);
    j["witness"] = matrix_json(w.h);
    j["residual_i"] = w.residual_i;
    j["residual_sigma"] = w.residual_sigma;
    j["min_singular"] = w.min_singular;
    return j.dump(2);
}

void run_ext_algebra(const ExperimentConfig& cfg, Artifacts& art) {
    const int trials = static_cast<int>(cfg.numbers.at("trials"));
    const int dim_max = static_cast<int>(cfg.numbers.at("dim_max"));
    const int pairs = static_cast<int>(cfg.numbers.at("pairs"));

    auto add_row = [&](const std::string& metric, int index, const Extension& a, const Extension& b,
                       const std::optional<CongruenceWitness>& w) {
        if (!w)
            throw NumericalError("ext_algebra: no congruence witness for " + metric + " #" +
                                 std::to_string(index));
        std::string cert_name = metric + "_" + std::to_string(index) + ".json";
        art.files.emplace_back(cert_name, congruence_cert(a, b, *w));
        json params;
        params["metric"] = metric;
        params["trial"] = index;
        art.rows.push_back(Row{params.dump(), std::max(w->residual_i, w->residual_sigma), cert_name});
    };

    for (int t = 0; t < trials; ++t) {
        Rng rng(mix_seed(mix_seed(cfg.seed, 0xE87u), static_cast<uint64_t>(t)));
        int ne = rng.uniform_int(2, dim_max);
        int nf = rng.uniform_int(2, dim_max);
        Extension ext = random_factor_extension(ne, nf, rng.next_u64());

        Extension po = pushout(Mat::Identity(ne, ne), ext, ext.e_space);
        add_row("pushout_identity", t, po, ext, find_congruence(po, ext));

        Extension pb = pullback(ext, Mat::Identity(nf, nf), ext.f_space);
        add_row("pullback_identity", t, pb, ext, find_congruence(pb, ext));

        Extension bs = baer_sum(ext, split_extension(ext.e_space, ext.f_space));
        add_row("baer_sum_split", t, bs, ext, find_congruence(bs, ext));
    }

    for (int t = 0; t < pairs; ++t) {
        Rng rng(mix_seed(mix_seed(cfg.seed, 0xBA12u), static_cast<uint64_t>(t)));
        int ne = rng.uniform_int(2, dim_max);
        int nf = rng.uniform_int(2, dim_max);
        Extension a = random_factor_extension(ne, nf, rng.next_u64());
        Extension b = random_factor_extension(ne, nf, rng.next_u64());
        Extension ab = baer_sum(a, b);
        Extension ba = baer_sum(b, a);
        add_row("baer_commutativity", t, ab, ba, find_congruence(ab, ba));
    }
}

// ------------------------------------------------------- kind: enflo_growth

void run_enflo_growth(const ExperimentConfig& cfg, Artifacts& art) {
    const int k_max = static_cast<int>(cfg.numbers.at("k_max"));
    const int configs = static_cast<int>(cfg.numbers.at("configs"));
    const int refine = static_cast<int>(cfg.numbers.at("refine_steps"));
    const int upper_samples = static_cast<int>(cfg.numbers.at("upper_samples"));
    const int upper_iters = static_cast<int>(cfg.numbers.at("upper_iterations"));
    const int inc_configs = static_cast<int>(cfg.numbers.at("increase_configs"));

    auto points = enflo_growth_study(k_max, configs, refine, upper_samples, upper_iters,
                                     inc_configs, cfg.seed);

    std::vector<std::pair<double, double>> lower_pts, upper_pts;
    for (const auto& gp : points) {
        std::string cert_name = "enflo_dist_k" + std::to_string(gp.k) + ".json";
        art.files.emplace_back(cert_name, gp.estimate.to_json());

        json params;
        params["k"] = gp.k;
        params["metric"] = "dist_lower";
        art.rows.push_back(Row{params.dump(), gp.estimate.lower, cert_name});
        params["metric"] = "dist_upper";
        art.rows.push_back(Row{params.dump(), gp.estimate.upper, cert_name});

        std::string inc_name = "enflo_increase_k" + std::to_string(gp.k) + ".json";
        json rc;
        rc["kind"] = "ratio_certificate";
        rc["map"] = gp.estimate.map_dsl;
        rc["domain"] = json::parse(gp.estimate.domain.to_json());
        rc["codomain"] = json::parse(gp.estimate.codomain.to_json());
        rc["config"] = vec_list_json(gp.increase_worst_config);
        rc["value"] = gp.increase_ratio;
        art.files.emplace_back(inc_name, rc.dump(2));
        params["metric"] = "increase_ratio";
        art.rows.push_back(Row{params.dump(), gp.increase_ratio, inc_name});

        lower_pts.emplace_back(gp.k, gp.estimate.lower);
        upper_pts.emplace_back(gp.k, gp.estimate.upper);
    }
    art.svg = svg_line_chart("dist(Delta^k 0, L) bounds",
                             {{"lower (certified)", lower_pts}, {"upper (witness)", upper_pts}});
}

// ------------------------------------------------- kind: grouprep_roundtrip

std::map<std::string, double> compute_roundtrip(const std::string& group_name, int samples,
                                                double kp_scale, uint64_t seed) {
    Representation base;
    if (group_name == "z4") base = cyclic_rotation_representation(4);
    else if (group_name == "d4") base = dihedral_defining_representation(4);
    else throw ConfigError("grouprep_roundtrip: group must be \"z4\" or \"d4\"");

    const Representation& t1 = base;
    const Representation& t2 = base;
    Mat corner = random_matrix(t1.space.dim(), t2.space.dim(), mix_seed(seed, 0xB10Cu));
    Representation big = block_triangular_representation(t1, t2, corner);
    Extension ext = split_extension(t1.space, t2.space);

    auto [t1x, t2x] = invariant_extension(big, ext);
    HomMap kp = HomMap::scale(kp_scale, HomMap::kalton_peck(ext.f_space));
    Selection p = selection_from_extension(ext, SelectionMode::Nonlinear, kp);
    FactorSystem phi = factor_from_extension(ext, p);
    Cocycle psi = psi_cocycle(big, t1x, t2x, ext, p);

    CocycleReport coc = check_cocycle(psi, t1x, t2x, samples, mix_seed(seed, 0x11u));
    HomMap zero_witness = HomMap::zero(ext.f_space, ext.e_space);
    CompatibilityReport compat =
        check_compatibility(phi, psi, zero_witness, t1x, t2x, samples, mix_seed(seed, 0x12u));
    TwistedGroupAction action =
        reconstruct(t1x, t2x, phi, psi, std::max(16, samples / 2), mix_seed(seed, 0x13u));
    RoundTripReport round =
        equivalent_representations(big, ext, p, action, samples, mix_seed(seed, 0x14u));

    return {{"cocycle_residual", coc.cocycle_residual},
            {"compatibility_residual", compat.max_residual},
            {"reconstruct_hom_residual", action.hom_residual},
            {"reconstruct_additivity_residual", action.additivity_residual},
            {"equivalence_residual", round.intertwine_residual},
            {"embed_residual", round.embed_residual}};
}

void run_grouprep(const ExperimentConfig& cfg, Artifacts& art) {
    const std::string group = cfg.strings.at("group");
    const int samples = static_cast<int>(cfg.numbers.at("samples"));
    const double kp_scale = cfg.numbers.at("kp_scale");
    auto values = compute_roundtrip(group, samples, kp_scale, cfg.seed);

    json cert;
    cert["kind"] = "roundtrip_rerun";
    cert["group"] = group;
    cert["samples"] = samples;
    cert["kp_scale"] = kp_scale;
    cert["seed"] = cfg.seed;
    cert["values"] = values;
    art.files.emplace_back("roundtrip_rerun.json", cert.dump(2));

    for (const auto& [metric, value] : values) {
        json params;
        params["group"] = group;
        params["metric"] = metric;
        art.rows.push_back(Row{params.dump(), value, "roundtrip_rerun.json"});
    }
}

// ------------------------------------------------------------ config schema

struct Schema {
    std::map<std::string, std::optional<double>> numbers; // nullopt = required
    std::map<std::string, std::optional<std::string>> strings;
};

const std::map<std::string, Schema>& schemas() {
    static const std::map<std::string, Schema> s = {
        {"axioms",
         Schema{{{"dim_in", 2.0}, {"dim_out", 2.0}, {"samples", 10000.0}}, {{"map", std::nullopt}}}},
        {"twisted_norm",
         Schema{{{"dim_in", 2.0}, {"dim_out", 2.0}, {"samples", 200.0}, {"split_depth", 2.0}},
                {{"map", std::nullopt}}}},
        {"ext_algebra", Schema{{{"trials", 10.0}, {"dim_max", 8.0}, {"pairs", 20.0}}, {}}},
        {"enflo_growth",
         Schema{{{"k_max", 3.0},
                 {"configs", 48.0},
                 {"refine_steps", 40.0},
                 {"upper_samples", 160.0},
                 {"upper_iterations", 600.0},
                 {"increase_configs", 10000.0}},
                {}}},
        {"grouprep_roundtrip",
         Schema{{{"samples", 40.0}, {"kp_scale", 1.0}}, {{"group", std::string("z4")}}}},
    };
    return s;
}

void validate_config(ExperimentConfig& cfg) {
    auto it = schemas().find(cfg.kind);
    if (it == schemas().end())
        throw ConfigError("unknown experiment kind '" + cfg.kind +
                          "' (expected axioms, twisted_norm, ext_algebra, enflo_growth or "
                          "grouprep_roundtrip)");
    const Schema& schema = it->second;
    for (const auto& [key, _] : cfg.numbers)
        if (!schema.numbers.count(key))
            throw ConfigError(cfg.kind + ": unknown numeric parameter '" + key + "'");
    for (const auto& [key, _] : cfg.strings)
        if (!schema.strings.count(key))
            throw ConfigError(cfg.kind + ": unknown string parameter '" + key + "'");
    for (const auto& [key, def] : schema.numbers) {
        if (!cfg.numbers.count(key)) {
            if (!def) throw ConfigError(cfg.kind + ": missing required parameter '" + key + "'");
            cfg.numbers[key] = *def;
        }
    }
    for (const auto& [key, def] : schema.strings) {
        if (!cfg.strings.count(key)) {
            if (!def) throw ConfigError(cfg.kind + ": missing required parameter '" + key + "'");
            cfg.strings[key] = *def;
        }
    }
}

ExperimentConfig config_from_table(const toml::Table& t) {
    ExperimentConfig cfg;
    auto kind_it = t.find("kind");
    if (kind_it == t.end()) throw ConfigError("experiment config: missing 'kind'");
    cfg.kind = kind_it->second.as_string();
    auto seed_it = t.find("seed");
    if (seed_it == t.end()) throw ConfigError("experiment config: 'seed' is mandatory");
    cfg.seed = static_cast<uint64_t>(seed_it->second.as_int());
    auto out_it = t.find("output_dir");
    if (out_it == t.end()) throw ConfigError("experiment config: missing 'output_dir'");
    cfg.output_dir = out_it->second.as_string();
    for (const auto& [key, value] : t) {
        if (key == "kind" || key == "seed" || key == "output_dir" || key == "parameters") continue;
        throw ConfigError("experiment config: unexpected top-level key '" + key + "'");
    }
    auto par_it = t.find("parameters");
    if (par_it != t.end()) {
        if (!par_it->second.is_table()) throw ConfigError("'parameters' must be a table");
        for (const auto& [key, value] : *par_it->second.table) {
            switch (value.type) {
            case toml::Value::Type::Int:
                cfg.numbers[key] = static_cast<double>(value.i);
                break;
            case toml::Value::Type::Float:
                cfg.numbers[key] = value.f;
                break;
            case toml::Value::Type::String:
                cfg.strings[key] = value.s;
                break;
            default:
                throw ConfigError("parameter '" + key + "' must be a number or string");
            }
        }
    }
    validate_config(cfg);
    return cfg;
}

} // namespace

std::vector<ExperimentConfig> parse_experiment_configs(const std::string& toml_text) {
    toml::Table root;
    try {
        root = toml::parse(toml_text);
    } catch (const toml::TomlError& e) {
        throw ConfigError(e.what());
    }
    std::vector<ExperimentConfig> out;
    auto batch_it = root.find("experiment");
    if (batch_it != root.end() && batch_it->second.type == toml::Value::Type::Array) {
        for (const auto& entry : batch_it->second.array) {
            if (!entry.is_table()) throw ConfigError("[[experiment]] entries must be tables");
            out.push_back(config_from_table(*entry.table));
        }
        if (out.empty()) throw ConfigError("batch config contains no experiments");
        return out;
    }
    out.push_back(config_from_table(root));
    return out;
}

void run_experiment(const ExperimentConfig& config) {
    ExperimentConfig cfg = config;
    validate_config(cfg);

    Artifacts art;
    if (cfg.kind == "axioms") run_axioms(cfg, art);
    else if (cfg.kind == "twisted_norm") run_twisted_norm(cfg, art);
    else if (cfg.kind == "ext_algebra") run_ext_algebra(cfg, art);
    else if (cfg.kind == "enflo_growth") run_enflo_growth(cfg, art);
    else if (cfg.kind == "grouprep_roundtrip") run_grouprep(cfg, art);
    else throw ConfigError("unknown experiment kind '" + cfg.kind + "'");

    fs::path dir(cfg.output_dir);
    fs::create_directories(dir);

    std::string csv = "experiment,parameters,value,certificate\n";
    for (const auto& row : art.rows) {
        csv += cfg.kind;
        csv += ",";
        csv += csv_quote(row.params);
        csv += ",";
        csv += fmt_double(row.value);
        csv += ",";
        csv += row.cert;
        csv += "\n";
    }
    write_atomic(dir / "results.csv", csv);

    json manifest;
    manifest["tool"] = kToolVersion;
    manifest["kind"] = cfg.kind;
    manifest["seed"] = cfg.seed;
    manifest["output_dir"] = cfg.output_dir;
    manifest["parameters"]["numbers"] = cfg.numbers;
    manifest["parameters"]["strings"] = cfg.strings;
    write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

    for (const auto& [name, content] : art.files) write_atomic(dir / name, content + "\n");
    if (!art.svg.empty()) write_atomic(dir / "plot.svg", art.svg);
}

void run_experiments(const std::vector<ExperimentConfig>& configs) {
    if (configs.size() <= 1) {
        for (const auto& c : configs) run_experiment(c);
        return;
    }
    unsigned workers = std::min<size_t>(thread_budget(), configs.size());
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(configs.size());
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (size_t i = w; i < configs.size(); i += workers) {
                try {
                    run_experiment(configs[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

int run_config_file(const std::string& path, std::string* message) {
    try {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("cannot read config file " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        auto configs = parse_experiment_configs(ss.str());
        run_experiments(configs);
        if (message) *message = "ok";
        return 0;
    } catch (const ConfigError& e) {
        if (message) *message = e.what();
        return 2;
    } catch (const std::exception& e) {
        if (message) *message = e.what();
        return 3;
    }
}

namespace {

bool close_enough(double a, double b) {
    if (std::isinf(a) && std::isinf(b)) return true;
    return std::abs(a - b) <= 1e-12;
}

int verify_values(const std::map<std::string, double>& stored,
                  const std::map<std::string, double>& recomputed, std::string* message) {
    for (const auto& [key, value] : stored) {
        auto it = recomputed.find(key);
        if (it == recomputed.end()) throw ConfigError("certificate value '" + key + "' unknown");
        if (!close_enough(value, it->second)) {
            if (message)
                *message = key + ": stored " + fmt_double(value) + ", recomputed " +
                           fmt_double(it->second);
            return 4;
        }
    }
    if (message) *message = "verified";
    return 0;
}

} // namespace

int verify_certificate_file(const std::string& path, std::string* message) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read certificate " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const std::exception& e) {
        throw ConfigError(std::string("certificate is not valid JSON: ") + e.what());
    }
    if (!j.contains("kind")) throw ConfigError("certificate has no 'kind'");
    const std::string kind = j.at("kind").get<std::string>();

    if (kind == "distance_estimate") {
        DistanceEstimate est = DistanceEstimate::from_json(ss.str());
        double lo = recompute_lower(est);
        double up = recompute_upper(est);
        if (!close_enough(lo, est.lower)) {
            if (message)
                *message = "lower: stored " + fmt_double(est.lower) + ", recomputed " + fmt_double(lo);
            return 4;
        }
        if (!close_enough(up, est.upper)) {
            if (message)
                *message = "upper: stored " + fmt_double(est.upper) + ", recomputed " + fmt_double(up);
            return 4;
        }
        if (message) *message = "verified";
        return 0;
    }
    if (kind == "ratio_certificate") {
        NormedSpace dom = NormedSpace::from_json(j.at("domain").dump());
        NormedSpace cod = NormedSpace::from_json(j.at("codomain").dump());
        HomMap h = parse_map(j.at("map").get<std::string>(), dom, cod);
        std::vector<Vec> config = vec_list_from_json(j.at("config"));
        double v = certificate_ratio(h, config);
        double stored = j.at("value").get<double>();
        if (!close_enough(v, stored)) {
            if (message)
                *message = "ratio: stored " + fmt_double(stored) + ", recomputed " + fmt_double(v);
            return 4;
        }
        if (message) *message = "verified";
        return 0;
    }
    if (kind == "congruence_certificate") {
        Mat i1 = matrix_from_json(j.at("i1")), sigma1 = matrix_from_json(j.at("sigma1"));
        Mat i2 = matrix_from_json(j.at("i2")), sigma2 = matrix_from_json(j.at("sigma2"));
        Mat h = matrix_from_json(j.at("witness"));
        std::map<std::string, double> stored = {{"residual_i", j.at("residual_i").get<double>()},
                                                {"residual_sigma", j.at("residual_sigma").get<double>()}};
        Eigen::JacobiSVD<Mat> svd(h);
        std::map<std::string, double> recomputed = {
            {"residual_i", (h * i1 - i2).lpNorm<Eigen::Infinity>()},
            {"residual_sigma", (sigma2 * h - sigma1).lpNorm<Eigen::Infinity>()}};
        if (j.contains("min_singular")) {
            stored["min_singular"] = j.at("min_singular").get<double>();
            recomputed["min_singular"] = svd.singularValues()(svd.singularValues().size() - 1);
        }
        return verify_values(stored, recomputed, message);
    }
    if (kind == "axiom_scan") {
        AxiomsParams p;
        p.map = j.at("map").get<std::string>();
        p.dim_in = j.at("dim_in").get<int>();
        p.dim_out = j.at("dim_out").get<int>();
        p.samples = j.at("samples").get<int>();
        AxiomReport rep = compute_axioms(p, j.at("seed").get<uint64_t>());
        return verify_values(j.at("values").get<std::map<std::string, double>>(), axiom_values(rep),
                             message);
    }
    if (kind == "twisted_norm_check") {
        TwistedNormParams p;
        p.map = j.at("map").get<std::string>();
        p.dim_in = j.at("dim_in").get<int>();
        p.dim_out = j.at("dim_out").get<int>();
        p.samples = j.at("samples").get<int>();
        p.split_depth = j.at("split_depth").get<int>();
        auto recomputed = compute_twisted_norm(p, j.at("seed").get<uint64_t>());
        return verify_values(j.at("values").get<std::map<std::string, double>>(), recomputed,
                             message);
    }
    if (kind == "roundtrip_rerun") {
        auto recomputed =
            compute_roundtrip(j.at("group").get<std::string>(), j.at("samples").get<int>(),
                              j.at("kp_scale").get<double>(), j.at("seed").get<uint64_t>());
        return verify_values(j.at("values").get<std::map<std::string, double>>(), recomputed,
                             message);
    }
    throw ConfigError("unknown certificate kind '" + kind + "'");
}

std::string demo_config(const std::string& kind) {
    if (kind == "axioms")
        return "kind = \"axioms\"\nseed = 1\noutput_dir = \"out/axioms\"\n\n[parameters]\nmap = "
               "\"kp\"\ndim_in = 2\ndim_out = 2\nsamples = 10000\n";
    if (kind == "twisted_norm")
        return "kind = \"twisted_norm\"\nseed = 1\noutput_dir = \"out/twisted\"\n\n[parameters]\n"
               "map = \"kp\"\ndim_in = 2\ndim_out = 2\nsamples = 200\nsplit_depth = 2\n";
    if (kind == "ext_algebra")
        return "kind = \"ext_algebra\"\nseed = 1\noutput_dir = \"out/ext\"\n\n[parameters]\ntrials "
               "= 10\ndim_max = 8\npairs = 20\n";
    if (kind == "enflo_growth")
        return "kind = \"enflo_growth\"\nseed = 1\noutput_dir = \"out/enflo\"\n\n[parameters]\n"
               "k_max = 3\nconfigs = 48\nrefine_steps = 40\nupper_samples = 160\nupper_iterations "
               "= 600\nincrease_configs = 10000\n";
    if (kind == "grouprep_roundtrip")
        return "kind = \"grouprep_roundtrip\"\nseed = 1\noutput_dir = \"out/grouprep\"\n\n"
               "[parameters]\ngroup = \"z4\"\nsamples = 40\nkp_scale = 1.0\n";
    throw ConfigError("unknown demo kind '" + kind + "'");
}

} // namespace twistlab
