#include "semi/config.hpp"

#include <cmath>
#include <fstream>

namespace semi {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config: " + where + ": " + what);
}

double positive(const nlohmann::json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    const double v = j.at(key).get<double>();
    if (!(v > 0.0)) fail(key, "must be > 0");
    return v;
}

} // namespace

SymbolClassS ExperimentConfig::make_symbol() const {
    return SymbolClassS::make_radial(modes, radial_blocks, potential);
}

PhaseDensity ExperimentConfig::lattice_density() const {
    const double sigma = lattice_f_sigma;
    return [sigma](const Eigen::VectorXcd& z) {
        double q = 0.0;
        for (Eigen::Index l = 0; l < z.size(); ++l) q += z(l).real() * z(l).real();
        return std::exp(-q / (2.0 * sigma * sigma)) /
               std::pow(2.0 * M_PI * sigma * sigma, 0.5 * z.size());
    };
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    return from_json(j);
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.raw = j;
    try {
        if (!j.contains("model")) fail("model", "missing");
        const auto& model = j.at("model");
        cfg.model_name = model.value("name", std::string("custom"));
        cfg.modes = model.value("d", 1);
        if (cfg.modes < 1) fail("model.d", "must be >= 1");

        cfg.potential = PolySymbol(cfg.modes);
        if (cfg.model_name == "harmonic") {
            cfg.radial_blocks = {{1, 1.0}};
        } else {
            if (!model.contains("h0")) fail("model.h0", "missing for custom model");
            for (const auto& blk : model.at("h0")) {
                const int p = blk.at("p").get<int>();
                const double lambda = blk.at("lambda").get<double>();
                if (p < 1) fail("model.h0.p", "must be >= 1");
                cfg.radial_blocks.emplace_back(p, lambda);
            }
            if (model.contains("V")) {
                for (const auto& term : model.at("V")) {
                    std::vector<int> i = term.at("i").get<std::vector<int>>();
                    std::vector<int> jj = term.at("j").get<std::vector<int>>();
                    const double re = term.value("re", 0.0);
                    const double im = term.value("im", 0.0);
                    cfg.potential.add_term(std::move(i), std::move(jj),
                                           Complex(re, im));
                }
            }
        }

        cfg.beta = positive(j, "beta", 1.0);

        if (j.contains("eps_list")) {
            cfg.eps_list = j.at("eps_list").get<std::vector<double>>();
        } else if (j.contains("eps_sweep")) {
            const int k_min = j.at("eps_sweep").value("k_min", 2);
            const int k_max = j.at("eps_sweep").value("k_max", 8);
            if (k_min > k_max) fail("eps_sweep", "k_min > k_max");
            for (int k = k_min; k <= k_max; ++k)
                cfg.eps_list.push_back(std::pow(2.0, -k));
        } else {
            for (int k = 2; k <= 8; ++k) cfg.eps_list.push_back(std::pow(2.0, -k));
        }
        if (cfg.eps_list.empty()) fail("eps_list", "empty");
        for (double e : cfg.eps_list)
            if (!(e > 0.0)) fail("eps_list", "entries must be > 0");
        for (size_t i = 1; i < cfg.eps_list.size(); ++i)
            if (!(cfg.eps_list[i] < cfg.eps_list[i - 1]))
                fail("eps_list", "must be strictly decreasing");

        if (j.contains("lattice")) {
            const auto& lat = j.at("lattice");
            cfg.lattice_delta = lat.value("delta", 1.0);
            if (cfg.lattice_delta < 0.0) fail("lattice.delta", "must be >= 0");
            cfg.lattice_M_list = lat.value("M_list", std::vector<int>{1, 2, 3});
            for (int M : cfg.lattice_M_list)
                if (M < 0) fail("lattice.M_list", "entries must be >= 0");
            if (lat.contains("f")) {
                const auto& f = lat.at("f");
                if (f.value("kind", std::string("gaussian")) != "gaussian")
                    fail("lattice.f.kind", "only 'gaussian' is supported");
                cfg.lattice_f_sigma = positive(f, "sigma", 1.0);
            }
        } else {
            cfg.lattice_M_list = {1, 2, 3};
        }

        if (j.contains("gamma_upper"))
            cfg.gamma_upper_sigma2 = positive(j.at("gamma_upper"), "sigma2", 1.0);
        cfg.beta_prime = positive(j, "beta_prime", 2.0);

        if (j.contains("tolerances")) {
            const auto& tol = j.at("tolerances");
            cfg.options.top_weight_tol = positive(tol, "top_weight", 1e-14);
            cfg.options.deficit_tol = positive(tol, "deficit", 1e-10);
            cfg.options.quad_rel_tol = positive(tol, "quad_rel", 1e-9);
        }
        cfg.options.assumption_A_kmax = j.value("assumption_A_kmax", 0);
        if (cfg.options.assumption_A_kmax < 0)
            fail("assumption_A_kmax", "must be >= 0");

        cfg.seed = j.value("seed", std::uint64_t(12345));
        cfg.output_dir = j.value("output_dir", std::string("out"));
    } catch (const ConfigError&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    // Construction validates the class-S requirements early.
    try {
        cfg.make_symbol();
    } catch (const ClassSViolation& e) {
        throw ConfigError(std::string("config: model: ") + e.what());
    }
    return cfg;
}

nlohmann::json ExperimentConfig::canonical() const {
    nlohmann::json j;
    j["model"]["name"] = model_name;
    j["model"]["d"] = modes;
    nlohmann::json h0 = nlohmann::json::array();
    for (const auto& [p, lambda] : radial_blocks)
        h0.push_back({{"p", p}, {"lambda", lambda}});
    j["model"]["h0"] = h0;
    nlohmann::json V = nlohmann::json::array();
    for (const auto& [key, c] : potential.terms())
        V.push_back({{"i", key.first},
                     {"j", key.second},
                     {"re", c.real()},
                     {"im", c.imag()}});
    j["model"]["V"] = V;
    j["beta"] = beta;
    j["eps_list"] = eps_list;
    j["lattice"] = {{"delta", lattice_delta},
                    {"M_list", lattice_M_list},
                    {"f", {{"kind", "gaussian"}, {"sigma", lattice_f_sigma}}}};
    j["gamma_upper"] = {{"sigma2", gamma_upper_sigma2}};
    j["beta_prime"] = beta_prime;
    j["tolerances"] = {{"top_weight", options.top_weight_tol},
                       {"deficit", options.deficit_tol},
                       {"quad_rel", options.quad_rel_tol}};
    j["assumption_A_kmax"] = options.assumption_A_kmax;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    return j;
}

} // namespace semi
