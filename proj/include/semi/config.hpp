#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semi/free_energy.hpp"
#include "semi/symbols.hpp"

#include <json.hpp>

namespace semi {

/* Experiment configuration, read from a JSON file. Schema (all floats are
   plain decimals):

   {
     "model": {
       "name": "harmonic" | "custom",
       "d": 1,
       "h0": [{"p": 1, "lambda": 1.0}, ...],            // radial blocks
       "V":  [{"i": [..], "j": [..], "re": .., "im": ..}, ...]
     },
     "beta": 1.0,
     "eps_sweep": {"k_min": 2, "k_max": 8},             // eps = 2^-k
     "eps_list": [0.25, 0.125, ...],                    // alternative
     "lattice": {"delta": 1.0, "M_list": [1,2,3],
                 "f": {"kind": "gaussian", "sigma": 1.0}},
     "gamma_upper": {"sigma2": 1.0},
     "beta_prime": 2.0,                                 // gamma-lower probe
     "tolerances": {"top_weight": 1e-14, "deficit": 1e-10,
                    "quad_rel": 1e-9},
     "assumption_A_kmax": 0,
     "seed": 12345,
     "output_dir": "out"
   }
*/
struct ExperimentConfig {
    nlohmann::json raw;

    std::string model_name = "harmonic";
    int modes = 1;
    std::vector<std::pair<int, double>> radial_blocks;
    PolySymbol potential{1};

    double beta = 1.0;
    std::vector<double> eps_list;

    double lattice_delta = 1.0;
    std::vector<int> lattice_M_list;
    double lattice_f_sigma = 1.0;

    double gamma_upper_sigma2 = 1.0;
    double beta_prime = 2.0;

    ExperimentOptions options;
    std::uint64_t seed = 12345;
    std::string output_dir = "out";

    SymbolClassS make_symbol() const;
    PhaseDensity lattice_density() const;  // Gaussian on the real subspace

    static ExperimentConfig load(const std::string& path);
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json canonical() const;  // round-trips through from_json
};

} // namespace semi
