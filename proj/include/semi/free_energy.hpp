#pragma once

#include <optional>
#include <vector>

#include "semi/states.hpp"
#include "semi/symbols.hpp"

namespace semi {

/* Free-energy functional evaluation. `value` is the direct form (energy
   minus entropy over beta), `relative_value` the S(.||Gibbs)/beta form, and
   the two are linked by the computed log-partition constant; the residual of
   that identity is kept so every evaluation carries its own ledger. */
struct FreeEnergyReport {
    enum class Kind { Boltzmann, VonNeumann, Wehrl };
    Kind kind = Kind::Boltzmann;
    double value = 0.0;
    double relative_value = 0.0;
    double beta = 1.0;
    std::optional<double> eps;
    bool renormalized = false;  // true when (d/beta) log(pi eps) was subtracted
    double log_partition = 0.0;
    double identity_defect = 0.0;
};

// F_B(mu) = int h dmu - S_B(mu)/beta; identity F_B = S_B(mu||gamma)/beta - log Z0/beta.
FreeEnergyReport classical_free_energy(const ClassicalDensity& mu,
                                       const PhaseDensity& h, double beta);

// F_vN(rho) = Tr(H rho) - S_vN(rho)/beta against the Gibbs state of H.
FreeEnergyReport vn_free_energy(const DensityMatrix& rho,
                                const SpectralHamiltonian& H, double beta);

// F_W(rho) assembled exactly as the upper-symbol decomposition:
// int h^up f dz/(pi eps)^d - S_B(phi)/beta + (d/beta) log(pi eps),
// with relative form S_B(phi || gamma_{beta,eps})/beta.
FreeEnergyReport wehrl_free_energy(const DensityMatrix& rho, const SymbolClassS& h,
                                   double beta, const QuadratureGrid& grid,
                                   double deficit_tol = 1e-8);

// Trial state rho(f) = int |z><z| f(z) dz over the density's grid; an
// under-resolved or clipped density surfaces as a unit-trace failure.
DensityMatrix recovery_sequence(const ClassicalDensity& f, const FockSpec& spec);

struct ExperimentOptions {
    double top_weight_tol = 1e-14;
    double deficit_tol = 1e-10;
    double quad_rel_tol = 1e-9;
    int assumption_A_kmax = 0;  // 0 disables the Assumption (A) sweep
    int n_max_cap = 400000;
    int dense_dim_cap = 3000;
};

// Cutoff certified for both the Gibbs weight rule and the coherent deficit
// at the given phase-space radius (doubling-validated by callers/tests).
FockSpec certified_spec(const SymbolClassS& h, double beta, double eps,
                        double radius, const ExperimentOptions& opts);

// Spectral Hamiltonian for h at the given truncation (diagonal fast path
// when the symbol is number-diagonal).
SpectralHamiltonian build_hamiltonian(const SymbolClassS& h, const FockSpec& spec);

struct ClassicalTargets {
    double Z0 = 0.0;          // classical partition function
    double S_B = 0.0;         // Boltzmann entropy of gamma_beta
    double F_B = 0.0;         // -log Z0 / beta
    double mean_energy = 0.0; // int h dgamma_beta
    QuadratureGrid grid;      // certified grid the values were computed on
};
ClassicalTargets classical_targets(const SymbolClassS& h, double beta,
                                   const ExperimentOptions& opts);

struct ConvergenceRow {
    double eps = 0.0;
    int n_max = 0;
    double Z_scaled = 0.0;      // (pi eps)^d Z_{beta,eps}
    double S_vN_renorm = 0.0;   // S_vN + d log(pi eps)
    double S_W_renorm = 0.0;    // S_W + d log(pi eps)
    double S_B_target = 0.0;
    double err_vN = 0.0;
    double err_W = 0.0;
    double F_vN_renorm = 0.0;   // F_vN - (d/beta) log(pi eps)
    double F_W_renorm = 0.0;
    double F_B_target = 0.0;
    double wehrl_identity_defect = 0.0;  // eq-ledger residual for this row
};

struct EntropyConvergenceResult {
    std::vector<ConvergenceRow> rows;
    ClassicalTargets targets;
    // assumption-(A) norms per k: one value per eps in the sweep
    std::map<int, std::vector<double>> assumption_A;
};

EntropyConvergenceResult entropy_convergence_experiment(
    const SymbolClassS& h, double beta, const std::vector<double>& eps_list,
    const ExperimentOptions& opts = {});

// S_vN(Gamma) - log Z >= beta int h^up exp(-beta h) dz / ((pi eps)^d Z).
struct JensenCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;  // lhs - rhs, expected >= 0 and -> 0 with eps
};
JensenCheck jensen_lower_bound_check(const SymbolClassS& h, double beta, double eps,
                                     const ExperimentOptions& opts = {});

struct GammaUpperRow {
    double eps = 0.0;
    int n_max = 0;              // -1 when only the convolution path ran
    double S_W_renorm = 0.0;    // S_W(rho_eps(f)) + d log(pi eps)
    double S_B_f = 0.0;
    double gap = 0.0;           // S_W_renorm - S_B_f, expected >= 0, shrinking
    double husimi_conv_err = 0.0;  // max |matrix-path Husimi - convolution|
    double energy = 0.0;        // Tr(H rho_eps(f))
    double energy_target = 0.0; // int h f dz
    bool matrix_path = false;
};

struct GammaUpperResult {
    std::vector<GammaUpperRow> rows;
    double S_B_f = 0.0;
};

/* Recovery-sequence sweep for a Gaussian density of complex variance sigma2
   centred at the origin: Husimi(rho_eps(f)) is the eps-Gaussian convolution
   of f (closed form available), checked pointwise where the assembled matrix
   is affordable and through convolution quadrature everywhere. */
GammaUpperResult gamma_upper_experiment(double sigma2, int modes,
                                        const std::vector<double>& eps_list,
                                        const SymbolClassS& h,
                                        const ExperimentOptions& opts = {});

struct GammaLowerRow {
    double eps = 0.0;
    double wehrl_relative_fe = 0.0;  // F~_W,beta,eps of the probe family
};

struct GammaLowerResult {
    std::vector<GammaLowerRow> rows;
    double classical_target = 0.0;  // F~_B,beta of the Wigner limit
};

// Probe family Gamma_{beta',eps} -> gamma_{beta'}; the relative Wehrl free
// energies must stay above (up to tolerance) and approach the classical
// relative free energy of the limit.
GammaLowerResult gamma_lower_bound_report(const SymbolClassS& h, double beta,
                                          double beta_prime,
                                          const std::vector<double>& eps_list,
                                          const ExperimentOptions& opts = {});

} // namespace semi
