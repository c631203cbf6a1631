#pragma once

#include <Eigen/Dense>
#include <optional>

#include "semi/fock.hpp"
#include "semi/quadrature.hpp"

namespace semi {

/* Quantum state in spectral form: probabilities (eigenvalues, clamped to
   [0,1] and renormalised to unit trace) together with the eigenbasis. A
   missing basis means the state is diagonal in the Fock basis; a dim x rank
   basis keeps low-rank states (coherent mixtures, lattice states) cheap. */
class DensityMatrix {
public:
    static DensityMatrix from_matrix(const FockSpec& spec,
                                     const Eigen::MatrixXcd& rho,
                                     double trace_tol = 1e-10);
    static DensityMatrix diagonal(const FockSpec& spec, const Eigen::VectorXd& probs);
    static DensityMatrix from_spectrum(const FockSpec& spec, Eigen::VectorXd probs,
                                       Eigen::MatrixXcd basis);
    static DensityMatrix pure(const FockSpec& spec, const Eigen::VectorXcd& psi);

    const FockSpec& spec() const { return spec_; }
    const Eigen::VectorXd& probs() const { return probs_; }
    bool fock_diagonal() const { return !basis_.has_value(); }
    const Eigen::MatrixXcd& basis() const;
    Eigen::Index rank() const { return probs_.size(); }
    Eigen::MatrixXcd matrix() const;  // dense materialisation, size-guarded

    // Probability mass on basis states with some occupation > frac * n_max.
    double occupation_tail_mass(double frac) const;

private:
    DensityMatrix(FockSpec spec, Eigen::VectorXd probs,
                  std::optional<Eigen::MatrixXcd> basis);
    FockSpec spec_;
    Eigen::VectorXd probs_;
    std::optional<Eigen::MatrixXcd> basis_;
};

/* Hamiltonian in spectral form; diagonal Fock-basis Hamiltonians (every
   number-diagonal Wick quantization) skip the eigensolver entirely. */
struct SpectralHamiltonian {
    FockSpec spec;
    Eigen::VectorXd energies;
    std::optional<Eigen::MatrixXcd> vectors;  // nullopt: Fock basis

    static SpectralHamiltonian dense(const FockSpec& spec, const Eigen::MatrixXcd& H);
    static SpectralHamiltonian diagonal(const FockSpec& spec,
                                        const Eigen::VectorXd& energies);
};

struct GibbsResult {
    DensityMatrix state;
    double Z;       // trace of exp(-beta H) on the truncated space
    double log_Z;
    double top_sector_weight;
};

/* Gibbs state from spectral data (never by series expansion). Fails with a
   suggested larger cutoff when the top occupation sector still carries more
   than top_weight_tol of the state. */
GibbsResult gibbs_state(const SpectralHamiltonian& H, double beta,
                        double top_weight_tol = 1e-10);
GibbsResult gibbs_state(const FockSpec& spec, const Eigen::MatrixXcd& H, double beta,
                        double top_weight_tol = 1e-10);

double von_neumann_entropy(const DensityMatrix& rho);

// Tr(H rho) through the spectral data of H.
double expectation_value(const DensityMatrix& rho, const SpectralHamiltonian& H);

// Tr rho (log rho - log sigma); +infinity when rho has support where sigma
// vanishes below the eigenvalue floor.
double relative_entropy_vn(const DensityMatrix& rho, const DensityMatrix& sigma);

struct HusimiField {
    QuadratureGrid grid;
    Eigen::VectorXd values;  // f_eps(z_k) = <z|rho|z> in [0, 1]
    double eps = 1.0;
    double normalization_check = 0.0;  // quadrature of values/(pi eps)^d
};

HusimiField husimi(const DensityMatrix& rho, const QuadratureGrid& grid,
                   double deficit_tol = 1e-8);

// S_W = -int f log f dz/(pi eps)^d.
double wehrl_entropy(const HusimiField& field);

double wehrl_relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma,
                              const QuadratureGrid& grid);
double wehrl_relative_entropy(const HusimiField& f_rho, const HusimiField& f_sigma);

// g_{beta,eps}(z) = <z|exp(-beta H)|z>.
double coherent_expectation(const SpectralHamiltonian& H, double beta,
                            const Eigen::VectorXcd& z, double deficit_tol = 1e-8);

// Tr(rho W_eps(zeta)); dense Weyl matrix, so desk-scale dims only.
Complex characteristic_function(const DensityMatrix& rho, const Eigen::VectorXcd& zeta);

/* One-time calibration of the constant kappa in the classical characteristic
   target exp(i kappa Re<zeta|z>): the phase of <w|W(zeta)|w> is exactly
   kappa * Re<zeta|w> for the artifact's Weyl normalisation, measured here on
   an actual truncated operator. */
double calibrate_characteristic_kappa();

// ||(N+eps)^{k/2} exp(-beta H) (N+eps)^{k/2}||.
double assumption_A_norm(const SpectralHamiltonian& H, double beta, int k);

} // namespace semi
