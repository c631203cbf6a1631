#pragma once

#include <memory>
#include <vector>

#include "semi/states.hpp"
#include "semi/symbols.hpp"

namespace semi {

/* Dyadic lattice: vertices of side-2^{-M} cubes filling the cube of side 2M,
   taken on the real subspace of C^d (coordinates k 2^{-M}, |k| <= M 2^M).
   Enumeration is nested: the points of Lambda_{M-1} appear, in their own
   enumeration, as a prefix; new points follow in lexicographic order. */
struct DyadicLattice {
    int M = 0;
    int modes = 1;
    std::vector<Eigen::VectorXcd> points;

    Eigen::Index size() const { return static_cast<Eigen::Index>(points.size()); }
    double spacing() const { return std::pow(2.0, -M); }
    double max_norm() const;
};

// Expected cardinality (2 M 2^M + 1)^d; the enumeration itself is the ground
// truth, tests reconcile the two.
Eigen::Index dyadic_lattice_count(int M, int d);

DyadicLattice build_lattice(int M, int d, Eigen::Index size_cap = 200000);

// max_{i != j} |<z_i|z_j>|: the coherent Gram off-diagonal before any
// orthonormalisation. Strictly decreasing in eps at fixed lattice.
double coherent_gram_defect(const DyadicLattice& lattice, double eps);

// Near-dependence figure |Lambda_M|^2 exp(-2^{-2M-1}/eps) bounding the
// total off-diagonal coherent overlap mass.
double lattice_admissibility_defect(int M, int d, double eps);
// Largest eps passing the threshold at this lattice size.
double max_admissible_eps(int M, int d, double threshold);

/* Orthonormal system built from the lattice coherent states by modified
   Gram-Schmidt with one reorthogonalisation pass, in enumeration order.
   gram_norms keeps the residual norm of every step (the appendix's Gram
   normalisation); near-dependence below dependence_tol is an error. */
struct CoherentONS {
    FockSpec spec;
    Eigen::MatrixXcd vectors;    // dim x m, orthonormal columns
    Eigen::MatrixXcd coeffs;     // m x m lower-triangular over coherent states
    Eigen::VectorXd gram_norms;
    double max_gram_defect = 0.0;  // max |E^*E - I| entry after the build
    double max_deficit = 0.0;      // worst coherent truncation deficit used
};

CoherentONS gram_schmidt_coherent(const DyadicLattice& lattice, const FockSpec& spec,
                                  double deficit_tol = 1e-10,
                                  double dependence_tol = 1e-6);

/* rho_{M,eps}(mu) = sum_m f(z_m)/(2^{dM} N_M) |e(z_m)><e(z_m)| with
   N_M = sum f(z_m)/2^{dM}. Weights sum to one by construction. */
struct LatticeState {
    std::shared_ptr<const CoherentONS> ons;
    DyadicLattice lattice;
    int M = 0;
    double eps = 1.0;
    Eigen::VectorXd f_values;
    Eigen::VectorXd weights;
    double N_M = 0.0;

    DensityMatrix state() const;
};

LatticeState lattice_state(const PhaseDensity& f, const DyadicLattice& lattice,
                           const FockSpec& spec,
                           double admissibility_threshold = 1e-8,
                           double deficit_tol = 1e-10,
                           double dependence_tol = 1e-6);

struct LatticeEntropy {
    double spectral = 0.0;      // eigenvalues of the assembled state
    double formula = 0.0;       // the closed lattice formula
    double renormalized = 0.0;  // formula - d M log 2
};
LatticeEntropy lattice_entropy(const LatticeState& state);

// Tr(rho W_eps(zeta)) through the Gram-Schmidt coefficients and the exact
// coherent Weyl matrix elements; no dense operator is formed.
Complex lattice_characteristic(const LatticeState& state,
                               const Eigen::VectorXcd& zeta);

struct DivergenceRow {
    int M = 0;
    double eps = 0.0;
    int n_max = 0;
    double S_vN = 0.0;
    double renormalized = 0.0;  // S_vN - d M log 2
    double S_rel = 0.0;         // S_vN(rho || Gamma_{beta,eps})
    double trace_N = 0.0;       // Tr(rho N_eps)
    double admissibility = 0.0;
};

struct DivergenceReport {
    std::vector<DivergenceRow> rows;
    std::vector<int> skipped_M;     // truncation-infeasible levels
    double slope = 0.0;             // least-squares slope of S_rel in M
    double intercept = 0.0;
    double slope_target = 0.0;      // d (1+delta) log 2
    double classical_offset = 0.0;  // lattice-limit constant, see below
    double S_B_f = 0.0;             // -int f log f dx on the lattice subspace
};

struct DivergenceOptions {
    double beta = 1.0;
    double deficit_tol = 1e-12;
    double dependence_tol = 1e-6;
    Eigen::Index vector_budget = 30000000;  // |Lambda| * dim cap
    int n_max_cap = 400000;
};

/* Appendix divergence experiment: eps(M) = 2^{-(2+delta)M}/pi, relative
   entropy against the Gibbs state of h (d = 1, number-diagonal symbols).
   The classical offset is the constant the rows approach after removing the
   fitted slope:
       int f log f dx + beta int h f dx + log Z_{beta,0},
   where the f-integrals run over the real subspace carrying the lattice and
   Z_{beta,0} is the full phase-space partition function. */
DivergenceReport divergence_experiment(const PhaseDensity& f, double delta,
                                       const std::vector<int>& M_list,
                                       const SymbolClassS& h,
                                       const DivergenceOptions& opts = {});

// log Tr exp(-beta H_eps) by scalar summation over the untruncated diagonal
// spectrum (d = 1, number-diagonal symbols).
double log_partition_scalar(const SymbolClassS& h, double beta, double eps);

} // namespace semi
