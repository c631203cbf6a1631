#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "semi/errors.hpp"
#include "semi/util.hpp"

namespace semi {

/* Truncated matrix representation of the eps-scaled CCR algebra on the
   bosonic Fock space over C^d. Each mode is cut at occupation n_max, so the
   basis is the set of occupation multi-indices (n_1,...,n_d) with
   0 <= n_j <= n_max, ordered lexicographically with mode 0 slowest.
   Ladder action per mode: a|n> = sqrt(eps*n)|n-1>. */
struct FockSpec {
    int modes;   // d = dim_C of the one-particle space
    int n_max;   // per-mode occupation cutoff
    double eps;  // semiclassical parameter, > 0

    FockSpec(int d, int nmax, double epsilon);

    Eigen::Index dim() const;  // (n_max+1)^modes
    Eigen::Index flat_index(const std::vector<int>& occ) const;
    std::vector<int> occupation(Eigen::Index flat) const;
    int occupation_of_mode(Eigen::Index flat, int mode) const;
    int total_occupation(Eigen::Index flat) const;
    bool same_space(const FockSpec& other) const;
};

// Coherent vectors carry their own truncation bookkeeping: deficit is the
// norm-squared mass lost to the cutoff, 1 - |v|^2.
struct CoherentVector {
    Eigen::VectorXcd v;
    double deficit = 0.0;
    bool truncation_warning = false;
};

Eigen::VectorXcd vacuum(const FockSpec& spec);

// Per-mode ladder operators; `creator` is exactly the conjugate transpose.
Eigen::MatrixXcd annihilator(const FockSpec& spec, int mode);
Eigen::MatrixXcd creator(const FockSpec& spec, int mode);

// a_eps(z) = sum_j conj(z_j) a_j and its adjoint (inner product antilinear
// in the first slot).
Eigen::MatrixXcd annihilator(const FockSpec& spec, const Eigen::VectorXcd& z);
Eigen::MatrixXcd creator(const FockSpec& spec, const Eigen::VectorXcd& z);

// N_eps = dGamma(1): diagonal with entry eps*(n_1+...+n_d).
Eigen::MatrixXcd number_operator(const FockSpec& spec);
Eigen::VectorXd number_diagonal(const FockSpec& spec);

/* Coherent state centred at z, truncated at n_max:
   tensor product over modes of
     e^{-|z_j|^2/(2 eps)} sum_n z_j^n / sqrt(eps^n n!) |n>.
   Entries are assembled in log-magnitude/phase form so occupations in the
   tens of thousands stay representable. */
CoherentVector coherent_vector(const FockSpec& spec, const Eigen::VectorXcd& z,
                               double deficit_tol = 1e-10);

// Exact overlap <z_eps|w_eps> = exp(-(|z|^2+|w|^2)/(2 eps) + <z|w>/eps);
// this is the convention consistent with the (pi*eps)^d resolution of the
// identity, so |<z|w>|^2 = exp(-|z-w|^2/eps).
Complex coherent_overlap(double eps, const Eigen::VectorXcd& z,
                         const Eigen::VectorXcd& w);

// Weyl operator W_eps(zeta) = exp(i (a(zeta)+a*(zeta))/sqrt(2)), computed
// through the eigendecomposition of its Hermitian generator so the result
// is unitary down to roundoff (cutoff leakage aside).
Eigen::MatrixXcd weyl_operator(const FockSpec& spec, const Eigen::VectorXcd& zeta);

// Exact matrix element <z_eps|W_eps(zeta)|w_eps> in the untruncated space.
Complex weyl_matrix_element(double eps, const Eigen::VectorXcd& z,
                            const Eigen::VectorXcd& w,
                            const Eigen::VectorXcd& zeta);

/* Max-entry defect of [a_j, a*_k] - eps delta_jk. With interior_only the
   check is restricted to matrix entries between basis states having every
   occupation <= n_max-1, where the algebra is exact; the full matrix shows
   the cutoff boundary term eps*(n_max+1). */
double ccr_defect(const FockSpec& spec, bool interior_only = true);
double ccr_defect_pair(const FockSpec& spec, int mode_j, int mode_k,
                       bool interior_only = true);

// max |A - A^*| entry; 0 for exactly Hermitian matrices.
double hermiticity_defect(const Eigen::MatrixXcd& A);

// P(X > n) for X ~ Poisson(lambda); the per-mode coherent truncation deficit.
double poisson_tail(double lambda, int n);

// Smallest cutoff whose coherent deficit at |z| = radius stays below tol.
int n_max_for_radius(double eps, double radius, double deficit_tol);

namespace detail {
// Guard for dense dim x dim allocations.
void check_dense_dim(Eigen::Index dim, const char* what);
} // namespace detail

} // namespace semi
