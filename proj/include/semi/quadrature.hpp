#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "semi/errors.hpp"
#include "semi/util.hpp"

namespace semi {

/* Quadrature over the phase space C^d identified with R^{2d}. Two tensor
   schemes: Gauss-Hermite (nodes of exp(-rate*x^2) per real axis, weights
   carried in Lebesgue form so sum w_k g(z_k) approximates the plain
   integral of a decaying g) and a uniform midpoint grid restricted to the
   Euclidean ball of the given radius. */
enum class Scheme { GaussHermiteTensor, UniformTensor };

struct QuadratureGrid {
    int modes = 1;
    Scheme scheme = Scheme::GaussHermiteTensor;
    double radius = 0.0;     // max node norm
    int level = 0;           // refinement index this grid was built at
    double rate = 1.0;       // GH Gaussian rate
    int points_per_axis = 0;
    Eigen::MatrixXcd nodes;  // (#nodes) x modes
    Eigen::VectorXd weights; // Lebesgue weights on R^{2d}

    Eigen::Index size() const { return weights.size(); }
};

using PhaseFunction = std::function<Complex(const Eigen::VectorXcd&)>;
using PhaseDensity = std::function<double(const Eigen::VectorXcd&)>;

QuadratureGrid gauss_hermite_grid(int modes, int points_per_axis, double rate);
QuadratureGrid uniform_ball_grid(int modes, double radius, int points_per_axis);

// Refinement policy shared by all certified integrals.
struct GridPolicy {
    Scheme scheme = Scheme::GaussHermiteTensor;
    double rate = 1.0;        // GH axis rate
    int initial_points = 16;  // per axis at level 0
    double radius = 6.0;      // uniform-scheme ball radius at level 0
    int max_level = 6;
    double rel_tol = 1e-9;
    int max_points_per_axis = 256;

    QuadratureGrid build(int modes, int level) const;
};

Complex integrate(const PhaseFunction& g, const QuadratureGrid& grid);
double integrate(const Eigen::VectorXd& node_values, const QuadratureGrid& grid);
Complex integrate(const Eigen::VectorXcd& node_values, const QuadratureGrid& grid);

struct RefineResult {
    Complex value{0.0, 0.0};
    QuadratureGrid grid;                 // final grid
    std::vector<Complex> history;        // value per level
};

/* Doubles radius and node density until two consecutive levels agree to
   rel_tol (relative when the value is O(1) or larger). Throws
   ConvergenceError when the budget is exhausted or values blow up. */
RefineResult refine_until(const PhaseFunction& g, int modes,
                          const GridPolicy& policy);
RefineResult refine_until(const PhaseFunction& g, int modes,
                          const GridPolicy& policy, double rel_tol);

/* Phase-space probability density sampled on a grid. `values` are already
   normalised; `normalization` keeps the raw integral of the function handed
   in. */
struct ClassicalDensity {
    QuadratureGrid grid;
    Eigen::VectorXd values;  // normalised density at the nodes
    double normalization = 1.0;
    PhaseDensity density;    // normalised callable
};

ClassicalDensity make_density(const PhaseDensity& raw_f, const QuadratureGrid& grid);

// Z_{beta,0} = int exp(-beta h) dz, certified by refine_until.
RefineResult classical_partition(const PhaseDensity& h, double beta, int modes,
                                 const GridPolicy& policy);

// Normalised Gibbs density exp(-beta h)/Z on the given grid.
ClassicalDensity classical_gibbs(const PhaseDensity& h, double beta,
                                 const QuadratureGrid& grid);

// -int f log f dz with 0 log 0 = 0; rejects densities negative beyond -1e-12.
double boltzmann_entropy(const ClassicalDensity& mu);

// KL divergence int log(dmu/dnu) dmu on a shared grid; +infinity when mu has
// mass where nu vanishes below the floor.
double relative_entropy_classical(const ClassicalDensity& mu,
                                  const ClassicalDensity& nu);

// int exp(i kappa Re<zeta|z>) dmu(z).
Complex classical_characteristic(const ClassicalDensity& mu,
                                 const Eigen::VectorXcd& zeta, double kappa);

// int g dmu for a scalar observable g.
double expectation(const ClassicalDensity& mu, const PhaseDensity& g);

} // namespace semi
