#include "semi/invariants.hpp"

#include <cmath>
#include <random>

#include "semi/free_energy.hpp"
#include "semi/lattice.hpp"
#include "semi/states.hpp"
#include "semi/symbols.hpp"

namespace semi {

namespace {

using Rng = std::mt19937_64;

Eigen::VectorXcd random_phase_point(Rng& rng, int d, double radius) {
    std::uniform_real_distribution<double> u(-radius, radius);
    Eigen::VectorXcd z(d);
    for (int l = 0; l < d; ++l) z(l) = Complex(u(rng), u(rng));
    return z;
}

// Random full-rank state supported on occupations <= sub_max, embedded in the
// larger truncated space so every Husimi evaluation is exact.
DensityMatrix random_state(Rng& rng, const FockSpec& spec, int sub_max) {
    std::normal_distribution<double> g(0.0, 1.0);
    const FockSpec sub(spec.modes, sub_max, spec.eps);
    const Eigen::Index sdim = sub.dim();
    Eigen::MatrixXcd G(sdim, sdim);
    for (Eigen::Index r = 0; r < sdim; ++r)
        for (Eigen::Index c = 0; c < sdim; ++c) G(r, c) = Complex(g(rng), g(rng));
    Eigen::MatrixXcd rho_small = G * G.adjoint();
    rho_small /= rho_small.trace().real();

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(spec.dim(), spec.dim());
    for (Eigen::Index r = 0; r < sdim; ++r)
        for (Eigen::Index c = 0; c < sdim; ++c)
            rho(spec.flat_index(sub.occupation(r)),
                spec.flat_index(sub.occupation(c))) = rho_small(r, c);
    return DensityMatrix::from_matrix(spec, rho);
}

InvariantCheck upper_bounded(const std::string& name, double value, double bound) {
    return InvariantCheck{name, value, bound, value <= bound};
}

} // namespace

std::vector<InvariantCheck> run_invariant_suite(std::uint64_t seed) {
    std::vector<InvariantCheck> checks;
    Rng rng(seed);

    // --- CCR algebra on interior blocks -------------------------------
    {
        const FockSpec s1(1, 12, 0.3);
        checks.push_back(upper_bounded("ccr_interior_d1", ccr_defect(s1), 1e-12));
        const FockSpec s2(2, 5, 0.7);
        checks.push_back(upper_bounded("ccr_interior_d2", ccr_defect(s2), 1e-12));
        checks.push_back(upper_bounded(
            "creator_is_adjoint",
            (creator(s1, 0) - annihilator(s1, 0).adjoint()).cwiseAbs().maxCoeff(),
            0.0));
    }

    // --- Resolution of identity on low sectors ------------------------
    {
        const FockSpec spec(1, 16, 0.5);
        const QuadratureGrid grid = gauss_hermite_grid(1, 48, 1.0 / spec.eps);
        const Eigen::MatrixXcd A = anti_wick_quantize(
            [](const Eigen::VectorXcd&) { return Complex(1.0, 0.0); }, spec, grid);
        const Eigen::Index low = 9;  // sectors n <= n_max/2
        const Eigen::MatrixXcd block = A.topLeftCorner(low, low) -
                                       Eigen::MatrixXcd::Identity(low, low);
        checks.push_back(upper_bounded("resolution_of_identity",
                                       block.cwiseAbs().maxCoeff(), 1e-8));
    }

    // --- Coherent-state structure --------------------------------------
    {
        const FockSpec spec(1, 60, 0.5);
        double worst_eigen = 0.0, worst_overlap = 0.0;
        const Eigen::MatrixXcd a0 = annihilator(spec, 0);
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::VectorXcd z = random_phase_point(rng, 1, 1.5);
            const Eigen::VectorXcd w = random_phase_point(rng, 1, 1.5);
            const CoherentVector cw = coherent_vector(spec, w);
            const Eigen::MatrixXcd az = annihilator(spec, z);
            worst_eigen = std::max(
                worst_eigen, (az * cw.v - z.dot(w) * cw.v).norm());
            const CoherentVector cz = coherent_vector(spec, z);
            worst_overlap = std::max(
                worst_overlap,
                std::abs(cz.v.dot(cw.v) - coherent_overlap(spec.eps, z, w)));
        }
        checks.push_back(upper_bounded("eigenstate_property", worst_eigen, 1e-8));
        checks.push_back(upper_bounded("coherent_overlap_formula", worst_overlap, 1e-10));

        // Weyl displacement of the vacuum reproduces the coherent state.
        Eigen::VectorXcd z(1);
        z(0) = Complex(0.7, -0.4);
        const Eigen::VectorXcd zeta = std::sqrt(2.0) * z / (Complex(0, 1) * spec.eps);
        const Eigen::VectorXcd displaced =
            weyl_operator(spec, zeta) * vacuum(spec);
        checks.push_back(upper_bounded(
            "weyl_displaced_vacuum",
            (displaced - coherent_vector(spec, z).v).norm(), 1e-8));
    }

    // --- Entropy orderings on random states ----------------------------
    {
        const FockSpec spec(1, 14, 0.4);
        const QuadratureGrid grid = gauss_hermite_grid(1, 64, 0.5);
        double min_dominance = std::numeric_limits<double>::infinity();
        double min_rel_order = std::numeric_limits<double>::infinity();
        double min_wehrl_rel = std::numeric_limits<double>::infinity();
        double worst_norm = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const DensityMatrix rho = random_state(rng, spec, 8);
            const DensityMatrix sig = random_state(rng, spec, 8);
            const HusimiField frho = husimi(rho, grid);
            const HusimiField fsig = husimi(sig, grid);
            const double svn = von_neumann_entropy(rho);
            const double sw = wehrl_entropy(frho);
            min_dominance = std::min(min_dominance, sw - svn);
            const double rel_vn = relative_entropy_vn(rho, sig);
            const double rel_w = wehrl_relative_entropy(frho, fsig);
            min_rel_order = std::min(min_rel_order, rel_vn - rel_w);
            min_wehrl_rel = std::min(min_wehrl_rel, rel_w);
            worst_norm = std::max(worst_norm,
                                  std::abs(frho.normalization_check - 1.0));
        }
        checks.push_back(upper_bounded("wehrl_dominance_margin", -min_dominance,
                                       -1e-10));
        checks.push_back(upper_bounded("relative_entropy_order", -min_rel_order,
                                       1e-10));
        checks.push_back(upper_bounded("wehrl_relative_nonneg", -min_wehrl_rel,
                                       1e-10));
        checks.push_back(upper_bounded("husimi_normalization", worst_norm, 1e-6));
    }

    // --- Gibbs-state structure (harmonic instance) ---------------------
    {
        const SymbolClassS h = SymbolClassS::make_radial(1, {{1, 1.0}}, PolySymbol(1));
        const double beta = 1.0;
        ExperimentOptions opts;

        // Partition squeeze and Husimi log-bound across a sweep.
        double worst_squeeze = -std::numeric_limits<double>::infinity();
        double worst_logbound = -std::numeric_limits<double>::infinity();
        double worst_monotone = 0.0;
        for (double eps : {0.25, 0.125, 0.0625}) {
            const FockSpec spec = certified_spec(h, beta, eps, 0.0, opts);
            const SpectralHamiltonian H = build_hamiltonian(h, spec);
            const GibbsResult gibbs = gibbs_state(H, beta, opts.top_weight_tol);
            const double log_Zs = gibbs.log_Z + std::log(M_PI * eps);

            const ClassicalTargets tgt = classical_targets(h, beta, opts);
            const PolySymbol hup = upper_symbol(h.symbol()).evaluate(eps);
            const RefineResult Zup = classical_partition(
                [&hup](const Eigen::VectorXcd& z) { return hup.eval(z).real(); },
                beta, 1, default_policy_for(h, beta));
            // Z_lower <= (pi eps)^d Z <= Z_upper.
            worst_squeeze = std::max(worst_squeeze,
                                     tgt.Z0 - std::exp(log_Zs) - 1e-9);
            worst_squeeze = std::max(worst_squeeze,
                                     std::exp(log_Zs) - Zup.value.real() - 1e-9);

            // -log(f/(pi eps)^d) <= beta h + log((pi eps)^d Z) where f > floor.
            const QuadratureGrid grid = gauss_hermite_grid(1, 32, beta);
            const HusimiField field = husimi(gibbs.state, grid);
            // Check where the computed density sits safely above the
            // cutoff's clipped-tail floor; below it the truncated Poisson
            // sums no longer resolve the true Husimi value.
            const PhaseDensity hd = h.evaluator();
            for (Eigen::Index k = 0; k < grid.size(); ++k) {
                const double phi = field.values(k) / (M_PI * eps);
                if (phi < 1e-8) continue;
                Eigen::VectorXcd z = grid.nodes.row(k);
                const double slack = beta * hd(z) + log_Zs + std::log(phi);
                worst_logbound = std::max(worst_logbound, -slack);
            }

            // Monotone-limit identity: Tr(H e^{-beta H}) equals the
            // phase-space average of h^up against g_{beta,eps}.
            const double lhs = expectation_value(gibbs.state, H) * gibbs.Z;
            Eigen::VectorXd terms(grid.size());
            for (Eigen::Index k = 0; k < grid.size(); ++k) {
                Eigen::VectorXcd z = grid.nodes.row(k);
                terms(k) = grid.weights(k) * hup.eval(z).real() *
                           coherent_expectation(H, beta, z) / (M_PI * eps);
            }
            const double rhs = pairwise_sum(terms);
            worst_monotone = std::max(
                worst_monotone, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
        }
        checks.push_back(upper_bounded("partition_squeeze", worst_squeeze, 0.0));
        checks.push_back(upper_bounded("husimi_log_bound", worst_logbound, 1e-8));
        checks.push_back(upper_bounded("monotone_limit_identity", worst_monotone,
                                       1e-6));
    }

    // --- Free-energy identity ledgers and variational dominance --------
    {
        const SymbolClassS h = SymbolClassS::make_radial(1, {{1, 1.0}}, PolySymbol(1));
        const double beta = 1.0, eps = 0.25;
        ExperimentOptions opts;
        const FockSpec spec = certified_spec(h, beta, eps, 0.0, opts);
        const SpectralHamiltonian H = build_hamiltonian(h, spec);
        const GibbsResult gibbs = gibbs_state(H, beta, opts.top_weight_tol);
        const QuadratureGrid grid = gauss_hermite_grid(1, 64, beta);
        const PhaseDensity hd = h.evaluator();

        const ClassicalDensity gamma = classical_gibbs(hd, beta, grid);
        double eq4 = classical_free_energy(gamma, hd, beta).identity_defect;
        double eq6 = vn_free_energy(gibbs.state, H, beta).identity_defect;
        double eq8 = wehrl_free_energy(gibbs.state, h, beta, grid).identity_defect;

        double min_classical_gap = std::numeric_limits<double>::infinity();
        double min_quantum_gap = std::numeric_limits<double>::infinity();
        const double F_gamma = classical_free_energy(gamma, hd, beta).value;
        const double F_Gamma = vn_free_energy(gibbs.state, H, beta).value;
        std::uniform_real_distribution<double> mix(0.05, 0.6);
        for (int trial = 0; trial < 10; ++trial) {
            // Classical perturbation: Gibbs density mixed with a shifted Gaussian.
            const Eigen::VectorXcd c = random_phase_point(rng, 1, 1.0);
            const double t = mix(rng);
            const PhaseDensity other = [c](const Eigen::VectorXcd& z) {
                return std::exp(-(z - c).squaredNorm());
            };
            const ClassicalDensity om = make_density(other, grid);
            PhaseDensity mixed = [&gamma, &om, t](const Eigen::VectorXcd& z) {
                return (1.0 - t) * gamma.density(z) + t * om.density(z);
            };
            const ClassicalDensity mu = make_density(mixed, grid);
            const FreeEnergyReport rep = classical_free_energy(mu, hd, beta);
            eq4 = std::max(eq4, rep.identity_defect);
            min_classical_gap = std::min(min_classical_gap, rep.value - F_gamma);

            // Quantum perturbation: Gibbs state mixed with a random state.
            const DensityMatrix noise = random_state(rng, spec, 8);
            const Eigen::MatrixXcd mixed_rho =
                (1.0 - t) * gibbs.state.matrix() + t * noise.matrix();
            const DensityMatrix rho = DensityMatrix::from_matrix(spec, mixed_rho);
            const FreeEnergyReport vrep = vn_free_energy(rho, H, beta);
            eq6 = std::max(eq6, vrep.identity_defect);
            min_quantum_gap = std::min(min_quantum_gap, vrep.value - F_Gamma);
            eq8 = std::max(eq8,
                           wehrl_free_energy(rho, h, beta, grid).identity_defect);
        }
        checks.push_back(upper_bounded("identity_eq4", eq4, 1e-8));
        checks.push_back(upper_bounded("identity_eq6", eq6, 1e-8));
        checks.push_back(upper_bounded("identity_eq8", eq8, 1e-8));
        checks.push_back(upper_bounded("classical_gibbs_minimality",
                                       -min_classical_gap, 1e-10));
        checks.push_back(upper_bounded("quantum_gibbs_minimality",
                                       -min_quantum_gap, 1e-10));
    }

    // --- Certification: doubling changes nothing -----------------------
    {
        const SymbolClassS h = SymbolClassS::make_radial(1, {{1, 1.0}}, PolySymbol(1));
        const double beta = 1.0, eps = 0.25;
        ExperimentOptions opts;
        const FockSpec spec = certified_spec(h, beta, eps, 0.0, opts);
        const FockSpec doubled(1, 2 * spec.n_max, eps);

        const GibbsResult g1 = gibbs_state(build_hamiltonian(h, spec), beta);
        const GibbsResult g2 = gibbs_state(build_hamiltonian(h, doubled), beta);
        const double dS = std::abs(von_neumann_entropy(g1.state) -
                                   von_neumann_entropy(g2.state));
        const double dZ = std::abs(std::exp(g1.log_Z + std::log(M_PI * eps)) -
                                   std::exp(g2.log_Z + std::log(M_PI * eps)));
        checks.push_back(upper_bounded("nmax_doubling_entropy", dS, 1e-8));
        checks.push_back(upper_bounded("nmax_doubling_partition", dZ, 1e-8));

        const PhaseDensity hd = h.evaluator();
        GridPolicy policy = default_policy_for(h, beta);
        const RefineResult rr = classical_partition(hd, beta, 1, policy);
        const QuadratureGrid finer = policy.build(1, rr.grid.level + 1);
        const double z_next = integrate([&hd, beta](const Eigen::VectorXcd& z) {
                                  return Complex(std::exp(-beta * hd(z)), 0.0);
                              }, finer).real();
        checks.push_back(upper_bounded("grid_doubling_partition",
                                       std::abs(z_next - rr.value.real()), 1e-8));
    }

    // --- Lattice admissibility monotonicity ----------------------------
    {
        const DyadicLattice lattice = build_lattice(1, 1);
        double prev = std::numeric_limits<double>::infinity();
        double worst = -std::numeric_limits<double>::infinity();
        for (double eps : {0.05, 0.02, 0.008, 0.003}) {
            const double defect = coherent_gram_defect(lattice, eps);
            worst = std::max(worst, defect - prev);
            prev = defect;
        }
        checks.push_back(upper_bounded("lattice_gram_monotonicity", worst, 0.0));
    }

    return checks;
}

bool all_pass(const std::vector<InvariantCheck>& checks) {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

} // namespace semi
