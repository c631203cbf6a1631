#include "semi/free_energy.hpp"

#include <cmath>

namespace semi {

namespace {

constexpr double kLogFloor = 1e-300;

double dlog_pieps(int modes, double eps) {
    return modes * std::log(M_PI * eps);
}

// S_B(phi) and the upper-symbol energy of one Husimi field, phi = f/(pi eps)^d.
struct FieldIntegrals {
    double S_B_phi = 0.0;
    double E_up = 0.0;
    double phi_mass = 0.0;
};

FieldIntegrals field_integrals(const HusimiField& field, const PolySymbol& hup) {
    const double measure = std::pow(M_PI * field.eps, field.grid.modes);
    const Eigen::Index n = field.grid.size();
    Eigen::VectorXd ent(n), energy(n), mass(n);
    Eigen::VectorXcd z(field.grid.modes);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double phi = field.values(k) / measure;
        const double w = field.grid.weights(k);
        ent(k) = -w * xlogx(phi);
        z = field.grid.nodes.row(k);
        energy(k) = w * phi * hup.eval(z).real();
        mass(k) = w * phi;
    }
    return FieldIntegrals{pairwise_sum(ent), pairwise_sum(energy), pairwise_sum(mass)};
}

FreeEnergyReport wehrl_report_from_field(const HusimiField& field,
                                         const SymbolClassS& h, double beta) {
    const int d = field.grid.modes;
    const double eps = field.eps;
    const PolySymbol hup = upper_symbol(h.symbol()).evaluate(eps);
    const FieldIntegrals fi = field_integrals(field, hup);

    FreeEnergyReport rep;
    rep.kind = FreeEnergyReport::Kind::Wehrl;
    rep.beta = beta;
    rep.eps = eps;
    rep.renormalized = false;
    rep.value = fi.E_up - fi.S_B_phi / beta + dlog_pieps(d, eps) / beta;

    // gamma_{beta,eps}: classical Gibbs density of the upper symbol on the
    // same grid, so the eq-ledger identity is exact up to the field's own
    // normalization error.
    const ClassicalDensity gamma_eps = classical_gibbs(
        [&hup](const Eigen::VectorXcd& zz) { return hup.eval(zz).real(); }, beta,
        field.grid);
    const double log_Z_up = std::log(gamma_eps.normalization);

    const double measure = std::pow(M_PI * eps, d);
    Eigen::VectorXd terms(field.grid.size());
    for (Eigen::Index k = 0; k < field.grid.size(); ++k) {
        const double phi = field.values(k) / measure;
        const double g = gamma_eps.values(k);
        terms(k) = phi <= 0.0 ? 0.0
                              : field.grid.weights(k) * phi *
                                    (std::log(phi) - std::log(std::max(g, kLogFloor)));
    }
    rep.relative_value = pairwise_sum(terms) / beta;
    rep.log_partition = log_Z_up;
    const double link = -log_Z_up / beta + dlog_pieps(d, eps) / beta;
    rep.identity_defect = std::abs(rep.value - rep.relative_value - link);
    return rep;
}

} // namespace

FreeEnergyReport classical_free_energy(const ClassicalDensity& mu,
                                       const PhaseDensity& h, double beta) {
    if (!(beta > 0.0)) throw ArgumentError("classical_free_energy: beta must be > 0");
    FreeEnergyReport rep;
    rep.kind = FreeEnergyReport::Kind::Boltzmann;
    rep.beta = beta;
    const double energy = expectation(mu, h);
    const double entropy = boltzmann_entropy(mu);
    rep.value = energy - entropy / beta;

    const ClassicalDensity gamma = classical_gibbs(h, beta, mu.grid);
    rep.relative_value = relative_entropy_classical(mu, gamma) / beta;
    rep.log_partition = std::log(gamma.normalization);
    const double link = -rep.log_partition / beta;
    rep.identity_defect = std::abs(rep.value - rep.relative_value - link);
    return rep;
}

FreeEnergyReport vn_free_energy(const DensityMatrix& rho,
                                const SpectralHamiltonian& H, double beta) {
    FreeEnergyReport rep;
    rep.kind = FreeEnergyReport::Kind::VonNeumann;
    rep.beta = beta;
    rep.eps = rho.spec().eps;
    rep.value = expectation_value(rho, H) - von_neumann_entropy(rho) / beta;

    const GibbsResult gibbs = gibbs_state(H, beta, 1e-8);
    rep.relative_value = relative_entropy_vn(rho, gibbs.state) / beta;
    rep.log_partition = gibbs.log_Z;
    const double link = -gibbs.log_Z / beta;
    rep.identity_defect = std::abs(rep.value - rep.relative_value - link);
    return rep;
}

FreeEnergyReport wehrl_free_energy(const DensityMatrix& rho, const SymbolClassS& h,
                                   double beta, const QuadratureGrid& grid,
                                   double deficit_tol) {
    return wehrl_report_from_field(husimi(rho, grid, deficit_tol), h, beta);
}

DensityMatrix recovery_sequence(const ClassicalDensity& f, const FockSpec& spec) {
    const double measure = std::pow(M_PI * spec.eps, spec.modes);
    const PhaseDensity fd = f.density;
    PhaseFunction weighted = [fd, measure](const Eigen::VectorXcd& z) {
        return Complex(fd(z) * measure, 0.0);
    };
    Eigen::MatrixXcd A = anti_wick_quantize(weighted, spec, f.grid);
    const double trace = A.trace().real();
    if (std::abs(trace - 1.0) > 1e-6)
        throw InvalidDensityError("recovery_sequence: trace " + std::to_string(trace) +
                                  " too far from 1");
    A /= trace;
    return DensityMatrix::from_matrix(spec, A);
}

SpectralHamiltonian build_hamiltonian(const SymbolClassS& h, const FockSpec& spec) {
    if (is_number_diagonal(h.symbol()))
        return SpectralHamiltonian::diagonal(spec, wick_diagonal(h.symbol(), spec));
    return SpectralHamiltonian::dense(spec, wick_quantize(h.symbol(), spec));
}

FockSpec certified_spec(const SymbolClassS& h, double beta, double eps,
                        double radius, const ExperimentOptions& opts) {
    const int d = h.modes();
    int n_deficit = 1;
    if (radius > 0.0) n_deficit = n_max_for_radius(eps, radius, opts.deficit_tol);

    if (d == 1 && is_number_diagonal(h.symbol())) {
        // Scalar certification: walk the closed-form diagonal eigenvalues.
        auto energy = [&](int n) {
            return wick_diagonal_eigenvalue(h.symbol(), {n}, eps);
        };
        double e0 = energy(0);
        int n = 0;
        std::vector<double> shifted;  // -beta (E(n) - e0), updated on new minima
        std::vector<double> raw;
        while (true) {
            const double e = energy(n);
            raw.push_back(e);
            e0 = std::min(e0, e);
            if (n > 8 && e - e0 > 80.0 / beta) break;
            ++n;
            if (n > opts.n_max_cap)
                throw TruncationError("certified_spec: scalar scan exceeded cap",
                                      opts.n_max_cap);
        }
        shifted.resize(raw.size());
        for (size_t i = 0; i < raw.size(); ++i) shifted[i] = -beta * (raw[i] - e0);
        const double log_Z = log_sum_exp(shifted);
        int n_gibbs = 1;
        for (size_t i = 0; i < shifted.size(); ++i)
            if (shifted[i] - log_Z >= std::log(opts.top_weight_tol))
                n_gibbs = static_cast<int>(i) + 1;
        const int n_max = std::max({n_gibbs, n_deficit, 8});
        if (n_max > opts.n_max_cap)
            throw TruncationError("certified_spec: required cutoff above cap", n_max);
        return FockSpec(1, n_max, eps);
    }

    // Dense/multimode path: grow until the Gibbs top-sector weight passes.
    int n_max = std::max(n_deficit, 8);
    for (int attempt = 0; attempt < 6; ++attempt) {
        FockSpec spec(d, n_max, eps);
        if (spec.dim() > opts.dense_dim_cap && !is_number_diagonal(h.symbol()))
            throw TruncationError("certified_spec: dense dimension above cap", n_max);
        try {
            const SpectralHamiltonian H = build_hamiltonian(h, spec);
            gibbs_state(H, beta, opts.top_weight_tol);
            return spec;
        } catch (const TruncationError&) {
            n_max = static_cast<int>(n_max * 1.7) + 4;
            if (n_max > opts.n_max_cap)
                throw TruncationError("certified_spec: required cutoff above cap",
                                      n_max);
        }
    }
    throw TruncationError("certified_spec: no adequate cutoff found", n_max);
}

ClassicalTargets classical_targets(const SymbolClassS& h, double beta,
                                   const ExperimentOptions& opts) {
    GridPolicy policy = default_policy_for(h, beta);
    policy.rel_tol = opts.quad_rel_tol;
    const PhaseDensity hd = h.evaluator();

    ClassicalTargets out;
    bool have = false;
    double prev_Z = 0.0, prev_E = 0.0;
    for (int level = 0; level <= policy.max_level; ++level) {
        QuadratureGrid grid;
        try {
            grid = policy.build(h.modes(), level);
        } catch (const Error&) {
            break;
        }
        Eigen::VectorXd boltz(grid.size()), hb(grid.size());
        Eigen::VectorXcd z(grid.modes);
        for (Eigen::Index k = 0; k < grid.size(); ++k) {
            z = grid.nodes.row(k);
            const double hv = hd(z);
            const double b = std::exp(-beta * hv);
            boltz(k) = grid.weights(k) * b;
            hb(k) = grid.weights(k) * hv * b;
        }
        const double Z = pairwise_sum(boltz);
        const double E = pairwise_sum(hb) / Z;
        if (have && std::abs(Z - prev_Z) <= opts.quad_rel_tol * std::max(1.0, Z) &&
            std::abs(E - prev_E) <= opts.quad_rel_tol * std::max(1.0, std::abs(E))) {
            out.Z0 = Z;
            out.mean_energy = E;
            out.S_B = std::log(Z) + beta * E;
            out.F_B = -std::log(Z) / beta;
            out.grid = std::move(grid);
            return out;
        }
        prev_Z = Z;
        prev_E = E;
        have = true;
    }
    throw ConvergenceError("classical_targets: quadrature did not stabilise");
}

namespace {

// Husimi-side integrals on a refinement ladder until S_W and E_up stabilise.
struct QuantumRow {
    double S_W = 0.0;
    FreeEnergyReport wehrl;
    HusimiField field;
};

QuantumRow certified_wehrl_row(const DensityMatrix& rho, const SymbolClassS& h,
                               double beta, const ExperimentOptions& opts) {
    GridPolicy policy = default_policy_for(h, beta);
    policy.rel_tol = opts.quad_rel_tol;
    if (policy.scheme == Scheme::GaussHermiteTensor) {
        policy.initial_points = 32;
        policy.max_level = 3;
    } else {
        policy.initial_points = std::max(policy.initial_points, 96);
        policy.max_level = 2;
    }

    bool have = false;
    double prev_SW = 0.0, prev_E = 0.0;
    for (int level = 0; level <= policy.max_level; ++level) {
        QuadratureGrid grid;
        try {
            grid = policy.build(h.modes(), level);
        } catch (const Error&) {
            break;
        }
        HusimiField field = husimi(rho, grid, opts.deficit_tol);
        const double S_W = wehrl_entropy(field);
        const PolySymbol hup = upper_symbol(h.symbol()).evaluate(rho.spec().eps);
        const FieldIntegrals fi = field_integrals(field, hup);
        if (have &&
            std::abs(S_W - prev_SW) <= opts.quad_rel_tol * std::max(1.0, std::abs(S_W)) &&
            std::abs(fi.E_up - prev_E) <=
                opts.quad_rel_tol * std::max(1.0, std::abs(fi.E_up))) {
            QuantumRow row;
            row.S_W = S_W;
            row.wehrl = wehrl_report_from_field(field, h, beta);
            row.field = std::move(field);
            return row;
        }
        prev_SW = S_W;
        prev_E = fi.E_up;
        have = true;
    }
    throw ConvergenceError("certified_wehrl_row: Husimi quadrature did not stabilise");
}

} // namespace

EntropyConvergenceResult entropy_convergence_experiment(
    const SymbolClassS& h, double beta, const std::vector<double>& eps_list,
    const ExperimentOptions& opts) {
    if (eps_list.empty())
        throw ArgumentError("entropy_convergence_experiment: empty eps list");

    EntropyConvergenceResult result;
    result.targets = classical_targets(h, beta, opts);
    const int d = h.modes();

    for (double eps : eps_list) {
        const FockSpec spec = certified_spec(h, beta, eps, 0.0, opts);
        const SpectralHamiltonian H = build_hamiltonian(h, spec);
        const GibbsResult gibbs = gibbs_state(H, beta, opts.top_weight_tol);

        ConvergenceRow row;
        row.eps = eps;
        row.n_max = spec.n_max;
        const double log_Z_scaled = gibbs.log_Z + dlog_pieps(d, eps);
        row.Z_scaled = std::exp(log_Z_scaled);
        row.S_vN_renorm = von_neumann_entropy(gibbs.state) + dlog_pieps(d, eps);

        const QuantumRow qr = certified_wehrl_row(gibbs.state, h, beta, opts);
        row.S_W_renorm = qr.S_W + dlog_pieps(d, eps);
        row.S_B_target = result.targets.S_B;
        row.err_vN = row.S_vN_renorm - row.S_B_target;
        row.err_W = row.S_W_renorm - row.S_B_target;
        row.F_vN_renorm = -log_Z_scaled / beta;
        row.F_W_renorm = qr.wehrl.value - dlog_pieps(d, eps) / beta;
        row.F_B_target = result.targets.F_B;
        row.wehrl_identity_defect = qr.wehrl.identity_defect;
        result.rows.push_back(row);

        for (int k = 1; k <= opts.assumption_A_kmax; ++k)
            result.assumption_A[k].push_back(assumption_A_norm(H, beta, k));
    }
    return result;
}

JensenCheck jensen_lower_bound_check(const SymbolClassS& h, double beta, double eps,
                                     const ExperimentOptions& opts) {
    const FockSpec spec = certified_spec(h, beta, eps, 0.0, opts);
    const SpectralHamiltonian H = build_hamiltonian(h, spec);
    const GibbsResult gibbs = gibbs_state(H, beta, opts.top_weight_tol);

    JensenCheck check;
    check.lhs = von_neumann_entropy(gibbs.state) - gibbs.log_Z;

    const PolySymbol hup = upper_symbol(h.symbol()).evaluate(eps);
    const PhaseDensity hd = h.evaluator();
    GridPolicy policy = default_policy_for(h, beta);
    policy.rel_tol = opts.quad_rel_tol;
    PhaseFunction integrand = [&](const Eigen::VectorXcd& z) {
        return Complex(hup.eval(z).real() * std::exp(-beta * hd(z)), 0.0);
    };
    const RefineResult quad = refine_until(integrand, h.modes(), policy);
    const double log_Z_scaled = gibbs.log_Z + dlog_pieps(h.modes(), eps);
    check.rhs = beta * quad.value.real() / std::exp(log_Z_scaled);
    check.gap = check.lhs - check.rhs;
    return check;
}

GammaUpperResult gamma_upper_experiment(double sigma2, int modes,
                                        const std::vector<double>& eps_list,
                                        const SymbolClassS& h,
                                        const ExperimentOptions& opts) {
    if (!(sigma2 > 0.0)) throw ArgumentError("gamma_upper_experiment: sigma2 <= 0");
    if (modes != h.modes())
        throw ArgumentError("gamma_upper_experiment: mode mismatch with h");

    GammaUpperResult result;
    result.S_B_f = modes * (1.0 + std::log(M_PI * sigma2));
    const PhaseDensity f = [sigma2, modes](const Eigen::VectorXcd& z) {
        return std::exp(-z.squaredNorm() / sigma2) / std::pow(M_PI * sigma2, modes);
    };
    const PhaseDensity hd = h.evaluator();

    // int h f dz for the energy target (certified).
    GridPolicy target_policy;
    target_policy.scheme = Scheme::GaussHermiteTensor;
    target_policy.rate = 1.0 / sigma2;
    target_policy.initial_points = 24;
    target_policy.max_level = 3;
    target_policy.rel_tol = opts.quad_rel_tol;
    const double energy_target =
        refine_until(
            [&](const Eigen::VectorXcd& z) { return Complex(hd(z) * f(z), 0.0); },
            modes, target_policy)
            .value.real();

    for (double eps : eps_list) {
        GammaUpperRow row;
        row.eps = eps;
        row.S_B_f = result.S_B_f;
        row.energy_target = energy_target;

        // Closed-form convolution: Gaussian of complex variance sigma2+eps.
        const double s2 = sigma2 + eps;
        auto conv_exact = [s2, modes](const Eigen::VectorXcd& z) {
            return std::exp(-z.squaredNorm() / s2) / std::pow(M_PI * s2, modes);
        };

        // Direct convolution quadrature on a kernel-resolving uniform grid.
        const double spacing = std::min(std::sqrt(sigma2) / 8.0, std::sqrt(eps) / 3.0);
        const double R = 5.5 * std::sqrt(sigma2);
        const int per_axis = static_cast<int>(std::ceil(2.0 * R / spacing));
        const QuadratureGrid fine = uniform_ball_grid(modes, R, per_axis);
        Eigen::VectorXd fvals(fine.size());
        Eigen::VectorXcd w(modes);
        for (Eigen::Index k = 0; k < fine.size(); ++k) {
            w = fine.nodes.row(k);
            fvals(k) = f(w);
        }
        const double measure = std::pow(M_PI * eps, modes);
        auto conv_quad = [&](const Eigen::VectorXcd& z) {
            Eigen::VectorXd terms(fine.size());
            Eigen::VectorXcd wk(modes);
            for (Eigen::Index k = 0; k < fine.size(); ++k) {
                wk = fine.nodes.row(k);
                terms(k) = fine.weights(k) * fvals(k) *
                           std::exp(-(z - wk).squaredNorm() / eps) / measure;
            }
            return pairwise_sum(terms);
        };

        // Sample points spread over the bulk of f.
        std::vector<Eigen::VectorXcd> samples;
        for (int i = -2; i <= 2; ++i)
            for (int j = -2; j <= 2; ++j) {
                Eigen::VectorXcd z = Eigen::VectorXcd::Zero(modes);
                z(0) = Complex(0.6 * i, 0.6 * j) * std::sqrt(sigma2);
                samples.push_back(z);
            }
        double conv_err = 0.0;
        for (const auto& z : samples)
            conv_err = std::max(conv_err, std::abs(conv_quad(z) - conv_exact(z)));
        row.husimi_conv_err = conv_err;

        // Matrix path when the cutoff stays affordable.
        const double nbar = sigma2 / eps;
        const int n_cut = static_cast<int>(
            std::ceil((nbar + 1.0) * 32.0 + 10.0 * std::sqrt(nbar + 1.0) + 30.0));
        row.matrix_path = modes == 1 && n_cut <= 420;
        if (row.matrix_path) {
            const FockSpec spec(modes, n_cut, eps);
            row.n_max = n_cut;
            const ClassicalDensity fd = make_density(f, fine);
            const DensityMatrix rho = recovery_sequence(fd, spec);
            for (const auto& z : samples) {
                HusimiField one;  // single-point Husimi via a tiny grid
                QuadratureGrid g;
                g.modes = modes;
                g.nodes.resize(1, modes);
                g.nodes.row(0) = z.transpose();
                g.weights = Eigen::VectorXd::Ones(1);
                g.radius = z.norm();
                one = husimi(rho, g, 1.0);
                const double husimi_density = one.values(0) / measure;
                row.husimi_conv_err = std::max(
                    row.husimi_conv_err, std::abs(husimi_density - conv_exact(z)));
            }
            const SpectralHamiltonian H = build_hamiltonian(h, spec);
            row.energy = expectation_value(rho, H);

            // Certified S_W from the assembled state.
            GridPolicy swp;
            swp.scheme = Scheme::GaussHermiteTensor;
            swp.rate = 1.0 / s2;
            swp.initial_points = 32;
            swp.max_level = 3;
            bool have = false;
            double prev = 0.0, S_W = 0.0;
            for (int level = 0; level <= swp.max_level; ++level) {
                const QuadratureGrid grid = swp.build(modes, level);
                S_W = wehrl_entropy(husimi(rho, grid, opts.deficit_tol));
                if (have && std::abs(S_W - prev) <= opts.quad_rel_tol * std::max(1.0, std::abs(S_W)))
                    break;
                prev = S_W;
                have = true;
            }
            row.S_W_renorm = S_W + dlog_pieps(modes, eps);
        } else {
            // Convolution path: the Husimi function of the trial state is the
            // eps-Gaussian convolution (verified pointwise above), so S_W is
            // quadrature over the convolved density.
            row.n_max = -1;
            GridPolicy swp;
            swp.scheme = Scheme::GaussHermiteTensor;
            swp.rate = 1.0 / s2;
            swp.initial_points = 32;
            swp.max_level = 3;
            swp.rel_tol = opts.quad_rel_tol;
            const RefineResult ent = refine_until(
                [&](const Eigen::VectorXcd& z) {
                    return Complex(-xlogx(conv_exact(z)), 0.0);
                },
                modes, swp);
            // S_B of the convolved density equals S_W + d log(pi eps).
            row.S_W_renorm = ent.value.real();
            Eigen::VectorXd eterms(fine.size());
            Eigen::VectorXcd wk(modes);
            for (Eigen::Index k = 0; k < fine.size(); ++k) {
                wk = fine.nodes.row(k);
                eterms(k) = fine.weights(k) * fvals(k) * hd(wk);
            }
            row.energy = pairwise_sum(eterms);
        }
        row.gap = row.S_W_renorm - row.S_B_f;
        result.rows.push_back(row);
    }
    return result;
}

GammaLowerResult gamma_lower_bound_report(const SymbolClassS& h, double beta,
                                          double beta_prime,
                                          const std::vector<double>& eps_list,
                                          const ExperimentOptions& opts) {
    GammaLowerResult result;

    // Classical target: S_B(gamma_{beta'} || gamma_beta)/beta on a certified grid.
    const ClassicalTargets tgt = classical_targets(h, beta, opts);
    const PhaseDensity hd = h.evaluator();
    const ClassicalDensity gamma_b = classical_gibbs(hd, beta, tgt.grid);
    const ClassicalDensity gamma_bp = classical_gibbs(hd, beta_prime, tgt.grid);
    result.classical_target =
        relative_entropy_classical(gamma_bp, gamma_b) / beta;

    for (double eps : eps_list) {
        const FockSpec spec = certified_spec(
            h, std::min(beta, beta_prime), eps, 0.0, opts);
        const SpectralHamiltonian H = build_hamiltonian(h, spec);
        const GibbsResult probe = gibbs_state(H, beta_prime, opts.top_weight_tol);
        const QuantumRow qr = certified_wehrl_row(probe.state, h, beta, opts);
        result.rows.push_back(GammaLowerRow{eps, qr.wehrl.relative_value});
    }
    return result;
}

} // namespace semi
