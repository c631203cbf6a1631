#include "semi/lattice.hpp"

#include "semi/free_energy.hpp"

#include <algorithm>
#include <cmath>

namespace semi {

double DyadicLattice::max_norm() const {
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, p.norm());
    return m;
}

Eigen::Index dyadic_lattice_count(int M, int d) {
    Eigen::Index per_axis = 2 * static_cast<Eigen::Index>(M) * (Eigen::Index(1) << M) + 1;
    Eigen::Index total = 1;
    for (int j = 0; j < d; ++j) total *= per_axis;
    return total;
}

namespace {

// All integer coordinate tuples k in [-M 2^M, M 2^M]^d, lexicographic.
void enumerate_level(int M, int d, std::vector<std::vector<long>>& out) {
    out.clear();
    if (M < 0) return;
    const long kmax = static_cast<long>(M) * (1L << M);
    std::vector<long> tup(d, -kmax);
    while (true) {
        out.push_back(tup);
        int axis = d - 1;
        while (axis >= 0) {
            if (++tup[axis] <= kmax) break;
            tup[axis] = -kmax;
            --axis;
        }
        if (axis < 0) break;
    }
}

bool in_previous_level(const std::vector<long>& tup, int M) {
    if (M == 0) return false;
    const long kprev = static_cast<long>(M - 1) * (1L << (M - 1));
    for (long k : tup) {
        if (k % 2 != 0) return false;
        if (std::abs(k / 2) > kprev) return false;
    }
    return true;
}

} // namespace

DyadicLattice build_lattice(int M, int d, Eigen::Index size_cap) {
    if (M < 0) throw ArgumentError("build_lattice: M must be >= 0");
    if (d < 1) throw ArgumentError("build_lattice: d must be >= 1");
    if (dyadic_lattice_count(M, d) > size_cap)
        throw ResourceError("build_lattice: lattice size " +
                            std::to_string(dyadic_lattice_count(M, d)) +
                            " exceeds cap");

    DyadicLattice lattice;
    lattice.M = M;
    lattice.modes = d;

    // Nested enumeration: recurse on the prefix, then append the new points
    // of Lambda_M \ Lambda_{M-1} in lexicographic order.
    if (M > 0) {
        DyadicLattice prev = build_lattice(M - 1, d, size_cap);
        lattice.points = std::move(prev.points);
    }
    std::vector<std::vector<long>> tuples;
    enumerate_level(M, d, tuples);
    const double scale = std::pow(2.0, -M);
    for (const auto& tup : tuples) {
        if (M > 0 && in_previous_level(tup, M)) continue;
        Eigen::VectorXcd z(d);
        for (int j = 0; j < d; ++j) z(j) = Complex(tup[j] * scale, 0.0);
        lattice.points.push_back(std::move(z));
    }
    return lattice;
}

double coherent_gram_defect(const DyadicLattice& lattice, double eps) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < lattice.size(); ++i)
        for (Eigen::Index j = i + 1; j < lattice.size(); ++j)
            worst = std::max(
                worst, std::abs(coherent_overlap(eps, lattice.points[i],
                                                 lattice.points[j])));
    return worst;
}

double lattice_admissibility_defect(int M, int d, double eps) {
    const double count = static_cast<double>(dyadic_lattice_count(M, d));
    return count * count * std::exp(-std::pow(2.0, -2 * M - 1) / eps);
}

double max_admissible_eps(int M, int d, double threshold) {
    const double count = static_cast<double>(dyadic_lattice_count(M, d));
    const double log_ratio = std::log(count * count / threshold);
    if (log_ratio <= 0.0) return std::numeric_limits<double>::infinity();
    return std::pow(2.0, -2 * M - 1) / log_ratio;
}

CoherentONS gram_schmidt_coherent(const DyadicLattice& lattice, const FockSpec& spec,
                                  double deficit_tol, double dependence_tol) {
    if (lattice.modes != spec.modes)
        throw ArgumentError("gram_schmidt_coherent: mode mismatch");
    const Eigen::Index m = lattice.size();
    const Eigen::Index dim = spec.dim();

    CoherentONS ons{spec, Eigen::MatrixXcd(dim, m), Eigen::MatrixXcd::Zero(m, m),
                    Eigen::VectorXd(m), 0.0, 0.0};

    for (Eigen::Index i = 0; i < m; ++i) {
        CoherentVector cv = coherent_vector(spec, lattice.points[i], deficit_tol);
        if (cv.deficit > deficit_tol)
            throw TruncationError(
                "gram_schmidt_coherent: coherent deficit " +
                    std::to_string(cv.deficit) + " at lattice point " +
                    std::to_string(i),
                n_max_for_radius(spec.eps, lattice.points[i].norm(), deficit_tol));
        ons.max_deficit = std::max(ons.max_deficit, cv.deficit);
        ons.vectors.col(i) = cv.v;
        ons.coeffs(i, i) = 1.0;
    }

    std::vector<int> degenerate;
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::VectorXcd v = ons.vectors.col(i);
        Eigen::VectorXcd c = ons.coeffs.row(i).transpose();
        // Modified Gram-Schmidt with one full reorthogonalisation pass.
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index j = 0; j < i; ++j) {
                const Complex s = ons.vectors.col(j).dot(v);
                v -= s * ons.vectors.col(j);
                c -= s * ons.coeffs.row(j).transpose();
            }
        }
        const double r = v.norm();
        ons.gram_norms(i) = r;
        if (r < dependence_tol) {
            degenerate.push_back(static_cast<int>(i));
            continue;
        }
        ons.vectors.col(i) = v / r;
        ons.coeffs.row(i) = (c / r).transpose();
    }
    if (!degenerate.empty())
        throw DegenerateBasisError(
            "gram_schmidt_coherent: near-dependent coherent states", degenerate);

    const Eigen::MatrixXcd gram = ons.vectors.adjoint() * ons.vectors;
    ons.max_gram_defect =
        (gram - Eigen::MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff();
    return ons;
}

DensityMatrix LatticeState::state() const {
    return DensityMatrix::from_spectrum(ons->spec, weights, ons->vectors);
}

LatticeState lattice_state(const PhaseDensity& f, const DyadicLattice& lattice,
                           const FockSpec& spec, double admissibility_threshold,
                           double deficit_tol, double dependence_tol) {
    const double defect =
        lattice_admissibility_defect(lattice.M, lattice.modes, spec.eps);
    if (defect > admissibility_threshold)
        throw ArgumentError(
            "lattice_state: admissibility defect " + std::to_string(defect) +
            " above threshold; largest admissible eps = " +
            std::to_string(
                max_admissible_eps(lattice.M, lattice.modes, admissibility_threshold)));

    LatticeState st;
    st.ons = std::make_shared<CoherentONS>(
        gram_schmidt_coherent(lattice, spec, deficit_tol, dependence_tol));
    st.lattice = lattice;
    st.M = lattice.M;
    st.eps = spec.eps;

    const Eigen::Index m = lattice.size();
    st.f_values.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double fi = f(lattice.points[i]);
        if (fi < 0.0)
            throw InvalidDensityError("lattice_state: negative density at point");
        st.f_values(i) = fi;
    }
    const double cell = std::pow(2.0, -lattice.modes * lattice.M);
    st.N_M = pairwise_sum(st.f_values) * cell;
    if (!(st.N_M > 0.0))
        throw InvalidDensityError("lattice_state: density vanishes on the lattice");
    st.weights = st.f_values * (cell / st.N_M);
    return st;
}

LatticeEntropy lattice_entropy(const LatticeState& state) {
    LatticeEntropy ent;
    const int d = state.lattice.modes;
    const double dM_log2 = d * state.M * std::log(2.0);
    const double cell = std::pow(2.0, -d * state.M);

    // Closed formula: -(1/N_M) sum f log f * cell + log N_M + d M log 2.
    Eigen::VectorXd terms(state.f_values.size());
    for (Eigen::Index i = 0; i < state.f_values.size(); ++i)
        terms(i) = -xlogx(state.f_values(i));
    ent.formula = pairwise_sum(terms) * cell / state.N_M + std::log(state.N_M) +
                  dM_log2;

    // Spectral route: eigenvalues of sqrt(w) <e_i|e_j> sqrt(w).
    const Eigen::Index m = state.weights.size();
    const Eigen::MatrixXcd gram = state.ons->vectors.adjoint() * state.ons->vectors;
    Eigen::VectorXd sq = state.weights.cwiseSqrt();
    Eigen::MatrixXcd A = sq.cast<Complex>().asDiagonal() * gram *
                         sq.cast<Complex>().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A, Eigen::EigenvaluesOnly);
    Eigen::VectorXd sterm(m);
    for (Eigen::Index i = 0; i < m; ++i)
        sterm(i) = -xlogx(std::max(es.eigenvalues()(i), 0.0));
    ent.spectral = pairwise_sum(sterm);

    ent.renormalized = ent.formula - dM_log2;
    return ent;
}

Complex lattice_characteristic(const LatticeState& state,
                               const Eigen::VectorXcd& zeta) {
    const Eigen::Index m = state.weights.size();
    const Eigen::MatrixXcd& C = state.ons->coeffs;
    const double eps = state.eps;

    // <z_j|W(zeta)|z_k> closed-form table.
    Eigen::MatrixXcd WJK(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index k = 0; k < m; ++k)
            WJK(j, k) = weyl_matrix_element(eps, state.lattice.points[j],
                                            state.lattice.points[k], zeta);

    Complex total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        Complex diag = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (C(i, j) == Complex(0.0)) continue;
            for (Eigen::Index k = 0; k < m; ++k) {
                if (C(i, k) == Complex(0.0)) continue;
                diag += std::conj(C(i, j)) * C(i, k) * WJK(j, k);
            }
        }
        total += state.weights(i) * diag;
    }
    return total;
}

double log_partition_scalar(const SymbolClassS& h, double beta, double eps) {
    if (h.modes() != 1 || !is_number_diagonal(h.symbol()))
        throw ArgumentError("log_partition_scalar: needs a number-diagonal d=1 symbol");
    auto energy = [&](int n) {
        return wick_diagonal_eigenvalue(h.symbol(), {n}, eps);
    };
    double e0 = energy(0);
    std::vector<double> shifted;
    int n = 0;
    while (true) {
        const double e = energy(n);
        e0 = std::min(e0, e);
        shifted.push_back(e);
        if (n > 8 && e - e0 > 80.0 / beta) break;
        ++n;
        if (n > 100000000)
            throw ConvergenceError("log_partition_scalar: series did not decay");
    }
    for (double& s : shifted) s = -beta * (s - e0);
    return log_sum_exp(shifted) - beta * e0;
}

namespace {

// Simpson integration over [a, b], refined until stable.
double integrate_1d(const std::function<double(double)>& fn, double a, double b,
                    double rel_tol) {
    double prev = 0.0;
    bool have = false;
    for (int n = 64; n <= 1 << 20; n *= 2) {
        const double step = (b - a) / n;
        double s = fn(a) + fn(b);
        for (int i = 1; i < n; ++i) s += fn(a + i * step) * (i % 2 ? 4.0 : 2.0);
        s *= step / 3.0;
        if (have && std::abs(s - prev) <= rel_tol * std::max(1.0, std::abs(s)))
            return s;
        prev = s;
        have = true;
    }
    throw ConvergenceError("integrate_1d: no convergence");
}

} // namespace

DivergenceReport divergence_experiment(const PhaseDensity& f, double delta,
                                       const std::vector<int>& M_list,
                                       const SymbolClassS& h,
                                       const DivergenceOptions& opts) {
    if (h.modes() != 1 || !is_number_diagonal(h.symbol()))
        throw ArgumentError("divergence_experiment: needs a number-diagonal d=1 symbol");
    if (M_list.empty()) throw ArgumentError("divergence_experiment: empty M list");

    DivergenceReport report;
    report.slope_target = h.modes() * (1.0 + delta) * std::log(2.0);

    for (int M : M_list) {
        const double eps = std::pow(2.0, -(2.0 + delta) * M) / M_PI;
        const DyadicLattice lattice = build_lattice(M, 1);
        const double radius = lattice.max_norm();
        const int n_max = n_max_for_radius(eps, radius, opts.deficit_tol);
        if (n_max > opts.n_max_cap ||
            static_cast<Eigen::Index>(n_max) * lattice.size() > opts.vector_budget) {
            report.skipped_M.push_back(M);
            continue;
        }
        const FockSpec spec(1, n_max, eps);
        // eps(M) = 2^{-(2+delta)M}/pi is the experiment's defining choice;
        // the 1e-8 admissibility guard is intentionally bypassed here
        // (near-dependence in the Gram-Schmidt still aborts).
        const LatticeState st =
            lattice_state(f, lattice, spec, std::numeric_limits<double>::infinity(),
                          opts.deficit_tol, opts.dependence_tol);

        DivergenceRow row;
        row.M = M;
        row.eps = eps;
        row.n_max = n_max;
        const LatticeEntropy ent = lattice_entropy(st);
        row.S_vN = ent.formula;
        row.renormalized = ent.renormalized;
        row.admissibility = lattice_admissibility_defect(M, 1, eps);

        const DensityMatrix rho = st.state();
        const SpectralHamiltonian H =
            SpectralHamiltonian::diagonal(spec, wick_diagonal(h.symbol(), spec));
        const double energy = expectation_value(rho, H);
        const double log_Z = log_partition_scalar(h, opts.beta, eps);
        row.S_rel = -ent.formula + opts.beta * energy + log_Z;

        Eigen::VectorXd nvec = number_diagonal(spec);
        row.trace_N =
            expectation_value(rho, SpectralHamiltonian::diagonal(spec, nvec));
        report.rows.push_back(row);
    }
    if (report.rows.size() < 2)
        throw ResourceError("divergence_experiment: fewer than two feasible levels");

    // Least-squares affine fit of S_rel against M.
    double mx = 0.0, my = 0.0;
    for (const auto& r : report.rows) {
        mx += r.M;
        my += r.S_rel;
    }
    mx /= report.rows.size();
    my /= report.rows.size();
    double sxx = 0.0, sxy = 0.0;
    for (const auto& r : report.rows) {
        sxx += (r.M - mx) * (r.M - mx);
        sxy += (r.M - mx) * (r.S_rel - my);
    }
    report.slope = sxy / sxx;
    report.intercept = my - report.slope * mx;

    // Classical constants on the lattice's real subspace.
    const PhaseDensity hd = h.evaluator();
    auto f1 = [&](double x) {
        Eigen::VectorXcd z(1);
        z(0) = Complex(x, 0.0);
        return f(z);
    };
    auto h1 = [&](double x) {
        Eigen::VectorXcd z(1);
        z(0) = Complex(x, 0.0);
        return hd(z);
    };
    const double R = 12.0;
    const double f_mass = integrate_1d([&](double x) { return f1(x); }, -R, R, 1e-10);
    const double f_logf =
        integrate_1d([&](double x) { return xlogx(f1(x)); }, -R, R, 1e-10);
    const double hf =
        integrate_1d([&](double x) { return h1(x) * f1(x); }, -R, R, 1e-10);
    ExperimentOptions copts;
    const double Z0 = classical_targets(h, opts.beta, copts).Z0;
    report.S_B_f = -f_logf / f_mass + std::log(f_mass);
    report.classical_offset =
        f_logf / f_mass - std::log(f_mass) + opts.beta * hf / f_mass + std::log(Z0);
    return report;
}

} // namespace semi
