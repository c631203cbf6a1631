#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "semi/lattice.hpp"

using namespace semi;

namespace {

// Normalised Gaussian on the real subspace carrying the lattice.
PhaseDensity line_gaussian(double sigma) {
    return [sigma](const Eigen::VectorXcd& z) {
        double q = 0.0;
        for (Eigen::Index l = 0; l < z.size(); ++l) q += z(l).real() * z(l).real();
        return std::exp(-q / (2.0 * sigma * sigma)) /
               std::pow(2.0 * M_PI * sigma * sigma, 0.5 * z.size());
    };
}

double line_gaussian_entropy(double sigma) {
    return 0.5 * std::log(2.0 * M_PI * M_E * sigma * sigma);
}

} // namespace

TEST_CASE("dyadic lattice enumeration is the ground truth") {
    // M=0: the single point 0
    const DyadicLattice l0 = build_lattice(0, 1);
    REQUIRE(l0.size() == 1);
    CHECK(l0.points[0](0) == Complex(0.0, 0.0));
    CHECK(dyadic_lattice_count(0, 1) == 1);

    // M=1, d=1: spacing 1/2 on [-1,1]; enumeration gives 5 points
    const DyadicLattice l1 = build_lattice(1, 1);
    REQUIRE(l1.size() == 5);
    CHECK(dyadic_lattice_count(1, 1) == 5);
    CHECK(l1.spacing() == doctest::Approx(0.5));
    std::set<double> coords;
    for (const auto& p : l1.points) {
        CHECK(p(0).imag() == 0.0);
        coords.insert(p(0).real());
    }
    CHECK(coords == std::set<double>({-1.0, -0.5, 0.0, 0.5, 1.0}));

    // prefix property: Lambda_M enumerations nest
    const DyadicLattice l2 = build_lattice(2, 1);
    CHECK(dyadic_lattice_count(2, 1) == 17);
    REQUIRE(l2.size() == 17);
    for (Eigen::Index i = 0; i < l1.size(); ++i)
        CHECK(l2.points[i](0) == l1.points[i](0));
    for (Eigen::Index i = 0; i < l0.size(); ++i)
        CHECK(l1.points[i](0) == l0.points[i](0));

    // M=3 cardinality (2 M 2^M + 1)^d
    CHECK(build_lattice(3, 1).size() == 49);
    CHECK(dyadic_lattice_count(3, 1) == 49);

    // d=2: squared count, points on the real subspace
    const DyadicLattice q1 = build_lattice(1, 2);
    CHECK(q1.size() == 25);
    CHECK(dyadic_lattice_count(1, 2) == 25);

    CHECK_THROWS_AS(build_lattice(12, 2), ResourceError);
}

TEST_CASE("admissibility defect and its eps monotonicity") {
    const double defect = lattice_admissibility_defect(1, 1, 0.01);
    CHECK(defect == doctest::Approx(25.0 * std::exp(-0.125 / 0.01)).epsilon(1e-12));

    const double eps_adm = max_admissible_eps(1, 1, 1e-8);
    CHECK(lattice_admissibility_defect(1, 1, eps_adm) ==
          doctest::Approx(1e-8).epsilon(1e-6));
    CHECK(lattice_admissibility_defect(1, 1, eps_adm * 0.9) < 1e-8);

    // coherent Gram off-diagonal decreases strictly as eps decreases
    const DyadicLattice l1 = build_lattice(1, 1);
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {0.05, 0.02, 0.008}) {
        const double g = coherent_gram_defect(l1, eps);
        CHECK(g < prev);
        prev = g;
        CHECK(g == doctest::Approx(std::exp(-0.125 / eps)).epsilon(1e-10));
    }

    // the guard rejects an inadmissible eps and reports the largest usable one
    const FockSpec bad(1, 40, 0.05);
    try {
        lattice_state(line_gaussian(1.0), l1, bad);
        CHECK(false);
    } catch (const ArgumentError& e) {
        CHECK(std::string(e.what()).find("admissible") != std::string::npos);
    }
}

TEST_CASE("gram-schmidt on coherent states") {
    // two points with overlap s: second residual norm sqrt(1-|s|^2)
    DyadicLattice two;
    two.M = 0;
    two.modes = 1;
    two.points.resize(2, Eigen::VectorXcd::Zero(1));
    two.points[0](0) = Complex(0.0, 0.0);
    two.points[1](0) = Complex(0.6, 0.0);
    const double eps = 0.3;
    const FockSpec spec(1, 60, eps);
    const CoherentONS ons = gram_schmidt_coherent(two, spec);
    const double s = std::abs(coherent_overlap(eps, two.points[0], two.points[1]));
    CHECK(ons.gram_norms(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ons.gram_norms(1) ==
          doctest::Approx(std::sqrt(1.0 - s * s)).epsilon(1e-10));
    CHECK(ons.max_gram_defect <= 1e-10);

    // eps small enough: e(z_m) is the coherent state itself to 1e-6
    const DyadicLattice l1 = build_lattice(1, 1);
    const double eps_small = 0.004;
    const FockSpec tiny(1, n_max_for_radius(eps_small, 1.0, 1e-12), eps_small);
    const CoherentONS ons1 = gram_schmidt_coherent(l1, tiny);
    for (Eigen::Index m = 0; m < l1.size(); ++m) {
        const Eigen::VectorXcd coh = coherent_vector(tiny, l1.points[m]).v;
        CHECK((ons1.vectors.col(m) - coh).norm() <= 1e-6);
    }
    CHECK(ons1.max_gram_defect <= 1e-8);

    // near-dependence aborts with the offending indices
    DyadicLattice close;
    close.M = 0;
    close.modes = 1;
    close.points.resize(2, Eigen::VectorXcd::Zero(1));
    close.points[1](0) = Complex(1e-9, 0.0);
    try {
        gram_schmidt_coherent(close, spec);
        CHECK(false);
    } catch (const DegenerateBasisError& e) {
        REQUIRE(e.indices.size() == 1);
        CHECK(e.indices[0] == 1);
    }

    // the diagonal Weyl expectation of e(z_m) deviates from the coherent
    // one by at most m * sum_j exp(-|z_m-z_j|^2/(2 eps)).
    const double eps_mid = 0.02;
    const FockSpec mid(1, n_max_for_radius(eps_mid, 1.0, 1e-12), eps_mid);
    const CoherentONS ons2 = gram_schmidt_coherent(l1, mid);
    Eigen::VectorXcd zeta(1);
    zeta(0) = Complex(0.4, -0.8);
    for (Eigen::Index m = 0; m < l1.size(); ++m) {
        Complex diag = 0.0;
        for (Eigen::Index j = 0; j <= m; ++j)
            for (Eigen::Index k = 0; k <= m; ++k)
                diag += std::conj(ons2.coeffs(m, j)) * ons2.coeffs(m, k) *
                        weyl_matrix_element(eps_mid, l1.points[j], l1.points[k],
                                            zeta);
        const Complex coh =
            weyl_matrix_element(eps_mid, l1.points[m], l1.points[m], zeta);
        const double r2 = ons2.gram_norms(m) * ons2.gram_norms(m);
        double bound = 0.0;
        for (Eigen::Index j = 0; j < m; ++j)
            bound += std::exp(-(l1.points[m] - l1.points[j]).squaredNorm() /
                              (2.0 * eps_mid));
        bound *= double(m + 1);
        CHECK(std::abs(r2 * diag - coh) <= bound + 1e-12);
    }
}

TEST_CASE("gram norms obey the overlap bound and tend to one") {
    const DyadicLattice l1 = build_lattice(1, 1);
    double prev_worst = std::numeric_limits<double>::infinity();
    for (double eps : {0.02, 0.008, 0.003}) {
        const FockSpec spec(1, n_max_for_radius(eps, 1.0, 1e-12), eps);
        const CoherentONS ons = gram_schmidt_coherent(l1, spec);
        double worst = 0.0;
        for (Eigen::Index m = 0; m < l1.size(); ++m) {
            const double r = ons.gram_norms(m);
            CHECK(r > 0.0);
            CHECK(r <= 1.0 + 1e-12);
            // |r_m^2 - 1| <= m * sum_j exp(-|z_m - z_j|^2 / (2 eps))
            double bound = 0.0;
            for (Eigen::Index j = 0; j < m; ++j)
                bound += std::exp(-(l1.points[m] - l1.points[j]).squaredNorm() /
                                  (2.0 * eps));
            bound *= double(m);
            CHECK(std::abs(r * r - 1.0) <= bound + 1e-10);
            worst = std::max(worst, std::abs(r - 1.0));
        }
        // residual norms approach 1 as eps decreases at fixed lattice
        CHECK(worst < prev_worst + 1e-15);
        prev_worst = worst;
    }
    CHECK(prev_worst <= 1e-9);
}

TEST_CASE("lattice states: uniform weights and entropy formulas") {
    const DyadicLattice l1 = build_lattice(1, 1);
    const double eps = 0.004;
    const FockSpec spec(1, n_max_for_radius(eps, 1.0, 1e-12), eps);

    // uniform f: maximally mixed over the ONS
    const LatticeState uni = lattice_state(
        [](const Eigen::VectorXcd&) { return 1.0; }, l1, spec);
    CHECK(uni.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(uni.N_M == doctest::Approx(5.0 / 2.0).epsilon(1e-12));
    const LatticeEntropy ent = lattice_entropy(uni);
    CHECK(ent.formula == doctest::Approx(std::log(5.0)).epsilon(1e-10));
    CHECK(ent.spectral == doctest::Approx(std::log(5.0)).epsilon(1e-8));
    CHECK(von_neumann_entropy(uni.state()) ==
          doctest::Approx(std::log(5.0)).epsilon(1e-10));

    // spectral route agrees with the closed formula on a random density
    auto gen = oracles::rng(23);
    std::uniform_real_distribution<double> u(0.2, 1.7);
    std::vector<double> fv;
    for (int i = 0; i < 5; ++i) fv.push_back(u(gen));
    const LatticeState rnd = lattice_state(
        [&l1, &fv](const Eigen::VectorXcd& z) {
            for (size_t i = 0; i < fv.size(); ++i)
                if (std::abs(Complex(z(0)) - l1.points[i](0)) < 1e-12)
                    return fv[i];
            return 0.5;
        },
        l1, spec);
    const LatticeEntropy ent2 = lattice_entropy(rnd);
    CHECK(std::abs(ent2.spectral - ent2.formula) <= 1e-8);
    CHECK(ent2.renormalized ==
          doctest::Approx(ent2.formula - std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("renormalized lattice entropy approaches the line entropy") {
    const double sigma = 1.0;
    const PhaseDensity f = line_gaussian(sigma);
    const double target = line_gaussian_entropy(sigma);

    double prev_err = std::numeric_limits<double>::infinity();
    for (int M : {1, 2, 3}) {
        const double eps = 0.5 * max_admissible_eps(M, 1, 1e-8);
        const DyadicLattice lat = build_lattice(M, 1);
        const FockSpec spec(1, n_max_for_radius(eps, lat.max_norm(), 1e-12), eps);
        const LatticeState st = lattice_state(f, lat, spec);
        const double err = std::abs(lattice_entropy(st).renormalized - target);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err <= 0.05);
}

TEST_CASE("characteristic functions of lattice states converge to the measure") {
    // Wigner-limit direction along eps(M) << 2^{-2M}/M, at a fixed zeta set
    const double sigma = 0.8;
    const PhaseDensity f = line_gaussian(sigma);
    const double kappa = std::sqrt(2.0);

    std::vector<Eigen::VectorXcd> zetas;
    for (double t : {0.4, 1.0}) {
        Eigen::VectorXcd zeta(1);
        zeta(0) = Complex(t, 0.3 * t);
        zetas.push_back(zeta);
    }

    // classical characteristic of the line measure by 1-d quadrature
    auto classical = [&](const Eigen::VectorXcd& zeta) {
        const double re_part = zeta(0).real();
        const auto integrand_re = [&](double x) {
            Eigen::VectorXcd z(1);
            z(0) = Complex(x, 0.0);
            return f(z) * std::cos(kappa * re_part * x);
        };
        const auto integrand_im = [&](double x) {
            Eigen::VectorXcd z(1);
            z(0) = Complex(x, 0.0);
            return f(z) * std::sin(kappa * re_part * x);
        };
        return Complex(oracles::simpson(integrand_re, -9.0, 9.0, 4000),
                       oracles::simpson(integrand_im, -9.0, 9.0, 4000));
    };

    std::vector<double> worst;
    for (int M : {1, 2, 3}) {
        const double eps = std::pow(2.0, -(2.0 + 1.0) * M) / M_PI;  // delta = 1
        const DyadicLattice lat = build_lattice(M, 1);
        const FockSpec spec(1, n_max_for_radius(eps, lat.max_norm(), 1e-12), eps);
        const LatticeState st =
            lattice_state(f, lat, spec, std::numeric_limits<double>::infinity());
        double w = 0.0;
        for (const auto& zeta : zetas)
            w = std::max(w,
                         std::abs(lattice_characteristic(st, zeta) - classical(zeta)));
        worst.push_back(w);
    }
    CHECK(worst[1] < worst[0]);
    CHECK(worst[2] < worst[1]);
    CHECK(worst[2] <= 0.05);
}

TEST_CASE("divergence experiment: the wrong renormalization constant") {
    const PhaseDensity f = line_gaussian(1.0);
    const SymbolClassS h = SymbolClassS::make_radial(1, {{1, 1.0}}, PolySymbol(1));
    DivergenceOptions opts;

    const DivergenceReport rep = divergence_experiment(f, 1.0, {1, 2, 3}, h, opts);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.slope_target == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    // slope within 15% of d(1+delta) log 2
    CHECK(std::abs(rep.slope - rep.slope_target) <= 0.15 * rep.slope_target);
    // removing the fitted slope leaves the classical offset
    CHECK(std::abs(rep.intercept - rep.classical_offset) <= 0.3);
    // renormalized lattice entropy near the line entropy of f at the last M
    CHECK(std::abs(rep.rows.back().renormalized - rep.S_B_f) <=
          0.10 * std::abs(rep.S_B_f));
    // Tr(rho N) bounded uniformly (Cor. 4): compare against E_f[x^2] + slack
    for (const auto& r : rep.rows) CHECK(r.trace_N <= 1.0 + 0.5);

    // delta = 0 edge: slope ~ d log 2
    const DivergenceReport rep0 = divergence_experiment(f, 0.0, {1, 2, 3}, h, opts);
    CHECK(std::abs(rep0.slope - std::log(2.0)) <= 0.2 * std::log(2.0));

    // infeasible levels are skipped with a warning, not an error
    DivergenceOptions caps;
    caps.vector_budget = 200000;
    const DivergenceReport rep_cap =
        divergence_experiment(f, 1.0, {1, 2, 3, 4}, h, caps);
    CHECK(!rep_cap.skipped_M.empty());
}
