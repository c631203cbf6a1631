#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "semi/quadrature.hpp"

using namespace semi;

namespace {
PhaseFunction complexify(const PhaseDensity& f) {
    return [f](const Eigen::VectorXcd& z) { return Complex(f(z), 0.0); };
}
} // namespace

TEST_CASE("uniform ball grid: area and node containment") {
    const double R = 1.7;
    QuadratureGrid grid = uniform_ball_grid(1, R, 220);
    const double area = grid.weights.sum();
    // midpoint-in-ball area converges at boundary-cell order R*h
    const double h = 2.0 * R / 220;
    CHECK(std::abs(area - M_PI * R * R) <= 8.0 * R * h);
    for (Eigen::Index k = 0; k < grid.size(); ++k)
        CHECK(grid.nodes.row(k).norm() <= R + 1e-12);

    // integrate(1) equals the quadrature area
    const Complex one = integrate(
        [](const Eigen::VectorXcd&) { return Complex(1.0, 0.0); }, grid);
    CHECK(one.real() == doctest::Approx(area).epsilon(1e-12));
}

TEST_CASE("gaussian integral to 1e-8 on both schemes") {
    const PhaseDensity g = [](const Eigen::VectorXcd& z) {
        return std::exp(-z.squaredNorm());
    };
    QuadratureGrid gh = gauss_hermite_grid(1, 32, 1.0);
    CHECK(integrate(complexify(g), gh).real() ==
          doctest::Approx(M_PI).epsilon(1e-12));

    QuadratureGrid uni = uniform_ball_grid(1, 6.5, 200);
    CHECK(integrate(complexify(g), uni).real() ==
          doctest::Approx(M_PI).epsilon(1e-9));

    // d=2 tensor Gaussian: pi^2
    QuadratureGrid gh2 = gauss_hermite_grid(2, 16, 1.0);
    CHECK(integrate(complexify(g), gh2).real() ==
          doctest::Approx(M_PI * M_PI).epsilon(1e-12));
}

TEST_CASE("odd integrands vanish by symmetry") {
    QuadratureGrid gh = gauss_hermite_grid(1, 24, 1.0);
    const Complex v = integrate(
        [](const Eigen::VectorXcd& z) {
            return z(0) * std::exp(-z.squaredNorm());
        },
        gh);
    CHECK(std::abs(v) <= 1e-14);
}

TEST_CASE("refine_until: gaussian, quartic vs radial oracle, divergence") {
    GridPolicy policy;
    policy.scheme = Scheme::GaussHermiteTensor;
    policy.rate = 1.0;
    policy.initial_points = 8;

    const RefineResult rr = refine_until(
        [](const Eigen::VectorXcd& z) {
            return Complex(std::exp(-z.squaredNorm()), 0.0);
        },
        1, policy, 1e-9);
    CHECK(rr.value.real() == doctest::Approx(M_PI).epsilon(1e-9));
    CHECK(rr.history.size() >= 2);
    CHECK(rr.grid.level >= 1);

    // exp(-|z|^4): cross-check against an independent 1-d radial reduction
    const double radial = oracles::radial_integral(
        [](double r) { return std::exp(-r * r * r * r); }, 6.0);
    GridPolicy upolicy;
    upolicy.scheme = Scheme::UniformTensor;
    upolicy.radius = 4.0;
    upolicy.initial_points = 64;
    upolicy.max_level = 3;
    const RefineResult rq = refine_until(
        [](const Eigen::VectorXcd& z) {
            const double q = z.squaredNorm();
            return Complex(std::exp(-q * q), 0.0);
        },
        1, upolicy, 1e-9);
    CHECK(rq.value.real() == doctest::Approx(radial).epsilon(1e-8));

    // divergent integrand must fail
    CHECK_THROWS_AS(refine_until(
                        [](const Eigen::VectorXcd& z) {
                            return Complex(std::exp(z.squaredNorm()), 0.0);
                        },
                        1, policy, 1e-9),
                    ConvergenceError);
}

TEST_CASE("classical partition functions") {
    GridPolicy policy;
    policy.rate = 1.0;

    const RefineResult z1 = classical_partition(
        [](const Eigen::VectorXcd& z) { return z.squaredNorm(); }, 1.0, 1, policy);
    CHECK(z1.value.real() == doctest::Approx(M_PI).epsilon(1e-10));

    GridPolicy policy2;
    policy2.rate = 2.0;
    const RefineResult z2 = classical_partition(
        [](const Eigen::VectorXcd& z) { return z.squaredNorm(); }, 2.0, 2, policy2);
    CHECK(z2.value.real() ==
          doctest::Approx(M_PI * M_PI / 4.0).epsilon(1e-10));

    // anharmonic vs radial oracle
    const double oracle = oracles::radial_integral(
        [](double r) { return std::exp(-(r * r + r * r * r * r)); }, 5.0);
    GridPolicy pu;
    pu.scheme = Scheme::UniformTensor;
    pu.radius = 4.0;
    pu.initial_points = 64;
    pu.max_level = 3;
    const RefineResult za = classical_partition(
        [](const Eigen::VectorXcd& z) {
            const double q = z.squaredNorm();
            return q + q * q;
        },
        1.0, 1, pu);
    CHECK(za.value.real() == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("boltzmann entropy closed forms") {
    QuadratureGrid grid = gauss_hermite_grid(1, 48, 1.0);
    // gamma_beta for h=|z|^2, beta=1: S_B = 1 + log pi
    const ClassicalDensity gamma = classical_gibbs(
        [](const Eigen::VectorXcd& z) { return z.squaredNorm(); }, 1.0, grid);
    CHECK(boltzmann_entropy(gamma) ==
          doctest::Approx(oracles::gaussian_entropy(1.0)).epsilon(1e-10));

    // beta = pi: S_B = 1 + log(pi/pi) = 1
    QuadratureGrid gpi = gauss_hermite_grid(1, 48, M_PI);
    const ClassicalDensity gamma_pi = classical_gibbs(
        [](const Eigen::VectorXcd& z) { return z.squaredNorm(); }, M_PI, gpi);
    CHECK(boltzmann_entropy(gamma_pi) == doctest::Approx(1.0).epsilon(1e-10));

    // uniform density on a disk of area A: S_B = log A
    const double r = 1.3, A = M_PI * r * r;
    QuadratureGrid uni = uniform_ball_grid(1, 2.0, 400);
    const ClassicalDensity disk = make_density(
        [r](const Eigen::VectorXcd& z) { return z.norm() <= r ? 1.0 : 0.0; }, uni);
    CHECK(boltzmann_entropy(disk) == doctest::Approx(std::log(A)).epsilon(0.01));

    // negative densities are rejected
    CHECK_THROWS_AS(make_density(
                        [](const Eigen::VectorXcd& z) {
                            return 1.0 - 2.0 * z.squaredNorm();
                        },
                        uni),
                    InvalidDensityError);
}

TEST_CASE("classical relative entropy") {
    QuadratureGrid grid = gauss_hermite_grid(1, 48, 1.0);
    const ClassicalDensity mu = make_density(
        [](const Eigen::VectorXcd& z) { return std::exp(-z.squaredNorm()); }, grid);
    CHECK(relative_entropy_classical(mu, mu) == doctest::Approx(0.0).scale(1.0));

    // exp(-|z|^2)/pi vs 2 exp(-2|z|^2)/pi: Gaussian KL oracle
    const ClassicalDensity nu = make_density(
        [](const Eigen::VectorXcd& z) { return std::exp(-2.0 * z.squaredNorm()); },
        grid);
    CHECK(relative_entropy_classical(mu, nu) ==
          doctest::Approx(oracles::gaussian_kl(1.0, 0.5)).epsilon(1e-9));
    CHECK(relative_entropy_classical(mu, nu) >= -1e-10);
    CHECK(relative_entropy_classical(nu, mu) ==
          doctest::Approx(oracles::gaussian_kl(0.5, 1.0)).epsilon(1e-9));

    // uniform disk vs gaussian: finite positive value vs a fine-grid oracle
    const double r = 1.1;
    QuadratureGrid uni = uniform_ball_grid(1, 4.0, 320);
    const auto fdisk = [r](const Eigen::VectorXcd& z) {
        return z.norm() <= r ? 1.0 : 0.0;
    };
    const auto fgauss = [](const Eigen::VectorXcd& z) {
        return std::exp(-z.squaredNorm());
    };
    const double kl = relative_entropy_classical(make_density(fdisk, uni),
                                                 make_density(fgauss, uni));
    QuadratureGrid fine = uniform_ball_grid(1, 4.0, 640);
    const double kl_ref = relative_entropy_classical(make_density(fdisk, fine),
                                                     make_density(fgauss, fine));
    CHECK(kl > 0.0);
    CHECK(std::isfinite(kl));
    CHECK(kl == doctest::Approx(kl_ref).epsilon(0.02));

    // +infinity when mu sits where nu vanishes
    const ClassicalDensity shifted = make_density(
        [](const Eigen::VectorXcd& z) {
            Eigen::VectorXcd c(1);
            c(0) = Complex(2.0, 0.0);
            return std::exp(-40.0 * (z - c).squaredNorm());
        },
        uni);
    const ClassicalDensity core = make_density(
        [](const Eigen::VectorXcd& z) { return z.norm() <= 0.5 ? 1.0 : 0.0; }, uni);
    CHECK(std::isinf(relative_entropy_classical(shifted, core)));
}

TEST_CASE("classical gibbs density values and upper-symbol shift invariance") {
    QuadratureGrid grid = gauss_hermite_grid(1, 48, 1.0);
    const ClassicalDensity gamma = classical_gibbs(
        [](const Eigen::VectorXcd& z) { return z.squaredNorm(); }, 1.0, grid);
    Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(1);
    CHECK(gamma.density(zero) == doctest::Approx(1.0 / M_PI).epsilon(1e-10));

    // constant shifts cancel after normalization: h^up = |z|^2 - eps
    const double eps = 0.37;
    const ClassicalDensity gamma_up = classical_gibbs(
        [eps](const Eigen::VectorXcd& z) { return z.squaredNorm() - eps; }, 1.0,
        grid);
    CHECK((gamma.values - gamma_up.values).cwiseAbs().maxCoeff() <= 1e-12);

    // weak convergence of the upper-symbol Gibbs family to gamma_beta:
    // an eps-dependent quartic correction, as in a genuine upper symbol
    const PhaseDensity b = [](const Eigen::VectorXcd& z) {
        return std::exp(-z.squaredNorm());
    };
    const double target = expectation(gamma, b);
    double prev_err = std::numeric_limits<double>::infinity();
    for (double e : {0.5, 0.125, 0.03125}) {
        const ClassicalDensity ge = classical_gibbs(
            [e](const Eigen::VectorXcd& z) {
                const double q = z.squaredNorm();
                return q + e * q * q - e;
            },
            1.0, grid);
        const double err = std::abs(expectation(ge, b) - target);
        CHECK(err <= prev_err + 1e-14);
        prev_err = err;
    }
    CHECK(prev_err <= 0.05);
}

TEST_CASE("classical characteristic function: gaussian fourier transform") {
    QuadratureGrid grid = gauss_hermite_grid(1, 48, 2.0);
    const double beta = 2.0;
    const ClassicalDensity gamma = classical_gibbs(
        [](const Eigen::VectorXcd& z) { return z.squaredNorm(); }, beta, grid);
    const double kappa = std::sqrt(2.0);
    for (double t : {0.3, 0.9, 1.7}) {
        Eigen::VectorXcd zeta(1);
        zeta(0) = Complex(t, 0.4 * t);
        const Complex g = classical_characteristic(gamma, zeta, kappa);
        const double expected =
            std::exp(-kappa * kappa * zeta.squaredNorm() / (4.0 * beta));
        CHECK(std::abs(g - Complex(expected, 0.0)) <= 1e-9);
    }
    Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(1);
    CHECK(std::abs(classical_characteristic(gamma, zero, kappa) - 1.0) <= 1e-12);
}
