#include "semi/quadrature.hpp"

#include <cmath>
#include <limits>

namespace semi {

namespace {

/* Gauss-Hermite nodes by Golub-Welsch; Lebesgue-form weights through the
   Christoffel function, w_leb(x) = 1 / sum_{k<n} psi_k(x)^2 with the
   orthonormal Hermite functions psi_k. The eigenvector route would need
   exp(-x^2/2) tails far below machine precision at edge nodes; the
   Hermite-function recurrence stays in representable range throughout. */
void hermite_rule(int n, Eigen::VectorXd& x, Eigen::VectorXd& w_leb) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) {
        const double b = std::sqrt((k + 1) / 2.0);
        jac(k, k + 1) = b;
        jac(k + 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw Error("hermite_rule: eigendecomposition failed");
    x = es.eigenvalues();
    w_leb.resize(n);
    for (int i = 0; i < n; ++i) {
        const double xi = x(i);
        double prev = 0.0;
        double cur = std::pow(M_PI, -0.25) * std::exp(-0.5 * xi * xi);
        double sum = cur * cur;
        for (int k = 0; k + 1 < n; ++k) {
            const double next = std::sqrt(2.0 / (k + 1)) * xi * cur -
                                (k > 0 ? std::sqrt(double(k) / (k + 1)) * prev : 0.0);
            prev = cur;
            cur = next;
            sum += cur * cur;
        }
        w_leb(i) = 1.0 / sum;
    }
}

} // namespace

QuadratureGrid gauss_hermite_grid(int modes, int points_per_axis, double rate) {
    if (modes < 1) throw ArgumentError("gauss_hermite_grid: modes must be >= 1");
    if (points_per_axis < 2 || points_per_axis > 512)
        throw ArgumentError("gauss_hermite_grid: points_per_axis out of range");
    if (!(rate > 0.0)) throw ArgumentError("gauss_hermite_grid: rate must be > 0");

    Eigen::VectorXd x, w_leb;
    hermite_rule(points_per_axis, x, w_leb);

    const int axes = 2 * modes;
    double total = 1.0;
    for (int a = 0; a < axes; ++a) {
        total *= points_per_axis;
        if (total > 6.0e7) throw ResourceError("gauss_hermite_grid: node budget exceeded");
    }
    const Eigen::Index count = static_cast<Eigen::Index>(total);

    // Substitute x -> x/sqrt(rate) for the exp(-rate x^2) profile.
    Eigen::VectorXd pos(points_per_axis), wleb(points_per_axis);
    for (int i = 0; i < points_per_axis; ++i) {
        pos(i) = x(i) / std::sqrt(rate);
        wleb(i) = w_leb(i) / std::sqrt(rate);
    }

    QuadratureGrid grid;
    grid.modes = modes;
    grid.scheme = Scheme::GaussHermiteTensor;
    grid.rate = rate;
    grid.points_per_axis = points_per_axis;
    grid.nodes.resize(count, modes);
    grid.weights.resize(count);

    std::vector<int> idx(axes, 0);
    for (Eigen::Index k = 0; k < count; ++k) {
        double w = 1.0, norm2 = 0.0;
        for (int m = 0; m < modes; ++m) {
            const double re = pos(idx[2 * m]);
            const double im = pos(idx[2 * m + 1]);
            grid.nodes(k, m) = Complex(re, im);
            w *= wleb(idx[2 * m]) * wleb(idx[2 * m + 1]);
            norm2 += re * re + im * im;
        }
        grid.weights(k) = w;
        grid.radius = std::max(grid.radius, std::sqrt(norm2));
        for (int a = axes - 1; a >= 0; --a) {
            if (++idx[a] < points_per_axis) break;
            idx[a] = 0;
        }
    }
    return grid;
}

QuadratureGrid uniform_ball_grid(int modes, double radius, int points_per_axis) {
    if (modes < 1) throw ArgumentError("uniform_ball_grid: modes must be >= 1");
    if (!(radius > 0.0)) throw ArgumentError("uniform_ball_grid: radius must be > 0");
    if (points_per_axis < 2) throw ArgumentError("uniform_ball_grid: too few points");

    const int axes = 2 * modes;
    double total = 1.0;
    for (int a = 0; a < axes; ++a) {
        total *= points_per_axis;
        if (total > 3.0e8) throw ResourceError("uniform_ball_grid: node budget exceeded");
    }
    const double h = 2.0 * radius / points_per_axis;
    const double cell = std::pow(h, axes);

    QuadratureGrid grid;
    grid.modes = modes;
    grid.scheme = Scheme::UniformTensor;
    grid.radius = radius;
    grid.points_per_axis = points_per_axis;

    std::vector<Complex> nodes;
    std::vector<double> weights;
    nodes.reserve(static_cast<size_t>(total) * modes);
    std::vector<int> idx(axes, 0);
    const Eigen::Index count = static_cast<Eigen::Index>(total);
    std::vector<Complex> pt(modes);
    for (Eigen::Index k = 0; k < count; ++k) {
        double norm2 = 0.0;
        for (int m = 0; m < modes; ++m) {
            const double re = -radius + (idx[2 * m] + 0.5) * h;
            const double im = -radius + (idx[2 * m + 1] + 0.5) * h;
            pt[m] = Complex(re, im);
            norm2 += re * re + im * im;
        }
        if (norm2 <= radius * radius) {
            for (int m = 0; m < modes; ++m) nodes.push_back(pt[m]);
            weights.push_back(cell);
        }
        for (int a = axes - 1; a >= 0; --a) {
            if (++idx[a] < points_per_axis) break;
            idx[a] = 0;
        }
    }

    const Eigen::Index kept = static_cast<Eigen::Index>(weights.size());
    grid.nodes.resize(kept, modes);
    grid.weights.resize(kept);
    for (Eigen::Index k = 0; k < kept; ++k) {
        for (int m = 0; m < modes; ++m) grid.nodes(k, m) = nodes[k * modes + m];
        grid.weights(k) = weights[k];
    }
    return grid;
}

QuadratureGrid GridPolicy::build(int modes, int level) const {
    if (scheme == Scheme::GaussHermiteTensor) {
        const long pts = static_cast<long>(initial_points) << level;
        if (pts > max_points_per_axis)
            throw ConvergenceError("GridPolicy: Gauss-Hermite axis budget exceeded");
        QuadratureGrid g = gauss_hermite_grid(modes, static_cast<int>(pts), rate);
        g.level = level;
        return g;
    }
    // Uniform scheme: each level doubles both the ball radius and the node
    // density, so the per-axis count grows by 4.
    const double r = radius * static_cast<double>(1 << level);
    const long pts = static_cast<long>(initial_points) << (2 * level);
    QuadratureGrid g = uniform_ball_grid(modes, r, static_cast<int>(pts));
    g.level = level;
    return g;
}

Complex integrate(const PhaseFunction& g, const QuadratureGrid& grid) {
    Eigen::VectorXcd vals(grid.size());
    Eigen::VectorXcd z(grid.modes);
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        z = grid.nodes.row(k);
        vals(k) = grid.weights(k) * g(z);
    }
    return pairwise_sum(vals);
}

double integrate(const Eigen::VectorXd& node_values, const QuadratureGrid& grid) {
    if (node_values.size() != grid.size())
        throw ArgumentError("integrate: node value count mismatch");
    Eigen::VectorXd vals = grid.weights.cwiseProduct(node_values);
    return pairwise_sum(vals);
}

Complex integrate(const Eigen::VectorXcd& node_values, const QuadratureGrid& grid) {
    if (node_values.size() != grid.size())
        throw ArgumentError("integrate: node value count mismatch");
    Eigen::VectorXcd vals = grid.weights.cast<Complex>().cwiseProduct(node_values);
    return pairwise_sum(vals);
}

RefineResult refine_until(const PhaseFunction& g, int modes,
                          const GridPolicy& policy, double rel_tol) {
    RefineResult res;
    bool have_prev = false;
    Complex prev{0.0, 0.0};
    for (int level = 0; level <= policy.max_level; ++level) {
        QuadratureGrid grid;
        try {
            grid = policy.build(modes, level);
        } catch (const ResourceError&) {
            break;
        } catch (const ConvergenceError&) {
            break;
        }
        const Complex value = integrate(g, grid);
        res.history.push_back(value);
        if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
            throw ConvergenceError("refine_until: integral not finite");
        if (have_prev) {
            const double scale = std::max(1.0, std::abs(value));
            if (std::abs(value - prev) <= rel_tol * scale) {
                res.value = value;
                res.grid = std::move(grid);
                return res;
            }
        }
        prev = value;
        have_prev = true;
        res.grid = std::move(grid);
    }
    throw ConvergenceError("refine_until: no convergence within level budget");
}

RefineResult refine_until(const PhaseFunction& g, int modes,
                          const GridPolicy& policy) {
    return refine_until(g, modes, policy, policy.rel_tol);
}

ClassicalDensity make_density(const PhaseDensity& raw_f, const QuadratureGrid& grid) {
    ClassicalDensity mu;
    mu.grid = grid;
    mu.values.resize(grid.size());
    Eigen::VectorXcd z(grid.modes);
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        z = grid.nodes.row(k);
        const double v = raw_f(z);
        if (v < -1e-12)
            throw InvalidDensityError("make_density: negative density value " +
                                      std::to_string(v));
        mu.values(k) = std::max(v, 0.0);
    }
    mu.normalization = integrate(mu.values, grid);
    if (!(mu.normalization > 0.0) || !std::isfinite(mu.normalization))
        throw InvalidDensityError("make_density: density integrates to " +
                                  std::to_string(mu.normalization));
    mu.values /= mu.normalization;
    const double norm = mu.normalization;
    mu.density = [raw_f, norm](const Eigen::VectorXcd& zz) {
        return std::max(raw_f(zz), 0.0) / norm;
    };
    return mu;
}

RefineResult classical_partition(const PhaseDensity& h, double beta, int modes,
                                 const GridPolicy& policy) {
    if (!(beta > 0.0)) throw ArgumentError("classical_partition: beta must be > 0");
    PhaseFunction g = [&h, beta](const Eigen::VectorXcd& z) {
        return Complex(std::exp(-beta * h(z)), 0.0);
    };
    return refine_until(g, modes, policy);
}

ClassicalDensity classical_gibbs(const PhaseDensity& h, double beta,
                                 const QuadratureGrid& grid) {
    PhaseDensity f = [h, beta](const Eigen::VectorXcd& z) {
        return std::exp(-beta * h(z));
    };
    return make_density(f, grid);
}

double boltzmann_entropy(const ClassicalDensity& mu) {
    Eigen::VectorXd terms(mu.grid.size());
    for (Eigen::Index k = 0; k < mu.grid.size(); ++k) {
        const double f = mu.values(k);
        if (f < -1e-12)
            throw InvalidDensityError("boltzmann_entropy: negative density");
        terms(k) = -mu.grid.weights(k) * xlogx(std::max(f, 0.0));
    }
    return pairwise_sum(terms);
}

double relative_entropy_classical(const ClassicalDensity& mu,
                                  const ClassicalDensity& nu) {
    if (mu.grid.size() != nu.grid.size())
        throw ArgumentError("relative_entropy_classical: grids differ");
    constexpr double kFloor = 1e-300;
    Eigen::VectorXd terms(mu.grid.size());
    for (Eigen::Index k = 0; k < mu.grid.size(); ++k) {
        const double f = std::max(mu.values(k), 0.0);
        const double g = std::max(nu.values(k), 0.0);
        if (f > 1e-250 && g < kFloor)
            return std::numeric_limits<double>::infinity();
        if (f < kFloor) {
            terms(k) = 0.0;
            continue;
        }
        terms(k) = mu.grid.weights(k) * f *
                   (std::log(f) - std::log(std::max(g, kFloor)));
    }
    return pairwise_sum(terms);
}

Complex classical_characteristic(const ClassicalDensity& mu,
                                 const Eigen::VectorXcd& zeta, double kappa) {
    Eigen::VectorXcd terms(mu.grid.size());
    Eigen::VectorXcd z(mu.grid.modes);
    for (Eigen::Index k = 0; k < mu.grid.size(); ++k) {
        z = mu.grid.nodes.row(k);
        const double phase = kappa * zeta.dot(z).real();
        terms(k) = mu.grid.weights(k) * mu.values(k) *
                   Complex(std::cos(phase), std::sin(phase));
    }
    return pairwise_sum(terms);
}

double expectation(const ClassicalDensity& mu, const PhaseDensity& g) {
    Eigen::VectorXd terms(mu.grid.size());
    Eigen::VectorXcd z(mu.grid.modes);
    for (Eigen::Index k = 0; k < mu.grid.size(); ++k) {
        z = mu.grid.nodes.row(k);
        terms(k) = mu.grid.weights(k) * mu.values(k) * g(z);
    }
    return pairwise_sum(terms);
}

} // namespace semi
