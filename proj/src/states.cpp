#include "semi/states.hpp"

#include <cmath>

namespace semi {

namespace {
constexpr double kEigenClamp = -1e-10;
constexpr double kLogFloor = 1e-300;
constexpr double kSupportTol = 1e-13;
} // namespace

DensityMatrix::DensityMatrix(FockSpec spec, Eigen::VectorXd probs,
                             std::optional<Eigen::MatrixXcd> basis)
    : spec_(spec), probs_(std::move(probs)), basis_(std::move(basis)) {}

DensityMatrix DensityMatrix::from_matrix(const FockSpec& spec,
                                         const Eigen::MatrixXcd& rho,
                                         double trace_tol) {
    if (rho.rows() != spec.dim() || rho.cols() != spec.dim())
        throw ArgumentError("DensityMatrix: dimension mismatch");
    const double scale = std::max(rho.cwiseAbs().maxCoeff(), 1e-30);
    if (hermiticity_defect(rho) > 1e-10 * scale)
        throw ArgumentError("DensityMatrix: matrix is not Hermitian");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    if (es.info() != Eigen::Success)
        throw Error("DensityMatrix: eigendecomposition failed");
    Eigen::VectorXd lam = es.eigenvalues();
    const double trace = lam.sum();
    if (std::abs(trace - 1.0) > trace_tol)
        throw InvalidDensityError("DensityMatrix: trace " + std::to_string(trace) +
                                  " not within tolerance of 1");
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < kEigenClamp)
            throw InvalidDensityError("DensityMatrix: eigenvalue " +
                                      std::to_string(lam(i)) + " below clamp");
        if (lam(i) < 0.0) lam(i) = 0.0;
    }
    lam /= lam.sum();
    return DensityMatrix(spec, std::move(lam), es.eigenvectors());
}

DensityMatrix DensityMatrix::diagonal(const FockSpec& spec,
                                      const Eigen::VectorXd& probs) {
    if (probs.size() != spec.dim())
        throw ArgumentError("DensityMatrix::diagonal: size mismatch");
    Eigen::VectorXd p = probs;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) < kEigenClamp)
            throw InvalidDensityError("DensityMatrix::diagonal: negative weight");
        if (p(i) < 0.0) p(i) = 0.0;
    }
    const double trace = pairwise_sum(p);
    if (std::abs(trace - 1.0) > 1e-8)
        throw InvalidDensityError("DensityMatrix::diagonal: trace far from 1");
    p /= trace;
    return DensityMatrix(spec, std::move(p), std::nullopt);
}

DensityMatrix DensityMatrix::from_spectrum(const FockSpec& spec,
                                           Eigen::VectorXd probs,
                                           Eigen::MatrixXcd basis) {
    if (basis.rows() != spec.dim() || basis.cols() != probs.size())
        throw ArgumentError("DensityMatrix::from_spectrum: shape mismatch");
    for (Eigen::Index i = 0; i < probs.size(); ++i)
        if (probs(i) < 0.0) probs(i) = 0.0;
    const double trace = pairwise_sum(probs);
    if (std::abs(trace - 1.0) > 1e-8)
        throw InvalidDensityError("DensityMatrix::from_spectrum: trace far from 1");
    probs /= trace;
    return DensityMatrix(spec, std::move(probs), std::move(basis));
}

DensityMatrix DensityMatrix::pure(const FockSpec& spec, const Eigen::VectorXcd& psi) {
    if (psi.size() != spec.dim())
        throw ArgumentError("DensityMatrix::pure: size mismatch");
    const double n = psi.norm();
    if (n <= 0.0) throw ArgumentError("DensityMatrix::pure: zero vector");
    Eigen::MatrixXcd basis(spec.dim(), 1);
    basis.col(0) = psi / n;
    Eigen::VectorXd probs(1);
    probs(0) = 1.0;
    return DensityMatrix(spec, std::move(probs), std::move(basis));
}

const Eigen::MatrixXcd& DensityMatrix::basis() const {
    if (!basis_) throw Error("DensityMatrix::basis: state is Fock-diagonal");
    return *basis_;
}

Eigen::MatrixXcd DensityMatrix::matrix() const {
    detail::check_dense_dim(spec_.dim(), "DensityMatrix::matrix");
    if (fock_diagonal()) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(spec_.dim(), spec_.dim());
        m.diagonal() = probs_.cast<Complex>();
        return m;
    }
    return *basis_ * probs_.cast<Complex>().asDiagonal() * basis_->adjoint();
}

double DensityMatrix::occupation_tail_mass(double frac) const {
    const int threshold = static_cast<int>(frac * spec_.n_max);
    const Eigen::Index dim = spec_.dim();
    std::vector<bool> high(dim);
    for (Eigen::Index f = 0; f < dim; ++f) {
        bool h = false;
        Eigen::Index rest = f;
        for (int m = 0; m < spec_.modes; ++m) {
            if (static_cast<int>(rest % (spec_.n_max + 1)) > threshold) h = true;
            rest /= (spec_.n_max + 1);
        }
        high[f] = h;
    }
    if (fock_diagonal()) {
        double mass = 0.0;
        for (Eigen::Index f = 0; f < dim; ++f)
            if (high[f]) mass += probs_(f);
        return mass;
    }
    double mass = 0.0;
    for (Eigen::Index i = 0; i < rank(); ++i) {
        double overlap = 0.0;
        for (Eigen::Index f = 0; f < dim; ++f)
            if (high[f]) overlap += std::norm((*basis_)(f, i));
        mass += probs_(i) * overlap;
    }
    return mass;
}

SpectralHamiltonian SpectralHamiltonian::dense(const FockSpec& spec,
                                               const Eigen::MatrixXcd& H) {
    if (H.rows() != spec.dim() || H.cols() != spec.dim())
        throw ArgumentError("SpectralHamiltonian: dimension mismatch");
    const double scale = std::max(H.cwiseAbs().maxCoeff(), 1e-30);
    if (hermiticity_defect(H) > 1e-10 * scale)
        throw ArgumentError("SpectralHamiltonian: H not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    if (es.info() != Eigen::Success)
        throw Error("SpectralHamiltonian: eigendecomposition failed");
    return SpectralHamiltonian{spec, es.eigenvalues(), es.eigenvectors()};
}

SpectralHamiltonian SpectralHamiltonian::diagonal(const FockSpec& spec,
                                                  const Eigen::VectorXd& energies) {
    if (energies.size() != spec.dim())
        throw ArgumentError("SpectralHamiltonian: diagonal size mismatch");
    return SpectralHamiltonian{spec, energies, std::nullopt};
}

GibbsResult gibbs_state(const SpectralHamiltonian& H, double beta,
                        double top_weight_tol) {
    if (!(beta > 0.0)) throw ArgumentError("gibbs_state: beta must be > 0");
    const double e0 = H.energies.minCoeff();
    Eigen::VectorXd w = (-(beta * (H.energies.array() - e0))).exp().matrix();
    const double zs = pairwise_sum(w);
    const double log_Z = std::log(zs) - beta * e0;
    Eigen::VectorXd probs = w / zs;

    DensityMatrix state = H.vectors
        ? DensityMatrix::from_spectrum(H.spec, probs, *H.vectors)
        : DensityMatrix::diagonal(H.spec, probs);

    const double top = state.occupation_tail_mass(1.0 - 0.5 / H.spec.n_max);
    if (top > top_weight_tol)
        throw TruncationError("gibbs_state: top occupation sector carries " +
                                  std::to_string(top),
                              2 * H.spec.n_max);
    return GibbsResult{std::move(state), std::exp(log_Z), log_Z, top};
}

GibbsResult gibbs_state(const FockSpec& spec, const Eigen::MatrixXcd& H, double beta,
                        double top_weight_tol) {
    return gibbs_state(SpectralHamiltonian::dense(spec, H), beta, top_weight_tol);
}

double von_neumann_entropy(const DensityMatrix& rho) {
    Eigen::VectorXd terms(rho.rank());
    for (Eigen::Index i = 0; i < rho.rank(); ++i) terms(i) = -xlogx(rho.probs()(i));
    return pairwise_sum(terms);
}

namespace {

// <v_j| rho |v_j> for every column of the target basis (or the Fock basis).
Eigen::VectorXd diagonal_in_basis(const DensityMatrix& rho,
                                  const std::optional<Eigen::MatrixXcd>& basis,
                                  Eigen::Index target_rank) {
    if (!basis) {
        // Target is the Fock basis.
        if (rho.fock_diagonal()) return rho.probs();
        Eigen::VectorXd q = Eigen::VectorXd::Zero(target_rank);
        const Eigen::MatrixXcd& U = rho.basis();
        for (Eigen::Index i = 0; i < rho.rank(); ++i)
            q += rho.probs()(i) * U.col(i).cwiseAbs2();
        return q;
    }
    const Eigen::MatrixXcd& V = *basis;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(V.cols());
    if (rho.fock_diagonal()) {
        for (Eigen::Index j = 0; j < V.cols(); ++j)
            q(j) = V.col(j).cwiseAbs2().dot(rho.probs());
        return q;
    }
    const Eigen::MatrixXcd M = rho.basis().adjoint() * V;  // rank_rho x rank_sigma
    for (Eigen::Index j = 0; j < V.cols(); ++j)
        q(j) = M.col(j).cwiseAbs2().dot(rho.probs());
    return q;
}

} // namespace

double expectation_value(const DensityMatrix& rho, const SpectralHamiltonian& H) {
    if (!rho.spec().same_space(H.spec))
        throw ArgumentError("expectation_value: space mismatch");
    const Eigen::VectorXd q = diagonal_in_basis(rho, H.vectors, H.energies.size());
    return q.dot(H.energies);
}

double relative_entropy_vn(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (!rho.spec().same_space(sigma.spec()))
        throw ArgumentError("relative_entropy_vn: states live on different spaces");

    const std::optional<Eigen::MatrixXcd> sigma_basis =
        sigma.fock_diagonal() ? std::nullopt
                              : std::optional<Eigen::MatrixXcd>(sigma.basis());
    Eigen::VectorXd q = diagonal_in_basis(rho, sigma_basis, sigma.rank());

    // Mass of rho outside the recorded support of sigma.
    const double inside = pairwise_sum(q);
    if (1.0 - inside > kSupportTol)
        return std::numeric_limits<double>::infinity();

    double cross = 0.0;
    for (Eigen::Index j = 0; j < q.size(); ++j) {
        const double s = sigma.probs()(j);
        if (q(j) > kSupportTol && s < kLogFloor)
            return std::numeric_limits<double>::infinity();
        if (q(j) > 0.0) cross += q(j) * std::log(std::max(s, kLogFloor));
    }
    Eigen::VectorXd self_terms(rho.rank());
    for (Eigen::Index i = 0; i < rho.rank(); ++i)
        self_terms(i) = xlogx(rho.probs()(i));
    return pairwise_sum(self_terms) - cross;
}

namespace {

// f(z) = sum_flat p_flat prod_l Poisson(n_l; |z_l|^2/eps), log-space recurrence.
double husimi_value_diagonal(const FockSpec& spec, const Eigen::VectorXd& probs,
                             const Eigen::VectorXcd& z) {
    const int width = spec.n_max + 1;
    Eigen::MatrixXd pmf(spec.modes, width);
    for (int l = 0; l < spec.modes; ++l) {
        const double lambda = std::norm(z(l)) / spec.eps;
        if (lambda == 0.0) {
            pmf.row(l).setZero();
            pmf(l, 0) = 1.0;
            continue;
        }
        const double loglam = std::log(lambda);
        double lp = -lambda;
        for (int n = 0; n < width; ++n) {
            pmf(l, n) = lp < -745.0 ? 0.0 : std::exp(lp);
            lp += loglam - std::log(n + 1.0);
        }
    }
    if (spec.modes == 1) return pmf.row(0).dot(probs);

    double total = 0.0;
    const Eigen::Index dim = spec.dim();
    for (Eigen::Index f = 0; f < dim; ++f) {
        if (probs(f) == 0.0) continue;
        double w = probs(f);
        Eigen::Index rest = f;
        for (int l = spec.modes - 1; l >= 0; --l) {
            w *= pmf(l, static_cast<int>(rest % width));
            rest /= width;
        }
        total += w;
    }
    return total;
}

} // namespace

HusimiField husimi(const DensityMatrix& rho, const QuadratureGrid& grid,
                   double deficit_tol) {
    const FockSpec& spec = rho.spec();
    if (grid.modes != spec.modes)
        throw ArgumentError("husimi: grid mode mismatch");

    // The absolute Husimi error at any z is bounded by the state's mass near
    // the cutoff. When that spill is negligible, far nodes correctly read ~0
    // even though their coherent vectors are not representable; otherwise
    // every node must satisfy the deficit tolerance.
    const double tail = rho.occupation_tail_mass(0.98);
    if (tail > 1e-10) {
        const double worst = grid.radius;
        const double deficit = poisson_tail(worst * worst / spec.eps, spec.n_max);
        if (deficit > deficit_tol)
            throw TruncationError(
                "husimi: cutoff too small for grid radius " + std::to_string(worst),
                n_max_for_radius(spec.eps, worst, deficit_tol));
    }

    HusimiField field;
    field.grid = grid;
    field.eps = spec.eps;
    field.values.resize(grid.size());

    if (rho.fock_diagonal()) {
        Eigen::VectorXcd z(spec.modes);
        for (Eigen::Index k = 0; k < grid.size(); ++k) {
            z = grid.nodes.row(k);
            field.values(k) = husimi_value_diagonal(spec, rho.probs(), z);
        }
    } else {
        const Eigen::MatrixXcd& basis = rho.basis();
        const Eigen::Index chunk = 1024;
        Eigen::VectorXcd z(spec.modes);
        for (Eigen::Index start = 0; start < grid.size(); start += chunk) {
            const Eigen::Index count = std::min(chunk, grid.size() - start);
            Eigen::MatrixXcd C(count, spec.dim());
            for (Eigen::Index k = 0; k < count; ++k) {
                z = grid.nodes.row(start + k);
                C.row(k) = coherent_vector(spec, z, 1.0).v.conjugate().transpose();
            }
            const Eigen::MatrixXcd T = C * basis;  // count x rank
            field.values.segment(start, count) = T.cwiseAbs2() * rho.probs();
        }
    }

    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        if (field.values(k) < 0.0) field.values(k) = 0.0;
        if (field.values(k) > 1.0 + 1e-10)
            throw Error("husimi: value above 1 beyond tolerance");
    }
    const double measure = std::pow(M_PI * spec.eps, spec.modes);
    field.normalization_check = integrate(field.values, grid) / measure;
    return field;
}

double wehrl_entropy(const HusimiField& field) {
    const double measure = std::pow(M_PI * field.eps, field.grid.modes);
    Eigen::VectorXd terms(field.grid.size());
    for (Eigen::Index k = 0; k < field.grid.size(); ++k)
        terms(k) = -field.grid.weights(k) * xlogx(field.values(k)) / measure;
    return pairwise_sum(terms);
}

double wehrl_relative_entropy(const HusimiField& f_rho, const HusimiField& f_sigma) {
    if (f_rho.grid.size() != f_sigma.grid.size())
        throw ArgumentError("wehrl_relative_entropy: grids differ");
    if (f_rho.eps != f_sigma.eps)
        throw ArgumentError("wehrl_relative_entropy: eps differ");
    const double measure = std::pow(M_PI * f_rho.eps, f_rho.grid.modes);
    Eigen::VectorXd terms(f_rho.grid.size());
    for (Eigen::Index k = 0; k < f_rho.grid.size(); ++k) {
        const double f = f_rho.values(k);
        const double g = f_sigma.values(k);
        if (f > 1e-250 && g < kLogFloor)
            return std::numeric_limits<double>::infinity();
        terms(k) = f <= 0.0 ? 0.0
                            : f_rho.grid.weights(k) * f *
                                  (std::log(f) - std::log(std::max(g, kLogFloor))) /
                                  measure;
    }
    return pairwise_sum(terms);
}

double wehrl_relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma,
                              const QuadratureGrid& grid) {
    return wehrl_relative_entropy(husimi(rho, grid), husimi(sigma, grid));
}

double coherent_expectation(const SpectralHamiltonian& H, double beta,
                            const Eigen::VectorXcd& z, double deficit_tol) {
    const FockSpec& spec = H.spec;
    CoherentVector cv = coherent_vector(spec, z, deficit_tol);
    if (cv.deficit > deficit_tol) {
        // Same spill rule as husimi(): when exp(-beta H) has negligible mass
        // near the cutoff, far points correctly evaluate to ~0.
        const double e0 = H.energies.minCoeff();
        Eigen::VectorXd w = (-(beta * (H.energies.array() - e0))).exp().matrix();
        w /= w.sum();
        const DensityMatrix proxy =
            H.vectors ? DensityMatrix::from_spectrum(spec, w, *H.vectors)
                      : DensityMatrix::diagonal(spec, w);
        if (proxy.occupation_tail_mass(0.98) > 1e-10)
            throw TruncationError("coherent_expectation: deficit above tolerance",
                                  n_max_for_radius(spec.eps, z.norm(), deficit_tol));
    }
    Eigen::VectorXd overlap2;
    if (H.vectors)
        overlap2 = (H.vectors->adjoint() * cv.v).cwiseAbs2();
    else
        overlap2 = cv.v.cwiseAbs2();
    Eigen::VectorXd terms(overlap2.size());
    for (Eigen::Index i = 0; i < overlap2.size(); ++i) {
        const double e = -beta * H.energies(i);
        terms(i) = e < -745.0 ? 0.0 : overlap2(i) * std::exp(e);
    }
    return pairwise_sum(terms);
}

Complex characteristic_function(const DensityMatrix& rho,
                                const Eigen::VectorXcd& zeta) {
    const Eigen::MatrixXcd W = weyl_operator(rho.spec(), zeta);
    if (rho.fock_diagonal())
        return rho.probs().cast<Complex>().dot(W.diagonal());
    Complex total = 0.0;
    const Eigen::MatrixXcd& U = rho.basis();
    for (Eigen::Index i = 0; i < rho.rank(); ++i)
        total += rho.probs()(i) * (U.col(i).dot(W * U.col(i)));
    return total;
}

double calibrate_characteristic_kappa() {
    const FockSpec spec(1, 48, 0.25);
    Eigen::VectorXcd w(1), zeta(1);
    w(0) = Complex(0.8, 0.0);
    zeta(0) = Complex(0.6, 0.0);
    const DensityMatrix rho = DensityMatrix::pure(spec, coherent_vector(spec, w).v);
    const Complex g = characteristic_function(rho, zeta);
    const double re_zw = zeta.dot(w).real();
    return std::arg(g) / re_zw;
}

double assumption_A_norm(const SpectralHamiltonian& H, double beta, int k) {
    if (k < 0) throw ArgumentError("assumption_A_norm: k must be >= 0");
    const FockSpec& spec = H.spec;
    const Eigen::VectorXd nvec = number_diagonal(spec);

    if (!H.vectors) {
        double best = -std::numeric_limits<double>::infinity();
        for (Eigen::Index f = 0; f < spec.dim(); ++f) {
            const double le = k * std::log(nvec(f) + spec.eps) - beta * H.energies(f);
            best = std::max(best, le);
        }
        return std::exp(best);
    }

    detail::check_dense_dim(spec.dim(), "assumption_A_norm");
    const double e0 = H.energies.minCoeff();
    const Eigen::VectorXd boltz = (-(beta * (H.energies.array() - e0))).exp().matrix();
    Eigen::MatrixXcd expH = *H.vectors * boltz.cast<Complex>().asDiagonal() *
                            H.vectors->adjoint();
    Eigen::VectorXd weight = (nvec.array() + spec.eps).pow(0.5 * k).matrix();
    Eigen::MatrixXcd B = weight.cast<Complex>().asDiagonal() * expH *
                         weight.cast<Complex>().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff() * std::exp(-beta * e0);
}

} // namespace semi
