#include "semi/fock.hpp"

#include <algorithm>
#include <cmath>

namespace semi {

namespace {
constexpr Eigen::Index kDenseDimCap = 4096;
constexpr Eigen::Index kVectorDimCap = Eigen::Index(1) << 26;
} // namespace

namespace detail {
void check_dense_dim(Eigen::Index dim, const char* what) {
    if (dim > kDenseDimCap)
        throw ResourceError(std::string(what) + ": dense dimension " +
                            std::to_string(dim) + " exceeds cap " +
                            std::to_string(kDenseDimCap));
}
} // namespace detail

FockSpec::FockSpec(int d, int nmax, double epsilon)
    : modes(d), n_max(nmax), eps(epsilon) {
    if (d < 1) throw ArgumentError("FockSpec: modes must be >= 1");
    if (nmax < 1) throw ArgumentError("FockSpec: n_max must be >= 1");
    if (!(epsilon > 0.0)) throw ArgumentError("FockSpec: eps must be > 0");
    long double dd = 1.0L;
    for (int j = 0; j < d; ++j) {
        dd *= (nmax + 1);
        if (dd > static_cast<long double>(kVectorDimCap))
            throw ResourceError("FockSpec: basis dimension exceeds cap");
    }
}

Eigen::Index FockSpec::dim() const {
    Eigen::Index d = 1;
    for (int j = 0; j < modes; ++j) d *= (n_max + 1);
    return d;
}

Eigen::Index FockSpec::flat_index(const std::vector<int>& occ) const {
    if (static_cast<int>(occ.size()) != modes)
        throw ArgumentError("flat_index: occupation length mismatch");
    Eigen::Index f = 0;
    for (int j = 0; j < modes; ++j) {
        if (occ[j] < 0 || occ[j] > n_max)
            throw ArgumentError("flat_index: occupation out of range");
        f = f * (n_max + 1) + occ[j];
    }
    return f;
}

std::vector<int> FockSpec::occupation(Eigen::Index flat) const {
    std::vector<int> occ(modes);
    for (int j = modes - 1; j >= 0; --j) {
        occ[j] = static_cast<int>(flat % (n_max + 1));
        flat /= (n_max + 1);
    }
    return occ;
}

int FockSpec::occupation_of_mode(Eigen::Index flat, int mode) const {
    Eigen::Index stride = 1;
    for (int j = modes - 1; j > mode; --j) stride *= (n_max + 1);
    return static_cast<int>((flat / stride) % (n_max + 1));
}

int FockSpec::total_occupation(Eigen::Index flat) const {
    int tot = 0;
    for (int j = 0; j < modes; ++j) {
        tot += static_cast<int>(flat % (n_max + 1));
        flat /= (n_max + 1);
    }
    return tot;
}

bool FockSpec::same_space(const FockSpec& other) const {
    return modes == other.modes && n_max == other.n_max && eps == other.eps;
}

Eigen::VectorXcd vacuum(const FockSpec& spec) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(spec.dim());
    v(0) = 1.0;
    return v;
}

Eigen::MatrixXcd annihilator(const FockSpec& spec, int mode) {
    if (mode < 0 || mode >= spec.modes)
        throw ArgumentError("annihilator: mode index out of range");
    const Eigen::Index dim = spec.dim();
    detail::check_dense_dim(dim, "annihilator");
    Eigen::Index stride = 1;
    for (int j = spec.modes - 1; j > mode; --j) stride *= (spec.n_max + 1);

    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        const int n = static_cast<int>((col / stride) % (spec.n_max + 1));
        if (n >= 1) a(col - stride, col) = std::sqrt(spec.eps * n);
    }
    return a;
}

Eigen::MatrixXcd creator(const FockSpec& spec, int mode) {
    return annihilator(spec, mode).adjoint();
}

Eigen::MatrixXcd annihilator(const FockSpec& spec, const Eigen::VectorXcd& z) {
    if (z.size() != spec.modes)
        throw ArgumentError("annihilator(z): dimension mismatch");
    const Eigen::Index dim = spec.dim();
    detail::check_dense_dim(dim, "annihilator");
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    for (int j = 0; j < spec.modes; ++j)
        if (z(j) != 0.0) a += std::conj(z(j)) * annihilator(spec, j);
    return a;
}

Eigen::MatrixXcd creator(const FockSpec& spec, const Eigen::VectorXcd& z) {
    return annihilator(spec, z).adjoint();
}

Eigen::VectorXd number_diagonal(const FockSpec& spec) {
    const Eigen::Index dim = spec.dim();
    Eigen::VectorXd diag(dim);
    for (Eigen::Index f = 0; f < dim; ++f)
        diag(f) = spec.eps * spec.total_occupation(f);
    return diag;
}

Eigen::MatrixXcd number_operator(const FockSpec& spec) {
    const Eigen::Index dim = spec.dim();
    detail::check_dense_dim(dim, "number_operator");
    return number_diagonal(spec).cast<Complex>().asDiagonal();
}

namespace {

// Per-mode coherent amplitudes in log-magnitude + phase form.
void mode_amplitudes(double eps, Complex zj, int n_max,
                     Eigen::VectorXcd& out) {
    out.resize(n_max + 1);
    if (zj == 0.0) {
        out.setZero();
        out(0) = 1.0;
        return;
    }
    const double lambda = std::norm(zj) / eps;
    const double logmod = 0.5 * std::log(lambda);  // log |z_j / sqrt(eps)|
    const double phase = std::arg(zj);
    for (int n = 0; n <= n_max; ++n) {
        const double lm = -0.5 * lambda + n * logmod - 0.5 * std::lgamma(n + 1.0);
        const double mag = lm < -745.0 ? 0.0 : std::exp(lm);
        out(n) = std::polar(mag, n * phase);
    }
}

} // namespace

CoherentVector coherent_vector(const FockSpec& spec, const Eigen::VectorXcd& z,
                               double deficit_tol) {
    if (z.size() != spec.modes)
        throw ArgumentError("coherent_vector: dimension mismatch");
    std::vector<Eigen::VectorXcd> per_mode(spec.modes);
    double kept = 1.0;
    for (int j = 0; j < spec.modes; ++j) {
        mode_amplitudes(spec.eps, z(j), spec.n_max, per_mode[j]);
        kept *= 1.0 - poisson_tail(std::norm(z(j)) / spec.eps, spec.n_max);
    }

    CoherentVector result;
    result.v.resize(spec.dim());
    if (spec.modes == 1) {
        result.v = per_mode[0];
    } else {
        const Eigen::Index dim = spec.dim();
        for (Eigen::Index f = 0; f < dim; ++f) {
            Complex amp = 1.0;
            Eigen::Index rest = f;
            for (int j = spec.modes - 1; j >= 0; --j) {
                amp *= per_mode[j](rest % (spec.n_max + 1));
                rest /= (spec.n_max + 1);
            }
            result.v(f) = amp;
        }
    }
    result.deficit = std::max(0.0, 1.0 - kept);
    result.truncation_warning = result.deficit > deficit_tol;
    return result;
}

Complex coherent_overlap(double eps, const Eigen::VectorXcd& z,
                         const Eigen::VectorXcd& w) {
    const Complex zw = z.dot(w);  // sum conj(z_j) w_j
    return std::exp((-0.5 * (z.squaredNorm() + w.squaredNorm()) + zw) / eps);
}

Eigen::MatrixXcd weyl_operator(const FockSpec& spec, const Eigen::VectorXcd& zeta) {
    const Eigen::Index dim = spec.dim();
    detail::check_dense_dim(dim, "weyl_operator");
    const Eigen::MatrixXcd a = annihilator(spec, zeta);
    const Eigen::MatrixXcd gen = (a + a.adjoint()) / std::sqrt(2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gen);
    if (es.info() != Eigen::Success)
        throw Error("weyl_operator: eigendecomposition failed");
    const Eigen::VectorXcd phases =
        (Complex(0, 1) * es.eigenvalues().cast<Complex>().array()).exp().matrix();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Complex weyl_matrix_element(double eps, const Eigen::VectorXcd& z,
                            const Eigen::VectorXcd& w,
                            const Eigen::VectorXcd& zeta) {
    // BCH in standard (eps=1) displacement variables: beta = z/sqrt(eps),
    // alpha = i sqrt(eps/2) zeta, and
    // <b1|D(alpha)|b2> = exp(-|b1|^2/2 - |b2|^2/2 - |alpha|^2/2
    //                        - <alpha|b2> + <b1|alpha> + <b1|b2>).
    const double s = std::sqrt(eps);
    const Eigen::VectorXcd b1 = z / s;
    const Eigen::VectorXcd b2 = w / s;
    const Eigen::VectorXcd alpha = Complex(0, 1) * std::sqrt(eps / 2.0) * zeta;
    const Complex expo = -0.5 * (b1.squaredNorm() + b2.squaredNorm() +
                                 alpha.squaredNorm()) -
                         alpha.dot(b2) + b1.dot(alpha) + b1.dot(b2);
    return std::exp(expo);
}

double hermiticity_defect(const Eigen::MatrixXcd& A) {
    return (A - A.adjoint()).cwiseAbs().maxCoeff();
}

double ccr_defect_pair(const FockSpec& spec, int mode_j, int mode_k,
                       bool interior_only) {
    const Eigen::MatrixXcd aj = annihilator(spec, mode_j);
    const Eigen::MatrixXcd ak_dag = creator(spec, mode_k);
    Eigen::MatrixXcd comm = aj * ak_dag - ak_dag * aj;
    if (mode_j == mode_k)
        comm -= spec.eps * Eigen::MatrixXcd::Identity(spec.dim(), spec.dim());

    if (!interior_only) return comm.cwiseAbs().maxCoeff();

    double defect = 0.0;
    const Eigen::Index dim = spec.dim();
    std::vector<bool> interior(dim);
    for (Eigen::Index f = 0; f < dim; ++f) {
        bool ok = true;
        Eigen::Index rest = f;
        for (int m = 0; m < spec.modes; ++m) {
            if (static_cast<int>(rest % (spec.n_max + 1)) > spec.n_max - 1) ok = false;
            rest /= (spec.n_max + 1);
        }
        interior[f] = ok;
    }
    for (Eigen::Index r = 0; r < dim; ++r) {
        if (!interior[r]) continue;
        for (Eigen::Index c = 0; c < dim; ++c)
            if (interior[c]) defect = std::max(defect, std::abs(comm(r, c)));
    }
    return defect;
}

double ccr_defect(const FockSpec& spec, bool interior_only) {
    double defect = 0.0;
    for (int j = 0; j < spec.modes; ++j)
        for (int k = 0; k < spec.modes; ++k)
            defect = std::max(defect, ccr_defect_pair(spec, j, k, interior_only));
    return defect;
}

double poisson_tail(double lambda, int n) {
    if (lambda <= 0.0) return 0.0;
    if (n < 0) return 1.0;
    auto logpmf = [&](double k) {
        return k * std::log(lambda) - lambda - std::lgamma(k + 1.0);
    };
    if (static_cast<double>(n) + 1.0 > lambda) {
        // Sum the tail forward from n+1; terms decay geometrically.
        const double l0 = logpmf(n + 1.0);
        if (l0 < -745.0) return 0.0;
        double t = std::exp(l0), s = 0.0;
        for (int k = n + 1; k < n + 1000000; ++k) {
            s += t;
            t *= lambda / (k + 1);
            if (t < s * 1e-18 || t < 1e-320) break;
        }
        return std::min(s, 1.0);
    }
    // Cutoff below the bulk: compute the cdf backward instead.
    const double l0 = logpmf(n);
    if (l0 < -745.0) return 1.0;
    double t = std::exp(l0), s = 0.0;
    for (int k = n; k >= 0; --k) {
        s += t;
        if (k > 0) t *= k / lambda;
        if (t < s * 1e-18 || t < 1e-320) break;
    }
    return std::clamp(1.0 - s, 0.0, 1.0);
}

int n_max_for_radius(double eps, double radius, double deficit_tol) {
    const double lambda = radius * radius / eps;
    int lo = static_cast<int>(lambda);
    int hi = static_cast<int>(lambda + 20.0 * std::sqrt(lambda + 1.0) + 60.0);
    if (poisson_tail(lambda, lo) <= deficit_tol) {
        lo = 1;
    }
    while (lo < hi) {
        const int mid = lo + (hi - lo) / 2;
        if (poisson_tail(lambda, mid) <= deficit_tol)
            hi = mid;
        else
            lo = mid + 1;
    }
    return std::max(1, lo);
}

} // namespace semi
