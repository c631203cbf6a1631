#include "semi/symbols.hpp"

#include <cmath>
#include <sstream>

namespace semi {

namespace {
constexpr double kPruneTol = 0.0;  // exact zero pruning only

int index_sum(const std::vector<int>& v) {
    int s = 0;
    for (int x : v) s += x;
    return s;
}
} // namespace

PolySymbol::PolySymbol(int modes) : modes_(modes) {
    if (modes < 1) throw ArgumentError("PolySymbol: modes must be >= 1");
}

PolySymbol PolySymbol::monomial(int modes, std::vector<int> conj_powers,
                                std::vector<int> powers, Complex coeff) {
    PolySymbol s(modes);
    s.add_term(std::move(conj_powers), std::move(powers), coeff);
    return s;
}

PolySymbol PolySymbol::constant(int modes, Complex c) {
    return monomial(modes, std::vector<int>(modes, 0), std::vector<int>(modes, 0), c);
}

PolySymbol PolySymbol::norm_squared(int modes) {
    PolySymbol s(modes);
    for (int l = 0; l < modes; ++l) {
        std::vector<int> i(modes, 0), j(modes, 0);
        i[l] = 1;
        j[l] = 1;
        s.add_term(i, j, 1.0);
    }
    return s;
}

PolySymbol PolySymbol::norm_power(int modes, int p) {
    if (p < 0) throw ArgumentError("norm_power: p must be >= 0");
    PolySymbol s = constant(modes, 1.0);
    const PolySymbol n2 = norm_squared(modes);
    for (int k = 0; k < p; ++k) s = s.multiply(n2);
    return s;
}

PolySymbol PolySymbol::re_coordinate(int modes, int mode) {
    if (mode < 0 || mode >= modes)
        throw ArgumentError("re_coordinate: mode out of range");
    PolySymbol s(modes);
    std::vector<int> i(modes, 0), j(modes, 0);
    j[mode] = 1;
    s.add_term(i, j, 0.5);
    std::swap(i, j);
    s.add_term(i, j, 0.5);
    return s;
}

int PolySymbol::degree() const {
    int deg = -1;
    for (const auto& [key, c] : terms_)
        deg = std::max(deg, index_sum(key.first) + index_sum(key.second));
    return deg;
}

void PolySymbol::add_term(std::vector<int> conj_powers, std::vector<int> powers,
                          Complex coeff) {
    if (static_cast<int>(conj_powers.size()) != modes_ ||
        static_cast<int>(powers.size()) != modes_)
        throw ArgumentError("PolySymbol::add_term: multi-index length mismatch");
    for (int x : conj_powers)
        if (x < 0) throw ArgumentError("PolySymbol::add_term: negative power");
    for (int x : powers)
        if (x < 0) throw ArgumentError("PolySymbol::add_term: negative power");
    Key key{std::move(conj_powers), std::move(powers)};
    auto it = terms_.find(key);
    if (it == terms_.end()) {
        if (coeff != Complex(0.0, 0.0)) terms_.emplace(std::move(key), coeff);
        return;
    }
    it->second += coeff;
    if (std::abs(it->second) <= kPruneTol) terms_.erase(it);
}

PolySymbol& PolySymbol::operator+=(const PolySymbol& other) {
    if (other.modes_ != modes_) throw ArgumentError("PolySymbol +=: modes mismatch");
    for (const auto& [key, c] : other.terms_) add_term(key.first, key.second, c);
    return *this;
}

PolySymbol& PolySymbol::operator*=(Complex c) {
    if (c == Complex(0.0, 0.0)) {
        terms_.clear();
        return *this;
    }
    for (auto& [key, coeff] : terms_) coeff *= c;
    return *this;
}

PolySymbol PolySymbol::multiply(const PolySymbol& other) const {
    if (other.modes_ != modes_)
        throw ArgumentError("PolySymbol::multiply: modes mismatch");
    PolySymbol out(modes_);
    for (const auto& [ka, ca] : terms_) {
        for (const auto& [kb, cb] : other.terms_) {
            std::vector<int> i(modes_), j(modes_);
            for (int l = 0; l < modes_; ++l) {
                i[l] = ka.first[l] + kb.first[l];
                j[l] = ka.second[l] + kb.second[l];
            }
            out.add_term(std::move(i), std::move(j), ca * cb);
        }
    }
    return out;
}

Complex PolySymbol::eval(const Eigen::VectorXcd& z) const {
    if (z.size() != modes_) throw ArgumentError("PolySymbol::eval: size mismatch");
    Complex total = 0.0;
    for (const auto& [key, c] : terms_) {
        Complex term = c;
        for (int l = 0; l < modes_; ++l) {
            for (int k = 0; k < key.first[l]; ++k) term *= std::conj(z(l));
            for (int k = 0; k < key.second[l]; ++k) term *= z(l);
        }
        total += term;
    }
    return total;
}

double PolySymbol::eval_majorant(const Eigen::VectorXcd& z) const {
    double total = 0.0;
    for (const auto& [key, c] : terms_) {
        double term = std::abs(c);
        for (int l = 0; l < modes_; ++l) {
            const double m = std::abs(z(l));
            for (int k = 0; k < key.first[l] + key.second[l]; ++k) term *= m;
        }
        total += term;
    }
    return total;
}

bool PolySymbol::hermitian_as_function(double tol) const {
    for (const auto& [key, c] : terms_) {
        Key swapped{key.second, key.first};
        auto it = terms_.find(swapped);
        const Complex mirror = it == terms_.end() ? Complex(0.0) : it->second;
        if (std::abs(c - std::conj(mirror)) > tol) return false;
    }
    return true;
}

PolySymbol PolySymbol::laplacian_contraction() const {
    PolySymbol out(modes_);
    for (const auto& [key, c] : terms_) {
        for (int l = 0; l < modes_; ++l) {
            const int il = key.first[l], jl = key.second[l];
            if (il < 1 || jl < 1) continue;
            std::vector<int> i = key.first, j = key.second;
            --i[l];
            --j[l];
            out.add_term(std::move(i), std::move(j),
                         c * static_cast<double>(il) * static_cast<double>(jl));
        }
    }
    return out;
}

std::string PolySymbol::to_string() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [key, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "(" << format_g17(c.real()) << (c.imag() < 0 ? "-" : "+")
           << format_g17(std::abs(c.imag())) << "i)";
        for (int l = 0; l < modes_; ++l) {
            if (key.first[l] > 0) {
                os << " zb" << l;
                if (key.first[l] > 1) os << "^" << key.first[l];
            }
            if (key.second[l] > 0) {
                os << " z" << l;
                if (key.second[l] > 1) os << "^" << key.second[l];
            }
        }
    }
    if (first) os << "0";
    return os.str();
}

PolySymbol SymbolExpansion::evaluate(double eps) const {
    PolySymbol total = base;
    for (const auto& [k, corr] : corrections) {
        PolySymbol scaled = corr;
        scaled *= Complex(std::pow(eps, k), 0.0);
        total += scaled;
    }
    return total;
}

double SymbolExpansion::remainder_majorant(const Eigen::VectorXcd& z) const {
    double p = 0.0;
    for (const auto& [k, corr] : corrections) p += corr.eval_majorant(z);
    return p;
}

SymbolExpansion upper_symbol(const PolySymbol& b) {
    SymbolExpansion ex;
    ex.base = b;
    PolySymbol current = b;
    int k = 1;
    while (true) {
        PolySymbol next = current.laplacian_contraction();
        next *= Complex(-1.0 / k, 0.0);
        if (next.empty()) break;
        ex.corrections.emplace(k, next);
        current = next;
        ++k;
        if (k > 512) throw Error("upper_symbol: runaway recursion");
    }
    return ex;
}

Eigen::MatrixXcd wick_quantize(const PolySymbol& b, const FockSpec& spec) {
    if (b.modes() != spec.modes)
        throw ArgumentError("wick_quantize: mode count mismatch");
    const Eigen::Index dim = spec.dim();
    detail::check_dense_dim(dim, "wick_quantize");

    std::vector<Eigen::MatrixXcd> a(spec.modes);
    for (int l = 0; l < spec.modes; ++l) a[l] = annihilator(spec, l);

    Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& [key, c] : b.terms()) {
        Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(dim, dim);
        for (int l = 0; l < spec.modes; ++l)
            for (int k = 0; k < key.first[l]; ++k) term = term * a[l].adjoint();
        for (int l = 0; l < spec.modes; ++l)
            for (int k = 0; k < key.second[l]; ++k) term = term * a[l];
        total += c * term;
    }
    return total;
}

bool is_number_diagonal(const PolySymbol& b) {
    for (const auto& [key, c] : b.terms())
        if (key.first != key.second) return false;
    return true;
}

double wick_diagonal_eigenvalue(const PolySymbol& b, const std::vector<int>& occ,
                                double eps) {
    double value = 0.0;
    for (const auto& [key, c] : b.terms()) {
        if (key.first != key.second)
            throw ArgumentError("wick_diagonal_eigenvalue: symbol not diagonal");
        double term = c.real();
        for (size_t l = 0; l < key.first.size(); ++l) {
            for (int k = 0; k < key.first[l]; ++k)
                term *= eps * (occ[l] - k);
        }
        value += term;
    }
    return value;
}

Eigen::VectorXd wick_diagonal(const PolySymbol& b, const FockSpec& spec) {
    if (!is_number_diagonal(b))
        throw ArgumentError("wick_diagonal: symbol has off-diagonal terms");
    if (!b.hermitian_as_function(1e-12))
        throw ArgumentError("wick_diagonal: diagonal symbol must have real coefficients");
    const Eigen::Index dim = spec.dim();
    Eigen::VectorXd diag(dim);
    for (Eigen::Index f = 0; f < dim; ++f)
        diag(f) = wick_diagonal_eigenvalue(b, spec.occupation(f), spec.eps);
    return diag;
}

Eigen::MatrixXcd anti_wick_quantize(const PhaseFunction& f, const FockSpec& spec,
                                    const QuadratureGrid& grid) {
    if (grid.modes != spec.modes)
        throw ArgumentError("anti_wick_quantize: grid mode mismatch");
    const Eigen::Index dim = spec.dim();
    detail::check_dense_dim(dim, "anti_wick_quantize");

    const double measure = std::pow(M_PI * spec.eps, spec.modes);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::VectorXcd z(spec.modes);

    Eigen::VectorXcd fv(grid.size());
    double wmax = 0.0;
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        z = grid.nodes.row(k);
        fv(k) = f(z);
        wmax = std::max(wmax, std::abs(fv(k)) * grid.weights(k));
    }
    const double floor = wmax * 1e-17;

    // Accumulate V diag(c) V^* in column chunks so the quadratic work runs
    // through matrix products instead of per-node outer products.
    const Eigen::Index chunk = 128;
    Eigen::MatrixXcd V(dim, chunk);
    Eigen::VectorXcd coef(chunk);
    Eigen::Index m = 0;
    auto flush = [&]() {
        if (m == 0) return;
        A.noalias() += V.leftCols(m) * coef.head(m).asDiagonal() *
                       V.leftCols(m).adjoint();
        m = 0;
    };
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        if (std::abs(fv(k)) * grid.weights(k) <= floor) continue;
        z = grid.nodes.row(k);
        const CoherentVector cv = coherent_vector(spec, z, 1.0);
        if (cv.v.squaredNorm() == 0.0) continue;  // fully beyond the cutoff
        V.col(m) = cv.v;
        coef(m) = grid.weights(k) / measure * fv(k);
        if (++m == chunk) flush();
    }
    flush();
    return A;
}

AntiWickResult anti_wick_certified(const PhaseFunction& f, const FockSpec& spec,
                                   const GridPolicy& policy, double rel_tol) {
    bool have = false;
    Eigen::MatrixXcd prev;
    for (int level = 0; level <= policy.max_level; ++level) {
        QuadratureGrid grid;
        try {
            grid = policy.build(spec.modes, level);
        } catch (const Error&) {
            break;
        }
        Eigen::MatrixXcd A = anti_wick_quantize(f, spec, grid);
        if (!A.allFinite())
            throw ConvergenceError("anti_wick_certified: operator not finite");
        if (have) {
            const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
            if ((A - prev).cwiseAbs().maxCoeff() <= rel_tol * scale)
                return AntiWickResult{std::move(A), std::move(grid)};
        }
        prev = std::move(A);
        have = true;
    }
    throw ConvergenceError(
        "anti_wick_certified: operator did not stabilise within the level budget");
}

Complex lower_symbol(const Eigen::MatrixXcd& A, const FockSpec& spec,
                     const Eigen::VectorXcd& z, double deficit_tol) {
    CoherentVector cv = coherent_vector(spec, z, deficit_tol);
    if (cv.deficit > deficit_tol)
        throw TruncationError("lower_symbol: coherent deficit " +
                                  std::to_string(cv.deficit) + " above tolerance",
                              n_max_for_radius(spec.eps, z.norm(), deficit_tol));
    return cv.v.dot(A * cv.v);
}

SymbolClassS::SymbolClassS(int modes, std::vector<Block> blocks, PolySymbol V)
    : modes_(modes), p_max_(0), blocks_(std::move(blocks)), V_(std::move(V)),
      full_(modes) {
    for (const auto& b : blocks_) p_max_ = std::max(p_max_, b.p);

    PolySymbol h0(modes_);
    for (const auto& b : blocks_) {
        if (b.radial) {
            PolySymbol blk = PolySymbol::norm_power(modes_, b.p);
            blk *= Complex(b.lambda, 0.0);
            h0 += blk;
        } else {
            // <z^op|htilde z^op> expanded over index tuples of length p.
            const Eigen::Index dp = b.matrix.rows();
            std::vector<int> tup_i(b.p, 0), tup_j(b.p, 0);
            for (Eigen::Index r = 0; r < dp; ++r) {
                Eigen::Index rr = r;
                for (int k = b.p - 1; k >= 0; --k) {
                    tup_i[k] = static_cast<int>(rr % modes_);
                    rr /= modes_;
                }
                for (Eigen::Index cidx = 0; cidx < dp; ++cidx) {
                    const Complex v = b.matrix(r, cidx);
                    if (v == Complex(0.0)) continue;
                    Eigen::Index cc = cidx;
                    for (int k = b.p - 1; k >= 0; --k) {
                        tup_j[k] = static_cast<int>(cc % modes_);
                        cc /= modes_;
                    }
                    std::vector<int> mi(modes_, 0), mj(modes_, 0);
                    for (int k = 0; k < b.p; ++k) {
                        ++mi[tup_i[k]];
                        ++mj[tup_j[k]];
                    }
                    h0.add_term(std::move(mi), std::move(mj), v);
                }
            }
        }
    }
    full_ = h0;
    full_ += V_;
    validate();
}

void SymbolClassS::validate() const {
    if (blocks_.empty()) throw ClassSViolation("class S: no h0 blocks");
    if (p_max_ < 1) throw ClassSViolation("class S: p_max must be >= 1");
    for (const auto& b : blocks_) {
        if (b.p < 1) throw ClassSViolation("class S: block order must be >= 1");
        const double lo = min_block_eigenvalue(b);
        if (lo < -1e-12)
            throw ClassSViolation("class S: htilde_" + std::to_string(b.p) +
                                  " not positive semidefinite");
        if (b.p == p_max_ && lo <= 0.0)
            throw ClassSViolation("class S: htilde_{p_max} must be positive definite");
        if (!b.radial && b.matrix.rows() != b.matrix.cols())
            throw ClassSViolation("class S: block matrix not square");
        if (!b.radial && hermiticity_defect(b.matrix) > 1e-12)
            throw ClassSViolation("class S: block matrix not Hermitian");
    }
    if (!V_.empty() && V_.degree() >= 2 * p_max_)
        throw ClassSViolation("class S: deg V = " + std::to_string(V_.degree()) +
                              " must be < 2 p_max = " + std::to_string(2 * p_max_));
    if (!full_.hermitian_as_function(1e-10))
        throw ClassSViolation("class S: symbol is not real-valued");
}

double SymbolClassS::min_block_eigenvalue(const Block& b) const {
    if (b.radial) return b.lambda;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b.matrix,
                                                       Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double SymbolClassS::min_leading_eigenvalue() const {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& b : blocks_)
        if (b.p == p_max_) lo = std::min(lo, min_block_eigenvalue(b));
    return lo;
}

SymbolClassS SymbolClassS::make_radial(int modes,
                                       std::vector<std::pair<int, double>> lambdas,
                                       PolySymbol V) {
    std::vector<Block> blocks;
    for (auto& [p, lambda] : lambdas) {
        Block b;
        b.p = p;
        b.radial = true;
        b.lambda = lambda;
        blocks.push_back(std::move(b));
    }
    return SymbolClassS(modes, std::move(blocks), std::move(V));
}

SymbolClassS SymbolClassS::make(int modes, std::vector<Block> blocks, PolySymbol V) {
    return SymbolClassS(modes, std::move(blocks), std::move(V));
}

PhaseDensity SymbolClassS::evaluator() const {
    const PolySymbol h = full_;
    return [h](const Eigen::VectorXcd& z) { return h.eval(z).real(); };
}

GrowthBound symbol_growth_bound(const SymbolClassS& h, const QuadratureGrid& grid) {
    if (!h.potential().empty() && h.potential().degree() >= 2 * h.p_max())
        throw ClassSViolation("symbol_growth_bound: deg V >= 2 p_max");

    GrowthBound gb;
    const double lead = h.min_leading_eigenvalue();

    bool pure_h0 = h.potential().empty();
    if (pure_h0) {
        gb.C = lead;
        gb.C_tilde = 0.0;
    } else {
        gb.C = 0.5 * lead;
        // Radial lower envelope: sum_p lambda_min(p) t^{2p} minus the
        // majorant of V; C_tilde covers sup_t [C t^{2pmax} - envelope(t)].
        std::vector<std::pair<int, double>> block_lows;
        for (const auto& b : h.blocks())
            block_lows.emplace_back(b.p, h.min_block_eigenvalue(b));
        const PolySymbol& V = h.potential();
        const int pmax = h.p_max();

        auto deficit = [&](double t) {
            double env = 0.0;
            for (auto& [p, lo] : block_lows) env += lo * std::pow(t, 2 * p);
            double maj = 0.0;
            for (const auto& [key, c] : V.terms()) {
                double term = std::abs(c);
                int deg = 0;
                for (int l = 0; l < h.modes(); ++l) deg += key.first[l] + key.second[l];
                maj += term * std::pow(t, deg);
            }
            return gb.C * std::pow(t, 2 * pmax) - (env - maj);
        };
        double worst = 0.0;
        for (double t = 0.0; t <= 64.0; t += (t < 8.0 ? 1e-3 : 1e-2))
            worst = std::max(worst, deficit(t));
        gb.C_tilde = worst;
    }

    // Certificate on the provided grid nodes.
    const PhaseDensity eval_h = h.evaluator();
    Eigen::VectorXcd z(grid.modes);
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        z = grid.nodes.row(k);
        const double lhs = eval_h(z);
        const double rhs = gb.C * std::pow(z.norm(), 2 * h.p_max()) - gb.C_tilde;
        if (lhs + 1e-9 < rhs)
            throw ClassSViolation("symbol_growth_bound: certificate failed at node");
    }
    return gb;
}

double radius_for_tail(const GrowthBound& gb, int p_max, double beta, double tail) {
    const double threshold = (gb.C_tilde + std::log(1.0 / tail) / beta) / gb.C;
    return std::pow(threshold, 1.0 / (2.0 * p_max));
}

GridPolicy default_policy_for(const SymbolClassS& h, double beta) {
    GridPolicy policy;
    bool radial_quadratic_leading = h.p_max() == 1;
    if (radial_quadratic_leading) {
        policy.scheme = Scheme::GaussHermiteTensor;
        policy.rate = beta * h.min_leading_eigenvalue();
        policy.initial_points = 16;
        policy.max_level = 4;
    } else {
        policy.scheme = Scheme::UniformTensor;
        QuadratureGrid probe = uniform_ball_grid(h.modes(), 4.0, 16);
        const GrowthBound gb = symbol_growth_bound(h, probe);
        policy.radius = radius_for_tail(gb, h.p_max(), beta);
        policy.initial_points = 64;
        policy.max_level = 3;
    }
    return policy;
}

RefineResult classical_partition(const SymbolClassS& h, double beta,
                                 const GridPolicy& policy) {
    return classical_partition(h.evaluator(), beta, h.modes(), policy);
}

RefineResult classical_partition(const SymbolClassS& h, double beta) {
    return classical_partition(h, beta, default_policy_for(h, beta));
}

} // namespace semi
