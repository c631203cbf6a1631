#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "semi/fock.hpp"
#include "semi/quadrature.hpp"

namespace semi {

/* Polynomial phase-space symbol sum_{i,j} c_{i,j} zbar^i z^j with
   multi-indices i (conjugate powers) and j (plain powers). Terms live in a
   canonically ordered map so equality, hashing and serialization are
   deterministic. */
class PolySymbol {
public:
    using Key = std::pair<std::vector<int>, std::vector<int>>;
    using TermMap = std::map<Key, Complex>;

    explicit PolySymbol(int modes = 1);

    static PolySymbol monomial(int modes, std::vector<int> conj_powers,
                               std::vector<int> powers, Complex coeff);
    static PolySymbol constant(int modes, Complex c);
    // |z|^2 and its radial powers |z|^{2p}.
    static PolySymbol norm_squared(int modes);
    static PolySymbol norm_power(int modes, int p);
    // Re z_l = (z_l + zbar_l)/2.
    static PolySymbol re_coordinate(int modes, int mode);

    int modes() const { return modes_; }
    const TermMap& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    int degree() const;  // max |i|+|j|, -1 for the zero symbol

    void add_term(std::vector<int> conj_powers, std::vector<int> powers,
                  Complex coeff);

    PolySymbol& operator+=(const PolySymbol& other);
    PolySymbol& operator*=(Complex c);
    friend PolySymbol operator+(PolySymbol a, const PolySymbol& b) { return a += b; }
    friend PolySymbol operator*(Complex c, PolySymbol a) { return a *= c; }
    PolySymbol multiply(const PolySymbol& other) const;

    Complex eval(const Eigen::VectorXcd& z) const;
    // Majorant sum |c| * |z|^powers, used for remainder bounds.
    double eval_majorant(const Eigen::VectorXcd& z) const;

    // c_{i,j} == conj(c_{j,i}) for every pair: real-valued as a function.
    bool hermitian_as_function(double tol = 1e-12) const;

    // D = sum_l d/dz_l d/dzbar_l, the contraction that drives the
    // normal <-> anti-normal reordering.
    PolySymbol laplacian_contraction() const;

    std::string to_string() const;  // canonical pretty-printer

private:
    int modes_;
    TermMap terms_;
};

/* Exact expansion b^up_eps = b + sum_k eps^k corrections[k] produced by the
   anti-normal reordering of b^Wick. Corrections have strictly lower degree
   than the base. */
struct SymbolExpansion {
    PolySymbol base;
    std::map<int, PolySymbol> corrections;

    PolySymbol evaluate(double eps) const;
    // P(z) with |b^up_eps(z) - b(z)| <= eps * P(z) for eps <= 1.
    double remainder_majorant(const Eigen::VectorXcd& z) const;
};

// Upper symbol via the reordering recursion: correction_m = -D(correction_{m-1})/m,
// i.e. b^up_eps = exp(-eps D) b, exact for polynomials.
SymbolExpansion upper_symbol(const PolySymbol& b);

// Wick quantization sum c_{i,j} (a*)^i a^j on the truncated space.
Eigen::MatrixXcd wick_quantize(const PolySymbol& b, const FockSpec& spec);

// True when every term has i == j, so b^Wick is diagonal in the Fock basis.
bool is_number_diagonal(const PolySymbol& b);
// Diagonal of b^Wick for number-diagonal b (falling-factorial eigenvalues).
Eigen::VectorXd wick_diagonal(const PolySymbol& b, const FockSpec& spec);
// Same eigenvalue for one occupation vector; valid for any occupation, so it
// also serves untruncated partition-function sums.
double wick_diagonal_eigenvalue(const PolySymbol& b, const std::vector<int>& occ,
                                double eps);

/* Anti-Wick quantization: quadrature of f(z)|z><z| dz/(pi eps)^d with the
   coherent projectors of the truncated space, i.e. exactly the cutoff
   projection of the untruncated operator up to quadrature error. */
Eigen::MatrixXcd anti_wick_quantize(const PhaseFunction& f, const FockSpec& spec,
                                    const QuadratureGrid& grid);

// Adaptive variant: doubles the grid until the operator stabilises in
// max-norm; a grid radius below the symbol support surfaces as a
// ConvergenceError from the refinement loop.
struct AntiWickResult {
    Eigen::MatrixXcd op;
    QuadratureGrid grid;
};
AntiWickResult anti_wick_certified(const PhaseFunction& f, const FockSpec& spec,
                                   const GridPolicy& policy, double rel_tol);

// Lower symbol <z_eps|A|z_eps>.
Complex lower_symbol(const Eigen::MatrixXcd& A, const FockSpec& spec,
                     const Eigen::VectorXcd& z, double deficit_tol = 1e-8);

/* Admissible Hamiltonian symbols: h = h0 + V with
   h0 = sum_p <z^op|htilde_p z^op>, htilde_p >= 0, htilde_{p_max} > 0 and
   deg V < 2 p_max. Blocks are either radial (lambda |z|^{2p}) or explicit
   Hermitian matrices on (C^d)^{tensor p}. */
class SymbolClassS {
public:
    struct Block {
        int p;
        bool radial;
        double lambda = 0.0;       // radial case
        Eigen::MatrixXcd matrix;   // explicit case, d^p x d^p
    };

    static SymbolClassS make_radial(int modes,
                                    std::vector<std::pair<int, double>> lambdas,
                                    PolySymbol V);
    static SymbolClassS make(int modes, std::vector<Block> blocks, PolySymbol V);

    int modes() const { return modes_; }
    int p_max() const { return p_max_; }
    const PolySymbol& symbol() const { return full_; }
    const PolySymbol& potential() const { return V_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    double min_leading_eigenvalue() const;
    double min_block_eigenvalue(const Block& b) const;
    PhaseDensity evaluator() const;  // real evaluation of the full symbol

private:
    SymbolClassS(int modes, std::vector<Block> blocks, PolySymbol V);
    void validate() const;

    int modes_;
    int p_max_;
    std::vector<Block> blocks_;
    PolySymbol V_;
    PolySymbol full_;
};

// Certified constants with h(z) >= C ||z||^{2 p_max} - C_tilde; checked on the
// grid nodes and by leading-term domination beyond.
struct GrowthBound {
    double C = 0.0;
    double C_tilde = 0.0;
};
GrowthBound symbol_growth_bound(const SymbolClassS& h, const QuadratureGrid& grid);

// Ball radius with exp(-beta(C R^{2p} - C_tilde)) < tail.
double radius_for_tail(const GrowthBound& gb, int p_max, double beta,
                       double tail = 1e-16);

// Scheme selection per the quadrature policy: Gauss-Hermite matched to the
// leading Gaussian decay for radial-quadratic leading blocks, uniform ball
// otherwise.
GridPolicy default_policy_for(const SymbolClassS& h, double beta);

// Z_{beta,0} for class-S symbols, certified by refinement.
RefineResult classical_partition(const SymbolClassS& h, double beta,
                                 const GridPolicy& policy);
RefineResult classical_partition(const SymbolClassS& h, double beta);

} // namespace semi
