#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace semi {

/* One structural property check: pass iff value <= bound (the value of a
   defect, a negated margin, or a residual, so smaller is always better). */
struct InvariantCheck {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

// The full property suite behind `check-invariants` and the structural
// acceptance criterion. Randomised checks draw from the given seed.
std::vector<InvariantCheck> run_invariant_suite(std::uint64_t seed);

bool all_pass(const std::vector<InvariantCheck>& checks);

} // namespace semi
