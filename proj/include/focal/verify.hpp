#pragma once

// Property sweeps behind `focal-calib verify`: every structural claim about
// the focal risk minimizer and the Psi transform, checked numerically.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "focal/core.hpp"

namespace focal {

using PsiFunction = std::function<std::vector<double>(std::span<const double>, Gamma)>;

struct VerifyOptions {
    std::vector<double> gammas{0.5, 1.0, 2.0, 3.0, 5.0};
    std::vector<std::size_t> ks{2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::size_t n_random = 1000;
    std::uint64_t seed = 0;
    // The transform under test; swap in a broken one for negative controls.
    PsiFunction psi = [](std::span<const double> p, Gamma g) { return psi_transform(p, g); };
};

struct VerifyEntry {
    std::string name;     // e.g. "psi round trip"
    std::string claim;    // what was checked
    std::size_t samples = 0;
    double worst = 0.0;   // worst residual (or count of violations)
    double limit = 0.0;   // pass threshold on worst
    bool passed = false;
};

struct VerifyReport {
    std::vector<VerifyEntry> entries;

    bool all_passed() const;
    const VerifyEntry* find(const std::string& name) const;
    void print(std::ostream& out) const;
};

VerifyReport run_verify(const VerifyOptions& options = {});

}  // namespace focal
