#pragma once

// Random simplex generators for sweeps and property checks.

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "focal/core.hpp"

namespace focal::sampling {

using Rng = std::mt19937_64;

// Uniform on the simplex (flat Dirichlet).
std::vector<double> dirichlet(std::size_t k, Rng& rng);

// A member of S^K: a random support with equal mass on each supported class.
std::vector<double> sk_member(std::size_t k, Rng& rng);

// A simplex vector whose largest entry is exactly top, with every other entry
// strictly below it; nullopt if rejection sampling fails (e.g. top < 1/k).
std::optional<std::vector<double>> with_max(std::size_t k, double top, Rng& rng,
                                            int attempts = 200);

}  // namespace focal::sampling
