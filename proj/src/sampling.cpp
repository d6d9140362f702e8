#include "focal/sampling.hpp"

#include <algorithm>
#include <numeric>

namespace focal::sampling {

std::vector<double> dirichlet(std::size_t k, Rng& rng) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v(k);
    double total = 0.0;
    for (double& x : v) {
        x = e(rng);
        total += x;
    }
    for (double& x : v) {
        x /= total;
    }
    return v;
}

std::vector<double> sk_member(std::size_t k, Rng& rng) {
    std::uniform_int_distribution<std::size_t> size(1, k);
    const std::size_t m = size(rng);
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<double> v(k, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        v[idx[i]] = 1.0 / static_cast<double>(m);
    }
    return v;
}

std::optional<std::vector<double>> with_max(std::size_t k, double top, Rng& rng, int attempts) {
    if (k < 2 || !(top > 0.0 && top < 1.0)) {
        return std::nullopt;
    }
    std::uniform_int_distribution<std::size_t> slot(0, k - 1);
    for (int a = 0; a < attempts; ++a) {
        std::vector<double> rest = dirichlet(k - 1, rng);
        bool ok = true;
        for (double& x : rest) {
            x *= 1.0 - top;
            ok = ok && x < top;
        }
        if (!ok) {
            continue;
        }
        const std::size_t at = slot(rng);
        std::vector<double> v;
        v.reserve(k);
        v.insert(v.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(at));
        v.push_back(top);
        v.insert(v.end(), rest.begin() + static_cast<std::ptrdiff_t>(at), rest.end());
        return v;
    }
    return std::nullopt;
}

}  // namespace focal::sampling
