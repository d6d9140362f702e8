#include "focal/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>

#include "focal/minimizer.hpp"
#include "focal/parallel.hpp"
#include "focal/sampling.hpp"
#include "focal/thresholds.hpp"

namespace focal {

namespace {

constexpr std::size_t kShapeGrid = 100000;

double linf(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    return worst;
}

double max_of(std::span<const double> v) { return *std::max_element(v.begin(), v.end()); }

sampling::Rng instance_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return sampling::Rng(seq);
}

// Entry whose pass condition is worst <= limit.
VerifyEntry entry(std::string name, std::string claim, std::size_t samples, double worst,
                  double limit) {
    return {std::move(name), std::move(claim), samples, worst, limit, worst <= limit};
}

struct Instance {
    std::size_t k = 0;
    Gamma gamma;
    std::vector<double> eta;
    std::optional<RiskMinimizerResult> inverse;
    std::optional<RiskMinimizerResult> gradient;
};

std::vector<Instance> solve_sweep(const VerifyOptions& o) {
    return parallel_map(o.n_random, [&](std::size_t i) {
        Instance inst;
        inst.k = o.ks[i % o.ks.size()];
        inst.gamma = Gamma(o.gammas[(i / o.ks.size()) % o.gammas.size()]);
        sampling::Rng rng = instance_rng(o.seed, 1, i);
        inst.eta = sampling::dirichlet(inst.k, rng);
        const ProbVector eta(inst.eta);
        try {
            inst.inverse = minimize_risk_inverse(eta, inst.gamma);
        } catch (const ConvergenceError&) {
        }
        try {
            inst.gradient = minimize_risk_pg(eta, inst.gamma);
        } catch (const ConvergenceError&) {
        }
        return inst;
    });
}

std::vector<Gamma> positive_gammas(const VerifyOptions& o) {
    std::vector<Gamma> out;
    for (double g : o.gammas) {
        if (g > 0.0) {
            out.emplace_back(g);
        }
    }
    return out;
}

}  // namespace

bool VerifyReport::all_passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const VerifyEntry& e) { return e.passed; });
}

const VerifyEntry* VerifyReport::find(const std::string& name) const {
    for (const VerifyEntry& e : entries) {
        if (e.name == name) {
            return &e;
        }
    }
    return nullptr;
}

void VerifyReport::print(std::ostream& out) const {
    for (const VerifyEntry& e : entries) {
        char line[512];
        std::snprintf(line, sizeof line, "[%s] %-34s samples=%-7zu worst=%-12.4g limit=%-9.3g %s\n",
                      e.passed ? "PASS" : "FAIL", e.name.c_str(), e.samples, e.worst, e.limit,
                      e.claim.c_str());
        out << line;
    }
    out << (all_passed() ? "all properties hold\n" : "verification FAILED\n");
}

VerifyReport run_verify(const VerifyOptions& o) {
    if (o.gammas.empty() || o.ks.empty()) {
        throw DomainError("verify needs at least one gamma and one k");
    }
    for (std::size_t k : o.ks) {
        if (k < 2) {
            throw DomainError("verify needs every k >= 2");
        }
    }
    VerifyReport report;
    const PsiFunction& psi = o.psi;
    const std::vector<Instance> sweep = solve_sweep(o);
    const std::vector<Gamma> gammas = positive_gammas(o);

    // Minimizer sweep: round trip, oracle agreement, order, underconfidence.
    {
        double round_trip = 0.0;
        double agreement = 0.0;
        double order_violations = 0.0;
        double uc_violations = 0.0;
        double improper_violations = 0.0;
        std::size_t uc_samples = 0;
        std::size_t improper_samples = 0;
        for (const Instance& inst : sweep) {
            if (!inst.inverse || !inst.gradient) {
                round_trip = kInfinity;
                agreement = kInfinity;
                continue;
            }
            const auto q = inst.inverse->q_star.values();
            round_trip = std::max(round_trip, linf(psi(q, inst.gamma), inst.eta));
            agreement = std::max(agreement, linf(q, inst.gradient->q_star.values()));
            for (std::size_t i = 0; i < q.size(); ++i) {
                for (std::size_t j = 0; j < q.size(); ++j) {
                    if (q[i] < q[j] && !(inst.eta[i] < inst.eta[j])) {
                        order_violations += 1.0;
                    }
                }
            }
            if (argmax(q) != argmax(inst.eta)) {
                order_violations += 1.0;
            }
            const double top = max_of(q);
            if (!inst.gamma.is_zero() && top > 0.5 && top < 1.0 && !in_sk(q, kSimplexTolerance)) {
                ++uc_samples;
                if (!(top < max_of(inst.eta))) {
                    uc_violations += 1.0;
                }
            }
            if (!inst.gamma.is_zero() && !in_sk(inst.eta, 1e-3)) {
                ++improper_samples;
                if (!(linf(q, inst.eta) > 1e-9)) {
                    improper_violations += 1.0;
                }
            }
        }
        report.entries.push_back(entry("psi round trip",
                                       "||Psi(q*) - eta||_inf for the inverse-solver minimizer",
                                       sweep.size(), round_trip, 1e-7));
        report.entries.push_back(entry("solver agreement",
                                       "||q*_inverse - q*_projected_gradient||_inf",
                                       sweep.size(), agreement, 1e-5));
        report.entries.push_back(entry("order preservation",
                                       "violations of q*_i < q*_j => eta_i < eta_j, argmax",
                                       sweep.size(), order_violations, 0.0));
        report.entries.push_back(entry("minimizer underconfidence",
                                       "violations of max q* < max eta when max q* > 0.5",
                                       uc_samples, uc_violations, 0.0));
        report.entries.push_back(entry("not strictly proper (gamma > 0)",
                                       "minimizers equal to a non-S^K eta",
                                       improper_samples, improper_violations, 0.0));
    }

    // Strict properness of cross-entropy, via the independent gradient solver.
    {
        const auto worst = parallel_map(o.n_random, [&](std::size_t i) {
            sampling::Rng rng = instance_rng(o.seed, 2, i);
            const std::size_t k = o.ks[i % o.ks.size()];
            const ProbVector eta(sampling::dirichlet(k, rng));
            try {
                return linf(minimize_risk_pg(eta, Gamma{}).q_star.values(), eta.values());
            } catch (const ConvergenceError&) {
                return kInfinity;
            }
        });
        const double largest = worst.empty() ? 0.0 : max_of(worst);
        report.entries.push_back(entry("strict properness (gamma = 0)",
                                       "||argmin CE risk - eta||_inf", worst.size(), largest, 1e-6));
    }

    // Psi on random score vectors.
    {
        double raise_violations = 0.0;
        double argmax_violations = 0.0;
        double fixed_point = 0.0;
        for (std::size_t i = 0; i < o.n_random; ++i) {
            sampling::Rng rng = instance_rng(o.seed, 3, i);
            const std::size_t k = o.ks[i % o.ks.size()];
            const Gamma g(o.gammas[(i / o.ks.size()) % o.gammas.size()]);
            std::uniform_real_distribution<double> top(0.5, 1.0);
            const double m = std::min(top(rng), 1.0 - 1e-6);
            if (auto p = sampling::with_max(k, std::max(m, 0.5 + 1e-9), rng)) {
                if (!g.is_zero() && !(max_of(psi(*p, g)) > max_of(*p))) {
                    raise_violations += 1.0;
                }
            }
            const std::vector<double> d = sampling::dirichlet(k, rng);
            if (argmax(psi(d, g)) != argmax(d)) {
                argmax_violations += 1.0;
            }
            const std::vector<double> s = sampling::sk_member(k, rng);
            fixed_point = std::max(fixed_point, linf(psi(s, g), s));
        }
        report.entries.push_back(entry("psi raises top score",
                                       "violations of max Psi(p) > max p when max p in (0.5, 1)",
                                       o.n_random, raise_violations, 0.0));
        report.entries.push_back(entry("S^K fixed points",
                                       "||Psi(p) - p||_inf for p in S^K", o.n_random, fixed_point,
                                       kSimplexTolerance));
        report.entries.push_back(entry("argmax preserved",
                                       "argmax Psi(p) != argmax p", o.n_random, argmax_violations,
                                       0.0));
    }

    // Binary closed form.
    {
        double mismatch = 0.0;
        double uc_violations = 0.0;
        std::size_t samples = 0;
        for (Gamma g : gammas) {
            for (int i = 1; i < 1000; ++i) {
                const double q = i / 1000.0;
                const double closed = recover_binary(q, g);
                const std::vector<double> p{q, 1.0 - q};
                mismatch = std::max(mismatch, std::abs(closed - psi(p, g)[0]));
                if (q > 0.5 && !(closed > q)) {
                    uc_violations += 1.0;
                }
                ++samples;
            }
        }
        report.entries.push_back(entry("binary closed form",
                                       "|recover_binary(q) - Psi([q, 1-q])_1|", samples, mismatch,
                                       1e-10));
        report.entries.push_back(entry("binary underconfidence",
                                       "violations of eta > q for q in (0.5, 1)", samples,
                                       uc_violations, 0.0));
    }

    // Thresholds, regions and the small-gamma overconfidence witness.
    {
        double ordering = 0.0;
        double region_violations = 0.0;
        std::size_t region_samples = 0;
        for (Gamma g : gammas) {
            const ThresholdPair t = thresholds(g);
            if (!(0.0 < t.tau_oc && t.tau_oc < t.tau_uc && t.tau_uc < 0.5)) {
                ordering = kInfinity;
            } else {
                ordering = std::max(ordering, std::abs(varphi(t.tau_uc, g) - 1.0));
            }
        }
        for (std::size_t i = 0; i < o.n_random && !gammas.empty(); ++i) {
            sampling::Rng rng = instance_rng(o.seed, 4, i);
            const Gamma g = gammas[i % gammas.size()];
            const ThresholdPair t = thresholds(g);
            const std::size_t k = o.ks[(i / gammas.size()) % o.ks.size()];
            std::uniform_real_distribution<double> uc(t.tau_uc, 1.0);
            std::uniform_real_distribution<double> oc(0.0, t.tau_oc);
            for (const auto& [top, expected] :
                 {std::pair{uc(rng), ConfidenceDirection::Underconfident},
                  std::pair{oc(rng), ConfidenceDirection::Overconfident}}) {
                if (!(top > 0.0 && top < 1.0)) {
                    continue;
                }
                const auto p = sampling::with_max(k, top, rng);
                if (!p || in_sk(*p, kSimplexTolerance)) {
                    continue;
                }
                ++region_samples;
                const auto direction = [&] {
                    const double raw = max_of(*p);
                    const double recovered = max_of(psi(*p, g));
                    if (raw < recovered - 1e-12) return ConfidenceDirection::Underconfident;
                    if (raw > recovered + 1e-12) return ConfidenceDirection::Overconfident;
                    return ConfidenceDirection::Exact;
                }();
                const ConfidenceRegion region = region_of(top, g);
                const bool consistent =
                    (region == ConfidenceRegion::Underconfident &&
                     direction == ConfidenceDirection::Underconfident) ||
                    (region == ConfidenceRegion::Overconfident &&
                     direction == ConfidenceDirection::Overconfident);
                if (direction != expected || !consistent) {
                    region_violations += 1.0;
                }
            }
        }
        report.entries.push_back(entry("threshold ordering",
                                       "0 < tau_oc < tau_uc < 0.5; |phi(tau_uc) - 1|",
                                       gammas.size(), ordering, 1e-9));
        report.entries.push_back(entry("confidence regions",
                                       "direction disagreeing with region_of outside the ambiguous band",
                                       region_samples, region_violations, 0.0));

        const Gamma small(0.02);
        std::vector<double> p(5, (1.0 - (0.2 + 1e-4)) / 4.0);
        p[0] = 0.2 + 1e-4;
        const double gap = max_of(psi(p, small)) - max_of(p);
        report.entries.push_back(entry("small-gamma overconfidence (K=5)",
                                       "max Psi(p) - max p at gamma=0.02, max p = 0.2001 (< 0)", 1,
                                       gap < 0.0 ? 0.0 : 1.0, 0.0));
    }

    // Shape of phi and h.
    {
        double shape_violations = 0.0;
        double h_violations = 0.0;
        for (Gamma g : gammas) {
            if (varphi(0.0, g) != 1.0 || varphi(1.0, g) != 0.0) {
                shape_violations += 1.0;
            }
            int sign_changes = 0;
            int last_sign = 0;
            double prev_phi = varphi(1.0 / kShapeGrid, g);
            double prev_h = h_transform(1.0 / kShapeGrid, g);
            for (std::size_t i = 2; i < kShapeGrid; ++i) {
                const double v = static_cast<double>(i) / kShapeGrid;
                const double phi = varphi(v, g);
                const double diff = phi - prev_phi;
                const int sign = diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0);
                if (sign != 0) {
                    if (last_sign != 0 && sign != last_sign) {
                        ++sign_changes;
                    }
                    last_sign = sign;
                }
                prev_phi = phi;
                const double h = h_transform(v, g);
                if (!(h > prev_h)) {
                    h_violations += 1.0;
                }
                prev_h = h;
            }
            if (sign_changes != 1) {
                shape_violations += 1.0;
            }
        }
        report.entries.push_back(entry("phi shape",
                                       "phi(0)=1, phi(1)=0, one derivative sign change (violations)",
                                       gammas.size(), shape_violations, 0.0));
        report.entries.push_back(entry("h increasing",
                                       "non-increasing steps of h on a 1e5-point grid",
                                       gammas.size() * kShapeGrid, h_violations, 0.0));
    }
    return report;
}

}  // namespace focal
