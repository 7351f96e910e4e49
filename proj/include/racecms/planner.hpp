#pragma once

#include <cmath>
#include <cstdint>

#include "racecms/errors.hpp"

namespace racecms::planner {

/// Smallest integer K >= 1 with Delta^(-K/2) >= B, i.e. ceil(2 ln B / ln(1/Delta)).
inline std::uint32_t choose_k(double B, double delta) {
    if (!(B >= 1.0)) throw DomainError("B must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must be in (0, 1)");
    double raw = 2.0 * std::log(B) / std::log(1.0 / delta);
    double k = std::ceil(raw);
    if (k < 1.0) k = 1.0;
    // The ceiling can land one off when raw sits at an integer boundary in
    // floating point; settle it against the defining inequality directly.
    auto holds = [&](double kk) { return std::pow(delta, -0.5 * kk) >= B; };
    while (k > 1.0 && holds(k - 1.0)) k -= 1.0;
    while (!holds(k)) k += 1.0;
    return static_cast<std::uint32_t>(k);
}

/// Score gap the sketch must resolve to separate rank v from rank v+1:
/// p_v^K * (1 - Delta^K).  K may be fractional (used by asymptotic checks).
inline double resolution_epsilon(double p_v, double delta, double K) {
    if (!(p_v > 0.0 && p_v <= 1.0)) throw DomainError("p_v must be in (0, 1]");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must be in (0, 1)");
    if (!(K >= 1.0)) throw DomainError("K must be >= 1");
    return std::pow(p_v, K) * (1.0 - std::pow(delta, K));
}

/// Repetitions per measurement for tolerance eps at failure delta over M
/// measurements: ceil(32 * |s~|_1^2 * ln(M/delta) / eps^2).
inline std::uint64_t reps_needed(double s1_tilde_sq, double eps, double delta, std::uint64_t M) {
    if (!(s1_tilde_sq > 0.0)) throw DomainError("|s~|_1^2 must be > 0");
    if (!(eps > 0.0)) throw DomainError("eps must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must be in (0, 1)");
    if (M < 1) throw DomainError("M must be >= 1");
    double reps = std::ceil(32.0 * s1_tilde_sq * std::log(static_cast<double>(M) / delta) /
                            (eps * eps));
    if (!(reps >= 1.0)) reps = 1.0;
    return static_cast<std::uint64_t>(reps);
}

struct CmsDimensions {
    std::uint32_t d = 0;
    std::uint32_t w = 0;
};

/// Count-min shape for resolving eps overall at failure delta across N
/// elements with score mass |s|_1: d = ceil(ln(N/delta)), w = ceil(4e|s|_1/eps).
inline CmsDimensions cms_dimensions(double s1, double eps, double delta, std::uint64_t N) {
    if (!(s1 > 0.0)) throw DomainError("|s|_1 must be > 0");
    if (!(eps > 0.0)) throw DomainError("eps must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must be in (0, 1)");
    if (N < 1) throw DomainError("N must be >= 1");
    CmsDimensions out;
    out.d = static_cast<std::uint32_t>(std::ceil(std::log(static_cast<double>(N) / delta)));
    if (out.d < 1) out.d = 1;
    out.w = static_cast<std::uint32_t>(
        std::ceil(std::exp(1.0) * 4.0 * s1 / eps));
    if (out.w < 1) out.w = 1;
    return out;
}

struct MemoryExponent {
    double b = 0.0;  // full exponent: (6|ln p_v| + 2 ln r) / ln(1/Delta)
    double b2 = 0.0; // resolution-only exponent: 2|ln p_v| / ln(1/Delta)

    bool sublinear() const noexcept { return b < 1.0; }
};

/// Sketch-size growth exponents in N; b >= 1 means the sketch is not
/// sub-linear for this profile (callers warn, not error).
inline MemoryExponent memory_exponent(double p_v, double delta, std::uint32_t r) {
    if (!(p_v > 0.0 && p_v <= 1.0)) throw DomainError("p_v must be in (0, 1]");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must be in (0, 1)");
    if (r < 2) throw DomainError("r must be >= 2");
    double log_inv_delta = std::log(1.0 / delta);
    double abs_log_pv = std::fabs(std::log(p_v));
    MemoryExponent out;
    out.b = (6.0 * abs_log_pv + 2.0 * std::log(static_cast<double>(r))) / log_inv_delta;
    out.b2 = 2.0 * abs_log_pv / log_inv_delta;
    return out;
}

/// Predicted total bits under a sparsity bound C on the score mass:
/// 32 * (r C^3 / eps^3) * ln((C/(eps delta)) * ln(N/delta)) * ln(N/delta) * ln N.
inline double size_under_sparsity(double C, double eps, double delta, std::uint32_t r,
                                  std::uint64_t N) {
    if (!(C > 0.0)) throw DomainError("C must be > 0");
    if (!(eps > 0.0)) throw DomainError("eps must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must be in (0, 1)");
    if (r < 2) throw DomainError("r must be >= 2");
    if (N < 2) throw DomainError("N must be >= 2");
    double n = static_cast<double>(N);
    double log_nd = std::log(n / delta);
    double leading = 32.0 * static_cast<double>(r) * C * C * C / (eps * eps * eps);
    return leading * std::log(C / (eps * delta) * log_nd) * log_nd * std::log(n);
}

/// Everything the planner pins down for one (profile, budget) request.
struct PlannerBudget {
    std::uint32_t K = 0;
    double epsilon = 0.0;
    std::uint32_t d = 0;
    std::uint32_t w = 0;
    std::uint64_t M = 0; // d * w measurements
    std::uint64_t R = 0; // repetitions per measurement
    double delta = 0.0;  // failure probability budget
    double b = 0.0;
    double b2 = 0.0;
    double size_bits = 0.0; // concrete designed size: d*w*R*r*counter_bits
    bool sublinear = false;
};

struct PlannerInputs {
    double p_v = 0.0;       // collision probability at rank v
    double delta_gap = 0.0; // p_{v+1} / p_v
    double B = 0.0;         // tail mass ratio (equidistant worst case: N - v)
    std::uint32_t v = 1;
    std::uint64_t N = 0;
    double fail_delta = 0.05;
    std::uint32_t lsh_range = 100;
    std::uint32_t counter_bits = 16;
};

/// End-to-end parameter selection: K from (B, Delta); the resolution eps from
/// (p_v, Delta, K); grid shape and repetitions from the v+1 mass bound with
/// the failure budget split evenly between the count-min and estimator sides
/// (estimator tolerance eps/4 per the recovery error split).
inline PlannerBudget make_budget(const PlannerInputs& in) {
    if (in.v < 1) throw DomainError("v must be >= 1");
    if (in.N < in.v + 1) throw DomainError("N must be >= v + 1");
    PlannerBudget out;
    out.K = choose_k(in.B, in.delta_gap);
    out.epsilon = resolution_epsilon(in.p_v, in.delta_gap, out.K);
    out.delta = in.fail_delta;
    double s1_bound = static_cast<double>(in.v) + 1.0;
    CmsDimensions dims = cms_dimensions(s1_bound, out.epsilon, in.fail_delta / 2.0, in.N);
    out.d = dims.d;
    out.w = dims.w;
    out.M = std::uint64_t(dims.d) * dims.w;
    out.R = reps_needed(s1_bound * s1_bound, out.epsilon / 4.0, in.fail_delta / 2.0, out.M);
    MemoryExponent exp = memory_exponent(in.p_v, in.delta_gap, in.lsh_range);
    out.b = exp.b;
    out.b2 = exp.b2;
    out.sublinear = exp.sublinear();
    out.size_bits = static_cast<double>(out.M) * static_cast<double>(out.R) *
                    static_cast<double>(in.lsh_range) * static_cast<double>(in.counter_bits);
    return out;
}

} // namespace racecms::planner
