#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ergokit/averaging.hpp"
#include "ergokit/group.hpp"
#include "ergokit/series.hpp"

namespace ergo {

// Every inequality operation evaluates both sides literally (weights
// included), returns them, and throws inequality_failure when the proved
// inequality is violated: strict comparison on exact values, relative slack
// 1e-12 when floats are involved.
struct InequalityReport {
    Num lhs, rhs;
    bool ok = false;
};

// ||sum_set f w||^2 <= mu(set) * sum_set ||f||^2 w
InequalityReport avg_norm_inequality(const GroupFunction& f, const FiniteSubset& set);

// Distance between the plain average over Lambda_n and the double average of
// f(gh) over Lambda_n x Lambda_m, against the proof bound
// b * max_{h in Lambda_m} mu(Lambda_n delta Lambda_n h)/mu(Lambda_n).
struct GapReport {
    Num gap, bound;
    bool ok = false;
};

GapReport shift_average_gap(const GroupFunction& f, const FolnerSequence& seq, long long n,
                            long long m);

// ||sum_{g in lam2} sum_{h in lam1} f(gh)||^2
//   <= mu(lam2) * sum_{h1,h2 in lam1} sum_{g in lam2} <f(g h1), f(g h2)>
InequalityReport triple_avg_inequality(const GroupFunction& f, const FiniteSubset& lam1,
                                       const FiniteSubset& lam2);

// Correlation estimates gamma_h^(n) = (1/mu(Lambda_n)) sum_{Lambda_n} <f(g), f(gh)>
struct CorrelationSeries {
    GroupElement h;
    Series series;
    Num limit_estimate; // signed mean over the last-quartile rows
};

CorrelationSeries gamma_series(const GroupFunction& f, const FolnerSequence& seq,
                               const GroupElement& h, long long n_max);

// Shifted correlations (1/mu) sum <f(g h1), f(g h2)> converge to gamma at
// h1^{-1} h2; per index the difference from the plain correlation is bounded
// by b^2 * mu(Lambda_n delta Lambda_n h1)/mu(Lambda_n), and that bound is
// enforced (throwing on violation).
struct ShiftedGammaReport {
    Series shifted;
    Series base;
    Num shifted_limit, base_limit;
    bool limits_agree = false;
    bool per_index_bound_ok = false;
};

ShiftedGammaReport shifted_gamma_consistency(const GroupFunction& f, const FolnerSequence& seq,
                                             const GroupElement& h1, const GroupElement& h2,
                                             long long n_max, double agree_tol = 1e-2);

// At fixed m, the normalized triple average over Lambda_m^2 x Lambda_n tends
// to the double sum of gamma limit estimates over Lambda_m^2.
struct TripleDoubleReport {
    Series triple;
    Num triple_limit;
    Num double_sum;
    bool pass = false;
};

TripleDoubleReport triple_to_double_limit(const GroupFunction& f, const FolnerSequence& seq,
                                          long long m, long long n_max, double agree_tol = 1e-2);

// sum_{h1,h2 in set} f(h1^{-1} h2) w^2 <= mu(set) * sum_S f w for nonnegative
// f and any S containing the quotient set; S defaults to the quotient set.
InequalityReport folding_inequality(const GroupFunction& f, const FiniteSubset& set);
InequalityReport folding_inequality(const GroupFunction& f, const FiniteSubset& set,
                                    const FiniteSubset& S);

// |(1/mu^2) sum_{h1,h2} gamma(h1^{-1}h2)| <= (1/mu) sum_{quotient} |gamma|
struct QuotientBoundReport {
    Num lhs, rhs;
    bool ok = false;
};

QuotientBoundReport gamma_quotient_bound(const std::function<Num(const GroupElement&)>& gamma,
                                         const FolnerSequence& seq, long long m);

// c_m = (1/mu(Lambda_m)^2) sum_{h1,h2 in Lambda_m} gamma(h1^{-1}h2), one row
// per entry of m_list
Series gamma_condition_series(const std::function<Num(const GroupElement&)>& gamma,
                              const FolnerSequence& seq, const std::vector<long long>& m_list);

// Full sequence-form verdict: the condition series
//   c_m = (1/mu(Lambda_m)^2) sum_{h1,h2 in Lambda_m} gamma(h1^{-1}h2)
// over m_list (gamma from limit estimates of f unless overridden), and the
// conclusion series ||avg_{Lambda_n} f||. PASS when both trend to zero,
// INCONCLUSIVE when the condition does not (nothing is then asserted), FAIL
// when the condition trends but the conclusion does not.
struct VdcVerdict {
    Series condition;
    Series conclusion;
    bool condition_trend = false;
    bool conclusion_trend = false;
    Rat defect_probe_half, defect_probe_full; // uniform defect at n_max/2 and n_max
    bool uniformity_ok = false;
    std::string notes; // non-finite hypotheses recorded, not checked
    Verdict verdict = Verdict::Inconclusive;
};

VdcVerdict vdc_verdict(const GroupFunction& f, const FolnerSequence& seq,
                       const std::vector<long long>& m_list, long long n_max,
                       const TrendPolicy& policy = {},
                       const std::function<Num(const GroupElement&)>& gamma_override = {});

} // namespace ergo
