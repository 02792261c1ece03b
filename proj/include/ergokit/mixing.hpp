#pragma once

#include <map>
#include <string>
#include <vector>

#include "ergokit/dynamics.hpp"
#include "ergokit/group.hpp"
#include "ergokit/series.hpp"

namespace ergo {

// ---------------------------------------------------------------------------
// Order-1 diagnostics. All averages run incrementally over sequence shells;
// on Bernoulli systems with cylinder observables every row is an exact
// rational.

// Per-n averages of |omega(a0 . a1 o T_phi(g)) - omega(a0) omega(a1)| for
// event observables a0, a1 (idempotence is checked). Trends to 0 exactly when
// the system mixes weakly along phi.
Series wm_average(const MPSystem& sys, const Observable& a0, const Observable& a1,
                  const Homomorphism& phi, const FolnerSequence& seq, long long n_max);

// Signed per-n averages of omega(a0 . a1 o T_phi(g)); an ergodic system sends
// them to the product target omega(a0) omega(a1).
struct ErgodicReport {
    Series series;
    Num target;
};

ErgodicReport ergodic_average(const MPSystem& sys, const Observable& a0, const Observable& a1,
                              const Homomorphism& phi, const FolnerSequence& seq, long long n_max);

// The same deviation average for arbitrary real observables f1, f2:
// |omega(f1 . f2 o T_phi(g)) - omega(f1) omega(f2)|.
Series l2_wm_average(const MPSystem& sys, const Observable& f1, const Observable& f2,
                     const Homomorphism& phi, const FolnerSequence& seq, long long n_max);

// Four equivalent formulations of weak mixing, run side by side: the system
// deviation average, the same on the doubled system over rectangle events,
// the doubled system's ergodic deviation, and the observable form on f1, f2.
// CONSISTENT means all four trend verdicts agree (all pass or all fail).
struct EquivalenceMatrix {
    Series sys_wm;
    Series product_wm;
    Series product_ergodic_dev; // |running average - rectangle target|
    Series l2;
    bool sys_wm_pass = false;
    bool product_wm_pass = false;
    bool product_ergodic_pass = false;
    bool l2_pass = false;
    bool consistent = false;
};

EquivalenceMatrix product_equivalence_check(const MPSystem& sys, const Observable& a0,
                                            const Observable& a1, const Observable& f1,
                                            const Observable& f2, const Homomorphism& phi,
                                            const FolnerSequence& seq, long long n_max,
                                            const TrendPolicy& policy = {});

// ---------------------------------------------------------------------------
// Order-k machinery. An experiment fixes a system, a sequence, a
// difference-closed homomorphism family, pairwise-distinct members phi_1..
// phi_k of it, and real bounded observables f_0..f_k (slot 0 rides along
// untransported; the zero map is reserved for it and may not appear among the
// phis).

struct MixingExperiment {
    MPSystem system;
    FolnerSequence seq;
    TranslationalFamily family;
    int k = 0;
    std::vector<Homomorphism> phis; // phi_1..phi_k
    std::vector<Observable> obs;    // f_0..f_k
    long long n_max = 0;
    double c_bound = 0; // declared constant with mu(quotient(Lambda_n)) <= c mu(Lambda_n)
};

// Validates shapes, distinctness, realness; throws config_error on violation.
MixingExperiment make_experiment(MPSystem system, FolnerSequence seq, TranslationalFamily family,
                                 std::vector<Homomorphism> phis, std::vector<Observable> obs,
                                 long long n_max, double c_bound);

Num kappa_constant(const MixingExperiment& exp);     // prod_{j>=1} omega(f_j)
Num correlation_target(const MixingExperiment& exp); // prod_{j>=0} omega(f_j)

// The centered product u_g = prod_{j>=1} f_j o T_{phi_j(g)} - kappa, kept
// virtual: inner products <u_g, u_g'> go through the exact expectation oracle
// omega(u_g u_g'), never through coordinates. On Bernoulli systems a pair
// with disjoint cylinder supports factorizes through the per-element centered
// expectations. Holds a reference to the experiment; do not outlive it.
class UFunction {
public:
    explicit UFunction(const MixingExperiment& exp);

    Num inner(const GroupElement& g1, const GroupElement& g2) const; // omega(u_g1 u_g2)
    Num centered_expect(const GroupElement& g) const;                // omega(u_g)
    const Num& kappa() const { return kappa_; }
    double sup_bound() const { return bound_; }

private:
    struct Entry {
        Observable prod;
        Num expect;
        std::vector<GroupElement> support;
    };
    const Entry& at(const GroupElement& g) const;

    const MixingExperiment* exp_;
    Num kappa_;
    double bound_;
    bool bernoulli_;
    mutable std::map<GroupElement, Entry> cache_;
};

// Finite-scale hypothesis battery for the order-k statements. Failures are
// listed by name; hypotheses that are vacuous at desk scale (openness,
// continuity of the orbit map) are recorded in notes, not checked.
struct HypothesisReport {
    bool measure_preserving = false;
    bool identity_action = false;
    bool family_ok = false;
    bool c_bound_ok = false;
    bool defect_trend = false;
    std::vector<std::string> failures;
    std::string notes;
    bool ok = false;
};

HypothesisReport check_hypotheses(const MixingExperiment& exp);

// gamma_h = prod_{j>=1} omega(f_j . f_j o T_{phi_j(h)}) - kappa^2, evaluated
// exactly through the oracle.
Num gamma_closed_form(const MixingExperiment& exp, const GroupElement& h);

// Compares the running estimates (1/mu(Lambda_n)) sum_g omega(u_g u_gh)
// against the closed form. exact_from is the first index of the trailing run
// of rows equal to the closed form (-1 if the last row differs).
struct GammaCheck {
    Series estimate;
    Num closed_form;
    long long exact_from = -1;
    bool pass = false;
};

GammaCheck gamma_estimate_vs_closed_form(const MixingExperiment& exp, const GroupElement& h,
                                         long long n_max);

// The order-k deviation series and verdicts:
//   one_k      per-n average of (omega(prod_{j>=0} f_j o T_{phi_j(g)}) - target)^2
//   one_k_abs  same with |.| instead of the square (the two must trend together)
//   two_k      running signed average of the uncentered correlation
//   three_k    ||(1/mu) sum u_g|| via the exact double expectation, columns
//              norm_sq and norm
// Overall PASS needs one_k and three_k to trend, the abs bridge to agree, and
// two_k to converge to the target whenever one_k trends.
struct OrderKReport {
    Series one_k, one_k_abs, two_k, two_k_dev, three_k;
    Num target, kappa;
    bool one_trend = false;
    bool abs_trend = false;
    bool bridge_consistent = false;
    bool two_converges = false;
    bool three_trend = false;
    HypothesisReport hypotheses;
    Verdict verdict = Verdict::Inconclusive;
};

OrderKReport order_k_wm_series(const MixingExperiment& exp, const TrendPolicy& policy = {});

// omega(u_g u_g') recomputed two ways: through explicit centered observables
// (when the algebra carries constants and kappa is exact) and through the
// four-term expansion omega(P P') - kappa omega(P) - kappa omega(P') +
// kappa^2. Must agree exactly on exact paths.
struct IdentityCheck {
    Num direct, decomposed;
    bool ok = false;
};

IdentityCheck proof_identity_check(const MixingExperiment& exp, const GroupElement& g,
                                   const GroupElement& h);

// Product-difference telescoping over S = quotient(Lambda_m):
//   sum_S |gamma_h| <= sum_j A_j (prod_{l>j} omega(f_l)^2)
//                       sum_S |omega(f_j . f_j o T_{phi_j(h)}) - omega(f_j)^2|
// with A_j = prod_{l<j} sup_l^2 from the declared bounds. Throws on
// violation.
struct TelescopingReport {
    Num lhs, rhs;
    bool ok = false;
};

TelescopingReport telescoping_bound(const MixingExperiment& exp, long long m);

// Staged run of the full induction: hypothesis battery, order-1 weak mixing
// on the sequence and on its quotient sequence, then per order j = 1..k the
// quotient bound, the vdc condition trend, the telescoping bound, and the
// order-j deviation trend. Any failed stage stops the run (negative controls
// must refuse, not limp forward).
struct PipelineStage {
    std::string name;
    Verdict verdict = Verdict::Inconclusive;
    std::string witness;
};

struct PipelineReport {
    HypothesisReport hypotheses;
    std::vector<Series> wm_checks;
    std::vector<PipelineStage> stages;
    bool pass = false;
};

PipelineReport mixing_pipeline(const MixingExperiment& exp, const TrendPolicy& policy = {});

} // namespace ergo
