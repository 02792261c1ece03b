#include "ergokit/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ergokit/averaging.hpp"
#include "ergokit/errors.hpp"
#include "ergokit/vdc.hpp"

namespace ergo {

static bool le_ok(const Num& lhs, const Num& rhs) {
    if (lhs.exact() && rhs.exact()) return lhs <= rhs;
    return le_with_slack(lhs, rhs);
}

// incremental per-n averages of term(g) along the sequence shells
template <class Term>
static Series shell_average(const std::string& name, const FolnerSequence& seq, long long n_max,
                            Term term) {
    Series out(name, {"value"});
    Num acc(0);
    long long count = 0;
    for (long long n = 1; n <= n_max; ++n) {
        std::vector<Num> terms;
        for (const GroupElement& g : seq.increment(n)) terms.push_back(term(g));
        if (!terms.empty()) acc += sum(terms);
        count += (long long)terms.size();
        if (count == 0) throw structural_error("zero-measure index in sequence");
        out.add_row(n, Num(Rat(count) * seq.model().weight()), {acc / Num(count)});
    }
    return out;
}

Series wm_average(const MPSystem& sys, const Observable& a0, const Observable& a1,
                  const Homomorphism& phi, const FolnerSequence& seq, long long n_max) {
    check_event(sys, a0);
    check_event(sys, a1);
    const GroupModel& model = seq.model();
    Num p = expect(sys, a0) * expect(sys, a1);
    return shell_average("wm", seq, n_max, [&](const GroupElement& g) {
        return abs(set_correlation(sys, a0, a1, model.reduce(phi.apply(model, g))) - p);
    });
}

ErgodicReport ergodic_average(const MPSystem& sys, const Observable& a0, const Observable& a1,
                              const Homomorphism& phi, const FolnerSequence& seq,
                              long long n_max) {
    check_event(sys, a0);
    check_event(sys, a1);
    const GroupModel& model = seq.model();
    ErgodicReport rep;
    rep.target = expect(sys, a0) * expect(sys, a1);
    rep.series = shell_average("ergodic", seq, n_max, [&](const GroupElement& g) {
        return set_correlation(sys, a0, a1, model.reduce(phi.apply(model, g)));
    });
    return rep;
}

Series l2_wm_average(const MPSystem& sys, const Observable& f1, const Observable& f2,
                     const Homomorphism& phi, const FolnerSequence& seq, long long n_max) {
    if (!obs_is_real(f1) || !obs_is_real(f2))
        throw structural_error("deviation average needs real observables");
    const GroupModel& model = seq.model();
    Num p = expect(sys, f1) * expect(sys, f2);
    return shell_average("l2-wm", seq, n_max, [&](const GroupElement& g) {
        return abs(set_correlation(sys, f1, f2, model.reduce(phi.apply(model, g))) - p);
    });
}

EquivalenceMatrix product_equivalence_check(const MPSystem& sys, const Observable& a0,
                                            const Observable& a1, const Observable& f1,
                                            const Observable& f2, const Homomorphism& phi,
                                            const FolnerSequence& seq, long long n_max,
                                            const TrendPolicy& policy) {
    MPSystem prod = product_system(sys, sys);
    Observable r0 = tensor_sum({{a0, a0}});
    Observable r1 = tensor_sum({{a1, a1}});

    EquivalenceMatrix rep;
    rep.sys_wm = wm_average(sys, a0, a1, phi, seq, n_max);
    rep.product_wm = wm_average(prod, r0, r1, phi, seq, n_max);
    ErgodicReport erg = ergodic_average(prod, r0, r1, phi, seq, n_max);
    rep.product_ergodic_dev = Series("product-ergodic-dev", {"value"});
    for (std::size_t r = 0; r < erg.series.rows(); ++r)
        rep.product_ergodic_dev.add_row(erg.series.index(r), erg.series.mu(r),
                                        {abs(erg.series.value(r) - erg.target)});
    rep.l2 = l2_wm_average(sys, f1, f2, phi, seq, n_max);

    rep.sys_wm_pass = trend_to_zero(rep.sys_wm, policy);
    rep.product_wm_pass = trend_to_zero(rep.product_wm, policy);
    rep.product_ergodic_pass = trend_to_zero(rep.product_ergodic_dev, policy);
    rep.l2_pass = trend_to_zero(rep.l2, policy);
    rep.consistent = rep.sys_wm_pass == rep.product_wm_pass &&
                     rep.sys_wm_pass == rep.product_ergodic_pass &&
                     rep.sys_wm_pass == rep.l2_pass;
    return rep;
}

MixingExperiment make_experiment(MPSystem system, FolnerSequence seq, TranslationalFamily family,
                                 std::vector<Homomorphism> phis, std::vector<Observable> obs,
                                 long long n_max, double c_bound) {
    if (phis.empty()) throw config_error("order-k experiment needs at least one homomorphism");
    if (obs.size() != phis.size() + 1)
        throw config_error("order-k experiment needs k homomorphisms and k+1 observables");
    if (n_max < 1) throw config_error("n_max must be positive");
    if (!(c_bound > 0)) throw config_error("quotient growth constant must be positive");
    int rank = seq.model().rank();
    for (std::size_t i = 0; i < phis.size(); ++i) {
        if (phis[i].rank() != rank) throw config_error("homomorphism rank mismatch");
        if (phis[i].is_zero())
            throw config_error("the zero map is reserved for the untransported slot");
        for (std::size_t l = i + 1; l < phis.size(); ++l)
            if (phis[i] == phis[l])
                throw config_error("homomorphisms must be pairwise distinct");
    }
    for (const Observable& f : obs) {
        if (!f.valid()) throw config_error("experiment observable is empty");
        if (!obs_is_real(f)) throw config_error("experiment observables must be real-valued");
    }
    MixingExperiment exp{std::move(system), std::move(seq),    std::move(family), (int)phis.size(),
                         std::move(phis),   std::move(obs),    n_max,             c_bound};
    return exp;
}

Num kappa_constant(const MixingExperiment& exp) {
    Num k(1);
    for (int j = 1; j <= exp.k; ++j) k *= expect(exp.system, exp.obs[(std::size_t)j]);
    return k;
}

Num correlation_target(const MixingExperiment& exp) {
    return kappa_constant(exp) * expect(exp.system, exp.obs[0]);
}

UFunction::UFunction(const MixingExperiment& exp) : exp_(&exp), kappa_(kappa_constant(exp)) {
    double prod = 1;
    for (int j = 1; j <= exp.k; ++j) prod *= obs_sup_bound(exp.obs[(std::size_t)j]);
    bound_ = prod + std::abs(kappa_.dbl());
    bernoulli_ = exp.system.get<BernoulliSys>() != nullptr;
}

const UFunction::Entry& UFunction::at(const GroupElement& g) const {
    auto it = cache_.find(g);
    if (it != cache_.end()) return it->second;
    const GroupModel& model = exp_->seq.model();
    Observable prod = koopman(exp_->system, model.reduce(exp_->phis[0].apply(model, g)),
                              exp_->obs[1]);
    for (int j = 2; j <= exp_->k; ++j)
        prod = multiply(exp_->system, prod,
                        koopman(exp_->system, model.reduce(exp_->phis[(std::size_t)j - 1].apply(model, g)),
                                exp_->obs[(std::size_t)j]));
    Entry e{prod, expect(exp_->system, prod), {}};
    if (bernoulli_) e.support = cylinder_support(prod);
    return cache_.emplace(g, std::move(e)).first->second;
}

static bool sorted_disjoint(const std::vector<GroupElement>& a, const std::vector<GroupElement>& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else return false;
    }
    return true;
}

Num UFunction::inner(const GroupElement& g1, const GroupElement& g2) const {
    const Entry& e1 = at(g1);
    const Entry& e2 = at(g2);
    if (bernoulli_ && sorted_disjoint(e1.support, e2.support))
        return (e1.expect - kappa_) * (e2.expect - kappa_);
    Num cross = expect_product(exp_->system, e1.prod, e2.prod);
    return cross - kappa_ * e1.expect - kappa_ * e2.expect + kappa_ * kappa_;
}

Num UFunction::centered_expect(const GroupElement& g) const { return at(g).expect - kappa_; }

HypothesisReport check_hypotheses(const MixingExperiment& exp) {
    const GroupModel& model = exp.seq.model();
    HypothesisReport rep;

    rep.measure_preserving = true;
    std::vector<GroupElement> probes = exp.seq.at(1).elements();
    for (int j = 1; j <= exp.k && rep.measure_preserving; ++j)
        for (const GroupElement& g : probes) {
            GroupElement moved = model.reduce(exp.phis[(std::size_t)j - 1].apply(model, g));
            if (!check_measure_preserving(exp.system, exp.obs[(std::size_t)j], moved)) {
                rep.measure_preserving = false;
                break;
            }
        }
    if (!rep.measure_preserving) rep.failures.push_back("measure-preserving");

    rep.identity_action = true;
    for (const Observable& f : exp.obs)
        if (koopman(exp.system, model.identity(), f) != f) rep.identity_action = false;
    if (!rep.identity_action) rep.failures.push_back("identity-action");

    TranslationalVerdict fam = exp.family.verify_for(exp.phis);
    rep.family_ok = fam.pass;
    if (!fam.pass) rep.failures.push_back("translational-family: " + fam.witness);

    rep.c_bound_ok = true;
    for (long long n = 1; n <= exp.n_max; n = n * 2) {
        FiniteSubset lam = exp.seq.at(n);
        double lhs = rat_to_double(lam.quotient().measure());
        double rhs = exp.c_bound * rat_to_double(lam.measure());
        if (lhs > rhs * (1 + 1e-12)) {
            rep.c_bound_ok = false;
            break;
        }
    }
    if (!rep.c_bound_ok) rep.failures.push_back("quotient-growth-bound");

    long long half = std::max(1LL, exp.n_max / 2);
    rep.defect_trend = uniform_defect(exp.seq, exp.n_max, 2) <= uniform_defect(exp.seq, half, 2);
    if (!rep.defect_trend) rep.failures.push_back("defect-trend");

    rep.notes = "openness of the averaging sets and continuity of g -> f o T_phi(g): "
                "vacuous for discrete groups, recorded unchecked";
    if (model.describe().find("scaled") != std::string::npos)
        rep.notes += "; scaled lattice stands in for a continuum ball (box approximation)";
    rep.ok = rep.failures.empty();
    return rep;
}

Num gamma_closed_form(const MixingExperiment& exp, const GroupElement& h) {
    const GroupModel& model = exp.seq.model();
    Num prod(1);
    for (int j = 1; j <= exp.k; ++j) {
        const Observable& f = exp.obs[(std::size_t)j];
        GroupElement moved = model.reduce(exp.phis[(std::size_t)j - 1].apply(model, h));
        prod *= expect_product(exp.system, f, koopman(exp.system, moved, f));
    }
    Num kap = kappa_constant(exp);
    return prod - kap * kap;
}

GammaCheck gamma_estimate_vs_closed_form(const MixingExperiment& exp, const GroupElement& h,
                                         long long n_max) {
    const GroupModel& model = exp.seq.model();
    UFunction u(exp);
    GammaCheck rep;
    rep.closed_form = gamma_closed_form(exp, h);
    rep.estimate = shell_average("gamma-est-" + h.str(), exp.seq, n_max,
                                 [&](const GroupElement& g) {
                                     return u.inner(g, model.compose(g, h));
                                 });
    auto agrees = [&](const Num& v) {
        if (v.exact() && rep.closed_form.exact()) return v.rat() == rep.closed_form.rat();
        return std::abs((v - rep.closed_form).dbl()) <= 1e-9;
    };
    rep.exact_from = -1;
    for (std::size_t r = rep.estimate.rows(); r-- > 0;) {
        if (!agrees(rep.estimate.value(r))) break;
        rep.exact_from = rep.estimate.index(r);
    }
    rep.pass = rep.exact_from != -1;
    return rep;
}

OrderKReport order_k_wm_series(const MixingExperiment& exp, const TrendPolicy& policy) {
    OrderKReport rep;
    rep.hypotheses = check_hypotheses(exp);
    if (!rep.hypotheses.ok) {
        std::string msg = "hypothesis check failed:";
        for (const std::string& f : rep.hypotheses.failures) msg += " " + f;
        throw hypothesis_error(msg);
    }

    const GroupModel& model = exp.seq.model();
    rep.target = correlation_target(exp);
    rep.kappa = kappa_constant(exp);
    UFunction u(exp);

    std::string k_tag = std::to_string(exp.k);
    rep.one_k = Series("order" + k_tag + "-sq", {"value"});
    rep.one_k_abs = Series("order" + k_tag + "-abs", {"value"});
    rep.two_k = Series("order" + k_tag + "-corr", {"value"});
    rep.two_k_dev = Series("order" + k_tag + "-corr-dev", {"value"});
    rep.three_k = Series("order" + k_tag + "-u-norm", {"norm_sq", "norm"});

    Num acc_sq(0), acc_abs(0), acc_two(0), pair_sum(0);
    long long count = 0;
    std::vector<GroupElement> seen;
    for (long long n = 1; n <= exp.n_max; ++n) {
        std::vector<Num> sq_terms, abs_terms, two_terms;
        for (const GroupElement& g : exp.seq.increment(n)) {
            Observable prod = exp.obs[0];
            for (int j = 1; j <= exp.k; ++j)
                prod = multiply(exp.system, prod,
                                koopman(exp.system,
                                        model.reduce(exp.phis[(std::size_t)j - 1].apply(model, g)),
                                        exp.obs[(std::size_t)j]));
            Num corr = expect(exp.system, prod);
            Num dev = corr - rep.target;
            sq_terms.push_back(sq(dev));
            abs_terms.push_back(abs(dev));
            two_terms.push_back(corr);

            std::vector<Num> cross;
            for (const GroupElement& g0 : seen) cross.push_back(u.inner(g0, g));
            if (!cross.empty()) pair_sum += Num(2) * sum(cross);
            pair_sum += u.inner(g, g);
            seen.push_back(g);
        }
        if (!sq_terms.empty()) {
            acc_sq += sum(sq_terms);
            acc_abs += sum(abs_terms);
            acc_two += sum(two_terms);
        }
        count += (long long)sq_terms.size();
        if (count == 0) throw structural_error("zero-measure index in sequence");
        Num cnt(count);
        Num mu = Num(Rat(count) * model.weight());
        rep.one_k.add_row(n, mu, {acc_sq / cnt});
        rep.one_k_abs.add_row(n, mu, {acc_abs / cnt});
        Num two = acc_two / cnt;
        rep.two_k.add_row(n, mu, {two});
        rep.two_k_dev.add_row(n, mu, {abs(two - rep.target)});
        Num norm_sq = pair_sum / (cnt * cnt);
        Num norm;
        if (norm_sq.exact() && norm_sq.is_zero()) norm = Num(0);
        else norm = Num::from_double(std::sqrt(std::max(0.0, norm_sq.dbl())));
        rep.three_k.add_row(n, mu, {norm_sq, norm});
    }

    rep.one_trend = trend_to_zero(rep.one_k, policy);
    rep.abs_trend = trend_to_zero(rep.one_k_abs, policy);
    rep.bridge_consistent = rep.one_trend == rep.abs_trend;
    rep.two_converges = !rep.one_trend || trend_to_zero(rep.two_k_dev, policy);
    rep.three_trend = trend_to_zero(rep.three_k, policy, 1);
    bool pass = rep.one_trend && rep.bridge_consistent && rep.two_converges && rep.three_trend;
    rep.verdict = pass ? Verdict::Pass : Verdict::Fail;
    return rep;
}

IdentityCheck proof_identity_check(const MixingExperiment& exp, const GroupElement& g,
                                   const GroupElement& h) {
    const GroupModel& model = exp.seq.model();
    GroupElement gh = model.compose(g, h);
    UFunction u(exp);
    IdentityCheck rep;
    rep.decomposed = u.inner(g, gh);

    // rebuild the two transported products without the factorization shortcut
    auto prod_at = [&](const GroupElement& x) {
        Observable p = koopman(exp.system, model.reduce(exp.phis[0].apply(model, x)), exp.obs[1]);
        for (int j = 2; j <= exp.k; ++j)
            p = multiply(exp.system, p,
                         koopman(exp.system, model.reduce(exp.phis[(std::size_t)j - 1].apply(model, x)),
                                 exp.obs[(std::size_t)j]));
        return p;
    };
    Observable pg = prod_at(g);
    Observable pgh = prod_at(gh);
    Num kap = u.kappa();
    if (kap.exact()) {
        // center explicitly when the algebra carries constants
        Observable cst;
        if (pg.get<CylinderPoly>()) cst = cylinder_constant(-kap.rat());
        else if (const TrigPoly* tp = pg.get<TrigPoly>()) cst = trig_constant(tp->dim, -kap.rat());
        if (cst.valid()) {
            Observable ug = obs_add(pg, cst);
            Observable ugh = obs_add(pgh, cst);
            rep.direct = expect(exp.system, multiply(exp.system, ug, ugh));
            rep.ok = le_ok(rep.direct, rep.decomposed) && le_ok(rep.decomposed, rep.direct);
            return rep;
        }
    }
    Num cross = expect_product(exp.system, pg, pgh);
    rep.direct = cross - kap * expect(exp.system, pg) - kap * expect(exp.system, pgh) + kap * kap;
    rep.ok = le_ok(rep.direct, rep.decomposed) && le_ok(rep.decomposed, rep.direct);
    return rep;
}

TelescopingReport telescoping_bound(const MixingExperiment& exp, long long m) {
    const GroupModel& model = exp.seq.model();
    FiniteSubset quot = exp.seq.at(m).quotient();

    std::vector<Num> b;
    std::vector<Num> caps; // A_j = prod_{l<j} sup_l^2
    Num running_cap(1);
    for (int j = 1; j <= exp.k; ++j) {
        Num e = expect(exp.system, exp.obs[(std::size_t)j]);
        b.push_back(e * e);
        caps.push_back(running_cap);
        double s = obs_sup_bound(exp.obs[(std::size_t)j]);
        running_cap = running_cap * Num::from_double(s * s);
    }

    std::vector<Num> lhs_terms;
    std::vector<Num> rhs_factors((std::size_t)exp.k, Num(0));
    for (const GroupElement& h : quot.elements()) {
        Num prod_a(1), prod_b(1);
        for (int j = 1; j <= exp.k; ++j) {
            const Observable& f = exp.obs[(std::size_t)j];
            GroupElement moved = model.reduce(exp.phis[(std::size_t)j - 1].apply(model, h));
            Num a = expect_product(exp.system, f, koopman(exp.system, moved, f));
            prod_a *= a;
            prod_b *= b[(std::size_t)j - 1];
            rhs_factors[(std::size_t)j - 1] += abs(a - b[(std::size_t)j - 1]);
        }
        lhs_terms.push_back(abs(prod_a - prod_b));
    }

    TelescopingReport rep;
    rep.lhs = sum(lhs_terms);
    rep.rhs = Num(0);
    for (int j = 1; j <= exp.k; ++j) {
        Num tail(1);
        for (int l = j + 1; l <= exp.k; ++l) tail *= b[(std::size_t)l - 1];
        rep.rhs += caps[(std::size_t)j - 1] * tail * rhs_factors[(std::size_t)j - 1];
    }
    if (!le_ok(rep.lhs, rep.rhs))
        throw inequality_failure("telescoping bound violated",
                                 "lhs " + rep.lhs.str() + " > rhs " + rep.rhs.str() + " at m=" +
                                     std::to_string(m));
    rep.ok = true;
    return rep;
}

PipelineReport mixing_pipeline(const MixingExperiment& exp, const TrendPolicy& policy) {
    PipelineReport rep;
    rep.hypotheses = check_hypotheses(exp);
    if (!rep.hypotheses.ok) {
        std::string joined;
        for (const std::string& f : rep.hypotheses.failures)
            joined += (joined.empty() ? "" : "; ") + f;
        rep.stages.push_back({"hypothesis-battery", Verdict::Fail, joined});
        return rep;
    }
    rep.stages.push_back({"hypothesis-battery", Verdict::Pass, ""});

    // order-1 weak mixing of every transported observable, on the sequence
    // itself and on its quotient sequence
    FolnerSequence qseq = FolnerSequence::quotient_of(exp.seq);
    bool wm_ok = true;
    std::string wm_witness;
    for (int j = 1; j <= exp.k; ++j) {
        const Observable& f = exp.obs[(std::size_t)j];
        const Homomorphism& phi = exp.phis[(std::size_t)j - 1];
        for (const FolnerSequence* s : std::vector<const FolnerSequence*>{&exp.seq, &qseq}) {
            Series dev = l2_wm_average(exp.system, f, f, phi, *s, exp.n_max);
            rep.wm_checks.push_back(dev);
            if (!trend_to_zero(dev, policy)) {
                wm_ok = false;
                if (wm_witness.empty())
                    wm_witness = "observable " + std::to_string(j) + " on " + s->name() +
                                 ": tail " + dev.last_quartile_abs_mean().str();
            }
        }
    }
    rep.stages.push_back({"weak-mixing-hypothesis", wm_ok ? Verdict::Pass : Verdict::Fail,
                          wm_witness});
    if (!wm_ok) return rep;

    std::vector<long long> m_list = {1, 2, 4, 8};
    for (int j = 1; j <= exp.k; ++j) {
        std::string tag = " (order " + std::to_string(j) + ")";
        MixingExperiment sub{exp.system,
                             exp.seq,
                             exp.family,
                             j,
                             {exp.phis.begin(), exp.phis.begin() + j},
                             {exp.obs.begin(), exp.obs.begin() + j + 1},
                             exp.n_max,
                             exp.c_bound};
        auto gamma = [&sub](const GroupElement& h) { return gamma_closed_form(sub, h); };

        bool qb_ok = true;
        std::string qb_witness;
        try {
            for (long long m : {2LL, 4LL}) gamma_quotient_bound(gamma, sub.seq, m);
        } catch (const inequality_failure& e) {
            qb_ok = false;
            qb_witness = e.what();
        }
        rep.stages.push_back({"quotient-bound" + tag, qb_ok ? Verdict::Pass : Verdict::Fail,
                              qb_witness});
        if (!qb_ok) return rep;

        Series cond = gamma_condition_series(gamma, sub.seq, m_list);
        bool cond_ok = trend_to_zero(cond, policy);
        rep.stages.push_back({"vdc-condition" + tag, cond_ok ? Verdict::Pass : Verdict::Fail,
                              cond_ok ? "" : "tail " + cond.last_quartile_abs_mean().str()});
        if (!cond_ok) return rep;

        bool tel_ok = true;
        std::string tel_witness;
        try {
            telescoping_bound(sub, 4);
        } catch (const inequality_failure& e) {
            tel_ok = false;
            tel_witness = e.what();
        }
        rep.stages.push_back({"telescoping" + tag, tel_ok ? Verdict::Pass : Verdict::Fail,
                              tel_witness});
        if (!tel_ok) return rep;

        OrderKReport ord = order_k_wm_series(sub, policy);
        bool ord_ok = ord.verdict == Verdict::Pass;
        rep.stages.push_back({"order-deviation" + tag, ord.verdict,
                              ord_ok ? ""
                                     : "tail " + ord.one_k.last_quartile_abs_mean().str()});
        if (!ord_ok) return rep;
    }
    rep.pass = true;
    return rep;
}

} // namespace ergo
