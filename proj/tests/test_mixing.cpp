#include "doctest.h"

#include <cmath>

#include "ergokit/dynamics.hpp"
#include "ergokit/errors.hpp"
#include "ergokit/group.hpp"
#include "ergokit/mixing.hpp"
#include "ergokit/num.hpp"
#include "ergokit/rng.hpp"

using namespace ergo;

namespace {

GroupElement el(std::initializer_list<long long> c) { return GroupElement{std::vector<long long>(c)}; }

Rat rr(long long p, long long q) { return Rat(p) / Rat(q); }

MPSystem coin() { return MPSystem::bernoulli(2, 1, {rr(1, 2), rr(1, 2)}); }

Observable site0() { return cylinder_indicator({{el({0}), 0}}); }

Observable centered_site0() { return obs_add(site0(), cylinder_constant(rr(-1, 2))); }

MPSystem golden_rotation() {
    long double a = (sqrtl(5.0L) - 1.0L) / 2.0L;
    return MPSystem::rotation_float({a});
}

Observable half_interval() { return interval_union({{Num(0), Num(rr(1, 2))}}); }

TranslationalFamily multipliers() {
    return TranslationalFamily(
        {Homomorphism::multiplier(1), Homomorphism::multiplier(2), Homomorphism::multiplier(3)},
        TranslationalFamily::Rule::NonzeroMultiplier);
}

} // namespace

TEST_CASE("weak-mixing average vanishes identically for independent coin flips") {
    MPSystem sys = coin();
    Observable a = site0();
    Series f = wm_average(sys, a, a, Homomorphism::multiplier(1),
                          FolnerSequence::z_initial(), 50);
    for (std::size_t r = 0; r < f.rows(); ++r) {
        CHECK(f.value(r).exact());
        CHECK(f.value(r).rat() == 0);
    }
    // over symmetric windows only the g = 0 term contributes 1/4
    Series s = wm_average(sys, a, a, Homomorphism::multiplier(1),
                          FolnerSequence::z_symmetric(), 50);
    for (std::size_t r : {std::size_t(0), std::size_t(9), std::size_t(49)}) {
        long long n = s.index(r);
        CHECK(s.value(r).rat() == Rat(1) / Rat(4 * (2 * n + 1)));
    }
}

TEST_CASE("weak-mixing average of the golden rotation settles near 1/8") {
    Series s = wm_average(golden_rotation(), half_interval(), half_interval(),
                          Homomorphism::multiplier(1), FolnerSequence::z_initial(), 2000);
    CHECK(!s.back().exact());
    CHECK(std::abs(s.back().dbl() - 0.125) < 0.01);
}

TEST_CASE("ergodic averages sit at the product target for the coin and the rotation") {
    MPSystem sys = coin();
    Observable a = site0();
    ErgodicReport er = ergodic_average(sys, a, a, Homomorphism::multiplier(1),
                                       FolnerSequence::z_initial(), 40);
    CHECK(er.target.rat() == rr(1, 4));
    for (std::size_t r = 0; r < er.series.rows(); ++r)
        CHECK(er.series.value(r).rat() == rr(1, 4));

    ErgodicReport rot = ergodic_average(golden_rotation(), half_interval(), half_interval(),
                                        Homomorphism::multiplier(1), FolnerSequence::z_initial(),
                                        2000);
    CHECK(rot.target.dbl() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(rot.series.back().dbl() - 0.25) < 0.01);

    ErgodicReport full = ergodic_average(sys, a, cylinder_constant(Rat(1)),
                                         Homomorphism::multiplier(1),
                                         FolnerSequence::z_initial(), 20);
    for (std::size_t r = 0; r < full.series.rows(); ++r)
        CHECK(full.series.value(r).rat() == rr(1, 2));
}

TEST_CASE("observable deviation averages vanish in the decoupled cases") {
    MPSystem sys = coin();
    Series cst = l2_wm_average(sys, centered_site0(), cylinder_constant(Rat(1)),
                               Homomorphism::multiplier(1), FolnerSequence::z_initial(), 30);
    for (std::size_t r = 0; r < cst.rows(); ++r) CHECK(cst.value(r).rat() == 0);

    Series cen = l2_wm_average(sys, centered_site0(), centered_site0(),
                               Homomorphism::multiplier(1), FolnerSequence::z_initial(), 60);
    for (std::size_t r = 0; r < cen.rows(); ++r) CHECK(cen.value(r).rat() == 0);

    MPSystem cat = MPSystem::torus_endomorphism(2, {2, 1, 1, 1});
    Observable wave = trig_cosine(2, {1, 0});
    Series hyper = l2_wm_average(cat, wave, wave, Homomorphism::multiplier(1),
                                 FolnerSequence::z_initial(), 40);
    for (std::size_t r = 0; r < hyper.rows(); ++r) CHECK(hyper.value(r).rat() == 0);

    // the frequency orbit only returns at g = 0, contributing |omega(wave^2)| = 1/2
    Series sym = l2_wm_average(cat, wave, wave, Homomorphism::multiplier(1),
                               FolnerSequence::z_symmetric(), 30);
    for (std::size_t r : {std::size_t(0), std::size_t(29)}) {
        long long n = sym.index(r);
        CHECK(sym.value(r).rat() == Rat(1) / Rat(2 * (2 * n + 1)));
    }
}

TEST_CASE("equivalence matrix is all-pass for the coin system") {
    MPSystem sys = coin();
    EquivalenceMatrix m = product_equivalence_check(sys, site0(), site0(), centered_site0(),
                                                    centered_site0(), Homomorphism::multiplier(1),
                                                    FolnerSequence::z_initial(), 400);
    CHECK(m.sys_wm_pass);
    CHECK(m.product_wm_pass);
    CHECK(m.product_ergodic_pass);
    CHECK(m.l2_pass);
    CHECK(m.consistent);
    for (std::size_t r = 0; r < m.product_wm.rows(); ++r) {
        CHECK(m.product_wm.value(r).rat() == 0);
        CHECK(m.product_ergodic_dev.value(r).rat() == 0);
    }
}

TEST_CASE("equivalence matrix is all-fail for the golden rotation") {
    Observable wave = trig_cosine(1, {1});
    EquivalenceMatrix m = product_equivalence_check(golden_rotation(), half_interval(),
                                                    half_interval(), wave, wave,
                                                    Homomorphism::multiplier(1),
                                                    FolnerSequence::z_initial(), 2000);
    CHECK(!m.sys_wm_pass);
    CHECK(!m.product_wm_pass);
    CHECK(!m.product_ergodic_pass);
    CHECK(!m.l2_pass);
    CHECK(m.consistent);
    CHECK(std::abs(m.sys_wm.back().dbl() - 0.125) < 0.01);            // 1/8
    CHECK(std::abs(m.product_wm.back().dbl() - 0.0625) < 0.01);       // 1/16
    CHECK(std::abs(m.product_ergodic_dev.back().dbl() - 1.0 / 48) < 0.005);
    CHECK(std::abs(m.l2.back().dbl() - 1.0 / 3.14159265358979) < 0.01);
}

TEST_CASE("equivalence matrix is all-fail but consistent for a frozen system") {
    MPSystem sys = MPSystem::finite({rr(1, 2), rr(1, 2)}, {{0, 1}});
    Observable a = table_fn({Num(1), Num(0)});
    Observable f = table_fn({Num(rr(1, 2)), Num(rr(-1, 2))});
    EquivalenceMatrix m = product_equivalence_check(sys, a, a, f, f, Homomorphism::multiplier(1),
                                                    FolnerSequence::z_initial(), 60);
    CHECK(!m.sys_wm_pass);
    CHECK(!m.product_wm_pass);
    CHECK(!m.product_ergodic_pass);
    CHECK(!m.l2_pass);
    CHECK(m.consistent);
    CHECK(m.sys_wm.back().rat() == rr(1, 4));
    CHECK(m.product_wm.back().rat() == rr(3, 16));
    CHECK(m.product_ergodic_dev.back().rat() == rr(3, 16));
    CHECK(m.l2.back().rat() == rr(1, 4));
}

TEST_CASE("experiment construction rejects malformed inputs") {
    MPSystem sys = coin();
    FolnerSequence seq = FolnerSequence::z_initial();
    TranslationalFamily fam = multipliers();
    Observable a = site0();
    CHECK_THROWS_AS(make_experiment(sys, seq, fam, {}, {a}, 10, 2), config_error);
    CHECK_THROWS_AS(make_experiment(sys, seq, fam, {Homomorphism::multiplier(1)}, {a}, 10, 2),
                    config_error);
    CHECK_THROWS_AS(make_experiment(sys, seq, fam,
                                    {Homomorphism::multiplier(1), Homomorphism::multiplier(1)},
                                    {a, a, a}, 10, 2),
                    config_error);
    CHECK_THROWS_AS(make_experiment(sys, seq, fam, {Homomorphism::zero(1)}, {a, a}, 10, 2),
                    config_error);
    CHECK_THROWS_AS(make_experiment(sys, seq, fam, {Homomorphism::multiplier(1)},
                                    {a, trig_exponential(1, {1})}, 10, 2),
                    config_error);
    CHECK_THROWS_AS(make_experiment(sys, seq, fam, {Homomorphism::multiplier(1)}, {a, a}, 0, 2),
                    config_error);
}

TEST_CASE("kappa and the correlation closed form take their oracle values") {
    MPSystem sys = coin();
    FolnerSequence seq = FolnerSequence::z_initial();
    MixingExperiment k1 = make_experiment(sys, seq, multipliers(),
                                          {Homomorphism::multiplier(1)}, {site0(), site0()}, 50, 2);
    CHECK(kappa_constant(k1).rat() == rr(1, 2));
    CHECK(correlation_target(k1).rat() == rr(1, 4));
    CHECK(gamma_closed_form(k1, el({0})).rat() == rr(1, 4)); // 1/2 - 1/4
    CHECK(gamma_closed_form(k1, el({5})).rat() == 0);        // 1/4 - 1/4

    MixingExperiment k2 = make_experiment(
        sys, seq, multipliers(), {Homomorphism::multiplier(1), Homomorphism::multiplier(2)},
        {site0(), site0(), site0()}, 50, 2);
    CHECK(kappa_constant(k2).rat() == rr(1, 4));
    CHECK(gamma_closed_form(k2, el({0})).rat() == rr(3, 16));
    CHECK(gamma_closed_form(k2, el({3})).rat() == 0);

    // centered observables decorrelate at every nonzero shift
    MixingExperiment cen = make_experiment(
        sys, seq, multipliers(), {Homomorphism::multiplier(1), Homomorphism::multiplier(2)},
        {centered_site0(), centered_site0(), centered_site0()}, 50, 2);
    CHECK(kappa_constant(cen).rat() == 0);
    CHECK(gamma_closed_form(cen, el({0})).rat() == rr(1, 16));
    CHECK(gamma_closed_form(cen, el({4})).rat() == 0);
}

TEST_CASE("centered product inner values match hand-computed collision sums") {
    MPSystem sys = coin();
    MixingExperiment exp = make_experiment(
        sys, FolnerSequence::z_initial(), multipliers(),
        {Homomorphism::multiplier(1), Homomorphism::multiplier(2)}, {site0(), site0(), site0()},
        50, 2);
    UFunction u(exp);
    CHECK(u.kappa().rat() == rr(1, 4));
    CHECK(u.sup_bound() == doctest::Approx(1.25));
    CHECK(u.centered_expect(el({4})).rat() == 0);  // distinct sites give kappa back
    CHECK(u.inner(el({1}), el({5})).rat() == 0);   // disjoint supports, both centered to 0
    CHECK(u.inner(el({3}), el({3})).rat() == rr(3, 16));
    CHECK(u.inner(el({3}), el({6})).rat() == rr(1, 16)); // shared site 6
}

TEST_CASE("explicitly centered products reproduce the four-term expansion") {
    MPSystem sys = coin();
    MixingExperiment exp = make_experiment(
        sys, FolnerSequence::z_symmetric(), multipliers(),
        {Homomorphism::multiplier(1), Homomorphism::multiplier(2)}, {site0(), site0(), site0()},
        50, 2);
    IdentityCheck at_collision = proof_identity_check(exp, el({3}), el({3}));
    CHECK(at_collision.ok);
    CHECK(at_collision.direct.rat() == rr(1, 16));
    CHECK(at_collision.decomposed.rat() == rr(1, 16));

    Rng rng(20117);
    for (int t = 0; t < 100; ++t) {
        IdentityCheck c = proof_identity_check(exp, el({rng.range(-8, 8)}), el({rng.range(-8, 8)}));
        CHECK(c.ok);
        CHECK(c.direct.rat() == c.decomposed.rat());
    }

    MixingExperiment rot = make_experiment(golden_rotation(), FolnerSequence::z_initial(),
                                           multipliers(), {Homomorphism::multiplier(1)},
                                           {half_interval(), half_interval()}, 50, 2);
    IdentityCheck rc = proof_identity_check(rot, el({2}), el({5}));
    CHECK(rc.ok);
}

TEST_CASE("correlation estimates land exactly on the closed form for centered observables") {
    MPSystem sys = coin();
    FolnerSequence seq = FolnerSequence::z_initial();
    MixingExperiment cen = make_experiment(
        sys, seq, multipliers(), {Homomorphism::multiplier(1), Homomorphism::multiplier(2)},
        {centered_site0(), centered_site0(), centered_site0()}, 60, 2);

    GammaCheck h3 = gamma_estimate_vs_closed_form(cen, el({3}), 60);
    CHECK(h3.pass);
    CHECK(h3.exact_from == 1);
    CHECK(h3.closed_form.rat() == 0);
    CHECK(h3.estimate.back().rat() == 0);

    GammaCheck h0 = gamma_estimate_vs_closed_form(cen, el({0}), 60);
    CHECK(h0.pass);
    CHECK(h0.closed_form.rat() == rr(1, 16));
    CHECK(h0.estimate.back().rat() == rr(1, 16));

    // uncentered observables keep a permanent 1/(16 mu) collision residue
    MixingExperiment unc = make_experiment(
        sys, seq, multipliers(), {Homomorphism::multiplier(1), Homomorphism::multiplier(2)},
        {site0(), site0(), site0()}, 60, 2);
    GammaCheck u3 = gamma_estimate_vs_closed_form(unc, el({3}), 60);
    CHECK(!u3.pass);
    CHECK(u3.exact_from == -1);
    CHECK(u3.closed_form.rat() == 0);
    CHECK(u3.estimate.value(59).rat() == rr(1, 16 * 60));
}

TEST_CASE("order-2 series on the coin match the collision oracle and pass") {
    MPSystem sys = coin();
    MixingExperiment exp = make_experiment(
        sys, FolnerSequence::z_initial(), multipliers(),
        {Homomorphism::multiplier(1), Homomorphism::multiplier(2)}, {site0(), site0(), site0()},
        200, 2);
    TrendPolicy pol{10.0 / (2 * std::sqrt(200.0)), "10x known rate 1/(2 sqrt(n))"};
    OrderKReport rep = order_k_wm_series(exp, pol);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.target.rat() == rr(1, 8));
    for (std::size_t r : {std::size_t(0), std::size_t(99), std::size_t(199)}) {
        CHECK(rep.one_k.value(r).rat() == 0);
        CHECK(rep.two_k.value(r).rat() == rr(1, 8));
    }
    // pair sum: n diagonal terms of 3/16 plus 2 floor(n/2) doubling collisions of 1/16
    CHECK(rep.three_k.value(9, 0).rat() == rr(1, 40));   // n=10: (30/16 + 10/16)/100
    CHECK(rep.three_k.value(199, 0).rat() == rr(1, 800)); // n=200: 50/40000
    CHECK(rep.bridge_consistent);
    CHECK(rep.two_converges);
}

TEST_CASE("order-2 series with centered observables vanish except the diagonal norm") {
    MPSystem sys = coin();
    MixingExperiment exp = make_experiment(
        sys, FolnerSequence::z_initial(), multipliers(),
        {Homomorphism::multiplier(1), Homomorphism::multiplier(2)},
        {centered_site0(), centered_site0(), centered_site0()}, 200, 2);
    TrendPolicy pol{10.0 / (4 * std::sqrt(200.0)), "10x known rate 1/(4 sqrt(n))"};
    OrderKReport rep = order_k_wm_series(exp, pol);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.target.rat() == 0);
    for (std::size_t r : {std::size_t(4), std::size_t(150)}) {
        CHECK(rep.one_k.value(r).rat() == 0);
        CHECK(rep.two_k.value(r).rat() == 0);
    }
    CHECK(rep.three_k.value(15, 0).rat() == rr(1, 256)); // n/16 over n^2 at n=16
}

TEST_CASE("order-1 on symmetric windows is the squared weak-mixing integrand") {
    MPSystem sys = coin();
    FolnerSequence seq = FolnerSequence::z_symmetric();
    MixingExperiment exp = make_experiment(sys, seq, multipliers(),
                                           {Homomorphism::multiplier(1)}, {site0(), site0()},
                                           60, 2);
    TrendPolicy pol{10.0 / (2 * std::sqrt(121.0)), "10x known rate 1/(2 sqrt(c_n))"};
    OrderKReport rep = order_k_wm_series(exp, pol);
    Series wm = wm_average(sys, site0(), site0(), Homomorphism::multiplier(1), seq, 60);
    REQUIRE(rep.one_k.rows() == wm.rows());
    for (std::size_t r = 0; r < wm.rows(); ++r) {
        long long n = wm.index(r);
        CHECK(rep.one_k_abs.value(r).rat() == wm.value(r).rat());
        CHECK(rep.one_k.value(r).rat() == Rat(1) / Rat(16 * (2 * n + 1)));
        CHECK(wm.value(r).rat() == Rat(1) / Rat(4 * (2 * n + 1)));
    }
    CHECK(rep.verdict == Verdict::Pass);
}

TEST_CASE("order-1 on the rotation fails the deviation trend but not the hypotheses") {
    MixingExperiment exp = make_experiment(golden_rotation(), FolnerSequence::z_initial(),
                                           multipliers(), {Homomorphism::multiplier(1)},
                                           {half_interval(), half_interval()}, 300, 2);
    OrderKReport rep = order_k_wm_series(exp);
    CHECK(rep.hypotheses.ok);
    CHECK(rep.verdict == Verdict::Fail);
    CHECK(!rep.one_trend);
    CHECK(std::abs(rep.one_k.back().dbl() - 1.0 / 48) < 0.005);
}

TEST_CASE("a family missing a difference refuses with a hypothesis error") {
    MPSystem sys = coin();
    TranslationalFamily gappy({Homomorphism::multiplier(1), Homomorphism::multiplier(3)});
    MixingExperiment exp = make_experiment(
        sys, FolnerSequence::z_initial(), gappy,
        {Homomorphism::multiplier(1), Homomorphism::multiplier(3)}, {site0(), site0(), site0()},
        40, 2);
    CHECK_THROWS_WITH_AS(order_k_wm_series(exp), doctest::Contains("translational-family"),
                         hypothesis_error);
}

TEST_CASE("telescoping bound holds on cylinder experiments") {
    MPSystem sys = coin();
    FolnerSequence seq = FolnerSequence::z_symmetric();
    Observable two_site = cylinder_indicator({{el({0}), 0}, {el({1}), 1}});
    MixingExperiment unc = make_experiment(
        sys, seq, multipliers(), {Homomorphism::multiplier(1), Homomorphism::multiplier(2)},
        {site0(), site0(), site0()}, 40, 2);
    TelescopingReport t1 = telescoping_bound(unc, 3);
    CHECK(t1.ok);
    CHECK(le_with_slack(t1.lhs, t1.rhs));

    MixingExperiment wide = make_experiment(
        sys, seq, multipliers(), {Homomorphism::multiplier(1), Homomorphism::multiplier(2)},
        {site0(), two_site, site0()}, 40, 2);
    TelescopingReport t2 = telescoping_bound(wide, 2);
    CHECK(t2.ok);

    MixingExperiment k3 = make_experiment(
        sys, seq, multipliers(),
        {Homomorphism::multiplier(1), Homomorphism::multiplier(2), Homomorphism::multiplier(3)},
        {centered_site0(), centered_site0(), centered_site0(), two_site}, 40, 2);
    TelescopingReport t3 = telescoping_bound(k3, 2);
    CHECK(t3.ok);
}

TEST_CASE("the staged pipeline passes end to end on the coin system") {
    MPSystem sys = coin();
    MixingExperiment exp = make_experiment(
        sys, FolnerSequence::z_initial(), multipliers(),
        {Homomorphism::multiplier(1), Homomorphism::multiplier(2)}, {site0(), site0(), site0()},
        300, 2);
    TrendPolicy pol{5.0 / std::sqrt(300.0), "10x known rate 1/(2 sqrt(n))"};
    PipelineReport rep = mixing_pipeline(exp, pol);
    CHECK(rep.pass);
    REQUIRE(rep.stages.size() == 10);
    for (const PipelineStage& st : rep.stages) CHECK(st.verdict == Verdict::Pass);
    CHECK(rep.stages[0].name == "hypothesis-battery");
    CHECK(rep.stages[1].name == "weak-mixing-hypothesis");
    CHECK(rep.stages[2].name == "quotient-bound (order 1)");
    CHECK(rep.stages[9].name == "order-deviation (order 2)");
}

TEST_CASE("the staged pipeline refuses the rotation at the weak-mixing stage") {
    MixingExperiment exp = make_experiment(golden_rotation(), FolnerSequence::z_initial(),
                                           multipliers(), {Homomorphism::multiplier(1)},
                                           {half_interval(), half_interval()}, 300, 2);
    PipelineReport rep = mixing_pipeline(exp);
    CHECK(!rep.pass);
    REQUIRE(rep.stages.size() == 2);
    CHECK(rep.stages[1].name == "weak-mixing-hypothesis");
    CHECK(rep.stages[1].verdict == Verdict::Fail);
    CHECK(!rep.stages[1].witness.empty());
}

TEST_CASE("trend verdicts agree across the two standard integer sequences") {
    MPSystem sys = coin();
    Observable a = site0();
    for (bool use_initial : {true, false}) {
        FolnerSequence seq = use_initial ? FolnerSequence::z_initial()
                                         : FolnerSequence::z_symmetric();
        Series w = wm_average(sys, a, a, Homomorphism::multiplier(1), seq, 300);
        CHECK(trend_to_zero(w, TrendPolicy{}));
        Series r = wm_average(golden_rotation(), half_interval(), half_interval(),
                              Homomorphism::multiplier(1), seq, 300);
        CHECK(!trend_to_zero(r, TrendPolicy{}));
    }
}

TEST_CASE("order-2 diagnostics pass on the planar coin lattice") {
    MPSystem sys = MPSystem::bernoulli(2, 2, {rr(1, 2), rr(1, 2)});
    TranslationalFamily diag({Homomorphism::diagonal({1, 1}), Homomorphism::diagonal({2, 3})},
                             TranslationalFamily::Rule::NonzeroDiagonal);
    Observable a = cylinder_indicator({{el({0, 0}), 0}});
    MixingExperiment exp = make_experiment(
        sys, FolnerSequence::z2_squares(), diag,
        {Homomorphism::diagonal({1, 1}), Homomorphism::diagonal({2, 3})}, {a, a, a}, 12, 4);
    TrendPolicy pol{10 * 0.433656 / 25.0, "10x known rate sqrt(3/16)/sqrt(c_n)"};
    OrderKReport rep = order_k_wm_series(exp, pol);
    CHECK(rep.verdict == Verdict::Pass);
    // the only correlation collision is g = 0, where the three sites coincide
    CHECK(rep.one_k.value(0).rat() == Rat(9) / Rat(64 * 9));
    CHECK(rep.one_k.value(11).rat() == Rat(9) / Rat(64 * 625));
    CHECK(rep.two_k.value(11).exact());
}
