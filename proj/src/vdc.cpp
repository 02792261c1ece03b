#include "ergokit/vdc.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ergokit/errors.hpp"

namespace ergo {

static bool le_ok(const Num& lhs, const Num& rhs) {
    if (lhs.exact() && rhs.exact()) return lhs <= rhs;
    return le_with_slack(lhs, rhs);
}

static void enforce(const Num& lhs, const Num& rhs, const std::string& what,
                    const std::string& where) {
    if (!le_ok(lhs, rhs))
        throw inequality_failure(what, "lhs " + lhs.str() + " > rhs " + rhs.str() + " at " + where);
}

static Num quartile_mean(const Series& s, std::size_t col = 0) {
    if (s.rows() == 0) throw structural_error("quartile mean of an empty series");
    std::size_t start = (s.rows() * 3) / 4;
    std::vector<Num> vals;
    for (std::size_t r = start; r < s.rows(); ++r) vals.push_back(s.value(r, col));
    return sum(vals) / Num((long long)vals.size());
}

InequalityReport avg_norm_inequality(const GroupFunction& f, const FiniteSubset& set) {
    if (set.elements().empty()) throw structural_error("inequality over a zero-measure set");
    Num w(set.model().weight());
    std::vector<std::vector<Num>> cols(f.dim);
    std::vector<Num> norms;
    for (const GroupElement& g : set.elements()) {
        std::vector<Num> v = f.eval(g);
        norms.push_back(norm_sq(v));
        for (int i = 0; i < f.dim; ++i) cols[i].push_back(std::move(v[i]));
    }
    std::vector<Num> total;
    for (int i = 0; i < f.dim; ++i) total.push_back(sum(cols[i]) * w);
    InequalityReport rep;
    rep.lhs = norm_sq(total);
    rep.rhs = Num(set.measure()) * sum(norms) * w;
    enforce(rep.lhs, rep.rhs, "average-norm inequality violated",
            "set of measure " + rat_to_string(set.measure()));
    rep.ok = true;
    return rep;
}

GapReport shift_average_gap(const GroupFunction& f, const FolnerSequence& seq, long long n,
                            long long m) {
    const GroupModel& model = seq.model();
    FiniteSubset ln = seq.at(n);
    FiniteSubset lm = seq.at(m);
    std::vector<Num> plain = folner_average(f, ln);

    std::vector<std::vector<Num>> cols(f.dim);
    for (const GroupElement& g : ln.elements())
        for (const GroupElement& h : lm.elements()) {
            std::vector<Num> v = f.eval(model.compose(g, h));
            for (int i = 0; i < f.dim; ++i) cols[i].push_back(std::move(v[i]));
        }
    Num pairs((long long)(ln.elements().size() * lm.elements().size()));
    std::vector<Num> diff;
    for (int i = 0; i < f.dim; ++i) diff.push_back(plain[i] - sum(cols[i]) / pairs);

    GapReport rep;
    rep.gap = norm_of(diff);
    rep.bound = Num::from_double(f.sup_bound * rat_to_double(uniform_defect(seq, n, m)));
    if (!le_ok(rep.gap, rep.bound))
        throw inequality_failure("shift-average gap exceeds the defect bound",
                                 "gap " + rep.gap.str() + " > bound " + rep.bound.str() + " at n=" +
                                     std::to_string(n) + " m=" + std::to_string(m));
    rep.ok = true;
    return rep;
}

InequalityReport triple_avg_inequality(const GroupFunction& f, const FiniteSubset& lam1,
                                       const FiniteSubset& lam2) {
    if (lam1.elements().empty() || lam2.elements().empty())
        throw structural_error("inequality over a zero-measure set");
    if (lam1.model() != lam2.model()) throw structural_error("sets live in different groups");
    const GroupModel& model = lam1.model();
    Num w(model.weight());

    // row_sum(g) = sum_{h in lam1} f(gh); the triple sum folds to
    // sum_g ||row_sum(g)||^2 and the double sum to ||sum_g row_sum(g)||^2
    std::vector<std::vector<Num>> total_cols(f.dim);
    std::vector<Num> row_norms;
    for (const GroupElement& g : lam2.elements()) {
        std::vector<std::vector<Num>> row_cols(f.dim);
        for (const GroupElement& h : lam1.elements()) {
            std::vector<Num> v = f.eval(model.compose(g, h));
            for (int i = 0; i < f.dim; ++i) row_cols[i].push_back(std::move(v[i]));
        }
        std::vector<Num> row;
        for (int i = 0; i < f.dim; ++i) {
            row.push_back(sum(row_cols[i]));
            total_cols[i].push_back(row[i]);
        }
        row_norms.push_back(norm_sq(row));
    }
    std::vector<Num> total;
    Num w_sq = w * w;
    for (int i = 0; i < f.dim; ++i) total.push_back(sum(total_cols[i]) * w_sq);

    InequalityReport rep;
    rep.lhs = norm_sq(total);
    rep.rhs = Num(lam2.measure()) * sum(row_norms) * w_sq * w;
    enforce(rep.lhs, rep.rhs, "triple-average inequality violated",
            "sizes " + std::to_string(lam1.elements().size()) + "x" +
                std::to_string(lam2.elements().size()));
    rep.ok = true;
    return rep;
}

CorrelationSeries gamma_series(const GroupFunction& f, const FolnerSequence& seq,
                               const GroupElement& h, long long n_max) {
    const GroupModel& model = seq.model();
    CorrelationSeries out{h, Series("gamma-" + h.str(), {"gamma"}), Num(0)};
    Num acc(0);
    long long count = 0;
    double cap = f.sup_bound * f.sup_bound * (1.0 + 1e-9);
    for (long long n = 1; n <= n_max; ++n) {
        std::vector<Num> terms;
        for (const GroupElement& g : seq.increment(n))
            terms.push_back(inner(f.eval(g), f.eval(model.compose(g, h))));
        if (!terms.empty()) acc += sum(terms);
        count += (long long)terms.size();
        if (count == 0) throw structural_error("zero-measure index in sequence");
        Num val = acc / Num(count);
        if (std::abs(val.dbl()) > cap)
            throw structural_error("correlation exceeds the declared bound squared");
        out.series.add_row(n, Num(Rat(count) * model.weight()), {val});
    }
    out.limit_estimate = quartile_mean(out.series);
    return out;
}

ShiftedGammaReport shifted_gamma_consistency(const GroupFunction& f, const FolnerSequence& seq,
                                             const GroupElement& h1, const GroupElement& h2,
                                             long long n_max, double agree_tol) {
    const GroupModel& model = seq.model();
    GroupElement d = model.compose(model.inverse(h1), h2);
    ShiftedGammaReport rep;
    CorrelationSeries base = gamma_series(f, seq, d, n_max);
    rep.base = base.series;
    rep.base_limit = base.limit_estimate;

    rep.shifted = Series("gamma-shifted-" + h1.str() + "-" + h2.str(), {"value"});
    Num acc(0);
    long long count = 0;
    double b_sq = f.sup_bound * f.sup_bound;
    rep.per_index_bound_ok = true;
    for (long long n = 1; n <= n_max; ++n) {
        std::vector<Num> terms;
        for (const GroupElement& g : seq.increment(n))
            terms.push_back(inner(f.eval(model.compose(g, h1)), f.eval(model.compose(g, h2))));
        if (!terms.empty()) acc += sum(terms);
        count += (long long)terms.size();
        if (count == 0) throw structural_error("zero-measure index in sequence");
        Num val = acc / Num(count);
        rep.shifted.add_row(n, Num(Rat(count) * model.weight()), {val});

        Num gap = abs(val - rep.base.value((std::size_t)n - 1));
        Num bound = Num::from_double(b_sq * rat_to_double(folner_defect(seq, n, h1)));
        if (!le_ok(gap, bound))
            throw inequality_failure("shifted correlation exceeds the defect bound",
                                     "gap " + gap.str() + " > bound " + bound.str() + " at n=" +
                                         std::to_string(n));
    }
    rep.shifted_limit = quartile_mean(rep.shifted);
    rep.limits_agree = std::abs((rep.shifted_limit - rep.base_limit).dbl()) <= agree_tol;
    return rep;
}

// multiplicity of each quotient element h1^{-1} h2 over ordered pairs of set
static std::map<GroupElement, long long> pair_multiplicities(const FiniteSubset& set) {
    const GroupModel& model = set.model();
    std::map<GroupElement, long long> mult;
    for (const GroupElement& h1 : set.elements()) {
        GroupElement inv = model.inverse(h1);
        for (const GroupElement& h2 : set.elements()) ++mult[model.compose(inv, h2)];
    }
    return mult;
}

TripleDoubleReport triple_to_double_limit(const GroupFunction& f, const FolnerSequence& seq,
                                          long long m, long long n_max, double agree_tol) {
    const GroupModel& model = seq.model();
    FiniteSubset lm = seq.at(m);
    Num w(model.weight());
    Num w_sq = w * w;

    TripleDoubleReport rep;
    rep.triple = Series("triple-m" + std::to_string(m), {"value"});
    Num acc(0);
    long long count = 0;
    for (long long n = 1; n <= n_max; ++n) {
        std::vector<Num> contribs;
        for (const GroupElement& g : seq.increment(n)) {
            std::vector<std::vector<Num>> row_cols(f.dim);
            for (const GroupElement& h : lm.elements()) {
                std::vector<Num> v = f.eval(model.compose(g, h));
                for (int i = 0; i < f.dim; ++i) row_cols[i].push_back(std::move(v[i]));
            }
            std::vector<Num> row;
            for (int i = 0; i < f.dim; ++i) row.push_back(sum(row_cols[i]));
            contribs.push_back(norm_sq(row));
        }
        if (!contribs.empty()) acc += sum(contribs);
        count += (long long)contribs.size();
        if (count == 0) throw structural_error("zero-measure index in sequence");
        rep.triple.add_row(n, Num(Rat(count) * model.weight()), {acc * w_sq / Num(count)});
    }
    rep.triple_limit = quartile_mean(rep.triple);

    Num dsum(0);
    for (const auto& [d, mult] : pair_multiplicities(lm))
        dsum += Num(mult) * gamma_series(f, seq, d, n_max).limit_estimate;
    rep.double_sum = dsum * w_sq;
    rep.pass = std::abs((rep.triple_limit - rep.double_sum).dbl()) <= agree_tol;
    return rep;
}

InequalityReport folding_inequality(const GroupFunction& f, const FiniteSubset& set) {
    return folding_inequality(f, set, set.quotient());
}

InequalityReport folding_inequality(const GroupFunction& f, const FiniteSubset& set,
                                    const FiniteSubset& S) {
    if (f.dim != 1) throw structural_error("folding inequality takes scalar functions");
    if (set.elements().empty()) throw structural_error("inequality over a zero-measure set");
    FiniteSubset quot = set.quotient();
    for (const GroupElement& q : quot.elements())
        if (!S.contains(q)) throw structural_error("S must contain the quotient set");

    auto value_at = [&f](const GroupElement& g) {
        Num v = f.eval(g)[0];
        if (v.sign() < 0 && !le_with_slack(Num(0), v))
            throw structural_error("folding inequality needs a nonnegative function");
        return v;
    };

    Num w(set.model().weight());
    std::vector<Num> lhs_terms;
    for (const auto& [d, mult] : pair_multiplicities(set))
        lhs_terms.push_back(Num(mult) * value_at(d));
    std::vector<Num> rhs_terms;
    for (const GroupElement& s : S.elements()) rhs_terms.push_back(value_at(s));

    InequalityReport rep;
    rep.lhs = sum(lhs_terms) * w * w;
    rep.rhs = Num(set.measure()) * sum(rhs_terms) * w;
    enforce(rep.lhs, rep.rhs, "folding inequality violated",
            "set size " + std::to_string(set.elements().size()));
    rep.ok = true;
    return rep;
}

QuotientBoundReport gamma_quotient_bound(const std::function<Num(const GroupElement&)>& gamma,
                                         const FolnerSequence& seq, long long m) {
    FiniteSubset lm = seq.at(m);
    Num w(seq.model().weight());
    Num mu(lm.measure());

    std::vector<Num> lhs_terms, rhs_terms;
    for (const auto& [d, mult] : pair_multiplicities(lm))
        lhs_terms.push_back(Num(mult) * gamma(d));
    FiniteSubset quot = lm.quotient();
    for (const GroupElement& q : quot.elements()) rhs_terms.push_back(abs(gamma(q)));

    QuotientBoundReport rep;
    rep.lhs = abs(sum(lhs_terms) * w * w / (mu * mu));
    rep.rhs = sum(rhs_terms) * w / mu;
    enforce(rep.lhs, rep.rhs, "quotient bound violated", "m=" + std::to_string(m));
    rep.ok = true;
    return rep;
}

Series gamma_condition_series(const std::function<Num(const GroupElement&)>& gamma,
                              const FolnerSequence& seq, const std::vector<long long>& m_list) {
    if (m_list.empty()) throw structural_error("condition series needs a nonempty m list");
    Series out("vdc-condition", {"value"});
    for (long long m : m_list) {
        FiniteSubset lm = seq.at(m);
        long long c = (long long)lm.elements().size();
        std::vector<Num> terms;
        for (const auto& [d, mult] : pair_multiplicities(lm))
            terms.push_back(Num(mult) * gamma(d));
        out.add_row(m, Num(lm.measure()), {sum(terms) / Num(c * c)});
    }
    return out;
}

VdcVerdict vdc_verdict(const GroupFunction& f, const FolnerSequence& seq,
                       const std::vector<long long>& m_list, long long n_max,
                       const TrendPolicy& policy,
                       const std::function<Num(const GroupElement&)>& gamma_override) {
    if (m_list.empty()) throw structural_error("vdc verdict needs a nonempty m list");
    std::map<GroupElement, Num> cache;
    auto gamma_at = [&](const GroupElement& h) {
        if (gamma_override) return gamma_override(h);
        auto it = cache.find(h);
        if (it != cache.end()) return it->second;
        Num v = gamma_series(f, seq, h, n_max).limit_estimate;
        cache.emplace(h, v);
        return v;
    };

    VdcVerdict rep;
    rep.condition = gamma_condition_series(gamma_at, seq, m_list);
    rep.conclusion = average_norm_series(f, seq, n_max);
    rep.condition_trend = trend_to_zero(rep.condition, policy);
    rep.conclusion_trend = trend_to_zero(rep.conclusion, policy);

    long long m_max = *std::max_element(m_list.begin(), m_list.end());
    rep.defect_probe_half = uniform_defect(seq, std::max(1LL, n_max / 2), m_max);
    rep.defect_probe_full = uniform_defect(seq, n_max, m_max);
    rep.uniformity_ok = rep.defect_probe_full <= rep.defect_probe_half;
    rep.notes = "gamma measurability: not applicable (discrete)";

    if (!rep.condition_trend) rep.verdict = Verdict::Inconclusive;
    else rep.verdict = rep.conclusion_trend ? Verdict::Pass : Verdict::Fail;
    return rep;
}

} // namespace ergo
