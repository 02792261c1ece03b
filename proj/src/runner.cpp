#include "ergokit/runner.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "ergokit/averaging.hpp"
#include "ergokit/errors.hpp"
#include "ergokit/mixing.hpp"
#include "ergokit/rng.hpp"
#include "ergokit/vdc.hpp"

namespace ergo {

namespace fs = std::filesystem;

namespace {

std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name)
        out += (std::isalnum((unsigned char)c) || c == '.' || c == '_' || c == '-') ? c : '_';
    return out.empty() ? std::string("series") : out;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write output file: " + path.string());
    out << text;
}

std::string fmt(double v) { return Num::from_double(v).str(); }

// Writes series CSVs into the run directory and tracks names and exactness.
struct Emitter {
    fs::path dir;
    std::vector<std::string> files;
    bool all_exact = true;

    std::string add(const Series& s, std::string stem = "") {
        if (stem.empty()) stem = s.name();
        std::string file = sanitize(stem) + ".csv";
        write_file(dir / file, s.to_csv());
        files.push_back(file);
        for (std::size_t r = 0; r < s.rows(); ++r) {
            if (!s.mu(r).exact()) all_exact = false;
            for (std::size_t c = 0; c < s.columns().size(); ++c)
                if (!s.value(r, c).exact()) all_exact = false;
        }
        return file;
    }
};

struct Ctx {
    const ExperimentConfig& cfg;
    Emitter& em;
    std::vector<VerdictLine>& v;
    std::vector<std::string> extra; // free-form summary lines (hypotheses, probes)
};

void add_check(Ctx& c, const std::string& label, const std::string& file, bool pass) {
    c.v.push_back({label, file, pass ? "PASS" : "FAIL"});
}

std::string trend_label(const Ctx& c, const std::string& what) {
    return what + " trend (tau " + fmt(c.cfg.policy.tau) + ", " + c.cfg.policy.basis + ")";
}

Homomorphism first_phi(const ExperimentConfig& cfg, int rank) {
    if (cfg.raw.contains("phis")) return build_phis(cfg, rank).front();
    if (rank == 1) return Homomorphism::multiplier(1);
    return Homomorphism::diagonal(std::vector<long long>((std::size_t)rank, 1));
}

// ---- kind handlers, each returning the outcome word ------------------------

std::string run_wm(Ctx& c) {
    FolnerSequence seq = build_sequence(c.cfg);
    MPSystem sys = build_system(c.cfg);
    std::vector<Observable> obs = build_observables(c.cfg, sys);
    if (obs.size() < 2) throw config_error("wm needs two event observables");
    Series s = wm_average(sys, obs[0], obs[1], first_phi(c.cfg, seq.model().rank()), seq,
                          c.cfg.n_max);
    std::string file = c.em.add(s);
    bool t = trend_to_zero(s, c.cfg.policy);
    add_check(c, trend_label(c, "weak-mixing deviation"), file, t);
    return t ? "pass" : "fail";
}

std::string run_ergodic(Ctx& c) {
    FolnerSequence seq = build_sequence(c.cfg);
    MPSystem sys = build_system(c.cfg);
    std::vector<Observable> obs = build_observables(c.cfg, sys);
    if (obs.size() < 2) throw config_error("ergodic needs two event observables");
    ErgodicReport rep = ergodic_average(sys, obs[0], obs[1], first_phi(c.cfg, seq.model().rank()),
                                        seq, c.cfg.n_max);
    std::string avg_file = c.em.add(rep.series, "ergodic-avg");
    Series dev("ergodic-dev", {"value"});
    for (std::size_t r = 0; r < rep.series.rows(); ++r)
        dev.add_row(rep.series.index(r), rep.series.mu(r),
                    {abs(rep.series.value(r) - rep.target)});
    std::string dev_file = c.em.add(dev);
    c.extra.push_back("target: " + rep.target.str() + " [" + avg_file + "]");
    bool t = trend_to_zero(dev, c.cfg.policy);
    add_check(c, trend_label(c, "deviation from product target"), dev_file, t);
    return t ? "pass" : "fail";
}

std::string run_l2wm(Ctx& c) {
    FolnerSequence seq = build_sequence(c.cfg);
    MPSystem sys = build_system(c.cfg);
    std::vector<Observable> obs = build_observables(c.cfg, sys);
    if (obs.size() < 2) throw config_error("l2wm needs two observables");
    Series s = l2_wm_average(sys, obs[0], obs[1], first_phi(c.cfg, seq.model().rank()), seq,
                             c.cfg.n_max);
    std::string file = c.em.add(s);
    bool t = trend_to_zero(s, c.cfg.policy);
    add_check(c, trend_label(c, "observable-correlation deviation"), file, t);
    return t ? "pass" : "fail";
}

std::string run_equivalence(Ctx& c) {
    FolnerSequence seq = build_sequence(c.cfg);
    MPSystem sys = build_system(c.cfg);
    std::vector<Observable> obs = build_observables(c.cfg, sys);
    if (obs.size() != 4)
        throw config_error("product-equivalence needs observables [a0, a1, f1, f2]");
    EquivalenceMatrix m =
        product_equivalence_check(sys, obs[0], obs[1], obs[2], obs[3],
                                  first_phi(c.cfg, seq.model().rank()), seq, c.cfg.n_max,
                                  c.cfg.policy);
    add_check(c, trend_label(c, "system deviation"), c.em.add(m.sys_wm, "sys-wm"), m.sys_wm_pass);
    add_check(c, trend_label(c, "doubled-system deviation"), c.em.add(m.product_wm, "product-wm"),
              m.product_wm_pass);
    add_check(c, trend_label(c, "doubled-system ergodic deviation"),
              c.em.add(m.product_ergodic_dev), m.product_ergodic_pass);
    add_check(c, trend_label(c, "observable-form deviation"), c.em.add(m.l2, "l2-wm"), m.l2_pass);
    c.v.push_back({"all four formulations agree", "", m.consistent ? "PASS" : "FAIL"});
    if (!m.consistent) return "inconclusive";
    return m.sys_wm_pass ? "pass" : "fail";
}

std::string run_vdc(Ctx& c) {
    FolnerSequence seq = build_sequence(c.cfg);
    GroupFunction f = build_group_function(c.cfg);
    std::vector<long long> m_list = c.cfg.m_list.empty() ? std::vector<long long>{1, 2, 4, 8}
                                                         : c.cfg.m_list;
    VdcVerdict rep = vdc_verdict(f, seq, m_list, c.cfg.n_max, c.cfg.policy);
    std::string cond_file = c.em.add(rep.condition);
    std::string concl_file = c.em.add(rep.conclusion, "vdc-conclusion");
    add_check(c, trend_label(c, "correlation condition"), cond_file, rep.condition_trend);
    add_check(c, trend_label(c, "averaged-function norm"), concl_file, rep.conclusion_trend);
    c.extra.push_back("uniform defect probes: " + rat_to_string(rep.defect_probe_half) + " -> " +
                      rat_to_string(rep.defect_probe_full) +
                      (rep.uniformity_ok ? " (shrinking)" : " (not shrinking)"));
    if (!rep.notes.empty()) c.extra.push_back("notes: " + rep.notes);
    c.v.push_back({"verdict", "", verdict_name(rep.verdict)});
    if (rep.verdict == Verdict::Pass) return "pass";
    if (rep.verdict == Verdict::Fail) return "fail";
    return "inconclusive";
}

MixingExperiment build_mix(const ExperimentConfig& cfg) {
    FolnerSequence seq = build_sequence(cfg);
    MPSystem sys = build_system(cfg);
    std::vector<Observable> obs = build_observables(cfg, sys);
    std::vector<Homomorphism> phis = build_phis(cfg, seq.model().rank());
    TranslationalFamily fam = build_family(cfg, phis);
    if (cfg.k != 0 && cfg.k != (int)phis.size())
        throw config_error("k does not match the number of phis");
    if (cfg.c_bound <= 0) throw config_error("this experiment needs a positive c_bound");
    return make_experiment(sys, seq, fam, phis, obs, cfg.n_max, cfg.c_bound);
}

std::string h_stem(const GroupElement& h) {
    std::string out;
    for (std::size_t i = 0; i < h.c.size(); ++i) {
        if (i) out += "_";
        out += h.c[i] < 0 ? "m" + std::to_string(-h.c[i]) : std::to_string(h.c[i]);
    }
    return out;
}

std::string run_gamma(Ctx& c) {
    MixingExperiment exp = build_mix(c.cfg);
    std::vector<GroupElement> hs = build_h_list(c.cfg, exp.seq.model().rank());
    bool all = true;
    for (const GroupElement& h : hs) {
        GammaCheck chk = gamma_estimate_vs_closed_form(exp, h, c.cfg.n_max);
        std::string file = c.em.add(chk.estimate, "gamma-est-" + h_stem(h));
        add_check(c,
                  "correlation estimate at h=" + h.str() + " matches closed form " +
                      chk.closed_form.str() +
                      (chk.exact_from >= 0
                           ? " from n=" + std::to_string(chk.exact_from)
                           : " (no trailing agreement)"),
                  file, chk.pass);
        all = all && chk.pass;
    }
    return all ? "pass" : "fail";
}

void hypotheses_lines(Ctx& c, const HypothesisReport& h) {
    auto flag = [](bool b) { return b ? std::string("ok") : std::string("FAILED"); };
    c.extra.push_back("hypothesis measure-preserving: " + flag(h.measure_preserving));
    c.extra.push_back("hypothesis identity-action: " + flag(h.identity_action));
    c.extra.push_back("hypothesis translational-family: " + flag(h.family_ok));
    c.extra.push_back("hypothesis quotient-growth-bound: " + flag(h.c_bound_ok));
    c.extra.push_back("hypothesis defect-trend: " + flag(h.defect_trend));
    if (!h.notes.empty()) c.extra.push_back("hypothesis notes: " + h.notes);
}

std::string run_order_k(Ctx& c) {
    MixingExperiment exp = build_mix(c.cfg);
    OrderKReport rep = order_k_wm_series(exp, c.cfg.policy);
    hypotheses_lines(c, rep.hypotheses);
    c.extra.push_back("target: " + rep.target.str() + ", kappa: " + rep.kappa.str());
    std::string sq = c.em.add(rep.one_k);
    std::string ab = c.em.add(rep.one_k_abs);
    std::string corr = c.em.add(rep.two_k);
    std::string corr_dev = c.em.add(rep.two_k_dev);
    std::string un = c.em.add(rep.three_k);
    add_check(c, trend_label(c, "squared deviation"), sq, rep.one_trend);
    add_check(c, trend_label(c, "absolute deviation"), ab, rep.abs_trend);
    c.v.push_back({"square/absolute deviations agree", "", rep.bridge_consistent ? "PASS" : "FAIL"});
    add_check(c, trend_label(c, "correlation-to-target deviation"), corr_dev, rep.two_converges);
    add_check(c, trend_label(c, "averaged centered-product norm"), un, rep.three_trend);
    c.v.push_back({"running correlation written to", corr, "INFO"});
    c.v.push_back({"verdict", "", verdict_name(rep.verdict)});
    if (rep.verdict == Verdict::Pass) return "pass";
    if (rep.verdict == Verdict::Fail) return "fail";
    return "inconclusive";
}

std::string run_pipeline(Ctx& c) {
    MixingExperiment exp = build_mix(c.cfg);
    PipelineReport rep = mixing_pipeline(exp, c.cfg.policy);
    hypotheses_lines(c, rep.hypotheses);
    // wm_checks arrive ordered by observable, sequence alternating base/quotient
    for (std::size_t i = 0; i < rep.wm_checks.size(); ++i) {
        std::string stem = "wm-check-obs" + std::to_string(1 + i / 2) +
                           (i % 2 == 0 ? "-base" : "-quotient");
        c.em.add(rep.wm_checks[i], stem);
    }
    for (const PipelineStage& st : rep.stages)
        c.v.push_back({"stage " + st.name + (st.witness.empty() ? "" : " (" + st.witness + ")"),
                       "", verdict_name(st.verdict)});
    if (rep.pass) return "pass";
    const std::string& last = rep.stages.back().name;
    bool refused = last == "hypothesis-battery" || last == "weak-mixing-hypothesis";
    return refused ? "refusal" : "fail";
}

std::string run_kvn(Ctx& c) {
    FolnerSequence seq = build_sequence(c.cfg);
    GroupFunction f = build_group_function(c.cfg);
    std::vector<Num> eps = c.cfg.epsilons.empty() ? default_epsilons() : c.cfg.epsilons;
    KvnReport rep = kvn_equivalence(f, seq, eps, c.cfg.n_max, c.cfg.policy);
    std::string avg_file = c.em.add(rep.averages, "kvn-averages");
    bool density_all = true;
    for (std::size_t i = 0; i < rep.density.series.size(); ++i) {
        std::string file = c.em.add(rep.density.series[i]);
        add_check(c, trend_label(c, "deviation-set density (eps " + eps[i].str() + ")"), file,
                  rep.density.trends[i]);
        density_all = density_all && rep.density.trends[i];
    }
    add_check(c, trend_label(c, "running average"), avg_file, rep.average_pass);
    c.v.push_back({"density and average verdicts agree", "", rep.consistent ? "PASS" : "FAIL"});
    (void)density_all;
    if (!rep.consistent) return "inconclusive";
    return rep.density_pass ? "pass" : "fail";
}

std::string dispatch(Ctx& c) {
    const std::string& k = c.cfg.kind;
    if (k == "wm") return run_wm(c);
    if (k == "ergodic") return run_ergodic(c);
    if (k == "l2wm") return run_l2wm(c);
    if (k == "product-equivalence") return run_equivalence(c);
    if (k == "vdc-suite") return run_vdc(c);
    if (k == "gamma") return run_gamma(c);
    if (k == "order-k") return run_order_k(c);
    if (k == "pipeline") return run_pipeline(c);
    if (k == "kvn") return run_kvn(c);
    throw config_error("unknown experiment kind: " + k);
}

int exit_for(const std::string& outcome, const std::string& expected) {
    if (outcome == "violation") return 1;
    if (outcome == "error") return 2;
    if (outcome == expected) return 0;
    if (outcome == "refusal") return 3;
    return 1; // undeclared fail/inconclusive, or a declared outcome that did not occur
}

std::string compose_summary(const ExperimentConfig& cfg, const RunOptions& opt,
                            const Emitter& em, const std::vector<VerdictLine>& v,
                            const std::vector<std::string>& extra, const std::string& outcome,
                            const std::string& message, long long wall_ms, int exit_code) {
    std::ostringstream s;
    s << "experiment: " << cfg.id << "\n";
    s << "kind: " << cfg.kind << "\n";
    if (cfg.kind != "inequality-fuzz") {
        s << "sequence: " << cfg.sequence << "\n";
        s << "n_max: " << cfg.n_max << "\n";
        s << "trend: tau=" << fmt(cfg.policy.tau) << " basis=\"" << cfg.policy.basis << "\"\n";
    } else {
        s << "trials: " << cfg.trials << " per inequality family\n";
        s << "size_cap: " << cfg.size_cap << ", dim_cap: " << cfg.dim_cap << "\n";
    }
    s << "seed: " << (cfg.seed ? std::to_string(*cfg.seed) : std::string("none")) << "\n";
    s << "threads: " << opt.threads << " (averages are single-pass deterministic)\n";
    s << "exact: " << (em.all_exact ? "yes" : "no") << "\n";
    if (!em.files.empty()) {
        s << "series:\n";
        for (const std::string& f : em.files) s << "  " << f << "\n";
    }
    for (const std::string& e : extra) s << e << "\n";
    if (!v.empty()) {
        s << "checks:\n";
        for (const VerdictLine& line : v) {
            s << "  " << line.label;
            if (!line.file.empty()) s << " [" << line.file << "]";
            s << ": " << line.text << "\n";
        }
    }
    if (!message.empty()) s << "message: " << message << "\n";
    s << "expected: " << cfg.expected << "\n";
    s << "outcome: " << outcome << "\n";
    s << "wall_clock_ms: " << wall_ms << "\n";
    s << "exit: " << exit_code << "\n";
    return s.str();
}

} // namespace

RunResult run_experiment(const ExperimentConfig& cfg0, const RunOptions& opt) {
    ExperimentConfig cfg = cfg0;
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    if (opt.seed) cfg.seed = opt.seed;
    if (cfg.kind == "inequality-fuzz") return run_fuzz(cfg, RunOptions{"", {}, opt.threads});

    RunResult res;
    res.id = cfg.id;
    auto t0 = std::chrono::steady_clock::now();

    Emitter em{fs::path(cfg.out_dir), {}, true};
    std::vector<VerdictLine> verdicts;
    Ctx ctx{cfg, em, verdicts, {}};
    std::string outcome, message;
    try {
        std::error_code ec;
        fs::create_directories(em.dir, ec);
        if (ec) throw config_error("cannot create output directory: " + cfg.out_dir);
        outcome = dispatch(ctx);
    } catch (const inequality_failure& e) {
        outcome = "violation";
        message = e.what();
        write_file(em.dir / "witness.txt", std::string(e.what()) + "\n");
        em.files.push_back("witness.txt");
    } catch (const hypothesis_error& e) {
        outcome = "refusal";
        message = e.what();
    } catch (const config_error& e) {
        outcome = "error";
        message = e.what();
    } catch (const structural_error& e) {
        outcome = "error";
        message = e.what();
    } catch (const std::exception& e) {
        outcome = "error";
        message = e.what();
    }

    long long wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    res.exit_code = exit_for(outcome, cfg.expected);
    res.outcome = outcome;
    res.series_files = em.files;
    res.verdicts = verdicts;
    res.summary_text = compose_summary(cfg, opt, em, verdicts, ctx.extra, outcome, message,
                                       wall_ms, res.exit_code);
    if (outcome != "error") {
        write_file(em.dir / "summary.txt", res.summary_text);
        res.summary_path = (em.dir / "summary.txt").string();
    }
    return res;
}

// ---------------------------------------------------------------------------
// Randomized inequality trials

namespace {

Rat rand_rat(Rng& r) { return Rat(r.range(-20, 20), r.range(1, 10)); }

Num rand_value(Rng& r) {
    Rat q = rand_rat(r);
    if (r.chance(1, 8)) return Num::from_double(rat_to_double(q));
    return Num(q);
}

std::vector<GroupElement> rand_elements(Rng& r, int rank, long long size_cap) {
    std::vector<GroupElement> out;
    if (r.chance(1, 2)) {
        // contiguous block
        long long side = rank == 1 ? r.range(1, std::max<long long>(1, size_cap))
                                   : r.range(1, 5);
        long long lo = r.range(-20, 20);
        if (rank == 1) {
            for (long long v = lo; v < lo + side; ++v) out.push_back(GroupElement::scalar(v));
        } else {
            long long lo2 = r.range(-20, 20);
            for (long long a = lo; a < lo + side; ++a)
                for (long long b = lo2; b < lo2 + side; ++b) out.push_back(GroupElement({a, b}));
        }
    } else {
        long long count = r.range(1, std::min<long long>(size_cap, 12));
        for (long long i = 0; i < count; ++i) {
            if (rank == 1)
                out.push_back(GroupElement::scalar(r.range(-40, 40)));
            else
                out.push_back(GroupElement({r.range(-8, 8), r.range(-8, 8)}));
        }
    }
    return out;
}

// table-backed group function; elements off the table evaluate to zero
GroupFunction table_function(int dim, double sup,
                             std::shared_ptr<std::map<GroupElement, std::vector<Num>>> table) {
    return vector_fn(dim, sup, [dim, table](const GroupElement& g) {
        auto it = table->find(g);
        if (it != table->end()) return it->second;
        return std::vector<Num>((std::size_t)dim, Num(0));
    });
}

struct TrialData {
    GroupModel model;
    std::vector<GroupElement> elems;
    int dim = 1;
    std::shared_ptr<std::map<GroupElement, std::vector<Num>>> table;
    double sup = 0;
};

TrialData make_trial(Rng& r, long long size_cap, int dim_cap, bool nonneg) {
    TrialData d{r.chance(1, 2) ? GroupModel::lattice(1) : GroupModel::lattice(2), {}, 1,
                std::make_shared<std::map<GroupElement, std::vector<Num>>>(), 0};
    d.elems = rand_elements(r, d.model.rank(), size_cap);
    d.dim = nonneg ? 1 : (int)r.range(1, dim_cap);
    for (const GroupElement& g : d.elems) {
        if (d.table->count(g)) continue;
        std::vector<Num> v;
        for (int i = 0; i < d.dim; ++i) {
            Num x = rand_value(r);
            v.push_back(nonneg ? abs(x) : x);
        }
        (*d.table)[g] = v;
    }
    d.sup = 25.0 * std::sqrt((double)d.dim);
    return d;
}

std::string describe_subset(const TrialData& d, const std::vector<GroupElement>& els) {
    std::string out = d.model.describe() + ", elements:";
    for (const GroupElement& g : els) {
        out += "\n  " + g.str() + " ->";
        auto it = d.table->find(g);
        if (it != d.table->end())
            for (const Num& x : it->second) out += " " + x.str();
    }
    return out;
}

// Greedy shrink: drop elements while the claim still fails.
std::vector<GroupElement> minimize_set(
    std::vector<GroupElement> elems,
    const std::function<bool(const std::vector<GroupElement>&)>& violated) {
    bool progress = true;
    while (progress && elems.size() > 1) {
        progress = false;
        for (std::size_t i = 0; i < elems.size(); ++i) {
            std::vector<GroupElement> cand = elems;
            cand.erase(cand.begin() + (std::ptrdiff_t)i);
            if (violated(cand)) {
                elems = cand;
                progress = true;
                break;
            }
        }
    }
    return elems;
}

// On a violation the trial shrinks its set while the claim still fails and
// returns the witness text; empty optional means the inequality held.
std::optional<std::string> finish_trial(const TrialData& d,
                                        const std::function<bool(const std::vector<GroupElement>&)>& violated,
                                        const std::function<std::string(const std::vector<GroupElement>&)>& claim) {
    if (!violated(d.elems)) return std::nullopt;
    std::vector<GroupElement> minimal = minimize_set(d.elems, violated);
    return "claim: " + claim(minimal) + "\nminimized case: " + describe_subset(d, minimal);
}

std::string claim_message(const std::function<void(const std::vector<GroupElement>&)>& check,
                          const std::vector<GroupElement>& els) {
    try {
        check(els);
    } catch (const inequality_failure& e) {
        return e.what();
    }
    return "violation did not reproduce";
}

std::optional<std::string> trial_avg_norm(Rng& r, long long size_cap, int dim_cap) {
    TrialData d = make_trial(r, size_cap, dim_cap, false);
    GroupFunction f = table_function(d.dim, d.sup, d.table);
    auto check = [&](const std::vector<GroupElement>& els) {
        avg_norm_inequality(f, FiniteSubset(d.model, els));
    };
    auto violated = [&](const std::vector<GroupElement>& els) {
        try {
            check(els);
            return false;
        } catch (const inequality_failure&) {
            return true;
        }
    };
    return finish_trial(d, violated,
                        [&](const std::vector<GroupElement>& els) { return claim_message(check, els); });
}

std::optional<std::string> trial_triple(Rng& r, long long size_cap, int dim_cap) {
    TrialData d = make_trial(r, size_cap / 2, dim_cap, false);
    std::vector<GroupElement> second = rand_elements(r, d.model.rank(), size_cap / 2);
    // values for all products g h the triple average touches
    FiniteSubset lam2(d.model, second);
    FiniteSubset lam1(d.model, d.elems);
    for (const GroupElement& g : lam2.elements())
        for (const GroupElement& h : lam1.elements()) {
            GroupElement gh = d.model.compose(g, h);
            if (!d.table->count(gh)) {
                std::vector<Num> v;
                for (int i = 0; i < d.dim; ++i) v.push_back(rand_value(r));
                (*d.table)[gh] = v;
            }
        }
    GroupFunction f = table_function(d.dim, d.sup, d.table);
    auto check = [&](const std::vector<GroupElement>& els) {
        triple_avg_inequality(f, FiniteSubset(d.model, els), lam2);
    };
    auto violated = [&](const std::vector<GroupElement>& els) {
        try {
            check(els);
            return false;
        } catch (const inequality_failure&) {
            return true;
        }
    };
    return finish_trial(d, violated,
                        [&](const std::vector<GroupElement>& els) { return claim_message(check, els); });
}

std::optional<std::string> trial_folding(Rng& r, long long size_cap, int dim_cap) {
    (void)dim_cap;
    TrialData d = make_trial(r, size_cap, 1, true);
    FiniteSubset quot = FiniteSubset(d.model, d.elems).quotient();
    for (const GroupElement& q : quot.elements())
        if (!d.table->count(q)) (*d.table)[q] = {abs(rand_value(r))};
    bool widened = r.chance(1, 3);
    std::vector<GroupElement> wide = quot.elements();
    if (widened) {
        for (long long i = r.range(1, 4); i > 0; --i)
            wide.push_back(d.model.rank() == 1
                               ? GroupElement::scalar(r.range(-60, 60))
                               : GroupElement({r.range(-20, 20), r.range(-20, 20)}));
        for (const GroupElement& q : wide)
            if (!d.table->count(q)) (*d.table)[q] = {abs(rand_value(r))};
    }
    GroupFunction f = table_function(1, d.sup, d.table);
    auto check = [&](const std::vector<GroupElement>& els) {
        FiniteSubset set(d.model, els);
        if (widened) {
            // keep the declared S a superset of the shrunken quotient set
            std::vector<GroupElement> s = wide;
            FiniteSubset sub_quot = set.quotient();
            for (const GroupElement& q : sub_quot.elements()) s.push_back(q);
            folding_inequality(f, set, FiniteSubset(d.model, s));
        } else {
            folding_inequality(f, set);
        }
    };
    auto violated = [&](const std::vector<GroupElement>& els) {
        try {
            check(els);
            return false;
        } catch (const inequality_failure&) {
            return true;
        }
    };
    return finish_trial(d, violated,
                        [&](const std::vector<GroupElement>& els) { return claim_message(check, els); });
}

std::optional<std::string> trial_quotient_bound(Rng& r, long long size_cap, int dim_cap) {
    (void)size_cap;
    (void)dim_cap;
    bool plane = r.chance(1, 2);
    FolnerSequence seq = plane ? FolnerSequence::z2_squares() : FolnerSequence::z_symmetric();
    long long m = r.range(1, plane ? 3 : 6);
    auto table = std::make_shared<std::map<GroupElement, Num>>();
    auto vals = std::make_shared<Rng>(r.fork(17));
    std::function<Num(const GroupElement&)> gamma = [table, vals](const GroupElement& g) {
        auto it = table->find(g);
        if (it == table->end()) it = table->emplace(g, rand_value(*vals)).first;
        return it->second;
    };
    try {
        gamma_quotient_bound(gamma, seq, m);
    } catch (const inequality_failure& e) {
        return "claim: " + std::string(e.what()) + "\ncase: " + seq.name() + " at m=" +
               std::to_string(m) + " (correlation table regenerated by the seeded stream)";
    }
    return std::nullopt;
}

void corrupt_self_test(const fs::path& dir, std::vector<std::string>& files) {
    // Deliberately halve the right-hand side of the average-norm inequality
    // and confirm the violation path reports it. A constant function makes
    // the true inequality an equality, so the corrupted claim must fail.
    GroupModel model = GroupModel::lattice(1);
    auto table = std::make_shared<std::map<GroupElement, std::vector<Num>>>();
    std::vector<GroupElement> elems;
    for (long long v = 1; v <= 4; ++v) {
        elems.push_back(GroupElement::scalar(v));
        (*table)[GroupElement::scalar(v)] = {Num(1)};
    }
    auto violated = [&](const std::vector<GroupElement>& cand) {
        InequalityReport rep =
            avg_norm_inequality(table_function(1, 1.0, table), FiniteSubset(model, cand));
        return !(rep.lhs <= rep.rhs / Num(2));
    };
    if (!violated(elems))
        throw config_error("corrupt self-test did not trigger; harness cannot be trusted");
    std::vector<GroupElement> minimal = minimize_set(elems, violated);
    InequalityReport rep =
        avg_norm_inequality(table_function(1, 1.0, table), FiniteSubset(model, minimal));
    std::ostringstream w;
    w << "family: average-norm (deliberately corrupted: right-hand side halved)\n";
    w << "claim checked: lhs <= rhs/2 with lhs " << rep.lhs.str() << ", rhs " << rep.rhs.str()
      << "\n";
    w << "minimized witness: constant 1 on {";
    for (std::size_t i = 0; i < minimal.size(); ++i)
        w << (i ? ", " : "") << minimal[i].str();
    w << "}\n";
    w << "the harness caught the corrupted inequality, as it must\n";
    write_file(dir / "witness.txt", w.str());
    files.push_back("witness.txt");
    throw inequality_failure("corrupted average-norm claim violated",
                             "lhs " + rep.lhs.str() + " > rhs/2 " + (rep.rhs / Num(2)).str());
}

} // namespace

RunResult run_fuzz(const ExperimentConfig& cfg0, const RunOptions& opt) {
    ExperimentConfig cfg = cfg0;
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    if (opt.seed) cfg.seed = opt.seed;

    RunResult res;
    res.id = cfg.id;
    auto t0 = std::chrono::steady_clock::now();

    Emitter em{fs::path(cfg.out_dir), {}, true};
    std::vector<VerdictLine> verdicts;
    std::vector<std::string> extra;
    std::string outcome, message;

    struct Family {
        const char* name;
        std::optional<std::string> (*run)(Rng&, long long, int);
    };
    static const Family families[] = {{"average-norm", trial_avg_norm},
                                      {"triple-average", trial_triple},
                                      {"folding", trial_folding},
                                      {"quotient-bound", trial_quotient_bound}};

    try {
        if (cfg.kind != "inequality-fuzz")
            throw config_error("fuzz requires kind inequality-fuzz, got: " + cfg.kind);
        if (!cfg.seed) throw config_error("inequality-fuzz requires a seed");
        std::error_code ec;
        fs::create_directories(em.dir, ec);
        if (ec) throw config_error("cannot create output directory: " + cfg.out_dir);

        if (cfg.corrupt_self_test) corrupt_self_test(em.dir, em.files);

        bool violated = false;
        for (std::size_t fi = 0; fi < 4 && !violated; ++fi) {
            for (long long t = 0; t < cfg.trials; ++t) {
                Rng r = Rng(*cfg.seed).fork(1000003ULL * fi + (std::uint64_t)t);
                std::optional<std::string> witness = families[fi].run(r, cfg.size_cap, cfg.dim_cap);
                if (!witness) continue;
                std::ostringstream w;
                w << "family: " << families[fi].name << "\n";
                w << "trial: " << t << "\n";
                w << "seed: " << *cfg.seed << "\n";
                w << *witness << "\n";
                write_file(em.dir / "witness.txt", w.str());
                em.files.push_back("witness.txt");
                verdicts.push_back({std::string(families[fi].name) + " trial " + std::to_string(t),
                                    "witness.txt", "VIOLATION"});
                message = "inequality violated; see witness.txt";
                violated = true;
                break;
            }
            if (!violated)
                verdicts.push_back({std::string(families[fi].name) + " (" +
                                        std::to_string(cfg.trials) + " trials)",
                                    "", "PASS"});
        }
        if (violated) {
            outcome = "violation";
        } else {
            outcome = "pass";
            extra.push_back(cfg.trials == 0 ? "no trials requested; empty report"
                                            : "violations: 0");
        }
    } catch (const inequality_failure& e) {
        outcome = "violation";
        message = e.what();
    } catch (const config_error& e) {
        outcome = "error";
        message = e.what();
    } catch (const structural_error& e) {
        outcome = "error";
        message = e.what();
    } catch (const std::exception& e) {
        outcome = "error";
        message = e.what();
    }

    long long wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    res.exit_code = exit_for(outcome, cfg.expected);
    if (outcome == "violation") res.exit_code = 1;
    res.outcome = outcome;
    res.series_files = em.files;
    res.verdicts = verdicts;
    res.summary_text = compose_summary(cfg, opt, em, verdicts, extra, outcome, message, wall_ms,
                                       res.exit_code);
    if (outcome != "error") {
        write_file(em.dir / "summary.txt", res.summary_text);
        res.summary_path = (em.dir / "summary.txt").string();
    }
    return res;
}

// ---------------------------------------------------------------------------
// Bundled presets

namespace {

const std::map<std::string, const char*>& preset_table() {
    static const std::map<std::string, const char*> table = {
        {"bernoulli-z-order3", R"({
  "id": "bernoulli-z-order3",
  "kind": "order-k",
  "sequence": "z-initial",
  "system": {"preset": "bernoulli", "alphabet": 2, "rank": 1, "weights": ["1/2", "1/2"]},
  "observables": [
    {"type": "site-indicator", "site": [0], "symbol": 0},
    {"type": "site-indicator", "site": [0], "symbol": 0},
    {"type": "site-indicator", "site": [0], "symbol": 0},
    {"type": "site-indicator", "site": [0], "symbol": 0}
  ],
  "phis": [{"multiplier": 1}, {"multiplier": 2}, {"multiplier": 3}],
  "family": {"rule": "nonzero-multiplier",
             "members": [{"multiplier": 1}, {"multiplier": 2}, {"multiplier": 3}]},
  "k": 3,
  "n_max": 600,
  "c_bound": 4,
  "trend": {"tau": 0.205, "basis": "10x known rate 1/(2 sqrt(n)) at n=600"},
  "expected": "pass"
})"},
        {"bernoulli-z-order2", R"({
  "id": "bernoulli-z-order2",
  "kind": "order-k",
  "sequence": "z-initial",
  "system": {"preset": "bernoulli", "alphabet": 2, "rank": 1, "weights": ["1/2", "1/2"]},
  "observables": [
    {"type": "site-indicator", "site": [0], "symbol": 0},
    {"type": "site-indicator", "site": [0], "symbol": 0},
    {"type": "site-indicator", "site": [0], "symbol": 0}
  ],
  "phis": [{"multiplier": 1}, {"multiplier": 2}],
  "family": {"rule": "nonzero-multiplier",
             "members": [{"multiplier": 1}, {"multiplier": 2}]},
  "k": 2,
  "n_max": 2000,
  "c_bound": 4,
  "trend": {"tau": 0.1118, "basis": "10x known rate 1/(2 sqrt(n)) at n=2000"},
  "expected": "pass"
})"},
        {"bernoulli-z2-order2", R"({
  "id": "bernoulli-z2-order2",
  "kind": "order-k",
  "sequence": "z2-squares",
  "system": {"preset": "bernoulli", "alphabet": 2, "rank": 2, "weights": ["1/2", "1/2"]},
  "observables": [
    {"type": "site-indicator", "site": [0, 0], "symbol": 0},
    {"type": "site-indicator", "site": [0, 0], "symbol": 0},
    {"type": "site-indicator", "site": [0, 0], "symbol": 0}
  ],
  "phis": [{"diagonal": [1, 1]}, {"diagonal": [2, 3]}],
  "family": {"rule": "nonzero-diagonal",
             "members": [{"diagonal": [1, 1]}, {"diagonal": [2, 3]}]},
  "k": 2,
  "n_max": 30,
  "c_bound": 4,
  "trend": {"tau": 0.0711, "basis": "10x known rate 0.4337/sqrt(c_n) at n=30"},
  "expected": "pass"
})"},
        {"rotation-negative-control", R"({
  "id": "rotation-negative-control",
  "kind": "wm",
  "sequence": "z-initial",
  "system": {"preset": "rotation-float", "alpha": "golden"},
  "observables": [
    {"type": "interval", "arcs": [["0", "1/2"]]},
    {"type": "interval", "arcs": [["0", "1/2"]]}
  ],
  "phis": [{"multiplier": 1}],
  "n_max": 10000,
  "trend": {"tau": 0.01, "basis": "absolute"},
  "expected": "fail"
})"},
        {"bernoulli-product-equivalence", R"({
  "id": "bernoulli-product-equivalence",
  "kind": "product-equivalence",
  "sequence": "z-initial",
  "system": {"preset": "bernoulli", "alphabet": 2, "rank": 1, "weights": ["1/2", "1/2"]},
  "observables": [
    {"type": "site-indicator", "site": [0], "symbol": 0},
    {"type": "site-indicator", "site": [0], "symbol": 0},
    {"type": "centered-site", "site": [0], "symbol": 0},
    {"type": "centered-site", "site": [0], "symbol": 0}
  ],
  "phis": [{"multiplier": 1}],
  "n_max": 10000,
  "trend": {"tau": 0.01, "basis": "absolute"},
  "expected": "pass"
})"},
        {"rotation-product-equivalence", R"({
  "id": "rotation-product-equivalence",
  "kind": "product-equivalence",
  "sequence": "z-initial",
  "system": {"preset": "rotation-float", "alpha": "golden"},
  "observables": [
    {"type": "interval", "arcs": [["0", "1/2"]]},
    {"type": "interval", "arcs": [["0", "1/2"]]},
    {"type": "cosine", "freq": [1]},
    {"type": "cosine", "freq": [1]}
  ],
  "phis": [{"multiplier": 1}],
  "n_max": 10000,
  "trend": {"tau": 0.01, "basis": "absolute"},
  "expected": "fail"
})"},
        {"bernoulli-pipeline-k2", R"({
  "id": "bernoulli-pipeline-k2",
  "kind": "pipeline",
  "sequence": "z-initial",
  "system": {"preset": "bernoulli", "alphabet": 2, "rank": 1, "weights": ["1/2", "1/2"]},
  "observables": [
    {"type": "site-indicator", "site": [0], "symbol": 0},
    {"type": "site-indicator", "site": [0], "symbol": 0},
    {"type": "site-indicator", "site": [0], "symbol": 0}
  ],
  "phis": [{"multiplier": 1}, {"multiplier": 2}],
  "family": {"rule": "nonzero-multiplier",
             "members": [{"multiplier": 1}, {"multiplier": 2}]},
  "k": 2,
  "n_max": 400,
  "c_bound": 4,
  "trend": {"tau": 0.25, "basis": "10x known rate 1/(2 sqrt(n)) at n=400"},
  "expected": "pass"
})"},
        {"gamma-closed-form", R"({
  "id": "gamma-closed-form",
  "kind": "gamma",
  "sequence": "z-initial",
  "system": {"preset": "bernoulli", "alphabet": 2, "rank": 1, "weights": ["1/2", "1/2"]},
  "observables": [
    {"type": "site-indicator", "site": [0], "symbol": 0},
    {"type": "centered-site", "site": [0], "symbol": 0},
    {"type": "centered-site", "site": [0], "symbol": 0}
  ],
  "phis": [{"multiplier": 1}, {"multiplier": 2}],
  "family": {"rule": "nonzero-multiplier",
             "members": [{"multiplier": 1}, {"multiplier": 2}]},
  "k": 2,
  "n_max": 60,
  "c_bound": 4,
  "expected": "pass"
})"},
        {"vdc-alternating", R"({
  "id": "vdc-alternating",
  "kind": "vdc-suite",
  "sequence": "z-symmetric",
  "function": {"name": "alternating"},
  "m_list": [1, 2, 4, 8],
  "n_max": 200,
  "trend": {"tau": 0.01, "basis": "absolute"},
  "expected": "pass"
})"},
        {"kvn-squares", R"({
  "id": "kvn-squares",
  "kind": "kvn",
  "sequence": "z-initial",
  "function": {"name": "squares-indicator"},
  "n_max": 10000,
  "trend": {"tau": 0.1, "basis": "10x known rate 1/sqrt(n) at n=10000"},
  "expected": "pass"
})"},
        {"kvn-constant", R"({
  "id": "kvn-constant",
  "kind": "kvn",
  "sequence": "z-initial",
  "function": {"name": "constant", "value": "1/3"},
  "n_max": 2000,
  "trend": {"tau": 0.01, "basis": "absolute"},
  "expected": "fail"
})"},
        {"fuzz-default", R"({
  "id": "fuzz-default",
  "kind": "inequality-fuzz",
  "trials": 1000,
  "seed": 42,
  "size_cap": 30,
  "dim_cap": 8,
  "expected": "pass"
})"},
        {"fuzz-smoke", R"({
  "id": "fuzz-smoke",
  "kind": "inequality-fuzz",
  "trials": 25,
  "seed": 7,
  "size_cap": 20,
  "dim_cap": 4,
  "expected": "pass"
})"},
        {"fuzz-self-test", R"({
  "id": "fuzz-self-test",
  "kind": "inequality-fuzz",
  "trials": 1,
  "seed": 1,
  "corrupt_self_test": true,
  "expected": "pass"
})"},
    };
    return table;
}

} // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [name, text] : preset_table()) out.push_back(name);
    return out;
}

bool is_preset(const std::string& name) { return preset_table().count(name) > 0; }

std::string preset_text(const std::string& name) {
    auto it = preset_table().find(name);
    if (it == preset_table().end()) throw config_error("unknown preset: " + name);
    return it->second;
}

} // namespace ergo
