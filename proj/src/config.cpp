#include "ergokit/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ergokit/errors.hpp"

namespace ergo {

using nlohmann::json;

namespace {

const json& need(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw config_error(std::string("missing config key: ") + key);
    return *it;
}

std::string str_at(const json& j, const char* key) {
    const json& v = need(j, key);
    if (!v.is_string()) throw config_error(std::string("config key must be a string: ") + key);
    return v.get<std::string>();
}

long long int_of(const json& v, const std::string& what) {
    if (!v.is_number_integer()) throw config_error("expected an integer for " + what);
    return v.get<long long>();
}

long long int_at(const json& j, const char* key) { return int_of(need(j, key), key); }

// rationals travel as "p/q" strings or plain json integers
Rat rat_of(const json& v, const std::string& what) {
    try {
        if (v.is_string()) return rat_from_string(v.get<std::string>());
        if (v.is_number_integer()) return Rat(v.get<long long>());
    } catch (const std::exception&) {
    }
    throw config_error("expected a rational (\"p/q\" or integer) for " + what);
}

double dbl_of(const json& v, const std::string& what) {
    if (!v.is_number()) throw config_error("expected a number for " + what);
    return v.get<double>();
}

std::vector<long long> int_list(const json& v, const std::string& what) {
    if (!v.is_array()) throw config_error("expected an array for " + what);
    std::vector<long long> out;
    for (const json& e : v) out.push_back(int_of(e, what + " entry"));
    return out;
}

GroupElement element_of(const json& v, const std::string& what) {
    if (v.is_number_integer()) return GroupElement::scalar(v.get<long long>());
    return GroupElement(int_list(v, what));
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw config_error(std::string("config parse: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config root must be an object");

    ExperimentConfig cfg;
    cfg.raw = j;
    cfg.id = j.value("id", std::string("experiment"));
    cfg.kind = str_at(j, "kind");
    static const char* kinds[] = {"wm",    "ergodic", "l2wm",     "product-equivalence",
                                  "vdc-suite", "gamma",   "order-k",  "pipeline",
                                  "kvn",   "inequality-fuzz"};
    bool known = false;
    for (const char* k : kinds) known = known || cfg.kind == k;
    if (!known) throw config_error("unknown experiment kind: " + cfg.kind);

    cfg.sequence = j.value("sequence", std::string("z-initial"));
    if (j.contains("rank")) cfg.rank = (int)int_at(j, "rank");
    if (j.contains("spacing")) cfg.spacing = rat_of(j["spacing"], "spacing");

    if (j.contains("n_max")) cfg.n_max = int_at(j, "n_max");
    if (j.contains("m_list")) cfg.m_list = int_list(j["m_list"], "m_list");
    if (j.contains("k")) cfg.k = (int)int_at(j, "k");
    if (j.contains("c_bound")) cfg.c_bound = dbl_of(j["c_bound"], "c_bound");

    if (j.contains("trend")) {
        const json& t = j["trend"];
        if (!t.is_object()) throw config_error("trend must be an object");
        cfg.policy.tau = dbl_of(need(t, "tau"), "trend.tau");
        cfg.policy.basis = t.value("basis", std::string("absolute"));
        if (cfg.policy.tau <= 0) throw config_error("trend.tau must be positive");
    }
    if (j.contains("epsilons"))
        for (const json& e : j["epsilons"]) cfg.epsilons.push_back(Num(rat_of(e, "epsilons")));

    if (j.contains("seed")) {
        const json& s = j["seed"];
        if (!s.is_number_integer()) throw config_error("seed must be a nonnegative integer");
        if (!s.is_number_unsigned() && s.get<long long>() < 0)
            throw config_error("seed must be a nonnegative integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    if (j.contains("trials")) {
        cfg.trials = int_at(j, "trials");
        if (cfg.trials < 0) throw config_error("trials must be nonnegative");
    }
    if (j.contains("size_cap")) cfg.size_cap = int_at(j, "size_cap");
    if (j.contains("dim_cap")) cfg.dim_cap = (int)int_at(j, "dim_cap");
    if (j.contains("corrupt_self_test")) {
        if (!j["corrupt_self_test"].is_boolean())
            throw config_error("corrupt_self_test must be a boolean");
        cfg.corrupt_self_test = j["corrupt_self_test"].get<bool>();
    }

    cfg.expected = j.value("expected", std::string("pass"));
    if (cfg.expected != "pass" && cfg.expected != "fail" && cfg.expected != "inconclusive" &&
        cfg.expected != "refusal")
        throw config_error("expected must be one of pass/fail/inconclusive/refusal");

    cfg.out_dir = j.value("out", std::string("out"));

    bool needs_series = cfg.kind != "inequality-fuzz";
    if (needs_series && cfg.n_max < 1) throw config_error("n_max must be at least 1");
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

FolnerSequence build_sequence(const ExperimentConfig& cfg) {
    if (cfg.sequence == "z-initial") return FolnerSequence::z_initial();
    if (cfg.sequence == "z-symmetric") return FolnerSequence::z_symmetric();
    if (cfg.sequence == "z2-squares") return FolnerSequence::z2_squares();
    if (cfg.sequence == "scaled-ball") return FolnerSequence::scaled_ball(cfg.rank, cfg.spacing);
    throw config_error("unknown sequence preset: " + cfg.sequence);
}

MPSystem build_system(const ExperimentConfig& cfg) {
    const json& s = need(cfg.raw, "system");
    if (!s.is_object()) throw config_error("system must be an object");
    std::string preset = str_at(s, "preset");
    try {
        if (preset == "bernoulli") {
            std::vector<Rat> w;
            for (const json& e : need(s, "weights")) w.push_back(rat_of(e, "system.weights"));
            return MPSystem::bernoulli((int)int_at(s, "alphabet"),
                                       (int)(s.contains("rank") ? int_at(s, "rank") : 1), w);
        }
        if (preset == "rotation") {
            std::vector<Num> alpha;
            for (const json& e : need(s, "alpha")) alpha.push_back(Num(rat_of(e, "system.alpha")));
            return MPSystem::rotation(alpha);
        }
        if (preset == "rotation-float") {
            const json& a = need(s, "alpha");
            std::vector<long double> alpha;
            if (a.is_string() && a.get<std::string>() == "golden") {
                alpha.push_back((sqrtl(5.0L) - 1.0L) / 2.0L);
            } else if (a.is_array()) {
                for (const json& e : a) alpha.push_back((long double)dbl_of(e, "system.alpha"));
            } else {
                throw config_error("rotation-float alpha must be \"golden\" or an array");
            }
            return MPSystem::rotation_float(alpha);
        }
        if (preset == "torus-endomorphism")
            return MPSystem::torus_endomorphism((int)int_at(s, "dim"),
                                                int_list(need(s, "matrix"), "system.matrix"));
        if (preset == "finite") {
            std::vector<Rat> w;
            for (const json& e : need(s, "weights")) w.push_back(rat_of(e, "system.weights"));
            std::vector<std::vector<int>> gens;
            for (const json& g : need(s, "gens")) {
                std::vector<int> perm;
                for (long long v : int_list(g, "system.gens entry")) perm.push_back((int)v);
                gens.push_back(perm);
            }
            return MPSystem::finite(w, gens);
        }
    } catch (const structural_error& e) {
        throw config_error(std::string("system: ") + e.what());
    }
    throw config_error("unknown system preset: " + preset);
}

namespace {

Observable constant_for(const MPSystem& sys, const Rat& c) {
    if (sys.get<BernoulliSys>()) return cylinder_constant(c);
    if (const RotationSys* r = sys.get<RotationSys>()) return trig_constant(r->dim, c);
    if (const EndoSys* e = sys.get<EndoSys>()) return trig_constant(e->dim, c);
    if (const FiniteSys* f = sys.get<FiniteSys>())
        return table_fn(std::vector<Num>(f->weights.size(), Num(c)));
    throw config_error("constant observables are not defined on this system");
}

Observable one_observable(const json& o, const MPSystem& sys) {
    if (!o.is_object()) throw config_error("observable entries must be objects");
    std::string type = str_at(o, "type");
    if (type == "site-indicator")
        return cylinder_indicator(
            {{element_of(need(o, "site"), "observable site"), (int)int_at(o, "symbol")}});
    if (type == "cylinder") {
        std::vector<std::pair<GroupElement, int>> sites;
        for (const json& e : need(o, "sites"))
            sites.emplace_back(element_of(need(e, "site"), "cylinder site"),
                               (int)int_at(e, "symbol"));
        return cylinder_indicator(sites);
    }
    if (type == "centered-site") {
        const BernoulliSys* b = sys.get<BernoulliSys>();
        if (!b) throw config_error("centered-site needs a product-space system");
        int symbol = (int)int_at(o, "symbol");
        if (symbol < 0 || symbol >= b->alphabet)
            throw config_error("centered-site symbol out of range");
        Observable ind = cylinder_indicator(
            {{element_of(need(o, "site"), "observable site"), symbol}});
        return obs_add(ind, cylinder_constant(-b->weights[(std::size_t)symbol]));
    }
    if (type == "constant") return constant_for(sys, rat_of(need(o, "value"), "constant value"));
    if (type == "interval") {
        std::vector<std::pair<Num, Num>> arcs;
        for (const json& a : need(o, "arcs")) {
            if (!a.is_array() || a.size() != 2)
                throw config_error("interval arcs must be [lo, hi] pairs");
            arcs.emplace_back(Num(rat_of(a[0], "arc endpoint")), Num(rat_of(a[1], "arc endpoint")));
        }
        return interval_union(arcs);
    }
    if (type == "cosine") {
        std::vector<long long> freq = int_list(need(o, "freq"), "cosine freq");
        return trig_cosine((int)freq.size(), freq);
    }
    if (type == "table") {
        std::vector<Num> values;
        for (const json& v : need(o, "values")) values.push_back(Num(rat_of(v, "table value")));
        return table_fn(values);
    }
    throw config_error("unknown observable type: " + type);
}

Homomorphism one_phi(const json& p, int rank) {
    if (!p.is_object()) throw config_error("phi entries must be objects");
    if (p.contains("multiplier")) {
        if (rank != 1) throw config_error("multiplier phis require a rank-1 group");
        return Homomorphism::multiplier(int_of(p["multiplier"], "multiplier"));
    }
    if (p.contains("diagonal")) {
        std::vector<long long> d = int_list(p["diagonal"], "diagonal");
        if ((int)d.size() != rank) throw config_error("diagonal phi has the wrong rank");
        return Homomorphism::diagonal(d);
    }
    if (p.contains("matrix")) {
        std::vector<long long> m = int_list(p["matrix"], "matrix");
        if ((int)m.size() != rank * rank) throw config_error("matrix phi has the wrong shape");
        return Homomorphism::matrix(rank, m);
    }
    throw config_error("phi entries need one of multiplier/diagonal/matrix");
}

TranslationalFamily::Rule rule_of(const std::string& name) {
    if (name == "explicit") return TranslationalFamily::Rule::ExplicitOnly;
    if (name == "nonzero-multiplier") return TranslationalFamily::Rule::NonzeroMultiplier;
    if (name == "nonzero-diagonal") return TranslationalFamily::Rule::NonzeroDiagonal;
    if (name == "nonzero-matrix") return TranslationalFamily::Rule::NonzeroMatrix;
    throw config_error("unknown family rule: " + name);
}

} // namespace

std::vector<Observable> build_observables(const ExperimentConfig& cfg, const MPSystem& sys) {
    const json& list = need(cfg.raw, "observables");
    if (!list.is_array() || list.empty())
        throw config_error("observables must be a nonempty array");
    std::vector<Observable> out;
    try {
        for (const json& o : list) out.push_back(one_observable(o, sys));
    } catch (const structural_error& e) {
        throw config_error(std::string("observables: ") + e.what());
    }
    return out;
}

std::vector<Homomorphism> build_phis(const ExperimentConfig& cfg, int rank) {
    const json& list = need(cfg.raw, "phis");
    if (!list.is_array() || list.empty()) throw config_error("phis must be a nonempty array");
    std::vector<Homomorphism> out;
    for (const json& p : list) out.push_back(one_phi(p, rank));
    return out;
}

TranslationalFamily build_family(const ExperimentConfig& cfg,
                                 const std::vector<Homomorphism>& phis) {
    if (cfg.raw.contains("family")) {
        const json& f = cfg.raw["family"];
        if (!f.is_object()) throw config_error("family must be an object");
        TranslationalFamily::Rule rule = rule_of(str_at(f, "rule"));
        std::vector<Homomorphism> members;
        if (f.contains("members"))
            for (const json& p : f["members"])
                members.push_back(one_phi(p, phis.empty() ? 1 : phis.front().rank()));
        else
            members = phis;
        try {
            return TranslationalFamily(members, rule);
        } catch (const structural_error& e) {
            throw config_error(std::string("family: ") + e.what());
        }
    }
    // default: the declared phis under the natural rule for their shape
    if (phis.empty()) throw config_error("a family needs phis to default from");
    bool all_diag = true;
    for (const Homomorphism& p : phis) all_diag = all_diag && p.is_diagonal();
    TranslationalFamily::Rule rule =
        phis.front().rank() == 1
            ? TranslationalFamily::Rule::NonzeroMultiplier
            : (all_diag ? TranslationalFamily::Rule::NonzeroDiagonal
                        : TranslationalFamily::Rule::NonzeroMatrix);
    return TranslationalFamily(phis, rule);
}

GroupFunction build_group_function(const ExperimentConfig& cfg) {
    const json& f = need(cfg.raw, "function");
    if (!f.is_object()) throw config_error("function must be an object");
    std::string name = str_at(f, "name");
    if (name == "squares-indicator")
        return scalar_fn(1, [](const GroupElement& g) {
            long long v = g.c[0];
            if (v < 1) return Num(0);
            long long r = (long long)std::llround(std::sqrt((double)v));
            while (r * r > v) --r;
            while ((r + 1) * (r + 1) <= v) ++r;
            return Num(r * r == v ? 1 : 0);
        });
    if (name == "alternating")
        return scalar_fn(1, [](const GroupElement& g) {
            long long s = 0;
            for (long long c : g.c) s += c;
            return Num((s % 2 + 2) % 2 == 0 ? 1 : -1);
        });
    if (name == "constant") {
        Rat c = rat_of(need(f, "value"), "function value");
        double bound = std::abs(rat_to_double(c));
        return scalar_fn(bound == 0 ? 1 : bound, [c](const GroupElement&) { return Num(c); });
    }
    if (name == "zero") return scalar_fn(1, [](const GroupElement&) { return Num(0); });
    throw config_error("unknown function name: " + name);
}

std::vector<GroupElement> build_h_list(const ExperimentConfig& cfg, int rank) {
    std::vector<GroupElement> out;
    if (cfg.raw.contains("h_list")) {
        for (const json& e : cfg.raw["h_list"]) {
            GroupElement h = element_of(e, "h_list entry");
            if ((int)h.c.size() != rank) throw config_error("h_list entry has the wrong rank");
            out.push_back(h);
        }
    } else {
        long long reach = rank == 1 ? 10 : 3;
        if (rank == 1)
            for (long long v = -reach; v <= reach; ++v) out.push_back(GroupElement::scalar(v));
        else
            for (long long a = -reach; a <= reach; ++a)
                for (long long b = -reach; b <= reach; ++b) out.push_back(GroupElement({a, b}));
    }
    if (out.empty()) throw config_error("h_list must be nonempty");
    return out;
}

} // namespace ergo
