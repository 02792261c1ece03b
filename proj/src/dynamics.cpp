#include "ergokit/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "ergokit/errors.hpp"

namespace ergo {

// ---- canonical forms --------------------------------------------------------

static CylinderPoly canon(CylinderPoly p) {
    std::vector<CylTerm> out;
    for (auto& t : p.terms) {
        if (t.coeff.is_zero()) continue;
        std::sort(t.sites.begin(), t.sites.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        bool zero = false;
        std::vector<std::pair<GroupElement, int>> sites;
        for (const auto& s : t.sites) {
            if (!sites.empty() && sites.back().first == s.first) {
                if (sites.back().second != s.second) { zero = true; break; }
            } else {
                sites.push_back(s);
            }
        }
        if (zero) continue;
        out.push_back(CylTerm{t.coeff, std::move(sites)});
    }
    std::sort(out.begin(), out.end(),
              [](const CylTerm& a, const CylTerm& b) { return a.sites < b.sites; });
    std::vector<CylTerm> merged;
    for (auto& t : out) {
        if (!merged.empty() && merged.back().sites == t.sites) merged.back().coeff += t.coeff;
        else merged.push_back(std::move(t));
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const CylTerm& t) { return t.coeff.is_zero(); }),
                 merged.end());
    return CylinderPoly{std::move(merged)};
}

// total order on phase turns: exact before float, each internally ordered
static int turns_cmp(const Num& a, const Num& b) {
    if (a.exact() && b.exact()) return a.rat().compare(b.rat());
    if (a.exact() != b.exact()) return a.exact() ? -1 : 1;
    double x = a.dbl(), y = b.dbl();
    return x < y ? -1 : (x > y ? 1 : 0);
}

static bool turns_eq(const Num& a, const Num& b) {
    if (a.exact() != b.exact()) return false;
    if (a.exact()) return a.rat() == b.rat();
    return a.dbl() == b.dbl();
}

static TrigPoly canon(TrigPoly p) {
    std::vector<TrigTerm> out;
    for (auto& t : p.terms) {
        if (t.amp.is_zero()) continue;
        if ((int)t.freq.size() != p.dim)
            throw structural_error("trig term frequency rank mismatch");
        Num tt = mod1(t.turns);
        CNum amp = t.amp;
        int quarters;
        if (tt.exact()) {
            Rat scaled = tt.rat() * 4;
            quarters = (int)(numerator(scaled) / denominator(scaled)).convert_to<long long>();
            if (quarters > 3) quarters = 3;
            tt = Num(tt.rat() - Rat(quarters, 4));
        } else {
            quarters = (int)std::floor(tt.dbl() * 4.0);
            if (quarters < 0) quarters = 0;
            if (quarters > 3) quarters = 3;
            tt = Num::from_double(tt.dbl() - 0.25 * quarters);
        }
        for (int i = 0; i < quarters; ++i) amp = amp.times_i();
        out.push_back(TrigTerm{std::move(t.freq), amp, tt});
    }
    std::sort(out.begin(), out.end(), [](const TrigTerm& a, const TrigTerm& b) {
        if (a.freq != b.freq) return a.freq < b.freq;
        return turns_cmp(a.turns, b.turns) < 0;
    });
    std::vector<TrigTerm> merged;
    for (auto& t : out) {
        if (!merged.empty() && merged.back().freq == t.freq &&
            turns_eq(merged.back().turns, t.turns))
            merged.back().amp += t.amp;
        else merged.push_back(std::move(t));
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const TrigTerm& t) { return t.amp.is_zero(); }),
                 merged.end());
    return TrigPoly{p.dim, std::move(merged)};
}

static int num_cmp_total(const Num& a, const Num& b) {
    if (a.exact() && b.exact()) return a.rat().compare(b.rat());
    double x = a.dbl(), y = b.dbl();
    if (x < y) return -1;
    if (x > y) return 1;
    if (a.exact() != b.exact()) return a.exact() ? -1 : 1;
    return 0;
}

static IntervalUnion canon(IntervalUnion p) {
    std::vector<std::pair<Num, Num>> pieces;
    for (auto& arc : p.arcs) {
        Num len = arc.second - arc.first;
        if (len.sign() <= 0) continue;
        if (len >= Num(1)) { pieces.emplace_back(Num(0), Num(1)); continue; }
        Num s = mod1(arc.first);
        Num e = s + len;
        if (e <= Num(1)) {
            pieces.emplace_back(s, e);
        } else {
            pieces.emplace_back(s, Num(1));
            pieces.emplace_back(Num(0), e - Num(1));
        }
    }
    std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) {
        int c = num_cmp_total(a.first, b.first);
        if (c != 0) return c < 0;
        return num_cmp_total(a.second, b.second) < 0;
    });
    std::vector<std::pair<Num, Num>> merged;
    for (auto& arc : pieces) {
        if (!merged.empty() && arc.first <= merged.back().second) {
            if (arc.second > merged.back().second) merged.back().second = arc.second;
        } else {
            merged.push_back(std::move(arc));
        }
    }
    return IntervalUnion{std::move(merged)};
}

static TensorSum canon(TensorSum p) {
    std::sort(p.parts.begin(), p.parts.end(), [](const auto& a, const auto& b) {
        std::string ka = a.first.key() + "\x01" + a.second.key();
        std::string kb = b.first.key() + "\x01" + b.second.key();
        return ka < kb;
    });
    return p;
}

Observable::Observable(CylinderPoly p)
    : d_(std::make_shared<const ObsData>(ObsData{canon(std::move(p))})) {}
Observable::Observable(TrigPoly p)
    : d_(std::make_shared<const ObsData>(ObsData{canon(std::move(p))})) {}
Observable::Observable(IntervalUnion p)
    : d_(std::make_shared<const ObsData>(ObsData{canon(std::move(p))})) {}
Observable::Observable(TableFn p)
    : d_(std::make_shared<const ObsData>(ObsData{std::move(p)})) {}
Observable::Observable(TensorSum p)
    : d_(std::make_shared<const ObsData>(ObsData{canon(std::move(p))})) {}

const ObsData& Observable::data() const {
    if (!d_) throw structural_error("empty observable");
    return *d_;
}

std::string Observable::key() const {
    const ObsData& d = data();
    std::string out;
    if (const auto* c = std::get_if<CylinderPoly>(&d.v)) {
        out = "C{";
        for (const auto& t : c->terms) {
            out += rat_to_string(t.coeff) + "@[";
            for (const auto& s : t.sites) out += s.first.str() + ":" + std::to_string(s.second) + " ";
            out += "];";
        }
        out += "}";
    } else if (const auto* t = std::get_if<TrigPoly>(&d.v)) {
        out = "T" + std::to_string(t->dim) + "{";
        for (const auto& term : t->terms) {
            out += "(";
            for (long long f : term.freq) out += std::to_string(f) + ",";
            out += "|" + term.amp.re.str() + "," + term.amp.im.str() + "|" + term.turns.str() + ");";
        }
        out += "}";
    } else if (const auto* iv = std::get_if<IntervalUnion>(&d.v)) {
        out = "I{";
        for (const auto& a : iv->arcs) out += "[" + a.first.str() + "," + a.second.str() + ");";
        out += "}";
    } else if (const auto* tb = std::get_if<TableFn>(&d.v)) {
        out = "F{";
        for (const auto& v : tb->values) out += v.str() + ",";
        out += "}";
    } else if (const auto* ts = std::get_if<TensorSum>(&d.v)) {
        out = "P{";
        for (const auto& p : ts->parts) out += "(" + p.first.key() + "(x)" + p.second.key() + ");";
        out += "}";
    }
    return out;
}

// ---- builders ---------------------------------------------------------------

Observable cylinder_indicator(std::vector<std::pair<GroupElement, int>> sites) {
    return Observable(CylinderPoly{{CylTerm{Rat(1), std::move(sites)}}});
}

Observable cylinder_poly(std::vector<CylTerm> terms) {
    return Observable(CylinderPoly{std::move(terms)});
}

Observable cylinder_constant(const Rat& c) {
    return Observable(CylinderPoly{{CylTerm{c, {}}}});
}

Observable trig_exponential(int dim, std::vector<long long> freq) {
    if ((int)freq.size() != dim) throw structural_error("frequency rank mismatch");
    return Observable(TrigPoly{dim, {TrigTerm{std::move(freq), CNum(Num(1)), Num(0)}}});
}

Observable trig_cosine(int dim, std::vector<long long> freq) {
    if ((int)freq.size() != dim) throw structural_error("frequency rank mismatch");
    std::vector<long long> neg = freq;
    for (auto& v : neg) v = -v;
    return Observable(TrigPoly{dim,
                               {TrigTerm{std::move(freq), CNum(Num(Rat(1, 2))), Num(0)},
                                TrigTerm{std::move(neg), CNum(Num(Rat(1, 2))), Num(0)}}});
}

Observable trig_constant(int dim, const Rat& c) {
    return Observable(TrigPoly{dim, {TrigTerm{std::vector<long long>(dim, 0), CNum(Num(c)), Num(0)}}});
}

Observable interval_union(std::vector<std::pair<Num, Num>> arcs) {
    return Observable(IntervalUnion{std::move(arcs)});
}

Observable table_fn(std::vector<Num> values) { return Observable(TableFn{std::move(values)}); }

Observable tensor_sum(std::vector<std::pair<Observable, Observable>> parts) {
    return Observable(TensorSum{std::move(parts)});
}

Observable obs_add(const Observable& a, const Observable& b) {
    const ObsData& da = a.data();
    const ObsData& db = b.data();
    if (const auto* ca = std::get_if<CylinderPoly>(&da.v)) {
        const auto* cb = std::get_if<CylinderPoly>(&db.v);
        if (!cb) throw structural_error("obs_add: kind mismatch");
        CylinderPoly sum = *ca;
        sum.terms.insert(sum.terms.end(), cb->terms.begin(), cb->terms.end());
        return Observable(std::move(sum));
    }
    if (const auto* ta = std::get_if<TrigPoly>(&da.v)) {
        const auto* tb = std::get_if<TrigPoly>(&db.v);
        if (!tb || tb->dim != ta->dim) throw structural_error("obs_add: kind mismatch");
        TrigPoly sum = *ta;
        sum.terms.insert(sum.terms.end(), tb->terms.begin(), tb->terms.end());
        return Observable(std::move(sum));
    }
    if (const auto* fa = std::get_if<TableFn>(&da.v)) {
        const auto* fb = std::get_if<TableFn>(&db.v);
        if (!fb || fb->values.size() != fa->values.size())
            throw structural_error("obs_add: kind mismatch");
        TableFn sum = *fa;
        for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += fb->values[i];
        return Observable(std::move(sum));
    }
    if (const auto* pa = std::get_if<TensorSum>(&da.v)) {
        const auto* pb = std::get_if<TensorSum>(&db.v);
        if (!pb) throw structural_error("obs_add: kind mismatch");
        TensorSum sum = *pa;
        sum.parts.insert(sum.parts.end(), pb->parts.begin(), pb->parts.end());
        return Observable(std::move(sum));
    }
    throw structural_error("obs_add: interval indicators are not closed under addition");
}

Observable obs_scale(const Observable& a, const Num& c) {
    const ObsData& da = a.data();
    if (const auto* ca = std::get_if<CylinderPoly>(&da.v)) {
        if (!c.exact()) throw structural_error("obs_scale: cylinder coefficients are exact");
        CylinderPoly out = *ca;
        for (auto& t : out.terms) t.coeff *= c.rat();
        return Observable(std::move(out));
    }
    if (const auto* ta = std::get_if<TrigPoly>(&da.v)) {
        TrigPoly out = *ta;
        for (auto& t : out.terms) t.amp *= CNum(c);
        return Observable(std::move(out));
    }
    if (const auto* fa = std::get_if<TableFn>(&da.v)) {
        TableFn out = *fa;
        for (auto& v : out.values) v *= c;
        return Observable(std::move(out));
    }
    if (const auto* pa = std::get_if<TensorSum>(&da.v)) {
        TensorSum out = *pa;
        for (auto& p : out.parts) p.first = obs_scale(p.first, c);
        return Observable(std::move(out));
    }
    throw structural_error("obs_scale: interval indicators cannot be scaled");
}

bool obs_is_real(const Observable& f) {
    const ObsData& d = f.data();
    if (const auto* t = std::get_if<TrigPoly>(&d.v)) {
        // real iff the term list equals its own conjugate list
        TrigPoly conj = *t;
        for (auto& term : conj.terms) {
            for (auto& v : term.freq) v = -v;
            term.amp = term.amp.conj();
            term.turns = -term.turns;
        }
        return Observable(std::move(conj)) == f;
    }
    if (const auto* p = std::get_if<TensorSum>(&d.v)) {
        for (const auto& part : p->parts)
            if (!obs_is_real(part.first) || !obs_is_real(part.second)) return false;
        return true;
    }
    return true; // cylinder, interval, table values are real scalars
}

double obs_sup_bound(const Observable& f) {
    const ObsData& d = f.data();
    if (const auto* c = std::get_if<CylinderPoly>(&d.v)) {
        Rat b(0);
        for (const auto& t : c->terms) b += abs(t.coeff);
        return rat_to_double(b);
    }
    if (const auto* t = std::get_if<TrigPoly>(&d.v)) {
        double b = 0;
        for (const auto& term : t->terms)
            b += std::abs(term.amp.re.dbl()) + std::abs(term.amp.im.dbl());
        return b;
    }
    if (std::get_if<IntervalUnion>(&d.v)) return 1.0;
    if (const auto* tb = std::get_if<TableFn>(&d.v)) {
        double b = 0;
        for (const auto& v : tb->values) b = std::max(b, std::abs(v.dbl()));
        return b;
    }
    if (const auto* p = std::get_if<TensorSum>(&d.v)) {
        double b = 0;
        for (const auto& part : p->parts)
            b += obs_sup_bound(part.first) * obs_sup_bound(part.second);
        return b;
    }
    return 0.0;
}

// ---- systems ----------------------------------------------------------------

MPSystem::MPSystem(std::shared_ptr<const SysData> d, GroupModel acting)
    : d_(std::move(d)), acting_(std::move(acting)) {}

const GroupModel& MPSystem::acting_group() const { return acting_; }

const SysData& MPSystem::data() const { return *d_; }

MPSystem MPSystem::bernoulli(int alphabet, int rank, std::vector<Rat> weights) {
    if (alphabet < 2) throw structural_error("bernoulli alphabet must have >= 2 symbols");
    if (rank < 1) throw structural_error("bernoulli rank must be >= 1");
    if ((int)weights.size() != alphabet)
        throw structural_error("bernoulli weight count must equal alphabet size");
    Rat total(0);
    for (const auto& w : weights) {
        if (w < 0) throw structural_error("bernoulli weights must be nonnegative");
        total += w;
    }
    if (total != 1) throw structural_error("bernoulli weights must sum to 1");
    return MPSystem(
        std::make_shared<const SysData>(SysData{BernoulliSys{alphabet, rank, std::move(weights)}}),
        GroupModel::lattice(rank));
}

MPSystem MPSystem::rotation(std::vector<Num> alpha) {
    if (alpha.empty()) throw structural_error("rotation needs at least one coordinate");
    std::vector<long double> ld;
    for (const auto& a : alpha) ld.push_back((long double)a.dbl());
    int dim = (int)alpha.size();
    return MPSystem(std::make_shared<const SysData>(
                        SysData{RotationSys{dim, std::move(alpha), std::move(ld)}}),
                    GroupModel::lattice(1));
}

MPSystem MPSystem::rotation_float(std::vector<long double> alpha) {
    if (alpha.empty()) throw structural_error("rotation needs at least one coordinate");
    std::vector<Num> a;
    for (long double v : alpha) a.push_back(Num::from_double((double)v));
    int dim = (int)alpha.size();
    return MPSystem(std::make_shared<const SysData>(
                        SysData{RotationSys{dim, std::move(a), std::move(alpha)}}),
                    GroupModel::lattice(1));
}

// integer inverse of an integer matrix with |det| = 1, via rational elimination
static std::vector<long long> unimodular_inverse(int dim, const std::vector<long long>& m) {
    std::vector<std::vector<Rat>> a(dim, std::vector<Rat>(2 * dim, Rat(0)));
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) a[i][j] = Rat(m[i * dim + j]);
        a[i][dim + i] = Rat(1);
    }
    Rat det(1);
    for (int col = 0; col < dim; ++col) {
        int pivot = -1;
        for (int r = col; r < dim; ++r)
            if (!a[r][col].is_zero()) { pivot = r; break; }
        if (pivot < 0) throw structural_error("torus endomorphism matrix is singular");
        if (pivot != col) { std::swap(a[pivot], a[col]); det = -det; }
        det *= a[col][col];
        Rat inv = Rat(1) / a[col][col];
        for (int j = 0; j < 2 * dim; ++j) a[col][j] *= inv;
        for (int r = 0; r < dim; ++r) {
            if (r == col || a[r][col].is_zero()) continue;
            Rat f = a[r][col];
            for (int j = 0; j < 2 * dim; ++j) a[r][j] -= f * a[col][j];
        }
    }
    if (det != 1 && det != -1)
        throw structural_error("torus endomorphism must have determinant +-1 (got " +
                               rat_to_string(det) + ")");
    std::vector<long long> inv(dim * dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            const Rat& v = a[i][dim + j];
            if (denominator(v) != 1)
                throw structural_error("torus endomorphism inverse is not integral");
            inv[i * dim + j] = numerator(v).convert_to<long long>();
        }
    return inv;
}

MPSystem MPSystem::torus_endomorphism(int dim, std::vector<long long> row_major) {
    if (dim < 1 || (int)row_major.size() != dim * dim)
        throw structural_error("torus endomorphism matrix size mismatch");
    std::vector<long long> inv = unimodular_inverse(dim, row_major);
    return MPSystem(std::make_shared<const SysData>(
                        SysData{EndoSys{dim, std::move(row_major), std::move(inv)}}),
                    GroupModel::lattice(1));
}

MPSystem MPSystem::finite(std::vector<Rat> weights, std::vector<std::vector<int>> gens) {
    std::size_t pts = weights.size();
    if (pts == 0) throw structural_error("finite system needs at least one point");
    if (gens.empty()) throw structural_error("finite system needs at least one generator");
    Rat total(0);
    for (const auto& w : weights) {
        if (w < 0) throw structural_error("finite system weights must be nonnegative");
        total += w;
    }
    if (total != 1) throw structural_error("finite system weights must sum to 1");
    for (const auto& g : gens) {
        if (g.size() != pts) throw structural_error("generator size mismatch");
        std::vector<char> seen(pts, 0);
        for (int v : g) {
            if (v < 0 || (std::size_t)v >= pts || seen[v])
                throw structural_error("generator is not a permutation");
            seen[v] = 1;
        }
    }
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i + 1; j < gens.size(); ++j)
            for (std::size_t x = 0; x < pts; ++x)
                if (gens[i][gens[j][x]] != gens[j][gens[i][x]])
                    throw structural_error("finite system generators must commute");
    int rank = (int)gens.size();
    return MPSystem(std::make_shared<const SysData>(
                        SysData{FiniteSys{std::move(weights), std::move(gens)}}),
                    GroupModel::lattice(rank));
}

MPSystem product_system(const MPSystem& a, const MPSystem& b) {
    if (a.acting_group() != b.acting_group())
        throw structural_error("product system factors must share the acting group");
    return MPSystem(std::make_shared<const SysData>(SysData{ProductSys{
                        std::make_shared<const MPSystem>(a), std::make_shared<const MPSystem>(b)}}),
                    a.acting_group());
}

std::string MPSystem::describe() const {
    const SysData& d = data();
    if (const auto* b = std::get_if<BernoulliSys>(&d.v)) {
        std::string s = "bernoulli(" + std::to_string(b->alphabet) + " symbols, ";
        s += acting_.describe() + ", weights ";
        for (std::size_t i = 0; i < b->weights.size(); ++i)
            s += (i ? "," : "") + rat_to_string(b->weights[i]);
        return s + ")";
    }
    if (const auto* r = std::get_if<RotationSys>(&d.v)) {
        std::string s = "rotation(alpha=";
        for (int i = 0; i < r->dim; ++i) s += (i ? "," : "") + r->alpha[i].str();
        bool ex = true;
        for (const auto& a : r->alpha) ex = ex && a.exact();
        return s + (ex ? ", exact)" : ", float80 internal)");
    }
    if (const auto* e = std::get_if<EndoSys>(&d.v)) {
        std::string s = "torus-endomorphism[";
        for (int i = 0; i < e->dim * e->dim; ++i) s += (i ? "," : "") + std::to_string(e->mat[i]);
        return s + "]";
    }
    if (std::get_if<FiniteSys>(&d.v)) return "finite(" + acting_.describe() + ")";
    if (const auto* p = std::get_if<ProductSys>(&d.v))
        return "product(" + p->left->describe() + ", " + p->right->describe() + ")";
    return "?";
}

// ---- koopman ----------------------------------------------------------------

static std::vector<int> perm_pow(const std::vector<int>& p, long long e) {
    std::size_t n = p.size();
    std::vector<int> base = p;
    if (e < 0) {
        std::vector<int> inv(n);
        for (std::size_t i = 0; i < n; ++i) inv[p[i]] = (int)i;
        base = std::move(inv);
        e = -e;
    }
    std::vector<int> acc(n);
    for (std::size_t i = 0; i < n; ++i) acc[i] = (int)i;
    while (e > 0) {
        if (e & 1) {
            std::vector<int> next(n);
            for (std::size_t i = 0; i < n; ++i) next[i] = acc[base[i]];
            acc = std::move(next);
        }
        std::vector<int> sq(n);
        for (std::size_t i = 0; i < n; ++i) sq[i] = base[base[i]];
        base = std::move(sq);
        e >>= 1;
    }
    return acc;
}

static std::vector<int> finite_action(const FiniteSys& sys, const GroupElement& g) {
    std::size_t n = sys.weights.size();
    std::vector<int> acc(n);
    for (std::size_t i = 0; i < n; ++i) acc[i] = (int)i;
    for (std::size_t axis = 0; axis < sys.gens.size(); ++axis) {
        std::vector<int> p = perm_pow(sys.gens[axis], g.c[axis]);
        std::vector<int> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = p[acc[i]];
        acc = std::move(next);
    }
    return acc;
}

// frequency transformed by the transpose of the endomorphism matrix (or its
// inverse, for negative powers)
static std::vector<long long> endo_freq(const EndoSys& e, std::vector<long long> k, long long g) {
    const std::vector<long long>& m = g >= 0 ? e.mat : e.mat_inv;
    long long reps = g >= 0 ? g : -g;
    for (long long r = 0; r < reps; ++r) {
        std::vector<long long> out(e.dim, 0);
        for (int i = 0; i < e.dim; ++i)
            for (int j = 0; j < e.dim; ++j) out[j] += m[i * e.dim + j] * k[i];
        k = std::move(out);
    }
    return k;
}

static Num rotation_phase_delta(const RotationSys& r, const std::vector<long long>& freq,
                                long long g) {
    bool all_exact = true;
    for (const auto& a : r.alpha) all_exact = all_exact && a.exact();
    if (all_exact) {
        Rat acc(0);
        for (int j = 0; j < r.dim; ++j) acc += Rat(freq[j]) * r.alpha[j].rat();
        return Num(acc * Rat(g));
    }
    long double acc = 0.0L;
    for (int j = 0; j < r.dim; ++j) acc += (long double)freq[j] * r.alpha_ld[j];
    acc *= (long double)g;
    long double f = acc - floorl(acc);
    return Num::from_double((double)f);
}

static Num rotation_offset(const RotationSys& r, long long g) {
    if (r.dim != 1)
        throw structural_error("interval events are supported on 1-dimensional rotations only");
    if (r.alpha[0].exact()) return mod1(Num(r.alpha[0].rat() * Rat(g)));
    long double acc = (long double)g * r.alpha_ld[0];
    return Num::from_double((double)(acc - floorl(acc)));
}

static IntervalUnion shift_arcs(const IntervalUnion& u, const Num& t) {
    IntervalUnion out;
    for (const auto& arc : u.arcs) out.arcs.emplace_back(arc.first + t, arc.second + t);
    return out;
}

Observable koopman(const MPSystem& sys, const GroupElement& g, const Observable& f) {
    sys.acting_group().check_element(g);
    // T at the group identity is the identity map; skipping the transport also
    // keeps exact observables exact on float systems
    if (std::all_of(g.c.begin(), g.c.end(), [](long long x) { return x == 0; })) return f;
    const SysData& sd = sys.data();
    const ObsData& od = f.data();
    if (const auto* b = std::get_if<BernoulliSys>(&sd.v)) {
        const auto* c = std::get_if<CylinderPoly>(&od.v);
        if (!c) throw structural_error("bernoulli system takes cylinder observables");
        CylinderPoly out = *c;
        for (auto& t : out.terms)
            for (auto& s : t.sites) {
                if ((int)s.first.c.size() != b->rank)
                    throw structural_error("cylinder site rank mismatch");
                for (int i = 0; i < b->rank; ++i) s.first.c[i] += g.c[i];
            }
        return Observable(std::move(out));
    }
    if (const auto* r = std::get_if<RotationSys>(&sd.v)) {
        if (const auto* t = std::get_if<TrigPoly>(&od.v)) {
            if (t->dim != r->dim) throw structural_error("trig dimension mismatch");
            TrigPoly out = *t;
            for (auto& term : out.terms)
                term.turns += rotation_phase_delta(*r, term.freq, g.c[0]);
            return Observable(std::move(out));
        }
        if (const auto* iv = std::get_if<IntervalUnion>(&od.v)) {
            Num off = rotation_offset(*r, g.c[0]);
            return Observable(shift_arcs(*iv, -off));
        }
        throw structural_error("rotation system takes trig or interval observables");
    }
    if (const auto* e = std::get_if<EndoSys>(&sd.v)) {
        const auto* t = std::get_if<TrigPoly>(&od.v);
        if (!t) throw structural_error("torus endomorphism takes trig observables");
        if (t->dim != e->dim) throw structural_error("trig dimension mismatch");
        TrigPoly out = *t;
        for (auto& term : out.terms) term.freq = endo_freq(*e, term.freq, g.c[0]);
        return Observable(std::move(out));
    }
    if (const auto* fs = std::get_if<FiniteSys>(&sd.v)) {
        const auto* tb = std::get_if<TableFn>(&od.v);
        if (!tb) throw structural_error("finite system takes table observables");
        if (tb->values.size() != fs->weights.size())
            throw structural_error("table size mismatch");
        std::vector<int> act = finite_action(*fs, g);
        TableFn out;
        out.values.resize(tb->values.size());
        for (std::size_t x = 0; x < out.values.size(); ++x) out.values[x] = tb->values[act[x]];
        return Observable(std::move(out));
    }
    if (const auto* p = std::get_if<ProductSys>(&sd.v)) {
        const auto* ts = std::get_if<TensorSum>(&od.v);
        if (!ts) throw structural_error("product system takes tensor observables");
        TensorSum out;
        for (const auto& part : ts->parts)
            out.parts.emplace_back(koopman(*p->left, g, part.first),
                                   koopman(*p->right, g, part.second));
        return Observable(std::move(out));
    }
    throw structural_error("unsupported system");
}

// ---- expectation ------------------------------------------------------------

CNum expect_c(const MPSystem& sys, const Observable& f) {
    const SysData& sd = sys.data();
    const ObsData& od = f.data();
    if (const auto* b = std::get_if<BernoulliSys>(&sd.v)) {
        const auto* c = std::get_if<CylinderPoly>(&od.v);
        if (!c) throw structural_error("bernoulli system takes cylinder observables");
        Rat acc(0);
        for (const auto& t : c->terms) {
            Rat w = t.coeff;
            for (const auto& s : t.sites) {
                if (s.second < 0 || s.second >= b->alphabet)
                    throw structural_error("cylinder symbol out of range");
                w *= b->weights[s.second];
            }
            acc += w;
        }
        return CNum(Num(std::move(acc)));
    }
    if (const auto* t = std::get_if<TrigPoly>(&od.v)) {
        if (!std::get_if<RotationSys>(&sd.v) && !std::get_if<EndoSys>(&sd.v))
            throw structural_error("trig observable on non-torus system");
        CNum acc;
        for (const auto& term : t->terms) {
            bool zero_freq = true;
            for (long long v : term.freq) zero_freq = zero_freq && v == 0;
            if (zero_freq) acc += term.amp * unit_phase(term.turns);
        }
        return acc;
    }
    if (const auto* iv = std::get_if<IntervalUnion>(&od.v)) {
        if (!std::get_if<RotationSys>(&sd.v))
            throw structural_error("interval observable on non-rotation system");
        std::vector<Num> lens;
        for (const auto& a : iv->arcs) lens.push_back(a.second - a.first);
        return CNum(sum(lens));
    }
    if (const auto* fs = std::get_if<FiniteSys>(&sd.v)) {
        const auto* tb = std::get_if<TableFn>(&od.v);
        if (!tb) throw structural_error("finite system takes table observables");
        if (tb->values.size() != fs->weights.size())
            throw structural_error("table size mismatch");
        std::vector<Num> parts;
        for (std::size_t x = 0; x < tb->values.size(); ++x)
            parts.push_back(Num(fs->weights[x]) * tb->values[x]);
        return CNum(sum(parts));
    }
    if (const auto* p = std::get_if<ProductSys>(&sd.v)) {
        const auto* ts = std::get_if<TensorSum>(&od.v);
        if (!ts) throw structural_error("product system takes tensor observables");
        CNum acc;
        for (const auto& part : ts->parts)
            acc += expect_c(*p->left, part.first) * expect_c(*p->right, part.second);
        return acc;
    }
    throw structural_error("unsupported observable/system pair");
}

Num expect(const MPSystem& sys, const Observable& f) {
    CNum c = expect_c(sys, f);
    if (c.im.is_zero()) return c.re;
    if (!c.im.exact() &&
        std::abs(c.im.dbl()) <= 1e-9 * (1.0 + std::abs(c.re.dbl())))
        return c.re;
    throw structural_error("expectation of a non-real observable (imag = " + c.im.str() + ")");
}

// ---- multiplication ---------------------------------------------------------

static bool merge_sites(const std::vector<std::pair<GroupElement, int>>& a,
                        const std::vector<std::pair<GroupElement, int>>& b,
                        std::vector<std::pair<GroupElement, int>>& out) {
    out.clear();
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) out.push_back(a[i++]);
        else if (b[j].first < a[i].first) out.push_back(b[j++]);
        else {
            if (a[i].second != b[j].second) return false; // contradictory symbols
            out.push_back(a[i]);
            ++i;
            ++j;
        }
    }
    while (i < a.size()) out.push_back(a[i++]);
    while (j < b.size()) out.push_back(b[j++]);
    return true;
}

Observable multiply(const MPSystem& sys, const Observable& a, const Observable& b) {
    const SysData& sd = sys.data();
    const ObsData& da = a.data();
    const ObsData& db = b.data();
    if (const auto* ca = std::get_if<CylinderPoly>(&da.v)) {
        const auto* cb = std::get_if<CylinderPoly>(&db.v);
        if (!cb) throw structural_error("multiply: kind mismatch");
        CylinderPoly out;
        std::vector<std::pair<GroupElement, int>> merged;
        for (const auto& t : ca->terms)
            for (const auto& u : cb->terms) {
                if (!merge_sites(t.sites, u.sites, merged)) continue;
                out.terms.push_back(CylTerm{t.coeff * u.coeff, merged});
            }
        return Observable(std::move(out));
    }
    if (const auto* ta = std::get_if<TrigPoly>(&da.v)) {
        const auto* tb = std::get_if<TrigPoly>(&db.v);
        if (!tb || tb->dim != ta->dim) throw structural_error("multiply: kind mismatch");
        TrigPoly out;
        out.dim = ta->dim;
        for (const auto& t : ta->terms)
            for (const auto& u : tb->terms) {
                std::vector<long long> freq(t.freq);
                for (int i = 0; i < out.dim; ++i) freq[i] += u.freq[i];
                out.terms.push_back(TrigTerm{std::move(freq), t.amp * u.amp, t.turns + u.turns});
            }
        return Observable(std::move(out));
    }
    if (const auto* ia = std::get_if<IntervalUnion>(&da.v)) {
        const auto* ib = std::get_if<IntervalUnion>(&db.v);
        if (!ib) throw structural_error("multiply: kind mismatch");
        IntervalUnion out;
        std::size_t i = 0, j = 0;
        while (i < ia->arcs.size() && j < ib->arcs.size()) {
            Num lo = num_max(ia->arcs[i].first, ib->arcs[j].first);
            Num hi = num_min(ia->arcs[i].second, ib->arcs[j].second);
            if (lo < hi) out.arcs.emplace_back(lo, hi);
            if (ia->arcs[i].second <= ib->arcs[j].second) ++i;
            else ++j;
        }
        return Observable(std::move(out));
    }
    if (const auto* fa = std::get_if<TableFn>(&da.v)) {
        const auto* fb = std::get_if<TableFn>(&db.v);
        if (!fb || fb->values.size() != fa->values.size())
            throw structural_error("multiply: kind mismatch");
        TableFn out;
        out.values.resize(fa->values.size());
        for (std::size_t x = 0; x < out.values.size(); ++x)
            out.values[x] = fa->values[x] * fb->values[x];
        return Observable(std::move(out));
    }
    if (const auto* pa = std::get_if<TensorSum>(&da.v)) {
        const auto* pb = std::get_if<TensorSum>(&db.v);
        if (!pb) throw structural_error("multiply: kind mismatch");
        const auto* ps = std::get_if<ProductSys>(&sd.v);
        if (!ps) throw structural_error("tensor observable on non-product system");
        TensorSum out;
        for (const auto& x : pa->parts)
            for (const auto& y : pb->parts)
                out.parts.emplace_back(multiply(*ps->left, x.first, y.first),
                                       multiply(*ps->right, x.second, y.second));
        return Observable(std::move(out));
    }
    throw structural_error("multiply: unsupported kinds");
}

Num expect_product(const MPSystem& sys, const Observable& a, const Observable& b) {
    const SysData& sd = sys.data();
    const ObsData& da = a.data();
    const ObsData& db = b.data();
    if (const auto* bs = std::get_if<BernoulliSys>(&sd.v)) {
        const auto* ca = std::get_if<CylinderPoly>(&da.v);
        const auto* cb = std::get_if<CylinderPoly>(&db.v);
        if (ca && cb) {
            for (const auto* poly : {ca, cb})
                for (const auto& t : poly->terms)
                    for (const auto& s : t.sites)
                        if (s.second < 0 || s.second >= bs->alphabet)
                            throw structural_error("cylinder symbol out of range");
            Rat acc(0);
            for (const auto& t : ca->terms)
                for (const auto& u : cb->terms) {
                    // walk both sorted site lists, multiplying weights over the
                    // union; a shared site with conflicting symbols kills the term
                    Rat w = t.coeff * u.coeff;
                    std::size_t i = 0, j = 0;
                    bool dead = false;
                    while (i < t.sites.size() && j < u.sites.size()) {
                        if (t.sites[i].first < u.sites[j].first)
                            w *= bs->weights[t.sites[i++].second];
                        else if (u.sites[j].first < t.sites[i].first)
                            w *= bs->weights[u.sites[j++].second];
                        else {
                            if (t.sites[i].second != u.sites[j].second) { dead = true; break; }
                            w *= bs->weights[t.sites[i].second];
                            ++i;
                            ++j;
                        }
                    }
                    if (dead) continue;
                    while (i < t.sites.size()) w *= bs->weights[t.sites[i++].second];
                    while (j < u.sites.size()) w *= bs->weights[u.sites[j++].second];
                    acc += w;
                }
            return Num(std::move(acc));
        }
    }
    if (std::get_if<RotationSys>(&sd.v)) {
        const auto* ia = std::get_if<IntervalUnion>(&da.v);
        const auto* ib = std::get_if<IntervalUnion>(&db.v);
        if (ia && ib) return expect(sys, multiply(sys, a, b));
    }
    return expect(sys, multiply(sys, a, b));
}

Num set_correlation(const MPSystem& sys, const Observable& a0, const Observable& a1,
                    const GroupElement& g) {
    const SysData& sd = sys.data();
    if (const auto* r = std::get_if<RotationSys>(&sd.v)) {
        const auto* i0 = a0.get<IntervalUnion>();
        const auto* i1 = a1.get<IntervalUnion>();
        if (i0 && i1 && !r->alpha[0].exact()) {
            // float rotation: full 80-bit path for the arc overlap
            long double off = (long double)g.c[0] * r->alpha_ld[0];
            off -= floorl(off);
            long double total = 0.0L;
            for (const auto& arcB : i1->arcs) {
                // shifted arc [a-off, b-off) may wrap; split at the seam
                long double lo = (long double)arcB.first.dbl() - off;
                long double hi = (long double)arcB.second.dbl() - off;
                for (int piece = 0; piece < 2; ++piece) {
                    long double plo = piece == 0 ? lo : lo + 1.0L;
                    long double phi = piece == 0 ? hi : hi + 1.0L;
                    if (plo < 0.0L) plo = 0.0L;
                    if (phi > 1.0L) phi = 1.0L;
                    if (plo >= phi) continue;
                    for (const auto& arcA : i0->arcs) {
                        long double alo = (long double)arcA.first.dbl();
                        long double ahi = (long double)arcA.second.dbl();
                        long double l = plo > alo ? plo : alo;
                        long double h = phi < ahi ? phi : ahi;
                        if (l < h) total += h - l;
                    }
                }
            }
            return Num::from_double((double)total);
        }
    }
    return expect_product(sys, a0, koopman(sys, g, a1));
}

void check_event(const MPSystem& sys, const Observable& f) {
    if (!obs_is_real(f)) throw structural_error("event indicator must be real-valued");
    Observable sq = multiply(sys, f, f);
    if (!(sq == f))
        throw structural_error("observable is not an indicator (f*f != f)");
}

bool check_measure_preserving(const MPSystem& sys, const Observable& f, const GroupElement& g,
                              double tol) {
    CNum before = expect_c(sys, f);
    CNum after = expect_c(sys, koopman(sys, g, f));
    Num dr = before.re - after.re;
    Num di = before.im - after.im;
    if (dr.exact() && di.exact()) return dr.is_zero() && di.is_zero();
    double scale = 1.0 + std::abs(before.re.dbl()) + std::abs(before.im.dbl());
    return std::abs(dr.dbl()) <= tol * scale && std::abs(di.dbl()) <= tol * scale;
}

std::vector<GroupElement> cylinder_support(const Observable& f) {
    const auto* c = f.get<CylinderPoly>();
    if (!c) throw structural_error("cylinder_support needs a cylinder observable");
    std::vector<GroupElement> out;
    for (const auto& t : c->terms)
        for (const auto& s : t.sites) out.push_back(s.first);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace ergo
