#include "ergokit/group.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "ergokit/errors.hpp"

namespace ergo {

std::string GroupElement::str() const {
    if (c.size() == 1) return std::to_string(c[0]);
    std::string s = "(";
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(c[i]);
    }
    return s + ")";
}

GroupModel GroupModel::lattice(int rank) {
    if (rank < 1) throw structural_error("lattice rank must be >= 1");
    return GroupModel(Kind::Lattice, rank, 0, Rat(1), Rat(1));
}

GroupModel GroupModel::cyclic(long long modulus) {
    if (modulus < 2) throw structural_error("cyclic modulus must be >= 2");
    return GroupModel(Kind::Cyclic, 1, modulus, Rat(1), Rat(1));
}

GroupModel GroupModel::scaled(int rank, const Rat& spacing) {
    if (rank < 1) throw structural_error("scaled lattice rank must be >= 1");
    if (spacing <= 0) throw structural_error("scaled lattice spacing must be positive");
    return GroupModel(Kind::Scaled, rank, 0, spacing, rat_pow(spacing, rank));
}

bool GroupModel::operator==(const GroupModel& o) const {
    return kind_ == o.kind_ && rank_ == o.rank_ && modulus_ == o.modulus_ &&
           spacing_ == o.spacing_;
}

GroupElement GroupModel::identity() const {
    return GroupElement(std::vector<long long>(rank_, 0));
}

GroupElement GroupModel::reduce(GroupElement g) const {
    check_element(g);
    if (kind_ == Kind::Cyclic) {
        long long m = modulus_;
        long long v = g.c[0] % m;
        if (v < 0) v += m;
        g.c[0] = v;
    }
    return g;
}

GroupElement GroupModel::compose(const GroupElement& a, const GroupElement& b) const {
    check_element(a);
    check_element(b);
    GroupElement r = a;
    for (int i = 0; i < rank_; ++i) r.c[i] += b.c[i];
    return reduce(std::move(r));
}

GroupElement GroupModel::inverse(const GroupElement& a) const {
    check_element(a);
    GroupElement r = a;
    for (auto& v : r.c) v = -v;
    return reduce(std::move(r));
}

void GroupModel::check_element(const GroupElement& g) const {
    if ((int)g.c.size() != rank_)
        throw structural_error("element rank " + std::to_string(g.c.size()) +
                               " does not match group " + describe());
}

std::string GroupModel::describe() const {
    switch (kind_) {
        case Kind::Lattice:
            return rank_ == 1 ? "Z" : "Z^" + std::to_string(rank_);
        case Kind::Cyclic:
            return "Z/" + std::to_string(modulus_);
        case Kind::Scaled:
            return "(" + rat_to_string(spacing_) + "Z)^" + std::to_string(rank_);
    }
    return "?";
}

FiniteSubset::FiniteSubset(GroupModel model, std::vector<GroupElement> elems)
    : model_(std::move(model)), elems_(std::move(elems)) {
    for (auto& e : elems_) e = model_.reduce(std::move(e));
    std::sort(elems_.begin(), elems_.end());
    elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
    measure_ = Rat((long long)elems_.size()) * model_.weight();
}

bool FiniteSubset::contains(const GroupElement& g) const {
    return std::binary_search(elems_.begin(), elems_.end(), g);
}

FiniteSubset FiniteSubset::translated(const GroupElement& g) const {
    std::vector<GroupElement> out;
    out.reserve(elems_.size());
    for (const auto& e : elems_) out.push_back(model_.compose(e, g));
    return FiniteSubset(model_, std::move(out));
}

Rat FiniteSubset::symmetric_difference_measure(const GroupElement& g) const {
    FiniteSubset shifted = translated(g);
    // both sides are sorted; count elements present in exactly one
    std::size_t i = 0, j = 0, diff = 0;
    const auto& a = elems_;
    const auto& b = shifted.elems_;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) { ++diff; ++i; }
        else if (b[j] < a[i]) { ++diff; ++j; }
        else { ++i; ++j; }
    }
    diff += (a.size() - i) + (b.size() - j);
    return Rat((long long)diff) * model_.weight();
}

FiniteSubset FiniteSubset::quotient() const {
    if (empty()) return *this;
    if (model_.kind() == GroupModel::Kind::Cyclic) {
        std::vector<char> seen(model_.modulus(), 0);
        for (const auto& a : elems_)
            for (const auto& b : elems_) {
                long long d = (b.c[0] - a.c[0]) % model_.modulus();
                if (d < 0) d += model_.modulus();
                seen[d] = 1;
            }
        std::vector<GroupElement> out;
        for (long long v = 0; v < model_.modulus(); ++v)
            if (seen[v]) out.push_back(GroupElement::scalar(v));
        return FiniteSubset(model_, std::move(out));
    }
    // bounding box of pairwise differences; dense bitmap when affordable
    int q = model_.rank();
    std::vector<long long> lo(q), hi(q);
    for (int d = 0; d < q; ++d) {
        long long mn = elems_[0].c[d], mx = elems_[0].c[d];
        for (const auto& e : elems_) {
            mn = std::min(mn, e.c[d]);
            mx = std::max(mx, e.c[d]);
        }
        lo[d] = mn - mx;
        hi[d] = mx - mn;
    }
    unsigned long long cells = 1;
    bool dense = true;
    for (int d = 0; d < q; ++d) {
        unsigned long long w = (unsigned long long)(hi[d] - lo[d] + 1);
        if (cells > (1ULL << 27) / w) { dense = false; break; }
        cells *= w;
    }
    std::vector<GroupElement> out;
    if (dense) {
        std::vector<char> seen(cells, 0);
        std::vector<long long> width(q);
        for (int d = 0; d < q; ++d) width[d] = hi[d] - lo[d] + 1;
        for (const auto& a : elems_)
            for (const auto& b : elems_) {
                unsigned long long idx = 0;
                for (int d = 0; d < q; ++d)
                    idx = idx * (unsigned long long)width[d] +
                          (unsigned long long)(b.c[d] - a.c[d] - lo[d]);
                seen[idx] = 1;
            }
        std::vector<long long> coords(q);
        for (unsigned long long idx = 0; idx < cells; ++idx) {
            if (!seen[idx]) continue;
            unsigned long long rest = idx;
            for (int d = q - 1; d >= 0; --d) {
                coords[d] = lo[d] + (long long)(rest % (unsigned long long)width[d]);
                rest /= (unsigned long long)width[d];
            }
            out.push_back(GroupElement(coords));
        }
    } else {
        std::set<GroupElement> seen;
        for (const auto& a : elems_)
            for (const auto& b : elems_) {
                GroupElement d = b;
                for (int i = 0; i < q; ++i) d.c[i] -= a.c[i];
                seen.insert(std::move(d));
            }
        out.assign(seen.begin(), seen.end());
    }
    return FiniteSubset(model_, std::move(out));
}

FiniteSubset FiniteSubset::interval(const GroupModel& m, long long lo, long long hi) {
    if (m.rank() != 1) throw structural_error("interval subset needs a rank-1 model");
    std::vector<GroupElement> out;
    out.reserve((std::size_t)std::max(0LL, hi - lo + 1));
    for (long long v = lo; v <= hi; ++v) out.push_back(GroupElement::scalar(v));
    return FiniteSubset(m, std::move(out));
}

FiniteSubset FiniteSubset::box(const GroupModel& m, long long lo, long long hi) {
    std::vector<GroupElement> out;
    std::vector<long long> coords(m.rank(), lo);
    while (true) {
        out.push_back(GroupElement(coords));
        int d = m.rank() - 1;
        while (d >= 0 && coords[d] == hi) coords[d--] = lo;
        if (d < 0) break;
        ++coords[d];
    }
    return FiniteSubset(m, std::move(out));
}

FiniteSubset FiniteSubset::scaled_ball(const GroupModel& m, long long radius) {
    if (m.kind() != GroupModel::Kind::Scaled)
        throw structural_error("scaled_ball needs a scaled lattice model");
    // ||spacing * k|| <= radius  <=>  sum k_i^2 <= (radius / spacing)^2
    Rat bound = Rat(radius) / m.spacing();
    Rat bound2 = bound * bound;
    long long reach = (long long)std::floor(rat_to_double(bound)) + 1;
    std::vector<GroupElement> out;
    std::vector<long long> coords(m.rank(), -reach);
    while (true) {
        Rat s2(0);
        for (long long v : coords) s2 += Rat(v) * Rat(v);
        if (s2 <= bound2) out.push_back(GroupElement(coords));
        int d = m.rank() - 1;
        while (d >= 0 && coords[d] == reach) coords[d--] = -reach;
        if (d < 0) break;
        ++coords[d];
    }
    return FiniteSubset(m, std::move(out));
}

FolnerSequence::FolnerSequence(GroupModel model, std::string name, AtFn at, IncFn inc)
    : model_(std::move(model)), name_(std::move(name)), at_(std::move(at)), inc_(std::move(inc)) {}

FiniteSubset FolnerSequence::at(long long n) const {
    if (n < 1) throw structural_error("sequence index must be >= 1");
    FiniteSubset s = at_(n);
    if (s.empty()) throw structural_error("sequence '" + name_ + "' produced an empty set");
    return s;
}

std::vector<GroupElement> FolnerSequence::increment(long long n) const {
    if (n < 1) throw structural_error("sequence index must be >= 1");
    if (n == 1) return at(1).elements();
    if (inc_) return inc_(n);
    FiniteSubset prev = at(n - 1), cur = at(n);
    std::vector<GroupElement> out;
    std::size_t i = 0, j = 0;
    const auto& a = prev.elements();
    const auto& b = cur.elements();
    while (j < b.size()) {
        if (i < a.size() && a[i] == b[j]) { ++i; ++j; }
        else if (i < a.size() && a[i] < b[j]) {
            throw structural_error("sequence '" + name_ + "' is not nested at n=" +
                                   std::to_string(n));
        } else {
            out.push_back(b[j]);
            ++j;
        }
    }
    if (i != a.size())
        throw structural_error("sequence '" + name_ + "' is not nested at n=" + std::to_string(n));
    return out;
}

FolnerSequence FolnerSequence::z_symmetric() {
    GroupModel m = GroupModel::lattice(1);
    return FolnerSequence(
        m, "z-symmetric",
        [m](long long n) { return FiniteSubset::interval(m, -n, n); },
        [](long long n) {
            return std::vector<GroupElement>{GroupElement::scalar(-n), GroupElement::scalar(n)};
        });
}

FolnerSequence FolnerSequence::z_initial() {
    GroupModel m = GroupModel::lattice(1);
    return FolnerSequence(
        m, "z-initial",
        [m](long long n) { return FiniteSubset::interval(m, 1, n); },
        [](long long n) { return std::vector<GroupElement>{GroupElement::scalar(n)}; });
}

FolnerSequence FolnerSequence::z2_squares() {
    GroupModel m = GroupModel::lattice(2);
    return FolnerSequence(
        m, "z2-squares",
        [m](long long n) { return FiniteSubset::box(m, -n, n); },
        [](long long n) {
            std::vector<GroupElement> shell;
            for (long long x = -n; x <= n; ++x)
                for (long long y = -n; y <= n; ++y)
                    if (std::max(std::llabs(x), std::llabs(y)) == n)
                        shell.push_back(GroupElement({x, y}));
            std::sort(shell.begin(), shell.end());
            return shell;
        });
}

FolnerSequence FolnerSequence::scaled_ball(int rank, const Rat& spacing) {
    GroupModel m = GroupModel::scaled(rank, spacing);
    return FolnerSequence(
        m, "scaled-ball",
        [m](long long n) { return FiniteSubset::scaled_ball(m, n); });
}

FolnerSequence FolnerSequence::quotient_of(const FolnerSequence& seq) {
    return FolnerSequence(
        seq.model(), seq.name() + "-quotient",
        [seq](long long n) { return seq.at(n).quotient(); });
}

Rat folner_defect(const FolnerSequence& seq, long long n, const GroupElement& g) {
    FiniteSubset s = seq.at(n);
    return s.symmetric_difference_measure(g) / s.measure();
}

Rat uniform_defect(const FolnerSequence& seq, long long n, long long m) {
    FiniteSubset outer = seq.at(m);
    FiniteSubset s = seq.at(n);
    Rat worst(0);
    for (const auto& g : outer.elements()) {
        Rat d = s.symmetric_difference_measure(g) / s.measure();
        if (d > worst) worst = d;
    }
    return worst;
}

Homomorphism Homomorphism::multiplier(long long k) { return Homomorphism(1, {k}); }

Homomorphism Homomorphism::diagonal(std::vector<long long> d) {
    int q = (int)d.size();
    std::vector<long long> m(q * q, 0);
    for (int i = 0; i < q; ++i) m[i * q + i] = d[i];
    return Homomorphism(q, std::move(m));
}

Homomorphism Homomorphism::matrix(int rank, std::vector<long long> row_major) {
    if ((int)row_major.size() != rank * rank)
        throw structural_error("homomorphism matrix size mismatch");
    return Homomorphism(rank, std::move(row_major));
}

Homomorphism Homomorphism::zero(int rank) {
    return Homomorphism(rank, std::vector<long long>(rank * rank, 0));
}

Homomorphism Homomorphism::identity(int rank) {
    std::vector<long long> m(rank * rank, 0);
    for (int i = 0; i < rank; ++i) m[i * rank + i] = 1;
    return Homomorphism(rank, std::move(m));
}

GroupElement Homomorphism::apply(const GroupModel& model, const GroupElement& g) const {
    model.check_element(g);
    if (model.rank() != rank_)
        throw structural_error("homomorphism rank " + std::to_string(rank_) +
                               " does not match group " + model.describe());
    std::vector<long long> out(rank_, 0);
    for (int i = 0; i < rank_; ++i)
        for (int j = 0; j < rank_; ++j) out[i] += m_[i * rank_ + j] * g.c[j];
    return model.reduce(GroupElement(std::move(out)));
}

Homomorphism Homomorphism::minus(const Homomorphism& o) const {
    if (rank_ != o.rank_) throw structural_error("homomorphism rank mismatch");
    std::vector<long long> m = m_;
    for (std::size_t i = 0; i < m.size(); ++i) m[i] -= o.m_[i];
    return Homomorphism(rank_, std::move(m));
}

bool Homomorphism::is_zero() const {
    for (long long v : m_)
        if (v != 0) return false;
    return true;
}

bool Homomorphism::is_diagonal() const {
    for (int i = 0; i < rank_; ++i)
        for (int j = 0; j < rank_; ++j)
            if (i != j && m_[i * rank_ + j] != 0) return false;
    return true;
}

std::string Homomorphism::describe() const {
    if (rank_ == 1) return std::to_string(m_[0]) + "*";
    if (is_diagonal()) {
        std::string s = "diag(";
        for (int i = 0; i < rank_; ++i) {
            if (i) s += ",";
            s += std::to_string(m_[i * rank_ + i]);
        }
        return s + ")";
    }
    std::string s = "[";
    for (int i = 0; i < rank_; ++i) {
        if (i) s += ";";
        for (int j = 0; j < rank_; ++j) {
            if (j) s += ",";
            s += std::to_string(m_[i * rank_ + j]);
        }
    }
    return s + "]";
}

TranslationalFamily::TranslationalFamily(std::vector<Homomorphism> members, Rule rule)
    : members_(std::move(members)), rule_(rule) {
    if (members_.empty()) throw structural_error("translational family must be nonempty");
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    for (const auto& h : members_)
        if (h.rank() != members_[0].rank())
            throw structural_error("translational family mixes ranks");
}

bool TranslationalFamily::member(const Homomorphism& h) const {
    return std::binary_search(members_.begin(), members_.end(), h);
}

bool TranslationalFamily::ideal_member(const Homomorphism& h) const {
    switch (rule_) {
        case Rule::ExplicitOnly: return member(h);
        case Rule::NonzeroMultiplier: return h.rank() == 1 && !h.is_zero();
        case Rule::NonzeroDiagonal: return h.is_diagonal() && !h.is_zero();
        case Rule::NonzeroMatrix: return !h.is_zero();
    }
    return false;
}

static TranslationalVerdict check_pairs(
    const std::vector<Homomorphism>& members,
    const std::function<bool(const Homomorphism&)>& accepts) {
    for (const auto& a : members)
        for (const auto& b : members) {
            if (a == b) continue;
            Homomorphism d = b.minus(a);
            if (d.is_zero())
                return {false, "difference of distinct members " + b.describe() + " - " +
                                   a.describe() + " is zero"};
            if (!accepts(d))
                return {false, "difference " + d.describe() + " of members " + b.describe() +
                                   " and " + a.describe() + " is outside the family"};
        }
    return {true, ""};
}

TranslationalVerdict TranslationalFamily::verify_strict() const {
    return check_pairs(members_, [this](const Homomorphism& h) { return member(h); });
}

TranslationalVerdict TranslationalFamily::verify_rule() const {
    return check_pairs(members_, [this](const Homomorphism& h) { return ideal_member(h); });
}

TranslationalVerdict TranslationalFamily::verify_for(const std::vector<Homomorphism>& used) const {
    for (std::size_t i = 0; i < used.size(); ++i) {
        if (!member(used[i]) && !ideal_member(used[i]))
            return {false, "homomorphism " + used[i].describe() + " is not in the family"};
        for (std::size_t j = i + 1; j < used.size(); ++j)
            if (used[i] == used[j])
                return {false, "homomorphisms are not pairwise distinct: " + used[i].describe()};
    }
    return check_pairs(used, [this](const Homomorphism& h) { return ideal_member(h); });
}

std::string TranslationalFamily::rule_name() const {
    switch (rule_) {
        case Rule::ExplicitOnly: return "explicit-list";
        case Rule::NonzeroMultiplier: return "nonzero-multiplier";
        case Rule::NonzeroDiagonal: return "nonzero-diagonal";
        case Rule::NonzeroMatrix: return "nonzero-matrix";
    }
    return "?";
}

TranslationalVerdict verify_translational(const TranslationalFamily& fam) {
    return fam.verify_strict();
}

} // namespace ergo
