#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ergokit/num.hpp"

namespace ergo {

// A group element is a coordinate vector; its meaning (lattice point, residue,
// scaled lattice point in units of the spacing) comes from the GroupModel that
// operates on it.
struct GroupElement {
    std::vector<long long> c;

    GroupElement() = default;
    explicit GroupElement(std::vector<long long> coords) : c(std::move(coords)) {}
    static GroupElement scalar(long long v) { return GroupElement({v}); }

    friend bool operator==(const GroupElement& a, const GroupElement& b) { return a.c == b.c; }
    friend bool operator!=(const GroupElement& a, const GroupElement& b) { return !(a == b); }
    friend bool operator<(const GroupElement& a, const GroupElement& b) { return a.c < b.c; }

    std::string str() const;
};

// Concrete countable abelian group models: Z^q with counting measure, Z/mZ
// with counting measure, and (delta Z)^q with cell measure delta^q (a discrete
// stand-in whose Haar normalization tracks Lebesgue volume).
class GroupModel {
public:
    enum class Kind { Lattice, Cyclic, Scaled };

    static GroupModel lattice(int rank);
    static GroupModel cyclic(long long modulus);
    static GroupModel scaled(int rank, const Rat& spacing);

    Kind kind() const { return kind_; }
    int rank() const { return rank_; }
    long long modulus() const { return modulus_; }
    const Rat& spacing() const { return spacing_; }
    const Rat& weight() const { return weight_; } // measure of a single element

    bool operator==(const GroupModel& o) const;
    bool operator!=(const GroupModel& o) const { return !(*this == o); }

    GroupElement identity() const;
    GroupElement reduce(GroupElement g) const; // canonical residues for cyclic
    GroupElement compose(const GroupElement& a, const GroupElement& b) const;
    GroupElement inverse(const GroupElement& a) const;
    void check_element(const GroupElement& g) const;

    std::string describe() const;

private:
    GroupModel(Kind k, int rank, long long modulus, Rat spacing, Rat weight)
        : kind_(k), rank_(rank), modulus_(modulus), spacing_(std::move(spacing)),
          weight_(std::move(weight)) {}

    Kind kind_;
    int rank_;
    long long modulus_;
    Rat spacing_;
    Rat weight_;
};

// Finite subset with exact measure, kept sorted and deduplicated. All set
// iteration anywhere in the toolkit follows this lexicographic order.
class FiniteSubset {
public:
    FiniteSubset(GroupModel model, std::vector<GroupElement> elems);

    const GroupModel& model() const { return model_; }
    const std::vector<GroupElement>& elements() const { return elems_; }
    std::size_t size() const { return elems_.size(); }
    bool empty() const { return elems_.empty(); }
    const Rat& measure() const { return measure_; }
    bool contains(const GroupElement& g) const;

    FiniteSubset translated(const GroupElement& g) const; // {x g : x in set}
    Rat symmetric_difference_measure(const GroupElement& g) const; // mu(S delta Sg)
    FiniteSubset quotient() const; // S^{-1} S

    // constructors for the preset shapes
    static FiniteSubset interval(const GroupModel& m, long long lo, long long hi);
    static FiniteSubset box(const GroupModel& m, long long lo, long long hi);
    // lattice points k with ||spacing * k||_2 <= radius
    static FiniteSubset scaled_ball(const GroupModel& m, long long radius);

private:
    GroupModel model_;
    std::vector<GroupElement> elems_;
    Rat measure_;
};

// A (space-filling) sequence of finite subsets indexed by n >= 1. Presets are
// nested and provide O(|shell|) increments; the generic increment falls back
// to a set difference and verifies nesting.
class FolnerSequence {
public:
    using AtFn = std::function<FiniteSubset(long long)>;
    using IncFn = std::function<std::vector<GroupElement>(long long)>;

    FolnerSequence(GroupModel model, std::string name, AtFn at, IncFn inc = {});

    const GroupModel& model() const { return model_; }
    const std::string& name() const { return name_; }
    FiniteSubset at(long long n) const;
    // elements of Lambda_n \ Lambda_{n-1} (all of Lambda_1 for n == 1)
    std::vector<GroupElement> increment(long long n) const;

    static FolnerSequence z_symmetric();              // {-n..n} in Z
    static FolnerSequence z_initial();                // {1..n} in Z
    static FolnerSequence z2_squares();               // [-n,n]^2 in Z^2
    static FolnerSequence scaled_ball(int rank, const Rat& spacing);
    static FolnerSequence quotient_of(const FolnerSequence& seq); // n -> Lambda_n^{-1} Lambda_n

private:
    GroupModel model_;
    std::string name_;
    AtFn at_;
    IncFn inc_;
};

Rat folner_defect(const FolnerSequence& seq, long long n, const GroupElement& g);
Rat uniform_defect(const FolnerSequence& seq, long long n, long long m);

// Group endomorphism given by an integer rank x rank matrix (1 x 1 =
// multiplier); for cyclic models entries act mod m.
class Homomorphism {
public:
    static Homomorphism multiplier(long long k);
    static Homomorphism diagonal(std::vector<long long> d);
    static Homomorphism matrix(int rank, std::vector<long long> row_major);
    static Homomorphism zero(int rank);
    static Homomorphism identity(int rank);

    int rank() const { return rank_; }
    const std::vector<long long>& entries() const { return m_; }
    GroupElement apply(const GroupModel& model, const GroupElement& g) const;
    Homomorphism minus(const Homomorphism& o) const;
    bool is_zero() const;
    bool is_diagonal() const;

    friend bool operator==(const Homomorphism& a, const Homomorphism& b) {
        return a.rank_ == b.rank_ && a.m_ == b.m_;
    }
    friend bool operator<(const Homomorphism& a, const Homomorphism& b) {
        return std::tie(a.rank_, a.m_) < std::tie(b.rank_, b.m_);
    }

    std::string describe() const;

private:
    Homomorphism(int rank, std::vector<long long> m) : rank_(rank), m_(std::move(m)) {}
    int rank_;
    std::vector<long long> m_; // row-major rank x rank
};

struct TranslationalVerdict {
    bool pass;
    std::string witness; // empty when pass
};

// Candidate homomorphism family for the order-k machinery. A finite list may
// be declared as the truncation of an ideal difference-closed family; strict
// verification checks the list as given, rule-based verification checks
// membership in the ideal family.
class TranslationalFamily {
public:
    enum class Rule { ExplicitOnly, NonzeroMultiplier, NonzeroDiagonal, NonzeroMatrix };

    TranslationalFamily(std::vector<Homomorphism> members, Rule rule = Rule::ExplicitOnly);

    const std::vector<Homomorphism>& members() const { return members_; }
    Rule rule() const { return rule_; }

    bool member(const Homomorphism& h) const;
    bool ideal_member(const Homomorphism& h) const;

    TranslationalVerdict verify_strict() const;
    TranslationalVerdict verify_rule() const;
    // the check the order-k pipeline actually needs: the listed homomorphisms
    // are members, pairwise distinct, and their pairwise differences are
    // nonzero members of the (ideal) family
    TranslationalVerdict verify_for(const std::vector<Homomorphism>& used) const;

    std::string rule_name() const;

private:
    std::vector<Homomorphism> members_;
    Rule rule_;
};

// strict enumeration check of the family exactly as listed
TranslationalVerdict verify_translational(const TranslationalFamily& fam);

} // namespace ergo
