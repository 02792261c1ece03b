#pragma once

#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "ergokit/group.hpp"
#include "ergokit/num.hpp"

namespace ergo {

class Observable;

// ---- observable payloads ----------------------------------------------------

// Finite linear combination of cylinder indicators over a product (Bernoulli)
// space: each term is coeff * prod_sites 1_{x_site = symbol}. An empty site
// list is the constant function. Terms are kept canonical: sites sorted, terms
// sorted by site pattern, like patterns merged, zero terms dropped.
struct CylTerm {
    Rat coeff;
    std::vector<std::pair<GroupElement, int>> sites;
};
struct CylinderPoly {
    std::vector<CylTerm> terms;
};

// Trigonometric polynomial on the d-torus. A term is
// amp * e^{2 pi i turns} * e^{2 pi i <freq, x>}; amplitudes are complex
// exact-or-float scalars and the phase lives separately in "turns" so that
// Koopman rotation with a rational rotation vector stays exact. Canonical
// form folds turns into [0, 1/4) by moving quarter rotations (powers of i)
// into the amplitude.
struct TrigTerm {
    std::vector<long long> freq;
    CNum amp;
    Num turns;
};
struct TrigPoly {
    int dim = 1;
    std::vector<TrigTerm> terms;
};

// Indicator of a finite union of half-open arcs [a, b) on the 1-torus,
// normalized to sorted disjoint arcs inside [0, 1) (arcs crossing 0 are
// split at the seam).
struct IntervalUnion {
    std::vector<std::pair<Num, Num>> arcs;
};

// Function on a finite probability space, tabulated per point.
struct TableFn {
    std::vector<Num> values;
};

// Sum of elementary tensors f (x) g of factor-system observables.
struct TensorSum {
    std::vector<std::pair<Observable, Observable>> parts;
};

struct ObsData;

class Observable {
public:
    Observable() = default;
    Observable(CylinderPoly p);
    Observable(TrigPoly p);
    Observable(IntervalUnion p);
    Observable(TableFn p);
    Observable(TensorSum p);

    bool valid() const { return d_ != nullptr; }
    const ObsData& data() const;
    template <class T> const T* get() const;

    // canonical textual form: serves as equality key and deterministic map key
    std::string key() const;
    friend bool operator==(const Observable& a, const Observable& b) {
        return a.key() == b.key();
    }
    friend bool operator!=(const Observable& a, const Observable& b) { return !(a == b); }

private:
    std::shared_ptr<const ObsData> d_;
};

struct ObsData {
    std::variant<CylinderPoly, TrigPoly, IntervalUnion, TableFn, TensorSum> v;
};

template <class T> const T* Observable::get() const {
    return d_ ? std::get_if<T>(&d_->v) : nullptr;
}

// ---- observable builders ----------------------------------------------------

Observable cylinder_indicator(std::vector<std::pair<GroupElement, int>> sites);
Observable cylinder_poly(std::vector<CylTerm> terms);
Observable cylinder_constant(const Rat& c);
Observable trig_exponential(int dim, std::vector<long long> freq); // e_k
Observable trig_cosine(int dim, std::vector<long long> freq);      // (e_k + e_{-k})/2
Observable trig_constant(int dim, const Rat& c);
Observable interval_union(std::vector<std::pair<Num, Num>> arcs);
Observable table_fn(std::vector<Num> values);
Observable tensor_sum(std::vector<std::pair<Observable, Observable>> parts);

// same-kind linear algebra (interval unions excluded: indicators are not
// closed under linear combination)
Observable obs_add(const Observable& a, const Observable& b);
Observable obs_scale(const Observable& a, const Num& c);

bool obs_is_real(const Observable& f);
// declared finite sup-norm bound (an upper bound, not necessarily tight)
double obs_sup_bound(const Observable& f);

// ---- measure preserving systems ---------------------------------------------

struct BernoulliSys {
    int alphabet;
    int rank;
    std::vector<Rat> weights; // probability vector over symbols
};

struct RotationSys {
    int dim;
    std::vector<Num> alpha;            // rotation vector; exact entries allowed
    std::vector<long double> alpha_ld; // 80-bit mirrors for the float path
};

struct EndoSys {
    int dim;
    std::vector<long long> mat;     // row-major, |det| = 1
    std::vector<long long> mat_inv; // exact integer inverse
};

struct FiniteSys {
    std::vector<Rat> weights;            // point masses
    std::vector<std::vector<int>> gens;  // commuting permutations, one per axis
};

class MPSystem;
struct ProductSys {
    std::shared_ptr<const MPSystem> left, right;
};

struct SysData;

class MPSystem {
public:
    static MPSystem bernoulli(int alphabet, int rank, std::vector<Rat> weights);
    static MPSystem rotation(std::vector<Num> alpha);
    static MPSystem rotation_float(std::vector<long double> alpha);
    static MPSystem torus_endomorphism(int dim, std::vector<long long> row_major);
    static MPSystem finite(std::vector<Rat> weights, std::vector<std::vector<int>> gens);

    const GroupModel& acting_group() const;
    const SysData& data() const;
    template <class T> const T* get() const;
    std::string describe() const;

private:
    MPSystem(std::shared_ptr<const SysData> d, GroupModel acting);
    std::shared_ptr<const SysData> d_;
    GroupModel acting_;
    friend MPSystem product_system(const MPSystem&, const MPSystem&);
};

struct SysData {
    std::variant<BernoulliSys, RotationSys, EndoSys, FiniteSys, ProductSys> v;
};

template <class T> const T* MPSystem::get() const {
    return std::get_if<T>(&data().v);
}

// ---- operations -------------------------------------------------------------

// f composed with the action of g: returns f o T_g
Observable koopman(const MPSystem& sys, const GroupElement& g, const Observable& f);

CNum expect_c(const MPSystem& sys, const Observable& f);
Num expect(const MPSystem& sys, const Observable& f); // requires (near-)real value

Observable multiply(const MPSystem& sys, const Observable& a, const Observable& b);

// expectation of a product without materializing it when a fast path exists
Num expect_product(const MPSystem& sys, const Observable& a, const Observable& b);

// nu(A0 intersect T_g^{-1} A1) for indicator events
Num set_correlation(const MPSystem& sys, const Observable& a0, const Observable& a1,
                    const GroupElement& g);

MPSystem product_system(const MPSystem& a, const MPSystem& b);

// throws structural_error unless f is an exact indicator in its algebra
void check_event(const MPSystem& sys, const Observable& f);

bool check_measure_preserving(const MPSystem& sys, const Observable& f, const GroupElement& g,
                              double tol = 1e-12);

// sorted union of all cylinder sites referenced by f (Bernoulli observables)
std::vector<GroupElement> cylinder_support(const Observable& f);

} // namespace ergo
