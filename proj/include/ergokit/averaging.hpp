#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ergokit/group.hpp"
#include "ergokit/num.hpp"
#include "ergokit/series.hpp"

namespace ergo {

// Bounded function on the group, valued in a finite-dimensional real
// coordinate space (dim 1 is the scalar case). sup_bound is a declared upper
// bound on the euclidean norm of every value; bulk operations spot-check it.
struct GroupFunction {
    int dim = 1;
    double sup_bound = 0;
    std::function<std::vector<Num>(const GroupElement&)> eval;
};

GroupFunction scalar_fn(double sup_bound, std::function<Num(const GroupElement&)> f);
GroupFunction vector_fn(int dim, double sup_bound,
                        std::function<std::vector<Num>(const GroupElement&)> f);

Num inner(const std::vector<Num>& a, const std::vector<Num>& b);
Num norm_sq(const std::vector<Num>& a);
Num norm_of(const std::vector<Num>& a); // exact only when the norm is 0

// Weighted mean of f over a finite set: exact whenever every value is exact,
// otherwise reduced coordinatewise with the deterministic pairwise tree in
// sorted element order. The per-element weight cancels against the measure.
std::vector<Num> folner_average(const GroupFunction& f, const FiniteSubset& set);

// Per-index averages along the sequence, accumulated incrementally from shell
// increments (each shell is pairwise-reduced, shells are added in order).
Series average_series(const GroupFunction& f, const FolnerSequence& seq, long long n_max);
Series average_norm_series(const GroupFunction& f, const FolnerSequence& seq, long long n_max);

Num density_of(const std::function<bool(const GroupElement&)>& member, const FiniteSubset& set);

// Densities of the deviation sets S_eps = {h : ||f(h) - a|| >= eps} along the
// sequence, one series per epsilon; pass only when every series trends to 0.
struct DensityReport {
    std::vector<Num> epsilons;
    std::vector<Series> series;
    std::vector<bool> trends;
    bool pass = false;
};

DensityReport density_limit_check(const GroupFunction& f, const std::vector<Num>& a,
                                  const FolnerSequence& seq, const std::vector<Num>& epsilons,
                                  long long n_max, const TrendPolicy& policy = {});

// Closure of density limits under sum, scalar multiple, and order, verified
// as literal finite set inclusions on the window Lambda_{n_max}:
//   S_eps(f+g, a+b)    subset of  S_{eps/2}(f, a) union S_{eps/2}(g, b)
//   S_eps(beta f, beta a) empty for beta = 0, else subset of S_{eps/|beta|}(f, a)
// plus the order statement: f <= g pointwise on the window implies a <= b.
struct AlgebraCheckReport {
    bool sum_inclusion = false;
    bool scalar_inclusion = false;
    bool order = false;
    std::string witness; // first element violating an inclusion, if any
    bool pass = false;
};

AlgebraCheckReport density_limit_algebra_check(const GroupFunction& f, const GroupFunction& g,
                                               const std::vector<Num>& a,
                                               const std::vector<Num>& b, const Num& beta,
                                               const FolnerSequence& seq,
                                               const std::vector<Num>& epsilons, long long n_max);

// Equivalence, for nonnegative bounded scalar f, of "density limit 0" and
// "averages tend to 0": computes both sides and reports whether they agree.
struct KvnReport {
    DensityReport density;
    Series averages;
    bool density_pass = false;
    bool average_pass = false;
    bool consistent = false;
};

KvnReport kvn_equivalence(const GroupFunction& f, const FolnerSequence& seq,
                          const std::vector<Num>& epsilons, long long n_max,
                          const TrendPolicy& policy = {});

// Two series expected to trend (or not) together.
struct PairedVerdict {
    Series first, second;
    bool first_trend = false;
    bool second_trend = false;
    bool consistent = false;
};

// avg(f^2) -> 0 iff avg(|f|) -> 0, for real scalar f.
PairedVerdict square_abs_equivalence(const GroupFunction& f, const FolnerSequence& seq,
                                     long long n_max, const TrendPolicy& policy = {});

// Per-index identity avg[(f-beta)^2] = avg[f^2] - 2 beta avg[f] + beta^2,
// plus the implication: avg f -> beta and avg f^2 -> beta^2 force
// avg (f-beta)^2 -> 0. When either hypothesis series fails to trend the
// implication asserts nothing and the verdict is VacuousPass.
struct MeanSquareReport {
    Series avg_f, avg_sq, avg_centered;
    bool identity_ok = false;
    bool hypotheses = false;
    bool conclusion = false;
    Verdict verdict = Verdict::Inconclusive;
};

MeanSquareReport mean_square_identity_check(const GroupFunction& f, const Num& beta,
                                            const FolnerSequence& seq, long long n_max,
                                            const TrendPolicy& policy = {});

std::vector<Num> default_epsilons(); // {1/2, 1/4, ..., 1/64}

} // namespace ergo
