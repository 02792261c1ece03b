#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "ergokit/errors.hpp"

namespace ergo {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

double rat_to_double(const Rat& r);
Rat rat_pow(const Rat& base, int exp);
std::string rat_to_string(const Rat& r); // "p/q", or "p" when q == 1
Rat rat_from_string(const std::string& s);

// Scalar that stays an exact rational as long as every input was one, and
// degrades to float64 the moment an inexact quantity enters. Exactness is
// propagated through arithmetic and respected by comparisons and printing.
class Num {
public:
    Num() : exact_(true), r_(0), d_(0) {}
    Num(int v) : exact_(true), r_(v), d_(0) {}
    Num(long long v) : exact_(true), r_(v), d_(0) {}
    Num(const Rat& r) : exact_(true), r_(r), d_(0) {}
    Num(Rat&& r) : exact_(true), r_(std::move(r)), d_(0) {}

    static Num from_double(double d) {
        Num n;
        n.exact_ = false;
        n.d_ = d;
        return n;
    }

    bool exact() const { return exact_; }

    const Rat& rat() const {
        if (!exact_) throw structural_error("Num: exact value requested from float");
        return r_;
    }

    double dbl() const { return exact_ ? rat_to_double(r_) : d_; }

    bool is_zero() const { return exact_ ? r_.is_zero() : d_ == 0.0; }
    int sign() const;

    Num operator-() const;
    Num& operator+=(const Num& o);
    Num& operator-=(const Num& o);
    Num& operator*=(const Num& o);
    Num& operator/=(const Num& o);

    friend Num operator+(Num a, const Num& b) { return a += b; }
    friend Num operator-(Num a, const Num& b) { return a -= b; }
    friend Num operator*(Num a, const Num& b) { return a *= b; }
    friend Num operator/(Num a, const Num& b) { return a /= b; }

    // Exact-exact comparisons are rational; any float operand compares as float64.
    friend bool operator==(const Num& a, const Num& b) { return cmp(a, b) == 0; }
    friend bool operator!=(const Num& a, const Num& b) { return cmp(a, b) != 0; }
    friend bool operator<(const Num& a, const Num& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const Num& a, const Num& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const Num& a, const Num& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const Num& a, const Num& b) { return cmp(a, b) >= 0; }

    // "p/q" for exact values, shortest round-trip decimal for floats.
    std::string str() const;

private:
    static int cmp(const Num& a, const Num& b);

    bool exact_;
    Rat r_;
    double d_;
};

Num abs(const Num& v);
Num sq(const Num& v);
Num num_min(const Num& a, const Num& b);
Num num_max(const Num& a, const Num& b);

// lhs <= rhs, strict when both sides are exact, with relative float slack
// otherwise: lhs <= rhs + slack * max(|lhs|, |rhs|, 1).
bool le_with_slack(const Num& lhs, const Num& rhs, double slack = 1e-12);

// Deterministic summation: exact inputs accumulate as rationals (order-free);
// as soon as any addend is float the whole sum is reduced as a pairwise tree
// over float64 in input order.
Num sum(const std::vector<Num>& v);
double pairwise_sum(const std::vector<double>& v);

// Complex scalar over Num with the same exactness discipline.
struct CNum {
    Num re, im;

    CNum() = default;
    CNum(Num r) : re(std::move(r)) {}
    CNum(Num r, Num i) : re(std::move(r)), im(std::move(i)) {}

    bool is_zero() const { return re.is_zero() && im.is_zero(); }
    CNum conj() const { return CNum(re, -im); }
    CNum& operator+=(const CNum& o);
    CNum& operator*=(const CNum& o);
    friend CNum operator+(CNum a, const CNum& b) { return a += b; }
    friend CNum operator*(CNum a, const CNum& b) { return a *= b; }
    friend bool operator==(const CNum& a, const CNum& b) { return a.re == b.re && a.im == b.im; }
    // multiply by the imaginary unit, exact in all cases
    CNum times_i() const { return CNum(-im, re); }
};

// cos/sin of (2*pi*turns). Exact rational values exist exactly for turn
// denominators in {1,2,3,4,6} (rational-cosine set); everything else is float.
Num cos_turns(const Num& turns);
Num sin_turns(const Num& turns);
CNum unit_phase(const Num& turns); // e^{2*pi*i*turns}

// turns reduced to [0, 1); exact stays exact.
Num mod1(const Num& turns);

} // namespace ergo
