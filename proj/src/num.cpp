#include "ergokit/num.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace ergo {

double rat_to_double(const Rat& r) { return r.convert_to<double>(); }

Rat rat_pow(const Rat& base, int exp) {
    if (exp < 0) {
        if (base.is_zero()) throw structural_error("rat_pow: zero to negative power");
        return Rat(1) / rat_pow(base, -exp);
    }
    Rat acc(1), b(base);
    int e = exp;
    while (e > 0) {
        if (e & 1) acc *= b;
        b *= b;
        e >>= 1;
    }
    return acc;
}

std::string rat_to_string(const Rat& r) {
    std::string num = numerator(r).str();
    if (denominator(r) == 1) return num;
    return num + "/" + denominator(r).str();
}

Rat rat_from_string(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rat(BigInt(s));
        BigInt p(s.substr(0, slash));
        BigInt q(s.substr(slash + 1));
        if (q.is_zero()) throw structural_error("rational with zero denominator: " + s);
        return Rat(p, q);
    } catch (const std::exception&) {
        throw config_error("cannot parse rational: '" + s + "'");
    }
}

int Num::sign() const {
    if (exact_) return r_.sign();
    return d_ > 0 ? 1 : (d_ < 0 ? -1 : 0);
}

Num Num::operator-() const {
    Num n(*this);
    if (n.exact_) n.r_ = -n.r_;
    else n.d_ = -n.d_;
    return n;
}

Num& Num::operator+=(const Num& o) {
    if (exact_ && o.exact_) { r_ += o.r_; return *this; }
    double v = dbl() + o.dbl();
    exact_ = false; d_ = v; r_ = 0;
    return *this;
}

Num& Num::operator-=(const Num& o) {
    if (exact_ && o.exact_) { r_ -= o.r_; return *this; }
    double v = dbl() - o.dbl();
    exact_ = false; d_ = v; r_ = 0;
    return *this;
}

Num& Num::operator*=(const Num& o) {
    if (exact_ && o.exact_) { r_ *= o.r_; return *this; }
    double v = dbl() * o.dbl();
    exact_ = false; d_ = v; r_ = 0;
    return *this;
}

Num& Num::operator/=(const Num& o) {
    if (o.is_zero()) throw structural_error("Num: division by zero");
    if (exact_ && o.exact_) { r_ /= o.r_; return *this; }
    double v = dbl() / o.dbl();
    exact_ = false; d_ = v; r_ = 0;
    return *this;
}

int Num::cmp(const Num& a, const Num& b) {
    if (a.exact_ && b.exact_) return a.r_.compare(b.r_);
    double x = a.dbl(), y = b.dbl();
    return x < y ? -1 : (x > y ? 1 : 0);
}

static std::string double_to_string(double d) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), d);
    return std::string(buf, res.ptr);
}

std::string Num::str() const {
    if (exact_) return rat_to_string(r_);
    return double_to_string(d_);
}

Num abs(const Num& v) { return v.sign() < 0 ? -v : v; }
Num sq(const Num& v) { return v * v; }
Num num_min(const Num& a, const Num& b) { return a <= b ? a : b; }
Num num_max(const Num& a, const Num& b) { return a >= b ? a : b; }

bool le_with_slack(const Num& lhs, const Num& rhs, double slack) {
    if (lhs.exact() && rhs.exact()) return lhs <= rhs;
    double l = lhs.dbl(), r = rhs.dbl();
    double scale = std::max({std::fabs(l), std::fabs(r), 1.0});
    return l <= r + slack * scale;
}

double pairwise_sum(const std::vector<double>& v) {
    // fixed binary-tree reduction; independent of threading or chunk count
    struct Rec {
        static double go(const double* p, size_t n) {
            if (n == 0) return 0.0;
            if (n == 1) return p[0];
            if (n == 2) return p[0] + p[1];
            size_t half = n / 2;
            return go(p, half) + go(p + half, n - half);
        }
    };
    return Rec::go(v.data(), v.size());
}

Num sum(const std::vector<Num>& v) {
    bool all_exact = true;
    for (const auto& x : v)
        if (!x.exact()) { all_exact = false; break; }
    if (all_exact) {
        Rat acc(0);
        for (const auto& x : v) acc += x.rat();
        return Num(std::move(acc));
    }
    std::vector<double> d;
    d.reserve(v.size());
    for (const auto& x : v) d.push_back(x.dbl());
    return Num::from_double(pairwise_sum(d));
}

CNum& CNum::operator+=(const CNum& o) {
    re += o.re;
    im += o.im;
    return *this;
}

CNum& CNum::operator*=(const CNum& o) {
    Num r = re * o.re - im * o.im;
    Num i = re * o.im + im * o.re;
    re = std::move(r);
    im = std::move(i);
    return *this;
}

Num mod1(const Num& turns) {
    if (turns.exact()) {
        const Rat& r = turns.rat();
        BigInt fl = numerator(r) / denominator(r);
        if (r < 0 && fl * denominator(r) != numerator(r)) fl -= 1;
        return Num(r - Rat(fl));
    }
    double d = turns.dbl();
    double f = d - std::floor(d);
    if (f >= 1.0) f = 0.0;
    return Num::from_double(f);
}

// Exact cos(2*pi*t) for reduced denominators 1,2,3,4,6; nullptr-style fallback
// is signalled by returning float.
Num cos_turns(const Num& turns) {
    Num t = mod1(turns);
    if (t.exact()) {
        const Rat& r = t.rat();
        const BigInt& q = denominator(r);
        if (q == 1) return Num(1);
        if (q == 2) return Num(-1);
        if (q == 4) return Num(0);
        if (q == 3) return Num(Rat(-1, 2));
        if (q == 6) return Num(Rat(1, 2));
    }
    long double v = cosl(2.0L * 3.14159265358979323846264338327950288L * (long double)t.dbl());
    return Num::from_double((double)v);
}

Num sin_turns(const Num& turns) {
    // sin(2*pi*t) = cos(2*pi*(1/4 - t))
    return cos_turns(Num(Rat(1, 4)) - mod1(turns));
}

CNum unit_phase(const Num& turns) { return CNum(cos_turns(turns), sin_turns(turns)); }

} // namespace ergo
