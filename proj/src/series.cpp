#include "ergokit/series.hpp"

#include "ergokit/errors.hpp"

namespace ergo {

void Series::add_row(long long n, Num mu, std::vector<Num> values) {
    if (values.size() != columns_.size())
        throw structural_error("Series '" + name_ + "': row arity mismatch");
    n_.push_back(n);
    mu_.push_back(std::move(mu));
    values_.push_back(std::move(values));
}

std::string Series::to_csv() const {
    std::string out = "n,mu";
    for (const auto& c : columns_) out += "," + c;
    out += "\n";
    for (std::size_t r = 0; r < n_.size(); ++r) {
        out += std::to_string(n_[r]);
        out += ",";
        out += mu_[r].str();
        for (const auto& v : values_[r]) {
            out += ",";
            out += v.str();
        }
        out += "\n";
    }
    return out;
}

Num Series::last_quartile_abs_mean(std::size_t col) const {
    if (n_.empty()) throw structural_error("Series '" + name_ + "': empty");
    std::size_t start = (3 * n_.size()) / 4;
    if (start >= n_.size()) start = n_.size() - 1;
    std::vector<Num> tail;
    tail.reserve(n_.size() - start);
    for (std::size_t r = start; r < n_.size(); ++r) tail.push_back(abs(values_[r][col]));
    return sum(tail) / Num((long long)tail.size());
}

bool trend_to_zero(const Series& s, const TrendPolicy& policy, std::size_t col) {
    return s.last_quartile_abs_mean(col).dbl() < policy.tau;
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::Inconclusive: return "INCONCLUSIVE";
        case Verdict::VacuousPass: return "VACUOUS-PASS";
    }
    return "?";
}

} // namespace ergo
