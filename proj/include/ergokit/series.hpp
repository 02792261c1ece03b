#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ergokit/num.hpp"

namespace ergo {

// An indexed numeric series (one row per sequence index n) with the group
// measure and one or more value columns. Serializes to CSV with columns
// n,mu,value[,value2,...]; exact entries print as p/q, floats as shortest
// round-trip decimals, so equal runs produce byte-identical files.
class Series {
public:
    Series() = default;
    Series(std::string name, std::vector<std::string> value_columns)
        : name_(std::move(name)), columns_(std::move(value_columns)) {}

    void add_row(long long n, Num mu, std::vector<Num> values);

    const std::string& name() const { return name_; }
    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t rows() const { return n_.size(); }
    long long index(std::size_t row) const { return n_[row]; }
    const Num& mu(std::size_t row) const { return mu_[row]; }
    const Num& value(std::size_t row, std::size_t col = 0) const { return values_[row][col]; }
    const Num& back(std::size_t col = 0) const { return values_.back()[col]; }

    std::string to_csv() const;

    // Mean of |value| over the last-quartile rows (row position, not index
    // value): rows r with r >= floor(3*rows/4).
    Num last_quartile_abs_mean(std::size_t col = 0) const;

private:
    std::string name_;
    std::vector<std::string> columns_;
    std::vector<long long> n_;
    std::vector<Num> mu_;
    std::vector<std::vector<Num>> values_;
};

// Trend-to-zero convention, pinned once for the whole toolkit: a series
// trends to zero when the mean of |value| over its last-quartile rows falls
// below tau. tau defaults to the absolute fallback 1e-2; when a preset knows
// the exact decay rate it supplies tau = 10 * rate(N_max).
struct TrendPolicy {
    double tau = 1e-2;
    std::string basis = "absolute"; // or "10x known rate <expr>"
};

bool trend_to_zero(const Series& s, const TrendPolicy& policy, std::size_t col = 0);

enum class Verdict { Pass, Fail, Inconclusive, VacuousPass };
std::string verdict_name(Verdict v);

} // namespace ergo
