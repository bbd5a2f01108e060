#include "reflectforge/metrics.hpp"

#include "reflectforge/errors.hpp"
#include "reflectforge/util.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace reflectforge {

void ProblemResult::validate() const {
    if (n < 0 || c < 0 || c > n) {
        throw DomainError("problem " + problem_id + ": need 0 <= c <= n, got c=" +
                          std::to_string(c) + " n=" + std::to_string(n));
    }
    if (reflection_counts.size() != static_cast<std::size_t>(n) ||
        correctness_flags.size() != static_cast<std::size_t>(n)) {
        throw DomainError("problem " + problem_id + ": per-sample lists must have length n");
    }
    const auto trues = std::count(correctness_flags.begin(), correctness_flags.end(), true);
    if (trues != c) {
        throw DomainError("problem " + problem_id + ": c does not match correctness flags");
    }
    for (int r : reflection_counts) {
        if (r < 0) {
            throw DomainError("problem " + problem_id + ": negative reflection count");
        }
    }
}

long long ProblemResult::reflections_in_correct() const {
    long long total = 0;
    for (int i = 0; i < n; ++i) {
        if (correctness_flags[i]) total += reflection_counts[i];
    }
    return total;
}

long long ProblemResult::reflections_in_incorrect() const {
    long long total = 0;
    for (int i = 0; i < n; ++i) {
        if (!correctness_flags[i]) total += reflection_counts[i];
    }
    return total;
}

namespace {

__int128 binomial_i128(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    __int128 result = 1;
    for (int i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;  // stays integral at every step
    }
    return result;
}

}  // namespace

Rational pass_at_k(int n, int c, int k) {
    if (n < 1 || c < 0 || c > n || k < 1 || k > n) {
        throw DomainError("pass_at_k needs 0 <= c <= n and 1 <= k <= n, got n=" +
                          std::to_string(n) + " c=" + std::to_string(c) + " k=" + std::to_string(k));
    }
    if (n > 120) {
        throw DomainError("pass_at_k: n > 120 exceeds exact binomial range");
    }
    if (n - c < k) {
        return Rational(1);
    }
    const auto miss = binomial_i128(n - c, k);
    const auto total = binomial_i128(n, k);
    return Rational(1) - Rational::from_i128(miss, total);
}

std::optional<Rational> err(const std::vector<ProblemResult>& results) {
    long long numerator = 0;
    long long denominator = 0;
    for (const auto& r : results) {
        r.validate();
        for (int i = 0; i < r.n; ++i) {
            denominator += r.reflection_counts[i];
            if (r.correctness_flags[i]) {
                numerator += r.reflection_counts[i];
            }
        }
    }
    if (denominator == 0) {
        return std::nullopt;
    }
    return Rational(numerator, denominator);
}

Rational mean_pass1(const std::vector<ProblemResult>& results) {
    if (results.empty()) {
        throw DomainError("mean_pass1 over empty result set");
    }
    Rational sum;
    for (const auto& r : results) {
        r.validate();
        if (r.n == 0) {
            throw DomainError("problem " + r.problem_id + " has no samples");
        }
        sum = sum + Rational(r.c, r.n);
    }
    return sum / Rational(static_cast<long long>(results.size()));
}

Rational pooled_pass1(const std::vector<ProblemResult>& results) {
    long long correct = 0;
    long long total = 0;
    for (const auto& r : results) {
        r.validate();
        correct += r.c;
        total += r.n;
    }
    if (total == 0) {
        throw DomainError("pooled_pass1 over empty sample set");
    }
    return Rational(correct, total);
}

CorrectionDelta correction_delta(const std::vector<bool>& t1_flags,
                                 const std::vector<bool>& t2_flags) {
    if (t1_flags.size() != t2_flags.size()) {
        throw DomainError("correction_delta: lengths differ (" + std::to_string(t1_flags.size()) +
                          " vs " + std::to_string(t2_flags.size()) + ")");
    }
    if (t1_flags.empty()) {
        throw DomainError("correction_delta over empty flag vectors");
    }
    const long long n = static_cast<long long>(t1_flags.size());
    long long t1_true = 0;
    long long t2_true = 0;
    long long ic = 0;
    long long ci = 0;
    for (std::size_t i = 0; i < t1_flags.size(); ++i) {
        t1_true += t1_flags[i];
        t2_true += t2_flags[i];
        ic += !t1_flags[i] && t2_flags[i];
        ci += t1_flags[i] && !t2_flags[i];
    }
    CorrectionDelta d;
    d.acc_t1 = Rational(t1_true, n);
    d.acc_t2 = Rational(t2_true, n);
    d.delta_ic = Rational(ic, n);
    d.delta_ci = Rational(ci, n);
    d.delta = d.acc_t2 - d.acc_t1;
    return d;
}

namespace {

// round(r * scale) half away from zero, exact.
long long scaled_round(const Rational& r, long long scale) {
    __int128 num = static_cast<__int128>(r.num()) * scale;
    __int128 den = r.den();
    const bool neg = num < 0;
    if (neg) num = -num;
    __int128 q = (2 * num + den) / (2 * den);
    return static_cast<long long>(neg ? -q : q);
}

}  // namespace

std::string percent_1dp(const Rational& r) {
    const long long tenths = scaled_round(r, 1000);  // percent * 10
    const char* sign = tenths < 0 ? "-" : "";
    const long long a = tenths < 0 ? -tenths : tenths;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s%lld.%lld", sign, a / 10, a % 10);
    return buf;
}

std::string ratio_2dp(const Rational& r) {
    const long long hundredths = scaled_round(r, 100);
    const char* sign = hundredths < 0 ? "-" : "";
    const long long a = hundredths < 0 ? -hundredths : hundredths;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s%lld.%02lld", sign, a / 100, a % 100);
    return buf;
}

DatasetMetrics compute_dataset_metrics(const std::string& dataset,
                                       const std::vector<ProblemResult>& results, int k) {
    if (results.empty()) {
        throw DomainError("dataset " + dataset + " has no results");
    }
    DatasetMetrics m;
    m.dataset = dataset;
    m.n_problems = results.size();
    m.k = k;
    Rational pass_k_sum;
    for (const auto& r : results) {
        m.n_samples += r.n;
        pass_k_sum = pass_k_sum + pass_at_k(r.n, r.c, k);
    }
    m.pass1_mean = mean_pass1(results);
    m.pass1_pooled = pooled_pass1(results);
    m.pass_k_mean = pass_k_sum / Rational(static_cast<long long>(results.size()));
    m.err_ratio = err(results);
    return m;
}

std::vector<DatasetMetrics> with_summary_rows(
    std::vector<DatasetMetrics> rows,
    const std::vector<std::vector<ProblemResult>>& per_dataset) {
    if (rows.empty()) {
        return rows;
    }
    DatasetMetrics avg;
    avg.dataset = "avg";
    avg.k = rows.front().k;
    Rational p1, pk;
    Rational err_sum;
    std::size_t err_n = 0;
    for (const auto& row : rows) {
        avg.n_problems += row.n_problems;
        avg.n_samples += row.n_samples;
        p1 = p1 + row.pass1_mean;
        pk = pk + row.pass_k_mean;
        if (row.err_ratio) {
            err_sum = err_sum + *row.err_ratio;
            ++err_n;
        }
    }
    const Rational count(static_cast<long long>(rows.size()));
    avg.pass1_mean = p1 / count;
    avg.pass_k_mean = pk / count;
    if (err_n > 0) {
        avg.err_ratio = err_sum / Rational(static_cast<long long>(err_n));
    }

    std::vector<ProblemResult> all;
    for (const auto& ds : per_dataset) {
        all.insert(all.end(), ds.begin(), ds.end());
    }
    avg.pass1_pooled = pooled_pass1(all);

    DatasetMetrics pooled;
    pooled.dataset = "pooled";
    pooled.k = avg.k;
    pooled.n_problems = avg.n_problems;
    pooled.n_samples = avg.n_samples;
    pooled.pass1_mean = mean_pass1(all);
    pooled.pass1_pooled = avg.pass1_pooled;
    Rational pooled_pk;
    for (const auto& r : all) {
        pooled_pk = pooled_pk + pass_at_k(r.n, r.c, pooled.k);
    }
    pooled.pass_k_mean = pooled_pk / Rational(static_cast<long long>(all.size()));
    pooled.err_ratio = err(all);

    rows.push_back(std::move(avg));
    rows.push_back(std::move(pooled));
    return rows;
}

namespace {

std::string ratio6(const Rational& r) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", r.to_double());
    return buf;
}

}  // namespace

void write_metrics_csv(const std::filesystem::path& path, const std::vector<DatasetMetrics>& rows,
                       const std::string& lexicon_hash_hex) {
    std::string out = "dataset,pass1,pass_at_k,err,n_problems,n_samples,lexicon_hash\n";
    for (const auto& m : rows) {
        out += m.dataset + "," + ratio6(m.pass1_mean) + "," + ratio6(m.pass_k_mean) + ",";
        out += m.err_ratio ? ratio6(*m.err_ratio) : "";
        out += "," + std::to_string(m.n_problems) + "," + std::to_string(m.n_samples) + "," +
               lexicon_hash_hex + "\n";
    }
    write_text_file_atomic(path, out);
}

void write_per_problem_csv(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::vector<ProblemResult>>>& per_dataset) {
    std::string out = "dataset,problem_id,n,c,reflections_correct,reflections_incorrect\n";
    for (const auto& [dataset, results] : per_dataset) {
        for (const auto& r : results) {
            out += dataset + "," + r.problem_id + "," + std::to_string(r.n) + "," +
                   std::to_string(r.c) + "," + std::to_string(r.reflections_in_correct()) + "," +
                   std::to_string(r.reflections_in_incorrect()) + "\n";
        }
    }
    write_text_file_atomic(path, out);
}

namespace {

void append_padded(std::string& out, const std::string& cell, std::size_t width) {
    out += cell;
    if (cell.size() < width) {
        out.append(width - cell.size(), ' ');
    }
    out += "  ";
}

}  // namespace

std::string render_metrics_table(const std::vector<DatasetMetrics>& rows,
                                 const std::string& lexicon_hash_hex) {
    const int k = rows.empty() ? 1 : rows.front().k;
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"dataset", "pass@1", "pass@1(pooled)", "pass@" + std::to_string(k), "ERR",
                     "problems", "samples"});
    for (const auto& m : rows) {
        cells.push_back({m.dataset, percent_1dp(m.pass1_mean), percent_1dp(m.pass1_pooled),
                         percent_1dp(m.pass_k_mean), m.err_ratio ? ratio_2dp(*m.err_ratio) : "-",
                         std::to_string(m.n_problems), std::to_string(m.n_samples)});
    }
    std::vector<std::size_t> widths(cells.front().size(), 0);
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            widths[i] = std::max(widths[i], row[i].size());
        }
    }
    std::string out;
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            append_padded(out, row[i], widths[i]);
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += "\n";
    }
    out += "pass@1 averaged per problem; pooled row is sample-weighted\n";
    out += "lexicon: " + lexicon_hash_hex + "\n";
    return out;
}

std::string render_delta_table(const CorrectionDelta& d) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"acc@t1", "acc@t2", "delta", "delta_ic", "delta_ci"});
    cells.push_back({percent_1dp(d.acc_t1), percent_1dp(d.acc_t2), percent_1dp(d.delta),
                     percent_1dp(d.delta_ic), percent_1dp(d.delta_ci)});
    std::vector<std::size_t> widths(cells.front().size(), 0);
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            widths[i] = std::max(widths[i], row[i].size());
        }
    }
    std::string out;
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            append_padded(out, row[i], widths[i]);
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += "\n";
    }
    return out;
}

}  // namespace reflectforge
