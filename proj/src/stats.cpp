#include "qexp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace qexp {

namespace {

double beta_continued_fraction(double a, double b, double x)
{
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;

    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) {
        d = kTiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            break;
        }
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x)
{
    if (!(a > 0.0) || !(b > 0.0)) {
        throw ValidationError("incomplete beta needs a, b > 0");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw ValidationError("incomplete beta needs x in [0, 1]");
    }
    if (x == 0.0 || x == 1.0) {
        return x;
    }
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    // The fraction converges fast for x below the mean; use symmetry otherwise.
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, double df)
{
    if (!(df > 0.0)) {
        throw ValidationError("t distribution needs df > 0");
    }
    if (std::isinf(t)) {
        return 0.0;
    }
    double x = df / (df + t * t);
    return std::clamp(regularized_incomplete_beta(df / 2.0, 0.5, x), 0.0, 1.0);
}

std::string SignificanceResult::describe() const
{
    std::ostringstream out;
    out << "metric=" << metric << " n=" << n << " mean_diff=" << mean_diff << " t=" << t << " df=" << df
        << " p=" << p << " significant=" << (significant ? "yes" : "no");
    return out.str();
}

SignificanceResult paired_t_test(std::span<const double> a, std::span<const double> b, double alpha)
{
    if (a.size() != b.size()) {
        throw ValidationError("paired t-test needs equally long samples");
    }
    const std::size_t n = a.size();
    if (n < 2) {
        throw ValidationError("paired t-test needs at least 2 pairs");
    }
    SignificanceResult r;
    r.n = n;
    r.df = static_cast<double>(n - 1);

    std::vector<double> d(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = a[i] - b[i];
        sum += d[i];
    }
    double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double x : d) {
        ss += (x - mean) * (x - mean);
    }
    double sd = std::sqrt(ss / r.df);
    r.mean_diff = mean;

    bool all_zero = std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; });
    if (all_zero) {
        r.t = 0.0;
        r.p = 1.0;
    } else if (sd == 0.0) {
        r.t = mean > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        r.p = 0.0;
    } else {
        r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
        r.p = student_t_two_tailed_p(r.t, r.df);
    }
    r.significant = r.p <= alpha;
    return r;
}

SignificanceResult compare_reports(const MetricReport& a, const MetricReport& b, const std::string& metric,
                                   double alpha)
{
    std::map<std::string, std::size_t> ia;
    std::map<std::string, std::size_t> ib;
    for (std::size_t i = 0; i < a.query_ids.size(); ++i) {
        ia.emplace(a.query_ids[i], i);
    }
    for (std::size_t i = 0; i < b.query_ids.size(); ++i) {
        ib.emplace(b.query_ids[i], i);
    }
    std::vector<std::string> only;
    for (const auto& [q, _] : ia) {
        if (!ib.contains(q)) {
            only.push_back(q);
        }
    }
    for (const auto& [q, _] : ib) {
        if (!ia.contains(q)) {
            only.push_back(q);
        }
    }
    if (!only.empty()) {
        std::string list;
        for (const auto& q : only) {
            list += (list.empty() ? "" : ", ") + q;
        }
        throw ValidationError("reports cover different queries; symmetric difference: " + list);
    }
    const auto& va = a.values(metric);
    const auto& vb = b.values(metric);
    std::vector<double> xa;
    std::vector<double> xb;
    for (const auto& [q, i] : ia) {
        xa.push_back(va[i]);
        xb.push_back(vb[ib.at(q)]);
    }
    auto r = paired_t_test(xa, xb, alpha);
    r.metric = metric;
    return r;
}

}  // namespace qexp
