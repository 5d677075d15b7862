#pragma once

#include <span>
#include <string>
#include <vector>

#include "qexp/metrics.hpp"

namespace qexp {

/// I_x(a, b) by continued fraction (modified Lentz). a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// Two-tailed p-value of Student's t with `df` degrees of freedom:
/// I_{df / (df + t^2)}(df / 2, 1 / 2).
double student_t_two_tailed_p(double t, double df);

struct SignificanceResult {
    std::string metric;
    std::size_t n = 0;
    double mean_diff = 0.0;
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
    bool significant = false;

    std::string describe() const;
};

/// Paired t-test on per-query values (same order in a and b). All-zero
/// differences give t = 0, p = 1. Constant non-zero differences give an
/// infinite t and p = 0.
SignificanceResult paired_t_test(std::span<const double> a, std::span<const double> b, double alpha = 0.05);

/// Aligns two reports by query id; throws ValidationError listing the
/// symmetric difference when the evaluated query sets differ.
SignificanceResult compare_reports(const MetricReport& a, const MetricReport& b, const std::string& metric,
                                   double alpha = 0.05);

}  // namespace qexp
