#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace annomap {

enum class TestMethod { exact, normal_approx, permutation };

const char* test_method_name(TestMethod method);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  TestMethod method = TestMethod::exact;
};

struct DistributionSummary {
  std::size_t n = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

// Sample Pearson r. Throws AnalysisError on length mismatch, n < 3, or a
// constant series (undefined correlation).
double pearson(std::span<const double> xs, std::span<const double> ys);

struct CorrelationResult {
  double r = 0.0;
  double p_value = 1.0;
  int permutations = 0;
};

inline constexpr int kDefaultPermutations = 10000;

// Two-sided permutation test: p = (1 + #{perm : |r_perm| >= |r|}) / (permutations + 1).
CorrelationResult pearson_permutation_test(std::span<const double> xs,
                                           std::span<const double> ys, int permutations,
                                           std::uint64_t seed);

enum class MwwMethod { auto_select, exact, normal_approx };

// Exact enumeration is feasible (and auto-selected) up to this pooled size.
inline constexpr std::size_t kMwwExactLimit = 16;

// U statistic for xs with midrank tie handling. Two-sided p-value by exact
// enumeration when n1+n2 <= kMwwExactLimit, otherwise by normal approximation
// with tie and continuity corrections.
TestResult mann_whitney_u(std::span<const double> xs, std::span<const double> ys,
                          MwwMethod method = MwwMethod::auto_select);

// Exact two-sided p over all C(n1+n2, n1) group assignments of the pooled
// sample. Throws AnalysisError when n1+n2 > kMwwExactLimit.
TestResult mann_whitney_exact(std::span<const double> xs, std::span<const double> ys);

// Five-number summary with linear-interpolation quantiles, plus the mean.
DistributionSummary summarize(std::span<const double> values);

// Report notation: "****" p<=1e-4, "***" p<=1e-3, "**" p<=1e-2,
// "*" p<=5e-2, otherwise "ns".
std::string significance_band(double p);

}  // namespace annomap
