#include "annomap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "annomap/errors.hpp"
#include "annomap/rng.hpp"

namespace annomap {

namespace {

double mean_of(std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

// Midranks of the pooled sample, plus sum of t^3 - t over tie groups.
struct RankedPool {
  std::vector<double> ranks;  // aligned with pooled values
  double tie_term = 0.0;      // sum of (t^3 - t)
};

RankedPool midranks(const std::vector<double>& pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  RankedPool out;
  out.ranks.resize(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double tie = static_cast<double>(j - i + 1);
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) out.ranks[order[k]] = rank;
    out.tie_term += tie * tie * tie - tie;
    i = j + 1;
  }
  return out;
}

double u_statistic_from_ranks(const std::vector<double>& ranks, std::size_t n1) {
  double r1 = 0.0;
  for (std::size_t i = 0; i < n1; ++i) r1 += ranks[i];
  return r1 - static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
}

}  // namespace

const char* test_method_name(TestMethod method) {
  switch (method) {
    case TestMethod::exact: return "exact";
    case TestMethod::normal_approx: return "normal_approx";
    case TestMethod::permutation: return "permutation";
  }
  return "unknown";
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw AnalysisError("pearson: series lengths differ (" + std::to_string(xs.size()) + " vs " +
                        std::to_string(ys.size()) + ")");
  if (xs.size() < 3) throw AnalysisError("pearson: need at least 3 observations");
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw AnalysisError("pearson: correlation undefined for a constant series");
  return sxy / std::sqrt(sxx * syy);
}

CorrelationResult pearson_permutation_test(std::span<const double> xs,
                                           std::span<const double> ys, int permutations,
                                           std::uint64_t seed) {
  CorrelationResult result;
  result.r = pearson(xs, ys);
  result.permutations = permutations;
  if (permutations <= 0) {
    result.p_value = 1.0;
    return result;
  }

  const std::size_t n = xs.size();
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  std::vector<double> xc(n), yc(n);
  double sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xc[i] = xs[i] - mx;
    yc[i] = ys[i] - my;
    sxx += xc[i] * xc[i];
    syy += yc[i] * yc[i];
  }
  const double denom = std::sqrt(sxx * syy);
  const double threshold = std::abs(result.r) - 1e-12;

  Rng rng(seed);
  std::vector<double> perm = yc;
  int hits = 0;
  for (int p = 0; p < permutations; ++p) {
    rng.shuffle(perm);
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) sxy += xc[i] * perm[i];
    if (std::abs(sxy / denom) >= threshold) ++hits;
  }
  result.p_value = (1.0 + hits) / (static_cast<double>(permutations) + 1.0);
  return result;
}

TestResult mann_whitney_u(std::span<const double> xs, std::span<const double> ys,
                          MwwMethod method) {
  if (xs.empty() || ys.empty())
    throw AnalysisError("mann_whitney_u: both samples must be non-empty");
  if (method == MwwMethod::auto_select)
    method = (xs.size() + ys.size() <= kMwwExactLimit) ? MwwMethod::exact
                                                       : MwwMethod::normal_approx;
  if (method == MwwMethod::exact) return mann_whitney_exact(xs, ys);

  const std::size_t n1 = xs.size(), n2 = ys.size();
  std::vector<double> pooled(xs.begin(), xs.end());
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  RankedPool ranked = midranks(pooled);
  const double u = u_statistic_from_ranks(ranked.ranks, n1);

  const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2);
  const double dn = dn1 + dn2;
  const double mu = dn1 * dn2 / 2.0;
  const double sigma_sq =
      dn1 * dn2 / 12.0 * ((dn + 1.0) - ranked.tie_term / (dn * (dn - 1.0)));

  TestResult result{u, 1.0, n1, n2, TestMethod::normal_approx};
  if (sigma_sq <= 0.0) return result;  // all values tied
  const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(sigma_sq);
  result.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return result;
}

TestResult mann_whitney_exact(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty())
    throw AnalysisError("mann_whitney_exact: both samples must be non-empty");
  const std::size_t n1 = xs.size(), n2 = ys.size();
  const std::size_t n = n1 + n2;
  if (n > kMwwExactLimit)
    throw AnalysisError("mann_whitney_exact: pooled size " + std::to_string(n) + " exceeds limit " +
                        std::to_string(kMwwExactLimit));

  std::vector<double> pooled(xs.begin(), xs.end());
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  RankedPool ranked = midranks(pooled);
  const double u_obs = u_statistic_from_ranks(ranked.ranks, n1);
  const double mu = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;
  const double d_obs = std::abs(u_obs - mu);

  // Enumerate every size-n1 subset of pooled indices as "group one".
  std::vector<std::size_t> comb(n1);
  std::iota(comb.begin(), comb.end(), 0);
  const double rank_offset = static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
  std::uint64_t total = 0, hits = 0;
  for (;;) {
    double r1 = 0.0;
    for (std::size_t idx : comb) r1 += ranked.ranks[idx];
    const double u_perm = r1 - rank_offset;
    ++total;
    if (std::abs(u_perm - mu) >= d_obs - 1e-12) ++hits;

    // next lexicographic combination
    std::size_t i = n1;
    while (i > 0 && comb[i - 1] == n - n1 + i - 1) --i;
    if (i == 0) break;
    ++comb[i - 1];
    for (std::size_t j = i; j < n1; ++j) comb[j] = comb[j - 1] + 1;
  }
  return {u_obs, static_cast<double>(hits) / static_cast<double>(total), n1, n2,
          TestMethod::exact};
}

DistributionSummary summarize(std::span<const double> values) {
  if (values.empty()) throw AnalysisError("summarize: empty series");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
  };
  DistributionSummary s;
  s.n = sorted.size();
  s.min = sorted.front();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.max = sorted.back();
  s.mean = mean_of(sorted);
  return s;
}

std::string significance_band(double p) {
  if (p <= 1e-4) return "****";
  if (p <= 1e-3) return "***";
  if (p <= 1e-2) return "**";
  if (p <= 5e-2) return "*";
  return "ns";
}

}  // namespace annomap
