#pragma once

// Kolmogorov-Smirnov statistics used by the property checks.

#include <functional>
#include <vector>

namespace otrank::ks {

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Asymptotic Kolmogorov survival function P(K > lambda).
double kolmogorov_sf(double lambda);

// sup |F_n - F| against a continuous CDF.
KsResult one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

// sup |F_m - G_n|; p-value from the asymptotic law with effective size mn/(m+n).
KsResult two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace otrank::ks
