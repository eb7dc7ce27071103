#pragma once

#include <cstddef>
#include <vector>

namespace monoloc {

double mean(const std::vector<double>& v);
/// Unbiased sample variance (divides by n-1); 0 for n < 2.
double sample_variance(const std::vector<double>& v);
/// Median; averages the two middle order statistics for even n.
double median(std::vector<double> v);
/// Quantile with linear interpolation between order statistics (type 7).
double quantile(std::vector<double> v, double p);

double chi_squared_quantile(double level, int dof);
double normal_quantile(double level);
/// Upper quantile of the F distribution with (d1, d2) degrees of freedom.
double fisher_f_quantile(double level, int d1, int d2);

}  // namespace monoloc
