#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <vector>

/// Pearson chi-square goodness-of-fit; bins with expected count < 5 are
/// pooled into their right neighbor. Returns true when the test does not
/// reject at the given significance.
inline bool chi_square_fits(const std::vector<double>& observed, const std::vector<double>& probs, double alpha) {
  double total = 0.0;
  for (double o : observed) total += o;
  std::vector<double> obs, expct;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    o_acc += i < observed.size() ? observed[i] : 0.0;
    e_acc += probs[i] * total;
    if (e_acc >= 5.0) {
      obs.push_back(o_acc);
      expct.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  for (std::size_t i = probs.size(); i < observed.size(); ++i) o_acc += observed[i];
  if (!obs.empty()) {
    obs.back() += o_acc;
    expct.back() += e_acc;
  }
  if (obs.size() < 2) return true;
  double stat = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) stat += (obs[i] - expct[i]) * (obs[i] - expct[i]) / expct[i];
  boost::math::chi_squared dist(static_cast<double>(obs.size() - 1));
  return stat <= boost::math::quantile(boost::math::complement(dist, alpha));
}

/// |estimate - target| within k standard errors.
inline bool within_se(double estimate, double target, double se, double k = 3.0) {
  return std::abs(estimate - target) <= k * se;
}
