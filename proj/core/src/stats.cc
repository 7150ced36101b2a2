#include "fusionlab/stats.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fusionlab {

double sign_test_p(int wins, int losses) {
  if (wins < 0 || losses < 0) throw std::invalid_argument("sign_test_p: negative count");
  const int n = wins + losses;
  if (n == 0) return 1.0;
  // Sum in log space; n stays small enough that lgamma is exact to ~1e-15.
  double p = 0.0;
  for (int k = wins; k <= n; ++k) {
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) -
                  n * std::log(2.0));
  }
  return std::min(p, 1.0);
}

SignTest paired_sign_test(std::span<const double> better, std::span<const double> worse) {
  if (better.size() != worse.size()) {
    throw std::invalid_argument("paired_sign_test: samples must be paired");
  }
  SignTest out;
  for (std::size_t i = 0; i < better.size(); ++i) {
    if (better[i] > worse[i]) {
      ++out.wins;
    } else if (better[i] < worse[i]) {
      ++out.losses;
    } else {
      ++out.ties;
    }
  }
  out.p_value = sign_test_p(out.wins, out.losses);
  return out;
}

}  // namespace fusionlab
