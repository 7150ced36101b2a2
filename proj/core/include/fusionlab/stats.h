#pragma once

#include <span>

namespace fusionlab {

struct SignTest {
  int wins = 0;
  int losses = 0;
  int ties = 0;
  double p_value = 1.0;  // one-sided, H1: wins are more likely than losses
};

// P(X >= wins) for X ~ Binomial(wins + losses, 1/2).
double sign_test_p(int wins, int losses);

// Pairs where better[i] > worse[i] count as wins; exact ties are dropped.
SignTest paired_sign_test(std::span<const double> better, std::span<const double> worse);

}  // namespace fusionlab
