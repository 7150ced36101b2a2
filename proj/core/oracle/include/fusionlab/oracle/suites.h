#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fusionlab::oracle {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double worst = 0.0;  // worst observed error (suite-specific units)
  int checks = 0;
  double seconds = 0.0;
};

// gmm_denoise against 1-D quadrature on random one-pixel mixtures (tol 1e-6).
SuiteResult denoiser_quadrature_suite(int probes = 120, std::uint64_t seed = 11);
// gmm_posterior against direct density ratios on the default world (tol 1e-10).
SuiteResult posterior_density_ratio_suite(int probes = 100, std::uint64_t seed = 12);
// fusion_mask against the brute-force mask on random 8x8 pairs, plus softmax
// normalization, binarity and shift invariance.
SuiteResult snf_mask_suite(int pairs = 1000, std::uint64_t seed = 13);
// Reverse-mode gradient against central differences (relative error < 1e-4).
SuiteResult gradient_suite(std::uint64_t seed = 14);
SuiteResult convolution_suite(std::uint64_t seed = 15);
SuiteResult softmax_suite(std::uint64_t seed = 16);
SuiteResult schedule_suite(std::uint64_t seed = 17);
SuiteResult snf_step_suite(int probes = 6, std::uint64_t seed = 18);

std::vector<SuiteResult> run_all_suites();

}  // namespace fusionlab::oracle
