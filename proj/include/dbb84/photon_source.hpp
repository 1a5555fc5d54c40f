#pragma once

#include <stdexcept>
#include <string>
#include <variant>

namespace dbb84 {

struct DegenerateSource : std::domain_error {
  using std::domain_error::domain_error;
};
struct MomentNegative : std::domain_error {
  using std::domain_error::domain_error;
};
struct IntensityOrderViolation : std::domain_error {
  using std::domain_error::domain_error;
};
struct AssumptionViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Photon-number expansion weights of a pulse source:
//   m0 = E[e^-mu], m1 = E[mu e^-mu], m2 = E[mu^2 e^-mu].
struct SourceMoments {
  double m0 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  std::string label;
};

struct FixedLaw {
  double mu;  // > 0
};
// Intensity drawn from N(mean, (mean*rel_std)^2); the closed forms integrate
// over all reals, so a tiny unphysical negative-intensity tail is accepted.
struct GaussianLaw {
  double mean;     // > 0
  double rel_std;  // t >= 0
};
using IntensityLaw = std::variant<FixedLaw, GaussianLaw, SourceMoments>;

SourceMoments moments(const IntensityLaw& law);

// Nominal intensity used for ordering checks (mu, the Gaussian mean, or
// m1/m0 for user-supplied moments).
double mean_intensity(const IntensityLaw& law);

// Residual multi-photon weight (1 - m0 - m1) / m2 of the two-photon-and-up
// block in the expansion; equals (e^mu - 1 - mu) / mu^2 for a fixed law.
double omega2(const SourceMoments& m);

// Fixed-law difference form of the three-photon-and-up residual weight.
double omega3_fixed(double mu1, double mu2);

// E[mu^n e^-mu]; fixed and Gaussian laws support any n >= 0 (the Gaussian
// case uses the shifted-moment recursion), bare moments only n <= 2.
double weighted_moment(const IntensityLaw& law, int n);

struct Omega3Series {
  double value = 0.0;
  double remainder_bound = 0.0;  // rigorous bound on the truncated part
  int n_max = 0;
};
// Series form of the residual weight for two general laws, truncated at
// n_max with the remainder reported. Requires decoy dominance up to n_max.
Omega3Series omega3_moments(const IntensityLaw& law1, const IntensityLaw& law2, int n_max = 60);

struct DominanceReport {
  bool pass = true;
  int first_failing_n = -1;
};
// Verifies E2[mu^n e^-mu] E1[mu^2 e^-mu] >= E1[mu^n e^-mu] E2[mu^2 e^-mu]
// for n = 3..n_max.
DominanceReport decoy_dominance_check(const IntensityLaw& law1, const IntensityLaw& law2,
                                      int n_max = 60);

}  // namespace dbb84
