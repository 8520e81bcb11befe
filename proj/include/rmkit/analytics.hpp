#pragma once

#include <cstdint>
#include <vector>

#include "rmkit/sampler.hpp"

namespace rmkit {

enum class SamplerKind { uniform, perfect };

struct GammaTriple {
    double gamma2 = 0.0;
    double gamma3 = 0.0;
    double gamma4 = 0.0;
};

struct GammaEstimate {
    GammaTriple value;
    GammaTriple stderr_;
};

// Closed forms for pure product states of N qudits (local dimension d):
//   uniform: Gamma2 = (2d-1)^N, Gamma3 = (3d/(2+d))^N,
//            Gamma4 = ((d^2+9d+2)/(d^2+5d+6))^N
//   perfect (d = 2 only): Gamma2 = beta^N, Gamma3 = alpha^N, Gamma4 = 1,
//            alpha = 5/2 - 2*pi/(3*sqrt(3)), beta = 1 + 4*pi/(3*sqrt(3)).
GammaTriple gamma_closed_form(SamplerKind kind, int n_qubits, int local_dim = 2);

// Same quantities from adaptive quadrature of the 1D proof integrands,
// raised to the N-th power. Agrees with the closed forms to 1e-10 relative.
GammaTriple gamma_quadrature(SamplerKind kind, int n_qubits);

// Per-unitary diagonal k-copy traces Gamma_k(u) = Tr(A_k (u rho u^dag)^{x k})
// from an outcome distribution, with K(s,s') = 2^N (-2)^{-D[s,s']}:
//   Gamma4(u) = X(u)^2
//   Gamma3(u) = sum_s P(s) (K P)(s)^2
//   Gamma2(u) = sum_{s,s'} K(s,s')^2 P(s) P(s')
GammaTriple gamma_traces_of_distribution(const OutcomeDistribution& dist);

// Reference evaluation by literal enumeration of 2-, 3- and 4-tuples of
// bitstrings; test oracle for small N.
GammaTriple gamma_traces_enumerated(const OutcomeDistribution& dist);

struct GammaMcOptions {
    int burn_in = 50;
    int max_qubits = kDefaultMaxQubits;
};

// Monte Carlo Gamma_k = E_u[Gamma_k(u) / p_IS(u)^2] with u drawn from the
// model's distribution (Metropolis; i.i.d. Haar for constant weights) and
// p_IS = evaluate / Z.
GammaEstimate gamma_monte_carlo(const DenseState& state, const SamplerModel& model, int n_samples,
                                Rng& rng, const GammaMcOptions& options = {});

// Closed-form variance of the importance-sampled estimator at finite
// (N_u, N_M):
// (1/N_u) [ (N_M-3)(N_M-2)/(N_M(N_M-1)) G4 + 4(N_M-2)/(N_M(N_M-1)) G3
//           + 2/(N_M(N_M-1)) G2 - p2^2 ].
double estimator_variance(const GammaTriple& gammas, double p2, long long n_u, long long n_m);

struct VarianceReport {
    GammaTriple gammas;
    double p2 = 0.0;
    long long n_u = 0;
    long long n_m = 0;
    double variance = 0.0;
};

VarianceReport make_variance_report(const GammaTriple& gammas, double p2, long long n_u,
                                    long long n_m);

struct BudgetPlan {
    double epsilon = 0.0;
    long long n_u = 0;
    long long n_m = 0;
    std::uint64_t total = 0;
};

// Smallest N_u * N_M with estimator_variance <= (pi/2) epsilon^2, scanning
// n_m in [2, n_m_max] with n_u = ceil(f(n_m)/V); ties break toward smaller
// n_m. The scan is exhaustive up to 2^21 and continues exactly on the
// monotone tail via per-n_u bisection.
BudgetPlan required_budget(double epsilon, const GammaTriple& gammas, double p2,
                           long long n_m_max = 1000000);

struct ScalingFit {
    double a = 0.0;         // exponent in 2^{b + aN}
    double b = 0.0;
    double residual = 0.0;  // RMS residual of the log2 fit
};

// Least-squares fit of log2(budget) = b + a*N.
ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points);

}  // namespace rmkit
