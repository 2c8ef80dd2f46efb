#pragma once

#include "asip/chain.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace asip {

inline constexpr std::size_t kDefaultEventPairCap = std::size_t{1} << 16;

struct AlphaPhi {
  double alpha = 0.0;
  double phi = 0.0;
  Time alpha_witness = 1;  // time j attaining the maximum
  Time phi_witness = 1;
};

/// sup over A in sigma(xi_j), B in sigma(xi_{j+k}) of |P(AB) - P(A)P(B)| and of
/// |P(B|A) - P(B)|, by enumerating every event pair. For a Markov chain these
/// coordinate sigma-algebras give the same values as the full past and future.
/// Values below the numerical floor are reported as 0 unless `snap` is false.
AlphaPhi alpha_phi_at(const ChainSpec& chain, Time j, Time k,
                      std::size_t cap = kDefaultEventPairCap, bool snap = true);

/// Maximum of alpha_phi_at over j in `range`.
AlphaPhi alpha_phi(const ChainSpec& chain, Time k, TimeRange range,
                   std::size_t cap = kDefaultEventPairCap);

/// Same coefficients over cylinder events on the windows
/// (xi_{j-w+1}, ..., xi_j) and (xi_{j+k}, ..., xi_{j+k+w-1}), for validating the
/// coordinate reduction. Requires j >= w.
AlphaPhi alpha_phi_window(const ChainSpec& chain, Time j, Time k, int width,
                          std::size_t cap = kDefaultEventPairCap);

/// pi(Q_j): largest total-variation distance between two rows of P_j.
double dobrushin_coefficient(const ChainSpec& chain, Time j);

/// rho_j: maximal correlation between xi_j and xi_{j+1}, i.e. the norm of Q_j on
/// zero-mean functions. States of zero probability are dropped.
double rho_coefficient(const ChainSpec& chain, Time j);

struct Envelope {
  double c = 0.0;
  double delta = 0.5;
  bool degenerate = false;      // fewer than 3 positive alpha values
  bool nonmonotone = false;     // some alpha(k+1) > alpha(k) + 1e-12
  std::optional<Time> n0;       // min k with phi(k) < 1/2
};

/// alphas[k-1] = alpha(k), phis[k-1] = phi(k). Log-linear least squares gives
/// delta; C is then the smallest constant with alpha(k) <= C delta^k for all k.
Envelope fit_envelope(const std::vector<double>& alphas, const std::vector<double>& phis);

/// Two groups of consecutive blocks: cuts a_1 < ... < a_{n+m+1}; the first
/// group is [a_j, a_{j+1} - 1] for j <= n, the second is shifted by k.
struct HLayout {
  std::vector<Time> cuts;
  int n = 1;
  Time k = 1;
  std::vector<Vector> t;  // one frequency per block, |t_j| <= eps0

  int blocks() const { return static_cast<int>(cuts.size()) - 1; }
  Time max_length() const;
};

/// |E e^{i(first + second)} - E e^{i first} E e^{i second}| by a complex
/// forward pass over the chain.
double condition_h_gap(const ChainSpec& chain, const HLayout& layout);

/// pi / (2 L max_j |a_{j+1} - a_j|).
double default_h_eps0(const ChainSpec& chain, const HLayout& layout);

struct HScanPoint {
  Time k = 1;
  double gap = 0.0;
};

struct HScan {
  std::vector<HScanPoint> points;
  double c_prime = 0.0;  // fitted rate in gap <= C' e^{-c' k}; +inf when every gap is zero
  double c_const = 0.0;
  bool degenerate = false;  // fewer than 2 gaps above the numerical floor
  bool decays() const { return c_prime > 0.0; }
};

/// Evaluates the gap for every k in `ks` on a fixed layout and fits the envelope.
HScan condition_h_scan(const ChainSpec& chain, HLayout layout, const std::vector<Time>& ks);

/// Layout with `n` and `m` blocks of `length` starting at `start`, frequencies
/// eps0 (1, ..., 1)/sqrt(d) with alternating sign.
HLayout standard_h_layout(const ChainSpec& chain, Time start, int n, int m, Time length,
                          std::optional<double> eps0 = std::nullopt);

struct MixingReport {
  std::vector<double> alpha;  // alpha[k-1]
  std::vector<double> phi;
  TimeRange j_range;
  std::vector<double> dobrushin;  // per j in j_range
  std::vector<double> rho;
  double delta_pi = 0.0;  // sup pi(Q_j)
  double rho_sup = 0.0;
  Envelope envelope;
};

MixingReport analyze_mixing(const ChainSpec& chain, Time k_max, std::optional<TimeRange> j_range = std::nullopt);

/// Default range of j for suprema: the chain's characteristic span, kept inside
/// the horizon so that j + k_max is addressable.
TimeRange mixing_range(const ChainSpec& chain, Time k_max);

}  // namespace asip
