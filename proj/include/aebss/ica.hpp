#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aebss/filter_matrix.hpp"
#include "aebss/signal.hpp"

namespace aebss {

using BinMatrix = Eigen::MatrixXcd;
using BinVector = Eigen::VectorXcd;

// Per-frequency-bin complex n x n matrices for an fft_size-point transform,
// one per non-redundant bin (fft_size/2 + 1 of them).
class SpectralUnmixing {
 public:
  SpectralUnmixing(std::size_t fft_size, std::vector<BinMatrix> bins);

  std::size_t fft_size() const { return fft_size_; }
  std::size_t n_channels() const { return bins_.front().rows(); }
  std::size_t bin_count() const { return bins_.size(); }
  const BinMatrix& bin(std::size_t k) const { return bins_.at(k); }
  BinMatrix& bin(std::size_t k) { return bins_.at(k); }
  const std::vector<BinMatrix>& bins() const { return bins_; }

 private:
  std::size_t fft_size_;
  std::vector<BinMatrix> bins_;
};

enum class PermutationAlignment {
  None,      // the literal per-bin algorithm
  Adjacent,  // compare each bin with its lower neighbour
  Centroid,  // compare each bin with the envelope centroid of all others
};

std::string to_string(PermutationAlignment p);
PermutationAlignment permutation_alignment_from_string(const std::string& s);

struct IcaConfig {
  std::size_t fft_size = 1024;  // also the unmixing filter length
  std::size_t hop = 0;          // 0 selects fft_size
  double learning_rate = 1e-3;  // alpha
  double momentum = 5e-4;       // eta, applied to the previous natural gradient
  std::size_t max_passes = 200;
  double convergence_tol = 1e-5;
  // Echoed into reports.  The learning loop has no random component.
  std::uint64_t seed = 0;
  PermutationAlignment permutation = PermutationAlignment::Centroid;
  bool phase_normalization = true;
  // Ridge for the mixing inversion.  Negative selects 1e-8 times the mean
  // per-bin power of the unmixing matrices.
  double ridge = -1.0;

  std::size_t effective_hop() const { return hop == 0 ? fft_size : hop; }
  void validate() const;
};

struct IcaResult {
  SpectralUnmixing unmixing;  // after step-8 post-processing
  FilterMatrix unmixing_time;
  FilterMatrix mixing_time;
  MultichannelRecord sources_estimated;
  std::size_t passes_used = 0;
  double final_update_norm = 0.0;
  bool converged = false;
  std::vector<double> pass_update_norms;  // mean |alpha dW|_F per pass
};

struct BlockUpdate {
  SpectralUnmixing unmixing;
  std::vector<BinMatrix> delta;  // natural gradient, fed back as momentum
  double mean_update_norm = 0.0;  // mean over bins of |alpha dW|_F
};

SpectralUnmixing initialize_unmixing(std::size_t n, std::size_t fft_size);

// tanh(Re u) + i tanh(Im u), elementwise.
BinVector split_tanh(const BinVector& u);

// (I - y u^H) W with u = W x and y = split_tanh(u).
BinMatrix natural_gradient(const BinMatrix& w, const BinVector& x);

// Transposes one block's channel-major spectra into per-bin n-vectors.
std::vector<BinVector> bin_vectors(const BlockSpectrum& block);

// One learning step for every bin:
//   W' = W + alpha dW + eta prev_delta.
// `pass` only labels divergence errors.
BlockUpdate ica_block_update(const SpectralUnmixing& w,
                             std::span<const BinVector> x_block, double alpha,
                             double eta, std::span<const BinMatrix> prev_delta,
                             std::size_t pass = 0);

// Reorders the outputs of each bin so that the same output tracks the same
// source across frequency.  Returns the number of permutations applied.
std::size_t align_permutations(SpectralUnmixing& w,
                               const std::vector<BlockSpectrum>& blocks,
                               PermutationAlignment mode);

// Applies one output permutation to every bin so that the mixing estimate
// W^-1 is diagonally dominant in total energy.
void order_outputs(SpectralUnmixing& w);

// Rotates each output row per bin so that diag(W^-1) is real and
// non-negative.  Magnitudes are untouched.
void normalize_diagonal_phase(SpectralUnmixing& w);

// Scales each row r uniformly over bins by 1 / max_{c,f} |W(f)[r,c]|.
SpectralUnmixing normalize_unmixing(const SpectralUnmixing& w);

// Per-bin inverse.  ridge = 0 inverts directly and rejects bins whose
// condition number exceeds 1e12; ridge > 0 uses (W^H W + ridge I)^-1 W^H.
std::vector<BinMatrix> spectral_inverse(const SpectralUnmixing& w,
                                        double ridge);

double default_ridge(const SpectralUnmixing& w);

// Inverse DFT of every entry, rotated so that tap zero_delay_tap is delay 0.
FilterMatrix to_time_domain(const SpectralUnmixing& w, FilterRole role,
                            std::size_t zero_delay_tap);

// Forward DFT of every entry, undoing the zero-delay rotation.  Tap length
// must be a power of two.
SpectralUnmixing to_spectral(const FilterMatrix& f);

// Mixing filters with the zero-delay tap at L/2.
FilterMatrix invert_to_mixing(const SpectralUnmixing& w, double ridge);

IcaResult run_ica(const MultichannelRecord& record, const IcaConfig& config);

}  // namespace aebss
