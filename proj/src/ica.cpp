#include "aebss/ica.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "aebss/error.hpp"

namespace aebss {
namespace {

bool all_finite(const BinMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex v = m.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

// Workspace for the per-bin learning step, reused across bins and blocks.
struct UpdateScratch {
  explicit UpdateScratch(Eigen::Index n)
      : u(n), y(n), g(n, n), delta(n, n), next(n, n) {}
  BinVector u, y;
  BinMatrix g, delta, next;
};

// Writes the updated matrix into s.next and the natural gradient into
// s.delta.
void update_bin(const BinMatrix& w, const BinVector& x, double alpha,
                double eta, const BinMatrix& prev, UpdateScratch& s) {
  s.u.noalias() = w * x;
  for (Eigen::Index i = 0; i < s.u.size(); ++i)
    s.y(i) = {std::tanh(s.u(i).real()), std::tanh(s.u(i).imag())};
  s.g.noalias() = -s.y * s.u.adjoint();
  s.g.diagonal().array() += 1.0;
  s.delta.noalias() = s.g * w;
  s.next = w + alpha * s.delta + eta * prev;
}

void permute_rows(BinMatrix& m, const std::vector<std::size_t>& perm) {
  const BinMatrix old = m;
  for (std::size_t r = 0; r < perm.size(); ++r)
    m.row(static_cast<Eigen::Index>(r)) =
        old.row(static_cast<Eigen::Index>(perm[r]));
}

bool is_identity(const std::vector<std::size_t>& perm) {
  for (std::size_t i = 0; i < perm.size(); ++i)
    if (perm[i] != i) return false;
  return true;
}

// Normalized output envelopes, indexed [(k * n + i) * blocks + b].
class Envelopes {
 public:
  Envelopes(const SpectralUnmixing& w, const std::vector<BlockSpectrum>& blocks)
      : n_(w.n_channels()), k_(w.bin_count()), b_(blocks.size()),
        data_(n_ * k_ * b_, 0.0) {
    BinVector x(static_cast<Eigen::Index>(n_));
    for (std::size_t b = 0; b < b_; ++b)
      for (std::size_t k = 0; k < k_; ++k) {
        for (std::size_t i = 0; i < n_; ++i)
          x(static_cast<Eigen::Index>(i)) = blocks[b][i][k];
        const BinVector u = w.bin(k) * x;
        for (std::size_t i = 0; i < n_; ++i)
          at(k, i)[b] = std::abs(u(static_cast<Eigen::Index>(i)));
      }
    for (std::size_t k = 0; k < k_; ++k)
      for (std::size_t i = 0; i < n_; ++i) {
        auto e = at(k, i);
        const double mean =
            std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(b_);
        double norm = 0.0;
        for (double& v : e) {
          v -= mean;
          norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm > 0.0)
          for (double& v : e) v /= norm;
      }
  }

  std::span<double> at(std::size_t k, std::size_t i) {
    return {data_.data() + (k * n_ + i) * b_, b_};
  }

  std::size_t blocks() const { return b_; }

  void permute(std::size_t k, const std::vector<std::size_t>& perm) {
    std::vector<double> old(data_.begin() + static_cast<long>(k * n_ * b_),
                            data_.begin() + static_cast<long>((k + 1) * n_ * b_));
    for (std::size_t r = 0; r < n_; ++r)
      std::copy_n(old.begin() + static_cast<long>(perm[r] * b_), b_,
                  at(k, r).begin());
  }

  // Output permutation of bin k best matching the reference envelopes
  // ref[i * blocks + b].  Identity wins ties.
  std::vector<std::size_t> best_permutation(std::size_t k,
                                            std::span<const double> ref) {
    std::vector<std::size_t> perm(n_);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> best = perm;
    double best_score = -std::numeric_limits<double>::infinity();
    do {
      double score = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        const auto e = at(k, perm[i]);
        for (std::size_t b = 0; b < b_; ++b) score += ref[i * b_ + b] * e[b];
      }
      if (score > best_score) {
        best_score = score;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }

  void accumulate(std::size_t k, std::vector<double>& target, double sign) {
    for (std::size_t i = 0; i < n_; ++i) {
      const auto e = at(k, i);
      for (std::size_t b = 0; b < b_; ++b) target[i * b_ + b] += sign * e[b];
    }
  }

 private:
  std::size_t n_, k_, b_;
  std::vector<double> data_;
};

BinMatrix checked_inverse(const BinMatrix& m) {
  Eigen::FullPivLU<BinMatrix> lu(m);
  if (!lu.isInvertible()) return BinMatrix::Zero(m.rows(), m.cols());
  return lu.inverse();
}

}  // namespace

SpectralUnmixing::SpectralUnmixing(std::size_t fft_size,
                                   std::vector<BinMatrix> bins)
    : fft_size_(fft_size), bins_(std::move(bins)) {
  if (!is_power_of_two(fft_size_))
    throw ParameterError("fft_size must be a power of two");
  if (bins_.size() != fft_size_ / 2 + 1)
    throw DimensionError("SpectralUnmixing: expected fft_size/2+1 bins");
  const auto n = bins_.front().rows();
  if (n < 2) throw DimensionError("SpectralUnmixing: need n >= 2");
  for (const auto& b : bins_) {
    if (b.rows() != n || b.cols() != n)
      throw DimensionError("SpectralUnmixing: bins must be square and equal");
    if (!all_finite(b))
      throw ParameterError("SpectralUnmixing: non-finite entry");
  }
}

std::string to_string(PermutationAlignment p) {
  switch (p) {
    case PermutationAlignment::None: return "none";
    case PermutationAlignment::Adjacent: return "adjacent";
    case PermutationAlignment::Centroid: return "centroid";
  }
  return "none";
}

PermutationAlignment permutation_alignment_from_string(const std::string& s) {
  if (s == "none") return PermutationAlignment::None;
  if (s == "adjacent") return PermutationAlignment::Adjacent;
  if (s == "centroid") return PermutationAlignment::Centroid;
  throw FormatError("unknown permutation alignment '" + s + "'");
}

void IcaConfig::validate() const {
  if (!is_power_of_two(fft_size) || fft_size < 2)
    throw ParameterError("fft_size must be a power of two >= 2");
  if (effective_hop() > fft_size)
    throw ParameterError("hop must not exceed fft_size");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ParameterError("learning_rate must be finite and >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw ParameterError("momentum must lie in [0, 1)");
  if (max_passes < 1) throw ParameterError("max_passes must be >= 1");
  if (!(convergence_tol > 0.0))
    throw ParameterError("convergence_tol must be positive");
  if (!std::isfinite(ridge)) throw ParameterError("ridge must be finite");
}

SpectralUnmixing initialize_unmixing(std::size_t n, std::size_t fft_size) {
  if (n < 2) throw DimensionError("initialize_unmixing: need n >= 2");
  if (!is_power_of_two(fft_size))
    throw ParameterError("initialize_unmixing: fft_size must be a power of two");
  const auto m = static_cast<Eigen::Index>(n);
  return SpectralUnmixing(
      fft_size, std::vector<BinMatrix>(fft_size / 2 + 1, BinMatrix::Identity(m, m)));
}

BinVector split_tanh(const BinVector& u) {
  BinVector y(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    y(i) = {std::tanh(u(i).real()), std::tanh(u(i).imag())};
  return y;
}

BinMatrix natural_gradient(const BinMatrix& w, const BinVector& x) {
  if (w.cols() != x.size())
    throw DimensionError("natural_gradient: matrix/vector size mismatch");
  const BinVector u = w * x;
  const BinVector y = split_tanh(u);
  BinMatrix g = BinMatrix::Identity(w.rows(), w.rows()) - y * u.adjoint();
  return g * w;
}

std::vector<BinVector> bin_vectors(const BlockSpectrum& block) {
  const std::size_t n = block.size();
  const std::size_t k = block.front().size();
  std::vector<BinVector> out(k, BinVector(static_cast<Eigen::Index>(n)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < k; ++f)
      out[f](static_cast<Eigen::Index>(i)) = block[i][f];
  return out;
}

BlockUpdate ica_block_update(const SpectralUnmixing& w,
                             std::span<const BinVector> x_block, double alpha,
                             double eta, std::span<const BinMatrix> prev_delta,
                             std::size_t pass) {
  const std::size_t k = w.bin_count();
  const auto n = static_cast<Eigen::Index>(w.n_channels());
  if (x_block.size() != k || prev_delta.size() != k)
    throw DimensionError("ica_block_update: bin count mismatch");
  std::vector<BinMatrix> next(k), delta(k);
  UpdateScratch s(n);
  double norm_acc = 0.0;
  for (std::size_t f = 0; f < k; ++f) {
    if (x_block[f].size() != n || prev_delta[f].rows() != n ||
        prev_delta[f].cols() != n)
      throw DimensionError("ica_block_update: dimension mismatch at bin " +
                           std::to_string(f));
    update_bin(w.bin(f), x_block[f], alpha, eta, prev_delta[f], s);
    if (!all_finite(s.next) || !all_finite(s.delta))
      throw DivergenceError("ICA diverged at bin " + std::to_string(f) +
                                " in pass " + std::to_string(pass) +
                                "; try a smaller learning_rate",
                            f, pass);
    next[f] = s.next;
    delta[f] = s.delta;
    norm_acc += alpha * s.delta.norm();
  }
  return {SpectralUnmixing(w.fft_size(), std::move(next)), std::move(delta),
          norm_acc / static_cast<double>(k)};
}

std::size_t align_permutations(SpectralUnmixing& w,
                               const std::vector<BlockSpectrum>& blocks,
                               PermutationAlignment mode) {
  if (mode == PermutationAlignment::None || blocks.empty()) return 0;
  const std::size_t n = w.n_channels();
  const std::size_t k = w.bin_count();
  Envelopes env(w, blocks);
  const std::size_t nb = env.blocks();
  std::size_t applied = 0;

  auto apply = [&](std::size_t f, const std::vector<std::size_t>& perm) {
    permute_rows(w.bin(f), perm);
    env.permute(f, perm);
    ++applied;
  };

  if (mode == PermutationAlignment::Adjacent) {
    std::vector<double> ref(n * nb);
    for (std::size_t f = 1; f < k; ++f) {
      std::fill(ref.begin(), ref.end(), 0.0);
      env.accumulate(f - 1, ref, 1.0);
      const auto perm = env.best_permutation(f, ref);
      if (!is_identity(perm)) apply(f, perm);
    }
  } else {
    // Greedy pass from the most energetic bin down, then leave-one-out
    // refinement against the centroid of all other bins.
    std::vector<double> power(k, 0.0);
    for (const auto& blk : blocks)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = 0; f < k; ++f) power[f] += std::norm(blk[i][f]);
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return power[a] > power[b];
    });

    std::vector<double> centroid(n * nb, 0.0);
    for (std::size_t f : order) {
      const auto perm = env.best_permutation(f, centroid);
      if (!is_identity(perm)) apply(f, perm);
      env.accumulate(f, centroid, 1.0);
    }
    constexpr int kMaxSweeps = 20;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      std::size_t changes = 0;
      for (std::size_t f = 0; f < k; ++f) {
        env.accumulate(f, centroid, -1.0);
        const auto perm = env.best_permutation(f, centroid);
        if (!is_identity(perm)) {
          apply(f, perm);
          ++changes;
        }
        env.accumulate(f, centroid, 1.0);
      }
      if (changes == 0) break;
    }
  }
  return applied;
}

void order_outputs(SpectralUnmixing& w) {
  const std::size_t n = w.n_channels();
  BinMatrix energy = BinMatrix::Zero(static_cast<Eigen::Index>(n),
                                     static_cast<Eigen::Index>(n));
  for (const auto& b : w.bins()) {
    const BinMatrix a = checked_inverse(b);
    if (all_finite(a)) energy += a.cwiseAbs2().cast<Complex>();
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_score = -1.0;
  do {
    // Column j of the reordered mixing estimate is old column perm[j].
    double score = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      score += energy(static_cast<Eigen::Index>(j),
                      static_cast<Eigen::Index>(perm[j])).real();
    if (score > best_score) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (is_identity(best)) return;
  for (std::size_t f = 0; f < w.bin_count(); ++f) permute_rows(w.bin(f), best);
}

void normalize_diagonal_phase(SpectralUnmixing& w) {
  for (std::size_t f = 0; f < w.bin_count(); ++f) {
    BinMatrix& m = w.bin(f);
    const BinMatrix a = checked_inverse(m);
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
      const Complex d = a(j, j);
      const double mag = std::abs(d);
      if (mag > 0.0 && std::isfinite(mag)) m.row(j) *= d / mag;
    }
  }
}

SpectralUnmixing normalize_unmixing(const SpectralUnmixing& w) {
  std::vector<BinMatrix> bins = w.bins();
  const auto n = static_cast<Eigen::Index>(w.n_channels());
  for (Eigen::Index r = 0; r < n; ++r) {
    double peak = 0.0;
    for (const auto& b : bins) peak = std::max(peak, b.row(r).cwiseAbs().maxCoeff());
    if (peak == 0.0)
      throw DegenerateError("normalize_unmixing: row " + std::to_string(r) +
                            " is zero in every bin");
    for (auto& b : bins) b.row(r) /= peak;
  }
  return SpectralUnmixing(w.fft_size(), std::move(bins));
}

double default_ridge(const SpectralUnmixing& w) {
  double acc = 0.0;
  for (const auto& b : w.bins()) acc += b.squaredNorm();
  return 1e-8 * acc /
         (static_cast<double>(w.bin_count()) * static_cast<double>(w.n_channels()));
}

std::vector<BinMatrix> spectral_inverse(const SpectralUnmixing& w,
                                        double ridge) {
  if (!(ridge >= 0.0)) throw ParameterError("ridge must be >= 0");
  constexpr double kMaxCondition = 1e12;
  std::vector<BinMatrix> out;
  out.reserve(w.bin_count());
  for (std::size_t f = 0; f < w.bin_count(); ++f) {
    const BinMatrix& m = w.bin(f);
    if (ridge == 0.0) {
      Eigen::JacobiSVD<BinMatrix> svd(m);
      const auto& sv = svd.singularValues();
      const double smin = sv(sv.size() - 1);
      if (!(smin > 0.0) || sv(0) / smin > kMaxCondition)
        throw IllConditionedError(
            "bin " + std::to_string(f) +
                " is ill-conditioned for inversion (condition number > 1e12)",
            f);
      out.push_back(Eigen::FullPivLU<BinMatrix>(m).inverse());
    } else {
      const BinMatrix gram =
          m.adjoint() * m + ridge * BinMatrix::Identity(m.rows(), m.cols());
      out.push_back(gram.ldlt().solve(m.adjoint()));
    }
  }
  return out;
}

FilterMatrix to_time_domain(const SpectralUnmixing& w, FilterRole role,
                            std::size_t zero_delay_tap) {
  const std::size_t N = w.fft_size();
  const std::size_t n = w.n_channels();
  if (zero_delay_tap >= N) throw ParameterError("zero_delay_tap out of range");
  RealFft fft(N);
  std::vector<Complex> spec(w.bin_count());
  std::vector<double> taps(N);
  std::vector<FirFilter> entries;
  entries.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t f = 0; f < w.bin_count(); ++f)
        spec[f] = w.bin(f)(static_cast<Eigen::Index>(i),
                           static_cast<Eigen::Index>(j));
      fft.inverse(spec, taps);
      std::vector<double> rotated(N);
      for (std::size_t t = 0; t < N; ++t) rotated[(t + zero_delay_tap) % N] = taps[t];
      entries.emplace_back(std::move(rotated));
    }
  return FilterMatrix(n, std::move(entries), role, zero_delay_tap);
}

SpectralUnmixing to_spectral(const FilterMatrix& f) {
  const std::size_t N = f.tap_length();
  if (!is_power_of_two(N))
    throw ParameterError("to_spectral: tap length must be a power of two");
  const std::size_t n = f.n();
  const std::size_t z = f.zero_delay_tap();
  RealFft fft(N);
  std::vector<BinMatrix> bins(N / 2 + 1,
                              BinMatrix::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n)));
  std::vector<double> taps(N);
  std::vector<Complex> spec(N / 2 + 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto h = f.at(i, j).taps();
      for (std::size_t t = 0; t < N; ++t) taps[t] = h[(t + z) % N];
      fft.forward(taps, spec);
      for (std::size_t k = 0; k < spec.size(); ++k)
        bins[k](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = spec[k];
    }
  return SpectralUnmixing(N, std::move(bins));
}

FilterMatrix invert_to_mixing(const SpectralUnmixing& w, double ridge) {
  SpectralUnmixing a(w.fft_size(), spectral_inverse(w, ridge));
  return to_time_domain(a, FilterRole::Mixing, w.fft_size() / 2);
}

IcaResult run_ica(const MultichannelRecord& record, const IcaConfig& config) {
  config.validate();
  const std::size_t N = config.fft_size;
  if (record.length() < N)
    throw ParameterError("record of " + std::to_string(record.length()) +
                         " samples is shorter than fft_size " + std::to_string(N));

  // Step 1: mean removal.  Step 2: identity initialization.
  const MultichannelRecord x = remove_mean(record);
  SpectralUnmixing w = initialize_unmixing(x.n_channels(), N);
  const std::size_t k = w.bin_count();
  const auto n = static_cast<Eigen::Index>(x.n_channels());

  // Step 3: block spectra, computed once and reused on every pass.
  const auto blocks = block_spectra(x, N, config.effective_hop());
  std::vector<std::vector<BinVector>> per_bin;
  per_bin.reserve(blocks.size());
  for (const auto& b : blocks) per_bin.push_back(bin_vectors(b));

  const double alpha = config.learning_rate;
  const double eta = config.momentum;
  std::vector<BinMatrix> prev(k, BinMatrix::Zero(n, n));
  UpdateScratch s(n);

  std::vector<double> pass_norms;
  bool converged = false;
  // A zero learning rate disables learning; the initialization is returned.
  if (alpha > 0.0) {
    for (std::size_t pass = 0; pass < config.max_passes; ++pass) {
      double acc = 0.0;
      // Steps 4-7: filter, nonlinearity, natural-gradient step, next block.
      for (const auto& xb : per_bin) {
        for (std::size_t f = 0; f < k; ++f) {
          update_bin(w.bin(f), xb[f], alpha, eta, prev[f], s);
          if (!all_finite(s.next))
            throw DivergenceError("ICA diverged at bin " + std::to_string(f) +
                                      " in pass " + std::to_string(pass + 1) +
                                      "; try a smaller learning_rate",
                                  f, pass + 1);
          w.bin(f) = s.next;
          prev[f] = s.delta;
          acc += alpha * s.delta.norm();
        }
      }
      pass_norms.push_back(acc / static_cast<double>(k * per_bin.size()));
      if (pass_norms.back() < config.convergence_tol) {
        converged = true;
        break;
      }
    }

    // Step 8: resolve the per-bin permutation and phase ambiguities, then
    // normalize.
    align_permutations(w, blocks, config.permutation);
    order_outputs(w);
    if (config.phase_normalization) normalize_diagonal_phase(w);
    w = normalize_unmixing(w);
  }

  const double ridge = config.ridge < 0.0 ? default_ridge(w) : config.ridge;
  FilterMatrix unmixing_time = to_time_domain(w, FilterRole::Unmixing, N / 2);
  FilterMatrix mixing_time = invert_to_mixing(w, ridge);
  // Step 9.
  MultichannelRecord sources = apply_filter_matrix(unmixing_time, x);

  IcaResult result{std::move(w),
                   std::move(unmixing_time),
                   std::move(mixing_time),
                   std::move(sources),
                   pass_norms.size(),
                   pass_norms.empty() ? 0.0 : pass_norms.back(),
                   converged,
                   std::move(pass_norms)};
  return result;
}

}  // namespace aebss
