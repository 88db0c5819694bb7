// Acceptance checks.  Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aebss/error.hpp"
#include "aebss/ica.hpp"
#include "aebss/io.hpp"
#include "aebss/pipeline.hpp"
#include "oracles.hpp"

using namespace aebss;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;
std::string seed1_dump;  // pipeline report from the first seed of criterion 3

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("AC%-2d %s  %s  [%s]\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Scenario paper() {
  return scenario_from_json(parse_json_file(fs::path(AEBSS_DATA_DIR) / "paper-scenario.json"));
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

// Criteria 1 and 2: CCF location of single sources and of a 4:1 pair.
void ccf_criteria() {
  {
    bool ok = true;
    double worst_mm = 0.0, slowest = 0.0;
    for (int active = 0; active < 2; ++active)
      for (auto seed : kSeeds) {
        Scenario s = paper();
        s.seed = seed;
        s.sources[1 - active].active = false;
        const auto t0 = Clock::now();
        const auto rec = synthesize(s).record;
        const Json j = cmd_ccf(rec, s.geometry, s.locator, std::nullopt, std::nullopt);
        const double dt = elapsed(t0);
        const double err = 1000.0 * std::abs(j["location"]["coordinate_m"].get<double>() -
                                             s.sources[active].position);
        worst_mm = std::max(worst_mm, err);
        slowest = std::max(slowest, dt);
        ok = ok && err <= 100.0 && dt < 10.0;
      }
    report(1, ok, "single source at +0.1 m / +0.8 m located by CCF within 100 mm, < 10 s",
           fmt("10 runs, worst error %.3f mm, slowest %.3f s", worst_mm, slowest));
  }
  {
    bool ok = true;
    double worst_strong = 0.0, nearest_weak = 1e9;
    for (int stronger = 0; stronger < 2; ++stronger)
      for (auto seed : kSeeds) {
        Scenario s = paper();
        s.seed = seed;
        s.sources[stronger].power = 4.0;
        s.sources[1 - stronger].power = 1.0;
        const auto rec = synthesize(s).record;
        const Json j = cmd_ccf(rec, s.geometry, s.locator, std::nullopt, std::nullopt);
        const double y = j["location"]["coordinate_m"].get<double>();
        const double e_strong = 1000.0 * std::abs(y - s.sources[stronger].position);
        const double e_weak = 1000.0 * std::abs(y - s.sources[1 - stronger].position);
        worst_strong = std::max(worst_strong, e_strong);
        nearest_weak = std::min(nearest_weak, e_weak);
        ok = ok && j["location"].is_object() && e_strong <= 100.0 && e_weak > 300.0;
      }
    report(2, ok, "CCF with 4:1 powers returns one location near the stronger source only",
           fmt("10 runs, worst %.3f mm from stronger, closest %.1f mm to weaker", worst_strong,
               nearest_weak));
  }
}

// Criteria 3 and 4 share the paper-scenario pipeline runs; the first report
// is kept for criterion 10.
void ica_criteria() {
  int within = 0;
  bool delays_ok = true, fast = true;
  double slowest = 0.0;
  std::ostringstream errs, dels;
  std::string first_dump;
  for (auto seed : kSeeds) {
    Scenario s = paper();
    s.seed = seed;
    const auto t0 = Clock::now();
    const Json r = cmd_pipeline(s, *s.ica, std::nullopt);
    const double dt = elapsed(t0);
    if (seed == kSeeds.front()) first_dump = r.dump();
    slowest = std::max(slowest, dt);
    fast = fast && dt < 60.0;

    bool both = r["ica"]["error_mm"].size() == 2;
    double worst = 0.0;
    for (const auto& e : r["ica"]["error_mm"]) {
      if (e.is_null()) {
        both = false;
        continue;
      }
      worst = std::max(worst, e.get<double>());
    }
    both = both && worst <= 72.0;
    within += both ? 1 : 0;
    errs << (seed == kSeeds.front() ? "" : ",") << fmt("%.2f", worst);

    std::vector<long> got;
    for (const auto& d : r["ica"]["delays"]) got.push_back(d["delay_samples"].get<long>());
    std::sort(got.begin(), got.end());
    const bool match = got.size() == 2 && std::abs(got[0] - (-320)) <= 2 && std::abs(got[1] - (-40)) <= 2;
    delays_ok = delays_ok && match;
    dels << (seed == kSeeds.front() ? "" : " ") << "{";
    for (std::size_t i = 0; i < got.size(); ++i) dels << (i ? "," : "") << got[i];
    dels << "}";
  }
  report(3, within >= 4 && fast,
         "ICA locates both sources within 72 mm in >= 4 of 5 seeds, < 60 s per seed",
         fmt("%d/5 within, worst per seed mm [%s], slowest %.2f s", within, errs.str().c_str(), slowest));
  report(4, delays_ok, "ICA mixing-filter delays match {-40, -320} within 2 samples",
         "per seed " + dels.str());

  seed1_dump = first_dump;
}

void determinism() {
  Scenario s = paper();
  const std::string again = cmd_pipeline(s, *s.ica, std::nullopt).dump();
  report(10, !seed1_dump.empty() && again == seed1_dump,
         "pipeline report byte-identical across runs with a fixed seed",
         fmt("seed 1, %zu bytes", again.size()));
}

void update_oracle() {
  BinMatrix w(1, 1);
  w(0, 0) = 1.0;
  BinVector x(1);
  x(0) = 1.0;
  const Complex next = w(0, 0) + 0.1 * natural_gradient(w, x)(0, 0);
  // Hand evaluation: 1 + 0.1 (1 - tanh 1), quoted as 1.023841 at six decimals.
  const double hand = 1.0 + 0.1 * (1.0 - std::tanh(1.0));
  const bool scalar = std::abs(next - hand) <= 1e-9 && next.imag() == 0.0 &&
                      std::abs(next.real() - 1.023841) < 5e-7;

  // Fixed point: y conj(u) = 2 a tanh(a) = 1 exactly for u = a (1 + i).
  const double a = oracle::tanh_product_root(0.5, 0.77);
  x(0) = Complex(a, a);
  const BinMatrix dw = natural_gradient(w, x);
  const bool fixed = std::isfinite(a) && dw(0, 0) == Complex(0.0, 0.0);

  // Same step through the per-bin block update.
  const auto w0 = initialize_unmixing(2, 2);
  std::vector<BinVector> xb(2, BinVector::Zero(2));
  xb[0](0) = 1.0;
  const auto up = ica_block_update(w0, xb, 0.1, 0.0, std::vector<BinMatrix>(2, BinMatrix::Zero(2, 2)));
  const bool block = std::abs(up.unmixing.bin(0)(0, 0) - hand) <= 1e-9;

  report(5, scalar && fixed && block, "scalar update W'=1.023841 within 1e-9; fixed point gives dW = 0",
         fmt("W' = %.12f, |W' - hand value| = %.1e, fixed-point dW = %g", next.real(),
             std::abs(next - hand), std::abs(dw(0, 0))));
}

void convolution_oracle() {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> len_l(1, 64), len_t(1, 4096);
  std::normal_distribution<double> nd(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t L = len_l(rng), T = len_t(rng);
    const std::size_t z = std::uniform_int_distribution<std::size_t>(0, L - 1)(rng);
    std::vector<std::vector<std::vector<double>>> h(
        2, std::vector<std::vector<double>>(2, std::vector<double>(L)));
    for (auto& row : h)
      for (auto& f : row)
        for (auto& v : f) v = nd(rng);
    const std::vector<std::vector<double>> x{oracle::white_noise(T, rng()), oracle::white_noise(T, rng())};
    const auto got = apply_filter_matrix(oracle::filters_of(h, FilterRole::Mixing, z), oracle::record_of(x));
    const auto want = oracle::direct_convolution(h, x, static_cast<long>(z));
    double scale = 0.0;
    for (const auto& r : want)
      for (double v : r) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t t = 0; t < T; ++t)
        worst = std::max(worst, std::abs(got.channel(i)[t] - want[i][t]) / std::max(scale, 1e-300));
  }
  report(6, worst <= 1e-9, "apply_filter_matrix matches nested-loop convolution on 20 instances",
         fmt("worst relative error %.2e", worst));
}

void inversion_round_trip() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd(0.0, 1.0);
  double worst = 0.0, worst_cond = 0.0;
  std::size_t bins = 0;
  for (std::size_t N : {8u, 64u, 1024u}) {
    std::vector<BinMatrix> w;
    while (w.size() < N / 2 + 1) {
      BinMatrix m(2, 2);
      for (Eigen::Index i = 0; i < 4; ++i) m.data()[i] = {nd(rng), nd(rng)};
      Eigen::JacobiSVD<BinMatrix> svd(m);
      const double c = svd.singularValues()(0) / svd.singularValues()(1);
      if (c >= 1e3) continue;
      worst_cond = std::max(worst_cond, c);
      w.push_back(m);
    }
    const SpectralUnmixing W(N, w);
    const auto A = spectral_inverse(W, 0.0);
    for (std::size_t f = 0; f < A.size(); ++f)
      worst = std::max(worst, (A[f] * W.bin(f) - BinMatrix::Identity(2, 2)).cwiseAbs().maxCoeff());
    bins += A.size();
  }
  report(7, worst <= 1e-6, "per-bin A(f) W(f) = I after ridge-free inversion",
         fmt("%zu bins, max condition %.1f, worst deviation %.2e", bins, worst_cond, worst));
}

void ccf_properties() {
  double worst_sym = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const TimeSeries a(oracle::white_noise(1 << 14, seed), 1.0);
    const TimeSeries b(oracle::white_noise(1 << 14, seed + 50), 1.0);
    const auto r12 = cross_correlation(a, b, 256);
    const auto r21 = cross_correlation(b, a, 256);
    for (int tau = -256; tau <= 256; ++tau)
      worst_sym = std::max(worst_sym, std::abs(r12.at(tau) - r21.at(-tau)));
  }
  const auto a = oracle::white_noise(1 << 14, 99);
  int exact = 0;
  for (long d = -100; d <= 100; ++d) {
    const auto rec = oracle::record_of({a, oracle::delayed_copy(a, d)});
    const auto p = find_highest_peak(cross_correlation(rec.channel(0), rec.channel(1), 128));
    exact += p.position == d ? 1 : 0;
  }
  report(8, worst_sym <= 1e-12 && exact == 201,
         "CCF symmetry within 1e-12; delayed copy recovered for every d in [-100, 100]",
         fmt("symmetry error %.1e, %d/201 delays exact", worst_sym, exact));
}

void locator_properties() {
  const BandGeometry g;
  const auto p = build_prototypes(g, 0.1);
  const double lo = p.prototypes().front().coordinate, hi = p.prototypes().back().coordinate;
  int inside = 0;
  for (int i = 0; i < 10000; ++i) {
    const double d = -1e-3 + 2e-3 * i / 9999.0;
    const double y = grnn_locate(d, p).coordinate;
    inside += (y >= lo && y <= hi) ? 1 : 0;
  }
  auto worst = [&](double spacing) {
    const auto q = build_prototypes(g, spacing);
    double w = 0.0;
    for (int i = 0; i <= 1600; ++i) {
      const double y = -0.8 + 1.6 * i / 1600.0;
      w = std::max(w, std::abs(grnn_locate(delay_for_position(g, y), q).coordinate - y));
    }
    return w;
  };
  const double e1 = worst(0.1), e2 = worst(0.05);
  report(9, inside == 10000 && e2 < e1 && e2 <= 1.5 * 0.5 * e1,
         "GRNN output stays in the prototype hull; halving spacing halves interior error",
         fmt("%d/10000 in hull, worst interior error %.3e m at 0.1 m, %.3e m at 0.05 m", inside, e1, e2));
}

}  // namespace

int main() {
  try {
    ccf_criteria();
    ica_criteria();
    update_oracle();
    convolution_oracle();
    inversion_round_trip();
    ccf_properties();
    locator_properties();
    determinism();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
