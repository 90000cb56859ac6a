#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "velab/numerics.hpp"
#include "velab/quadrature.hpp"

using namespace velab;

TEST_SUITE("numerics") {

TEST_CASE("splitmix64 matches the reference sequence from state 0") {
  std::uint64_t state = 0;
  CHECK(splitmix64(state) == 0xe220a8397b1dcdafull);
  CHECK(splitmix64(state) == 0x6e789e6aa1b965f4ull);
  CHECK(splitmix64(state) == 0x06c45d188009454full);
}

TEST_CASE("make_stream is a pure function of (seed, index)") {
  auto a = make_stream(42, 7);
  auto b = make_stream(42, 7);
  for (int k = 0; k < 16; ++k) CHECK(a() == b());

  auto c = make_stream(42, 8);
  auto d = make_stream(43, 7);
  bool differs_index = false, differs_seed = false;
  auto a2 = make_stream(42, 7);
  for (int k = 0; k < 16; ++k) {
    std::uint64_t ref = a2();
    differs_index = differs_index || (c() != ref);
    differs_seed = differs_seed || (d() != ref);
  }
  CHECK(differs_index);
  CHECK(differs_seed);
}

TEST_CASE("reserved subsystem streams are mutually distinct") {
  std::uint64_t seed = 123;
  auto net = make_stream(seed, kStreamNetInit);
  auto data = make_stream(seed, kStreamBatchData);
  auto noise = make_stream(seed, kStreamBatchNoise);
  auto item = make_stream(seed, 0);
  std::vector<std::uint64_t> firsts = {net(), data(), noise(), item()};
  for (std::size_t i = 0; i < firsts.size(); ++i)
    for (std::size_t j = i + 1; j < firsts.size(); ++j) CHECK(firsts[i] != firsts[j]);
}

TEST_CASE("kahan_total sums exactly on representable cases") {
  CHECK(kahan_total({}) == 0.0);
  CHECK(kahan_total({3.5}) == 3.5);
  CHECK(kahan_total({1.0, 2.0, 3.0, 4.0}) == 10.0);
}

TEST_CASE("kahan_total beats naive accumulation across magnitudes") {
  // sum_{k=1}^{10^5} 1/k^2 in descending order, which naive addition gets
  // wrong in the last few digits; reference from long double accumulation.
  std::vector<double> terms;
  long double ref = 0.0L;
  for (int k = 1; k <= 100000; ++k) {
    double t = 1.0 / (double(k) * double(k));
    terms.push_back(t);
    ref += static_cast<long double>(t);
  }
  double naive = 0.0;
  for (double t : terms) naive += t;
  double sorted = kahan_total(terms, true);
  double ref_d = static_cast<double>(ref);
  CHECK(std::fabs(sorted - ref_d) <= std::fabs(naive - ref_d));
  CHECK(relative_error(sorted, ref_d) < 1e-15);
}

TEST_CASE("relative_error semantics") {
  CHECK(relative_error(0.0, 0.0) == 0.0);
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(relative_error(1e-20, 0.0, 1.0) == doctest::Approx(1e-20));
}

TEST_CASE("parallel_for covers every index exactly once and is thread-count invariant") {
  const int count = 1000;
  for (int threads : {1, 4}) {
    std::vector<std::atomic<int>> hits(count);
    parallel_for(count, threads, [&](std::int64_t i) { hits[i].fetch_add(1); });
    for (int i = 0; i < count; ++i) CHECK(hits[i].load() == 1);
  }
}

TEST_CASE("parallel_for rethrows a worker exception") {
  auto boom = [&](std::int64_t i) {
    if (i == 37) throw std::runtime_error("worker 37 failed");
  };
  CHECK_THROWS_AS(parallel_for(100, 4, boom), std::runtime_error);
  CHECK_THROWS_AS(parallel_for(100, 1, boom), std::runtime_error);
}

TEST_CASE("adaptive_simpson integrates smooth functions to tolerance") {
  auto sq = [](double x) { return x * x; };
  CHECK(relative_error(adaptive_simpson(sq, 0.0, 1.0), 1.0 / 3.0) < 1e-12);
  auto expf = [](double x) { return std::exp(x); };
  CHECK(relative_error(adaptive_simpson(expf, 0.0, 1.0), std::exp(1.0) - 1.0) < 1e-12);
  auto lin = [](double x) { return 2.0 * x - 1.0; };
  CHECK(adaptive_simpson(lin, -3.0, 3.0) == doctest::Approx(-6.0));
}

TEST_CASE("adaptive_simpson reports budget exhaustion") {
  auto nasty = [](double x) { return std::sin(1.0 / (x + 1e-12)); };
  CHECK_THROWS_AS(adaptive_simpson(nasty, 0.0, 1.0, 1e-14, 64), std::runtime_error);
}

}  // TEST_SUITE
