#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "synthkit/dataset.hpp"
#include "synthkit/estimands.hpp"

namespace synthkit {

// Generated test data with known structure.
//   x ~ U(0, 10), y = 2x + N(0, 2^2)
//   a uniform over a0..a3; b copies a's index with prob 0.9, else uniform
//   c in {low, high}, P(high) = logistic(1.5 (x - 5)); with `deterministic_c`
//   c is exactly (x > 5)
Dataset fixture_a(std::size_t n = 2000, std::uint64_t seed = 1, bool deterministic_c = false);

// Five numeric and five categorical columns with chained dependence, for timing.
Dataset mixed_fixture(std::size_t n = 1000, std::uint64_t seed = 1);

// f1 y~x, f2 y~x+a, f3 x~y+c, f4 y~c+b
std::vector<FitSpec> fixture_a_fits();

std::string fixture_a_fits_json();
std::string fixture_a_adhoc_json();

struct DemoFiles {
  std::string data;
  std::string schema;
  std::string fits;
  std::string adhoc;
  std::string config;
};

// Writes fixture-A plus schema, fit battery, ad-hoc battery and a small
// experiment config into `dir`.
DemoFiles write_demo(const std::string& dir, std::size_t n = 2000, std::uint64_t seed = 1);

}  // namespace synthkit
