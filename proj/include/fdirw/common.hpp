#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fdirw {

/// Worker budget for the data-parallel kernels. Every kernel in the library
/// produces bit-identical results for any value of `workers`.
struct Exec {
  int workers = 1;
};

template <class F>
void parallel_for(const Exec& exec, std::size_t n, F&& body) {
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for num_threads(exec.workers) schedule(static) if (exec.workers > 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    body(static_cast<std::size_t>(i));
  }
}

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fdirw
