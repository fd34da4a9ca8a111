#include "sog/parallel.hpp"

#include <cstdlib>
#include <string>

namespace sog {

namespace {

unsigned threads_from_env() {
  const char* s = std::getenv("SOG_LAB_THREADS");
  if (!s || !*s) return 1;
  try {
    const long v = std::stol(s);
    return v >= 1 ? static_cast<unsigned>(v) : 1U;
  } catch (...) {
    return 1;
  }
}

std::atomic<unsigned>& current() {
  static std::atomic<unsigned> value{threads_from_env()};
  return value;
}

}  // namespace

unsigned default_threads() { return current().load(); }

void set_default_threads(unsigned threads) { current().store(threads == 0 ? 1 : threads); }

}  // namespace sog
