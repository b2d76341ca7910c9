/**
 * @file acceptance.cpp
 * @brief Runs the eleven acceptance checks and prints one PASS/FAIL line each.
 *
 * Exit status is zero only when every check passes.
 */
#include <cstdio>

#include "qfl/acceptance.hpp"

int main() {
  int failed = 0;
  const auto results = qfl::run_acceptance({}, [&](const qfl::CriterionResult& r) {
    std::printf("[%s] criterion %2d: %-36s (%.2f s) %s\n", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str(),
                r.seconds, r.error.empty() ? r.metrics.dump().c_str() : ("error: " + r.error).c_str());
    std::fflush(stdout);
    if (!r.pass) ++failed;
  });
  std::printf("%zu/%zu criteria passed\n", results.size() - static_cast<std::size_t>(failed), results.size());
  return failed == 0 ? 0 : 1;
}
