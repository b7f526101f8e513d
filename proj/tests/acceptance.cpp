// Runs the eleven acceptance criteria with their pinned tolerances and prints
// one line per criterion. Exit status 1 if any criterion fails.

#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "yamabe/experiments.hpp"

using namespace yamabe;

int main() {
  const int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  RemovabilityParams removability;
  removability.workers = workers;
  CompletenessParams completeness;
  completeness.workers = workers;

  const std::vector<std::pair<std::string, std::function<CriterionResult()>>> criteria{
      {"1", [] { return criterion_homothety(); }},
      {"2", [] { return criterion_power_curvature(); }},
      {"3", [] { return criterion_borderline(); }},
      {"4", [] { return criterion_derivatives(); }},
      {"5", [] { return criterion_barrier(); }},
      {"6", [&] { return criterion_removability(removability); }},
      {"7", [&] { return criterion_completeness(completeness); }},
      {"8", [] { return criterion_appendix(); }},
      {"9", [] { return criterion_annulus(); }},
      {"10", [] { return criterion_eigenvalue(); }},
      {"11", [] { return criterion_gauge(); }},
  };

  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    try {
      const CriterionResult r = fn();
      const CheckRow& h = r.headline();
      std::printf("criterion %-2s %s  %-52s %s: measured %.6g %s %.6g (%.2f s)\n", id.c_str(),
                  r.passed() ? "PASS" : "FAIL", r.title.c_str(), h.name.c_str(), h.measured, h.relation.c_str(),
                  h.threshold, r.runtime_seconds);
      if (!r.passed()) {
        for (const auto& row : r.rows) {
          std::printf("             [%s] %s: %.6g %s %.6g %s\n", row.passed ? "pass" : "fail", row.name.c_str(),
                      row.measured, row.relation.c_str(), row.threshold, row.detail.c_str());
        }
      }
      if (!r.passed()) ++failures;
    } catch (const std::exception& e) {
      std::printf("criterion %-2s FAIL  error: %s\n", id.c_str(), e.what());
      ++failures;
    }
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
