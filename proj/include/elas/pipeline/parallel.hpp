#ifndef ELAS_PIPELINE_PARALLEL_HPP
#define ELAS_PIPELINE_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace elas::pipeline {

/// Worker count: ELAS_THREADS when set to a positive integer, otherwise the
/// hardware concurrency.
inline unsigned thread_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ELAS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return hw;
}

struct Failure {
  std::string task;
  std::string error;
};

/// Runs task(i) for i in [0, n) on up to thread_count() workers. Exceptions
/// are caught per task and reported in index order.
inline std::vector<Failure> parallel_for(std::size_t n, const std::function<void(std::size_t)>& task,
                                         const std::function<std::string(std::size_t)>& label) {
  std::vector<std::string> errors(n);
  std::vector<char> failed(n, 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        task(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        failed[i] = 1;
      }
    }
  };
  const auto workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  std::vector<Failure> out;
  for (std::size_t i = 0; i < n; ++i)
    if (failed[i]) out.push_back({label(i), errors[i]});
  return out;
}

inline nlohmann::json failures_to_json(const std::string& stage, const std::vector<Failure>& failures) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& f : failures) items.push_back({{"task", f.task}, {"error", f.error}});
  return {{"stage", stage}, {"failures", items}};
}

}  // namespace elas::pipeline

#endif  // ELAS_PIPELINE_PARALLEL_HPP
