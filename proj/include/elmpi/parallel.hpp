#pragma once

#include <algorithm>
#include <thread>
#include <vector>

#include "elmpi/core_linalg.hpp"

namespace elmpi {

/// Worker cap: ELM_PI_THREADS caps parallelism, default = available cores.
int worker_count();

namespace detail {

struct BatchPlan {
  Index n_rows;
  Index batch_rows;
  Index n_batches;
  int workers;

  BatchPlan(Index rows, Index batch, int max_workers);
  // Batch b covers rows [start(b), start(b) + size(b)).
  Index start(Index b) const { return b * batch_rows; }
  Index size(Index b) const { return std::min(batch_rows, n_rows - start(b)); }
  // Contiguous batch range [lo, hi) owned by worker w.
  std::pair<Index, Index> worker_span(int w) const;
};

}  // namespace detail

/// Runs fn(state, row_start, row_count) over row batches of at most
/// batch_rows. Workers own contiguous batch ranges and private states built
/// by make(); partial states merge in worker order, so the reduction order is
/// fixed by (n_rows, batch_rows, worker count) alone.
template <typename State, typename Make, typename BatchFn, typename Merge>
State batched_reduce(Index n_rows, Index batch_rows, Make make, BatchFn fn,
                     Merge merge) {
  detail::BatchPlan plan(n_rows, batch_rows, worker_count());
  if (plan.workers <= 1) {
    State state = make();
    for (Index b = 0; b < plan.n_batches; ++b)
      fn(state, plan.start(b), plan.size(b));
    return state;
  }
  std::vector<State> partials;
  partials.reserve(plan.workers);
  for (int w = 0; w < plan.workers; ++w) partials.push_back(make());
  std::vector<std::exception_ptr> errors(plan.workers);
  std::vector<std::thread> threads;
  threads.reserve(plan.workers);
  for (int w = 0; w < plan.workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        auto [lo, hi] = plan.worker_span(w);
        for (Index b = lo; b < hi; ++b)
          fn(partials[w], plan.start(b), plan.size(b));
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const std::exception_ptr& error : errors)
    if (error) std::rethrow_exception(error);
  State result = std::move(partials.front());
  for (int w = 1; w < plan.workers; ++w) merge(result, partials[w]);
  return result;
}

/// Parallel batch loop for disjoint-output work (no reduction state).
template <typename BatchFn>
void batched_for(Index n_rows, Index batch_rows, BatchFn fn) {
  batched_reduce<int>(
      n_rows, batch_rows, [] { return 0; },
      [&](int&, Index start, Index rows) { fn(start, rows); }, [](int&, int) {});
}

}  // namespace elmpi
