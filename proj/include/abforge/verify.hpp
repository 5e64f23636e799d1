#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "abforge/network.hpp"
#include "abforge/zilep.hpp"

namespace abforge {

struct VerifyConfig {
  Vec grid_hi;                 // per-coordinate upper bounds; empty -> default
  int fuzz_schedules = 100;    // seeded-random schedules per sampled point
  int fuzz_points = 10;        // how many grid points get the fuzz treatment
  std::uint64_t seed = 0x5eed;
  std::int64_t budget_mult = 1;
  int threads = 0;  // 0: hardware choice, capped
};

struct VerifyFailure {
  Vec point;
  std::string what;
};

struct VerifyReport {
  bool pass = false;
  std::int64_t points = 0;
  std::int64_t runs = 0;
  std::int64_t fuzz_runs = 0;
  std::int64_t monotone_checks = 0;
  std::uint64_t seed = 0;
  std::optional<VerifyFailure> failure;  // lexicographically first
};

// Default oracle grid: two periods past the margin in every coordinate.
inline Vec default_grid(const ZilepFunction& f) {
  Vec hi(static_cast<std::size_t>(f.arity));
  for (int i = 0; i < f.arity; ++i)
    hi[static_cast<std::size_t>(i)] =
        2 * (f.margins[static_cast<std::size_t>(i)] +
             f.periods[static_cast<std::size_t>(i)]);
  return hi;
}

namespace detail {

template <typename Fn>
void parallel_indices(std::int64_t count, int threads, Fn&& body) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  int t = threads > 0 ? threads : std::min(hw > 0 ? hw : 2, 8);
  if (t <= 1 || count < 64) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < t; ++w)
    pool.emplace_back([&] {
      while (true) {
        std::int64_t i = next.fetch_add(1);
        if (i >= count) return;
        body(i);
      }
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Exact comparison of a network against its oracle over a grid, a weak
// monotonicity sweep of the network outputs, and schedule-order fuzzing on a
// sample of points. Failures are aggregated deterministically: the
// lexicographically first failing point wins regardless of thread timing.
inline VerifyReport verify_network(const ZilepFunction& oracle,
                                   const Network& net,
                                   const VerifyConfig& cfg = {}) {
  VerifyReport rep;
  rep.seed = cfg.seed;
  if (net.num_inputs() != oracle.arity ||
      net.num_outputs() != oracle.outputs) {
    rep.failure = VerifyFailure{{}, "arity mismatch between oracle and network"};
    return rep;
  }
  validate(net);
  Vec hi = cfg.grid_hi.empty() ? default_grid(oracle) : cfg.grid_hi;
  if (static_cast<int>(hi.size()) != oracle.arity)
    throw std::invalid_argument("verify: grid arity mismatch");
  for (int i = 0; i < oracle.arity; ++i)
    if (hi[static_cast<std::size_t>(i)] <
        oracle.margins[static_cast<std::size_t>(i)] +
            oracle.periods[static_cast<std::size_t>(i)])
      throw std::invalid_argument(
          "verify: grid must cover one full period past the margin in every "
          "coordinate");
  Box grid(Vec(hi.size()));
  for (std::size_t i = 0; i < hi.size(); ++i) grid.dims[i] = hi[i] + 1;
  const std::int64_t npoints = grid.size();
  if (npoints > kMaxBoxEntries)
    throw std::length_error("verify: grid too large");
  rep.points = npoints;
  std::vector<Vec> results(static_cast<std::size_t>(npoints));
  std::vector<std::string> errors(static_cast<std::size_t>(npoints));
  detail::parallel_indices(npoints, cfg.threads, [&](std::int64_t idx) {
    Vec x(grid.dims.size());
    std::int64_t rem = idx;
    for (std::size_t i = grid.dims.size(); i-- > 0;) {
      x[i] = rem % grid.dims[i];
      rem /= grid.dims[i];
    }
    Vec want = oracle.eval(x);
    RunResult r = run(net, x, Schedule{},
                      cfg.budget_mult * default_step_budget(net, x));
    if (!r.halted) {
      errors[static_cast<std::size_t>(idx)] = "step budget exceeded";
      return;
    }
    results[static_cast<std::size_t>(idx)] = r.output;
    if (r.output != want) {
      std::string msg = "network output (";
      for (std::size_t j = 0; j < r.output.size(); ++j)
        msg += (j ? "," : "") + std::to_string(r.output[j]);
      msg += ") differs from oracle (";
      for (std::size_t j = 0; j < want.size(); ++j)
        msg += (j ? "," : "") + std::to_string(want[j]);
      msg += ")";
      errors[static_cast<std::size_t>(idx)] = msg;
    }
  });
  rep.runs = npoints;
  for (std::int64_t idx = 0; idx < npoints; ++idx)
    if (!errors[static_cast<std::size_t>(idx)].empty()) {
      Vec x(grid.dims.size());
      std::int64_t rem = idx;
      for (std::size_t i = grid.dims.size(); i-- > 0;) {
        x[i] = rem % grid.dims[i];
        rem /= grid.dims[i];
      }
      rep.failure = VerifyFailure{x, errors[static_cast<std::size_t>(idx)]};
      return rep;
    }
  // monotone along every axis
  {
    Vec x = grid.origin();
    std::int64_t idx = 0;
    Vec stride(grid.dims.size(), 1);
    for (std::size_t i = grid.dims.size() - 1; i-- > 0;)
      stride[i] = stride[i + 1] * grid.dims[i + 1];
    do {
      for (std::size_t i = 0; i < grid.dims.size(); ++i) {
        if (x[i] + 1 >= grid.dims[i]) continue;
        ++rep.monotone_checks;
        const Vec& lo = results[static_cast<std::size_t>(idx)];
        const Vec& hi2 = results[static_cast<std::size_t>(idx + stride[i])];
        for (std::size_t j = 0; j < lo.size(); ++j)
          if (hi2[j] < lo[j]) {
            rep.failure = VerifyFailure{x, "outputs not weakly increasing"};
            return rep;
          }
      }
      ++idx;
    } while (grid.next(x));
  }
  // schedule-order fuzzing on an evenly spread sample of points
  if (cfg.fuzz_schedules > 0 && cfg.fuzz_points > 0) {
    std::int64_t sample = std::min<std::int64_t>(cfg.fuzz_points, npoints);
    std::vector<std::int64_t> chosen;
    for (std::int64_t s = 0; s < sample; ++s)
      chosen.push_back(npoints == 1 ? 0 : (s * (npoints - 1)) / (sample - 1 == 0 ? 1 : sample - 1));
    struct FuzzOutcome {
      bool bad = false;
      std::string what;
    };
    std::vector<FuzzOutcome> outcomes(chosen.size());
    detail::parallel_indices(static_cast<std::int64_t>(chosen.size()),
                             cfg.threads, [&](std::int64_t s) {
      std::int64_t idx = chosen[static_cast<std::size_t>(s)];
      Vec x(grid.dims.size());
      std::int64_t rem = idx;
      for (std::size_t i = grid.dims.size(); i-- > 0;) {
        x[i] = rem % grid.dims[i];
        rem /= grid.dims[i];
      }
      RunResult ref = run(net, x, Schedule{},
                          cfg.budget_mult * default_step_budget(net, x));
      RunResult rr = run(net, x,
                         Schedule{SchedulePolicy::round_robin, 0},
                         cfg.budget_mult * default_step_budget(net, x));
      if (rr.output != ref.output || rr.trash != ref.trash ||
          rr.final_states != ref.final_states) {
        outcomes[static_cast<std::size_t>(s)] = {
            true, "round-robin schedule changed the outcome"};
        return;
      }
      for (int fz = 0; fz < cfg.fuzz_schedules; ++fz) {
        Schedule sched{SchedulePolicy::seeded_random,
                       cfg.seed + 0x9e37 * static_cast<std::uint64_t>(fz) +
                           static_cast<std::uint64_t>(idx)};
        RunResult r = run(net, x, sched,
                          cfg.budget_mult * default_step_budget(net, x));
        if (!r.halted || r.output != ref.output || r.trash != ref.trash ||
            r.final_states != ref.final_states) {
          outcomes[static_cast<std::size_t>(s)] = {
              true,
              "schedule seed " + std::to_string(sched.seed) +
                  " changed the outcome"};
          return;
        }
      }
    });
    rep.fuzz_runs = static_cast<std::int64_t>(chosen.size()) *
                    (cfg.fuzz_schedules + 1);
    for (std::size_t s = 0; s < outcomes.size(); ++s)
      if (outcomes[s].bad) {
        Vec x(grid.dims.size());
        std::int64_t rem = chosen[s];
        for (std::size_t i = grid.dims.size(); i-- > 0;) {
          x[i] = rem % grid.dims[i];
          rem /= grid.dims[i];
        }
        rep.failure = VerifyFailure{x, outcomes[s].what};
        return rep;
      }
  }
  rep.pass = true;
  return rep;
}

}  // namespace abforge
