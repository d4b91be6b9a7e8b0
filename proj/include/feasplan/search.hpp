#pragma once

#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "feasplan/core.hpp"

namespace feasplan {

using StateKey = std::uint64_t;

enum class SearchStatus { kFound, kNoPathExists, kIterationLimit, kTimeLimit };

inline const char* to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::kFound: return "found";
    case SearchStatus::kNoPathExists: return "no_path_exists";
    case SearchStatus::kIterationLimit: return "iteration_limit";
    case SearchStatus::kTimeLimit: return "time_limit";
  }
  return "unknown";
}

struct SearchLimits {
  std::size_t max_iterations = 2'000'000;
  double max_planning_time = 30.0;  // seconds
  double goal_xy_tolerance = 0.0;   // meters; 0 means "same cell"
  double goal_heading_tolerance = 0.0;
  // Analytic expansion is attempted every ceil(h / (analytic_ratio * primitive_length)) expansions.
  double analytic_ratio = 3.5;
};

template <typename State>
struct Successor {
  State state;
  double cost = 0.0;  // traversal cost including penalties
  int motion = -1;    // primitive / move id used to reach `state`
};

// What a node planner type has to provide to the search engine.
template <typename G>
concept NodeGraph = requires(G& g, const G& cg, const typename G::State& s,
                             std::vector<Successor<typename G::State>>& out) {
  typename G::State;
  { cg.key(s) } -> std::convertible_to<StateKey>;
  { g.expand(s, int{}, out) };
  { g.heuristic(s) } -> std::convertible_to<double>;
  { cg.is_goal(s) } -> std::convertible_to<bool>;
  { cg.dense_key_space() } -> std::convertible_to<std::size_t>;
};

// Optional capability: closed-form completion to the goal.
template <typename G>
concept AnalyticNodeGraph = NodeGraph<G> && requires(G& g, const G& cg, const typename G::State& s) {
  typename G::Suffix;
  { g.try_analytic_expansion(s, int{}, double{}) } -> std::same_as<std::optional<typename G::Suffix>>;
  { cg.primitive_length() } -> std::convertible_to<double>;
};

namespace detail {
struct NoSuffix {};
template <typename G>
struct SuffixOf {
  using type = NoSuffix;
};
template <AnalyticNodeGraph G>
struct SuffixOf<G> {
  using type = typename G::Suffix;
};
}  // namespace detail

template <typename G>
struct SearchResult {
  using State = typename G::State;
  using Suffix = typename detail::SuffixOf<G>::type;

  SearchStatus status = SearchStatus::kNoPathExists;
  std::vector<StateKey> path_keys;  // root first
  std::vector<State> path_states;
  std::vector<int> motions;       // incoming motion per path state (-1 at the root)
  std::vector<double> g_values;   // accumulated cost per path state
  std::optional<Suffix> analytic_suffix;
  double goal_cost = 0.0;         // last g plus the suffix cost, if any
  std::size_t expansions = 0;
  std::size_t analytic_attempts = 0;
  // Number of times a successor reached an already-closed state with a strictly
  // lower g. Zero whenever the heuristic is consistent.
  std::size_t closed_improvements = 0;

  bool found() const { return status == SearchStatus::kFound; }
};

// Follows parent links from `goal` to the root. `parent_of(key)` must return
// std::optional<StateKey> (nullopt at the root) or throw when the key is unknown.
template <typename ParentFn>
std::vector<StateKey> trace_back(StateKey goal, ParentFn&& parent_of, std::size_t max_length) {
  std::vector<StateKey> chain{goal};
  std::optional<StateKey> cur = parent_of(goal);
  while (cur) {
    if (chain.size() > max_length) throw InvariantViolation("cycle in parent chain");
    chain.push_back(*cur);
    cur = parent_of(*cur);
  }
  return {chain.rbegin(), chain.rend()};
}

inline std::vector<StateKey> trace_back(
    const std::unordered_map<StateKey, std::optional<StateKey>>& closed_set, StateKey goal) {
  return trace_back(
      goal,
      [&](StateKey k) {
        const auto it = closed_set.find(k);
        if (it == closed_set.end()) throw InvariantViolation("broken parent chain");
        return it->second;
      },
      closed_set.size());
}

// Best-first search over the graph provided by a node planner type. The open
// list is a binary heap with lazy deletion; ties on f prefer the larger g, then
// the smaller state key.
template <NodeGraph G>
SearchResult<G> a_star(G& graph, const typename G::State& start, const SearchLimits& limits) {
  using State = typename G::State;
  using Clock = std::chrono::steady_clock;

  struct Record {
    StateKey key;
    State state;
    double g;
    std::int32_t parent;
    int motion;
    bool closed;
  };
  struct Entry {
    double f;
    double g;
    StateKey key;
    std::int32_t idx;
  };
  struct Worse {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.f != b.f) return a.f > b.f;
      if (a.g != b.g) return a.g < b.g;
      return a.key > b.key;
    }
  };

  SearchResult<G> result;
  const auto t0 = Clock::now();

  std::vector<Record> pool;
  const std::size_t dense = graph.dense_key_space();
  std::vector<std::int32_t> dense_index(dense, -1);
  std::unordered_map<StateKey, std::int32_t> hashed_index;
  if (dense == 0) hashed_index.reserve(1 << 16);

  auto lookup = [&](StateKey k) -> std::int32_t {
    if (dense) return dense_index[k];
    const auto it = hashed_index.find(k);
    return it == hashed_index.end() ? -1 : it->second;
  };
  auto insert = [&](Record r) -> std::int32_t {
    const auto idx = static_cast<std::int32_t>(pool.size());
    if (dense) dense_index[r.key] = idx;
    else hashed_index.emplace(r.key, idx);
    pool.push_back(std::move(r));
    return idx;
  };

  auto finish = [&](std::int32_t goal_idx) {
    const auto keys = trace_back(
        pool[goal_idx].key,
        [&](StateKey k) -> std::optional<StateKey> {
          const auto idx = lookup(k);
          if (idx < 0) throw InvariantViolation("broken parent chain");
          const auto parent = pool[idx].parent;
          if (parent < 0) return std::nullopt;
          return pool[parent].key;
        },
        pool.size());
    result.path_keys = keys;
    for (const StateKey k : keys) {
      const Record& r = pool[lookup(k)];
      result.path_states.push_back(r.state);
      result.motions.push_back(r.motion);
      result.g_values.push_back(r.g);
    }
    result.goal_cost = pool[goal_idx].g;
    result.status = SearchStatus::kFound;
  };

  std::priority_queue<Entry, std::vector<Entry>, Worse> open;
  {
    const StateKey k = graph.key(start);
    const double h = graph.heuristic(start);
    const auto idx = insert(Record{k, start, 0.0, -1, -1, false});
    if (std::isinf(h)) {
      result.status = SearchStatus::kNoPathExists;
      return result;
    }
    open.push(Entry{h, 0.0, k, idx});
  }

  std::vector<Successor<State>> successors;
  std::size_t since_analytic = 0;
  std::size_t iterations = 0;

  while (!open.empty()) {
    const Entry top = open.top();
    open.pop();
    Record& rec = pool[top.idx];
    if (rec.closed || top.g > rec.g) continue;

    if (graph.is_goal(rec.state)) {
      finish(top.idx);
      return result;
    }

    if (++iterations > limits.max_iterations) {
      result.status = SearchStatus::kIterationLimit;
      return result;
    }
    if ((iterations & 255u) == 0 &&
        std::chrono::duration<double>(Clock::now() - t0).count() > limits.max_planning_time) {
      result.status = SearchStatus::kTimeLimit;
      return result;
    }

    if constexpr (AnalyticNodeGraph<G>) {
      const double h = top.f - top.g;
      const double step = limits.analytic_ratio * graph.primitive_length();
      const auto interval =
          static_cast<std::size_t>(std::max(1.0, std::ceil(h / std::max(step, 1e-9))));
      if (++since_analytic >= interval) {
        since_analytic = 0;
        ++result.analytic_attempts;
        auto suffix = graph.try_analytic_expansion(rec.state, rec.motion, rec.g);
        if (suffix) {
          finish(top.idx);
          result.goal_cost += suffix->cost;
          result.analytic_suffix = std::move(suffix);
          return result;
        }
      }
    }

    rec.closed = true;
    ++result.expansions;
    const State cur_state = rec.state;
    const int cur_motion = rec.motion;
    const double cur_g = rec.g;
    successors.clear();
    graph.expand(cur_state, cur_motion, successors);

    for (auto& succ : successors) {
      const double g = cur_g + succ.cost;
      const StateKey k = graph.key(succ.state);
      const std::int32_t idx = lookup(k);
      if (idx >= 0) {
        Record& other = pool[idx];
        if (other.closed) {
          if (g < other.g - 1e-12 * std::max(1.0, other.g)) ++result.closed_improvements;
          continue;
        }
        if (g >= other.g) continue;
        const double h = graph.heuristic(succ.state);
        if (std::isinf(h)) continue;
        other.state = succ.state;
        other.g = g;
        other.parent = top.idx;
        other.motion = succ.motion;
        open.push(Entry{g + h, g, k, idx});
      } else {
        const double h = graph.heuristic(succ.state);
        if (std::isinf(h)) continue;
        const auto nidx = insert(Record{k, succ.state, g, top.idx, succ.motion, false});
        open.push(Entry{g + h, g, k, nidx});
      }
    }
  }
  result.status = SearchStatus::kNoPathExists;
  return result;
}

}  // namespace feasplan
