#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ffcomb/bitset.hpp"

namespace ffcomb {

struct CliqueSearchResult {
  std::vector<std::vector<std::size_t>> cliques;  ///< every clique of maximum size, each once
  std::size_t best_size = 0;
  bool exhaustive = true;
  std::uint64_t nodes = 0;
};

namespace detail {

class MaxCliqueSearch {
 public:
  MaxCliqueSearch(const std::vector<Bitset>& adj, std::uint64_t node_budget) : adj_(adj), budget_(node_budget) {}

  CliqueSearchResult run(const Bitset& candidates) {
    std::vector<std::size_t> clique;
    expand(clique, candidates);
    return std::move(result_);
  }

 private:
  // Greedy sequential colouring of P: returns vertices ordered by colour and
  // the colour (1-based) of each, so colour[i] bounds the clique size
  // reachable from order[0..i].
  void colour(const Bitset& p, std::vector<std::size_t>& order, std::vector<std::size_t>& colours) const {
    Bitset uncoloured = p;
    std::size_t c = 0;
    while (uncoloured.any()) {
      ++c;
      Bitset q = uncoloured;
      std::size_t v = q.find_next(0);
      while (v < q.size()) {
        uncoloured.reset(v);
        q.reset(v);
        q.subtract(adj_[v]);
        order.push_back(v);
        colours.push_back(c);
        v = q.find_next(v + 1);
      }
    }
  }

  void expand(std::vector<std::size_t>& clique, Bitset p) {
    if (++result_.nodes > budget_) {
      result_.exhaustive = false;
      return;
    }
    if (p.none()) {
      if (clique.size() > result_.best_size) {
        result_.best_size = clique.size();
        result_.cliques.clear();
      }
      if (clique.size() == result_.best_size) result_.cliques.push_back(clique);
      return;
    }
    std::vector<std::size_t> order, colours;
    colour(p, order, colours);
    for (std::size_t i = order.size(); i-- > 0;) {
      // Strict comparison keeps branches that can only tie the incumbent.
      if (clique.size() + colours[i] < result_.best_size) return;
      if (!result_.exhaustive) return;
      const std::size_t v = order[i];
      clique.push_back(v);
      expand(clique, p & adj_[v]);
      clique.pop_back();
      p.reset(v);
    }
  }

  const std::vector<Bitset>& adj_;
  std::uint64_t budget_;
  CliqueSearchResult result_;
};

}  // namespace detail

/// All maximum cliques inside `candidates` of the graph given by symmetric
/// adjacency rows. Exact branch and bound with a greedy-colouring bound;
/// stops with exhaustive = false once node_budget nodes have been expanded.
inline CliqueSearchResult maximum_cliques(const std::vector<Bitset>& adj, const Bitset& candidates,
                                          std::uint64_t node_budget) {
  return detail::MaxCliqueSearch(adj, node_budget).run(candidates);
}

}  // namespace ffcomb
