#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bearsim/errors.hpp"

namespace bearsim {

/// Undirected interaction graph over agents 1..n with the leader/follower
/// partition fixed by convention: leaders occupy indices 1..n_l, followers
/// n_l+1..n. Immutable after construction.
class GraphTopology {
public:
  GraphTopology(int agents, int leaders, std::vector<std::pair<int, int>> edges)
      : n_(agents), n_l_(leaders) {
    if (n_ < 2) throw ValidationError("graph: need at least 2 agents");
    if (n_l_ < 1) throw ValidationError("graph: need at least 1 leader");
    if (n_ - n_l_ < 1) throw ValidationError("graph: need at least 1 follower");
    // normalize to i<j, reject self-loops and out-of-range indices, dedupe
    for (auto& [i, j] : edges) {
      if (i == j) throw ValidationError("graph: self-loop on agent " + std::to_string(i));
      if (i < 1 || j < 1 || i > n_ || j > n_)
        throw ValidationError("graph: edge index out of range");
      if (i > j) std::swap(i, j);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);
    neighbors_.assign(n_ + 1, {});
    for (const auto& [i, j] : edges_) {
      neighbors_[i].push_back(j);
      neighbors_[j].push_back(i);
    }
    for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
  }

  int agents() const { return n_; }
  int leaders() const { return n_l_; }
  int followers() const { return n_ - n_l_; }
  bool is_leader(int i) const { return i <= n_l_; }

  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  /// Neighbor set of agent i (1-based).
  const std::vector<int>& neighbors(int i) const { return neighbors_.at(i); }

  int degree(int i) const { return static_cast<int>(neighbors_.at(i).size()); }

  /// Graph Laplacian: diagonal = degree, off-diagonal = -1 on edges.
  /// Entries are small integers, so L*1 = 0 holds exactly.
  Eigen::MatrixXd laplacian() const {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& [i, j] : edges_) {
      L(i - 1, i - 1) += 1.0;
      L(j - 1, j - 1) += 1.0;
      L(i - 1, j - 1) -= 1.0;
      L(j - 1, i - 1) -= 1.0;
    }
    return L;
  }

  struct LaplacianBlocks {
    Eigen::MatrixXd ll, lf, fl, ff;
  };

  /// Partition of the Laplacian by the leader/follower index ranges.
  LaplacianBlocks laplacian_blocks() const {
    const Eigen::MatrixXd L = laplacian();
    const int nf = followers();
    return LaplacianBlocks{L.topLeftCorner(n_l_, n_l_), L.topRightCorner(n_l_, nf),
                           L.bottomLeftCorner(nf, n_l_), L.bottomRightCorner(nf, nf)};
  }

  /// True iff every follower has a path to at least one leader (BFS from the
  /// leader set over the undirected graph).
  bool followers_reachable_from_leaders() const {
    std::vector<char> seen(n_ + 1, 0);
    std::vector<int> queue;
    for (int i = 1; i <= n_l_; ++i) {
      seen[i] = 1;
      queue.push_back(i);
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (int j : neighbors_[queue[head]]) {
        if (!seen[j]) {
          seen[j] = 1;
          queue.push_back(j);
        }
      }
    }
    for (int i = n_l_ + 1; i <= n_; ++i) {
      if (!seen[i]) return false;
    }
    return true;
  }

private:
  int n_;
  int n_l_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> neighbors_;
};

}  // namespace bearsim
