#pragma once

#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "subadapt/linalg.hpp"

namespace subadapt {

/// Undirected agent network with per-agent block dimensions.
///
/// Neighborhoods are sorted and always contain the agent itself. Indices are
/// zero-based in the API; the text format uses one-based agent ids.
class Topology {
 public:
  using Edge = std::pair<Index, Index>;

  /// Builds neighborhoods from an undirected edge list (self-loops implied).
  static Topology from_edges(std::vector<Index> block_sizes, const std::vector<Edge>& edges);

  /// Validates self-membership and symmetry of the given neighborhoods.
  static Topology from_neighborhoods(std::vector<Index> block_sizes,
                                     std::vector<std::vector<Index>> neighborhoods);

  /// Every agent connected to every other.
  static Topology fully_connected(std::vector<Index> block_sizes);

  Index n_agents() const { return static_cast<Index>(block_sizes_.size()); }
  Index block_size(Index k) const { return block_sizes_[static_cast<std::size_t>(k)]; }
  Index offset(Index k) const { return offsets_[static_cast<std::size_t>(k)]; }
  Index total_dim() const { return total_dim_; }
  const std::vector<Index>& block_sizes() const { return block_sizes_; }
  std::span<const Index> neighbors(Index k) const { return neighborhoods_[static_cast<std::size_t>(k)]; }
  bool is_neighbor(Index k, Index l) const;

  /// Undirected edges (k < l), sorted.
  std::vector<Edge> edges() const;

 private:
  Topology(std::vector<Index> block_sizes, std::vector<std::vector<Index>> neighborhoods);

  std::vector<Index> block_sizes_;
  std::vector<Index> offsets_;
  std::vector<std::vector<Index>> neighborhoods_;
  Index total_dim_ = 0;
};

using TopologyPtr = std::shared_ptr<const Topology>;

/// Block matrix laid out on a topology. Blocks may be stored anywhere,
/// including off the sparsity pattern; validate_sparsity decides whether
/// such a matrix is admissible as a combiner.
class BlockMatrix {
 public:
  using Key = std::pair<Index, Index>;

  explicit BlockMatrix(TopologyPtr topology);

  /// Splits a dense M x M matrix into blocks. Blocks that are identically zero
  /// are not stored.
  static BlockMatrix from_dense(TopologyPtr topology, const CMatrix& dense);

  /// Stores a block, replacing any existing one. Throws ShapeError on mismatch.
  void set_block(Index k, Index l, CMatrix block);

  /// Returns nullptr for unstored blocks.
  const CMatrix* find(Index k, Index l) const;

  const std::map<Key, CMatrix>& blocks() const { return blocks_; }
  const Topology& topology() const { return *topology_; }
  const TopologyPtr& topology_ptr() const { return topology_; }
  Index dim() const { return topology_->total_dim(); }

  CMatrix to_dense() const;

 private:
  TopologyPtr topology_;
  std::map<Key, CMatrix> blocks_;
};

/// Breadth-first reachability over the undirected neighbor graph.
bool is_connected(const Topology& topology);

/// True iff every block (k, l) with l outside N_k has max |entry| <= tol.
bool validate_sparsity(const BlockMatrix& a, const Topology& topology, double tol = 0.0);

/// Dense variant; throws ShapeError when the matrix is not M x M.
bool validate_sparsity(const CMatrix& a, const Topology& topology, double tol = 0.0);

/// Binary N x N matrix with E(k, l) = 1 iff l is in N_k.
RMatrix connection_matrix(const Topology& topology);

}  // namespace subadapt
