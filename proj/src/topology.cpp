#include "subadapt/topology.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "subadapt/errors.hpp"

namespace subadapt {

Topology::Topology(std::vector<Index> block_sizes, std::vector<std::vector<Index>> neighborhoods)
    : block_sizes_(std::move(block_sizes)), neighborhoods_(std::move(neighborhoods)) {
  offsets_.reserve(block_sizes_.size());
  for (Index m : block_sizes_) {
    if (m <= 0) throw ShapeError("block sizes must be positive");
    offsets_.push_back(total_dim_);
    total_dim_ += m;
  }
}

Topology Topology::from_edges(std::vector<Index> block_sizes, const std::vector<Edge>& edges) {
  const auto n = static_cast<Index>(block_sizes.size());
  if (n == 0) throw ShapeError("topology needs at least one agent");
  std::vector<std::vector<Index>> nbrs(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) nbrs[static_cast<std::size_t>(k)].push_back(k);
  for (const auto& [k, l] : edges) {
    if (k < 0 || l < 0 || k >= n || l >= n)
      throw ShapeError("edge (" + std::to_string(k) + "," + std::to_string(l) + ") out of range");
    if (k == l) continue;
    nbrs[static_cast<std::size_t>(k)].push_back(l);
    nbrs[static_cast<std::size_t>(l)].push_back(k);
  }
  for (auto& v : nbrs) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return Topology(std::move(block_sizes), std::move(nbrs));
}

Topology Topology::from_neighborhoods(std::vector<Index> block_sizes,
                                      std::vector<std::vector<Index>> neighborhoods) {
  const auto n = static_cast<Index>(block_sizes.size());
  if (static_cast<Index>(neighborhoods.size()) != n)
    throw ShapeError("neighborhood count differs from agent count");
  for (auto& v : neighborhoods) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    for (Index l : v)
      if (l < 0 || l >= n) throw ShapeError("neighbor index out of range");
  }
  for (Index k = 0; k < n; ++k) {
    const auto& nk = neighborhoods[static_cast<std::size_t>(k)];
    if (!std::binary_search(nk.begin(), nk.end(), k))
      throw ShapeError("agent " + std::to_string(k) + " missing from its own neighborhood");
    for (Index l : nk) {
      const auto& nl = neighborhoods[static_cast<std::size_t>(l)];
      if (!std::binary_search(nl.begin(), nl.end(), k))
        throw ShapeError("neighborhoods are not symmetric");
    }
  }
  return Topology(std::move(block_sizes), std::move(neighborhoods));
}

Topology Topology::fully_connected(std::vector<Index> block_sizes) {
  const auto n = block_sizes.size();
  std::vector<std::vector<Index>> nbrs(n);
  for (auto& v : nbrs)
    for (std::size_t l = 0; l < n; ++l) v.push_back(static_cast<Index>(l));
  return Topology(std::move(block_sizes), std::move(nbrs));
}

bool Topology::is_neighbor(Index k, Index l) const {
  const auto nk = neighbors(k);
  return std::binary_search(nk.begin(), nk.end(), l);
}

std::vector<Topology::Edge> Topology::edges() const {
  std::vector<Edge> out;
  for (Index k = 0; k < n_agents(); ++k)
    for (Index l : neighbors(k))
      if (k < l) out.emplace_back(k, l);
  return out;
}

BlockMatrix::BlockMatrix(TopologyPtr topology) : topology_(std::move(topology)) {
  if (!topology_) throw ShapeError("BlockMatrix requires a topology");
}

BlockMatrix BlockMatrix::from_dense(TopologyPtr topology, const CMatrix& dense) {
  BlockMatrix out(std::move(topology));
  const auto& t = *out.topology_;
  if (dense.rows() != t.total_dim() || dense.cols() != t.total_dim())
    throw ShapeError("dense matrix does not match topology dimension");
  for (Index k = 0; k < t.n_agents(); ++k)
    for (Index l = 0; l < t.n_agents(); ++l) {
      auto blk = dense.block(t.offset(k), t.offset(l), t.block_size(k), t.block_size(l));
      if (blk.cwiseAbs().maxCoeff() > 0.0) out.blocks_.emplace(Key{k, l}, blk);
    }
  return out;
}

void BlockMatrix::set_block(Index k, Index l, CMatrix block) {
  const auto& t = *topology_;
  if (k < 0 || l < 0 || k >= t.n_agents() || l >= t.n_agents())
    throw ShapeError("block index out of range");
  if (block.rows() != t.block_size(k) || block.cols() != t.block_size(l))
    throw ShapeError("block (" + std::to_string(k) + "," + std::to_string(l) + ") has wrong shape");
  blocks_[Key{k, l}] = std::move(block);
}

const CMatrix* BlockMatrix::find(Index k, Index l) const {
  auto it = blocks_.find(Key{k, l});
  return it == blocks_.end() ? nullptr : &it->second;
}

CMatrix BlockMatrix::to_dense() const {
  const auto& t = *topology_;
  CMatrix out = CMatrix::Zero(t.total_dim(), t.total_dim());
  for (const auto& [key, blk] : blocks_)
    out.block(t.offset(key.first), t.offset(key.second), blk.rows(), blk.cols()) = blk;
  return out;
}

bool is_connected(const Topology& topology) {
  const Index n = topology.n_agents();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::deque<Index> queue{0};
  seen[0] = 1;
  Index reached = 1;
  while (!queue.empty()) {
    const Index k = queue.front();
    queue.pop_front();
    for (Index l : topology.neighbors(k)) {
      if (seen[static_cast<std::size_t>(l)]) continue;
      seen[static_cast<std::size_t>(l)] = 1;
      ++reached;
      queue.push_back(l);
    }
  }
  return reached == n;
}

bool validate_sparsity(const BlockMatrix& a, const Topology& topology, double tol) {
  if (a.dim() != topology.total_dim() || a.topology().n_agents() != topology.n_agents())
    throw ShapeError("block matrix does not match topology");
  for (const auto& [key, blk] : a.blocks()) {
    if (key.first == key.second || topology.is_neighbor(key.first, key.second)) continue;
    if (blk.size() > 0 && blk.cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

bool validate_sparsity(const CMatrix& a, const Topology& topology, double tol) {
  if (a.rows() != topology.total_dim() || a.cols() != topology.total_dim())
    throw ShapeError("matrix does not match topology dimension");
  for (Index k = 0; k < topology.n_agents(); ++k)
    for (Index l = 0; l < topology.n_agents(); ++l) {
      if (k == l || topology.is_neighbor(k, l)) continue;
      auto blk = a.block(topology.offset(k), topology.offset(l), topology.block_size(k),
                         topology.block_size(l));
      if (blk.cwiseAbs().maxCoeff() > tol) return false;
    }
  return true;
}

RMatrix connection_matrix(const Topology& topology) {
  const Index n = topology.n_agents();
  RMatrix e = RMatrix::Zero(n, n);
  for (Index k = 0; k < n; ++k)
    for (Index l : topology.neighbors(k)) e(k, l) = 1.0;
  return e;
}

}  // namespace subadapt
