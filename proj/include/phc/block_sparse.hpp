#pragma once

#include "phc/common.hpp"

#include <map>
#include <utility>

namespace phc {

// Communication graph with per-node block dimensions. Row blocks have the
// node state dimensions q, column blocks the node port dimensions p.
struct SparsityMask {
  int N = 0;
  MatrixXi adjacency;  // N x N, binary, symmetric, unit diagonal
  VectorXi q;          // node state dims
  VectorXi p;          // node port dims

  SparsityMask() = default;
  SparsityMask(MatrixXi adj, VectorXi q_dims, VectorXi p_dims)
      : N(int(adj.rows())),
        adjacency(std::move(adj)),
        q(std::move(q_dims)),
        p(std::move(p_dims)) {
    validate();
  }

  void validate() const {
    if (adjacency.rows() != N || adjacency.cols() != N)
      throw ShapeError("SparsityMask: adjacency must be N x N");
    if (q.size() != N || p.size() != N)
      throw ShapeError("SparsityMask: dimension vectors must have N entries");
    for (int i = 0; i < N; ++i) {
      if (adjacency(i, i) != 1)
        throw InvalidMatrix("SparsityMask: diagonal must be all ones");
      for (int j = 0; j < N; ++j) {
        if (adjacency(i, j) != 0 && adjacency(i, j) != 1)
          throw InvalidMatrix("SparsityMask: entries must be 0/1");
        if (adjacency(i, j) != adjacency(j, i))
          throw InvalidMatrix("SparsityMask: adjacency must be symmetric");
      }
      if (q[i] < 0 || p[i] < 0) throw ShapeError("SparsityMask: negative dim");
    }
  }

  int state_dim() const { return q.sum(); }
  int port_dim() const { return p.sum(); }
  int state_offset(int i) const { return q.head(i).sum(); }
  int port_offset(int i) const { return p.head(i).sum(); }

  static SparsityMask full(int n_nodes, int q_dim, int p_dim) {
    return SparsityMask(MatrixXi::Ones(n_nodes, n_nodes),
                        VectorXi::Constant(n_nodes, q_dim),
                        VectorXi::Constant(n_nodes, p_dim));
  }
  // Undirected ring with self-loops (the 6-agent communication topology).
  static SparsityMask cyclic(int n_nodes, int q_dim, int p_dim) {
    MatrixXi adj = MatrixXi::Identity(n_nodes, n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
      adj(i, (i + 1) % n_nodes) = 1;
      adj((i + 1) % n_nodes, i) = 1;
    }
    return SparsityMask(adj, VectorXi::Constant(n_nodes, q_dim),
                        VectorXi::Constant(n_nodes, p_dim));
  }
};

// Block matrix restricted to a mask: block (i,j) of size q_i x p_j exists
// iff adjacency(i,j) = 1; everything else is identically zero.
class BlockSparseMatrix {
 public:
  BlockSparseMatrix() = default;
  explicit BlockSparseMatrix(SparsityMask mask) : mask_(std::move(mask)) {}

  const SparsityMask& mask() const { return mask_; }
  int rows() const { return mask_.state_dim(); }
  int cols() const { return mask_.port_dim(); }

  void set_block(int i, int j, MatrixXd block) {
    if (i < 0 || i >= mask_.N || j < 0 || j >= mask_.N)
      throw ShapeError("BlockSparseMatrix: block index out of range");
    if (mask_.adjacency(i, j) == 0)
      throw InvalidMatrix("BlockSparseMatrix: mask forbids block (" +
                          std::to_string(i) + "," + std::to_string(j) + ")");
    if (block.rows() != mask_.q[i] || block.cols() != mask_.p[j])
      throw ShapeError("BlockSparseMatrix: block shape mismatch");
    blocks_[{i, j}] = std::move(block);
  }

  bool has_block(int i, int j) const { return blocks_.count({i, j}) > 0; }
  const MatrixXd& block(int i, int j) const { return blocks_.at({i, j}); }

  const std::map<std::pair<int, int>, MatrixXd>& blocks() const {
    return blocks_;
  }

  VectorXd matvec(const VectorXd& v) const {
    if (v.size() != cols())
      throw ShapeError("blocksparse_matvec: vector length " +
                       std::to_string(v.size()) + " != cols " +
                       std::to_string(cols()));
    VectorXd out = VectorXd::Zero(rows());
    for (const auto& [ij, B] : blocks_) {
      out.segment(mask_.state_offset(ij.first), mask_.q[ij.first]).noalias() +=
          B * v.segment(mask_.port_offset(ij.second), mask_.p[ij.second]);
    }
    return out;
  }

  VectorXd matvec_transpose(const VectorXd& v) const {
    if (v.size() != rows())
      throw ShapeError("blocksparse_matvec_transpose: bad vector length");
    VectorXd out = VectorXd::Zero(cols());
    for (const auto& [ij, B] : blocks_) {
      out.segment(mask_.port_offset(ij.second), mask_.p[ij.second]).noalias() +=
          B.transpose() *
          v.segment(mask_.state_offset(ij.first), mask_.q[ij.first]);
    }
    return out;
  }

  MatrixXd dense() const {
    MatrixXd out = MatrixXd::Zero(rows(), cols());
    for (const auto& [ij, B] : blocks_) {
      out.block(mask_.state_offset(ij.first), mask_.port_offset(ij.second),
                mask_.q[ij.first], mask_.p[ij.second]) = B;
    }
    return out;
  }

  bool is_block_diagonal() const {
    for (const auto& [ij, B] : blocks_)
      if (ij.first != ij.second && B.cwiseAbs().maxCoeff() > 0) return false;
    return true;
  }

 private:
  SparsityMask mask_;
  std::map<std::pair<int, int>, MatrixXd> blocks_;
};

inline VectorXd blocksparse_matvec(const BlockSparseMatrix& W,
                                   const VectorXd& v) {
  return W.matvec(v);
}

}  // namespace phc
