// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

// Reverse-mode autodiff over a fixed op set, 64-bit throughout. A Tape owns a
// growing list of nodes; every op appends one node whose parents have smaller
// ids, so reverse node order is already a topological order for backprop.
// Handles are plain ints. The tape is rebuilt for every forward pass; long
// lived state (parameter values, optimizer moments) lives outside.

namespace molbridge::nn {

struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::size_t size() const { return data.size(); }
};

struct GradError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroVector : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Tape {
 public:
  enum class Op {
    Leaf,
    GatherRows,   // value = a.rows[idxs]
    SliceRows,    // value = a.rows[0..n)
    SelectRow,    // value = a.row(r)
    SelectEntry,  // value = a[r][c], 1x1
    ConcatCols,   // value = [a | b]
    StackRows,    // value = vertical stack of 1xC parents
    Add,
    AddRowVec,  // a (RxC) + b (1xC) broadcast
    Scale,      // a * constant
    ScalarMul,  // a * b where b is 1x1
    MatMul,     // a (RxK) * b (KxC)
    MatMulNT,   // a (RxK) * b^T (CxK)
    Tanh,
    Exp,
    Log,
    Reciprocal,
    Clamp,
    SoftmaxRows,
    NormalizeRows,    // rows scaled to unit L2 norm
    MaskedLSERows,    // out (Rx1): log sum_j mask[i][j] exp(a[i][j])
    WeightedSum,      // out (1x1): sum_i w[i] * a[i][0]
  };

  struct Node {
    Op op = Op::Leaf;
    int a = -1, b = -1;
    Mat value;
    Mat grad;
    // op-specific extras
    std::vector<int> idxs;        // GatherRows indices, StackRows parents
    std::size_t r = 0, c = 0, n = 0;
    double scale = 1.0, lo = 0.0, hi = 0.0;
    Mat mask;                     // MaskedLSERows
    std::vector<double> weights;  // WeightedSum
  };

  std::vector<Node> nodes;

  int leaf(Mat v) {
    Node nd;
    nd.op = Op::Leaf;
    nd.value = std::move(v);
    return push(std::move(nd));
  }

  int gather_rows(int a, std::vector<int> idxs) {
    const Mat& A = val(a);
    Mat out(idxs.size(), A.cols);
    for (std::size_t i = 0; i < idxs.size(); ++i) {
      check_row(A, idxs[i]);
      for (std::size_t j = 0; j < A.cols; ++j) out.at(i, j) = A.at(std::size_t(idxs[i]), j);
    }
    Node nd;
    nd.op = Op::GatherRows;
    nd.a = a;
    nd.idxs = std::move(idxs);
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  int slice_rows(int a, std::size_t n) {
    const Mat& A = val(a);
    if (n > A.rows) throw GradError("slice_rows: out of range");
    Mat out(n, A.cols);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < A.cols; ++j) out.at(i, j) = A.at(i, j);
    Node nd;
    nd.op = Op::SliceRows;
    nd.a = a;
    nd.n = n;
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  int select_row(int a, std::size_t r) {
    const Mat& A = val(a);
    check_row(A, int(r));
    Mat out(1, A.cols);
    for (std::size_t j = 0; j < A.cols; ++j) out.at(0, j) = A.at(r, j);
    Node nd;
    nd.op = Op::SelectRow;
    nd.a = a;
    nd.r = r;
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  int select_entry(int a, std::size_t r, std::size_t c) {
    const Mat& A = val(a);
    if (r >= A.rows || c >= A.cols) throw GradError("select_entry: out of range");
    Mat out(1, 1);
    out.at(0, 0) = A.at(r, c);
    Node nd;
    nd.op = Op::SelectEntry;
    nd.a = a;
    nd.r = r;
    nd.c = c;
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  int concat_cols(int a, int b) {
    const Mat& A = val(a);
    const Mat& B = val(b);
    if (A.rows != B.rows) throw GradError("concat_cols: row mismatch");
    Mat out(A.rows, A.cols + B.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
      for (std::size_t j = 0; j < A.cols; ++j) out.at(i, j) = A.at(i, j);
      for (std::size_t j = 0; j < B.cols; ++j) out.at(i, A.cols + j) = B.at(i, j);
    }
    Node nd;
    nd.op = Op::ConcatCols;
    nd.a = a;
    nd.b = b;
    nd.c = A.cols;
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  int stack_rows(std::vector<int> parents) {
    if (parents.empty()) throw GradError("stack_rows: empty");
    std::size_t cols = val(parents[0]).cols;
    Mat out(parents.size(), cols);
    for (std::size_t i = 0; i < parents.size(); ++i) {
      const Mat& P = val(parents[i]);
      if (P.rows != 1 || P.cols != cols) throw GradError("stack_rows: shape mismatch");
      for (std::size_t j = 0; j < cols; ++j) out.at(i, j) = P.at(0, j);
    }
    Node nd;
    nd.op = Op::StackRows;
    nd.idxs = std::move(parents);
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  int add(int a, int b) {
    const Mat& A = val(a);
    const Mat& B = val(b);
    if (A.rows != B.rows || A.cols != B.cols) throw GradError("add: shape mismatch");
    Mat out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += B.data[i];
    Node nd;
    nd.op = Op::Add;
    nd.a = a;
    nd.b = b;
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  int add_rowvec(int a, int b) {
    const Mat& A = val(a);
    const Mat& B = val(b);
    if (B.rows != 1 || B.cols != A.cols) throw GradError("add_rowvec: shape mismatch");
    Mat out = A;
    for (std::size_t i = 0; i < A.rows; ++i)
      for (std::size_t j = 0; j < A.cols; ++j) out.at(i, j) += B.at(0, j);
    Node nd;
    nd.op = Op::AddRowVec;
    nd.a = a;
    nd.b = b;
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  int scale(int a, double s) {
    Mat out = val(a);
    for (double& v : out.data) v *= s;
    Node nd;
    nd.op = Op::Scale;
    nd.a = a;
    nd.scale = s;
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  int scalar_mul(int a, int b) {
    const Mat& A = val(a);
    const Mat& B = val(b);
    if (B.rows != 1 || B.cols != 1) throw GradError("scalar_mul: b must be 1x1");
    Mat out = A;
    for (double& v : out.data) v *= B.at(0, 0);
    Node nd;
    nd.op = Op::ScalarMul;
    nd.a = a;
    nd.b = b;
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  int matmul(int a, int b) {
    const Mat& A = val(a);
    const Mat& B = val(b);
    if (A.cols != B.rows) throw GradError("matmul: inner dim mismatch");
    Mat out(A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i)
      for (std::size_t k = 0; k < A.cols; ++k) {
        double av = A.at(i, k);
        if (av == 0.0) continue;
        for (std::size_t j = 0; j < B.cols; ++j) out.at(i, j) += av * B.at(k, j);
      }
    Node nd;
    nd.op = Op::MatMul;
    nd.a = a;
    nd.b = b;
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  int matmul_nt(int a, int b) {
    const Mat& A = val(a);
    const Mat& B = val(b);
    if (A.cols != B.cols) throw GradError("matmul_nt: inner dim mismatch");
    Mat out(A.rows, B.rows);
    for (std::size_t i = 0; i < A.rows; ++i)
      for (std::size_t j = 0; j < B.rows; ++j) {
        double acc = 0;
        for (std::size_t k = 0; k < A.cols; ++k) acc += A.at(i, k) * B.at(j, k);
        out.at(i, j) = acc;
      }
    Node nd;
    nd.op = Op::MatMulNT;
    nd.a = a;
    nd.b = b;
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  int tanh_(int a) { return unary(Op::Tanh, a, [](double x) { return std::tanh(x); }); }
  int exp_(int a) { return unary(Op::Exp, a, [](double x) { return std::exp(x); }); }

  int log_(int a) {
    const Mat& A = val(a);
    for (double v : A.data)
      if (v <= 0.0) throw GradError("log: non-positive input");
    return unary(Op::Log, a, [](double x) { return std::log(x); });
  }

  int reciprocal(int a) {
    const Mat& A = val(a);
    for (double v : A.data)
      if (v == 0.0) throw GradError("reciprocal: zero input");
    return unary(Op::Reciprocal, a, [](double x) { return 1.0 / x; });
  }

  int clamp(int a, double lo, double hi) {
    Mat out = val(a);
    for (double& v : out.data) v = v < lo ? lo : (v > hi ? hi : v);
    Node nd;
    nd.op = Op::Clamp;
    nd.a = a;
    nd.lo = lo;
    nd.hi = hi;
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  int softmax_rows(int a) {
    const Mat& A = val(a);
    Mat out(A.rows, A.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
      double mx = A.at(i, 0);
      for (std::size_t j = 1; j < A.cols; ++j) mx = std::max(mx, A.at(i, j));
      double sum = 0;
      for (std::size_t j = 0; j < A.cols; ++j) {
        out.at(i, j) = std::exp(A.at(i, j) - mx);
        sum += out.at(i, j);
      }
      for (std::size_t j = 0; j < A.cols; ++j) out.at(i, j) /= sum;
    }
    Node nd;
    nd.op = Op::SoftmaxRows;
    nd.a = a;
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  int normalize_rows(int a) {
    const Mat& A = val(a);
    Mat out(A.rows, A.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
      double nrm = 0;
      for (std::size_t j = 0; j < A.cols; ++j) nrm += A.at(i, j) * A.at(i, j);
      nrm = std::sqrt(nrm);
      if (nrm == 0.0) throw ZeroVector("normalize_rows: zero row");
      for (std::size_t j = 0; j < A.cols; ++j) out.at(i, j) = A.at(i, j) / nrm;
    }
    Node nd;
    nd.op = Op::NormalizeRows;
    nd.a = a;
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  // Rows with an all-zero mask are not allowed; callers guarantee non-empty
  // candidate sets.
  int masked_lse_rows(int a, Mat mask) {
    const Mat& A = val(a);
    if (mask.rows != A.rows || mask.cols != A.cols)
      throw GradError("masked_lse_rows: mask shape mismatch");
    Mat out(A.rows, 1);
    for (std::size_t i = 0; i < A.rows; ++i) {
      double mx = -1e300;
      bool any = false;
      for (std::size_t j = 0; j < A.cols; ++j)
        if (mask.at(i, j) != 0.0) {
          any = true;
          mx = std::max(mx, A.at(i, j));
        }
      if (!any) throw GradError("masked_lse_rows: empty mask row");
      double sum = 0;
      for (std::size_t j = 0; j < A.cols; ++j)
        if (mask.at(i, j) != 0.0) sum += std::exp(A.at(i, j) - mx);
      out.at(i, 0) = mx + std::log(sum);
    }
    Node nd;
    nd.op = Op::MaskedLSERows;
    nd.a = a;
    nd.mask = std::move(mask);
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  int weighted_sum(int a, std::vector<double> w) {
    const Mat& A = val(a);
    if (A.cols != 1 || A.rows != w.size()) throw GradError("weighted_sum: shape mismatch");
    Mat out(1, 1);
    for (std::size_t i = 0; i < A.rows; ++i) out.at(0, 0) += w[i] * A.at(i, 0);
    Node nd;
    nd.op = Op::WeightedSum;
    nd.a = a;
    nd.weights = std::move(w);
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  const Mat& val(int id) const { return nodes[std::size_t(id)].value; }
  const Mat& grad(int id) const { return nodes[std::size_t(id)].grad; }

  // Seeds d(root)/d(root) = 1 and accumulates into every node's grad.
  void backward(int root) {
    for (Node& nd : nodes) {
      nd.grad = Mat(nd.value.rows, nd.value.cols);
    }
    Node& r = nodes[std::size_t(root)];
    if (r.value.rows != 1 || r.value.cols != 1)
      throw GradError("backward: root must be scalar");
    r.grad.at(0, 0) = 1.0;

    for (int id = root; id >= 0; --id) {
      Node& nd = nodes[std::size_t(id)];
      bool any = false;
      for (double g : nd.grad.data)
        if (g != 0.0) {
          any = true;
          break;
        }
      if (!any) continue;
      propagate(nd);
    }
  }

 private:
  int push(Node nd) {
    nodes.push_back(std::move(nd));
    return int(nodes.size()) - 1;
  }

  static void check_row(const Mat& m, int r) {
    if (r < 0 || std::size_t(r) >= m.rows) throw GradError("row index out of range");
  }

  template <class F>
  int unary(Op op, int a, F f) {
    Mat out = val(a);
    for (double& v : out.data) v = f(v);
    Node nd;
    nd.op = op;
    nd.a = a;
    nd.value = std::move(out);
    return push(std::move(nd));
  }

  void propagate(Node& nd) {
    const Mat& g = nd.grad;
    switch (nd.op) {
      case Op::Leaf:
        break;
      case Op::GatherRows: {
        Mat& da = nodes[std::size_t(nd.a)].grad;
        for (std::size_t i = 0; i < nd.idxs.size(); ++i)
          for (std::size_t j = 0; j < g.cols; ++j)
            da.at(std::size_t(nd.idxs[i]), j) += g.at(i, j);
        break;
      }
      case Op::SliceRows: {
        Mat& da = nodes[std::size_t(nd.a)].grad;
        for (std::size_t i = 0; i < nd.n; ++i)
          for (std::size_t j = 0; j < g.cols; ++j) da.at(i, j) += g.at(i, j);
        break;
      }
      case Op::SelectRow: {
        Mat& da = nodes[std::size_t(nd.a)].grad;
        for (std::size_t j = 0; j < g.cols; ++j) da.at(nd.r, j) += g.at(0, j);
        break;
      }
      case Op::SelectEntry:
        nodes[std::size_t(nd.a)].grad.at(nd.r, nd.c) += g.at(0, 0);
        break;
      case Op::ConcatCols: {
        Mat& da = nodes[std::size_t(nd.a)].grad;
        Mat& db = nodes[std::size_t(nd.b)].grad;
        for (std::size_t i = 0; i < g.rows; ++i) {
          for (std::size_t j = 0; j < nd.c; ++j) da.at(i, j) += g.at(i, j);
          for (std::size_t j = nd.c; j < g.cols; ++j) db.at(i, j - nd.c) += g.at(i, j);
        }
        break;
      }
      case Op::StackRows: {
        for (std::size_t i = 0; i < nd.idxs.size(); ++i) {
          Mat& dp = nodes[std::size_t(nd.idxs[i])].grad;
          for (std::size_t j = 0; j < g.cols; ++j) dp.at(0, j) += g.at(i, j);
        }
        break;
      }
      case Op::Add: {
        Mat& da = nodes[std::size_t(nd.a)].grad;
        Mat& db = nodes[std::size_t(nd.b)].grad;
        for (std::size_t i = 0; i < g.size(); ++i) {
          da.data[i] += g.data[i];
          db.data[i] += g.data[i];
        }
        break;
      }
      case Op::AddRowVec: {
        Mat& da = nodes[std::size_t(nd.a)].grad;
        Mat& db = nodes[std::size_t(nd.b)].grad;
        for (std::size_t i = 0; i < g.rows; ++i)
          for (std::size_t j = 0; j < g.cols; ++j) {
            da.at(i, j) += g.at(i, j);
            db.at(0, j) += g.at(i, j);
          }
        break;
      }
      case Op::Scale: {
        Mat& da = nodes[std::size_t(nd.a)].grad;
        for (std::size_t i = 0; i < g.size(); ++i) da.data[i] += nd.scale * g.data[i];
        break;
      }
      case Op::ScalarMul: {
        Mat& da = nodes[std::size_t(nd.a)].grad;
        Mat& db = nodes[std::size_t(nd.b)].grad;
        const Mat& A = nodes[std::size_t(nd.a)].value;
        double s = nodes[std::size_t(nd.b)].value.at(0, 0);
        for (std::size_t i = 0; i < g.size(); ++i) {
          da.data[i] += s * g.data[i];
          db.at(0, 0) += g.data[i] * A.data[i];
        }
        break;
      }
      case Op::MatMul: {
        const Mat& A = nodes[std::size_t(nd.a)].value;
        const Mat& B = nodes[std::size_t(nd.b)].value;
        Mat& da = nodes[std::size_t(nd.a)].grad;
        Mat& db = nodes[std::size_t(nd.b)].grad;
        // dA = g * B^T ; dB = A^T * g
        for (std::size_t i = 0; i < A.rows; ++i)
          for (std::size_t k = 0; k < A.cols; ++k) {
            double acc = 0;
            for (std::size_t j = 0; j < B.cols; ++j) acc += g.at(i, j) * B.at(k, j);
            da.at(i, k) += acc;
          }
        for (std::size_t k = 0; k < B.rows; ++k)
          for (std::size_t j = 0; j < B.cols; ++j) {
            double acc = 0;
            for (std::size_t i = 0; i < A.rows; ++i) acc += A.at(i, k) * g.at(i, j);
            db.at(k, j) += acc;
          }
        break;
      }
      case Op::MatMulNT: {
        const Mat& A = nodes[std::size_t(nd.a)].value;
        const Mat& B = nodes[std::size_t(nd.b)].value;
        Mat& da = nodes[std::size_t(nd.a)].grad;
        Mat& db = nodes[std::size_t(nd.b)].grad;
        // out = A B^T ; dA = g * B ; dB = g^T * A
        for (std::size_t i = 0; i < A.rows; ++i)
          for (std::size_t k = 0; k < A.cols; ++k) {
            double acc = 0;
            for (std::size_t j = 0; j < B.rows; ++j) acc += g.at(i, j) * B.at(j, k);
            da.at(i, k) += acc;
          }
        for (std::size_t j = 0; j < B.rows; ++j)
          for (std::size_t k = 0; k < B.cols; ++k) {
            double acc = 0;
            for (std::size_t i = 0; i < A.rows; ++i) acc += g.at(i, j) * A.at(i, k);
            db.at(j, k) += acc;
          }
        break;
      }
      case Op::Tanh: {
        Mat& da = nodes[std::size_t(nd.a)].grad;
        for (std::size_t i = 0; i < g.size(); ++i) {
          double y = nd.value.data[i];
          da.data[i] += g.data[i] * (1.0 - y * y);
        }
        break;
      }
      case Op::Exp: {
        Mat& da = nodes[std::size_t(nd.a)].grad;
        for (std::size_t i = 0; i < g.size(); ++i) da.data[i] += g.data[i] * nd.value.data[i];
        break;
      }
      case Op::Log: {
        const Mat& A = nodes[std::size_t(nd.a)].value;
        Mat& da = nodes[std::size_t(nd.a)].grad;
        for (std::size_t i = 0; i < g.size(); ++i) da.data[i] += g.data[i] / A.data[i];
        break;
      }
      case Op::Reciprocal: {
        Mat& da = nodes[std::size_t(nd.a)].grad;
        for (std::size_t i = 0; i < g.size(); ++i) {
          double y = nd.value.data[i];
          da.data[i] -= g.data[i] * y * y;
        }
        break;
      }
      case Op::Clamp: {
        const Mat& A = nodes[std::size_t(nd.a)].value;
        Mat& da = nodes[std::size_t(nd.a)].grad;
        for (std::size_t i = 0; i < g.size(); ++i)
          if (A.data[i] >= nd.lo && A.data[i] <= nd.hi) da.data[i] += g.data[i];
        break;
      }
      case Op::SoftmaxRows: {
        Mat& da = nodes[std::size_t(nd.a)].grad;
        const Mat& s = nd.value;
        for (std::size_t i = 0; i < s.rows; ++i) {
          double dot = 0;
          for (std::size_t j = 0; j < s.cols; ++j) dot += g.at(i, j) * s.at(i, j);
          for (std::size_t j = 0; j < s.cols; ++j)
            da.at(i, j) += s.at(i, j) * (g.at(i, j) - dot);
        }
        break;
      }
      case Op::NormalizeRows: {
        const Mat& A = nodes[std::size_t(nd.a)].value;
        Mat& da = nodes[std::size_t(nd.a)].grad;
        const Mat& y = nd.value;
        for (std::size_t i = 0; i < A.rows; ++i) {
          double nrm = 0;
          for (std::size_t j = 0; j < A.cols; ++j) nrm += A.at(i, j) * A.at(i, j);
          nrm = std::sqrt(nrm);
          double dot = 0;
          for (std::size_t j = 0; j < A.cols; ++j) dot += g.at(i, j) * y.at(i, j);
          for (std::size_t j = 0; j < A.cols; ++j)
            da.at(i, j) += (g.at(i, j) - dot * y.at(i, j)) / nrm;
        }
        break;
      }
      case Op::MaskedLSERows: {
        const Mat& A = nodes[std::size_t(nd.a)].value;
        Mat& da = nodes[std::size_t(nd.a)].grad;
        for (std::size_t i = 0; i < A.rows; ++i) {
          double gi = g.at(i, 0);
          if (gi == 0.0) continue;
          for (std::size_t j = 0; j < A.cols; ++j)
            if (nd.mask.at(i, j) != 0.0)
              da.at(i, j) += gi * std::exp(A.at(i, j) - nd.value.at(i, 0));
        }
        break;
      }
      case Op::WeightedSum: {
        Mat& da = nodes[std::size_t(nd.a)].grad;
        for (std::size_t i = 0; i < nd.weights.size(); ++i)
          da.at(i, 0) += g.at(0, 0) * nd.weights[i];
        break;
      }
    }
  }
};

}  // namespace molbridge::nn
