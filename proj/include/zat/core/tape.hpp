#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "zat/core/tensor.hpp"

namespace zat {

using NodeId = int;

// Reverse-mode tape. Every operation appends a node holding its forward
// value and a closure that scatters the node's gradient into its inputs.
// Nodes are created in topological order by construction, so the backward
// pass is a single reverse sweep.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  NodeId leaf(Tensor v, const char* op = "leaf") {
    return push(std::move(v), op, nullptr);
  }

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  Tensor& grad(NodeId id) { return nodes_[id].grad; }
  std::size_t size() const { return nodes_.size(); }

  // ---- elementwise ----

  NodeId add(NodeId a, NodeId b) {
    const Tensor &va = value(a), &vb = value(b);
    check(va.same_shape(vb), "add: shape mismatch " + va.shape_str() + " vs " + vb.shape_str());
    Tensor out = va;
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] += vb.data[i];
    return push(std::move(out), "add", [this, a, b](const Tensor& g) {
      accumulate(a, g);
      accumulate(b, g);
    });
  }

  NodeId sub(NodeId a, NodeId b) {
    const Tensor &va = value(a), &vb = value(b);
    check(va.same_shape(vb), "sub: shape mismatch");
    Tensor out = va;
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] -= vb.data[i];
    return push(std::move(out), "sub", [this, a, b](const Tensor& g) {
      accumulate(a, g);
      Tensor& gb = nodes_[b].grad;
      for (std::size_t i = 0; i < g.numel(); ++i) gb.data[i] -= g.data[i];
    });
  }

  NodeId mul(NodeId a, NodeId b) {
    const Tensor &va = value(a), &vb = value(b);
    check(va.same_shape(vb), "mul: shape mismatch");
    Tensor out = va;
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] *= vb.data[i];
    return push(std::move(out), "mul", [this, a, b](const Tensor& g) {
      const Tensor &va = value(a), &vb = value(b);
      Tensor &ga = nodes_[a].grad, &gb = nodes_[b].grad;
      for (std::size_t i = 0; i < g.numel(); ++i) {
        ga.data[i] += g.data[i] * vb.data[i];
        gb.data[i] += g.data[i] * va.data[i];
      }
    });
  }

  NodeId scale(NodeId a, double c) {
    Tensor out = value(a);
    for (double& v : out.data) v *= c;
    return push(std::move(out), "scale", [this, a, c](const Tensor& g) {
      Tensor& ga = nodes_[a].grad;
      for (std::size_t i = 0; i < g.numel(); ++i) ga.data[i] += c * g.data[i];
    });
  }

  NodeId tanh_op(NodeId a) {
    Tensor out = value(a);
    for (double& v : out.data) v = std::tanh(v);
    NodeId id = push(std::move(out), "tanh", nullptr);
    nodes_[id].backprop = [this, a, id](const Tensor& g) {
      const Tensor& y = value(id);
      Tensor& ga = nodes_[a].grad;
      for (std::size_t i = 0; i < g.numel(); ++i)
        ga.data[i] += g.data[i] * (1.0 - y.data[i] * y.data[i]);
    };
    return id;
  }

  NodeId sigmoid(NodeId a) {
    Tensor out = value(a);
    for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
    NodeId id = push(std::move(out), "sigmoid", nullptr);
    nodes_[id].backprop = [this, a, id](const Tensor& g) {
      const Tensor& y = value(id);
      Tensor& ga = nodes_[a].grad;
      for (std::size_t i = 0; i < g.numel(); ++i)
        ga.data[i] += g.data[i] * y.data[i] * (1.0 - y.data[i]);
    };
    return id;
  }

  // ---- linear algebra ----

  // [m,n] x [n,k] -> [m,k], or [m,n] x [n] -> [m].
  NodeId matmul(NodeId a, NodeId b) {
    const Tensor &A = value(a), &B = value(b);
    check(A.rank() == 2, "matmul: lhs must be a matrix");
    const std::size_t m = A.shape[0], n = A.shape[1];
    const bool vec = B.rank() == 1;
    const std::size_t k = vec ? 1 : B.shape[1];
    check((vec ? B.shape[0] : B.shape[0]) == n, "matmul: inner dims disagree");
    Tensor out(vec ? std::vector<std::size_t>{m} : std::vector<std::size_t>{m, k});
    for (std::size_t i = 0; i < m; ++i) {
      const double* arow = &A.data[i * n];
      for (std::size_t c = 0; c < k; ++c) {
        double s = 0;
        for (std::size_t j = 0; j < n; ++j) s += arow[j] * B.data[j * k + c];
        out.data[i * k + c] = s;
      }
    }
    return push(std::move(out), "matmul", [this, a, b, m, n, k](const Tensor& g) {
      const Tensor &A = value(a), &B = value(b);
      Tensor &gA = nodes_[a].grad, &gB = nodes_[b].grad;
      // dA = G * B^T ; dB = A^T * G
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double s = 0;
          for (std::size_t c = 0; c < k; ++c) s += g.data[i * k + c] * B.data[j * k + c];
          gA.data[i * n + j] += s;
        }
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t c = 0; c < k; ++c) {
          double s = 0;
          for (std::size_t i = 0; i < m; ++i) s += A.data[i * n + j] * g.data[i * k + c];
          gB.data[j * k + c] += s;
        }
    });
  }

  NodeId dot(NodeId a, NodeId b) {
    const Tensor &va = value(a), &vb = value(b);
    check(va.rank() == 1 && va.same_shape(vb), "dot: need equal-length vectors");
    double s = 0;
    for (std::size_t i = 0; i < va.numel(); ++i) s += va.data[i] * vb.data[i];
    return push(Tensor::scalar(s), "dot", [this, a, b](const Tensor& g) {
      const Tensor &va = value(a), &vb = value(b);
      Tensor &ga = nodes_[a].grad, &gb = nodes_[b].grad;
      for (std::size_t i = 0; i < va.numel(); ++i) {
        ga.data[i] += g.data[0] * vb.data[i];
        gb.data[i] += g.data[0] * va.data[i];
      }
    });
  }

  NodeId sum(NodeId a) {
    const Tensor& va = value(a);
    double s = 0;
    for (double v : va.data) s += v;
    return push(Tensor::scalar(s), "sum", [this, a](const Tensor& g) {
      Tensor& ga = nodes_[a].grad;
      for (double& v : ga.data) v += g.data[0];
    });
  }

  // ---- structure ----

  // Concatenate rank-1 vectors into one longer vector.
  NodeId concat(const std::vector<NodeId>& parts) {
    check(!parts.empty(), "concat: empty");
    std::size_t total = 0;
    for (NodeId p : parts) {
      check(value(p).rank() == 1, "concat: parts must be vectors");
      total += value(p).numel();
    }
    Tensor out({total});
    std::size_t off = 0;
    for (NodeId p : parts) {
      const Tensor& v = value(p);
      std::copy(v.data.begin(), v.data.end(), out.data.begin() + off);
      off += v.numel();
    }
    return push(std::move(out), "concat", [this, parts](const Tensor& g) {
      std::size_t off = 0;
      for (NodeId p : parts) {
        Tensor& gp = nodes_[p].grad;
        for (std::size_t i = 0; i < gp.numel(); ++i) gp.data[i] += g.data[off + i];
        off += gp.numel();
      }
    });
  }

  // Column-stack rank-1 vectors of length d into a [d, n] matrix.
  NodeId concat_cols(const std::vector<NodeId>& cols) {
    check(!cols.empty(), "concat_cols: empty");
    const std::size_t d = value(cols[0]).numel(), n = cols.size();
    Tensor out({d, n});
    for (std::size_t c = 0; c < n; ++c) {
      const Tensor& v = value(cols[c]);
      check(v.rank() == 1 && v.numel() == d, "concat_cols: column length mismatch");
      for (std::size_t i = 0; i < d; ++i) out.data[i * n + c] = v.data[i];
    }
    return push(std::move(out), "concat_cols", [this, cols, d, n](const Tensor& g) {
      for (std::size_t c = 0; c < n; ++c) {
        Tensor& gc = nodes_[cols[c]].grad;
        for (std::size_t i = 0; i < d; ++i) gc.data[i] += g.data[i * n + c];
      }
    });
  }

  // Stack scalars into a vector.
  NodeId stack(const std::vector<NodeId>& scalars) {
    Tensor out({scalars.size()});
    for (std::size_t i = 0; i < scalars.size(); ++i) {
      check(value(scalars[i]).numel() == 1, "stack: inputs must be scalars");
      out.data[i] = value(scalars[i]).data[0];
    }
    return push(std::move(out), "stack", [this, scalars](const Tensor& g) {
      for (std::size_t i = 0; i < scalars.size(); ++i)
        nodes_[scalars[i]].grad.data[0] += g.data[i];
    });
  }

  // Sub-vector [i0, i1) of a rank-1 vector.
  NodeId slice(NodeId a, std::size_t i0, std::size_t i1) {
    const Tensor& va = value(a);
    check(va.rank() == 1 && i0 < i1 && i1 <= va.numel(), "slice: bad range");
    Tensor out({i1 - i0});
    std::copy(va.data.begin() + i0, va.data.begin() + i1, out.data.begin());
    return push(std::move(out), "slice", [this, a, i0](const Tensor& g) {
      Tensor& ga = nodes_[a].grad;
      for (std::size_t i = 0; i < g.numel(); ++i) ga.data[i0 + i] += g.data[i];
    });
  }

  // Row i of a matrix (embedding lookup).
  NodeId row(NodeId a, std::size_t i) {
    const Tensor& va = value(a);
    check(va.rank() == 2 && i < va.shape[0], "row: index out of range");
    const std::size_t c = va.shape[1];
    Tensor out({c});
    std::copy(va.data.begin() + i * c, va.data.begin() + (i + 1) * c, out.data.begin());
    return push(std::move(out), "row", [this, a, i, c](const Tensor& g) {
      Tensor& ga = nodes_[a].grad;
      for (std::size_t j = 0; j < c; ++j) ga.data[i * c + j] += g.data[j];
    });
  }

  // Column j of a matrix.
  NodeId col(NodeId a, std::size_t j) {
    const Tensor& va = value(a);
    check(va.rank() == 2 && j < va.shape[1], "col: index out of range");
    const std::size_t r = va.shape[0], c = va.shape[1];
    Tensor out({r});
    for (std::size_t i = 0; i < r; ++i) out.data[i] = va.data[i * c + j];
    return push(std::move(out), "col", [this, a, j, r, c](const Tensor& g) {
      Tensor& ga = nodes_[a].grad;
      for (std::size_t i = 0; i < r; ++i) ga.data[i * c + j] += g.data[i];
    });
  }

  // Scalar element of a rank-1 vector.
  NodeId elem(NodeId a, std::size_t i) {
    const Tensor& va = value(a);
    check(va.rank() == 1 && i < va.numel(), "elem: index out of range");
    return push(Tensor::scalar(va.data[i]), "elem", [this, a, i](const Tensor& g) {
      nodes_[a].grad.data[i] += g.data[0];
    });
  }

  // ---- reductions with special numerics ----

  // log(sum(exp(v))) over a rank-1 vector with max-subtraction. Entries at
  // -inf contribute nothing and receive exactly zero gradient.
  NodeId logsumexp(NodeId a) {
    const Tensor& va = value(a);
    check(va.rank() == 1, "logsumexp: need a vector");
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : va.data) mx = std::max(mx, v);
    double out;
    if (std::isinf(mx) && mx < 0) {
      out = mx;  // all -inf
    } else {
      double s = 0;
      for (double v : va.data) s += std::exp(v - mx);
      out = mx + std::log(s);
    }
    NodeId id = push(Tensor::scalar(out), "logsumexp", nullptr);
    nodes_[id].backprop = [this, a, id](const Tensor& g) {
      const Tensor& va = value(a);
      const double lse = value(id).data[0];
      if (std::isinf(lse) && lse < 0) return;
      Tensor& ga = nodes_[a].grad;
      for (std::size_t i = 0; i < va.numel(); ++i)
        ga.data[i] += g.data[0] * std::exp(va.data[i] - lse);
    };
    return id;
  }

  NodeId softmax(NodeId a) {
    const Tensor& va = value(a);
    check(va.rank() == 1, "softmax: need a vector");
    double mx = va.data[0];
    for (double v : va.data) mx = std::max(mx, v);
    Tensor out({va.numel()});
    double s = 0;
    for (std::size_t i = 0; i < va.numel(); ++i) s += out.data[i] = std::exp(va.data[i] - mx);
    for (double& v : out.data) v /= s;
    NodeId id = push(std::move(out), "softmax", nullptr);
    nodes_[id].backprop = [this, a, id](const Tensor& g) {
      const Tensor& y = value(id);
      Tensor& ga = nodes_[a].grad;
      double gy = 0;
      for (std::size_t i = 0; i < y.numel(); ++i) gy += g.data[i] * y.data[i];
      for (std::size_t i = 0; i < y.numel(); ++i)
        ga.data[i] += y.data[i] * (g.data[i] - gy);
    };
    return id;
  }

  // Per-row max over the columns of a [r, c] matrix -> [r]. Gradient is
  // routed to the first maximal column of each row.
  NodeId rowmax(NodeId a) {
    const Tensor& va = value(a);
    check(va.rank() == 2, "rowmax: need a matrix");
    const std::size_t r = va.shape[0], c = va.shape[1];
    Tensor out({r});
    auto argmax = std::make_shared<std::vector<std::size_t>>(r);
    for (std::size_t i = 0; i < r; ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < c; ++j)
        if (va.data[i * c + j] > va.data[i * c + best]) best = j;
      (*argmax)[i] = best;
      out.data[i] = va.data[i * c + best];
    }
    return push(std::move(out), "rowmax", [this, a, c, argmax](const Tensor& g) {
      Tensor& ga = nodes_[a].grad;
      for (std::size_t i = 0; i < g.numel(); ++i)
        ga.data[i * c + (*argmax)[i]] += g.data[i];
    });
  }

  // ---- helpers ----

  NodeId affine(NodeId w, NodeId x, NodeId b) { return add(matmul(w, x), b); }

  // -log softmax(logits)[target]
  NodeId cross_entropy(NodeId logits, std::size_t target) {
    return sub(logsumexp(logits), elem(logits, target));
  }

  // Runs the reverse sweep from a scalar loss node. Leaves not reachable
  // from the loss keep their zero gradient.
  void backward(NodeId loss) {
    check(value(loss).numel() == 1, "backward: loss must be scalar");
    for (std::size_t i = 0; i <= static_cast<std::size_t>(loss); ++i)
      check(!nodes_[i].value.has_nan(),
            std::string("backward: NaN in forward value of node #") +
                std::to_string(i) + " (" + nodes_[i].op + ")");
    for (auto& n : nodes_) n.grad = Tensor(n.value.shape);
    nodes_[loss].grad.data[0] = 1.0;
    for (int i = loss; i >= 0; --i)
      if (nodes_[i].backprop) nodes_[i].backprop(nodes_[i].grad);
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    const char* op;
    std::function<void(const Tensor&)> backprop;
  };

  NodeId push(Tensor v, const char* op, std::function<void(const Tensor&)> bp) {
    nodes_.push_back(Node{std::move(v), Tensor{}, op, std::move(bp)});
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  void accumulate(NodeId id, const Tensor& g) {
    Tensor& t = nodes_[id].grad;
    for (std::size_t i = 0; i < g.numel(); ++i) t.data[i] += g.data[i];
  }

  std::vector<Node> nodes_;
};

}  // namespace zat
