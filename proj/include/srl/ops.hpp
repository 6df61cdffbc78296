#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "srl/errors.hpp"
#include "srl/rng.hpp"
#include "srl/tape.hpp"
#include "srl/tensor.hpp"

namespace srl {

enum class Mode { kTrain, kInfer };

inline Var constant(Tape& tape, Tensor value) {
  return tape.record(std::move(value), {}, nullptr);
}

inline Var param(Tape& tape, Parameter& p) { return tape.param(p); }

// Row `row` of a rank-2 table, with the gradient scattered back into that row.
inline Var lookup(Tape& tape, Parameter& table, std::size_t row) {
  if (table.value.rank() != 2) throw DimensionError("lookup needs a matrix table");
  const std::size_t rows = table.value.dim(0), cols = table.value.dim(1);
  if (row >= rows) {
    throw ArgumentError("lookup row " + std::to_string(row) + " outside " +
                        table.name + " of " + std::to_string(rows) + " rows");
  }
  std::vector<double> out(table.value.data().begin() + row * cols,
                          table.value.data().begin() + (row + 1) * cols);
  Parameter* target = &table;
  return tape.record(Tensor::vector(std::move(out)), {},
                     [target, row, cols](Tape& t, NodeId self) {
                       const Tensor& g = t.grad(self);
                       for (std::size_t c = 0; c < cols; ++c) {
                         target->grad[row * cols + c] += g[c];
                       }
                     });
}

namespace detail {

inline void require_same(const Var& a, const Var& b, const char* op) {
  a.value().require_same_shape(b.value(), op);
}

template <typename F, typename G>
Var unary(Var x, F forward, G derivative) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = forward(in[i]);
  return x.tape->record(std::move(out), {x.id},
                        [x, derivative](Tape& t, NodeId self) {
                          const Tensor& in = t.value(x.id);
                          const Tensor& out = t.value(self);
                          const Tensor& g = t.grad(self);
                          Tensor& gx = t.grad(x.id);
                          for (std::size_t i = 0; i < g.size(); ++i) {
                            gx[i] += g[i] * derivative(in[i], out[i]);
                          }
                        });
}

}  // namespace detail

inline Var add(Var a, Var b) {
  detail::require_same(a, b, "add");
  Tensor out = a.value();
  out += b.value();
  return a.tape->record(std::move(out), {a.id, b.id}, [a, b](Tape& t, NodeId self) {
    const Tensor g = t.grad(self);
    t.grad(a.id) += g;
    t.grad(b.id) += g;
  });
}

// Sum of equally shaped tensors.
inline Var add_n(const std::vector<Var>& terms) {
  if (terms.empty()) throw ArgumentError("add_n of an empty list");
  Tensor out = terms.front().value();
  std::vector<NodeId> ids{terms.front().id};
  for (std::size_t i = 1; i < terms.size(); ++i) {
    detail::require_same(terms.front(), terms[i], "add_n");
    out += terms[i].value();
    ids.push_back(terms[i].id);
  }
  return terms.front().tape->record(std::move(out), ids, [ids](Tape& t, NodeId self) {
    const Tensor g = t.grad(self);
    for (NodeId id : ids) t.grad(id) += g;
  });
}

// Elementwise product.
inline Var mul(Var a, Var b) {
  detail::require_same(a, b, "mul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return a.tape->record(std::move(out), {a.id, b.id}, [a, b](Tape& t, NodeId self) {
    const Tensor g = t.grad(self);
    const Tensor& av = t.value(a.id);
    const Tensor& bv = t.value(b.id);
    Tensor& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    Tensor& gb = t.grad(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
  });
}

inline Var scale(Var x, double factor) {
  return detail::unary(
      x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

inline Var relu(Var x) {
  return detail::unary(
      x, [](double v) { return v < 0.0 ? 0.0 : v; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

inline Var sigmoid(Var x) {
  return detail::unary(
      x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

inline Var tanh(Var x) {
  return detail::unary(
      x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

inline Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return x.tape->record(Tensor::scalar(total), {x.id}, [x](Tape& t, NodeId self) {
    const double g = t.grad(self)[0];
    Tensor& gx = t.grad(x.id);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
  });
}

inline Var dot(Var a, Var b) { return sum(mul(a, b)); }

// Matrix product. Supports [m,k]x[k,n], [m,k]x[k] and [k]x[k,n].
inline Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const bool a_vec = av.rank() == 1;
  const bool b_vec = bv.rank() == 1;
  if ((av.rank() != 1 && av.rank() != 2) || (bv.rank() != 1 && bv.rank() != 2) ||
      (a_vec && b_vec)) {
    throw DimensionError("matmul of " + shape_string(av.shape()) + " and " +
                         shape_string(bv.shape()));
  }
  const std::size_t m = a_vec ? 1 : av.dim(0);
  const std::size_t k = a_vec ? av.dim(0) : av.dim(1);
  const std::size_t kb = bv.dim(0);
  const std::size_t n = b_vec ? 1 : bv.dim(1);
  if (k != kb) {
    throw DimensionError("matmul inner extents differ: " + shape_string(av.shape()) +
                         " x " + shape_string(bv.shape()));
  }
  Shape out_shape = a_vec ? Shape{n} : (b_vec ? Shape{m} : Shape{m, n});
  Tensor out(out_shape);
  const double* A = av.data().data();
  const double* B = bv.data().data();
  double* C = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = B + p * n;
      double* crow = C + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  return a.tape->record(std::move(out), {a.id, b.id},
                        [a, b, m, k, n](Tape& t, NodeId self) {
                          const Tensor g = t.grad(self);
                          const double* G = g.data().data();
                          const double* A = t.value(a.id).data().data();
                          const double* B = t.value(b.id).data().data();
                          double* GA = t.grad(a.id).data().data();
                          for (std::size_t i = 0; i < m; ++i) {
                            for (std::size_t p = 0; p < k; ++p) {
                              double acc = 0.0;
                              for (std::size_t j = 0; j < n; ++j) {
                                acc += G[i * n + j] * B[p * n + j];
                              }
                              GA[i * k + p] += acc;
                            }
                          }
                          double* GB = t.grad(b.id).data().data();
                          for (std::size_t i = 0; i < m; ++i) {
                            for (std::size_t p = 0; p < k; ++p) {
                              const double aip = A[i * k + p];
                              if (aip == 0.0) continue;
                              for (std::size_t j = 0; j < n; ++j) {
                                GB[p * n + j] += aip * G[i * n + j];
                              }
                            }
                          }
                        });
}

// W x + b for a matrix W and vectors x, b.
inline Var affine(Var w, Var x, Var b) { return add(matmul(w, x), b); }

// out[l] = sum_i sum_j a[i] W[i,l,j] p[j] for W of shape [d1, L, d2].
inline Var bilinear(Var w, Var a, Var p) {
  const Tensor& wv = w.value();
  const Tensor& av = a.value();
  const Tensor& pv = p.value();
  if (wv.rank() != 3 || av.rank() != 1 || pv.rank() != 1 || wv.dim(0) != av.dim(0) ||
      wv.dim(2) != pv.dim(0)) {
    throw DimensionError("bilinear: W " + shape_string(wv.shape()) + ", a " +
                         shape_string(av.shape()) + ", p " + shape_string(pv.shape()));
  }
  const std::size_t d1 = wv.dim(0), labels = wv.dim(1), d2 = wv.dim(2);
  Tensor out(Shape{labels});
  for (std::size_t i = 0; i < d1; ++i) {
    const double ai = av[i];
    if (ai == 0.0) continue;
    for (std::size_t l = 0; l < labels; ++l) {
      const double* row = wv.data().data() + (i * labels + l) * d2;
      double acc = 0.0;
      for (std::size_t j = 0; j < d2; ++j) acc += row[j] * pv[j];
      out[l] += ai * acc;
    }
  }
  return w.tape->record(
      std::move(out), {w.id, a.id, p.id}, [w, a, p, d1, labels, d2](Tape& t, NodeId self) {
        const Tensor g = t.grad(self);
        const Tensor& wv = t.value(w.id);
        const Tensor& av = t.value(a.id);
        const Tensor& pv = t.value(p.id);
        Tensor& gw = t.grad(w.id);
        Tensor& ga = t.grad(a.id);
        Tensor& gp = t.grad(p.id);
        for (std::size_t i = 0; i < d1; ++i) {
          for (std::size_t l = 0; l < labels; ++l) {
            const std::size_t base = (i * labels + l) * d2;
            const double gl = g[l];
            double acc = 0.0;
            for (std::size_t j = 0; j < d2; ++j) {
              gw[base + j] += gl * av[i] * pv[j];
              acc += wv[base + j] * pv[j];
              gp[j] += gl * av[i] * wv[base + j];
            }
            ga[i] += gl * acc;
          }
        }
      });
}

// Contracts the last axis of W [d1, L, d2] with p [d2], giving [d1, L].
// bilinear(W, a, p) == matmul(a, bilinear_right(W, p)).
inline Var bilinear_right(Var w, Var p) {
  const Tensor& wv = w.value();
  const Tensor& pv = p.value();
  if (wv.rank() != 3 || pv.rank() != 1 || wv.dim(2) != pv.dim(0)) {
    throw DimensionError("bilinear_right: W " + shape_string(wv.shape()) + ", p " +
                         shape_string(pv.shape()));
  }
  const std::size_t rows = wv.dim(0) * wv.dim(1), d2 = wv.dim(2);
  Tensor out(Shape{wv.dim(0), wv.dim(1)});
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = wv.data().data() + r * d2;
    double acc = 0.0;
    for (std::size_t j = 0; j < d2; ++j) acc += row[j] * pv[j];
    out[r] = acc;
  }
  return w.tape->record(std::move(out), {w.id, p.id}, [w, p, rows, d2](Tape& t, NodeId self) {
    const Tensor g = t.grad(self);
    const Tensor& wv = t.value(w.id);
    const Tensor& pv = t.value(p.id);
    Tensor& gw = t.grad(w.id);
    Tensor& gp = t.grad(p.id);
    for (std::size_t r = 0; r < rows; ++r) {
      const double gr = g[r];
      if (gr == 0.0) continue;
      for (std::size_t j = 0; j < d2; ++j) {
        gw[r * d2 + j] += gr * pv[j];
        gp[j] += gr * wv[r * d2 + j];
      }
    }
  });
}

inline Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ArgumentError("concat of an empty list");
  std::vector<double> out;
  std::vector<NodeId> ids;
  for (const Var& part : parts) {
    if (part.value().rank() != 1) {
      throw DimensionError("concat part of shape " + shape_string(part.shape()));
    }
    out.insert(out.end(), part.value().data().begin(), part.value().data().end());
    ids.push_back(part.id);
  }
  return parts.front().tape->record(Tensor::vector(std::move(out)), ids,
                                    [ids](Tape& t, NodeId self) {
                                      const Tensor g = t.grad(self);
                                      std::size_t offset = 0;
                                      for (NodeId id : ids) {
                                        Tensor& gi = t.grad(id);
                                        for (std::size_t i = 0; i < gi.size(); ++i) {
                                          gi[i] += g[offset + i];
                                        }
                                        offset += gi.size();
                                      }
                                    });
}

inline Var slice(Var x, std::size_t offset, std::size_t length) {
  const Tensor& xv = x.value();
  if (xv.rank() != 1 || offset + length > xv.size() || length == 0) {
    throw DimensionError("slice [" + std::to_string(offset) + ", +" +
                         std::to_string(length) + ") of " + shape_string(xv.shape()));
  }
  std::vector<double> out(xv.data().begin() + offset,
                          xv.data().begin() + offset + length);
  return x.tape->record(Tensor::vector(std::move(out)), {x.id},
                        [x, offset](Tape& t, NodeId self) {
                          const Tensor g = t.grad(self);
                          Tensor& gx = t.grad(x.id);
                          for (std::size_t i = 0; i < g.size(); ++i) gx[offset + i] += g[i];
                        });
}

// Inverted-dropout mask: entries are 0 or 1/keep_prob.
inline Tensor dropout_mask(const Shape& shape, double keep_prob, Rng& rng) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) {
    throw ArgumentError("keep probability must lie in (0, 1], got " +
                        std::to_string(keep_prob));
  }
  Tensor mask(shape);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = rng.bernoulli(keep_prob) ? 1.0 / keep_prob : 0.0;
  }
  return mask;
}

// Inverted dropout. In infer mode, or with keep_prob == 1, returns x itself.
// A shared mask (variational dropout) is used instead of fresh draws.
inline Var dropout(Var x, double keep_prob, Mode mode, Rng& rng,
                   const Tensor* shared_mask = nullptr) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) {
    throw ArgumentError("keep probability must lie in (0, 1], got " +
                        std::to_string(keep_prob));
  }
  if (mode == Mode::kInfer || keep_prob == 1.0) return x;
  Tensor mask = shared_mask ? *shared_mask : dropout_mask(x.shape(), keep_prob, rng);
  mask.require_same_shape(x.value(), "dropout mask");
  return mul(x, constant(*x.tape, std::move(mask)));
}

// -log softmax(scores)[gold], computed with max subtraction.
inline Var cross_entropy(Var scores, std::size_t gold) {
  const Tensor& s = scores.value();
  if (s.rank() != 1) throw DimensionError("cross_entropy needs a score vector");
  if (gold >= s.size()) {
    throw ArgumentError("gold label " + std::to_string(gold) + " outside " +
                        std::to_string(s.size()) + " labels");
  }
  const double mx = *std::max_element(s.data().begin(), s.data().end());
  double z = 0.0;
  for (double v : s.data()) z += std::exp(v - mx);
  const double log_z = mx + std::log(z);
  return scores.tape->record(
      Tensor::scalar(log_z - s[gold]), {scores.id},
      [scores, gold, log_z](Tape& t, NodeId self) {
        const double g = t.grad(self)[0];
        const Tensor& s = t.value(scores.id);
        Tensor& gs = t.grad(scores.id);
        for (std::size_t i = 0; i < s.size(); ++i) {
          gs[i] += g * (std::exp(s[i] - log_z) - (i == gold ? 1.0 : 0.0));
        }
      });
}

inline Var mean(const std::vector<Var>& scalars) {
  return scale(add_n(scalars), 1.0 / static_cast<double>(scalars.size()));
}

inline void backward(Var loss) { loss.tape->backward(loss); }

}  // namespace srl
