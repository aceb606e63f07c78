#include "bvq/graph.hpp"

#include <cmath>

namespace bvq::ad {

namespace {

void check_finite_scalar(float v, const char* op) {
    if (!std::isfinite(v)) numeric_error(std::string(op) + ": non-finite result");
}

// output-column range with iw = ow*stride + dw - pad inside [0, ww)
void conv_ow_range(int dw, int stride, int pad, int ww, int wo, int& lo, int& hi) {
    lo = 0;
    while (lo < wo && lo * stride + dw - pad < 0) ++lo;
    hi = wo;
    while (hi > lo && (hi - 1) * stride + dw - pad >= ww) --hi;
}

}  // namespace

Var Graph::push(Node n) {
    if (n.requires_grad && n.grad.empty()) n.grad = Tensor::zeros(n.value.shape);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int32_t>(nodes_.size() - 1)};
}

Var Graph::leaf(Tensor v, bool requires_grad) {
    Node n;
    n.value = std::move(v);
    n.requires_grad = requires_grad;
    return push(std::move(n));
}

const Tensor& Graph::grad(Var v) const {
    const Node& n = node(v);
    if (!n.requires_grad) data_error(std::string("grad requested for non-differentiable node (op=") + n.op + ")");
    return n.grad;
}

float Graph::scalar(Var v) const {
    const Tensor& t = value(v);
    if (t.numel() != 1) data_error("scalar() on tensor of shape " + shape_str(t.shape));
    return t.data[0];
}

void Graph::backward(Var loss) {
    Node& l = node(loss);
    if (l.value.numel() != 1)
        data_error("backward: loss must be scalar, got shape " + shape_str(l.value.shape));
    if (!l.requires_grad)
        data_error("backward: loss does not depend on any differentiable leaf");
    l.grad.data[0] = 1.0f;
    for (size_t i = nodes_.size(); i-- > 0;) {
        Node& n = nodes_[i];
        if (n.requires_grad && n.backward) n.backward(*this, n);
    }
}

// ---------------------------------------------------------------------------
// op helpers

namespace {

bool wants_grad(const Graph::Node& a) { return a.requires_grad; }

}  // namespace

Var Graph::matmul(Var av, Var bv) {
    const Tensor& a = value(av);
    const Tensor& b = value(bv);
    if (a.shape.size() != 2 || b.shape.size() != 2 || a.shape[1] != b.shape[0])
        data_error("matmul: incompatible shapes " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    const uint32_t m = a.shape[0], k = a.shape[1], n = b.shape[1];

    Node out;
    out.op = "matmul";
    out.value = Tensor::zeros({m, n});
    {
        const float* pa = a.data.data();
        const float* pb = b.data.data();
        float* py = out.value.data.data();
        for (uint32_t i = 0; i < m; ++i)
            for (uint32_t kk = 0; kk < k; ++kk) {
                const float x = pa[i * k + kk];
                const float* brow = pb + kk * n;
                float* yrow = py + i * n;
                for (uint32_t j = 0; j < n; ++j) yrow[j] += x * brow[j];
            }
    }
    out.requires_grad = wants_grad(node(av)) || wants_grad(node(bv));
    if (out.requires_grad) {
        out.backward = [av, bv, m, k, n](Graph& g, const Node& self) {
            const float* gy = self.grad.data.data();
            if (g.node(av).requires_grad) {
                float* ga = g.node(av).grad.data.data();
                const float* pb = g.value(bv).data.data();
                for (uint32_t i = 0; i < m; ++i)
                    for (uint32_t kk = 0; kk < k; ++kk) {
                        const float* brow = pb + kk * n;
                        const float* grow = gy + i * n;
                        float acc = 0.0f;
                        for (uint32_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                        ga[i * k + kk] += acc;
                    }
            }
            if (g.node(bv).requires_grad) {
                float* gb = g.node(bv).grad.data.data();
                const float* pa = g.value(av).data.data();
                for (uint32_t kk = 0; kk < k; ++kk)
                    for (uint32_t i = 0; i < m; ++i) {
                        const float x = pa[i * k + kk];
                        const float* grow = gy + i * n;
                        float* brow = gb + kk * n;
                        for (uint32_t j = 0; j < n; ++j) brow[j] += x * grow[j];
                    }
            }
        };
    }
    return push(std::move(out));
}

Var Graph::conv2d(Var xv, Var wv, int stride, int pad) {
    const Tensor& x = value(xv);
    const Tensor& w = value(wv);
    if (x.shape.size() != 3 || w.shape.size() != 4 || w.shape[1] != x.shape[0])
        data_error("conv2d: incompatible shapes input " + shape_str(x.shape) + " kernel " + shape_str(w.shape));
    if (stride < 1) data_error("conv2d: stride must be >= 1");
    const int ci = static_cast<int>(x.shape[0]), hh = static_cast<int>(x.shape[1]), ww = static_cast<int>(x.shape[2]);
    const int co = static_cast<int>(w.shape[0]), kh = static_cast<int>(w.shape[2]), kw = static_cast<int>(w.shape[3]);
    const int ho = (hh + 2 * pad - kh) / stride + 1;
    const int wo = (ww + 2 * pad - kw) / stride + 1;
    if (ho < 1 || wo < 1)
        data_error("conv2d: kernel " + shape_str(w.shape) + " larger than padded input " + shape_str(x.shape));

    auto ow_range = [stride, pad, ww, wo](int dw, int& lo, int& hi) {
        conv_ow_range(dw, stride, pad, ww, wo, lo, hi);
    };

    Node out;
    out.op = "conv2d";
    out.value = Tensor::zeros({static_cast<uint32_t>(co), static_cast<uint32_t>(ho), static_cast<uint32_t>(wo)});
    {
        const float* px = x.data.data();
        const float* pw = w.data.data();
        float* py = out.value.data.data();
        for (int oc = 0; oc < co; ++oc)
            for (int ic = 0; ic < ci; ++ic)
                for (int dh = 0; dh < kh; ++dh)
                    for (int dw = 0; dw < kw; ++dw) {
                        const float wval = pw[((oc * ci + ic) * kh + dh) * kw + dw];
                        int lo, hi;
                        ow_range(dw, lo, hi);
                        for (int oh = 0; oh < ho; ++oh) {
                            const int ih = oh * stride + dh - pad;
                            if (ih < 0 || ih >= hh) continue;
                            const float* xrow = px + (ic * hh + ih) * ww + (lo * stride + dw - pad);
                            float* yrow = py + (oc * ho + oh) * wo;
                            if (stride == 1) {
                                for (int ow = lo; ow < hi; ++ow) yrow[ow] += wval * xrow[ow - lo];
                            } else {
                                for (int ow = lo; ow < hi; ++ow) yrow[ow] += wval * xrow[(ow - lo) * stride];
                            }
                        }
                    }
    }
    out.requires_grad = wants_grad(node(xv)) || wants_grad(node(wv));
    if (out.requires_grad) {
        out.backward = [xv, wv, stride, pad, ci, hh, ww, co, kh, kw, ho, wo, ow_range](Graph& g, const Node& self) {
            const float* gy = self.grad.data.data();
            if (g.node(xv).requires_grad) {
                float* gx = g.node(xv).grad.data.data();
                const float* pw = g.value(wv).data.data();
                for (int oc = 0; oc < co; ++oc)
                    for (int ic = 0; ic < ci; ++ic)
                        for (int dh = 0; dh < kh; ++dh)
                            for (int dw = 0; dw < kw; ++dw) {
                                const float wval = pw[((oc * ci + ic) * kh + dh) * kw + dw];
                                int lo, hi;
                                ow_range(dw, lo, hi);
                                for (int oh = 0; oh < ho; ++oh) {
                                    const int ih = oh * stride + dh - pad;
                                    if (ih < 0 || ih >= hh) continue;
                                    float* xrow = gx + (ic * hh + ih) * ww + (lo * stride + dw - pad);
                                    const float* grow = gy + (oc * ho + oh) * wo;
                                    if (stride == 1) {
                                        for (int ow = lo; ow < hi; ++ow) xrow[ow - lo] += wval * grow[ow];
                                    } else {
                                        for (int ow = lo; ow < hi; ++ow) xrow[(ow - lo) * stride] += wval * grow[ow];
                                    }
                                }
                            }
            }
            if (g.node(wv).requires_grad) {
                float* gw = g.node(wv).grad.data.data();
                const float* px = g.value(xv).data.data();
                for (int oc = 0; oc < co; ++oc)
                    for (int ic = 0; ic < ci; ++ic)
                        for (int dh = 0; dh < kh; ++dh)
                            for (int dw = 0; dw < kw; ++dw) {
                                int lo, hi;
                                ow_range(dw, lo, hi);
                                float acc = 0.0f;
                                for (int oh = 0; oh < ho; ++oh) {
                                    const int ih = oh * stride + dh - pad;
                                    if (ih < 0 || ih >= hh) continue;
                                    const float* xrow = px + (ic * hh + ih) * ww + (lo * stride + dw - pad);
                                    const float* grow = gy + (oc * ho + oh) * wo;
                                    if (stride == 1) {
                                        for (int ow = lo; ow < hi; ++ow) acc += xrow[ow - lo] * grow[ow];
                                    } else {
                                        for (int ow = lo; ow < hi; ++ow) acc += xrow[(ow - lo) * stride] * grow[ow];
                                    }
                                }
                                gw[((oc * ci + ic) * kh + dh) * kw + dw] += acc;
                            }
            }
        };
    }
    return push(std::move(out));
}

Var Graph::bias_chw(Var xv, Var bv) {
    const Tensor& x = value(xv);
    const Tensor& b = value(bv);
    if (x.shape.size() != 3 || b.shape.size() != 1 || b.shape[0] != x.shape[0])
        data_error("bias_chw: shape mismatch " + shape_str(x.shape) + " vs " + shape_str(b.shape));
    const uint32_t c = x.shape[0], hw = x.shape[1] * x.shape[2];

    Node out;
    out.op = "bias_chw";
    out.value = x;
    for (uint32_t ch = 0; ch < c; ++ch) {
        const float bval = b.data[ch];
        float* row = out.value.data.data() + ch * hw;
        for (uint32_t i = 0; i < hw; ++i) row[i] += bval;
    }
    out.requires_grad = wants_grad(node(xv)) || wants_grad(node(bv));
    if (out.requires_grad) {
        out.backward = [xv, bv, c, hw](Graph& g, const Node& self) {
            const float* gy = self.grad.data.data();
            if (g.node(xv).requires_grad) {
                float* gx = g.node(xv).grad.data.data();
                for (size_t i = 0; i < self.grad.numel(); ++i) gx[i] += gy[i];
            }
            if (g.node(bv).requires_grad) {
                float* gb = g.node(bv).grad.data.data();
                for (uint32_t ch = 0; ch < c; ++ch) {
                    float acc = 0.0f;
                    const float* row = gy + ch * hw;
                    for (uint32_t i = 0; i < hw; ++i) acc += row[i];
                    gb[ch] += acc;
                }
            }
        };
    }
    return push(std::move(out));
}

Var Graph::bias_cols(Var xv, Var bv) {
    const Tensor& x = value(xv);
    const Tensor& b = value(bv);
    if (x.shape.size() != 2 || b.shape.size() != 1 || b.shape[0] != x.shape[1])
        data_error("bias_cols: shape mismatch " + shape_str(x.shape) + " vs " + shape_str(b.shape));
    const uint32_t r = x.shape[0], c = x.shape[1];

    Node out;
    out.op = "bias_cols";
    out.value = x;
    for (uint32_t i = 0; i < r; ++i) {
        float* row = out.value.data.data() + i * c;
        for (uint32_t j = 0; j < c; ++j) row[j] += b.data[j];
    }
    out.requires_grad = wants_grad(node(xv)) || wants_grad(node(bv));
    if (out.requires_grad) {
        out.backward = [xv, bv, r, c](Graph& g, const Node& self) {
            const float* gy = self.grad.data.data();
            if (g.node(xv).requires_grad) {
                float* gx = g.node(xv).grad.data.data();
                for (size_t i = 0; i < self.grad.numel(); ++i) gx[i] += gy[i];
            }
            if (g.node(bv).requires_grad) {
                float* gb = g.node(bv).grad.data.data();
                for (uint32_t i = 0; i < r; ++i)
                    for (uint32_t j = 0; j < c; ++j) gb[j] += gy[i * c + j];
            }
        };
    }
    return push(std::move(out));
}

Var Graph::upsample2x(Var xv) {
    const Tensor& x = value(xv);
    if (x.shape.size() != 3) data_error("upsample2x: expected (C,H,W), got " + shape_str(x.shape));
    const uint32_t c = x.shape[0], h = x.shape[1], w = x.shape[2];

    Node out;
    out.op = "upsample2x";
    out.value = Tensor::zeros({c, 2 * h, 2 * w});
    for (uint32_t ch = 0; ch < c; ++ch)
        for (uint32_t i = 0; i < h; ++i) {
            const float* xrow = x.data.data() + (ch * h + i) * w;
            float* y0 = out.value.data.data() + (ch * 2 * h + 2 * i) * 2 * w;
            float* y1 = y0 + 2 * w;
            for (uint32_t j = 0; j < w; ++j) {
                const float v = xrow[j];
                y0[2 * j] = v;
                y0[2 * j + 1] = v;
                y1[2 * j] = v;
                y1[2 * j + 1] = v;
            }
        }
    out.requires_grad = wants_grad(node(xv));
    if (out.requires_grad) {
        out.backward = [xv, c, h, w](Graph& g, const Node& self) {
            float* gx = g.node(xv).grad.data.data();
            const float* gy = self.grad.data.data();
            for (uint32_t ch = 0; ch < c; ++ch)
                for (uint32_t i = 0; i < h; ++i) {
                    float* xrow = gx + (ch * h + i) * w;
                    const float* y0 = gy + (ch * 2 * h + 2 * i) * 2 * w;
                    const float* y1 = y0 + 2 * w;
                    for (uint32_t j = 0; j < w; ++j)
                        xrow[j] += y0[2 * j] + y0[2 * j + 1] + y1[2 * j] + y1[2 * j + 1];
                }
        };
    }
    return push(std::move(out));
}

Var Graph::relu(Var xv) {
    const Tensor& x = value(xv);
    Node out;
    out.op = "relu";
    out.value = x;
    for (float& v : out.value.data) v = v > 0.0f ? v : 0.0f;
    out.requires_grad = wants_grad(node(xv));
    if (out.requires_grad) {
        out.backward = [xv](Graph& g, const Node& self) {
            float* gx = g.node(xv).grad.data.data();
            const float* gy = self.grad.data.data();
            const float* px = g.value(xv).data.data();
            for (size_t i = 0; i < self.grad.numel(); ++i)
                if (px[i] > 0.0f) gx[i] += gy[i];
        };
    }
    return push(std::move(out));
}

Var Graph::sigmoid(Var xv) {
    const Tensor& x = value(xv);
    Node out;
    out.op = "sigmoid";
    out.value = x;
    for (float& v : out.value.data) v = 1.0f / (1.0f + std::exp(-v));
    out.requires_grad = wants_grad(node(xv));
    if (out.requires_grad) {
        out.backward = [xv](Graph& g, const Node& self) {
            float* gx = g.node(xv).grad.data.data();
            const float* gy = self.grad.data.data();
            const float* py = self.value.data.data();
            for (size_t i = 0; i < self.grad.numel(); ++i) gx[i] += gy[i] * py[i] * (1.0f - py[i]);
        };
    }
    return push(std::move(out));
}

Var Graph::add(Var av, Var bv) {
    const Tensor& a = value(av);
    const Tensor& b = value(bv);
    require_same_shape(a, b, "add");
    Node out;
    out.op = "add";
    out.value = a;
    for (size_t i = 0; i < b.numel(); ++i) out.value.data[i] += b.data[i];
    out.requires_grad = wants_grad(node(av)) || wants_grad(node(bv));
    if (out.requires_grad) {
        out.backward = [av, bv](Graph& g, const Node& self) {
            const float* gy = self.grad.data.data();
            for (Var p : {av, bv}) {
                if (!g.node(p).requires_grad) continue;
                float* gp = g.node(p).grad.data.data();
                for (size_t i = 0; i < self.grad.numel(); ++i) gp[i] += gy[i];
            }
        };
    }
    return push(std::move(out));
}

Var Graph::sub(Var av, Var bv) {
    const Tensor& a = value(av);
    const Tensor& b = value(bv);
    require_same_shape(a, b, "sub");
    Node out;
    out.op = "sub";
    out.value = a;
    for (size_t i = 0; i < b.numel(); ++i) out.value.data[i] -= b.data[i];
    out.requires_grad = wants_grad(node(av)) || wants_grad(node(bv));
    if (out.requires_grad) {
        out.backward = [av, bv](Graph& g, const Node& self) {
            const float* gy = self.grad.data.data();
            if (g.node(av).requires_grad) {
                float* ga = g.node(av).grad.data.data();
                for (size_t i = 0; i < self.grad.numel(); ++i) ga[i] += gy[i];
            }
            if (g.node(bv).requires_grad) {
                float* gb = g.node(bv).grad.data.data();
                for (size_t i = 0; i < self.grad.numel(); ++i) gb[i] -= gy[i];
            }
        };
    }
    return push(std::move(out));
}

Var Graph::mul(Var av, Var bv) {
    const Tensor& a = value(av);
    const Tensor& b = value(bv);
    require_same_shape(a, b, "mul");
    Node out;
    out.op = "mul";
    out.value = a;
    for (size_t i = 0; i < b.numel(); ++i) out.value.data[i] *= b.data[i];
    out.requires_grad = wants_grad(node(av)) || wants_grad(node(bv));
    if (out.requires_grad) {
        out.backward = [av, bv](Graph& g, const Node& self) {
            const float* gy = self.grad.data.data();
            if (g.node(av).requires_grad) {
                float* ga = g.node(av).grad.data.data();
                const float* pb = g.value(bv).data.data();
                for (size_t i = 0; i < self.grad.numel(); ++i) ga[i] += gy[i] * pb[i];
            }
            if (g.node(bv).requires_grad) {
                float* gb = g.node(bv).grad.data.data();
                const float* pa = g.value(av).data.data();
                for (size_t i = 0; i < self.grad.numel(); ++i) gb[i] += gy[i] * pa[i];
            }
        };
    }
    return push(std::move(out));
}

Var Graph::scale(Var xv, float c) {
    const Tensor& x = value(xv);
    Node out;
    out.op = "scale";
    out.value = x;
    for (float& v : out.value.data) v *= c;
    out.requires_grad = wants_grad(node(xv));
    if (out.requires_grad) {
        out.backward = [xv, c](Graph& g, const Node& self) {
            float* gx = g.node(xv).grad.data.data();
            const float* gy = self.grad.data.data();
            for (size_t i = 0; i < self.grad.numel(); ++i) gx[i] += gy[i] * c;
        };
    }
    return push(std::move(out));
}

Var Graph::mse_reduce(Var pv, Var tv) {
    const Tensor& p = value(pv);
    const Tensor& t = value(tv);
    require_same_shape(p, t, "mse_reduce");
    const size_t n = p.numel();
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(p.data[i]) - static_cast<double>(t.data[i]);
        acc += d * d;
    }
    Node out;
    out.op = "mse_reduce";
    out.value = Tensor({1}, {static_cast<float>(acc / static_cast<double>(n))});
    check_finite_scalar(out.value.data[0], "mse_reduce");
    out.requires_grad = wants_grad(node(pv)) || wants_grad(node(tv));
    if (out.requires_grad) {
        out.backward = [pv, tv, n](Graph& g, const Node& self) {
            const float gy = self.grad.data[0] * 2.0f / static_cast<float>(n);
            const float* pp = g.value(pv).data.data();
            const float* pt = g.value(tv).data.data();
            if (g.node(pv).requires_grad) {
                float* gp = g.node(pv).grad.data.data();
                for (size_t i = 0; i < n; ++i) gp[i] += gy * (pp[i] - pt[i]);
            }
            if (g.node(tv).requires_grad) {
                float* gt = g.node(tv).grad.data.data();
                for (size_t i = 0; i < n; ++i) gt[i] -= gy * (pp[i] - pt[i]);
            }
        };
    }
    return push(std::move(out));
}

Var Graph::sum_squares(Var xv) {
    const Tensor& x = value(xv);
    double acc = 0.0;
    for (float v : x.data) acc += static_cast<double>(v) * static_cast<double>(v);
    Node out;
    out.op = "sum_squares";
    out.value = Tensor({1}, {static_cast<float>(acc)});
    check_finite_scalar(out.value.data[0], "sum_squares");
    out.requires_grad = wants_grad(node(xv));
    if (out.requires_grad) {
        out.backward = [xv](Graph& g, const Node& self) {
            const float gy = self.grad.data[0];
            float* gx = g.node(xv).grad.data.data();
            const float* px = g.value(xv).data.data();
            for (size_t i = 0; i < g.value(xv).numel(); ++i) gx[i] += gy * 2.0f * px[i];
        };
    }
    return push(std::move(out));
}

Var Graph::stop_gradient(Var xv) {
    Node out;
    out.op = "stop_gradient";
    out.value = value(xv);
    out.requires_grad = false;  // cuts the edge: nothing flows through or past
    return push(std::move(out));
}

Var Graph::straight_through(Var zv, Var qv) {
    const Tensor& z = value(zv);
    const Tensor& q = value(qv);
    require_same_shape(z, q, "straight_through");
    Node out;
    out.op = "straight_through";
    out.value = q;  // exact quantized value forward
    out.requires_grad = wants_grad(node(zv));
    if (out.requires_grad) {
        out.backward = [zv](Graph& g, const Node& self) {
            float* gz = g.node(zv).grad.data.data();
            const float* gy = self.grad.data.data();
            for (size_t i = 0; i < self.grad.numel(); ++i) gz[i] += gy[i];
        };
    }
    return push(std::move(out));
}

Var Graph::gather_rows(Var tv, std::vector<uint32_t> idx) {
    const Tensor& t = value(tv);
    if (t.shape.size() != 2) data_error("gather_rows: table must be 2D, got " + shape_str(t.shape));
    const uint32_t l = static_cast<uint32_t>(idx.size()), d = t.shape[1];
    for (uint32_t i : idx)
        if (i >= t.shape[0]) data_error("gather_rows: index " + std::to_string(i) + " out of range");
    Node out;
    out.op = "gather_rows";
    out.value = Tensor::zeros({l, d});
    for (uint32_t i = 0; i < l; ++i)
        std::copy_n(t.data.data() + idx[i] * d, d, out.value.data.data() + i * d);
    out.requires_grad = wants_grad(node(tv));
    if (out.requires_grad) {
        out.backward = [tv, idx = std::move(idx), d](Graph& g, const Node& self) {
            float* gt = g.node(tv).grad.data.data();
            const float* gy = self.grad.data.data();
            for (uint32_t i = 0; i < idx.size(); ++i) {
                float* row = gt + idx[i] * d;
                const float* grow = gy + i * d;
                for (uint32_t j = 0; j < d; ++j) row[j] += grow[j];
            }
        };
    }
    return push(std::move(out));
}

Var Graph::reshape(Var xv, Shape s) {
    Node out;
    out.op = "reshape";
    out.value = value(xv).reshaped(s);
    out.requires_grad = wants_grad(node(xv));
    if (out.requires_grad) {
        out.backward = [xv](Graph& g, const Node& self) {
            float* gx = g.node(xv).grad.data.data();
            const float* gy = self.grad.data.data();
            for (size_t i = 0; i < self.grad.numel(); ++i) gx[i] += gy[i];
        };
    }
    return push(std::move(out));
}

Var Graph::tokens_to_grid(Var xv, uint32_t h, uint32_t w) {
    const Tensor& x = value(xv);
    if (x.shape.size() != 2 || x.shape[0] != h * w)
        data_error("tokens_to_grid: tokens " + shape_str(x.shape) + " do not tile " +
                   std::to_string(h) + "x" + std::to_string(w));
    const uint32_t l = x.shape[0], d = x.shape[1];
    Node out;
    out.op = "tokens_to_grid";
    out.value = Tensor::zeros({d, h, w});
    for (uint32_t i = 0; i < l; ++i)
        for (uint32_t j = 0; j < d; ++j) out.value.data[j * l + i] = x.data[i * d + j];
    out.requires_grad = wants_grad(node(xv));
    if (out.requires_grad) {
        out.backward = [xv, l, d](Graph& g, const Node& self) {
            float* gx = g.node(xv).grad.data.data();
            const float* gy = self.grad.data.data();
            for (uint32_t i = 0; i < l; ++i)
                for (uint32_t j = 0; j < d; ++j) gx[i * d + j] += gy[j * l + i];
        };
    }
    return push(std::move(out));
}

Var Graph::grid_to_tokens(Var xv) {
    const Tensor& x = value(xv);
    if (x.shape.size() != 3) data_error("grid_to_tokens: expected (D,h,w), got " + shape_str(x.shape));
    const uint32_t d = x.shape[0], l = x.shape[1] * x.shape[2];
    Node out;
    out.op = "grid_to_tokens";
    out.value = Tensor::zeros({l, d});
    for (uint32_t j = 0; j < d; ++j)
        for (uint32_t i = 0; i < l; ++i) out.value.data[i * d + j] = x.data[j * l + i];
    out.requires_grad = wants_grad(node(xv));
    if (out.requires_grad) {
        out.backward = [xv, l, d](Graph& g, const Node& self) {
            float* gx = g.node(xv).grad.data.data();
            const float* gy = self.grad.data.data();
            for (uint32_t j = 0; j < d; ++j)
                for (uint32_t i = 0; i < l; ++i) gx[j * l + i] += gy[i * d + j];
        };
    }
    return push(std::move(out));
}

Var Graph::slice0(Var xv, uint32_t start, uint32_t len) {
    const Tensor& x = value(xv);
    if (x.shape.empty() || start + len > x.shape[0])
        data_error("slice0: [" + std::to_string(start) + "," + std::to_string(start + len) +
                   ") out of range for " + shape_str(x.shape));
    const size_t row = x.numel() / x.shape[0];
    Shape s = x.shape;
    s[0] = len;
    Node out;
    out.op = "slice0";
    out.value = Tensor::zeros(s);
    std::copy_n(x.data.data() + start * row, len * row, out.value.data.data());
    out.requires_grad = wants_grad(node(xv));
    if (out.requires_grad) {
        out.backward = [xv, start, row](Graph& g, const Node& self) {
            float* gx = g.node(xv).grad.data.data() + start * row;
            const float* gy = self.grad.data.data();
            for (size_t i = 0; i < self.grad.numel(); ++i) gx[i] += gy[i];
        };
    }
    return push(std::move(out));
}

Var Graph::concat0(Var av, Var bv) {
    const Tensor& a = value(av);
    const Tensor& b = value(bv);
    if (a.shape.size() != b.shape.size() || a.shape.size() < 1)
        data_error("concat0: rank mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    for (size_t i = 1; i < a.shape.size(); ++i)
        if (a.shape[i] != b.shape[i])
            data_error("concat0: trailing dims differ " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    Shape s = a.shape;
    s[0] += b.shape[0];
    Node out;
    out.op = "concat0";
    out.value = Tensor::zeros(s);
    std::copy(a.data.begin(), a.data.end(), out.value.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.value.data.begin() + a.numel());
    out.requires_grad = wants_grad(node(av)) || wants_grad(node(bv));
    if (out.requires_grad) {
        const size_t na = a.numel();
        out.backward = [av, bv, na](Graph& g, const Node& self) {
            const float* gy = self.grad.data.data();
            if (g.node(av).requires_grad) {
                float* ga = g.node(av).grad.data.data();
                for (size_t i = 0; i < na; ++i) ga[i] += gy[i];
            }
            if (g.node(bv).requires_grad) {
                float* gb = g.node(bv).grad.data.data();
                for (size_t i = 0; i < self.grad.numel() - na; ++i) gb[i] += gy[na + i];
            }
        };
    }
    return push(std::move(out));
}

}  // namespace bvq::ad
