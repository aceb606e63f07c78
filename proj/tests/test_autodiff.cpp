#include <doctest.h>

#include "bvq/adam.hpp"
#include "bvq/graph.hpp"
#include "bvq/rng.hpp"
#include "oracles.hpp"

using namespace bvq;
using oracle::vecd;

namespace {

Tensor random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(s));
    for (float& v : t.data) v = static_cast<float>(rng.uniform(lo, hi));
    return t;
}

vecd to_f64(const Tensor& t) { return vecd(t.data.begin(), t.data.end()); }

}  // namespace

TEST_CASE("relu, identity conv and mse basics") {
    ad::Graph g;
    ad::Var x = g.constant(Tensor({3}, {-1.0f, 0.0f, 2.0f}));
    const Tensor& y = g.value(g.relu(x));
    CHECK(y.data == std::vector<float>{0.0f, 0.0f, 2.0f});

    // identity 1x1 kernel reproduces any field
    Rng rng(11);
    Tensor field = random_tensor({2, 5, 7}, rng);
    Tensor ker = Tensor::zeros({2, 2, 1, 1});
    ker.data[0] = 1.0f;  // out0 <- in0
    ker.data[3] = 1.0f;  // out1 <- in1
    ad::Graph g2;
    const Tensor& same = g2.value(g2.conv2d(g2.constant(field), g2.constant(ker), 1, 0));
    CHECK(same.shape == field.shape);
    for (size_t i = 0; i < field.numel(); ++i) CHECK(same.data[i] == field.data[i]);

    ad::Graph g3;
    ad::Var a = g3.constant(random_tensor({4, 4}, rng));
    CHECK(g3.scalar(g3.mse_reduce(a, a)) == 0.0f);
}

TEST_CASE("shape mismatches produce structured errors naming both shapes") {
    ad::Graph g;
    ad::Var a = g.constant(Tensor::zeros({2, 3}));
    ad::Var b = g.constant(Tensor::zeros({3, 3}));
    CHECK_THROWS_WITH_AS(g.add(a, b), doctest::Contains("(2,3)"), Error);
    ad::Graph g2;
    ad::Var a2 = g2.constant(Tensor::zeros({2, 3}));
    ad::Var b2 = g2.constant(Tensor::zeros({3, 3}));
    CHECK_THROWS_WITH_AS(g2.add(a2, b2), doctest::Contains("(3,3)"), Error);
    ad::Graph g3;
    ad::Var a3 = g3.constant(Tensor::zeros({2, 3}));
    CHECK_THROWS_AS(g3.matmul(a3, a3), Error);
}

TEST_CASE("stop_gradient semantics") {
    // forward identity, exact
    Rng rng(3);
    Tensor t = random_tensor({6}, rng);
    ad::Graph g;
    ad::Var x = g.leaf(t, true);
    const Tensor& sg = g.value(g.stop_gradient(x));
    for (size_t i = 0; i < t.numel(); ++i) CHECK(sg.data[i] == t.data[i]);

    // d/dx [sg(x) * x] at x = 3 -> 3 (only the non-frozen factor contributes)
    ad::Graph g1;
    ad::Var w = g1.leaf(Tensor({1}, {3.0f}), true);
    ad::Var prod = g1.mul(g1.stop_gradient(w), w);
    g1.backward(prod);
    CHECK(g1.grad(w).data[0] == 3.0f);

    // d/dx |x - sg(x)|^2 at the point of evaluation is exactly zero
    ad::Graph g3;
    ad::Var w3 = g3.leaf(random_tensor({5}, rng), true);
    ad::Var loss3 = g3.sum_squares(g3.sub(w3, g3.stop_gradient(w3)));
    CHECK(g3.scalar(loss3) == 0.0f);
    g3.backward(loss3);
    for (float v : g3.grad(w3).data) CHECK(v == 0.0f);
}

TEST_CASE("frozen-argument surrogate |x - c|^2 matches finite differences") {
    // the stop-gradient branch behaves like a constant c held at the current x
    Rng rng(17);
    Tensor t = random_tensor({4}, rng);
    Tensor c = random_tensor({4}, rng);
    ad::Graph g;
    ad::Var x = g.leaf(t, true);
    ad::Var loss = g.sum_squares(g.sub(x, g.constant(c)));
    g.backward(loss);

    const vecd cd = to_f64(c);
    auto f = [&](const vecd& p) {
        vecd diff(p.size());
        for (size_t i = 0; i < p.size(); ++i) diff[i] = p[i] - cd[i];
        return oracle::sum_squares(diff);
    };
    const vecd fd = oracle::fd_gradient(f, to_f64(t), 1e-3);
    CHECK(oracle::grad_rel_error(to_f64(g.grad(x)), fd) < 1e-4);
}

TEST_CASE("backward quadratic and constant losses") {
    ad::Graph g;
    ad::Var w = g.leaf(Tensor({2}, {1.0f, 2.0f}), true);
    g.backward(g.sum_squares(w));
    CHECK(g.grad(w).data[0] == 2.0f);
    CHECK(g.grad(w).data[1] == 4.0f);

    // loss that does not depend on w -> zero gradient
    ad::Graph g2;
    ad::Var w2 = g2.leaf(Tensor({3}, {1.0f, -2.0f, 0.5f}), true);
    ad::Var loss2 = g2.sum_squares(g2.scale(w2, 0.0f));
    g2.backward(loss2);
    for (float v : g2.grad(w2).data) CHECK(v == 0.0f);

    // non-scalar loss refused
    ad::Graph g3;
    ad::Var w3 = g3.leaf(Tensor({2}, {1.0f, 1.0f}), true);
    CHECK_THROWS_AS(g3.backward(g3.relu(w3)), Error);
}

TEST_CASE("two-layer net gradients match f64 central differences") {
    // loss = mse(sigmoid(x W1 + b1) W2 + b2, y)
    const size_t bsz = 2, in = 4, hid = 6, out = 3;
    for (uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        Rng rng(seed);
        Tensor x = random_tensor({bsz, in}, rng);
        Tensor y = random_tensor({bsz, out}, rng);
        Tensor w1 = random_tensor({in, hid}, rng);
        Tensor b1 = random_tensor({hid}, rng, -0.1, 0.1);
        Tensor w2 = random_tensor({hid, out}, rng);
        Tensor b2 = random_tensor({out}, rng, -0.1, 0.1);

        ad::Graph g;
        ad::Var vw1 = g.leaf(w1, true), vb1 = g.leaf(b1, true);
        ad::Var vw2 = g.leaf(w2, true), vb2 = g.leaf(b2, true);
        ad::Var h = g.sigmoid(g.bias_cols(g.matmul(g.constant(x), vw1), vb1));
        ad::Var pred = g.bias_cols(g.matmul(h, vw2), vb2);
        g.backward(g.mse_reduce(pred, g.constant(y)));

        // independent f64 evaluation over the flattened parameter vector
        vecd flat = to_f64(w1);
        auto append = [&](const Tensor& t) { flat.insert(flat.end(), t.data.begin(), t.data.end()); };
        append(b1);
        append(w2);
        append(b2);
        const vecd xd = to_f64(x), yd = to_f64(y);
        auto f = [&](const vecd& p) {
            size_t o = in * hid;
            vecd pw1(p.begin(), p.begin() + in * hid);
            vecd pb1(p.begin() + o, p.begin() + o + hid);
            o += hid;
            vecd pw2(p.begin() + o, p.begin() + o + hid * out);
            o += hid * out;
            vecd pb2(p.begin() + o, p.begin() + o + out);
            vecd hh = oracle::sigmoid(oracle::add_cols(oracle::matmul(xd, bsz, in, pw1, hid), bsz, hid, pb1));
            vecd pr = oracle::add_cols(oracle::matmul(hh, bsz, hid, pw2, out), bsz, out, pb2);
            return oracle::mse(pr, yd);
        };
        const vecd fd = oracle::fd_gradient(f, flat, 1e-3);

        vecd got = to_f64(g.grad(vw1));
        auto append_grad = [&](ad::Var v) {
            const vecd gg = to_f64(g.grad(v));
            got.insert(got.end(), gg.begin(), gg.end());
        };
        append_grad(vb1);
        append_grad(vw2);
        append_grad(vb2);
        CHECK(oracle::grad_rel_error(got, fd) < 1e-4);
    }
}

TEST_CASE("conv stack gradients match f64 central differences") {
    const size_t ci = 2, h = 6, w = 6, co = 3;
    Rng rng(42);
    Tensor x = random_tensor({ci, h, w}, rng);
    Tensor ker = random_tensor({co, ci, 3, 3}, rng, -0.5, 0.5);
    Tensor bias = random_tensor({co}, rng, -0.1, 0.1);

    ad::Graph g;
    ad::Var vk = g.leaf(ker, true), vb = g.leaf(bias, true), vx = g.leaf(x, true);
    ad::Var y = g.sigmoid(g.bias_chw(g.conv2d(vx, vk, 2, 1), vb));
    ad::Var up = g.upsample2x(y);
    g.backward(g.sum_squares(up));

    vecd flat = to_f64(ker);
    {
        const vecd t = to_f64(bias);
        flat.insert(flat.end(), t.begin(), t.end());
        const vecd t2 = to_f64(x);
        flat.insert(flat.end(), t2.begin(), t2.end());
    }
    auto f = [&](const vecd& p) {
        vecd pk(p.begin(), p.begin() + co * ci * 9);
        vecd pb(p.begin() + co * ci * 9, p.begin() + co * ci * 9 + co);
        vecd px(p.begin() + co * ci * 9 + co, p.end());
        size_t ho, wo;
        vecd conv = oracle::conv2d(px, ci, h, w, pk, co, 3, 3, 2, 1, ho, wo);
        vecd act = oracle::sigmoid(oracle::add_chw(conv, co, ho * wo, pb));
        vecd up2 = oracle::upsample2x(act, co, ho, wo);
        return oracle::sum_squares(up2);
    };
    const vecd fd = oracle::fd_gradient(f, flat, 1e-3);
    vecd got = to_f64(g.grad(vk));
    {
        const vecd t = to_f64(g.grad(vb));
        got.insert(got.end(), t.begin(), t.end());
        const vecd t2 = to_f64(g.grad(vx));
        got.insert(got.end(), t2.begin(), t2.end());
    }
    CHECK(oracle::grad_rel_error(got, fd) < 1e-4);
}

TEST_CASE("gather, straight_through, slice and concat gradients") {
    Rng rng(7);
    Tensor table = random_tensor({5, 3}, rng);
    ad::Graph g;
    ad::Var vt = g.leaf(table, true);
    ad::Var picked = g.gather_rows(vt, {4, 0, 4});
    g.backward(g.sum_squares(picked));
    // row 4 is picked twice: its gradient doubles
    for (uint32_t d = 0; d < 3; ++d) {
        CHECK(g.grad(vt).at2(4, d) == doctest::Approx(4.0 * table.at2(4, d)).epsilon(1e-5));
        CHECK(g.grad(vt).at2(0, d) == doctest::Approx(2.0 * table.at2(0, d)).epsilon(1e-5));
        CHECK(g.grad(vt).at2(1, d) == 0.0f);
    }

    // straight_through: forward equals q bitwise, gradient bypasses to z
    ad::Graph g2;
    Tensor zt = random_tensor({4}, rng), qt = random_tensor({4}, rng);
    ad::Var z = g2.leaf(zt, true);
    ad::Var st = g2.straight_through(z, g2.constant(qt));
    for (size_t i = 0; i < 4; ++i) CHECK(g2.value(st).data[i] == qt.data[i]);
    g2.backward(g2.sum_squares(st));
    for (size_t i = 0; i < 4; ++i)
        CHECK(g2.grad(z).data[i] == doctest::Approx(2.0 * qt.data[i]).epsilon(1e-5));

    // slice0 + concat0 round trip gradient
    ad::Graph g3;
    Tensor big = random_tensor({6, 2}, rng);
    ad::Var vb = g3.leaf(big, true);
    ad::Var back = g3.concat0(g3.slice0(vb, 0, 2), g3.slice0(vb, 2, 4));
    g3.backward(g3.sum_squares(back));
    for (size_t i = 0; i < big.numel(); ++i)
        CHECK(g3.grad(vb).data[i] == doctest::Approx(2.0 * big.data[i]).epsilon(1e-5));
}

TEST_CASE("adam update behavior") {
    // zero gradient, fresh state: parameters unchanged
    std::map<std::string, Tensor> params{{"w", Tensor({3}, {0.5f, -0.25f, 1.0f})}};
    std::map<std::string, Tensor> grads{{"w", Tensor::zeros({3})}};
    AdamState st;
    adam_step(params, grads, st);
    CHECK(params.at("w").data == std::vector<float>{0.5f, -0.25f, 1.0f});

    // one step with g = 1 everywhere: each parameter decreases by ~eta
    // (hand trace of the recurrence: m_hat = v_hat = 1, step = eta/(1+eps))
    std::map<std::string, Tensor> p2{{"w", Tensor({2}, {0.5f, -0.25f})}};
    std::map<std::string, Tensor> g2{{"w", Tensor({2}, {1.0f, 1.0f})}};
    AdamState st2;
    adam_step(p2, g2, st2);
    const double expected = 1e-3 / (1.0 + 1e-8);
    CHECK(0.5 - p2.at("w").data[0] == doctest::Approx(expected).epsilon(1e-4));
    // equal gradients -> equal updates
    CHECK(0.5 - p2.at("w").data[0] == doctest::Approx(-0.25 - p2.at("w").data[1]).epsilon(1e-9));

    // NaN gradient aborts with a diagnostic
    std::map<std::string, Tensor> p3{{"w", Tensor({1}, {1.0f})}};
    std::map<std::string, Tensor> g3{{"w", Tensor({1}, {std::nanf("")})}};
    AdamState st3;
    CHECK_THROWS_WITH_AS(adam_step(p3, g3, st3), doctest::Contains("non-finite gradient"), Error);
}

TEST_CASE("determinism: identical seed and inputs give bitwise-identical results") {
    auto run = [](uint64_t seed) {
        Rng rng(seed);
        Tensor x = random_tensor({3, 8, 8}, rng);
        Tensor k = random_tensor({4, 3, 3, 3}, rng);
        Tensor y = random_tensor({4, 4, 4}, rng);
        ad::Graph g;
        ad::Var vk = g.leaf(k, true);
        ad::Var pred = g.conv2d(g.constant(x), vk, 2, 1);
        g.backward(g.mse_reduce(pred, g.constant(y)));
        std::pair<std::vector<float>, std::vector<float>> out{g.value(pred).data, g.grad(vk).data};
        return out;
    };
    const auto a = run(99), b = run(99);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
}
