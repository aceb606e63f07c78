#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "bvq/dataset.hpp"
#include "bvq/metrics.hpp"
#include "bvq/swe.hpp"
#include "bvq/synth.hpp"

using namespace bvq;

namespace {

std::string temp_path(const char* name) { return std::string("/tmp/bvq_test_") + name; }

}  // namespace

TEST_CASE("swe: flat height and zero velocity is a steady state") {
    SweParams p;
    p.h = 16;
    p.w = 16;
    p.steps = 20;
    p.bumps = 0;  // flat initial condition
    FieldTensor f = generate_swe(p);
    for (uint32_t t = 1; t < f.t(); ++t)
        for (uint32_t c = 0; c < 3; ++c)
            for (uint32_t i = 0; i < f.h(); ++i)
                for (uint32_t j = 0; j < f.w(); ++j)
                    CHECK(f.values.at4(t, c, i, j) == f.values.at4(0, c, i, j));
}

TEST_CASE("swe: total volume conserved to 1e-6 over 100 steps") {
    SweParams p;
    p.h = 32;
    p.w = 32;
    p.steps = 101;
    p.seed = 4;
    FieldTensor f = generate_swe(p);
    const double v0 = swe_volume(f, 0);
    for (uint32_t t = 1; t < f.t(); ++t)
        CHECK(std::abs(swe_volume(f, t) - v0) / std::abs(v0) < 1e-6);
}

TEST_CASE("swe: mirror-symmetric initial condition gives mirror-symmetric trajectory") {
    SweParams p;
    p.h = 16;
    p.w = 16;
    p.steps = 40;
    SweInitial init;
    init.height = Tensor::zeros({p.h, p.w});
    init.u = Tensor::zeros({p.h, p.w});
    init.v = Tensor::zeros({p.h, p.w});
    // bump centred at column W/2: symmetric under j -> (W - j) mod W
    for (uint32_t i = 0; i < p.h; ++i)
        for (uint32_t j = 0; j < p.w; ++j) {
            const double dj = static_cast<double>(j) - p.w / 2.0;
            const double di = static_cast<double>(i) - p.h / 2.0;
            init.height.at2(i, j) = static_cast<float>(1.0 + 0.1 * std::exp(-(di * di + dj * dj) / 8.0));
        }
    FieldTensor f = generate_swe(p, init);
    for (uint32_t t = 0; t < f.t(); ++t)
        for (uint32_t i = 0; i < p.h; ++i)
            for (uint32_t j = 0; j < p.w; ++j) {
                const uint32_t jm = (p.w - j) % p.w;
                CHECK(f.values.at4(t, 2, i, j) == doctest::Approx(f.values.at4(t, 2, i, jm)).epsilon(1e-6));
                CHECK(f.values.at4(t, 0, i, j) == doctest::Approx(-f.values.at4(t, 0, i, jm)).epsilon(1e-6));
                CHECK(f.values.at4(t, 1, i, j) == doctest::Approx(f.values.at4(t, 1, i, jm)).epsilon(1e-6));
            }
}

TEST_CASE("swe: CFL violation is refused with the computed number") {
    SweParams p;
    p.h = 16;
    p.w = 16;
    p.steps = 10;
    p.dt = 0.5;  // far beyond the stable step for g ~ 9.81, h ~ 1
    CHECK_THROWS_WITH_AS(generate_swe(p), doctest::Contains("CFL"), Error);

    // a runaway state mid-run is also caught and names the step
    SweParams p2;
    p2.h = 16;
    p2.w = 16;
    p2.steps = 200;
    p2.dt = 0.95 * 0.5 / std::sqrt(9.81 * 1.2);  // initially legal, fragile
    p2.bump_amplitude = 0.35;
    p2.seed = 2;
    try {
        FieldTensor f = generate_swe(p2);
        (void)f;  // some seeds stay stable; nothing to assert then
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("synth_divfree: analytic single mode") {
    // psi = sin(x) sin(y) on a 2*pi domain: u ~ sin(x)cos(y), v ~ -cos(x)sin(y)
    const uint32_t n = 64;
    const double dx = 6.283185307179586 / n;
    StreamSpec spec;
    spec.modes.push_back({1.0, 1, 1, 0.0, 0.0});
    spec.snap_to_lattice = false;
    FieldTensor f = synth_divfree(n, n, dx, dx, spec, 1);
    for (uint32_t i = 0; i < n; i += 5)
        for (uint32_t j = 0; j < n; j += 5) {
            const double x = j * dx, y = i * dx;
            CHECK(f.values.at4(0, 0, i, j) == doctest::Approx(std::sin(x) * std::cos(y)).epsilon(0.02).scale(1.0));
            CHECK(f.values.at4(0, 1, i, j) == doctest::Approx(-std::cos(x) * std::sin(y)).epsilon(0.02).scale(1.0));
        }

    // constant psi gives zero velocity exactly
    StreamSpec flat;
    flat.offset = 0.75;
    FieldTensor z = synth_divfree(16, 16, 0.125, 0.125, flat, 1);
    for (float v : z.values.data) CHECK(v == 0.0f);
}

TEST_CASE("synth_divfree: discrete divergence cancels exactly on dyadic grids") {
    Rng rng(21);
    for (int rep = 0; rep < 5; ++rep) {
        StreamSpec spec = random_band_limited_spec(rng, 4, 1.5);
        FieldTensor f = synth_divfree(32, 32, 0.125, 0.125, spec, 2);
        CHECK(mean_abs_divergence(f) < 1e-10);
    }
}

TEST_CASE("window_dataset arithmetic and errors") {
    FieldTensor field(Tensor::zeros({60, 3, 8, 8}), 1.0f, 1.0f, Boundary::Periodic);
    Dataset ds = window_dataset(field, 5, 50, 5);
    CHECK(ds.size() == 2);  // floor((60-55)/5) + 1

    // stride = T_total: single window when it fits
    FieldTensor f2(Tensor::zeros({30, 3, 8, 8}), 1.0f, 1.0f, Boundary::Periodic);
    CHECK(window_dataset(f2, 5, 25, 30).size() == 1);

    // windows from a constant field are all identical
    FieldTensor f3(Tensor::full({20, 3, 8, 8}, 2.5f), 1.0f, 1.0f, Boundary::Periodic);
    Dataset ds3 = window_dataset(f3, 2, 3, 1);
    for (const SampleWindow& s : ds3.samples) {
        CHECK(s.input.data == ds3.samples[0].input.data);
        CHECK(s.target.data == ds3.samples[0].target.data);
    }

    // too short
    FieldTensor f4(Tensor::zeros({10, 3, 8, 8}), 1.0f, 1.0f, Boundary::Periodic);
    CHECK_THROWS_WITH_AS(window_dataset(f4, 5, 50, 1), doctest::Contains("too short"), Error);
}

TEST_CASE("time-block split never mixes ranges") {
    Tensor v = Tensor::zeros({100, 1, 4, 4});
    for (uint32_t t = 0; t < 100; ++t) v.at4(t, 0, 0, 0) = static_cast<float>(t);
    FieldTensor field(std::move(v), 1.0f, 1.0f, Boundary::Periodic);
    SplitFields s = split_time_blocks(field, 0.7, 0.15);
    CHECK(s.train.t() == 70);
    CHECK(s.val.t() == 15);
    CHECK(s.test.t() == 15);
    CHECK(s.train.values.at4(69, 0, 0, 0) == 69.0f);
    CHECK(s.val.values.at4(0, 0, 0, 0) == 70.0f);
    CHECK(s.test.values.at4(0, 0, 0, 0) == 85.0f);
}

TEST_CASE("normalize round trip, degenerate channel, recentered stats") {
    Rng rng(9);
    Dataset ds;
    ds.t_in = 2;
    ds.t_out = 3;
    ds.c = 3;
    ds.h = 6;
    ds.w = 6;
    for (int k = 0; k < 4; ++k) {
        SampleWindow s;
        s.input = Tensor::zeros({2, 3, 6, 6});
        s.target = Tensor::zeros({3, 3, 6, 6});
        for (float& x : s.input.data) x = static_cast<float>(rng.uniform(-2.0, 5.0));
        for (float& x : s.target.data) x = static_cast<float>(rng.uniform(-2.0, 5.0));
        // channel 2 constant across the dataset
        for (uint32_t t = 0; t < 2; ++t)
            for (uint32_t i = 0; i < 36; ++i) s.input.data[(t * 3 + 2) * 36 + i] = 7.0f;
        for (uint32_t t = 0; t < 3; ++t)
            for (uint32_t i = 0; i < 36; ++i) s.target.data[(t * 3 + 2) * 36 + i] = 7.0f;
        ds.push(std::move(s));
    }
    NormStats stats = compute_stats(ds);
    CHECK(stats.std[2] == 1.0f);  // clamped
    CHECK(stats.mean[2] == doctest::Approx(7.0));

    // round trip within 1e-6 relative
    const Tensor& x = ds.samples[0].input;
    Tensor rt = denormalize(normalize(x, stats), stats);
    for (size_t i = 0; i < x.numel(); ++i)
        CHECK(rt.data[i] == doctest::Approx(x.data[i]).epsilon(1e-6));

    // constant channel normalizes to zero
    Tensor nx = normalize(x, stats);
    for (uint32_t t = 0; t < 2; ++t)
        for (uint32_t i = 0; i < 36; ++i) CHECK(nx.data[(t * 3 + 2) * 36 + i] == 0.0f);

    // per-channel mean of normalized data ~ 0 (recomputed from scratch)
    Dataset nds = ds;
    for (SampleWindow& s : nds.samples) {
        s.input = normalize(s.input, stats);
        s.target = normalize(s.target, stats);
    }
    NormStats stats2 = compute_stats(nds);
    CHECK(std::abs(stats2.mean[0]) < 1e-5);
    CHECK(std::abs(stats2.mean[1]) < 1e-5);
}

TEST_CASE("dataset save/load: bitwise round trip, truncation, empty refusal") {
    Rng rng(13);
    Dataset ds;
    ds.t_in = 2;
    ds.t_out = 2;
    ds.c = 2;
    ds.h = 4;
    ds.w = 4;
    ds.dx = 0.5f;
    ds.dy = 0.25f;
    ds.boundary = Boundary::Clamped;
    for (int k = 0; k < 3; ++k) {
        SampleWindow s;
        s.input = Tensor::zeros({2, 2, 4, 4});
        s.target = Tensor::zeros({2, 2, 4, 4});
        for (float& x : s.input.data) x = static_cast<float>(rng.uniform(-1.0, 1.0));
        for (float& x : s.target.data) x = static_cast<float>(rng.uniform(-1.0, 1.0));
        s.provenance = k == 1 ? Provenance::Pseudo : Provenance::Original;
        ds.push(std::move(s));
    }
    const std::string path = temp_path("roundtrip.bvqd");
    save_dataset(path, ds);
    Dataset back = load_dataset(path);
    REQUIRE(back.size() == ds.size());
    CHECK(back.dx == ds.dx);
    CHECK(back.dy == ds.dy);
    CHECK(back.boundary == ds.boundary);
    for (size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.samples[i].provenance == ds.samples[i].provenance);
        CHECK(back.samples[i].input.data == ds.samples[i].input.data);
        CHECK(back.samples[i].target.data == ds.samples[i].target.data);
    }

    // truncated file errors rather than returning partial data
    std::ifstream is(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    const std::string tpath = temp_path("truncated.bvqd");
    std::ofstream os(tpath, std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    os.close();
    CHECK_THROWS_WITH_AS(load_dataset(tpath), doctest::Contains("truncated"), Error);

    // corrupt magic
    const std::string mpath = temp_path("badmagic.bvqd");
    std::ofstream ms(mpath, std::ios::binary);
    ms << "NOPE" << bytes.substr(4);
    ms.close();
    CHECK_THROWS_WITH_AS(load_dataset(mpath), doctest::Contains("magic"), Error);

    // empty dataset refused at save
    Dataset empty;
    empty.t_in = 1;
    empty.t_out = 1;
    empty.c = 1;
    empty.h = 4;
    empty.w = 4;
    CHECK_THROWS_WITH_AS(save_dataset(temp_path("empty.bvqd"), empty), doctest::Contains("empty"), Error);

    std::remove(path.c_str());
    std::remove(tpath.c_str());
    std::remove(mpath.c_str());
}
