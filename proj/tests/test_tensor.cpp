#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "gridcast/nn/checkpoint.hpp"
#include "gridcast/nn/grad_check.hpp"
#include "gridcast/nn/optim.hpp"
#include "gridcast/nn/tape.hpp"
#include "support/primitive_fd.hpp"

using namespace gridcast;
using namespace gridcast::nn;

namespace {

// Deterministic uniform draw independent of the standard library's
// distribution implementation, so frozen seeds behave identically everywhere.
double draw_uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

template <typename T>
void fill_uniform(const Tensor<T>& t, std::mt19937_64& rng, double lo, double hi) {
    for (T& v : t.value()) v = static_cast<T>(draw_uniform(rng, lo, hi));
}

// Values bounded away from zero, for relu inputs: the finite-difference step
// must not cross the kink.
template <typename T>
void fill_away_from_zero(const Tensor<T>& t, std::mt19937_64& rng, double margin) {
    for (T& v : t.value()) {
        const double mag = draw_uniform(rng, margin, 1.5);
        v = static_cast<T>(rng() & 1 ? mag : -mag);
    }
}

// gelu'(x) crosses zero near -0.75, where a finite-difference quotient loses
// all significant digits in 32-bit; keep inputs outside that window.
template <typename T>
void fill_gelu_safe(const Tensor<T>& t, std::mt19937_64& rng) {
    for (T& v : t.value()) {
        double x = draw_uniform(rng, -2.0, 2.0);
        if (x > -1.35 && x < -0.25) x += 1.8;
        v = static_cast<T>(x);
    }
}

std::size_t draw_extent(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return lo + rng() % (hi - lo + 1);
}

}  // namespace

TEST_CASE("softmax splits equal logits evenly and rows sum to one") {
    Tape<double> tape;
    auto x = Tensor<double>::from({2}, {0.0, 0.0});
    auto y = tape.softmax(x);
    CHECK(y.value()[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(y.value()[1] == doctest::Approx(0.5).epsilon(1e-12));

    std::mt19937_64 rng(11);
    auto z = Tensor<double>::zeros({5, 7});
    fill_uniform(z, rng, -4.0, 4.0);
    auto s = tape.softmax(z);
    for (std::size_t r = 0; r < 5; ++r) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 7; ++j) {
            const double v = s.value()[r * 7 + j];
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("matmul matches a hand-worked product") {
    Tape<double> tape;
    auto a = Tensor<double>::from({2, 3}, {1, 2, 3, 4, 5, 6});
    auto b = Tensor<double>::from({3, 2}, {7, 8, 9, 10, 11, 12});
    auto c = tape.matmul(a, b);
    REQUIRE(c.shape() == Shape{2, 2});
    CHECK(c.value() == std::vector<double>{58, 64, 139, 154});
}

TEST_CASE("batched matmul applies a shared rank-2 right side per batch") {
    Tape<double> tape;
    auto a = Tensor<double>::from({2, 1, 2}, {1, 2, 3, 4});
    auto w = Tensor<double>::from({2, 2}, {1, 0, 0, 1});  // identity
    auto c = tape.matmul(a, w);
    REQUIRE(c.shape() == Shape{2, 1, 2});
    CHECK(c.value() == a.value());

    auto b = Tensor<double>::from({2, 2, 1}, {1, 1, 2, 2});
    auto d = tape.matmul(a, b);  // per-batch [1,2]x[2,1]
    REQUIRE(d.shape() == Shape{2, 1, 1});
    CHECK(d.value()[0] == 3.0);   // 1*1 + 2*1
    CHECK(d.value()[1] == 14.0);  // 3*2 + 4*2
}

TEST_CASE("matmul rejects nonconforming shapes") {
    Tape<double> tape;
    auto a = Tensor<double>::zeros({2, 3});
    CHECK_THROWS_AS(tape.matmul(a, Tensor<double>::zeros({2, 2})), ShapeError);
    CHECK_THROWS_AS(tape.matmul(a, Tensor<double>::zeros({3})), ShapeError);
    CHECK_THROWS_AS(tape.matmul(Tensor<double>::zeros({2, 2, 3}), Tensor<double>::zeros({3, 3, 2})),
                    ShapeError);
}

TEST_CASE("layer_norm output has zero mean and unit variance per row") {
    Tape<double> tape;
    std::mt19937_64 rng(5);
    auto x = Tensor<double>::zeros({4, 8});
    fill_uniform(x, rng, -3.0, 3.0);
    auto gamma = Tensor<double>::full({8}, 1.0);
    auto beta = Tensor<double>::zeros({8});
    auto y = tape.layer_norm(x, gamma, beta);

    for (std::size_t r = 0; r < 4; ++r) {
        double mean = 0.0;
        for (std::size_t j = 0; j < 8; ++j) mean += y.value()[r * 8 + j];
        mean /= 8.0;
        double var = 0.0;
        for (std::size_t j = 0; j < 8; ++j) {
            const double d = y.value()[r * 8 + j] - mean;
            var += d * d;
        }
        var /= 8.0;
        CHECK(std::fabs(mean) < 1e-5);
        CHECK(std::fabs(var - 1.0) < 1e-5);
    }

    // the affine parameters rescale and shift the normalized rows
    auto gamma2 = Tensor<double>::full({8}, 2.0);
    auto beta2 = Tensor<double>::full({8}, 7.0);
    auto y2 = tape.layer_norm(x, gamma2, beta2);
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(y2.value()[i] == doctest::Approx(2.0 * y.value()[i] + 7.0).epsilon(1e-12));
    }
}

TEST_CASE("mse_loss of a tensor against itself is exactly zero") {
    Tape<double> tape;
    auto x = Tensor<double>::from({3}, {1.5, -2.0, 0.25});
    CHECK(tape.mse_loss(x, x).item() == 0.0);
}

TEST_CASE("transpose, reshape, slice, and concat forward values") {
    Tape<double> tape;
    auto x = Tensor<double>::from({2, 3}, {1, 2, 3, 4, 5, 6});

    auto xt = tape.transpose(x, 0, 1);
    REQUIRE(xt.shape() == Shape{3, 2});
    CHECK(xt.value() == std::vector<double>{1, 4, 2, 5, 3, 6});

    auto xr = tape.reshape(x, {3, 2});
    CHECK(xr.value() == x.value());
    CHECK_THROWS_AS(tape.reshape(x, {4, 2}), ShapeError);

    auto xs = tape.slice(x, 1, 1, 3);
    REQUIRE(xs.shape() == Shape{2, 2});
    CHECK(xs.value() == std::vector<double>{2, 3, 5, 6});
    CHECK_THROWS_AS(tape.slice(x, 1, 2, 2), ShapeError);

    auto xc = tape.concat({x, x}, 0);
    REQUIRE(xc.shape() == Shape{4, 3});
    auto xc1 = tape.concat({x, xs}, 1);
    REQUIRE(xc1.shape() == Shape{2, 5});
    CHECK(xc1.value() == std::vector<double>{1, 2, 3, 2, 3, 4, 5, 6, 5, 6});
}

TEST_CASE("sum of squares has gradient 2x") {
    Tape<double> tape;
    auto x = Tensor<double>::from({2}, {1.0, 2.0}, true);
    auto loss = tape.scale(tape.mean(tape.mul(x, x)), 2.0);  // = sum(x^2)
    tape.backward(loss);
    CHECK(x.grad()[0] == 2.0);
    CHECK(x.grad()[1] == 4.0);
}

TEST_CASE("loss independent of a parameter leaves its gradient exactly zero") {
    Tape<double> tape;
    auto x = Tensor<double>::from({2}, {1.0, 2.0}, true);
    auto y = Tensor<double>::from({3}, {5.0, 6.0, 7.0}, true);
    auto loss = tape.mean(tape.mul(x, x));
    tape.backward(loss);
    CHECK(y.grad() == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("gradients accumulate across backward passes until cleared") {
    auto x = Tensor<double>::from({1}, {3.0}, true);
    for (int pass = 0; pass < 2; ++pass) {
        Tape<double> tape;
        auto loss = tape.mean(tape.mul(x, x));
        tape.backward(loss);
    }
    CHECK(x.grad()[0] == 12.0);  // 2*3 twice
    x.zero_grad();
    CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("tape refuses reuse and recovers after reset") {
    Tape<double> tape;
    auto x = Tensor<double>::from({1}, {2.0}, true);
    auto loss = tape.mul(x, x);
    tape.backward(loss);
    CHECK_THROWS_WITH_AS(tape.backward(loss), doctest::Contains("reset"), Error);

    tape.reset();
    CHECK(tape.recorded_ops() == 0);
    x.zero_grad();
    auto loss2 = tape.mul(x, x);
    tape.backward(loss2);
    CHECK(x.grad()[0] == 4.0);
}

TEST_CASE("backward rejects non-scalar and untracked losses") {
    Tape<double> tape;
    auto x = Tensor<double>::from({2}, {1.0, 2.0}, true);
    auto y = tape.mul(x, x);
    CHECK_THROWS_AS(tape.backward(y), ShapeError);

    Tape<double> tape2;
    auto z = Tensor<double>::from({1}, {1.0});  // untracked
    auto w = tape2.mul(z, z);
    CHECK_THROWS_AS(tape2.backward(w), Error);
}

TEST_CASE("untracked inputs record nothing on the tape") {
    Tape<double> tape;
    auto x = Tensor<double>::from({2}, {1.0, 2.0});
    auto y = tape.mul(x, x);
    CHECK(tape.recorded_ops() == 0);
    CHECK_FALSE(y.tracked());
}

TEST_CASE_TEMPLATE("two-layer perceptron matches finite differences", T, float, double) {
    std::mt19937_64 rng(308);
    auto x = Tensor<T>::zeros({2, 4});
    auto target = Tensor<T>::zeros({2, 1});
    fill_uniform(x, rng, -1.0, 1.0);
    fill_uniform(target, rng, -1.0, 1.0);

    auto w1 = Tensor<T>::zeros({4, 8}, true);
    auto b1 = Tensor<T>::zeros({8}, true);
    auto w2 = Tensor<T>::zeros({8, 1}, true);
    auto b2 = Tensor<T>::zeros({1}, true);
    fill_uniform(w1, rng, -0.6, 0.6);
    fill_uniform(b1, rng, -0.6, 0.6);
    fill_uniform(w2, rng, -0.6, 0.6);
    fill_uniform(b2, rng, -0.6, 0.6);

    // The hidden relu must not sit near its kink for any parameter nudge,
    // or central differences become meaningless. Verify the frozen seed
    // keeps a healthy margin (finite-difference steps are <= 2e-3).
    {
        Tape<T> probe;
        auto pre = probe.add(probe.matmul(x, w1), b1);
        for (T v : pre.value()) REQUIRE(std::fabs(static_cast<double>(v)) > 0.05);
    }

    std::vector<Tensor<T>> params = {w1, b1, w2, b2};
    const double err = grad_check(params, [&](Tape<T>& tape) {
        auto h = tape.relu(tape.add(tape.matmul(x, w1), b1));
        auto out = tape.add(tape.matmul(h, w2), b2);
        return tape.mse_loss(out, target);
    });
    CHECK(err < (sizeof(T) == 4 ? 1e-3 : 1e-6));
}

TEST_CASE("grad_check is near-exact for a linear function") {
    auto x = Tensor<double>::zeros({8}, true);
    std::mt19937_64 rng(3);
    fill_uniform(x, rng, -0.5, 0.5);
    const double err = grad_check<double>({x}, [&](Tape<double>& tape) {
        return tape.scale(tape.mean(x), 8.0);  // = sum(x)
    });
    CHECK(err < 1e-10);
}

TEST_CASE("relu gradient away from the kink is exact") {
    auto x = Tensor<double>::from({1}, {0.5}, true);
    const double err = grad_check<double>({x}, [&](Tape<double>& tape) {
        return tape.mean(tape.relu(x));
    });
    CHECK(err < 1e-8);
    CHECK(x.grad()[0] == 1.0);
}

TEST_CASE("every primitive passes randomized finite-difference checks (64-bit)") {
    primfd::run_primitive_suite<double>(100, [](const char* name, int seed, double err) {
        CAPTURE(name);
        CAPTURE(seed);
        CHECK(err < 1e-6);
    });
}

TEST_CASE("every primitive passes randomized finite-difference checks (32-bit)") {
    primfd::run_primitive_suite<float>(100, [](const char* name, int seed, double err) {
        CAPTURE(name);
        CAPTURE(seed);
        CHECK(err < 1e-3);
    });
}

TEST_CASE("adam first step moves a parameter by about the learning rate") {
    auto p = Tensor<double>::from({1}, {1.0}, true);
    Adam<double> opt({p});
    p.grad()[0] = 0.5;
    opt.step();
    CHECK(p.value()[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-6));
    CHECK(opt.step_count() == 1);
}

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
    auto p = Tensor<double>::from({2}, {1.25, -3.5}, true);
    Adam<double> opt({p});
    opt.step();
    CHECK(p.value()[0] == 1.25);
    CHECK(p.value()[1] == -3.5);
}

TEST_CASE("adam rejects untracked parameters, reset restores fresh state") {
    CHECK_THROWS_AS(Adam<double>({Tensor<double>::zeros({2})}), Error);

    auto p = Tensor<double>::from({1}, {1.0}, true);
    Adam<double> opt({p});
    p.grad()[0] = 0.5;
    opt.step();
    const double after_first = p.value()[0];

    opt.reset();
    CHECK(opt.step_count() == 0);
    p.value()[0] = 1.0;
    p.grad()[0] = 0.5;
    opt.step();
    CHECK(p.value()[0] == after_first);  // bitwise: fresh state replays the first step
}

TEST_CASE("sgd step subtracts lr times gradient") {
    auto p = Tensor<double>::from({2}, {1.0, 2.0}, true);
    p.grad()[0] = 10.0;
    p.grad()[1] = -4.0;
    sgd_step<double>({p}, 0.1);
    CHECK(p.value()[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(p.value()[1] == doctest::Approx(2.4).epsilon(1e-15));
}

TEST_CASE_TEMPLATE("identical seeds give bitwise-identical trajectories", T, float, double) {
    auto run = [](std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        auto x = Tensor<T>::zeros({4, 3});
        auto y = Tensor<T>::zeros({4, 2});
        fill_uniform(x, rng, -1.0, 1.0);
        fill_uniform(y, rng, -1.0, 1.0);
        auto w = uniform_init<T>({3, 2}, 3, rng);
        auto b = uniform_init<T>({2}, 3, rng);
        Adam<T> opt({w, b});
        for (int step = 0; step < 5; ++step) {
            opt.zero_grad();
            Tape<T> tape;
            auto loss = tape.mse_loss(tape.add(tape.matmul(x, w), b), y);
            tape.backward(loss);
            opt.step();
        }
        std::vector<T> out = w.value();
        out.insert(out.end(), b.value().begin(), b.value().end());
        return out;
    };
    CHECK(run(99) == run(99));

    // and a different seed genuinely changes the trajectory
    CHECK(run(99) != run(100));
}

TEST_CASE_TEMPLATE("checkpoints round-trip parameters bitwise", T, float, double) {
    namespace fs = std::filesystem;
    const auto path =
        fs::temp_directory_path() / (sizeof(T) == 4 ? "gridcast_ckpt_f32.gckp" : "gridcast_ckpt_f64.gckp");

    std::mt19937_64 rng(21);
    auto w = Tensor<T>::zeros({3, 4}, true);
    auto b = Tensor<T>::zeros({4}, true);
    fill_uniform(w, rng, -2.0, 2.0);
    fill_uniform(b, rng, -2.0, 2.0);
    const std::vector<T> w_orig = w.value();
    const std::vector<T> b_orig = b.value();

    std::vector<std::pair<std::string, Tensor<T>>> named = {{"w", w}, {"b", b}};
    save_checkpoint(path.string(), named);

    bool wide = !std::is_same_v<T, double>;
    auto entries = read_checkpoint_file(path.string(), &wide);
    CHECK(wide == (sizeof(T) == 8));
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].name == "w");
    CHECK(entries[0].shape == Shape{3, 4});

    // scribble over the live values, then restore
    fill_uniform(w, rng, 5.0, 6.0);
    fill_uniform(b, rng, 5.0, 6.0);
    load_checkpoint(path.string(), named);
    CHECK(w.value() == w_orig);
    CHECK(b.value() == b_orig);

    fs::remove(path);
}

TEST_CASE("checkpoint loading validates width, names, shapes, and count") {
    namespace fs = std::filesystem;
    const auto path = fs::temp_directory_path() / "gridcast_ckpt_checks.gckp";

    auto w32 = Tensor<float>::from({2}, {1.0f, 2.0f}, true);
    std::vector<std::pair<std::string, Tensor<float>>> named32 = {{"w", w32}};
    save_checkpoint(path.string(), named32);

    // precision mismatch
    auto w64 = Tensor<double>::from({2}, {0.0, 0.0}, true);
    std::vector<std::pair<std::string, Tensor<double>>> named64 = {{"w", w64}};
    CHECK_THROWS_WITH_AS(load_checkpoint(path.string(), named64), doctest::Contains("float32"),
                         DataError);

    // wrong name
    std::vector<std::pair<std::string, Tensor<float>>> renamed = {{"v", w32}};
    CHECK_THROWS_AS(load_checkpoint(path.string(), renamed), DataError);

    // wrong shape
    auto w32b = Tensor<float>::from({2, 1}, {0.0f, 0.0f}, true);
    std::vector<std::pair<std::string, Tensor<float>>> reshaped = {{"w", w32b}};
    CHECK_THROWS_AS(load_checkpoint(path.string(), reshaped), DataError);

    // wrong tensor count
    std::vector<std::pair<std::string, Tensor<float>>> extra = {
        {"w", w32}, {"b", Tensor<float>::zeros({1}, true)}};
    CHECK_THROWS_AS(load_checkpoint(path.string(), extra), DataError);

    fs::remove(path);
}

TEST_CASE("checkpoint reader rejects foreign and truncated files") {
    namespace fs = std::filesystem;
    const auto bad = fs::temp_directory_path() / "gridcast_ckpt_bad.gckp";
    {
        std::ofstream os(bad, std::ios::binary);
        os << "not a checkpoint at all";
    }
    CHECK_THROWS_AS(read_checkpoint_file(bad.string()), DataError);

    // valid header, then cut off mid-payload
    const auto good = fs::temp_directory_path() / "gridcast_ckpt_good.gckp";
    auto w = Tensor<float>::from({8}, std::vector<float>(8, 1.0f), true);
    std::vector<std::pair<std::string, Tensor<float>>> named = {{"w", w}};
    save_checkpoint(good.string(), named);

    std::ifstream is(good, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    is.close();
    const auto truncated = fs::temp_directory_path() / "gridcast_ckpt_trunc.gckp";
    {
        std::ofstream os(truncated, std::ios::binary);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 6));
    }
    CHECK_THROWS_AS(read_checkpoint_file(truncated.string()), IoError);

    CHECK_THROWS_AS(read_checkpoint_file("/nonexistent/dir/x.gckp"), IoError);

    fs::remove(bad);
    fs::remove(good);
    fs::remove(truncated);
}
