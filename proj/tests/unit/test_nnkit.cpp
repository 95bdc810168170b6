#include <doctest.h>

#include <cmath>
#include <numbers>

#include "imputer/domain.hpp"
#include "imputer/nnkit/layers.hpp"
#include "imputer/nnkit/optim.hpp"
#include "oracles.hpp"

using namespace imputer;
using namespace imputer::nn;

namespace {

std::vector<double> flat_rowmajor(const Matrix& m) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
    }
    return out;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("time decay") {
    CHECK(time_decay(0.0) == 1.0);
    CHECK(time_decay(std::numbers::e * std::numbers::e - std::numbers::e) == doctest::Approx(0.5).epsilon(1e-14));
    double prev = 1.0;
    for (double dt = 0.1; dt < 100.0; dt *= 1.5) {
        const double g = time_decay(dt);
        CHECK(g < prev);
        CHECK(g > 0.0);
        prev = g;
    }
    CHECK_THROWS(time_decay(-1.0));
}

TEST_CASE("tanh_array is accurate") {
    Array z(1, 2001);
    for (int i = 0; i <= 2000; ++i) z(0, i) = -25.0 + 0.025 * i;
    const Array t = tanh_array(z);
    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i) worst = std::max(worst, std::abs(t(0, i) - std::tanh(z(0, i))));
    CHECK(worst < 1e-15);
}

TEST_CASE("TLSTM with zero elapsed time is a standard LSTM") {
    Rng rng(11);
    TLSTMCell cell(6, 5);
    cell.init(rng);
    Vector x(6), h(5), c(5);
    for (int i = 0; i < 6; ++i) x(i) = rng.uniform(-1, 1);
    for (int i = 0; i < 5; ++i) {
        h(i) = rng.uniform(-1, 1);
        c(i) = rng.uniform(-2, 2);
    }
    const StepResult r = tlstm_step(x, h, c, 0.0, cell);
    std::vector<double> ho, co;
    oracle::lstm_step(flat_rowmajor(cell.w), flat_rowmajor(cell.u), to_std(cell.b.col(0)), 6, 5, to_std(x), to_std(h),
                      to_std(c), ho, co);
    for (int i = 0; i < 5; ++i) {
        CHECK(std::abs(r.h(i) - ho[static_cast<std::size_t>(i)]) < 1e-12);
        CHECK(std::abs(r.c(i) - co[static_cast<std::size_t>(i)]) < 1e-12);
    }
}

TEST_CASE("TLSTM discounts only the short-term memory") {
    Rng rng(12);
    TLSTMCell cell(3, 4);
    cell.init(rng);
    Vector x = Vector::Zero(3), h = Vector::Zero(4), c(4);
    c << 0.5, -1.0, 2.0, 0.1;
    const double dt = 7.0;
    const StepResult r = tlstm_step(x, h, c, dt, cell);

    // the adjusted memory enters a textbook step in place of c_prev
    Vector cs = (cell.w_decomp * c + cell.b_decomp.col(0)).array().tanh().matrix();
    Vector adjusted = c - cs + time_decay(dt) * cs;
    std::vector<double> ho, co;
    oracle::lstm_step(flat_rowmajor(cell.w), flat_rowmajor(cell.u), to_std(cell.b.col(0)), 3, 4, to_std(x), to_std(h),
                      to_std(adjusted), ho, co);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(r.c(i) - co[static_cast<std::size_t>(i)]) < 1e-12);
}

TEST_CASE("TLSTM init ranges and forget bias") {
    Rng rng(1);
    TLSTMCell cell(24, 50);
    cell.init(rng);
    CHECK(cell.w.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(24.0));
    CHECK(cell.u.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(50.0));
    CHECK(cell.b.middleRows(50, 50).isOnes());
}

TEST_CASE("zero parameters give zero hidden state") {
    TLSTMCell cell(4, 3);
    Vector x = Vector::Constant(4, 0.7);
    Vector h = Vector::Zero(3);
    Vector c = Vector::Zero(3);
    for (int k = 0; k < 5; ++k) {
        const StepResult r = tlstm_step(x, h, c, 2.0, cell);
        h = r.h;
        c = r.c;
    }
    CHECK(h.isZero(0.0));
}

TEST_CASE("BiTLSTM middle output matches the full encoding and is symmetric on palindromes") {
    Rng rng(5);
    BiTLSTM enc(3, 4);
    enc.init(rng);
    std::vector<Matrix> steps;
    for (int i = 0; i < 5; ++i) steps.push_back(Matrix::Random(3, 2));
    Matrix gf = Matrix::Zero(5, 2), gb = Matrix::Zero(5, 2);
    for (int i = 1; i < 5; ++i) gf.row(i).setConstant(i);
    for (int i = 0; i < 4; ++i) gb.row(i).setConstant(4 - i);
    const Matrix middle = enc.encode_middle(steps, gf, gb);
    const auto all = enc.encode(steps, gf, gb);
    CHECK((middle - all[2]).cwiseAbs().maxCoeff() < 1e-14);

    enc.backward_cell = enc.forward_cell;
    std::vector<Matrix> pal = {steps[0], steps[1], steps[2], steps[1], steps[0]};
    Matrix pf(5, 2), pb(5, 2);
    pf.col(0) << 0, 1, 2, 2, 1;
    pf.col(1) = pf.col(0);
    for (int i = 0; i < 5; ++i) pb.row(i) = pf.row(4 - i);
    const Matrix out = enc.encode_middle(pal, pf, pb);
    CHECK((out.topRows(4) - out.bottomRows(4)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("SAGE layer on small graphs") {
    SageLayer layer(1, 1, Activation::identity);
    layer.w_root(0, 0) = 1.0;
    layer.w_neigh(0, 0) = 1.0;
    Matrix x(1, 2);
    x << 3.0, 5.0;
    const Matrix y = layer.forward(x, 2);
    CHECK(y(0, 0) == 8.0);
    CHECK(y(0, 1) == 8.0);

    // identical node features: root plus neighbour term doubles v
    Matrix same(1, 4);
    same.setConstant(2.5);
    const Matrix ys = layer.forward(same, 4);
    for (int j = 0; j < 4; ++j) CHECK(ys(0, j) == 5.0);

    Matrix nm(1, 3);
    nm << 1.0, 2.0, 6.0;
    const Matrix mean = neighbour_mean(nm, 3);
    CHECK(mean(0, 0) == 4.0);
    CHECK(mean(0, 1) == 3.5);
    CHECK(mean(0, 2) == 1.5);
    CHECK_THROWS(neighbour_mean(nm, 1));
}

TEST_CASE("SAGE layer is permutation equivariant") {
    Rng rng(9);
    SageLayer layer(4, 3, Activation::relu);
    layer.init(rng);
    Matrix x = Matrix::Random(4, 6);
    std::vector<int> perm = {3, 0, 5, 1, 4, 2};
    Matrix px(4, 6);
    for (int j = 0; j < 6; ++j) px.col(j) = x.col(perm[static_cast<std::size_t>(j)]);
    const Matrix y = layer.forward(x, 6);
    const Matrix py = layer.forward(px, 6);
    for (int j = 0; j < 6; ++j) CHECK((py.col(j) - y.col(perm[static_cast<std::size_t>(j)])).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("euclidean loss value and gradient") {
    Matrix p(2, 1), t(2, 1);
    p << 3.0, 4.0;
    t << 0.0, 0.0;
    const LossResult r = euclidean_loss(p, t);
    CHECK(r.value == 5.0);
    CHECK(r.grad(0, 0) == doctest::Approx(0.6));
    CHECK(r.grad(1, 0) == doctest::Approx(0.8));

    const LossResult z = euclidean_loss(t, t);
    CHECK(z.value == 0.0);
    CHECK(z.grad.isZero(0.0));

    Matrix a = Matrix::Random(2, 7), b = Matrix::Random(2, 7);
    const LossResult g = euclidean_loss(a, b);
    for (int j = 0; j < 7; ++j) {
        for (int i = 0; i < 2; ++i) {
            Matrix up = a, dn = a;
            up(i, j) += 1e-6;
            dn(i, j) -= 1e-6;
            const double num = (euclidean_loss(up, b).value - euclidean_loss(dn, b).value) / 2e-6;
            CHECK(std::abs(num - g.grad(i, j)) < 1e-8);
        }
    }
}

TEST_CASE("AdamW update rule") {
    Matrix w(1, 2), g(1, 2);
    w << 1.0, 1.0;
    g << 0.3, 0.0;
    ParamList params{{"w", &w, &g}};
    AdamW opt;
    opt.step(params);
    CHECK(w(0, 0) == doctest::Approx(1.0 - 0.002 - 0.002 * 0.01).epsilon(1e-9));
    // zero gradient: only the decoupled decay acts
    CHECK(w(0, 1) == doctest::Approx(1.0 - 0.002 * 0.01).epsilon(1e-12));
    CHECK(opt.steps() == 1);

    g(0, 0) = std::nan("");
    const Matrix before = w;
    CHECK_THROWS_AS(opt.step(params), NumericError);
    CHECK(w == before);
}

TEST_CASE("AdamW descends a quadratic") {
    Matrix w(3, 1), g(3, 1);
    w << 2.0, -1.0, 0.5;
    ParamList params{{"w", &w, &g}};
    AdamW opt(AdamWConfig{0.05, 0.9, 0.999, 1e-8, 0.0});
    const double start = w.squaredNorm();
    for (int k = 0; k < 500; ++k) {
        g = 2.0 * w;
        opt.step(params);
    }
    CHECK(w.squaredNorm() < 1e-3 * start);
}

TEST_CASE("parameter blob round trip and corruption") {
    Rng rng(4);
    Dense d(3, 2, Activation::relu);
    d.init(rng);
    ParamList params;
    d.collect("head", params);
    const auto blob = serialize_params(params, 99, "agent_imputer");

    Dense e(3, 2, Activation::relu);
    ParamList target;
    e.collect("head", target);
    const BlobHeader h = deserialize_params(blob, target);
    CHECK(h.seed == 99);
    CHECK(h.model_kind == "agent_imputer");
    CHECK(e.weight == d.weight);
    CHECK(e.bias == d.bias);

    auto bad = blob;
    bad[0] = 'X';
    CHECK_THROWS_AS(deserialize_params(bad, target), DataError);
    auto truncated = blob;
    truncated.pop_back();
    CHECK_THROWS_AS(deserialize_params(truncated, target), DataError);
    auto longer = blob;
    longer.push_back(0);
    CHECK_THROWS_AS(deserialize_params(longer, target), DataError);

    Dense other(4, 2, Activation::relu);
    ParamList mismatch;
    other.collect("head", mismatch);
    CHECK_THROWS_AS(deserialize_params(blob, mismatch), DataError);
}
