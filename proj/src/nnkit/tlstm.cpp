#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "imputer/nnkit/layers.hpp"

namespace imputer::nn {

namespace {

void fill_uniform(Matrix& m, Rng& rng, double bound) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
    }
}

}  // namespace

double time_decay(double dt) {
    if (dt < 0.0 || std::isnan(dt)) {
        throw std::invalid_argument("time_decay: negative elapsed time " + std::to_string(dt));
    }
    return 1.0 / std::log(std::numbers::e + dt);
}

TLSTMCell::TLSTMCell(int inputs, int hidden) : inputs_(inputs), hidden_(hidden) {
    if (inputs < 1 || hidden < 1) throw std::invalid_argument("TLSTMCell: sizes must be positive");
    w = Matrix::Zero(4 * hidden, inputs);
    u = Matrix::Zero(4 * hidden, hidden);
    b = Matrix::Zero(4 * hidden, 1);
    w_decomp = Matrix::Zero(hidden, hidden);
    b_decomp = Matrix::Zero(hidden, 1);
    grad_w = Matrix::Zero(w.rows(), w.cols());
    grad_u = Matrix::Zero(u.rows(), u.cols());
    grad_b = Matrix::Zero(b.rows(), 1);
    grad_w_decomp = Matrix::Zero(hidden, hidden);
    grad_b_decomp = Matrix::Zero(hidden, 1);
}

void TLSTMCell::init(Rng& rng) {
    const double bx = 1.0 / std::sqrt(static_cast<double>(inputs_));
    const double bh = 1.0 / std::sqrt(static_cast<double>(hidden_));
    fill_uniform(w, rng, bx);
    fill_uniform(u, rng, bh);
    fill_uniform(b, rng, bh);
    b.middleRows(hidden_, hidden_).setOnes();
    fill_uniform(w_decomp, rng, bh);
    fill_uniform(b_decomp, rng, bh);
}

void TLSTMCell::step(const Matrix& x, const Matrix& h_prev, const Matrix& c_prev, const RowVector& decay,
                     StepCache& s) const {
    if (x.rows() != inputs_ || h_prev.rows() != hidden_ || c_prev.rows() != hidden_ ||
        x.cols() != h_prev.cols() || x.cols() != c_prev.cols() || decay.size() != x.cols()) {
        throw std::invalid_argument("TLSTMCell::step: shape mismatch");
    }
    const Eigen::Index h = hidden_;
    s.x = x;
    s.h_prev = h_prev;
    s.c_prev = c_prev;
    s.decay = decay;

    Matrix pre_d = w_decomp * c_prev;
    pre_d.colwise() += b_decomp.col(0);
    s.short_term = tanh_array(pre_d.array()).matrix();
    // (c - C_S) + C_S * g, written so that g == 1 returns c_prev bit for bit
    s.adjusted = c_prev.array() + s.short_term.array().rowwise() * (decay.array() - 1.0);

    Matrix z = w * x;
    z.noalias() += u * h_prev;
    z.colwise() += b.col(0);
    s.gate_i = sigmoid_array(z.topRows(h).array()).matrix();
    s.gate_f = sigmoid_array(z.middleRows(h, h).array()).matrix();
    s.gate_o = sigmoid_array(z.middleRows(2 * h, h).array()).matrix();
    s.candidate = tanh_array(z.bottomRows(h).array()).matrix();

    s.c = (s.gate_f.array() * s.adjusted.array() + s.gate_i.array() * s.candidate.array()).matrix();
    s.tanh_c = tanh_array(s.c.array()).matrix();
    s.h = (s.gate_o.array() * s.tanh_c.array()).matrix();
}

void TLSTMCell::step_backward(const StepCache& s, const Matrix& dh, const Matrix& dc_in, Matrix* dx,
                              Matrix& dh_prev, Matrix& dc_prev) {
    const Eigen::Index h = hidden_;
    const Array tc = s.tanh_c.array();
    const Array go = s.gate_o.array();
    const Array gi = s.gate_i.array();
    const Array gf = s.gate_f.array();
    const Array cand = s.candidate.array();

    const Array d_o = dh.array() * tc;
    const Array dc = dc_in.array() + dh.array() * go * (1.0 - tc.square());
    const Array d_f = dc * s.adjusted.array();
    const Array d_i = dc * cand;
    const Array d_cand = dc * gi;
    const Array d_adjusted = dc * gf;

    Matrix dz(4 * h, s.x.cols());
    dz.topRows(h) = (d_i * gi * (1.0 - gi)).matrix();
    dz.middleRows(h, h) = (d_f * gf * (1.0 - gf)).matrix();
    dz.middleRows(2 * h, h) = (d_o * go * (1.0 - go)).matrix();
    dz.bottomRows(h) = (d_cand * (1.0 - cand.square())).matrix();

    grad_w.noalias() += dz * s.x.transpose();
    grad_u.noalias() += dz * s.h_prev.transpose();
    grad_b += dz.rowwise().sum();
    if (dx != nullptr) dx->noalias() = w.transpose() * dz;
    dh_prev.noalias() = u.transpose() * dz;

    const Array d_short = d_adjusted.rowwise() * (s.decay.array() - 1.0);
    const Matrix d_pre = (d_short * (1.0 - s.short_term.array().square())).matrix();
    grad_w_decomp.noalias() += d_pre * s.c_prev.transpose();
    grad_b_decomp += d_pre.rowwise().sum();
    dc_prev = d_adjusted.matrix();
    dc_prev.noalias() += w_decomp.transpose() * d_pre;
}

void TLSTMCell::collect(const std::string& prefix, ParamList& out) {
    out.push_back({prefix + ".w", &w, &grad_w});
    out.push_back({prefix + ".u", &u, &grad_u});
    out.push_back({prefix + ".b", &b, &grad_b});
    out.push_back({prefix + ".w_decomp", &w_decomp, &grad_w_decomp});
    out.push_back({prefix + ".b_decomp", &b_decomp, &grad_b_decomp});
}

StepResult tlstm_step(const Vector& x, const Vector& h_prev, const Vector& c_prev, double dt, const TLSTMCell& cell) {
    RowVector decay(1);
    decay(0) = time_decay(dt);
    TLSTMCell::StepCache s;
    cell.step(x, h_prev, c_prev, decay, s);
    return {s.h.col(0), s.c.col(0)};
}

BiTLSTM::BiTLSTM(int inputs, int hidden_per_direction)
    : forward_cell(inputs, hidden_per_direction), backward_cell(inputs, hidden_per_direction) {}

void BiTLSTM::init(Rng& rng) {
    forward_cell.init(rng);
    backward_cell.init(rng);
}

namespace {

RowVector decay_row(const Matrix& gaps, Eigen::Index step) {
    RowVector g(gaps.cols());
    for (Eigen::Index c = 0; c < gaps.cols(); ++c) g(c) = time_decay(gaps(step, c));
    return g;
}

void check_sequence(std::span<const Matrix> steps, const Matrix& gap_forward, const Matrix& gap_backward) {
    if (steps.empty()) throw std::invalid_argument("BiTLSTM: empty sequence");
    const auto L = static_cast<Eigen::Index>(steps.size());
    const Eigen::Index samples = steps.front().cols();
    if (gap_forward.rows() != L || gap_backward.rows() != L || gap_forward.cols() != samples ||
        gap_backward.cols() != samples) {
        throw std::invalid_argument("BiTLSTM: gap matrices must be (steps x samples)");
    }
    for (const Matrix& s : steps) {
        if (s.cols() != samples) throw std::invalid_argument("BiTLSTM: ragged sequence");
    }
}

}  // namespace

std::vector<Matrix> BiTLSTM::encode(std::span<const Matrix> steps, const Matrix& gap_forward,
                                    const Matrix& gap_backward) const {
    check_sequence(steps, gap_forward, gap_backward);
    const auto L = static_cast<Eigen::Index>(steps.size());
    const Eigen::Index samples = steps.front().cols();
    const Eigen::Index h = forward_cell.hidden();
    std::vector<Matrix> out(steps.size(), Matrix(2 * h, samples));

    TLSTMCell::StepCache s;
    Matrix hs = Matrix::Zero(h, samples), cs = Matrix::Zero(h, samples);
    for (Eigen::Index i = 0; i < L; ++i) {
        forward_cell.step(steps[static_cast<std::size_t>(i)], hs, cs, decay_row(gap_forward, i), s);
        hs = s.h;
        cs = s.c;
        out[static_cast<std::size_t>(i)].topRows(h) = hs;
    }
    hs.setZero();
    cs.setZero();
    for (Eigen::Index i = L - 1; i >= 0; --i) {
        backward_cell.step(steps[static_cast<std::size_t>(i)], hs, cs, decay_row(gap_backward, i), s);
        hs = s.h;
        cs = s.c;
        out[static_cast<std::size_t>(i)].bottomRows(h) = hs;
    }
    return out;
}

Matrix BiTLSTM::encode_middle(std::span<const Matrix> steps, const Matrix& gap_forward, const Matrix& gap_backward,
                              MiddleCache* cache) const {
    check_sequence(steps, gap_forward, gap_backward);
    const auto L = static_cast<Eigen::Index>(steps.size());
    const Eigen::Index mid = L / 2;
    const Eigen::Index samples = steps.front().cols();
    const Eigen::Index h = forward_cell.hidden();

    MiddleCache local;
    MiddleCache& c = cache != nullptr ? *cache : local;
    c.forward.resize(static_cast<std::size_t>(mid + 1));
    c.backward.resize(static_cast<std::size_t>(L - mid));

    const Matrix zero = Matrix::Zero(h, samples);
    for (Eigen::Index i = 0; i <= mid; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const Matrix& hp = i == 0 ? zero : c.forward[k - 1].h;
        const Matrix& cp = i == 0 ? zero : c.forward[k - 1].c;
        forward_cell.step(steps[k], hp, cp, decay_row(gap_forward, i), c.forward[k]);
    }
    for (Eigen::Index i = L - 1, k = 0; i >= mid; --i, ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const Matrix& hp = k == 0 ? zero : c.backward[kk - 1].h;
        const Matrix& cp = k == 0 ? zero : c.backward[kk - 1].c;
        backward_cell.step(steps[static_cast<std::size_t>(i)], hp, cp, decay_row(gap_backward, i), c.backward[kk]);
    }
    Matrix out(2 * h, samples);
    out.topRows(h) = c.forward.back().h;
    out.bottomRows(h) = c.backward.back().h;
    return out;
}

void BiTLSTM::backward_middle(const MiddleCache& cache, const Matrix& d_out) {
    const Eigen::Index h = forward_cell.hidden();
    const Eigen::Index samples = d_out.cols();
    Matrix dh, dc, dh_prev, dc_prev;

    dh = d_out.topRows(h);
    dc = Matrix::Zero(h, samples);
    for (std::size_t k = cache.forward.size(); k-- > 0;) {
        forward_cell.step_backward(cache.forward[k], dh, dc, nullptr, dh_prev, dc_prev);
        dh.swap(dh_prev);
        dc.swap(dc_prev);
    }
    dh = d_out.bottomRows(h);
    dc = Matrix::Zero(h, samples);
    for (std::size_t k = cache.backward.size(); k-- > 0;) {
        backward_cell.step_backward(cache.backward[k], dh, dc, nullptr, dh_prev, dc_prev);
        dh.swap(dh_prev);
        dc.swap(dc_prev);
    }
}

void BiTLSTM::collect(const std::string& prefix, ParamList& out) {
    forward_cell.collect(prefix + ".fwd", out);
    backward_cell.collect(prefix + ".bwd", out);
}

}  // namespace imputer::nn
