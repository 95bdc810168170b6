#pragma once

#include <span>
#include <string>
#include <vector>

#include "imputer/nnkit/tensor.hpp"
#include "imputer/rng.hpp"

namespace imputer::nn {

/// Fully connected layer over column batches: y = act(W x + b).
class Dense {
public:
    Dense() = default;
    Dense(int inputs, int outputs, Activation activation);

    struct Cache {
        Matrix input;
        Matrix pre;
    };

    /// Uniform in +-1/sqrt(fan_in) for weights and bias.
    void init(Rng& rng);

    Matrix forward(const Matrix& x, Cache* cache = nullptr) const;
    /// Accumulates parameter gradients; returns dL/dx.
    Matrix backward(const Matrix& dy, const Cache& cache, bool need_input_grad = true);

    void collect(const std::string& prefix, ParamList& out);

    int inputs() const { return static_cast<int>(weight.cols()); }
    int outputs() const { return static_cast<int>(weight.rows()); }

    Matrix weight;
    Matrix bias;
    Matrix grad_weight;
    Matrix grad_bias;
    Activation activation = Activation::identity;
};

/// g(dt) = 1 / ln(e + dt); dt in seconds, must be non-negative.
double time_decay(double dt);

/// Time-aware LSTM cell. The previous cell memory is split into a short-term
/// part tanh(Wd c + bd), discounted by g(dt), and the long-term remainder.
/// Gate rows are stacked [input, forget, output, candidate].
class TLSTMCell {
public:
    TLSTMCell() = default;
    TLSTMCell(int inputs, int hidden);

    struct StepCache {
        Matrix x;
        Matrix h_prev;
        Matrix c_prev;
        RowVector decay;
        Matrix short_term;  // tanh(Wd c_prev + bd)
        Matrix adjusted;    // c_prev with the discounted short-term memory
        Matrix gate_i;
        Matrix gate_f;
        Matrix gate_o;
        Matrix candidate;
        Matrix c;
        Matrix tanh_c;
        Matrix h;
    };

    /// Weight init uniform in +-1/sqrt(fan_in); forget-gate bias starts at +1.
    void init(Rng& rng);

    /// One step for a batch of columns; `decay` holds g(dt) per column.
    void step(const Matrix& x, const Matrix& h_prev, const Matrix& c_prev, const RowVector& decay,
              StepCache& out) const;

    /// Accumulates gradients. dx is skipped when null.
    void step_backward(const StepCache& s, const Matrix& dh, const Matrix& dc, Matrix* dx, Matrix& dh_prev,
                       Matrix& dc_prev);

    void collect(const std::string& prefix, ParamList& out);

    int inputs() const { return inputs_; }
    int hidden() const { return hidden_; }

    Matrix w;       // 4h x inputs
    Matrix u;       // 4h x h
    Matrix b;       // 4h x 1
    Matrix w_decomp;  // h x h
    Matrix b_decomp;  // h x 1
    Matrix grad_w, grad_u, grad_b, grad_w_decomp, grad_b_decomp;

private:
    int inputs_ = 0;
    int hidden_ = 0;
};

struct StepResult {
    Vector h;
    Vector c;
};

/// Single-sample convenience wrapper around TLSTMCell::step.
StepResult tlstm_step(const Vector& x, const Vector& h_prev, const Vector& c_prev, double dt, const TLSTMCell& cell);

/// Bidirectional pair of time-aware cells. Sequences are given as one matrix
/// per step (inputs x samples); gaps as (steps x samples) matrices in seconds.
class BiTLSTM {
public:
    BiTLSTM() = default;
    BiTLSTM(int inputs, int hidden_per_direction);

    void init(Rng& rng);

    /// Hidden states for every step, each (2h x samples): [forward; backward].
    std::vector<Matrix> encode(std::span<const Matrix> steps, const Matrix& gap_forward,
                               const Matrix& gap_backward) const;

    struct MiddleCache {
        std::vector<TLSTMCell::StepCache> forward;
        std::vector<TLSTMCell::StepCache> backward;
    };

    /// Output at the middle step only; runs each direction up to the middle.
    Matrix encode_middle(std::span<const Matrix> steps, const Matrix& gap_forward, const Matrix& gap_backward,
                         MiddleCache* cache = nullptr) const;
    void backward_middle(const MiddleCache& cache, const Matrix& d_out);

    void collect(const std::string& prefix, ParamList& out);

    int hidden_per_direction() const { return forward_cell.hidden(); }
    int output_size() const { return 2 * forward_cell.hidden(); }

    TLSTMCell forward_cell;
    TLSTMCell backward_cell;
};

/// Mean over every other node of the same graph; columns are grouped into
/// consecutive graphs of `nodes` columns. Self-adjoint.
Matrix neighbour_mean(const Matrix& x, int nodes);

/// SAGE message passing on fully connected graphs:
/// out[v] = act(W_root x[v] + W_neigh mean_{u != v} x[u] + b).
class SageLayer {
public:
    SageLayer() = default;
    SageLayer(int inputs, int outputs, Activation activation);

    struct Cache {
        Matrix input;
        Matrix neighbours;
        Matrix pre;
    };

    void init(Rng& rng);

    Matrix forward(const Matrix& x, int nodes, Cache* cache = nullptr) const;
    Matrix backward(const Matrix& dy, const Cache& cache, int nodes, bool need_input_grad = true);

    void collect(const std::string& prefix, ParamList& out);

    int inputs() const { return static_cast<int>(w_root.cols()); }
    int outputs() const { return static_cast<int>(w_root.rows()); }

    Matrix w_root;
    Matrix w_neigh;
    Matrix bias;
    Matrix grad_w_root;
    Matrix grad_w_neigh;
    Matrix grad_bias;
    Activation activation = Activation::identity;
};

}  // namespace imputer::nn
