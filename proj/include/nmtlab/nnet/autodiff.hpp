#pragma once

#include "nmtlab/error.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace nmtlab {
class Rng;
}

namespace nmtlab::nnet {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Named parameter tensors with matching gradient buffers. Insertion order is
// the canonical order for initialization, serialization and optimizer state.
class ParamStore {
  public:
    int add(std::string name, Mat value);

    std::size_t size() const { return values_.size(); }
    std::size_t num_scalars() const;

    int index(std::string_view name) const;  // throws Error when absent
    bool contains(std::string_view name) const { return index_.count(std::string(name)) > 0; }

    const std::string& name(int i) const { return names_[static_cast<std::size_t>(i)]; }
    Mat& value(int i) { return values_[static_cast<std::size_t>(i)]; }
    const Mat& value(int i) const { return values_[static_cast<std::size_t>(i)]; }
    Mat& grad(int i) { return grads_[static_cast<std::size_t>(i)]; }
    const Mat& grad(int i) const { return grads_[static_cast<std::size_t>(i)]; }
    Mat& value(std::string_view n) { return value(index(n)); }
    const Mat& value(std::string_view n) const { return value(index(n)); }

    void zero_grad();

    // Same names, shapes and bit patterns.
    bool identical(const ParamStore& other) const;

  private:
    std::vector<std::string> names_;
    std::vector<Mat> values_;
    std::vector<Mat> grads_;
    std::map<std::string, int> index_;
};

struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode tape over dense row-major matrices. Each op records its value
// and a closure that pushes its output gradient to its inputs. Parameter leaves
// are cached per tape, and backward() adds their gradients into the store.
class Tape {
  public:
    // With record = false no backward closures are kept (inference).
    explicit Tape(ParamStore& store, bool record = true) : store_(&store), record_(record) {}

    Var param(int index);
    Var param(std::string_view name) { return param(store_->index(name)); }
    Var constant(Mat value);

    // Every relu appends the signs (input > 0) of its input, row-major.
    void log_relu_signs(std::vector<unsigned char>* log) { relu_log_ = log; }

    const Mat& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
    double scalar(Var v) const { return value(v)(0, 0); }
    std::size_t num_nodes() const { return nodes_.size(); }

    // Seeds d(loss) = 1 (loss must be 1x1) and accumulates into the store.
    void backward(Var loss);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);  // elementwise
    Var scale(Var a, double s);
    Var add_row(Var a, Var row);  // broadcast 1 x n over rows
    Var matmul(Var a, Var b);
    Var matmul_nt(Var a, Var b);  // a * b^T

    Var tanh(Var a);
    Var sigmoid(Var a);
    Var relu(Var a);

    Var gather_rows(Var table, const std::vector<int>& ids);
    Var slice_cols(Var a, int start, int width);
    Var slice_rows(Var a, int start, int count);
    Var concat_cols(const std::vector<Var>& parts);
    Var concat_rows(const std::vector<Var>& parts);

    Var softmax_rows(Var a, bool causal = false);
    Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-6);

    // Inverted dropout with a Bernoulli mask drawn row-major from rng.
    Var dropout(Var a, double p, Rng& rng);

    // Fused LSTM cell. gates = [i f g o] pre-activations (1 x 4d), c_prev (1 x d).
    // Returns [h c] (1 x 2d).
    Var lstm_cell(Var gates, Var c_prev);

    // Scaled dot-product attention with heads packed along columns.
    // q: Tq x d, k/v: Tk x d. Optionally appends each head's weights to sink.
    Var attention(Var q, Var k, Var v, int n_heads, bool causal, std::vector<Mat>* sink = nullptr);

    // Sum over rows of -log softmax(logits)[row, targets[row]], as 1 x 1.
    Var cross_entropy_sum(Var logits, const std::vector<int>& targets);

    Var sum(const std::vector<Var>& scalars);

    // Throws NumericError naming `what` if any value is NaN or infinite.
    void check_finite(Var v, const std::string& what) const;

  private:
    struct Node {
        Mat value;
        Mat grad;
        std::function<void()> backward;
        int param_index = -1;
        bool requires_grad = false;
    };

    Var push(Mat value, bool requires_grad);
    bool needs(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].requires_grad; }
    Mat& grad_of(Var v);
    Mat& out_grad(Var v) { return nodes_[static_cast<std::size_t>(v.id)].grad; }
    template <typename F>
    Var record(Mat value, std::initializer_list<Var> inputs, F&& backward);

    ParamStore* store_;
    bool record_;
    std::vector<Node> nodes_;
    std::map<int, int> param_nodes_;
    std::vector<unsigned char>* relu_log_ = nullptr;
};

} // namespace nmtlab::nnet
