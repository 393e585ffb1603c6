#include "nmtlab/nnet/autodiff.hpp"

#include "nmtlab/error.hpp"
#include "nmtlab/rng.hpp"

#include <cmath>
#include <limits>

namespace nmtlab::nnet {

int ParamStore::add(std::string name, Mat value) {
    if (index_.count(name)) throw Error("duplicate parameter '" + name + "'");
    const int id = static_cast<int>(values_.size());
    index_.emplace(name, id);
    names_.push_back(std::move(name));
    grads_.push_back(Mat::Zero(value.rows(), value.cols()));
    values_.push_back(std::move(value));
    return id;
}

std::size_t ParamStore::num_scalars() const {
    std::size_t n = 0;
    for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
    return n;
}

int ParamStore::index(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw Error("no parameter named '" + std::string(name) + "'");
    return it->second;
}

void ParamStore::zero_grad() {
    for (auto& g : grads_) g.setZero();
}

bool ParamStore::identical(const ParamStore& other) const {
    if (names_ != other.names_) return false;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const Mat& a = values_[i];
        const Mat& b = other.values_[i];
        if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
        if (std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) != 0)
            return false;
    }
    return true;
}

Var Tape::push(Mat value, bool requires_grad) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad && record_;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Mat& Tape::grad_of(Var v) {
    Node& n = nodes_[static_cast<std::size_t>(v.id)];
    if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    return n.grad;
}

template <typename F>
Var Tape::record(Mat value, std::initializer_list<Var> inputs, F&& backward) {
    bool req = false;
    for (Var in : inputs) req = req || needs(in);
    Var out = push(std::move(value), req);
    if (req) nodes_.back().backward = std::forward<F>(backward);
    return out;
}

Var Tape::param(int index) {
    auto it = param_nodes_.find(index);
    if (it != param_nodes_.end()) return Var{it->second};
    Var v = push(store_->value(index), true);
    nodes_.back().param_index = index;
    param_nodes_.emplace(index, v.id);
    return v;
}

Var Tape::constant(Mat value) { return push(std::move(value), false); }

void Tape::backward(Var loss) {
    if (!record_) throw Error("backward on a non-recording tape");
    if (value(loss).size() != 1) throw Error("backward needs a scalar loss");
    grad_of(loss)(0, 0) += 1.0;
    for (int i = loss.id; i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (!n.requires_grad || n.grad.size() == 0) continue;
        if (n.backward) n.backward();
        if (n.param_index >= 0) store_->grad(n.param_index) += n.grad;
    }
}

Var Tape::add(Var a, Var b) {
    Mat out = value(a) + value(b);
    return record(std::move(out), {a, b}, [this, a, b, o = Var{static_cast<int>(nodes_.size())}] {
        const Mat& g = out_grad(o);
        if (needs(a)) grad_of(a) += g;
        if (needs(b)) grad_of(b) += g;
    });
}

Var Tape::sub(Var a, Var b) {
    Mat out = value(a) - value(b);
    return record(std::move(out), {a, b}, [this, a, b, o = Var{static_cast<int>(nodes_.size())}] {
        const Mat& g = out_grad(o);
        if (needs(a)) grad_of(a) += g;
        if (needs(b)) grad_of(b) -= g;
    });
}

Var Tape::mul(Var a, Var b) {
    Mat out = value(a).cwiseProduct(value(b));
    return record(std::move(out), {a, b}, [this, a, b, o = Var{static_cast<int>(nodes_.size())}] {
        const Mat& g = out_grad(o);
        if (needs(a)) grad_of(a) += g.cwiseProduct(value(b));
        if (needs(b)) grad_of(b) += g.cwiseProduct(value(a));
    });
}

Var Tape::scale(Var a, double s) {
    Mat out = value(a) * s;
    return record(std::move(out), {a}, [this, a, s, o = Var{static_cast<int>(nodes_.size())}] {
        grad_of(a) += out_grad(o) * s;
    });
}

Var Tape::add_row(Var a, Var row) {
    if (value(row).rows() != 1 || value(row).cols() != value(a).cols())
        throw Error("add_row: shape mismatch");
    Mat out = value(a).rowwise() + value(row).row(0);
    return record(std::move(out), {a, row}, [this, a, row, o = Var{static_cast<int>(nodes_.size())}] {
        const Mat& g = out_grad(o);
        if (needs(a)) grad_of(a) += g;
        if (needs(row)) grad_of(row) += g.colwise().sum();
    });
}

Var Tape::matmul(Var a, Var b) {
    if (value(a).cols() != value(b).rows()) throw Error("matmul: shape mismatch");
    Mat out;
    out.noalias() = value(a) * value(b);
    return record(std::move(out), {a, b}, [this, a, b, o = Var{static_cast<int>(nodes_.size())}] {
        const Mat& g = out_grad(o);
        if (needs(a)) grad_of(a).noalias() += g * value(b).transpose();
        if (needs(b)) grad_of(b).noalias() += value(a).transpose() * g;
    });
}

Var Tape::matmul_nt(Var a, Var b) {
    if (value(a).cols() != value(b).cols()) throw Error("matmul_nt: shape mismatch");
    Mat out;
    out.noalias() = value(a) * value(b).transpose();
    return record(std::move(out), {a, b}, [this, a, b, o = Var{static_cast<int>(nodes_.size())}] {
        const Mat& g = out_grad(o);
        if (needs(a)) grad_of(a).noalias() += g * value(b);
        if (needs(b)) grad_of(b).noalias() += g.transpose() * value(a);
    });
}

Var Tape::tanh(Var a) {
    Mat out = value(a).array().tanh().matrix();
    return record(std::move(out), {a}, [this, a, o = Var{static_cast<int>(nodes_.size())}] {
        const Mat& y = value(o);
        grad_of(a).array() += out_grad(o).array() * (1.0 - y.array().square());
    });
}

Var Tape::sigmoid(Var a) {
    Mat out = (1.0 / (1.0 + (-value(a).array()).exp())).matrix();
    return record(std::move(out), {a}, [this, a, o = Var{static_cast<int>(nodes_.size())}] {
        const Mat& y = value(o);
        grad_of(a).array() += out_grad(o).array() * y.array() * (1.0 - y.array());
    });
}

Var Tape::relu(Var a) {
    if (relu_log_)
        for (Eigen::Index i = 0; i < value(a).size(); ++i) relu_log_->push_back(value(a).data()[i] > 0.0);
    Mat out = value(a).cwiseMax(0.0);
    return record(std::move(out), {a}, [this, a, o = Var{static_cast<int>(nodes_.size())}] {
        grad_of(a).array() += (value(a).array() > 0.0).select(out_grad(o).array(), 0.0);
    });
}

Var Tape::gather_rows(Var table, const std::vector<int>& ids) {
    const Mat& t = value(table);
    Mat out(static_cast<Eigen::Index>(ids.size()), t.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= t.rows())
            throw Error("embedding id " + std::to_string(ids[i]) + " out of range [0, " +
                        std::to_string(t.rows()) + ")");
        out.row(static_cast<Eigen::Index>(i)) = t.row(ids[i]);
    }
    return record(std::move(out), {table}, [this, table, ids, o = Var{static_cast<int>(nodes_.size())}] {
        const Mat& g = out_grad(o);
        Mat& gt = grad_of(table);
        for (std::size_t i = 0; i < ids.size(); ++i) gt.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
    });
}

Var Tape::slice_cols(Var a, int start, int width) {
    if (start < 0 || start + width > value(a).cols()) throw Error("slice_cols: out of range");
    Mat out = value(a).middleCols(start, width);
    return record(std::move(out), {a}, [this, a, start, width, o = Var{static_cast<int>(nodes_.size())}] {
        grad_of(a).middleCols(start, width) += out_grad(o);
    });
}

Var Tape::slice_rows(Var a, int start, int count) {
    if (start < 0 || start + count > value(a).rows()) throw Error("slice_rows: out of range");
    Mat out = value(a).middleRows(start, count);
    return record(std::move(out), {a}, [this, a, start, count, o = Var{static_cast<int>(nodes_.size())}] {
        grad_of(a).middleRows(start, count) += out_grad(o);
    });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw Error("concat_cols: no inputs");
    const Eigen::Index rows = value(parts[0]).rows();
    Eigen::Index cols = 0;
    bool req = false;
    for (Var p : parts) {
        if (value(p).rows() != rows) throw Error("concat_cols: row mismatch");
        cols += value(p).cols();
        req = req || needs(p);
    }
    Mat out(rows, cols);
    Eigen::Index at = 0;
    for (Var p : parts) {
        out.middleCols(at, value(p).cols()) = value(p);
        at += value(p).cols();
    }
    Var o = push(std::move(out), req);
    if (req) {
        nodes_.back().backward = [this, parts, o] {
            Eigen::Index at = 0;
            for (Var p : parts) {
                const Eigen::Index w = value(p).cols();
                if (needs(p)) grad_of(p) += out_grad(o).middleCols(at, w);
                at += w;
            }
        };
    }
    return o;
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw Error("concat_rows: no inputs");
    const Eigen::Index cols = value(parts[0]).cols();
    Eigen::Index rows = 0;
    bool req = false;
    for (Var p : parts) {
        if (value(p).cols() != cols) throw Error("concat_rows: column mismatch");
        rows += value(p).rows();
        req = req || needs(p);
    }
    Mat out(rows, cols);
    Eigen::Index at = 0;
    for (Var p : parts) {
        out.middleRows(at, value(p).rows()) = value(p);
        at += value(p).rows();
    }
    Var o = push(std::move(out), req);
    if (req) {
        nodes_.back().backward = [this, parts, o] {
            Eigen::Index at = 0;
            for (Var p : parts) {
                const Eigen::Index h = value(p).rows();
                if (needs(p)) grad_of(p) += out_grad(o).middleRows(at, h);
                at += h;
            }
        };
    }
    return o;
}

namespace {

// Row-wise softmax; with causal masking entry (i, j) is exactly 0 for j > i.
void softmax_rows_inplace(Mat& m, bool causal) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const Eigen::Index width = causal ? std::min<Eigen::Index>(i + 1, m.cols()) : m.cols();
        auto row = m.row(i);
        const double mx = row.head(width).maxCoeff();
        double total = 0.0;
        for (Eigen::Index j = 0; j < width; ++j) {
            row(j) = std::exp(row(j) - mx);
            total += row(j);
        }
        for (Eigen::Index j = 0; j < width; ++j) row(j) /= total;
        for (Eigen::Index j = width; j < m.cols(); ++j) row(j) = 0.0;
    }
}

// Given y = softmax(x) and dy, returns dx.
Mat softmax_backward(const Mat& y, const Mat& dy) {
    const Eigen::VectorXd dots = (y.cwiseProduct(dy)).rowwise().sum();
    Mat dx = dy;
    dx.colwise() -= dots;
    return y.cwiseProduct(dx);
}

} // namespace

Var Tape::softmax_rows(Var a, bool causal) {
    Mat out = value(a);
    softmax_rows_inplace(out, causal);
    return record(std::move(out), {a}, [this, a, o = Var{static_cast<int>(nodes_.size())}] {
        grad_of(a) += softmax_backward(value(o), out_grad(o));
    });
}

Var Tape::layer_norm(Var x, Var gain, Var bias, double eps) {
    const Mat& xv = value(x);
    const Eigen::Index n = xv.cols();
    Eigen::VectorXd inv_std(xv.rows());
    Mat xhat(xv.rows(), n);
    for (Eigen::Index i = 0; i < xv.rows(); ++i) {
        const double mu = xv.row(i).mean();
        const double var = (xv.row(i).array() - mu).square().mean();
        inv_std(i) = 1.0 / std::sqrt(var + eps);
        xhat.row(i) = (xv.row(i).array() - mu) * inv_std(i);
    }
    Mat out = (xhat.array().rowwise() * value(gain).row(0).array()).matrix();
    out.rowwise() += value(bias).row(0);
    return record(std::move(out), {x, gain, bias},
                  [this, x, gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std),
                   o = Var{static_cast<int>(nodes_.size())}] {
                      const Mat& g = out_grad(o);
                      if (needs(gain)) grad_of(gain) += g.cwiseProduct(xhat).colwise().sum();
                      if (needs(bias)) grad_of(bias) += g.colwise().sum();
                      if (needs(x)) {
                          const Mat dxhat = (g.array().rowwise() * value(gain).row(0).array()).matrix();
                          const double n = static_cast<double>(g.cols());
                          Mat& gx = grad_of(x);
                          for (Eigen::Index i = 0; i < g.rows(); ++i) {
                              const double m1 = dxhat.row(i).sum() / n;
                              const double m2 = dxhat.row(i).dot(xhat.row(i)) / n;
                              gx.row(i).array() +=
                                  inv_std(i) * (dxhat.row(i).array() - m1 - xhat.row(i).array() * m2);
                          }
                      }
                  });
}

Var Tape::dropout(Var a, double p, Rng& rng) {
    if (p <= 0.0) return a;
    const Mat& av = value(a);
    Mat mask(av.rows(), av.cols());
    const double keep_scale = 1.0 / (1.0 - p);
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng.uniform() < p ? 0.0 : keep_scale;
    Mat out = av.cwiseProduct(mask);
    return record(std::move(out), {a}, [this, a, mask = std::move(mask), o = Var{static_cast<int>(nodes_.size())}] {
        grad_of(a) += out_grad(o).cwiseProduct(mask);
    });
}

Var Tape::lstm_cell(Var gates, Var c_prev) {
    const Mat& gv = value(gates);
    const Eigen::Index d = value(c_prev).cols();
    if (gv.rows() != 1 || gv.cols() != 4 * d || value(c_prev).rows() != 1)
        throw Error("lstm_cell: shape mismatch");
    auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    Mat act(1, 4 * d);  // activated gates [i f g o]
    for (Eigen::Index j = 0; j < d; ++j) {
        act(0, j) = sig(gv(0, j));
        act(0, d + j) = sig(gv(0, d + j));
        act(0, 2 * d + j) = std::tanh(gv(0, 2 * d + j));
        act(0, 3 * d + j) = sig(gv(0, 3 * d + j));
    }
    const Mat& cp = value(c_prev);
    Mat out(1, 2 * d);
    Mat tanh_c(1, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double c = act(0, d + j) * cp(0, j) + act(0, j) * act(0, 2 * d + j);
        tanh_c(0, j) = std::tanh(c);
        out(0, j) = act(0, 3 * d + j) * tanh_c(0, j);
        out(0, d + j) = c;
    }
    return record(std::move(out), {gates, c_prev},
                  [this, gates, c_prev, d, act = std::move(act), tanh_c = std::move(tanh_c),
                   o = Var{static_cast<int>(nodes_.size())}] {
                      const Mat& g = out_grad(o);
                      const Mat& cp = value(c_prev);
                      Mat dgates(1, 4 * d);
                      Mat dcp(1, d);
                      for (Eigen::Index j = 0; j < d; ++j) {
                          const double i = act(0, j), f = act(0, d + j), gg = act(0, 2 * d + j),
                                       og = act(0, 3 * d + j), tc = tanh_c(0, j);
                          const double dh = g(0, j);
                          const double dc = g(0, d + j) + dh * og * (1.0 - tc * tc);
                          dgates(0, j) = dc * gg * i * (1.0 - i);
                          dgates(0, d + j) = dc * cp(0, j) * f * (1.0 - f);
                          dgates(0, 2 * d + j) = dc * i * (1.0 - gg * gg);
                          dgates(0, 3 * d + j) = dh * tc * og * (1.0 - og);
                          dcp(0, j) = dc * f;
                      }
                      if (needs(gates)) grad_of(gates) += dgates;
                      if (needs(c_prev)) grad_of(c_prev) += dcp;
                  });
}

Var Tape::attention(Var q, Var k, Var v, int n_heads, bool causal, std::vector<Mat>* sink) {
    const Mat& qv = value(q);
    const Mat& kv = value(k);
    const Mat& vv = value(v);
    const Eigen::Index d = qv.cols();
    if (kv.cols() != d || vv.cols() != d || kv.rows() != vv.rows() || d % n_heads != 0)
        throw Error("attention: shape mismatch");
    const Eigen::Index dk = d / n_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

    std::vector<Mat> weights(static_cast<std::size_t>(n_heads));
    Mat out(qv.rows(), d);
    for (int h = 0; h < n_heads; ++h) {
        Mat s;
        s.noalias() = qv.middleCols(h * dk, dk) * kv.middleCols(h * dk, dk).transpose();
        s *= scale;
        softmax_rows_inplace(s, causal);
        out.middleCols(h * dk, dk).noalias() = s * vv.middleCols(h * dk, dk);
        if (sink) sink->push_back(s);
        weights[static_cast<std::size_t>(h)] = std::move(s);
    }
    return record(std::move(out), {q, k, v},
                  [this, q, k, v, n_heads, dk, scale, weights = std::move(weights),
                   o = Var{static_cast<int>(nodes_.size())}] {
                      const Mat& g = out_grad(o);
                      const Mat& qv = value(q);
                      const Mat& kv = value(k);
                      const Mat& vv = value(v);
                      for (int h = 0; h < n_heads; ++h) {
                          const Mat& a = weights[static_cast<std::size_t>(h)];
                          const auto gh = g.middleCols(h * dk, dk);
                          if (needs(v)) grad_of(v).middleCols(h * dk, dk).noalias() += a.transpose() * gh;
                          Mat da;
                          da.noalias() = gh * vv.middleCols(h * dk, dk).transpose();
                          const Mat ds = softmax_backward(a, da) * scale;
                          if (needs(q)) grad_of(q).middleCols(h * dk, dk).noalias() += ds * kv.middleCols(h * dk, dk);
                          if (needs(k))
                              grad_of(k).middleCols(h * dk, dk).noalias() += ds.transpose() * qv.middleCols(h * dk, dk);
                      }
                  });
}

Var Tape::cross_entropy_sum(Var logits, const std::vector<int>& targets) {
    const Mat& lv = value(logits);
    if (static_cast<std::size_t>(lv.rows()) != targets.size()) throw Error("cross_entropy: row/target mismatch");
    Mat probs(lv.rows(), lv.cols());
    double loss = 0.0;
    for (Eigen::Index i = 0; i < lv.rows(); ++i) {
        const int t = targets[static_cast<std::size_t>(i)];
        if (t < 0 || t >= lv.cols()) throw Error("cross_entropy: target out of range");
        const double mx = lv.row(i).maxCoeff();
        probs.row(i) = (lv.row(i).array() - mx).exp().matrix();
        const double z = probs.row(i).sum();
        probs.row(i) /= z;
        loss += mx + std::log(z) - lv(i, t);
    }
    Mat out(1, 1);
    out(0, 0) = loss;
    return record(std::move(out), {logits},
                  [this, logits, targets, probs = std::move(probs), o = Var{static_cast<int>(nodes_.size())}] {
                      const double g = out_grad(o)(0, 0);
                      Mat& gl = grad_of(logits);
                      gl += probs * g;
                      for (std::size_t i = 0; i < targets.size(); ++i) gl(static_cast<Eigen::Index>(i), targets[i]) -= g;
                  });
}

Var Tape::sum(const std::vector<Var>& scalars) {
    Mat out = Mat::Zero(1, 1);
    bool req = false;
    for (Var s : scalars) {
        out(0, 0) += scalar(s);
        req = req || needs(s);
    }
    Var o = push(std::move(out), req);
    if (req) {
        nodes_.back().backward = [this, scalars, o] {
            const double g = out_grad(o)(0, 0);
            for (Var s : scalars)
                if (needs(s)) grad_of(s)(0, 0) += g;
        };
    }
    return o;
}

void Tape::check_finite(Var v, const std::string& what) const {
    if (!value(v).allFinite()) throw NumericError("non-finite values in " + what);
}

} // namespace nmtlab::nnet
