#include "flowtriage/mlp.hpp"

#include <cmath>

#include "flowtriage/errors.hpp"

namespace flowtriage {

std::string to_string(Activation a) {
    return a == Activation::Relu ? "relu" : "identity";
}

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "identity") return Activation::Identity;
    throw ValidationError("unknown activation tag: " + s);
}

long Mlp::param_count() const {
    long n = 0;
    for (const auto& l : layers) n += l.W.size() + l.b.size();
    return n;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
    Eigen::VectorXd a = x;
    for (const auto& l : layers) {
        Eigen::VectorXd z = l.W * a + l.b;
        a = (l.act == Activation::Relu) ? z.cwiseMax(0.0).eval() : z;
    }
    return a;
}

ForwardTrace Mlp::forward_trace(const Eigen::VectorXd& x) const {
    ForwardTrace t;
    t.post.push_back(x);
    for (const auto& l : layers) {
        Eigen::VectorXd z = l.W * t.post.back() + l.b;
        t.pre.push_back(z);
        t.post.push_back(l.act == Activation::Relu ? z.cwiseMax(0.0).eval() : z);
    }
    return t;
}

Eigen::VectorXd Mlp::backprop(const ForwardTrace& t, const Eigen::VectorXd& grad_out,
                              std::vector<Layer>& grads) const {
    Eigen::VectorXd delta = grad_out;
    for (long i = static_cast<long>(layers.size()) - 1; i >= 0; --i) {
        const auto& l = layers[static_cast<std::size_t>(i)];
        if (l.act == Activation::Relu) {
            delta = delta.cwiseProduct(
                (t.pre[static_cast<std::size_t>(i)].array() > 0.0).cast<double>().matrix());
        }
        grads[static_cast<std::size_t>(i)].W +=
            delta * t.post[static_cast<std::size_t>(i)].transpose();
        grads[static_cast<std::size_t>(i)].b += delta;
        delta = l.W.transpose() * delta;
    }
    return delta;
}

std::vector<Layer> Mlp::zero_like() const {
    std::vector<Layer> z;
    z.reserve(layers.size());
    for (const auto& l : layers) {
        z.push_back({Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()),
                     Eigen::VectorXd::Zero(l.b.size()), l.act});
    }
    return z;
}

Eigen::VectorXd Mlp::flatten() const {
    Eigen::VectorXd theta(param_count());
    long at = 0;
    for (const auto& l : layers) {
        for (long c = 0; c < l.W.cols(); ++c)
            for (long r = 0; r < l.W.rows(); ++r) theta[at++] = l.W(r, c);
        for (long i = 0; i < l.b.size(); ++i) theta[at++] = l.b[i];
    }
    return theta;
}

void Mlp::unflatten(const Eigen::VectorXd& theta) {
    if (theta.size() != param_count()) throw DimMismatch("parameter vector length");
    long at = 0;
    for (auto& l : layers) {
        for (long c = 0; c < l.W.cols(); ++c)
            for (long r = 0; r < l.W.rows(); ++r) l.W(r, c) = theta[at++];
        for (long i = 0; i < l.b.size(); ++i) l.b[i] = theta[at++];
    }
}

Mlp make_mlp(const std::vector<int>& dims, Activation hidden, Activation output, Rng& rng) {
    if (dims.size() < 2) throw ValidationError("network needs at least input and output dims");
    Mlp net;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        Layer l;
        const int in = dims[i];
        const int out = dims[i + 1];
        if (in < 1 || out < 1) throw ValidationError("layer dimensions must be positive");
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        l.W = Eigen::MatrixXd(out, in);
        for (long r = 0; r < out; ++r)
            for (long c = 0; c < in; ++c) l.W(r, c) = rng.uniform(-0.5, 0.5) * scale;
        l.b = Eigen::VectorXd::Zero(out);
        l.act = (i + 2 == dims.size()) ? output : hidden;
        net.layers.push_back(std::move(l));
    }
    return net;
}

Eigen::VectorXd flatten_grads(const std::vector<Layer>& grads) {
    Mlp tmp;
    tmp.layers = grads;
    return tmp.flatten();
}

void sgd_step(Mlp& net, const std::vector<Layer>& grads, double lr) {
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        net.layers[i].W -= lr * grads[i].W;
        net.layers[i].b -= lr * grads[i].b;
    }
}

AdamState make_adam_state(const Mlp& net) {
    return {net.zero_like(), net.zero_like(), 0};
}

void adam_step(Mlp& net, const std::vector<Layer>& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        auto& m = state.m[i];
        auto& v = state.v[i];
        m.W = beta1 * m.W + (1.0 - beta1) * grads[i].W;
        m.b = beta1 * m.b + (1.0 - beta1) * grads[i].b;
        v.W = beta2 * v.W + (1.0 - beta2) * grads[i].W.cwiseProduct(grads[i].W);
        v.b = beta2 * v.b + (1.0 - beta2) * grads[i].b.cwiseProduct(grads[i].b);
        const Eigen::MatrixXd mw_hat = m.W / bc1;
        const Eigen::VectorXd mb_hat = m.b / bc1;
        const Eigen::MatrixXd vw_hat = v.W / bc2;
        const Eigen::VectorXd vb_hat = v.b / bc2;
        net.layers[i].W.array() -= lr * mw_hat.array() / (vw_hat.array().sqrt() + eps);
        net.layers[i].b.array() -= lr * mb_hat.array() / (vb_hat.array().sqrt() + eps);
    }
}

}  // namespace flowtriage
