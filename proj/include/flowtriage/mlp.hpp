#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "flowtriage/rng.hpp"

namespace flowtriage {

enum class Activation { Relu, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct Layer {
    Eigen::MatrixXd W;  // out_dim x in_dim
    Eigen::VectorXd b;  // out_dim
    Activation act = Activation::Identity;
};

// Per-sample forward cache: post[0] is the input, post[i] the activation after
// layer i-1; pre[i] the pre-activation of layer i.
struct ForwardTrace {
    std::vector<Eigen::VectorXd> pre;
    std::vector<Eigen::VectorXd> post;

    const Eigen::VectorXd& output() const { return post.back(); }
};

struct Mlp {
    std::vector<Layer> layers;

    int input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().W.cols()); }
    int output_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().W.rows()); }
    long param_count() const;

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    ForwardTrace forward_trace(const Eigen::VectorXd& x) const;

    // Backpropagates dL/d(output); accumulates into grads (same shapes as
    // layers) and returns dL/d(input).
    Eigen::VectorXd backprop(const ForwardTrace& t, const Eigen::VectorXd& grad_out,
                             std::vector<Layer>& grads) const;

    std::vector<Layer> zero_like() const;

    // Parameter <-> flat-vector views, used by finite-difference checks.
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& theta);
};

// Hidden layers get `hidden`, the last layer `output`. Weights are drawn
// uniform(-0.5, 0.5) scaled by 1/sqrt(fan_in); biases start at zero.
Mlp make_mlp(const std::vector<int>& dims, Activation hidden, Activation output, Rng& rng);

Eigen::VectorXd flatten_grads(const std::vector<Layer>& grads);

void sgd_step(Mlp& net, const std::vector<Layer>& grads, double lr);

struct AdamState {
    std::vector<Layer> m;
    std::vector<Layer> v;
    long step = 0;
};

AdamState make_adam_state(const Mlp& net);

void adam_step(Mlp& net, const std::vector<Layer>& grads, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

}  // namespace flowtriage
