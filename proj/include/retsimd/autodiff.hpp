// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "retsimd/tensor.hpp"

namespace retsimd {

/// A named trainable tensor with its accumulated gradient.
struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;

    void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// Ordered registry of parameters. Names are unique; insertion order is the
/// serialization order.
class ParameterSet {
public:
    Parameter& add(const std::string& name, Matrix init);
    Parameter& get(const std::string& name);
    const Parameter& get(const std::string& name) const;
    bool contains(const std::string& name) const;

    std::vector<Parameter>& items() { return params_; }
    const std::vector<Parameter>& items() const { return params_; }
    std::size_t size() const { return params_.size(); }

    void zero_grad();
    bool all_finite() const;
    /// Total number of scalar entries.
    std::size_t numel() const;

    friend bool operator==(const ParameterSet& a, const ParameterSet& b);

private:
    std::vector<Parameter> params_;
};

namespace ad {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Matrix& value() const;
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
    double scalar() const { return value()(0, 0); }
};

/// Reverse-mode tape over dense matrices. Nodes are appended in evaluation
/// order, so a reverse sweep is a valid topological order.
class Tape {
public:
    using Backward = std::function<void(Tape&, std::size_t self)>;

    Var constant(Matrix value);
    /// Leaf bound to a parameter; backward() accumulates into param.grad.
    Var param(Parameter& p);
    Var push(Matrix value, Backward backward);

    const Matrix& value(std::size_t id) const { return nodes_[id].value; }
    const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
    Matrix& grad_mut(std::size_t id) { return nodes_[id].grad; }
    const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

    /// Seeds d(root)/d(root) = 1 for a 1x1 root and sweeps backwards.
    void backward(Var root);
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        Backward backward;
        Parameter* param = nullptr;
    };
    std::vector<Node> nodes_;
};

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Adds a 1 x n row to every row of a.
Var add_row(Var a, Var row);
Var scale(Var a, double s);
Var relu(Var a);
Var transpose(Var a);
/// Softmax within each row.
Var softmax_rows(Var a);
/// Softmax within each column.
Var softmax_cols(Var a);
/// diag(weights) * m for an n x 1 weights column.
Var scale_rows(Var weights, Var m);
Var mean_rows(Var a);
Var vstack(const std::vector<Var>& parts);
Var hstack(const std::vector<Var>& parts);
Var hadamard(Var a, Var b);
Var square(Var a);
Var sum(Var a);
Var mean(Var a);
/// -log(max(p[label], 1e-12)) for a 1 x C probability row.
Var nll(Var probs, int label);
/// -sum p log p over entries; entries with p <= 1e-12 contribute 0.
Var entropy(Var probs);

}  // namespace ad
}  // namespace retsimd
