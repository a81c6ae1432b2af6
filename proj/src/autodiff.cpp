// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "retsimd/error.hpp"

namespace retsimd {

Parameter& ParameterSet::add(const std::string& name, Matrix init) {
    if (contains(name)) {
        throw ContractError("parameter registered twice: " + name);
    }
    Parameter p{name, std::move(init), Matrix()};
    p.zero_grad();
    params_.push_back(std::move(p));
    return params_.back();
}

Parameter& ParameterSet::get(const std::string& name) {
    for (auto& p : params_) {
        if (p.name == name) return p;
    }
    throw ContractError("unknown parameter: " + name);
}

const Parameter& ParameterSet::get(const std::string& name) const {
    for (const auto& p : params_) {
        if (p.name == name) return p;
    }
    throw ContractError("unknown parameter: " + name);
}

bool ParameterSet::contains(const std::string& name) const {
    for (const auto& p : params_) {
        if (p.name == name) return true;
    }
    return false;
}

void ParameterSet::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

bool ParameterSet::all_finite() const {
    for (const auto& p : params_) {
        if (!p.value.allFinite()) return false;
    }
    return true;
}

std::size_t ParameterSet::numel() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
}

bool operator==(const ParameterSet& a, const ParameterSet& b) {
    if (a.params_.size() != b.params_.size()) return false;
    for (std::size_t i = 0; i < a.params_.size(); ++i) {
        const auto& x = a.params_[i];
        const auto& y = b.params_[i];
        if (x.name != y.name || x.value.rows() != y.value.rows() || x.value.cols() != y.value.cols()) {
            return false;
        }
        // bitwise, so that NaN payloads and signed zeros are compared exactly
        if (std::memcmp(x.value.data(), y.value.data(), sizeof(double) * x.value.size()) != 0) {
            return false;
        }
    }
    return true;
}

namespace ad {

const Matrix& Var::value() const { return tape->value(id); }

Var Tape::constant(Matrix value) { return push(std::move(value), nullptr); }

Var Tape::param(Parameter& p) {
    Var v = push(p.value, nullptr);
    nodes_[v.id].param = &p;
    return v;
}

Var Tape::push(Matrix value, Backward backward) {
    Node n;
    n.grad = Matrix::Zero(value.rows(), value.cols());
    n.value = std::move(value);
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{this, nodes_.size() - 1};
}

void Tape::backward(Var root) {
    if (root.tape != this) throw ContractError("backward: variable belongs to another tape");
    if (nodes_[root.id].value.size() != 1) throw ContractError("backward: root must be a scalar");
    for (auto& n : nodes_) n.grad.setZero();
    nodes_[root.id].grad(0, 0) = 1.0;
    for (std::size_t i = root.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.backward) n.backward(*this, i);
        if (n.param != nullptr) n.param->grad += n.grad;
    }
}

namespace {

void require_same_tape(Var a, Var b) {
    if (a.tape != b.tape) throw ContractError("variables from different tapes");
}

void require_shape(bool ok, const char* op) {
    if (!ok) throw ContractError(std::string("shape mismatch in ") + op);
}

}  // namespace

Var matmul(Var a, Var b) {
    require_same_tape(a, b);
    require_shape(a.cols() == b.rows(), "matmul");
    const std::size_t ia = a.id, ib = b.id;
    return a.tape->push(a.value() * b.value(), [ia, ib](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        t.grad_mut(ia).noalias() += g * t.value(ib).transpose();
        t.grad_mut(ib).noalias() += t.value(ia).transpose() * g;
    });
}

Var add(Var a, Var b) {
    require_same_tape(a, b);
    require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "add");
    const std::size_t ia = a.id, ib = b.id;
    return a.tape->push(a.value() + b.value(), [ia, ib](Tape& t, std::size_t self) {
        t.grad_mut(ia) += t.grad(self);
        t.grad_mut(ib) += t.grad(self);
    });
}

Var sub(Var a, Var b) {
    require_same_tape(a, b);
    require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "sub");
    const std::size_t ia = a.id, ib = b.id;
    return a.tape->push(a.value() - b.value(), [ia, ib](Tape& t, std::size_t self) {
        t.grad_mut(ia) += t.grad(self);
        t.grad_mut(ib) -= t.grad(self);
    });
}

Var add_row(Var a, Var row) {
    require_same_tape(a, row);
    require_shape(row.rows() == 1 && row.cols() == a.cols(), "add_row");
    const std::size_t ia = a.id, ir = row.id;
    Matrix out = a.value();
    out.rowwise() += row.value().row(0);
    return a.tape->push(std::move(out), [ia, ir](Tape& t, std::size_t self) {
        t.grad_mut(ia) += t.grad(self);
        t.grad_mut(ir) += t.grad(self).colwise().sum();
    });
}

Var scale(Var a, double s) {
    const std::size_t ia = a.id;
    return a.tape->push(a.value() * s, [ia, s](Tape& t, std::size_t self) {
        t.grad_mut(ia) += s * t.grad(self);
    });
}

Var relu(Var a) {
    const std::size_t ia = a.id;
    return a.tape->push(a.value().cwiseMax(0.0), [ia](Tape& t, std::size_t self) {
        const Matrix mask = (t.value(ia).array() > 0.0).cast<double>().matrix();
        t.grad_mut(ia) += t.grad(self).cwiseProduct(mask);
    });
}

Var transpose(Var a) {
    const std::size_t ia = a.id;
    return a.tape->push(a.value().transpose(), [ia](Tape& t, std::size_t self) {
        t.grad_mut(ia) += t.grad(self).transpose();
    });
}

namespace {

Matrix softmax_rows_value(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double mx = x.row(r).maxCoeff();
        const auto e = (x.row(r).array() - mx).exp();
        out.row(r) = (e / e.sum()).matrix();
    }
    return out;
}

}  // namespace

Var softmax_rows(Var a) {
    const std::size_t ia = a.id;
    Matrix y = softmax_rows_value(a.value());
    if (!y.allFinite()) throw NumericError("softmax produced non-finite values");
    return a.tape->push(std::move(y), [ia](Tape& t, std::size_t self) {
        const Matrix& y = t.value(self);
        const Matrix& g = t.grad(self);
        for (Eigen::Index r = 0; r < y.rows(); ++r) {
            const double dot = y.row(r).dot(g.row(r));
            t.grad_mut(ia).row(r).array() += y.row(r).array() * (g.row(r).array() - dot);
        }
    });
}

Var softmax_cols(Var a) { return transpose(softmax_rows(transpose(a))); }

Var scale_rows(Var weights, Var m) {
    require_same_tape(weights, m);
    require_shape(weights.cols() == 1 && weights.rows() == m.rows(), "scale_rows");
    const std::size_t iw = weights.id, im = m.id;
    Matrix out = weights.value().col(0).asDiagonal() * m.value();
    return m.tape->push(std::move(out), [iw, im](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        t.grad_mut(iw).col(0) += g.cwiseProduct(t.value(im)).rowwise().sum();
        t.grad_mut(im) += t.value(iw).col(0).asDiagonal() * g;
    });
}

Var mean_rows(Var a) {
    const std::size_t ia = a.id;
    const double n = static_cast<double>(a.rows());
    return a.tape->push(a.value().colwise().mean(), [ia, n](Tape& t, std::size_t self) {
        t.grad_mut(ia).rowwise() += t.grad(self).row(0) / n;
    });
}

Var vstack(const std::vector<Var>& parts) {
    if (parts.empty()) throw ContractError("vstack of nothing");
    Eigen::Index rows = 0;
    const Eigen::Index cols = parts.front().cols();
    for (const auto& p : parts) {
        require_same_tape(parts.front(), p);
        require_shape(p.cols() == cols, "vstack");
        rows += p.rows();
    }
    Matrix out(rows, cols);
    std::vector<std::size_t> ids;
    Eigen::Index r = 0;
    for (const auto& p : parts) {
        out.middleRows(r, p.rows()) = p.value();
        r += p.rows();
        ids.push_back(p.id);
    }
    return parts.front().tape->push(std::move(out), [ids](Tape& t, std::size_t self) {
        Eigen::Index r = 0;
        for (auto id : ids) {
            const Eigen::Index n = t.value(id).rows();
            t.grad_mut(id) += t.grad(self).middleRows(r, n);
            r += n;
        }
    });
}

Var hstack(const std::vector<Var>& parts) {
    if (parts.empty()) throw ContractError("hstack of nothing");
    Eigen::Index cols = 0;
    const Eigen::Index rows = parts.front().rows();
    for (const auto& p : parts) {
        require_same_tape(parts.front(), p);
        require_shape(p.rows() == rows, "hstack");
        cols += p.cols();
    }
    Matrix out(rows, cols);
    std::vector<std::size_t> ids;
    Eigen::Index c = 0;
    for (const auto& p : parts) {
        out.middleCols(c, p.cols()) = p.value();
        c += p.cols();
        ids.push_back(p.id);
    }
    return parts.front().tape->push(std::move(out), [ids](Tape& t, std::size_t self) {
        Eigen::Index c = 0;
        for (auto id : ids) {
            const Eigen::Index n = t.value(id).cols();
            t.grad_mut(id) += t.grad(self).middleCols(c, n);
            c += n;
        }
    });
}

Var hadamard(Var a, Var b) {
    require_same_tape(a, b);
    require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard");
    const std::size_t ia = a.id, ib = b.id;
    return a.tape->push(a.value().cwiseProduct(b.value()), [ia, ib](Tape& t, std::size_t self) {
        t.grad_mut(ia) += t.grad(self).cwiseProduct(t.value(ib));
        t.grad_mut(ib) += t.grad(self).cwiseProduct(t.value(ia));
    });
}

Var square(Var a) {
    const std::size_t ia = a.id;
    return a.tape->push(a.value().cwiseAbs2(), [ia](Tape& t, std::size_t self) {
        t.grad_mut(ia) += 2.0 * t.grad(self).cwiseProduct(t.value(ia));
    });
}

Var sum(Var a) {
    const std::size_t ia = a.id;
    Matrix out(1, 1);
    out(0, 0) = a.value().sum();
    return a.tape->push(std::move(out), [ia](Tape& t, std::size_t self) {
        t.grad_mut(ia).array() += t.grad(self)(0, 0);
    });
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var nll(Var probs, int label) {
    require_shape(probs.rows() == 1 && label >= 0 && label < probs.cols(), "nll");
    constexpr double kFloor = 1e-12;
    const std::size_t ip = probs.id;
    const double p = probs.value()(0, label);
    Matrix out(1, 1);
    out(0, 0) = -std::log(std::max(p, kFloor));
    return probs.tape->push(std::move(out), [ip, label, p](Tape& t, std::size_t self) {
        if (p > kFloor) t.grad_mut(ip)(0, label) -= t.grad(self)(0, 0) / p;
    });
}

Var entropy(Var probs) {
    constexpr double kFloor = 1e-12;
    const std::size_t ip = probs.id;
    double h = 0.0;
    const Matrix& p = probs.value();
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double v = p.data()[i];
        if (v > kFloor) h -= v * std::log(v);
    }
    Matrix out(1, 1);
    out(0, 0) = h;
    return probs.tape->push(std::move(out), [ip](Tape& t, std::size_t self) {
        const Matrix& p = t.value(ip);
        Matrix& g = t.grad_mut(ip);
        const double up = t.grad(self)(0, 0);
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double v = p.data()[i];
            if (v > kFloor) g.data()[i] -= up * (std::log(v) + 1.0);
        }
    });
}

}  // namespace ad
}  // namespace retsimd
