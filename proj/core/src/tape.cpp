#include "neuromix/tape.hpp"

#include <algorithm>

#include "neuromix/error.hpp"

namespace neuromix {

const Tensor& Var::value() const {
    if (!tape_) throw StateError("use of an unbound Var");
    return tape_->value(id_);
}

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
    Node n;
    n.owned = std::move(value);
    return push(std::move(n));
}

Var Tape::constant_ref(const Tensor& value) {
    Node n;
    n.borrowed = &value;
    return push(std::move(n));
}

Var Tape::input(Tensor value) {
    Node n;
    n.owned = std::move(value);
    n.requires_grad = true;
    return push(std::move(n));
}

Var Tape::parameter(Parameter& param) {
    if (param.grad.shape() != param.value.shape()) param.grad = Tensor(param.value.shape());
    Node n;
    n.borrowed = &param.value;
    n.param = &param;
    n.requires_grad = true;
    return push(std::move(n));
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
    Node n;
    n.owned = std::move(value);
    n.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                  [this](std::size_t i) { return nodes_.at(i).requires_grad; });
    if (n.requires_grad) n.backward = std::move(backward);
    return push(std::move(n));
}

const Tensor& Tape::value(std::size_t id) const { return nodes_.at(id).value(); }

Tensor* Tape::grad_target(std::size_t id) {
    Node& n = nodes_.at(id);
    if (!n.requires_grad) return nullptr;
    if (n.grad.empty()) n.grad = Tensor(n.value().shape());
    return &n.grad;
}

Tensor Tape::grad(Var v) const {
    const Node& n = nodes_.at(v.id());
    if (n.grad.empty()) return Tensor(n.value().shape());
    return n.grad;
}

void Tape::backward(Var loss) {
    if (nodes_.empty()) throw StateError("backward called on an empty tape");
    if (&loss.tape() != this) throw StateError("loss was recorded on a different tape");
    if (backward_done_) throw StateError("backward already ran on this tape");
    if (loss.value().size() != 1) {
        throw DimensionError("backward needs a scalar loss, got shape " + shape_string(loss.shape()));
    }
    backward_done_ = true;
    if (!nodes_[loss.id()].requires_grad) return;

    grad_target(loss.id())->fill(1.0);
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.grad.empty()) continue;
        if (n.backward) n.backward(*this, n.grad);
        if (n.param) {
            auto dst = n.param->grad.data();
            auto src = n.grad.data();
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
        }
    }
}

void Tape::clear() {
    nodes_.clear();
    backward_done_ = false;
}

}  // namespace neuromix
