#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

#include "neuromix/tensor.hpp"

namespace neuromix {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
// is alive and has not been cleared.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    std::size_t id() const noexcept { return id_; }
    Tape& tape() const noexcept { return *tape_; }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

// Reverse-mode tape. Nodes are appended in forward execution order, so the
// reverse of insertion order is a valid topological order for backward().
//
// Values of `parameter` and `constant_ref` nodes are borrowed: the referenced
// tensors must outlive the tape.
class Tape {
public:
    // Propagates `grad_out` (the gradient of the node's output) into the
    // gradient buffers of the node's inputs.
    using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    Var constant_ref(const Tensor& value);
    Var input(Tensor value);
    Var parameter(Parameter& param);

    // Appends an operation result. The node tracks gradients iff any input does.
    Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

    // Seeds d(loss)/d(loss) = 1 and walks the tape in reverse, visiting each
    // node once. Parameter gradients are accumulated (+=) into Parameter::grad.
    void backward(Var loss);

    const Tensor& value(std::size_t id) const;
    bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }

    // Gradient of a node after backward(); zeros if nothing flowed into it.
    Tensor grad(Var v) const;

    // Gradient accumulation target for node `id` during backward, or nullptr
    // when the node does not track gradients.
    Tensor* grad_target(std::size_t id);

    std::size_t size() const noexcept { return nodes_.size(); }
    void clear();

private:
    struct Node {
        Tensor owned;
        const Tensor* borrowed = nullptr;
        Tensor grad;
        Parameter* param = nullptr;
        BackwardFn backward;
        bool requires_grad = false;

        const Tensor& value() const { return borrowed ? *borrowed : owned; }
    };

    Var push(Node node);

    std::deque<Node> nodes_;
    bool backward_done_ = false;
};

}  // namespace neuromix
