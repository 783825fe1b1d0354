#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vistrip/autodiff.hpp"

// Parameter structs are templates over their leaf type: `P<Tensor>` holds
// weights, `P<Var>` the same weights bound to a tape. Each struct provides
//   static void visit(Self&, const std::string& prefix, F&&)  -> f(name, leaf)
//   template <class U, class F> P<U> map(F&&) const           -> leafwise transform
namespace vistrip {

template <class P, class F>
void for_each_param(P& params, const std::string& prefix, F&& f) {
  std::remove_const_t<P>::visit(params, prefix, f);
}

/// Registers every weight as a trainable leaf on `tape`.
template <template <class> class P>
P<Var> bind(Tape& tape, const P<Tensor>& params) {
  return params.template map<Var>([&tape](const Tensor& t) { return tape.leaf(t); });
}

/// Same structure as `bind`, but the weights receive no gradient.
template <template <class> class P>
P<Var> bind_constant(Tape& tape, const P<Tensor>& params) {
  return params.template map<Var>([&tape](const Tensor& t) { return tape.constant(t); });
}

/// Gradients of bound weights after Tape::backward.
template <template <class> class P>
P<Tensor> gradients(const P<Var>& vars) {
  return vars.template map<Tensor>([](const Var& v) { return v.grad(); });
}

template <template <class> class P>
P<Tensor> zeros_like(const P<Tensor>& params) {
  return params.template map<Tensor>([](const Tensor& t) { return Tensor(t.shape()); });
}

template <class P>
std::size_t count_scalars(const P& params) {
  std::size_t n = 0;
  for_each_param(params, "", [&n](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

/// Flat list of (name, tensor*) in visit order.
template <class P>
std::vector<std::pair<std::string, Tensor*>> named_tensors(P& params) {
  std::vector<std::pair<std::string, Tensor*>> out;
  for_each_param(params, "", [&out](const std::string& name, Tensor& t) { out.emplace_back(name, &t); });
  return out;
}

}  // namespace vistrip
