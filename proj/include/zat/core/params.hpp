#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "zat/core/tensor.hpp"

namespace zat {

// Ordered collection of named tensors. Insertion order is the canonical
// order used by the optimizer, gradient clipping, and checkpoints.
class ParamSet {
 public:
  Tensor& add(const std::string& name, Tensor t) {
    check(!contains(name), "ParamSet: duplicate name " + name);
    names_.push_back(name);
    return values_.emplace(name, std::move(t)).first->second;
  }

  bool contains(const std::string& name) const { return values_.count(name) > 0; }

  Tensor& operator[](const std::string& name) {
    auto it = values_.find(name);
    check(it != values_.end(), "ParamSet: unknown name " + name);
    return it->second;
  }
  const Tensor& operator[](const std::string& name) const {
    auto it = values_.find(name);
    check(it != values_.end(), "ParamSet: unknown name " + name);
    return it->second;
  }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Tensor> values_;
};

}  // namespace zat
