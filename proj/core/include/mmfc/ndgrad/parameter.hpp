#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mmfc/ndgrad/tensor.hpp"
#include "mmfc/rng.hpp"

namespace mmfc::ndgrad {

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter(std::string n, Tensor<T> v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape(), T{0}) {}

  void zero_grad() { grad.fill(T{0}); }
};

/// Owns a named set of parameters with stable addresses, so graphs may keep
/// raw pointers into it for the lifetime of the store.
template <typename T>
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(ParameterStore&&) noexcept = default;
  ParameterStore& operator=(ParameterStore&&) noexcept = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  Parameter<T>& add(std::string name, Tensor<T> value);
  /// Glorot-uniform initialised weight of shape {fan_in, fan_out}.
  Parameter<T>& add_glorot(std::string name, std::size_t fan_in, std::size_t fan_out, Rng& rng);
  Parameter<T>& add_zeros(std::string name, Shape shape);

  [[nodiscard]] Parameter<T>* find(std::string_view name);
  [[nodiscard]] const Parameter<T>* find(std::string_view name) const;
  Parameter<T>& get(std::string_view name);
  const Parameter<T>& get(std::string_view name) const;

  [[nodiscard]] std::vector<Parameter<T>*> all();
  [[nodiscard]] std::vector<const Parameter<T>*> all() const;
  /// Parameters whose name starts with prefix.
  [[nodiscard]] std::vector<Parameter<T>*> with_prefix(std::string_view prefix);

  [[nodiscard]] std::size_t size() const { return params_.size(); }
  [[nodiscard]] std::size_t scalar_count() const;

  void zero_grad();

  /// Copies values (not gradients) into a store of another precision.
  template <typename U>
  [[nodiscard]] ParameterStore<U> cast() const {
    ParameterStore<U> out;
    for (const auto& p : params_) out.add(p->name, p->value.template cast<U>());
    return out;
  }

  /// FNV-1a over names and value bytes.
  [[nodiscard]] std::uint64_t checksum() const;

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
};

extern template class ParameterStore<float>;
extern template class ParameterStore<double>;

}  // namespace mmfc::ndgrad
