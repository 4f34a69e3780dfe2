#include "mmfc/ndgrad/parameter.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "mmfc/hash.hpp"

namespace mmfc::ndgrad {

template <typename T>
Parameter<T>& ParameterStore<T>::add(std::string name, Tensor<T> value) {
  if (find(name) != nullptr) throw Error("parameter '" + name + "' already exists");
  params_.push_back(std::make_unique<Parameter<T>>(std::move(name), std::move(value)));
  return *params_.back();
}

template <typename T>
Parameter<T>& ParameterStore<T>::add_glorot(std::string name, std::size_t fan_in,
                                            std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor<T> w(Shape{fan_in, fan_out});
  for (auto& v : w.values()) v = static_cast<T>(rng.uniform(-limit, limit));
  return add(std::move(name), std::move(w));
}

template <typename T>
Parameter<T>& ParameterStore<T>::add_zeros(std::string name, Shape shape) {
  return add(std::move(name), Tensor<T>(std::move(shape)));
}

template <typename T>
Parameter<T>* ParameterStore<T>::find(std::string_view name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

template <typename T>
const Parameter<T>* ParameterStore<T>::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

template <typename T>
Parameter<T>& ParameterStore<T>::get(std::string_view name) {
  if (auto* p = find(name)) return *p;
  throw Error("no parameter named '" + std::string(name) + "'");
}

template <typename T>
const Parameter<T>& ParameterStore<T>::get(std::string_view name) const {
  if (const auto* p = find(name)) return *p;
  throw Error("no parameter named '" + std::string(name) + "'");
}

template <typename T>
std::vector<Parameter<T>*> ParameterStore<T>::all() {
  std::vector<Parameter<T>*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

template <typename T>
std::vector<const Parameter<T>*> ParameterStore<T>::all() const {
  std::vector<const Parameter<T>*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

template <typename T>
std::vector<Parameter<T>*> ParameterStore<T>::with_prefix(std::string_view prefix) {
  std::vector<Parameter<T>*> out;
  for (auto& p : params_) {
    if (p->name.starts_with(prefix)) out.push_back(p.get());
  }
  return out;
}

template <typename T>
std::size_t ParameterStore<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

template <typename T>
std::uint64_t ParameterStore<T>::checksum() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& p : params_) {
    h = fnv1a(p->name, h);
    for (T v : p->value.values()) {
      std::uint8_t bytes[sizeof(T)];
      std::memcpy(bytes, &v, sizeof(T));
      h = fnv1a(std::span<const std::uint8_t>(bytes, sizeof(T)), h);
    }
  }
  return h;
}

template class ParameterStore<float>;
template class ParameterStore<double>;

}  // namespace mmfc::ndgrad
