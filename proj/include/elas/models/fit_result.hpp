#ifndef ELAS_MODELS_FIT_RESULT_HPP
#define ELAS_MODELS_FIT_RESULT_HPP

#include <string>
#include <utility>
#include <variant>

#include "elas/core/error.hpp"

namespace elas::models {

/// A model that could not be trained, with the reason.
struct NotTrained {
  std::string reason;
};

/// Either a trained model or NotTrained.
template <class Model>
class FitResult {
 public:
  FitResult(Model m) : value_(std::move(m)) {}
  FitResult(NotTrained n) : value_(std::move(n)) {}

  bool ok() const noexcept { return std::holds_alternative<Model>(value_); }
  explicit operator bool() const noexcept { return ok(); }

  const Model& model() const {
    if (!ok()) throw Error(ErrorCode::Undefined, "model not trained: " + reason());
    return std::get<Model>(value_);
  }
  Model& model() {
    if (!ok()) throw Error(ErrorCode::Undefined, "model not trained: " + reason());
    return std::get<Model>(value_);
  }
  const Model& operator*() const { return model(); }
  const Model* operator->() const { return &model(); }

  std::string reason() const { return ok() ? std::string() : std::get<NotTrained>(value_).reason; }

 private:
  std::variant<Model, NotTrained> value_;
};

}  // namespace elas::models

#endif  // ELAS_MODELS_FIT_RESULT_HPP
