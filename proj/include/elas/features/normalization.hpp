#ifndef ELAS_FEATURES_NORMALIZATION_HPP
#define ELAS_FEATURES_NORMALIZATION_HPP

#include <cmath>

#include <nlohmann/json.hpp>

#include "elas/core/stats.hpp"
#include "elas/features/common.hpp"

namespace elas::features {

/// Logistic map sending the 1% and 99% quantiles to 0.01 and 0.99.
struct NormalizationSpec {
  double q01 = 0.0;
  double q99 = 1.0;
  double k = 2.0 * std::log(99.0);
  double f0 = 0.5;

  /// Degenerate specs (equal or infinite quantiles) map every finite value to 0.5.
  bool degenerate() const { return !(q99 > q01) || !std::isfinite(q01) || !std::isfinite(q99); }

  static NormalizationSpec from_quantiles(double q01, double q99) {
    NormalizationSpec s;
    s.q01 = q01;
    s.q99 = q99;
    s.f0 = 0.5 * (q01 + q99);
    s.k = s.degenerate() ? 0.0 : 2.0 * std::log(99.0) / (q99 - q01);
    return s;
  }

  /// Fits on the non-NAN_OUT values; +/-inf take part in the quantiles.
  static NormalizationSpec fit(const std::vector<double>& values) {
    std::vector<double> v;
    for (double x : values)
      if (!is_nanout(x)) v.push_back(x);
    require(!v.empty(), ErrorCode::EmptyInput, "normalization needs at least one computable value");
    return from_quantiles(stats::quantile(v, 0.01), stats::quantile(v, 0.99));
  }

  double apply(double x) const {
    if (is_nanout(x)) return x;
    if (x == kInf) return 1.0;
    if (x == -kInf) return 0.0;
    if (degenerate()) return 0.5;
    return 1.0 / (1.0 + std::exp(-k * (x - f0)));
  }

  std::vector<double> apply(const std::vector<double>& xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(apply(x));
    return out;
  }
};

inline std::vector<double> normalize_feature(const std::vector<double>& values, const NormalizationSpec& spec) {
  return spec.apply(values);
}

namespace detail {
// JSON has no infinity; quantiles may be infinite, so encode them as strings.
inline nlohmann::json encode_real(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}
inline double decode_real(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw Error(ErrorCode::Config, "bad real value: " + s);
  }
  return j.get<double>();
}
}  // namespace detail

inline void to_json(nlohmann::json& j, const NormalizationSpec& s) {
  j = {{"q01", detail::encode_real(s.q01)},
       {"q99", detail::encode_real(s.q99)},
       {"k", s.k},
       {"f0", detail::encode_real(s.f0)}};
}

inline void from_json(const nlohmann::json& j, NormalizationSpec& s) {
  s = NormalizationSpec::from_quantiles(detail::decode_real(j.at("q01")), detail::decode_real(j.at("q99")));
}

}  // namespace elas::features

#endif  // ELAS_FEATURES_NORMALIZATION_HPP
