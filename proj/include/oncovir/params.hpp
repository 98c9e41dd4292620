#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace oncovir {

/// Rate and geometry constants of the tumour/virus model in scaled form.
///
/// Tumour populations and virus density are both divided by the carrying
/// capacity `k`, so `beta` is the pre-scaled infectivity (k times the
/// dimensional rate) and `v0` is the injected virion density divided by `k`.
/// `k` itself only appears when totals are converted back to cell counts.
struct ModelParams {
  double r_u = 0.3;        // 1/day
  double k = 1.0e6;        // cells/mm^3
  double beta = 0.002;     // 1/(day * scaled virus density)
  double alpha = 3500.0;   // virions per lysed cell
  double delta_v = 4.0;    // 1/day
  double delta_i = 1.0;    // 1/day
  double d_u = 0.006;      // mm^2/day
  double d_v = 0.24;       // mm^2/day
  double u0 = 1.0;         // scaled
  double v0 = 1.9e4;       // scaled (1.9e10 virions/mm^3 over k)
  double r_t = 2.6;        // mm
  double r_v = 0.5;        // mm
  double domain_l = 10.0;  // mm

  /// Default rates and geometry at the given scaled infectivity.
  static ModelParams baseline(double beta = 0.002);

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

/// Parameters a one-parameter continuation can vary.
enum class Param { beta, alpha, delta_v, delta_i };

double get(const ModelParams& p, Param which);
void set(ModelParams& p, Param which, double value);
std::string_view to_string(Param which);
std::optional<Param> param_from_string(std::string_view name);

/// Named access to every ModelParams field, used by config overrides and
/// manifests. Names match the struct members.
struct ParamField {
  std::string_view name;
  double ModelParams::*member;
};
std::span<const ParamField> param_fields();
std::optional<double> get_field(const ModelParams& p, std::string_view name);
/// Returns false if `name` is not a ModelParams field.
bool set_field(ModelParams& p, std::string_view name, double value);

}  // namespace oncovir
