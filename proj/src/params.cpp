#include "oncovir/params.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace oncovir {

namespace {

constexpr std::array<ParamField, 13> kFields{{
    {"r_u", &ModelParams::r_u},
    {"k", &ModelParams::k},
    {"beta", &ModelParams::beta},
    {"alpha", &ModelParams::alpha},
    {"delta_v", &ModelParams::delta_v},
    {"delta_i", &ModelParams::delta_i},
    {"d_u", &ModelParams::d_u},
    {"d_v", &ModelParams::d_v},
    {"u0", &ModelParams::u0},
    {"v0", &ModelParams::v0},
    {"r_t", &ModelParams::r_t},
    {"r_v", &ModelParams::r_v},
    {"domain_l", &ModelParams::domain_l},
}};

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("ModelParams: ") + what);
}

}  // namespace

ModelParams ModelParams::baseline(double beta) {
  ModelParams p;
  p.beta = beta;
  return p;
}

void ModelParams::validate() const {
  for (const auto& f : kFields) {
    if (!std::isfinite(this->*f.member)) {
      throw std::invalid_argument("ModelParams: " + std::string(f.name) + " is not finite");
    }
  }
  require(r_u > 0, "r_u must be positive");
  require(k > 0, "k must be positive");
  require(beta > 0, "beta must be positive");
  require(delta_v > 0, "delta_v must be positive");
  require(delta_i > 0, "delta_i must be positive");
  require(d_u > 0, "d_u must be positive");
  require(d_v > 0, "d_v must be positive");
  require(r_t > 0, "r_t must be positive");
  require(r_v > 0, "r_v must be positive");
  require(domain_l > 0, "domain_l must be positive");
  require(u0 >= 0, "u0 must be nonnegative");
  require(v0 >= 0, "v0 must be nonnegative");
  require(alpha > 1, "alpha must exceed 1");
  require(r_v <= r_t && r_t <= domain_l, "need r_v <= r_t <= domain_l");
}

double get(const ModelParams& p, Param which) {
  switch (which) {
    case Param::beta: return p.beta;
    case Param::alpha: return p.alpha;
    case Param::delta_v: return p.delta_v;
    case Param::delta_i: return p.delta_i;
  }
  return 0.0;
}

void set(ModelParams& p, Param which, double value) {
  switch (which) {
    case Param::beta: p.beta = value; break;
    case Param::alpha: p.alpha = value; break;
    case Param::delta_v: p.delta_v = value; break;
    case Param::delta_i: p.delta_i = value; break;
  }
}

std::string_view to_string(Param which) {
  switch (which) {
    case Param::beta: return "beta";
    case Param::alpha: return "alpha";
    case Param::delta_v: return "delta_v";
    case Param::delta_i: return "delta_i";
  }
  return "?";
}

std::optional<Param> param_from_string(std::string_view name) {
  for (Param q : {Param::beta, Param::alpha, Param::delta_v, Param::delta_i}) {
    if (to_string(q) == name) return q;
  }
  return std::nullopt;
}

std::span<const ParamField> param_fields() { return kFields; }

std::optional<double> get_field(const ModelParams& p, std::string_view name) {
  for (const auto& f : kFields) {
    if (f.name == name) return p.*f.member;
  }
  return std::nullopt;
}

bool set_field(ModelParams& p, std::string_view name, double value) {
  for (const auto& f : kFields) {
    if (f.name == name) {
      p.*f.member = value;
      return true;
    }
  }
  return false;
}

}  // namespace oncovir
