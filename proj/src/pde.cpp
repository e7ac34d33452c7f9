#include "finitenet/pde.hpp"

#include <numbers>
#include <stdexcept>

namespace finitenet {

PDESpec default_pde_spec(PDEKind kind) {
  PDESpec spec;
  spec.kind = kind;
  switch (kind) {
    case PDEKind::Advection:
      spec.wavespeed = 1.0;
      spec.domain_length = 2.0 * std::numbers::pi;
      break;
    case PDEKind::Burgers:
      spec.domain_length = 2.0 * std::numbers::pi;
      break;
    case PDEKind::KuramotoSivashinsky:
      spec.hyperviscosity = 1.0;
      spec.domain_length = 64.0;
      break;
  }
  return spec;
}

void validate_pde_spec(const PDESpec& spec) {
  if (!(spec.domain_length > 0.0)) {
    throw std::invalid_argument("pde spec: domain_length must be positive");
  }
  if (spec.kind == PDEKind::Advection && spec.wavespeed == 0.0) {
    throw std::invalid_argument("pde spec: advection wavespeed must be nonzero");
  }
  if (spec.kind == PDEKind::KuramotoSivashinsky &&
      !(spec.hyperviscosity > 0.0)) {
    throw std::invalid_argument("pde spec: KS hyperviscosity must be positive");
  }
}

std::string to_string(PDEKind kind) {
  switch (kind) {
    case PDEKind::Advection: return "advection";
    case PDEKind::Burgers: return "burgers";
    case PDEKind::KuramotoSivashinsky: return "ks";
  }
  return "unknown";
}

PDEKind pde_kind_from_string(const std::string& name) {
  if (name == "advection") return PDEKind::Advection;
  if (name == "burgers") return PDEKind::Burgers;
  if (name == "ks" || name == "kuramoto-sivashinsky") {
    return PDEKind::KuramotoSivashinsky;
  }
  throw std::invalid_argument("unknown equation kind: " + name);
}

}  // namespace finitenet
