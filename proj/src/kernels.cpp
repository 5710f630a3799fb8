#include "qcheck/kernels.hpp"

#include "qcheck/error.hpp"

namespace qcheck {

double bandwidth(const KernelSpec& spec, Eigen::Index n) {
  if (n < 2) throw ConfigError("bandwidth needs n >= 2, got " + std::to_string(n));
  if (!(spec.c > 0.0) || !std::isfinite(spec.c)) throw ConfigError("--c must be positive");
  return spec.c * std::pow(static_cast<double>(n), -0.2);
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "triangle" || name == "triangle_var1") return KernelFamily::triangle_var1;
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "laplace") return KernelFamily::laplace;
  if (name == "logistic") return KernelFamily::logistic;
  throw ConfigError("--kernel: unknown kernel '" + std::string(name) + "'");
}

PsiFamily parse_psi_family(std::string_view name) {
  if (name == "gaussian" || name == "gaussian_product") return PsiFamily::gaussian_product;
  throw ConfigError("--psi: unknown weight '" + std::string(name) + "'");
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::triangle_var1: return "triangle";
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::laplace: return "laplace";
    case KernelFamily::logistic: return "logistic";
  }
  return "?";
}

std::string to_string(PsiFamily) { return "gaussian"; }

}  // namespace qcheck
