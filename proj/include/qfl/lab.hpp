/**
 * @file lab.hpp
 * @brief Shared, lazily built objects of one run (psi, p0, metrics, integrals).
 */
#pragma once

#include <chrono>
#include <memory>
#include <optional>

#include "qfl/config.hpp"
#include "qfl/flow_sim.hpp"
#include "qfl/metric_family.hpp"
#include "qfl/psi_core.hpp"
#include "qfl/quartic_integral.hpp"

namespace qfl {

/**
 * @brief Owns the psi solution and everything derived from it for a config.
 *
 * Metrics and natural systems refer to the psi solution by pointer, so a Lab
 * is neither copyable nor movable. Every accessor builds on first use.
 */
class Lab {
 public:
  explicit Lab(RunConfig cfg) : cfg_(std::move(cfg)) {
    const auto t0 = std::chrono::steady_clock::now();
    psi_ = std::make_unique<PsiSolution>(solve_psi(cfg_.y_max, cfg_.tol));
    solve_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  Lab(const Lab&) = delete;
  Lab& operator=(const Lab&) = delete;

  [[nodiscard]] const RunConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const PsiSolution& psi() const noexcept { return *psi_; }
  [[nodiscard]] double solve_seconds() const noexcept { return solve_seconds_; }

  [[nodiscard]] const AsymptoticData& asymptotics() {
    if (!asym_) asym_ = compute_p0(*psi_);
    return *asym_;
  }
  [[nodiscard]] double p0() { return asymptotics().p0; }

  [[nodiscard]] const ConformalMetric& fam1() {
    if (!fam1_) fam1_ = build_family1(*psi_, cfg_.c, cfg_.d1);
    return *fam1_;
  }
  [[nodiscard]] const ConformalMetric& fam2() {
    if (!fam2_) fam2_ = build_family2(*psi_, cfg_.c, cfg_.d1, cfg_.p);
    return *fam2_;
  }
  [[nodiscard]] const QuarticIntegral& quartic1() {
    if (!quartic1_) quartic1_ = build_quartic(fam1());
    return *quartic1_;
  }
  [[nodiscard]] const QuarticIntegral& quartic2() {
    if (!quartic2_) quartic2_ = build_quartic(fam2());
    return *quartic2_;
  }

  [[nodiscard]] const NaturalSystem& s1() {
    if (!s1_) s1_ = build_natural(*psi_, Variant::S1);
    return *s1_;
  }
  /// S2(p) with p checked against the computed p0 (strict).
  [[nodiscard]] const NaturalSystem& s2() {
    if (!s2_) s2_ = build_natural(*psi_, Variant::S2, cfg_.p, p0(), true);
    return *s2_;
  }

 private:
  RunConfig cfg_;
  std::unique_ptr<PsiSolution> psi_;
  double solve_seconds_ = 0.0;
  std::optional<AsymptoticData> asym_;
  std::optional<ConformalMetric> fam1_, fam2_;
  std::optional<QuarticIntegral> quartic1_, quartic2_;
  std::optional<NaturalSystem> s1_, s2_;
};

}  // namespace qfl
