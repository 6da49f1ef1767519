#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "stabcert/checks.hpp"
#include "stabcert/config.hpp"

namespace stabcert {

/// Gauge invariance, diamagnetic domination (pointwise and trace), IMS identity,
/// operator invariants and the scalar transfer minimization on one grid.
std::vector<CheckResult> run_exact_suite(const ExactSettings& s, const CutoffProfile& profile, std::uint64_t seed,
                                         std::size_t workers);

/// Ball Riesz means (free and magnetic), operator transfer check and BLY margins.
std::vector<CheckResult> run_riesz_suite(const ContinuumSettings& s);

/// Localization bound with U*eps and Omega computed for the profile.
std::vector<CheckResult> run_localization_suite(const ContinuumSettings& s, const ChainParams& params,
                                                const CutoffProfile& profile, const QuadratureConfig& cfg,
                                                std::uint64_t seed);

/// Critical Kato trend; the supercritical trend is appended as informational
/// when requested.
std::vector<CheckResult> run_kato_suite(const KatoSettings& s);

std::vector<CheckResult> run_battery(const RunConfig& config, std::size_t workers);

}  // namespace stabcert
