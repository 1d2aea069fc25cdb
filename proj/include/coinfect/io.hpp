#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coinfect/branch.hpp"
#include "coinfect/simulate.hpp"

namespace coinfect::io {

// 17 significant digits, '.' decimal point.
std::string fmt(double v);

std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

// Header block describing a reproducible run; embedded in every output.
struct RunMeta {
  std::string command;
  ModelParams params;
  std::uint64_t seed = 0;
  std::string config;  // canonical flag string the hash is computed from
  std::string config_hash() const;
  std::string csv_header() const;        // '#'-prefixed comment lines
  std::string json_meta() const;         // meta object as a JSON string
};

std::string branch_to_csv(const Branch& b, const RunMeta& meta);
std::string events_to_json(const Branch& b, const RunMeta& meta);
std::string trajectory_to_csv(const Trajectory& t, const RunMeta& meta);
std::string scenario_to_json(const Scenario& s, const RunMeta& meta);
std::string derived_to_json(const DerivedQuantities& d, const std::vector<AssumptionCheck>& checks,
                            const RunMeta& meta);
std::string equilibria_to_json(const std::vector<Equilibrium>& eqs,
                               const std::vector<StabilityReport>& reps, double K,
                               const RunMeta& meta);
std::string hopf_to_json(const HopfResult& h, const RunMeta& meta);

void write_file(const std::string& path, const std::string& content);

}  // namespace coinfect::io
