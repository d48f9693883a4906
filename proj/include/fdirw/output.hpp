#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fdirw/driver.hpp"

namespace fdirw {

inline constexpr const char* kKineticsHeader = "t,Q_S,Q_L_near,c_far,Q_total";

void write_kinetics_csv(const std::filesystem::path& path, const KineticsRecord& kinetics);
KineticsRecord read_kinetics_csv(const std::filesystem::path& path);

/// Deterministic run summary: column documentation, counts, FLOPs, counters,
/// conservation figures. Wall times go to write_timing instead.
void write_report(const std::filesystem::path& path, const RunReport& report,
                  const KineticsRecord& kinetics);
void write_timing(const std::filesystem::path& path, const RunReport& report);

/// One row per sample: t, then c̄_S, AE and RE for every mode.
void write_comparison_csv(const std::filesystem::path& path, const PrecisionComparison& cmp);
void write_scaling_csv(const std::filesystem::path& path, const ScalingTable& table);

std::string kinetics_plot(const std::vector<std::pair<std::string, KineticsRecord>>& runs);
std::string rel_error_plot(const PrecisionComparison& cmp);
std::string scaling_plot(const ScalingTable& table);

void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace fdirw
