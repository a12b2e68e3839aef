#pragma once

#include <span>
#include <string>
#include <vector>

#include "dpf/azimuth.hpp"
#include "dpf/estimation.hpp"
#include "dpf/experiments.hpp"
#include "dpf/filter.hpp"

namespace dpf::csv {

/// %.17g — enough digits that parse + re-format reproduces the text exactly.
std::string format_double(double v);

std::string truth_csv(const Truth& truth);
std::string filter_csv(const FilterOutput& out, const Truth& truth);
std::string particles_csv(const FilterOutput& out);
std::string table1_csv(const IntrinsicTable& table);
std::string table2_csv(const RunStats& stats);
std::string table3_csv(std::span<const SigmaScanRow> rows);
std::string fig1_csv(const RobustnessResult& result);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Parse one CSV document into rows of fields (no quoting; the emitted
/// schemas never need it).
std::vector<std::vector<std::string>> parse(const std::string& content);

}  // namespace dpf::csv
